"""
This module contains the Java frontend, which indexes mutation sites from a tree-sitter syntax
tree.
"""

import logging
from typing import Dict, FrozenSet, Iterator, List, Optional, Set, Tuple

import tree_sitter_java
from tree_sitter import Language, Node, Parser

from source_model.errors import ParseFailureError
from source_model.models import (
    BoundaryLevel,
    BoundSite,
    CommentSite,
    FunctionSpan,
    IdentifierEntry,
    LoopSite,
    OperatorSite,
    Span,
    StatementBoundary,
    SubjectLanguage,
    SyntaxIndex,
)
from source_model.utils import LineMap, line_count

logger = logging.getLogger(__name__)

JAVA_LANGUAGE = Language(tree_sitter_java.language())

BOOLEAN_SYMBOLS = frozenset({"&&", "||", "==", "!=", "<", "<=", ">", ">="})
ARITH_SYMBOLS = frozenset({"+", "-", "*", "/", "%"})
BOUND_SYMBOLS = frozenset({"<", "<=", ">", ">="})
COMMENT_TYPES = frozenset({"line_comment", "block_comment", "comment"})
CALLABLE_TYPES = frozenset({"method_declaration", "constructor_declaration"})
INNER_SCOPE_TYPES = frozenset(
    {"lambda_expression", "method_declaration", "constructor_declaration"}
)
NESTING_TYPES = INNER_SCOPE_TYPES | {"class_body"}
ATOMIC_TYPES = frozenset(
    {
        "identifier",
        "decimal_integer_literal",
        "field_access",
        "method_invocation",
        "array_access",
        "parenthesized_expression",
    }
)
STRING_METHODS = frozenset(
    {
        "toString",
        "substring",
        "trim",
        "strip",
        "toUpperCase",
        "toLowerCase",
        "format",
        "join",
        "repeat",
        "concat",
        "replace",
    }
)
PRIMITIVE_NUMERIC = frozenset({"byte", "short", "int", "long", "float", "double", "char"})
UNRENAMEABLE_METHODS = frozenset(
    {
        "main",
        "toString",
        "equals",
        "hashCode",
        "compareTo",
        "compare",
        "run",
        "call",
        "clone",
        "close",
        "iterator",
    }
)
JAVA_KEYWORDS = frozenset(
    """
    abstract assert boolean break byte case catch char class const continue default do double
    else enum extends final finally float for goto if implements import instanceof int interface
    long native new package private protected public return short static strictfp super switch
    synchronized this throw throws transient try void volatile while true false null var record
    yield sealed permits
    """.split()
)
JAVA_LANG_NAMES = frozenset(
    """
    String Math System Integer Long Double Float Boolean Character Byte Short Object StringBuilder
    Arrays List ArrayList LinkedList Map HashMap TreeMap Set HashSet TreeSet Collections Scanner
    Exception RuntimeException Thread Iterator Optional Deque ArrayDeque Queue PriorityQueue
    """.split()
)


def parse_java(source_text: str) -> SyntaxIndex:
    """
    Parses Java source into a SyntaxIndex.
    """
    parser = Parser(JAVA_LANGUAGE)
    tree = parser.parse(source_text.encode("utf-8"))
    if tree.root_node.has_error:
        error = _first_error(tree.root_node)
        row, col = error.start_point if error is not None else (0, 0)
        kind = "missing token" if error is not None and error.is_missing else "syntax error"
        raise ParseFailureError(f"Java frontend rejected source: {kind}", row + 1, col + 1)
    return _JavaIndexer(source_text, tree.root_node).build()


def _walk(node: Node) -> Iterator[Node]:
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(current.children))


def _first_error(root: Node) -> Optional[Node]:
    for node in _walk(root):
        if node.type == "ERROR" or node.is_missing:
            return node
    return None


def _text(node: Optional[Node]) -> str:
    if node is None or node.text is None:
        return ""
    return node.text.decode("utf-8")


def _operator(node: Node) -> str:
    operator = node.child_by_field_name("operator")
    if operator is not None:
        return operator.type
    for child in node.children:
        if not child.is_named:
            return child.type
    return ""


def _statements(block: Node) -> List[Node]:
    return [child for child in block.named_children if child.type not in COMMENT_TYPES]


def _declarator_names(node: Node) -> List[Node]:
    names = []
    for declarator in node.children_by_field_name("declarator"):
        name = declarator.child_by_field_name("name")
        if name is not None:
            names.append(name)
    return names


def _has_ancestor(node: Node, types: FrozenSet[str], stop: Optional[Node] = None) -> bool:
    parent = node.parent
    while parent is not None and parent != stop:
        if parent.type in types:
            return True
        parent = parent.parent
    return False


def default_return_statement(return_type: Optional[str]) -> str:
    if return_type == "void":
        return "return;"
    if return_type == "boolean":
        return "return false;"
    if return_type in PRIMITIVE_NUMERIC:
        return "return 0;"
    return "return null;"


class _JavaIndexer:
    def __init__(self, source_text: str, root: Node) -> None:
        self._root = root
        self._lines = LineMap(source_text)
        self._line_count = line_count(source_text)
        self._nodes = list(_walk(root))
        self._string_scalars: Set[str] = set()
        self._string_arrays: Set[str] = set()
        self._string_methods: Set[str] = set(STRING_METHODS)
        self._collect_string_typed()

    def build(self) -> SyntaxIndex:
        boundaries = sorted(
            self._statement_boundaries() + self._member_boundaries(), key=lambda b: b.line
        )
        booleans, ariths = self._operator_sites()
        return SyntaxIndex(
            language=SubjectLanguage.JAVA,
            line_count=self._line_count,
            loop_sites=tuple(self._loop_sites()),
            boolean_op_sites=tuple(booleans),
            arith_op_sites=tuple(ariths),
            statement_boundaries=tuple(boundaries),
            function_spans=tuple(self._function_spans(boundaries)),
            comment_spans=tuple(self._comments()),
            identifier_table=tuple(self._identifier_table()),
            reserved_names=self._reserved_names(),
            indent_unit=_indent_unit(boundaries),
        )

    # positions

    def _span(self, node: Node) -> Span:
        row, start = node.start_point
        _, end = node.end_point
        line = row + 1
        return Span(line, self._lines.char_col(line, start), self._lines.char_col(line, end))

    def _starts_line(self, node: Node) -> bool:
        row, col = node.start_point
        return not self._lines.leading(row + 1, self._lines.char_col(row + 1, col)).strip()

    def _ends_line(self, node: Node) -> bool:
        row, col = node.end_point
        return not self._lines.trailing(row + 1, self._lines.char_col(row + 1, col)).strip()

    def _enclosing_callable(self, node: Node) -> Optional[Node]:
        parent = node.parent
        while parent is not None:
            if parent.type in CALLABLE_TYPES:
                return parent
            parent = parent.parent
        return None

    def _scope_name(self, node: Node) -> Optional[str]:
        callable_node = self._enclosing_callable(node)
        if callable_node is None:
            return None
        return _text(callable_node.child_by_field_name("name"))

    # string typing, for excluding concatenation from arithmetic sites

    def _collect_string_typed(self) -> None:
        for node in self._nodes:
            if node.type in ("local_variable_declaration", "field_declaration"):
                type_text = _text(node.child_by_field_name("type"))
                for declarator in node.children_by_field_name("declarator"):
                    name = _text(declarator.child_by_field_name("name"))
                    value = declarator.child_by_field_name("value")
                    if type_text == "String" or (
                        type_text == "var" and value is not None and self._stringish(value)
                    ):
                        self._string_scalars.add(name)
                    elif type_text.startswith("String["):
                        self._string_arrays.add(name)
            elif node.type in ("formal_parameter", "enhanced_for_statement"):
                type_text = _text(node.child_by_field_name("type"))
                name = _text(node.child_by_field_name("name"))
                if type_text == "String":
                    self._string_scalars.add(name)
                elif type_text.startswith("String["):
                    self._string_arrays.add(name)
            elif node.type == "method_declaration":
                if _text(node.child_by_field_name("type")) == "String":
                    self._string_methods.add(_text(node.child_by_field_name("name")))

    def _stringish(self, node: Node) -> bool:
        if node.type in ("string_literal", "text_block"):
            return True
        if node.type == "identifier":
            return _text(node) in self._string_scalars
        if node.type == "array_access":
            return _text(node.child_by_field_name("array")) in self._string_arrays
        if node.type == "method_invocation":
            return _text(node.child_by_field_name("name")) in self._string_methods
        if node.type == "parenthesized_expression":
            return any(self._stringish(child) for child in node.named_children)
        if node.type == "binary_expression" and _operator(node) == "+":
            left = node.child_by_field_name("left")
            right = node.child_by_field_name("right")
            return any(side is not None and self._stringish(side) for side in (left, right))
        return False

    # sites

    def _bound(self, node: Optional[Node]) -> Optional[BoundSite]:
        if node is None or node.start_point[0] != node.end_point[0]:
            return None
        text = _text(node)
        return BoundSite(
            span=self._span(node),
            text=text,
            int_value=_int_literal(node),
            atomic=node.type in ATOMIC_TYPES or _int_literal(node) is not None,
        )

    def _relational_right(self, condition: Optional[Node]) -> Optional[Node]:
        if condition is not None and condition.type == "parenthesized_expression":
            inner = condition.named_children
            condition = inner[0] if inner else None
        if (
            condition is not None
            and condition.type == "binary_expression"
            and _operator(condition) in BOUND_SYMBOLS
        ):
            return condition.child_by_field_name("right")
        return None

    def _loop_sites(self) -> List[LoopSite]:
        sites = []
        for node in self._nodes:
            lower: Optional[BoundSite] = None
            if node.type == "for_statement":
                upper = self._bound(self._relational_right(node.child_by_field_name("condition")))
                init = node.child_by_field_name("init")
                value: Optional[Node] = None
                if init is not None and init.type == "local_variable_declaration":
                    declarator = init.child_by_field_name("declarator")
                    value = declarator.child_by_field_name("value") if declarator else None
                elif init is not None and init.type == "assignment_expression":
                    value = init.child_by_field_name("right")
                lower = self._bound(value)
            elif node.type == "while_statement":
                upper = self._bound(self._relational_right(node.child_by_field_name("condition")))
            else:
                continue
            anchor = upper or lower
            if anchor is not None:
                sites.append(LoopSite(anchor.span.line, upper, lower, self._scope_name(node)))
        return sorted(sites, key=lambda s: s.line)

    def _operator_sites(self) -> Tuple[List[OperatorSite], List[OperatorSite]]:
        booleans: List[OperatorSite] = []
        ariths: List[OperatorSite] = []
        for node in self._nodes:
            if node.type != "binary_expression":
                continue
            operator = node.child_by_field_name("operator")
            if operator is None:
                continue
            symbol = operator.type
            site = OperatorSite(self._span(operator), symbol, self._scope_name(node))
            if symbol in BOOLEAN_SYMBOLS:
                booleans.append(site)
            elif symbol in ARITH_SYMBOLS:
                if symbol == "+" and self._stringish(node):
                    continue
                ariths.append(site)
        return sorted(booleans, key=_site_key), sorted(ariths, key=_site_key)

    def _statement_boundaries(self) -> List[StatementBoundary]:
        boundaries = []
        for block in self._nodes:
            if block.type not in ("block", "constructor_body"):
                continue
            owner = block.parent
            while owner is not None and owner.type not in NESTING_TYPES:
                owner = owner.parent
            if owner is None or owner.type not in CALLABLE_TYPES:
                continue
            function_name = _text(owner.child_by_field_name("name"))
            if owner.type == "constructor_declaration":
                return_type = "<init>"
            else:
                return_type = _text(owner.child_by_field_name("type"))
            statements = _statements(block)
            previous_end = block.start_point[0]
            for position, statement in enumerate(statements):
                usable = (
                    statement.type != "explicit_constructor_invocation"
                    and statement.start_point[0] > previous_end
                    and self._starts_line(statement)
                )
                previous_end = statement.end_point[0]
                if not usable:
                    continue
                line = statement.start_point[0] + 1
                text = self._lines.line_text(line)
                boundaries.append(
                    StatementBoundary(
                        line=line,
                        indent=text[: len(text) - len(text.lstrip())],
                        level=BoundaryLevel.function,
                        is_last_in_body=position == len(statements) - 1,
                        function_name=function_name,
                        return_type=return_type,
                        text=text.strip(),
                    )
                )
        return boundaries

    def _member_start(self, member: Node) -> Node:
        """
        Returns the first node of a member, including comments directly above it.
        """
        start = member
        previous = member.prev_named_sibling
        while (
            previous is not None
            and previous.type in COMMENT_TYPES
            and previous.end_point[0] == start.start_point[0] - 1
            and self._starts_line(previous)
        ):
            start = previous
            previous = previous.prev_named_sibling
        return start

    def _top_level_classes(self) -> List[Node]:
        return [node for node in self._root.named_children if node.type == "class_declaration"]

    def _member_boundaries(self) -> List[StatementBoundary]:
        boundaries = []
        for declaration in self._top_level_classes():
            body = declaration.child_by_field_name("body")
            if body is None:
                continue
            members = _statements(body)
            previous_end = body.start_point[0]
            for position, member in enumerate(members):
                start = self._member_start(member)
                usable = start.start_point[0] > previous_end and self._starts_line(start)
                previous_end = member.end_point[0]
                if not usable:
                    continue
                line = start.start_point[0] + 1
                text = self._lines.line_text(line)
                boundaries.append(
                    StatementBoundary(
                        line=line,
                        indent=text[: len(text) - len(text.lstrip())],
                        level=BoundaryLevel.class_body,
                        is_last_in_body=position == len(members) - 1,
                        text=text.strip(),
                    )
                )
        return boundaries

    def _function_spans(self, boundaries: List[StatementBoundary]) -> List[FunctionSpan]:
        spans = []
        for node in self._nodes:
            if node.type not in CALLABLE_TYPES:
                continue
            name = _text(node.child_by_field_name("name"))
            start = self._member_start(node)
            start_line = start.start_point[0] + 1
            end_line = node.end_point[0] + 1
            body = node.child_by_field_name("body")
            body_points: Tuple[int, ...] = ()
            if body is not None:
                direct = {s.start_point[0] + 1 for s in _statements(body)}
                body_points = tuple(
                    b.line for b in boundaries if b.line in direct and b.function_name == name
                )
            spans.append(
                FunctionSpan(
                    name=name,
                    start_line=start_line,
                    end_line=end_line,
                    body_insertion_points=body_points,
                    class_name=self._class_name(node),
                    movable=self._movable(node, start),
                )
            )
        return sorted(spans, key=lambda f: f.start_line)

    def _class_name(self, node: Node) -> Optional[str]:
        body = node.parent
        if body is None or body.parent is None or body.parent.type != "class_declaration":
            return None
        return _text(body.parent.child_by_field_name("name"))

    def _movable(self, node: Node, start: Node) -> bool:
        body = node.parent
        if body is None or body.type != "class_body" or body.parent is None:
            return False
        if body.parent.type != "class_declaration" or body.parent.parent != self._root:
            return False
        before = start.prev_sibling
        after = node.next_sibling
        return (
            self._starts_line(start)
            and self._ends_line(node)
            and (before is None or before.end_point[0] < start.start_point[0])
            and (after is None or after.start_point[0] > node.end_point[0])
        )

    def _comments(self) -> List[CommentSite]:
        sites = []
        for node in self._nodes:
            if node.type not in COMMENT_TYPES or node.start_point[0] != node.end_point[0]:
                continue
            style = "line" if _text(node).startswith("//") else "block"
            sites.append(CommentSite(self._span(node), _text(node), self._starts_line(node), style))
        return sorted(sites, key=lambda c: (c.span.line, c.span.start_col))

    def _reserved_names(self) -> FrozenSet[str]:
        names = {
            _text(node) for node in self._nodes if node.type in ("identifier", "type_identifier")
        }
        return frozenset(names | JAVA_KEYWORDS | JAVA_LANG_NAMES)

    # identifiers

    def _blocked_names(self) -> Set[str]:
        """
        Names used anywhere in a role other than a local variable or parameter.
        """
        blocked: Set[str] = set()
        for node in self._nodes:
            kind = node.type
            if kind == "field_access":
                blocked.add(_text(node.child_by_field_name("field")))
            elif kind in (
                "method_invocation",
                "method_declaration",
                "constructor_declaration",
                "class_declaration",
                "interface_declaration",
                "enum_declaration",
                "record_declaration",
                "enum_constant",
                "marker_annotation",
                "annotation",
            ):
                blocked.add(_text(node.child_by_field_name("name")))
            elif kind == "field_declaration":
                blocked.update(_text(name) for name in _declarator_names(node))
            elif kind in (
                "labeled_statement",
                "break_statement",
                "continue_statement",
                "method_reference",
                "scoped_identifier",
                "import_declaration",
                "package_declaration",
            ):
                blocked.update(
                    _text(child) for child in _walk(node) if child.type == "identifier"
                )
        return blocked

    def _identifier_table(self) -> List[IdentifierEntry]:
        blocked = self._blocked_names()
        entries: List[IdentifierEntry] = []
        for node in self._nodes:
            if node.type in CALLABLE_TYPES and not _has_ancestor(node, INNER_SCOPE_TYPES):
                entries.extend(self._callable_locals(node, blocked))
        entries.extend(self._method_names())
        return sorted(entries, key=lambda e: (e.declaration.line, e.declaration.start_col, e.name))

    def _callable_locals(self, callable_node: Node, blocked: Set[str]) -> List[IdentifierEntry]:
        declared: Dict[str, Tuple[Node, str]] = {}
        nested: Set[str] = set()
        for node in _walk(callable_node):
            names: List[Tuple[Node, str]] = []
            if node.type == "formal_parameter":
                name = node.child_by_field_name("name")
                if name is not None:
                    names.append((name, "parameter"))
            elif node.type == "spread_parameter":
                for child in node.named_children:
                    name = child.child_by_field_name("name")
                    if child.type == "variable_declarator" and name is not None:
                        names.append((name, "parameter"))
            elif node.type == "local_variable_declaration":
                names.extend((name, "local") for name in _declarator_names(node))
            elif node.type in ("enhanced_for_statement", "catch_formal_parameter", "resource"):
                name = node.child_by_field_name("name")
                if name is not None:
                    names.append((name, "local"))
            elif node.type == "lambda_expression":
                parameters = node.child_by_field_name("parameters")
                if parameters is not None:
                    nested.update(
                        _text(child) for child in _walk(parameters) if child.type == "identifier"
                    )
            elif node.type in ("type_pattern", "record_pattern"):
                nested.update(_text(child) for child in _walk(node) if child.type == "identifier")
            for name_node, kind in names:
                if _has_ancestor(name_node, NESTING_TYPES, stop=callable_node):
                    nested.add(_text(name_node))
                else:
                    declared.setdefault(_text(name_node), (name_node, kind))

        method_name = _text(callable_node.child_by_field_name("name"))
        first_line = callable_node.start_point[0] + 1
        scope_id = f"{self._class_name(callable_node)}.{method_name}@{first_line}"
        entries = []
        for name in sorted(set(declared) - blocked - nested - JAVA_LANG_NAMES):
            declaration, kind = declared[name]
            occurrences = sorted(
                {
                    self._span(node)
                    for node in _walk(callable_node)
                    if node.type == "identifier" and _text(node) == name
                },
                key=lambda s: (s.line, s.start_col),
            )
            entries.append(
                IdentifierEntry(
                    name=name,
                    declaration=self._span(declaration),
                    occurrences=tuple(occurrences),
                    scope_id=scope_id,
                    kind=kind,
                )
            )
        return entries

    def _method_names(self) -> List[IdentifierEntry]:
        strings = {
            _text(node).strip('"') for node in self._nodes if node.type == "string_literal"
        }
        declarations: Dict[str, List[Node]] = {}
        for node in self._nodes:
            if node.type == "method_declaration":
                declarations.setdefault(_text(node.child_by_field_name("name")), []).append(node)
        entries = []
        for declaration in self._top_level_classes():
            inherits = any(
                declaration.child_by_field_name(field) is not None
                for field in ("superclass", "interfaces")
            )
            body = declaration.child_by_field_name("body")
            for method in _statements(body) if body is not None else []:
                if method.type != "method_declaration":
                    continue
                entry = self._method_name_entry(method, declarations, strings, inherits)
                if entry is not None:
                    entries.append(entry)
        return entries

    def _method_name_entry(
        self,
        method: Node,
        declarations: Dict[str, List[Node]],
        strings: Set[str],
        inherits: bool,
    ) -> Optional[IdentifierEntry]:
        name_node = method.child_by_field_name("name")
        name = _text(name_node)
        modifiers = next((c for c in method.children if c.type == "modifiers"), None)
        modifier_text = _text(modifiers)
        if (
            name_node is None
            or name in UNRENAMEABLE_METHODS
            or name in strings
            or len(declarations.get(name, [])) != 1
            or "@" in modifier_text
            or "abstract" in modifier_text.split()
            or (inherits and not {"private", "static"} & set(modifier_text.split()))
        ):
            return None
        occurrences = []
        for node in self._nodes:
            if node.type != "identifier" or _text(node) != name:
                continue
            parent = node.parent
            if node == name_node:
                occurrences.append(self._span(node))
            elif (
                parent is not None
                and parent.type == "method_invocation"
                and parent.child_by_field_name("name") == node
                and _text(parent.child_by_field_name("object")) in ("", "this")
            ):
                occurrences.append(self._span(node))
            else:
                return None
        return IdentifierEntry(
            name=name,
            declaration=self._span(name_node),
            occurrences=tuple(sorted(occurrences, key=lambda s: (s.line, s.start_col))),
            scope_id=f"<class {self._class_name(method)}>",
            kind="function",
        )


def _int_literal(node: Node) -> Optional[int]:
    if node.type == "decimal_integer_literal":
        text = _text(node).replace("_", "")
        return int(text) if text.isdigit() else None
    if node.type == "unary_expression" and _operator(node) == "-":
        operand = node.child_by_field_name("operand")
        if operand is not None and operand.type == "decimal_integer_literal":
            value = _int_literal(operand)
            return None if value is None else -value
    return None


def _site_key(site: OperatorSite) -> Tuple[int, int]:
    return site.span.line, site.span.start_col


def _indent_unit(boundaries: List[StatementBoundary]) -> str:
    indents = sorted((b.indent for b in boundaries if b.indent), key=len)
    if not indents:
        return "    "
    return "\t" if indents[0].startswith("\t") else indents[0]
