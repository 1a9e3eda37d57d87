"""
This module contains the Python frontend, which indexes mutation sites using the standard
library's ast and tokenize modules.
"""

import ast
import builtins
import io
import keyword
import logging
import re
import tokenize
from bisect import bisect_left
from typing import Dict, FrozenSet, List, Optional, Set, Tuple, Type, Union

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

ARITH_SYMBOLS: Dict[Type[ast.operator], str] = {
    ast.Add: "+",
    ast.Sub: "-",
    ast.Mult: "*",
    ast.Div: "/",
    ast.FloorDiv: "//",
    ast.Mod: "%",
}
COMPARE_SYMBOLS: Dict[Type[ast.cmpop], str] = {
    ast.Eq: "==",
    ast.NotEq: "!=",
    ast.Lt: "<",
    ast.LtE: "<=",
    ast.Gt: ">",
    ast.GtE: ">=",
}
BOUND_COMPARES = (ast.Lt, ast.LtE, ast.Gt, ast.GtE)
REFLECTIVE_CALLS = frozenset({"locals", "vars", "eval", "exec", "globals", "dir"})
INTROSPECTIVE_ATTRS = frozenset({"__name__", "__qualname__", "__code__"})
FUNCTION_NODES = (ast.FunctionDef, ast.AsyncFunctionDef)
ATOMIC_NODES = (ast.Name, ast.Constant, ast.Attribute, ast.Subscript, ast.Call)
CODING_COOKIE = re.compile(r"^[ \t\f]*#.*?coding[:=]")
LEADING_KEYWORDS: Dict[Type[ast.stmt], str] = {
    ast.If: "if",
    ast.For: "for",
    ast.While: "while",
    ast.Try: "try",
    ast.TryStar: "try",
    ast.With: "with",
    ast.AsyncFor: "async",
    ast.AsyncWith: "async",
    ast.AsyncFunctionDef: "async",
    ast.FunctionDef: "def",
    ast.ClassDef: "class",
    ast.Match: "match",
}
FIRST_WORD = re.compile(r"[A-Za-z_]\w*")

FunctionNode = Union[ast.FunctionDef, ast.AsyncFunctionDef]
Position = Tuple[int, int]


def parse_python(source_text: str) -> SyntaxIndex:
    """
    Parses Python source into a SyntaxIndex.
    """
    try:
        tree = ast.parse(source_text)
    except SyntaxError as e:
        raise ParseFailureError(f"Python frontend rejected source: {e.msg}", e.lineno, e.offset)
    except ValueError as e:
        raise ParseFailureError(f"Python frontend rejected source: {e}")
    try:
        tokens = list(tokenize.generate_tokens(io.StringIO(source_text).readline))
    except (tokenize.TokenError, SyntaxError) as e:
        raise ParseFailureError(f"Python tokenizer rejected source: {e}")
    return _PythonIndexer(source_text, tree, tokens).build()


class _PythonIndexer(ast.NodeVisitor):
    def __init__(
        self, source_text: str, tree: ast.Module, tokens: List[tokenize.TokenInfo]
    ) -> None:
        self._tree = tree
        self._lines = LineMap(source_text)
        self._line_count = line_count(source_text)
        self._tokens = [t for t in tokens if t.type in (tokenize.OP, tokenize.NAME)]
        self._starts = [t.start for t in self._tokens]
        self._comment_tokens = [t for t in tokens if t.type == tokenize.COMMENT]
        self._scopes: List[Tuple[str, str]] = []
        self._fstring_depth = 0
        self._loops: List[LoopSite] = []
        self._booleans: List[OperatorSite] = []
        self._ariths: List[OperatorSite] = []
        self._boundaries: List[StatementBoundary] = []
        self._functions: List[FunctionSpan] = []
        self._body_points: Dict[int, List[int]] = {}

    def build(self) -> SyntaxIndex:
        self.visit(self._tree)
        boundaries = sorted(self._boundaries, key=lambda b: b.line)
        return SyntaxIndex(
            language=SubjectLanguage.PY,
            line_count=self._line_count,
            loop_sites=tuple(sorted(self._loops, key=lambda s: s.line)),
            boolean_op_sites=tuple(sorted(self._booleans, key=_site_key)),
            arith_op_sites=tuple(sorted(self._ariths, key=_site_key)),
            statement_boundaries=tuple(boundaries),
            function_spans=tuple(sorted(self._functions, key=lambda f: f.start_line)),
            comment_spans=tuple(self._comments()),
            identifier_table=tuple(_IdentifierAnalyzer(self._tree, self._lines).entries()),
            reserved_names=self._reserved_names(),
            indent_unit=_indent_unit(boundaries),
        )

    # positions

    def _start(self, node: ast.AST) -> Position:
        line = node.lineno  # type: ignore[attr-defined]
        return line, self._lines.char_col(line, node.col_offset)  # type: ignore[attr-defined]

    def _end(self, node: ast.AST) -> Position:
        line = node.end_lineno  # type: ignore[attr-defined]
        return line, self._lines.char_col(line, node.end_col_offset)  # type: ignore[attr-defined]

    def _token_between(
        self, after: Position, before: Position, symbol: str
    ) -> Optional[tokenize.TokenInfo]:
        index = bisect_left(self._starts, after)
        while index < len(self._tokens) and self._tokens[index].start < before:
            token = self._tokens[index]
            if token.string == symbol:
                return token
            index += 1
        return None

    def _scope_name(self) -> Optional[str]:
        return ".".join(name for _, name in self._scopes) or None

    def _level(self) -> BoundaryLevel:
        if not self._scopes:
            return BoundaryLevel.module
        if self._scopes[-1][0] == "function":
            return BoundaryLevel.function
        return BoundaryLevel.class_body

    def _current_function(self) -> Optional[str]:
        for kind, name in reversed(self._scopes):
            if kind == "function":
                return name
        return None

    # traversal

    def generic_visit(self, node: ast.AST) -> None:
        for _, value in ast.iter_fields(node):
            if isinstance(value, list):
                if value and isinstance(value[0], ast.stmt):
                    self._record_block(node, value)
                for item in value:
                    if isinstance(item, ast.AST):
                        self.visit(item)
            elif isinstance(value, ast.AST):
                self.visit(value)

    def visit_FunctionDef(self, node: ast.FunctionDef) -> None:
        self._visit_function(node)

    def visit_AsyncFunctionDef(self, node: ast.AsyncFunctionDef) -> None:
        self._visit_function(node)

    def _visit_function(self, node: FunctionNode) -> None:
        class_name = None
        if self._scopes and self._scopes[-1][0] == "class":
            class_name = self._scopes[-1][1]
        self._scopes.append(("function", node.name))
        self.generic_visit(node)
        self._scopes.pop()
        start = min([node.lineno] + [d.lineno for d in node.decorator_list])
        self._functions.append(
            FunctionSpan(
                name=node.name,
                start_line=start,
                end_line=node.end_lineno or node.lineno,
                body_insertion_points=tuple(self._body_points.get(id(node), [])),
                class_name=class_name,
            )
        )

    def visit_ClassDef(self, node: ast.ClassDef) -> None:
        self._scopes.append(("class", node.name))
        self.generic_visit(node)
        self._scopes.pop()

    def visit_JoinedStr(self, node: ast.JoinedStr) -> None:
        self._fstring_depth += 1
        self.generic_visit(node)
        self._fstring_depth -= 1

    def visit_For(self, node: ast.For) -> None:
        self._record_ranges(node.iter)
        self.generic_visit(node)

    def visit_AsyncFor(self, node: ast.AsyncFor) -> None:
        self._record_ranges(node.iter)
        self.generic_visit(node)

    def visit_comprehension(self, node: ast.comprehension) -> None:
        self._record_ranges(node.iter)
        self.generic_visit(node)

    def visit_While(self, node: ast.While) -> None:
        test = node.test
        if (
            isinstance(test, ast.Compare)
            and len(test.ops) == 1
            and isinstance(test.ops[0], BOUND_COMPARES)
        ):
            upper = self._bound(test.comparators[0])
            if upper is not None:
                self._loops.append(LoopSite(upper.span.line, upper, None, self._scope_name()))
        self.generic_visit(node)

    def visit_BinOp(self, node: ast.BinOp) -> None:
        symbol = ARITH_SYMBOLS.get(type(node.op))
        if symbol is not None and not self._fstring_depth:
            token = self._token_between(self._end(node.left), self._start(node.right), symbol)
            if token is not None:
                self._ariths.append(self._operator_site(token))
        self.generic_visit(node)

    def visit_BoolOp(self, node: ast.BoolOp) -> None:
        symbol = "and" if isinstance(node.op, ast.And) else "or"
        if not self._fstring_depth:
            for left, right in zip(node.values, node.values[1:]):
                token = self._token_between(self._end(left), self._start(right), symbol)
                if token is not None:
                    self._booleans.append(self._operator_site(token))
        self.generic_visit(node)

    def visit_Compare(self, node: ast.Compare) -> None:
        if not self._fstring_depth:
            operands = [node.left] + list(node.comparators)
            for op, left, right in zip(node.ops, operands, operands[1:]):
                symbol = COMPARE_SYMBOLS.get(type(op))
                if symbol is None:
                    continue
                token = self._token_between(self._end(left), self._start(right), symbol)
                if token is not None:
                    self._booleans.append(self._operator_site(token))
        self.generic_visit(node)

    # recorders

    def _operator_site(self, token: tokenize.TokenInfo) -> OperatorSite:
        line, col = token.start
        span = Span(line, col, col + len(token.string))
        return OperatorSite(span, token.string, self._scope_name())

    def _bound(self, node: ast.expr) -> Optional[BoundSite]:
        if node.lineno != node.end_lineno:
            return None
        line, start = self._start(node)
        _, end = self._end(node)
        text = self._lines.line_text(line)[start:end]
        return BoundSite(
            span=Span(line, start, end),
            text=text,
            int_value=_int_literal(node),
            atomic=isinstance(node, ATOMIC_NODES) or _int_literal(node) is not None,
        )

    def _record_ranges(self, iterable: ast.expr) -> None:
        for node in ast.walk(iterable):
            if not (
                isinstance(node, ast.Call)
                and isinstance(node.func, ast.Name)
                and node.func.id == "range"
                and not node.keywords
                and 1 <= len(node.args) <= 3
                and not any(isinstance(arg, ast.Starred) for arg in node.args)
            ):
                continue
            upper = self._bound(node.args[0] if len(node.args) == 1 else node.args[1])
            lower = self._bound(node.args[0]) if len(node.args) >= 2 else None
            anchor = upper or lower
            if anchor is not None:
                self._loops.append(LoopSite(anchor.span.line, upper, lower, self._scope_name()))

    def _record_block(self, owner: ast.AST, statements: List[ast.stmt]) -> None:
        level = self._level()
        skip_first = isinstance(
            owner, (ast.Module, ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)
        ) and _is_docstring(statements[0])
        previous_end = 0
        for position, statement in enumerate(statements):
            line = statement.lineno
            decorators = getattr(statement, "decorator_list", [])
            if decorators:
                line = min(d.lineno for d in decorators)
            starts_line = self._starts_line(statement, line, bool(decorators))
            usable = (
                starts_line
                and line > previous_end
                and not (position == 0 and skip_first)
                and not (isinstance(statement, ast.ImportFrom) and statement.module == "__future__")
            )
            previous_end = statement.end_lineno or statement.lineno
            if not usable:
                continue
            text = self._lines.line_text(line)
            indent = text[: len(text) - len(text.lstrip())]
            function_name = None
            if level == BoundaryLevel.function:
                function_name = self._current_function()
            self._boundaries.append(
                StatementBoundary(
                    line=line,
                    indent=indent,
                    level=level,
                    is_last_in_body=position == len(statements) - 1,
                    function_name=function_name,
                    text=text.strip(),
                )
            )
            if isinstance(owner, FUNCTION_NODES) and owner.body is statements:
                self._body_points.setdefault(id(owner), []).append(line)

    def _starts_line(self, statement: ast.stmt, line: int, decorated: bool) -> bool:
        text = self._lines.line_text(line)
        stripped = text.lstrip()
        if decorated:
            return stripped.startswith("@")
        if self._lines.char_col(line, statement.col_offset) != len(text) - len(stripped):
            return False
        # an elif is a nested If that shares its column with the elif keyword
        expected = LEADING_KEYWORDS.get(type(statement))
        if expected is None:
            return True
        word = FIRST_WORD.match(stripped)
        return word is not None and word.group() == expected

    def _comments(self) -> List[CommentSite]:
        sites = []
        for token in self._comment_tokens:
            line, col = token.start
            if line == 1 and token.string.startswith("#!"):
                continue
            if line <= 2 and CODING_COOKIE.match(token.string):
                continue
            full_line = not self._lines.leading(line, col).strip()
            span = Span(line, col, col + len(token.string))
            sites.append(CommentSite(span, token.string, full_line, "hash"))
        return sites

    def _reserved_names(self) -> FrozenSet[str]:
        names = {t.string for t in self._tokens if t.type == tokenize.NAME}
        names.update(keyword.kwlist)
        names.update(keyword.softkwlist)
        names.update(dir(builtins))
        return frozenset(names)


class _IdentifierAnalyzer:
    """
    Conservative scope analysis: only names whose every occurrence resolves to one function (or
    to one module-level function definition) are offered for renaming.
    """

    def __init__(self, tree: ast.Module, lines: LineMap) -> None:
        self._tree = tree
        self._lines = lines
        self._keyword_args = {
            node.arg for node in ast.walk(tree) if isinstance(node, ast.keyword) and node.arg
        }
        self._fstring_names = {
            inner.id
            for node in ast.walk(tree)
            if isinstance(node, ast.JoinedStr)
            for inner in ast.walk(node)
            if isinstance(inner, ast.Name)
        }

    def entries(self) -> List[IdentifierEntry]:
        entries: List[IdentifierEntry] = []
        for node, qualname in _functions_with_qualnames(self._tree):
            entries.extend(self._function_locals(node, qualname))
        entries.extend(self._module_functions())
        return sorted(entries, key=lambda e: (e.declaration.line, e.declaration.start_col, e.name))

    def _span(self, line: int, byte_col: int, name: str) -> Span:
        col = self._lines.char_col(line, byte_col)
        return Span(line, col, col + len(name))

    def _function_locals(self, func: FunctionNode, qualname: str) -> List[IdentifierEntry]:
        if _calls_any(func, REFLECTIVE_CALLS):
            return []
        scan = _ScopeScan()
        for statement in func.body:
            scan.scan(statement, nested=False)
        params = {arg.arg: arg for arg in _all_args(func.args)}
        candidates = (set(scan.own) | set(params)) - scan.excluded()
        candidates -= {"self", "cls", "__class__"}
        candidates -= set(params) & self._keyword_args
        candidates -= self._fstring_names
        candidates = {name for name in candidates if not name.startswith("__")}

        entries = []
        for name in sorted(candidates):
            occurrences = {
                self._span(node.lineno, node.col_offset, name)
                for statement in func.body
                for node in ast.walk(statement)
                if isinstance(node, ast.Name) and node.id == name
            }
            if name in params:
                arg = params[name]
                declaration = self._span(arg.lineno, arg.col_offset, name)
                occurrences.add(declaration)
                kind = "parameter"
            else:
                first = scan.own[name]
                declaration = self._span(first.lineno, first.col_offset, name)
                kind = "local"
            entries.append(
                IdentifierEntry(
                    name=name,
                    declaration=declaration,
                    occurrences=tuple(sorted(occurrences, key=_span_key)),
                    scope_id=f"{qualname}@{func.lineno}",
                    kind=kind,
                )
            )
        return entries

    def _module_functions(self) -> List[IdentifierEntry]:
        if _calls_any(self._tree, REFLECTIVE_CALLS) or any(
            isinstance(node, ast.Attribute) and node.attr in INTROSPECTIVE_ATTRS
            for node in ast.walk(self._tree)
        ):
            return []
        bindings: Dict[str, int] = {}
        strings: Set[str] = set()
        for node in ast.walk(self._tree):
            for name in _bound_names(node):
                bindings[name] = bindings.get(name, 0) + 1
            if isinstance(node, ast.Constant) and isinstance(node.value, str):
                strings.add(node.value)

        entries = []
        for node in self._tree.body:
            if not isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                continue
            name = node.name
            if (
                node.decorator_list
                or name.startswith("__")
                or bindings.get(name, 0) != 1
                or name in strings
                or name in self._fstring_names
            ):
                continue
            declaration = self._def_name_span(node)
            if declaration is None:
                continue
            occurrences = {declaration} | {
                self._span(ref.lineno, ref.col_offset, name)
                for ref in ast.walk(self._tree)
                if isinstance(ref, ast.Name) and ref.id == name
            }
            entries.append(
                IdentifierEntry(
                    name=name,
                    declaration=declaration,
                    occurrences=tuple(sorted(occurrences, key=_span_key)),
                    scope_id="<module>",
                    kind="function",
                )
            )
        return entries

    def _def_name_span(self, node: FunctionNode) -> Optional[Span]:
        text = self._lines.line_text(node.lineno)
        match = re.search(rf"\bdef\s+({re.escape(node.name)})\b", text)
        if match is None:
            return None
        return Span(node.lineno, match.start(1), match.end(1))


class _ScopeScan:
    """
    Collects bindings of one function scope, separating names (re)bound by nested scopes.
    """

    def __init__(self) -> None:
        self.own: Dict[str, ast.Name] = {}
        self.nested: Set[str] = set()
        self.declared: Set[str] = set()
        self.unsafe: Set[str] = set()

    def excluded(self) -> Set[str]:
        return self.nested | self.declared | self.unsafe

    def scan(self, node: ast.AST, nested: bool) -> None:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            self.unsafe.add(node.name)
            for decorator in node.decorator_list:
                self.scan(decorator, nested)
            if isinstance(node, ast.ClassDef):
                for base in node.bases:
                    self.scan(base, nested)
            else:
                for default in list(node.args.defaults) + list(node.args.kw_defaults):
                    if default is not None:
                        self.scan(default, nested)
                self.nested.update(arg.arg for arg in _all_args(node.args))
            for statement in node.body:
                self.scan(statement, True)
            return
        if isinstance(node, ast.Lambda):
            self.nested.update(arg.arg for arg in _all_args(node.args))
            for default in list(node.args.defaults) + list(node.args.kw_defaults):
                if default is not None:
                    self.scan(default, nested)
            self.scan(node.body, True)
            return
        if isinstance(node, (ast.ListComp, ast.SetComp, ast.GeneratorExp, ast.DictComp)):
            for child in ast.iter_child_nodes(node):
                self.scan(child, True)
            return
        if isinstance(node, (ast.Global, ast.Nonlocal)):
            self.declared.update(node.names)
        elif isinstance(node, (ast.Import, ast.ImportFrom)):
            for alias in node.names:
                self.unsafe.add(alias.asname or alias.name.split(".")[0])
        elif isinstance(node, ast.ExceptHandler) and node.name:
            self.unsafe.add(node.name)
        elif isinstance(node, (ast.MatchAs, ast.MatchStar)) and node.name:
            self.unsafe.add(node.name)
        elif isinstance(node, ast.MatchMapping) and node.rest:
            self.unsafe.add(node.rest)
        elif isinstance(node, ast.Name) and isinstance(node.ctx, (ast.Store, ast.Del)):
            if nested:
                self.nested.add(node.id)
            elif node.id not in self.own:
                self.own[node.id] = node
        for child in ast.iter_child_nodes(node):
            self.scan(child, nested)


def _functions_with_qualnames(tree: ast.Module) -> List[Tuple[FunctionNode, str]]:
    found: List[Tuple[FunctionNode, str]] = []

    def walk(node: ast.AST, prefix: str) -> None:
        for child in ast.iter_child_nodes(node):
            if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef)):
                qualname = f"{prefix}{child.name}"
                found.append((child, qualname))
                walk(child, qualname + ".")
            elif isinstance(child, ast.ClassDef):
                walk(child, f"{prefix}{child.name}.")
            else:
                walk(child, prefix)

    walk(tree, "")
    return found


def _all_args(args: ast.arguments) -> List[ast.arg]:
    collected = list(args.posonlyargs) + list(args.args) + list(args.kwonlyargs)
    if args.vararg is not None:
        collected.append(args.vararg)
    if args.kwarg is not None:
        collected.append(args.kwarg)
    return collected


def _bound_names(node: ast.AST) -> List[str]:
    if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
        return [node.name]
    if isinstance(node, ast.Name) and isinstance(node.ctx, (ast.Store, ast.Del)):
        return [node.id]
    if isinstance(node, ast.arg):
        return [node.arg]
    if isinstance(node, (ast.Import, ast.ImportFrom)):
        return [alias.asname or alias.name.split(".")[0] for alias in node.names]
    if isinstance(node, (ast.Global, ast.Nonlocal)):
        return list(node.names)
    if isinstance(node, ast.ExceptHandler) and node.name:
        return [node.name]
    return []


def _calls_any(tree: ast.AST, names: FrozenSet[str]) -> bool:
    return any(
        isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in names
        for node in ast.walk(tree)
    )


def _is_docstring(statement: ast.stmt) -> bool:
    return (
        isinstance(statement, ast.Expr)
        and isinstance(statement.value, ast.Constant)
        and isinstance(statement.value.value, str)
    )


def _int_literal(node: ast.expr) -> Optional[int]:
    if isinstance(node, ast.Constant) and type(node.value) is int:
        return node.value
    if (
        isinstance(node, ast.UnaryOp)
        and isinstance(node.op, ast.USub)
        and isinstance(node.operand, ast.Constant)
        and type(node.operand.value) is int
    ):
        return -node.operand.value
    return None


def _indent_unit(boundaries: List[StatementBoundary]) -> str:
    indents = sorted((b.indent for b in boundaries if b.indent), key=len)
    if not indents:
        return "    "
    return "\t" if indents[0].startswith("\t") else indents[0]


def _site_key(site: OperatorSite) -> Tuple[int, int]:
    return site.span.line, site.span.start_col


def _span_key(span: Span) -> Tuple[int, int]:
    return span.line, span.start_col
