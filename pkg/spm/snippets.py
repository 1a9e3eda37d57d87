"""
This module validates single-line dead statements proposed for the DeadCode operator. A valid
statement declares exactly one new variable and has no side effects. Statements built from
literals alone may run unguarded; the rest only go into blocks that never execute.
"""

import ast
from dataclasses import dataclass
from typing import Dict, FrozenSet, Optional, Set, Tuple

from tree_sitter import Node, Parser

from source_model.frontends.java_frontend import COMMENT_TYPES, JAVA_LANGUAGE
from source_model.models import SubjectLanguage

PURE_BUILTINS = frozenset(
    {"len", "min", "max", "sum", "abs", "sorted", "round", "int", "float", "str", "bool"}
)
PURE_NODES = (
    ast.Constant,
    ast.Name,
    ast.BinOp,
    ast.UnaryOp,
    ast.BoolOp,
    ast.Compare,
    ast.IfExp,
    ast.Tuple,
    ast.List,
    ast.Set,
    ast.Dict,
    ast.Subscript,
    ast.Slice,
    ast.Attribute,
    ast.Call,
    ast.keyword,
    ast.expr_context,
    ast.operator,
    ast.unaryop,
    ast.boolop,
    ast.cmpop,
)
JAVA_WRAPPER = "class DeadSnippet {{ void snippet() {{ {line} }} }}"


@dataclass(frozen=True)
class DeadStatement:
    name: str
    expression: str
    # declared type, Java only
    type_name: str = "int"
    # built from literals alone, so it may run unguarded
    literal: bool = True


@dataclass(frozen=True)
class _JavaRule:
    literals: FrozenSet[str]
    unary: FrozenSet[str]
    binary: FrozenSet[str]


_NUMERIC_OPS = frozenset({"+", "-", "*"})
JAVA_RULES: Dict[str, _JavaRule] = {
    "int": _JavaRule(frozenset({"decimal_integer_literal"}), frozenset({"-"}), _NUMERIC_OPS),
    "long": _JavaRule(frozenset({"decimal_integer_literal"}), frozenset({"-"}), _NUMERIC_OPS),
    "double": _JavaRule(
        frozenset({"decimal_integer_literal", "decimal_floating_point_literal"}),
        frozenset({"-"}),
        _NUMERIC_OPS,
    ),
    "boolean": _JavaRule(frozenset({"true", "false"}), frozenset({"!"}), frozenset({"&&", "||"})),
    "String": _JavaRule(frozenset({"string_literal"}), frozenset(), frozenset({"+"})),
}


def parse_dead_statement(
    line: str, language: SubjectLanguage, source_text: str
) -> Optional[DeadStatement]:
    """
    Returns the statement behind a proposed line, or None when the line is rejected.
    """
    if language == SubjectLanguage.PY:
        return python_dead_statement(line, declared_names(source_text))
    return java_dead_statement(line)


def declared_names(source_text: str) -> Set[str]:
    """
    Names under global or nonlocal declarations, which dead code must not read.
    """
    try:
        tree = ast.parse(source_text)
    except (SyntaxError, ValueError):
        return set()
    return {
        name
        for node in ast.walk(tree)
        if isinstance(node, (ast.Global, ast.Nonlocal))
        for name in node.names
    }


def python_dead_statement(line: str, declared: Set[str]) -> Optional[DeadStatement]:
    try:
        tree = ast.parse(line.strip())
    except (SyntaxError, ValueError):
        return None
    if len(tree.body) != 1:
        return None
    statement = tree.body[0]
    if not isinstance(statement, ast.Assign) or len(statement.targets) != 1:
        return None
    target = statement.targets[0]
    if not isinstance(target, ast.Name):
        return None
    name = target.id
    value = statement.value
    for node in ast.walk(value):
        if not isinstance(node, PURE_NODES):
            return None
        if isinstance(node, ast.Call) and not (
            isinstance(node.func, ast.Name) and node.func.id in PURE_BUILTINS
        ):
            return None
    loaded = {node.id for node in ast.walk(value) if isinstance(node, ast.Name)}
    if name in loaded or loaded & declared:
        return None
    expression = ast.get_source_segment(line.strip(), value)
    if not expression:
        return None
    return DeadStatement(name, expression, literal=_is_python_literal(expression))


def _is_python_literal(expression: str) -> bool:
    try:
        ast.literal_eval(expression)
    except (ValueError, TypeError, SyntaxError, MemoryError, RecursionError):
        return False
    return True


def java_dead_statement(line: str) -> Optional[DeadStatement]:
    if "\n" in line or "}" in line or "{" in line:
        return None
    tree = Parser(JAVA_LANGUAGE).parse(JAVA_WRAPPER.format(line=line.strip()).encode("utf-8"))
    if tree.root_node.has_error:
        return None
    body = _method_body(tree.root_node)
    if body is None:
        return None
    statements = [c for c in body.named_children if c.type not in COMMENT_TYPES]
    if len(statements) != 1 or statements[0].type != "local_variable_declaration":
        return None
    declaration = statements[0]
    if any(child.type == "modifiers" for child in declaration.children):
        return None
    declarators = declaration.children_by_field_name("declarator")
    type_name = _text(declaration.child_by_field_name("type"))
    rule = JAVA_RULES.get(type_name)
    if len(declarators) != 1 or rule is None:
        return None
    declarator = declarators[0]
    name = declarator.child_by_field_name("name")
    value = declarator.child_by_field_name("value")
    if name is None or value is None or declarator.child_by_field_name("dimensions"):
        return None
    if not _java_literal_only(value, rule, type_name):
        return None
    return DeadStatement(_text(name), _text(value), type_name=type_name)


def _method_body(root: Node) -> Optional[Node]:
    stack = [root]
    while stack:
        node = stack.pop()
        if node.type == "method_declaration":
            return node.child_by_field_name("body")
        stack.extend(node.named_children)
    return None


def _java_literal_only(node: Node, rule: _JavaRule, type_name: str) -> bool:
    if node.type in rule.literals:
        return _java_literal_fits(_text(node), node.type, type_name)
    if node.type == "parenthesized_expression":
        return all(_java_literal_only(c, rule, type_name) for c in node.named_children)
    if node.type == "unary_expression":
        operand = node.child_by_field_name("operand")
        return (
            _operator_text(node) in rule.unary
            and operand is not None
            and _java_literal_only(operand, rule, type_name)
        )
    if node.type == "binary_expression":
        operands: Tuple[Optional[Node], ...] = (
            node.child_by_field_name("left"),
            node.child_by_field_name("right"),
        )
        return _operator_text(node) in rule.binary and all(
            operand is not None and _java_literal_only(operand, rule, type_name)
            for operand in operands
        )
    return False


def _java_literal_fits(text: str, node_type: str, type_name: str) -> bool:
    if node_type == "decimal_floating_point_literal":
        return len(text) <= 12 and "e" not in text.lower()
    if node_type != "decimal_integer_literal":
        return True
    digits = text[:-1] if type_name == "long" and text[-1:] in ("l", "L") else text
    # leading zeros would make an octal literal
    return digits.isdigit() and len(digits) <= 9 and (digits == "0" or digits[0] != "0")


def _operator_text(node: Node) -> str:
    operator = node.child_by_field_name("operator")
    return _text(operator)


def _text(node: Optional[Node]) -> str:
    if node is None or node.text is None:
        return ""
    return node.text.decode("utf-8")
