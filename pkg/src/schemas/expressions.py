"""
Expression trees for rule conditions and value expressions.

Config files may give either the JSON tree or a short Python-syntax string:

    "V > 0.4"
    "kb['cases.{payload_key}'] >= 3 and kb.alerted == 0"
    "'known.{D}' in kb"
    "kb.cases + 1"

Bare names are bound variables, ``kb.key`` / ``kb['key']`` are knowledge
lookups. Knowledge keys may hold ``{var}`` template fields.
"""

from __future__ import annotations

import ast
import string
from typing import Annotated, Any, Iterator, List, Literal, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field

MAX_CONDITION_DEPTH = 16

COMPARATORS = (">", ">=", "<", "<=", "=", "!=")
ARITHMETIC = ("+", "-", "*", "/")


class _Node(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# -------------------------------------------------------------------------
# Value expressions
# -------------------------------------------------------------------------
class Lit(_Node):
    kind: Literal["lit"] = "lit"
    value: Union[bool, int, float, str]


class Var(_Node):
    kind: Literal["var"] = "var"
    name: str = Field(min_length=1)


class Kb(_Node):
    kind: Literal["kb"] = "kb"
    key: str = Field(min_length=1)


class BinOp(_Node):
    kind: Literal["binop"] = "binop"
    op: Literal["+", "-", "*", "/"]
    left: Expr
    right: Expr


Expr = Annotated[Union[Lit, Var, Kb, BinOp], Field(discriminator="kind")]


# -------------------------------------------------------------------------
# Conditions
# -------------------------------------------------------------------------
class TrueCond(_Node):
    kind: Literal["true"] = "true"


class Compare(_Node):
    kind: Literal["compare"] = "compare"
    op: Literal[">", ">=", "<", "<=", "=", "!="]
    left: Expr
    right: Expr


class HasKey(_Node):
    kind: Literal["has"] = "has"
    key: str = Field(min_length=1)


class And(_Node):
    kind: Literal["and"] = "and"
    args: List[Condition] = Field(min_length=1)


class Or(_Node):
    kind: Literal["or"] = "or"
    args: List[Condition] = Field(min_length=1)


class Not(_Node):
    kind: Literal["not"] = "not"
    arg: Condition


Condition = Annotated[
    Union[TrueCond, Compare, HasKey, And, Or, Not], Field(discriminator="kind")
]

for _model in (BinOp, Compare, And, Or, Not):
    _model.model_rebuild()


# -------------------------------------------------------------------------
# Parsing
# -------------------------------------------------------------------------
_CMP_OPS = {
    ast.Gt: ">",
    ast.GtE: ">=",
    ast.Lt: "<",
    ast.LtE: "<=",
    ast.Eq: "=",
    ast.NotEq: "!=",
}
_BIN_OPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.Div: "/"}


class ExpressionSyntaxError(ValueError):
    pass


def _parse_tree(text: str) -> ast.AST:
    try:
        return ast.parse(text.strip(), mode="eval").body
    except SyntaxError as e:
        raise ExpressionSyntaxError(f"cannot parse {text!r}: {e.msg}") from e


def _kb_key(node: ast.AST) -> str | None:
    if isinstance(node, ast.Attribute) and isinstance(node.value, ast.Name) and node.value.id == "kb":
        return node.attr
    if isinstance(node, ast.Subscript) and isinstance(node.value, ast.Name) and node.value.id == "kb":
        if isinstance(node.slice, ast.Constant) and isinstance(node.slice.value, str):
            return node.slice.value
        raise ExpressionSyntaxError("kb[...] needs a string key")
    return None


def _to_expr(node: ast.AST):
    key = _kb_key(node)
    if key is not None:
        return Kb(key=key)
    if isinstance(node, ast.Constant) and isinstance(node.value, (bool, int, float, str)):
        return Lit(value=node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub) and isinstance(node.operand, ast.Constant):
        return Lit(value=-node.operand.value)
    if isinstance(node, ast.Name):
        if node.id in ("True", "False"):
            return Lit(value=node.id == "True")
        return Var(name=node.id)
    if isinstance(node, ast.BinOp) and type(node.op) in _BIN_OPS:
        return BinOp(op=_BIN_OPS[type(node.op)], left=_to_expr(node.left), right=_to_expr(node.right))
    raise ExpressionSyntaxError(f"unsupported expression: {ast.dump(node)}")


def _to_condition(node: ast.AST):
    if isinstance(node, ast.Constant) and node.value is True:
        return TrueCond()
    if isinstance(node, ast.Name) and node.id in ("true", "True"):
        return TrueCond()
    if isinstance(node, ast.BoolOp):
        args = [_to_condition(v) for v in node.values]
        return And(args=args) if isinstance(node.op, ast.And) else Or(args=args)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
        return Not(arg=_to_condition(node.operand))
    if isinstance(node, ast.Compare):
        parts = []
        left = node.left
        for op, right in zip(node.ops, node.comparators):
            parts.append(_compare(left, op, right))
            left = right
        return parts[0] if len(parts) == 1 else And(args=parts)
    raise ExpressionSyntaxError(f"unsupported condition: {ast.dump(node)}")


def _compare(left: ast.AST, op: ast.cmpop, right: ast.AST):
    if isinstance(op, (ast.In, ast.NotIn)):
        if not (isinstance(right, ast.Name) and right.id == "kb"):
            raise ExpressionSyntaxError("membership tests only apply to kb")
        if not (isinstance(left, ast.Constant) and isinstance(left.value, str)):
            raise ExpressionSyntaxError("membership needs a string key")
        has = HasKey(key=left.value)
        return has if isinstance(op, ast.In) else Not(arg=has)
    if type(op) not in _CMP_OPS:
        raise ExpressionSyntaxError(f"unsupported comparator {type(op).__name__}")
    return Compare(op=_CMP_OPS[type(op)], left=_to_expr(left), right=_to_expr(right))


def parse_expr(text: str):
    return _to_expr(_parse_tree(text))


def parse_condition(text: str):
    return _to_condition(_parse_tree(text))


def _coerce_expr(value: Any) -> Any:
    if isinstance(value, str):
        return parse_expr(value)
    if isinstance(value, (bool, int, float)):
        return Lit(value=value)
    return value


def _coerce_condition(value: Any) -> Any:
    if value is True:
        return TrueCond()
    if isinstance(value, str):
        return parse_condition(value)
    return value


ExprField = Annotated[Expr, BeforeValidator(_coerce_expr)]
ConditionField = Annotated[Condition, BeforeValidator(_coerce_condition)]


# -------------------------------------------------------------------------
# Inspection and rendering
# -------------------------------------------------------------------------
def template_fields(template: str) -> List[str]:
    """Names of the ``{var}`` fields in a key or receiver template."""
    return [name for _, name, _, _ in string.Formatter().parse(template) if name]


def expr_variables(expr) -> Iterator[str]:
    if isinstance(expr, Var):
        yield expr.name
    elif isinstance(expr, Kb):
        yield from template_fields(expr.key)
    elif isinstance(expr, BinOp):
        yield from expr_variables(expr.left)
        yield from expr_variables(expr.right)


def condition_variables(cond) -> Iterator[str]:
    if isinstance(cond, Compare):
        yield from expr_variables(cond.left)
        yield from expr_variables(cond.right)
    elif isinstance(cond, HasKey):
        yield from template_fields(cond.key)
    elif isinstance(cond, (And, Or)):
        for arg in cond.args:
            yield from condition_variables(arg)
    elif isinstance(cond, Not):
        yield from condition_variables(cond.arg)


def condition_depth(cond) -> int:
    if isinstance(cond, (And, Or)):
        return 1 + max(condition_depth(arg) for arg in cond.args)
    if isinstance(cond, Not):
        return 1 + condition_depth(cond.arg)
    return 1


def render_expr(expr) -> str:
    if isinstance(expr, Lit):
        return repr(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Kb):
        return f"kb[{expr.key!r}]"
    return f"({render_expr(expr.left)} {expr.op} {render_expr(expr.right)})"


def render_condition(cond) -> str:
    if isinstance(cond, TrueCond):
        return "true"
    if isinstance(cond, Compare):
        op = "==" if cond.op == "=" else cond.op
        return f"{render_expr(cond.left)} {op} {render_expr(cond.right)}"
    if isinstance(cond, HasKey):
        return f"{cond.key!r} in kb"
    if isinstance(cond, Not):
        return f"not ({render_condition(cond.arg)})"
    joiner = " and " if isinstance(cond, And) else " or "
    return "(" + joiner.join(render_condition(arg) for arg in cond.args) + ")"
