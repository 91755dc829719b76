"""Guard and action expressions.

The executable expression sublanguage: integer arithmetic (+, -, *, div,
mod), comparisons, boolean connectives, enumeration literals, record
construction and field access, and references to bound pattern variables
and local variables. No quantifiers, no user-defined functions.

Names are resolved during parsing or elaboration: an identifier becomes a
VarRef when a variable of that name is in scope, otherwise an EnumLit of
the unique enumeration declaring it. Static typing is prescriptive for
shapes (int/bool/enum/record); integer range membership is enforced
dynamically when a value crosses a channel or variable boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .errors import EvalError, ExprTypeError
from .kernel import DataTypeDef, Enumeration, IntRange, MessageValue, RecordShape

# --- Abstract syntax ---------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class EnumLit:
    literal: str
    dtype: DataTypeDef


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class RecordLit:
    fields: tuple[tuple[str, "Expr"], ...]


@dataclass(frozen=True)
class FieldAccess:
    base: "Expr"
    field: str


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "not"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # or and == != < <= > >= + - * div mod
    left: "Expr"
    right: "Expr"


Expr = Union[IntLit, BoolLit, EnumLit, VarRef, RecordLit, FieldAccess, Unary, Binary]

COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")
ARITH = ("+", "-", "*", "div", "mod")

# --- Static typing -----------------------------------------------------------

# A type in expression position: "int", "bool", or an enum/record definition.
ExprType = Union[str, DataTypeDef]


def lift(dtype: DataTypeDef) -> ExprType:
    """Channel/variable type as seen by the expression type system."""
    return "int" if isinstance(dtype.shape, IntRange) else dtype


def type_name(t: ExprType) -> str:
    return t if isinstance(t, str) else t.describe()


def infer(expr: Expr, env: Mapping[str, DataTypeDef]) -> ExprType:
    """Infer an expression's type; raises ExprTypeError on mismatch.

    Record literals cannot be inferred standalone; they only type-check in
    positions with an expected type (see `check`).
    """
    if isinstance(expr, IntLit):
        return "int"
    if isinstance(expr, BoolLit):
        return "bool"
    if isinstance(expr, EnumLit):
        return expr.dtype
    if isinstance(expr, VarRef):
        if expr.name not in env:
            raise ExprTypeError(f"unbound name {expr.name!r}")
        return lift(env[expr.name])
    if isinstance(expr, RecordLit):
        raise ExprTypeError("record literal needs a typed context")
    if isinstance(expr, FieldAccess):
        base = infer(expr.base, env)
        if not isinstance(base, DataTypeDef) or not isinstance(base.shape, RecordShape):
            raise ExprTypeError(f"field access on non-record {type_name(base)}")
        ftype = base.shape.field_type(expr.field)
        if ftype is None:
            raise ExprTypeError(f"{base.describe()} has no field {expr.field!r}")
        return lift(ftype)
    if isinstance(expr, Unary):
        want = "int" if expr.op == "-" else "bool"
        got = infer(expr.operand, env)
        if got != want:
            raise ExprTypeError(f"operator {expr.op!r} needs {want}, got {type_name(got)}")
        return want
    assert isinstance(expr, Binary)
    if expr.op in ("and", "or"):
        for side in (expr.left, expr.right):
            got = infer(side, env)
            if got != "bool":
                raise ExprTypeError(f"{expr.op!r} needs bool operands, got {type_name(got)}")
        return "bool"
    if expr.op in ARITH:
        for side in (expr.left, expr.right):
            got = infer(side, env)
            if got != "int":
                raise ExprTypeError(f"{expr.op!r} needs int operands, got {type_name(got)}")
        return "int"
    assert expr.op in COMPARISONS
    if expr.op in ("<", "<=", ">", ">="):
        for side in (expr.left, expr.right):
            got = infer(side, env)
            if got != "int":
                raise ExprTypeError(f"{expr.op!r} compares ints, got {type_name(got)}")
        return "bool"
    # Equality: both sides the same type; record literals may appear on one side.
    try:
        left = infer(expr.left, env)
    except ExprTypeError:
        right = infer(expr.right, env)
        check(expr.left, right, env)
        return "bool"
    try:
        right = infer(expr.right, env)
    except ExprTypeError:
        check(expr.right, left, env)
        return "bool"
    if left != right:
        raise ExprTypeError(f"cannot compare {type_name(left)} with {type_name(right)}")
    return "bool"


def check(expr: Expr, expected: ExprType, env: Mapping[str, DataTypeDef]) -> None:
    """Check an expression against an expected type (raises ExprTypeError)."""
    if isinstance(expected, DataTypeDef) and isinstance(expected.shape, IntRange):
        expected = "int"
    if isinstance(expr, RecordLit):
        if not isinstance(expected, DataTypeDef) or not isinstance(expected.shape, RecordShape):
            raise ExprTypeError(f"record literal where {type_name(expected)} expected")
        want = dict(expected.shape.fields)
        got = [name for name, _ in expr.fields]
        if sorted(got) != sorted(want):
            raise ExprTypeError(
                f"record literal fields {sorted(got)} do not match {sorted(want)}")
        if len(set(got)) != len(got):
            raise ExprTypeError(f"duplicate fields in record literal: {got}")
        for name, sub in expr.fields:
            check(sub, lift(want[name]), env)
        return
    actual = infer(expr, env)
    if actual != expected:
        raise ExprTypeError(f"expected {type_name(expected)}, got {type_name(actual)}")


def check_against(expr: Expr, dtype: DataTypeDef, env: Mapping[str, DataTypeDef]) -> None:
    """Check an expression against a declared message/variable type."""
    check(expr, lift(dtype), env)


# --- Evaluation --------------------------------------------------------------

# Runtime values: int, bool, enum literal (str), or record (dict).
Value = Union[int, bool, str, dict]


def to_value(m: MessageValue) -> Value:
    if isinstance(m.payload, tuple):
        return {name: to_value(v) for name, v in m.payload}
    return m.payload


def to_message(value: Value, dtype: DataTypeDef) -> MessageValue:
    """Convert a runtime value to a message, enforcing the dynamic range check."""
    shape = dtype.shape
    if isinstance(shape, IntRange):
        if not isinstance(value, int) or isinstance(value, bool):
            raise EvalError(f"expected integer for {dtype.describe()}, got {value!r}")
        if not shape.lo <= value <= shape.hi:
            raise EvalError(f"value {value} outside {dtype.describe()}")
        return MessageValue(value)
    if isinstance(shape, Enumeration):
        if value not in shape.literals:
            raise EvalError(f"value {value!r} is not a literal of {dtype.describe()}")
        return MessageValue(value)
    if not isinstance(value, dict):
        raise EvalError(f"expected record for {dtype.describe()}, got {value!r}")
    fields = []
    for name, ftype in shape.fields:
        if name not in value:
            raise EvalError(f"record missing field {name!r} for {dtype.describe()}")
        fields.append((name, to_message(value[name], ftype)))
    return MessageValue(tuple(fields))


def evaluate(expr: Expr, env: Mapping[str, Value]) -> Value:
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, BoolLit):
        return expr.value
    if isinstance(expr, EnumLit):
        return expr.literal
    if isinstance(expr, VarRef):
        try:
            return env[expr.name]
        except KeyError:
            raise EvalError(f"unbound variable {expr.name!r}") from None
    if isinstance(expr, RecordLit):
        return {name: evaluate(sub, env) for name, sub in expr.fields}
    if isinstance(expr, FieldAccess):
        base = evaluate(expr.base, env)
        if not isinstance(base, dict) or expr.field not in base:
            raise EvalError(f"no field {expr.field!r} in {base!r}")
        return base[expr.field]
    if isinstance(expr, Unary):
        operand = evaluate(expr.operand, env)
        return -operand if expr.op == "-" else not operand
    assert isinstance(expr, Binary)
    if expr.op == "and":
        return bool(evaluate(expr.left, env)) and bool(evaluate(expr.right, env))
    if expr.op == "or":
        return bool(evaluate(expr.left, env)) or bool(evaluate(expr.right, env))
    left, right = evaluate(expr.left, env), evaluate(expr.right, env)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if expr.op == "div":
        if right == 0:
            raise EvalError("division by zero")
        return left // right
    if expr.op == "mod":
        if right == 0:
            raise EvalError("modulo by zero")
        return left % right
    if expr.op == "==":
        return left == right
    if expr.op == "!=":
        return left != right
    if expr.op == "<":
        return left < right
    if expr.op == "<=":
        return left <= right
    if expr.op == ">":
        return left > right
    assert expr.op == ">="
    return left >= right


# --- Printing ----------------------------------------------------------------

_LEVEL = {"or": 1, "and": 2,
          "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
          "+": 5, "-": 5, "*": 6, "div": 6, "mod": 6}


def _print(expr: Expr, parent_level: int) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, EnumLit):
        return expr.literal
    if isinstance(expr, VarRef):
        return expr.name
    if isinstance(expr, RecordLit):
        inner = ", ".join(f"{n}: {_print(e, 0)}" for n, e in expr.fields)
        return "{%s}" % inner
    if isinstance(expr, FieldAccess):
        return f"{_print(expr.base, 8)}.{expr.field}"
    if isinstance(expr, Unary):
        if expr.op == "not":
            text, level = f"not {_print(expr.operand, 3)}", 3
        else:
            text, level = f"-{_print(expr.operand, 7)}", 7
        return f"({text})" if level < parent_level else text
    assert isinstance(expr, Binary)
    level = _LEVEL[expr.op]
    # Left-associative: the right operand needs one level more.
    text = f"{_print(expr.left, level)} {expr.op} {_print(expr.right, level + 1)}"
    return f"({text})" if level < parent_level else text


def print_expr(expr: Expr) -> str:
    return _print(expr, 0)
