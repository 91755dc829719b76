import pytest

from fks.errors import EvalError, ExprTypeError
from fks.expr import (
    Binary,
    BoolLit,
    EnumLit,
    FieldAccess,
    IntLit,
    RecordLit,
    Unary,
    VarRef,
    check_against,
    evaluate,
    infer,
    print_expr,
    to_message,
    to_value,
)
from fks.kernel import enum_type, int_type, msg, record_type

DIGIT = int_type(0, 9, "Digit")
COLOR = enum_type(["red", "green"], "Color")
BIT = int_type(0, 1, "Bit")
PAIR = record_type({"hi": BIT, "lo": BIT}, "Pair")


def test_arithmetic_and_guards():
    x_sq = Binary("*", VarRef("X"), VarRef("X"))
    assert infer(x_sq, {"X": DIGIT}) == "int"
    assert evaluate(x_sq, {"X": 3}) == 9
    guard = Binary("and", Binary(">=", VarRef("X"), IntLit(0)), BoolLit(True))
    assert infer(guard, {"X": DIGIT}) == "bool"
    assert evaluate(guard, {"X": 3}) is True


def test_int_plus_bool_is_a_type_error():
    bad = Binary("+", VarRef("X"), BoolLit(True))
    with pytest.raises(ExprTypeError):
        infer(bad, {"X": DIGIT})


def test_enum_comparison():
    e = Binary("==", VarRef("C"), EnumLit("red", COLOR))
    assert infer(e, {"C": COLOR}) == "bool"
    assert evaluate(e, {"C": "red"}) is True
    other = enum_type(["red"], "Other")
    with pytest.raises(ExprTypeError):
        infer(Binary("==", VarRef("C"), EnumLit("red", other)), {"C": COLOR})


def test_record_literal_checks_and_evaluates():
    lit = RecordLit((("hi", Binary("div", VarRef("X"), IntLit(2))),
                     ("lo", Binary("mod", VarRef("X"), IntLit(2)))))
    check_against(lit, PAIR, {"X": DIGIT})
    assert evaluate(lit, {"X": 3}) == {"hi": 1, "lo": 1}
    assert to_message(evaluate(lit, {"X": 2}), PAIR) == msg({"hi": 1, "lo": 0})
    with pytest.raises(ExprTypeError):
        check_against(RecordLit((("hi", IntLit(0)),)), PAIR, {})


def test_field_access():
    decode = Binary("+", Binary("*", FieldAccess(VarRef("P"), "hi"), IntLit(2)),
                    FieldAccess(VarRef("P"), "lo"))
    assert infer(decode, {"P": PAIR}) == "int"
    assert evaluate(decode, {"P": to_value(msg({"hi": 1, "lo": 1}))}) == 3
    with pytest.raises(ExprTypeError):
        infer(FieldAccess(VarRef("X"), "hi"), {"X": DIGIT})


def test_range_enforced_at_message_boundary():
    assert to_message(9, DIGIT) == msg(9)
    with pytest.raises(EvalError):
        to_message(12, DIGIT)
    with pytest.raises(EvalError):
        to_message(True, DIGIT)


def test_division_by_zero():
    with pytest.raises(EvalError):
        evaluate(Binary("div", IntLit(1), IntLit(0)), {})


def test_printing_respects_precedence():
    e = Binary("*", Binary("+", VarRef("a"), VarRef("b")), VarRef("c"))
    assert print_expr(e) == "(a + b) * c"
    e2 = Binary("+", VarRef("a"), Binary("*", VarRef("b"), VarRef("c")))
    assert print_expr(e2) == "a + b * c"
    e3 = Unary("not", Binary("and", VarRef("p"), VarRef("q")))
    assert print_expr(e3) == "not (p and q)"
    e4 = Binary("-", Binary("-", VarRef("a"), VarRef("b")), VarRef("c"))
    assert print_expr(e4) == "a - b - c"
    e5 = Binary("-", VarRef("a"), Binary("-", VarRef("b"), VarRef("c")))
    assert print_expr(e5) == "a - (b - c)"
