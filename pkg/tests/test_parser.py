from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from fpverify.expr import And, BinOp, Cmp, Lit, Neg, Or, Var, dnf, negate, DisjunctionLimit
from fpverify.fpbits import BINARY32, BINARY64, MOCK
from fpverify.parser import Assert, Assign, Assume, ParseError, parse, render

from tinygen import random_program

SIMPLE = """
# a comment
format single;
input x in [-3.0, 3.0];
y = x * x;
assume(y > 1.0);
assert(y < 9.0);
"""


def test_simple_program():
    p = parse(SIMPLE)
    assert p.format is BINARY32
    assert [d.name for d in p.decls] == ["x"]
    assert p.stmts[0] == Assign("y", BinOp("*", Var("x"), Var("x")))
    assert isinstance(p.stmts[1], Assume) and isinstance(p.stmts[2], Assert)


def test_default_and_explicit_formats():
    assert parse("input x in [0.0, 1.0]; assert(x < 2.0);").format is BINARY32
    assert parse("format double; input x in [0.0, 1.0]; assert(x < 2.0);").format is BINARY64
    assert parse("format mock; input x in [0.0, 1.0]; assert(x < 2.0);").format is MOCK


def test_literals_round_to_the_format():
    p = parse("input x in [0.1, 1.0]; assert(x < 0.1f);")
    assert p.decls[0].lb == BINARY32.round(0.1)
    assert p.stmts[0].cond.right == Lit(BINARY32.round(0.1))
    p = parse("input x in [-0x1.8p+1, 0x1p-2]; assert(x < 1e1);")
    assert (p.decls[0].lb, p.decls[0].ub) == (-3.0, 0.25)


def test_precedence_and_unary_minus():
    p = parse("input a in [0.0, 1.0]; input b in [0.0, 1.0]; c = a - b * -a + -2.0; assert(c == 0.0);")
    expected = BinOp("+", BinOp("-", Var("a"), BinOp("*", Var("b"), Neg(Var("a")))), Lit(-2.0))
    assert p.stmts[0].expr == expected


def test_boolean_structure():
    p = parse("input a in [0.0, 1.0]; assert((a < 1.0 || a > 2.0) && (a + 1.0) != 3.0);")
    cond = p.stmts[0].cond
    assert isinstance(cond, And)
    assert isinstance(cond.items[0], Or)
    assert cond.items[1] == Cmp("!=", BinOp("+", Var("a"), Lit(1.0)), Lit(3.0))


@pytest.mark.parametrize("src, fragment", [
    ("input x in [0.0, 1.0];", "no assert"),
    ("assert(1.0 < 2.0);", "no input"),
    ("input x in [0.0, 1.0]; input x in [0.0, 1.0]; assert(x < 1.0);", "duplicate"),
    ("input x in [0.0, 1.0]; x = 2.0; assert(x < 1.0);", "assignment to input"),
    ("input x in [0.0, 1.0]; assert(y < 1.0);", "undeclared"),
    ("input x in [2.0, 1.0]; assert(x < 1.0);", "empty domain"),
    ("format quad; input x in [0.0, 1.0]; assert(x < 1.0);", "unknown format"),
    ("input x in [0.0, 1.0]; assert(x $ 1.0);", "unexpected character"),
    ("input x in [0.0, 1e39]; assert(x < 1.0);", "overflows"),
    ("input x in [0.0, 1.0]; assert(x + 1.0);", "expected a comparison"),
])
def test_errors(src, fragment):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert fragment in str(info.value)


def test_error_location():
    with pytest.raises(ParseError) as info:
        parse("input x in [0.0, 1.0];\nassert(x < z);")
    assert (info.value.line, info.value.col) == (2, 12)


@given(st.integers(0, 10_000))
def test_render_roundtrip(seed):
    src = random_program(random.Random(seed))
    p = parse(src)
    assert parse(render(p)) == p


def test_negation_and_dnf():
    a, b, c = (Cmp("<", Var(n), Lit(0.0)) for n in "abc")
    assert negate(a) == Cmp(">=", Var("a"), Lit(0.0))
    assert negate(And((a, b))) == Or((negate(a), negate(b)))
    assert dnf(And((Or((a, b)), c))) == [(a, c), (b, c)]
    wide = And(tuple(Or((a, b)) for _ in range(7)))
    with pytest.raises(DisjunctionLimit):
        dnf(wide, cap=64)
