from __future__ import annotations

import math
import operator
from pathlib import Path

import pytest

from fpverify.expr import And, BinOp, Lit, Neg, Or, Var, negate
from fpverify.fpbits import BINARY32
from fpverify.interval import FpInterval
from fpverify.model import Constraint, DerivationError, Model, count_occ, degree, derive
from fpverify.parser import Assert, Assign, Assume, parse
from fpverify.propagate import concrete_eval

from tinygen import corpus, input_tuples

CMP = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge,
       "==": operator.eq, "!=": operator.ne}

BENCH = Path(__file__).resolve().parents[1] / "src" / "fpverify" / "benchmarks"


def occurrence_system() -> Model:
    """z = (x + y) * x, z = y + 1, w = y - 1 over [-10, 10]."""
    x, y, z, w = (Var(n) for n in "xyzw")
    d = FpInterval(-10.0, 10.0)
    cs = (
        Constraint(z, "==", BinOp("*", BinOp("+", x, y), x)),
        Constraint(z, "==", BinOp("+", y, Lit(1.0))),
        Constraint(w, "==", BinOp("-", y, Lit(1.0))),
    )
    return Model(BINARY32, ("x", "y", "z", "w"), (d,) * 4, cs, ("x", "y"))


def test_count_and_degree():
    m = occurrence_system()
    assert count_occ("x", m.constraints[0]) == 2
    assert count_occ("y", m.constraints[1]) == 1
    assert degree("y", m) == 3
    assert degree("x", m) == 1
    assert m.cstr[m.index["y"]] == (0, 1, 2)
    assert [m.lex(v) for v in m.variables] == [1, 2, 3, 4]


def test_derivation_ssa():
    src = "input x in [0.0, 1.0]; y = x + 1.0; y = y * y; assume(y > 1.0); assert(y < 3.0);"
    ds = derive(parse(src))
    assert len(ds) == 1
    m = ds.models[0]
    assert m.variables == ("x", "y", "y@1")
    assert m.inputs == ("x",)
    assert m.temporaries == ("y", "y@1")
    assert m.is_ssa
    assert [str(c) for c in m.constraints] == [
        "y = (x + 0x1.0000000000000p+0)",
        "y@1 = (y * y)",
        "y@1 > 0x1.0000000000000p+0",
        "y@1 >= 0x1.8000000000000p+1",
    ]
    assert [c.source for c in m.constraints] == ["body", "body", "pre", "post"]
    assert m.output == "y@1"
    assert m.domain("y") == FpInterval.full()


def test_negated_conjunction_gives_disjuncts():
    ds = derive(parse("input x in [0.0, 1.0]; assert(x >= 0.0 && x < 0.5); assert(x != 0.25);"))
    assert len(ds) == 3
    assert [str(m.constraints[-1]) for m in ds] == [
        "x < 0x0.0p+0", "x >= 0x1.0000000000000p-1", "x == 0x1.0000000000000p-2",
    ]


def test_too_many_disjuncts():
    cond = " && ".join(f"x != {k}.0" for k in range(70))
    with pytest.raises(DerivationError):
        derive(parse(f"input x in [0.0, 1.0]; assert({cond});"))


def test_disjunct_union_matches_negated_post():
    # brute force: a tuple is a counter-example iff some disjunct accepts it
    for src, ds in corpus(40, seed=7):
        prog = ds.program
        for env in input_tuples(ds):
            hits = [concrete_eval(m, env) for m in ds]
            assert any(hits) == _violates(prog, env), src


def _violates(prog, env) -> bool:
    """Reference semantics evaluated straight from the program text.

    Assignments must stay finite; each comparison atom is false when one of
    its sides is not finite, whichever polarity it appears with.
    """
    fmt = prog.format
    vals = dict(env)

    def ev(e):
        if isinstance(e, Var):
            return vals[e.name]
        if isinstance(e, Lit):
            return e.value
        if isinstance(e, Neg):
            return -ev(e.arg)
        r = fmt.op(e.op, ev(e.left), ev(e.right))
        if not math.isfinite(r):
            raise ArithmeticError
        return r

    def holds(b):
        if isinstance(b, And):
            return all(holds(i) for i in b.items)
        if isinstance(b, Or):
            return any(holds(i) for i in b.items)
        try:
            lhs, rhs = ev(b.left), ev(b.right)
        except ArithmeticError:
            return False
        return CMP[b.op](lhs, rhs)

    try:
        for s in prog.stmts:
            if isinstance(s, Assign):
                vals[s.target] = ev(s.expr)
    except ArithmeticError:
        return False
    pre = [s.cond for s in prog.stmts if isinstance(s, Assume)]
    post = [s.cond for s in prog.stmts if isinstance(s, Assert)]
    return all(holds(c) for c in pre) and any(holds(negate(c)) for c in post)


def test_f23_encoding_inputs():
    ds = derive(parse((BENCH / "f23.fpv").read_text()))
    m = ds.models[0]
    assert m.inputs == ("x", "y")
    assert len(ds) == 1
    assert len(m.variables) == 6


def test_model_validation():
    d = FpInterval(0.0, 1.0)
    with pytest.raises(ValueError):
        Model(BINARY32, ("x",), (d,), (), ())
    with pytest.raises(ValueError):
        Model(BINARY32, ("x",), (d,), (Constraint(Var("q"), "<", Lit(0.0)),), ("x",))
