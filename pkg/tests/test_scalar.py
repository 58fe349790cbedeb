"""Unit tests for the exact scalar layer."""

from fractions import Fraction
import random

import pytest
from hypothesis import given, settings, strategies as st

from weylred.scalar import (
    CoefPoly,
    ParamPoly,
    ParamRat,
    is_integer_constant,
    pochhammer,
    small_roots,
)

A = ParamRat.param("a")
B = ParamRat.param("b")
MU = ParamRat.param("mu")


def rat(x) -> ParamRat:
    return ParamRat.const(Fraction(x))


def rand_paramrat(rng, depth=2) -> ParamRat:
    atoms = [A, B, rat(rng.randint(-3, 3)), rat(Fraction(rng.randint(1, 5), rng.randint(1, 5)))]
    v = rng.choice(atoms)
    for _ in range(depth):
        w = rng.choice(atoms)
        op = rng.randint(0, 3)
        if op == 0:
            v = v + w
        elif op == 1:
            v = v - w
        elif op == 2:
            v = v * w
        elif not w.is_zero():
            v = v / w
    return v


def test_parampoly_normal_form():
    p = ParamPoly.var("a") * ParamPoly.var("b") - ParamPoly.var("b") * ParamPoly.var("a")
    assert p.is_zero()
    q = ParamPoly.var("a") + ParamPoly.const(0)
    assert q.vars == ("a",)


def test_paramrat_gcd_reduction():
    # (a^2 - b^2)/(a - b) reduces to a + b
    num = A * A - B * B
    den = A - B
    r = num / den
    assert r == A + B


def test_paramrat_den_monic():
    r = ParamRat.const(1) / (rat(2) * A + rat(2))
    # denominator normalised monic: 1/(2a+2) = (1/2)/(a+1)
    assert r.den.compact() == "a+1"


def test_field_axioms_random():
    rng = random.Random(7)
    for _ in range(40):
        u, v, w = (rand_paramrat(rng) for _ in range(3))
        assert (u + v) + w == u + (v + w)
        assert u * (v + w) == u * v + u * w
        assert (u * v) * w == u * (v * w)
        if not u.is_zero():
            assert u * (ParamRat.const(1) / u) == ParamRat.const(1)


@given(st.integers(-30, 30), st.integers(1, 30))
@settings(max_examples=60, deadline=None)
def test_normalization_idempotent(n, d):
    r = ParamRat.const(Fraction(n, d))
    assert ParamRat(r.num, r.den) == r


def test_pochhammer_values():
    assert pochhammer(MU, 0) == rat(1)
    assert pochhammer(rat(3), 2) == rat(12)
    expect = MU**3 + rat(3) * MU**2 + rat(2) * MU
    assert pochhammer(MU, 3) == expect


def test_pochhammer_recurrence():
    rng = random.Random(3)
    for _ in range(10):
        v = rand_paramrat(rng)
        l = rng.randint(0, 8)
        assert pochhammer(v, l + 1) == pochhammer(v, l) * (v + rat(l))


def test_is_integer_constant():
    assert is_integer_constant(rat(5)) == 5
    assert is_integer_constant((rat(2) * MU + rat(2)) / rat(2) - MU) == 1
    assert is_integer_constant(MU - ParamRat.param("nu")) is None
    assert is_integer_constant(rat(Fraction(1, 2))) is None


def lam_poly(*coeffs) -> CoefPoly:
    return CoefPoly([c if isinstance(c, ParamRat) else rat(c) for c in coeffs])


def test_small_roots_two_parameters():
    # lam^2 - (a+b) lam + ab = (lam - a)(lam - b)
    p = lam_poly(A * B, -(A + B), 1)
    roots, rem = small_roots(p)
    assert rem.degree == 0
    assert sorted(r.compact() for r, m in roots) == ["a", "b"]
    assert all(m == 1 for _, m in roots)


def test_small_roots_double_zero():
    p = lam_poly(0, 0, 1)  # lam^2
    roots, rem = small_roots(p)
    assert roots == [(rat(0), 2)]
    assert rem.degree == 0


def test_small_roots_irrational_remainder():
    p = lam_poly(-2, 0, 1)  # lam^2 - 2
    roots, rem = small_roots(p)
    assert roots == []
    assert rem.monic() == p


def test_small_roots_product_reconstruction():
    rng = random.Random(11)
    x = CoefPoly.x()
    for _ in range(12):
        roots = [rand_paramrat(rng, 1) for _ in range(rng.randint(1, 3))]
        p = CoefPoly.const(1)
        for r in roots:
            p = p * (x - CoefPoly.const(r)) ** rng.randint(1, 2)
        found, rem = small_roots(p)
        rebuilt = rem
        for r, m in found:
            rebuilt = rebuilt * (x - CoefPoly.const(r)) ** m
        assert rebuilt == p


def test_small_roots_three_distinct_params():
    c = ParamRat.param("c")
    x = CoefPoly.x()
    p = (x - CoefPoly.const(A)) * (x - CoefPoly.const(B)) * (x - CoefPoly.const(c))
    roots, rem = small_roots(p)
    assert rem.degree == 0
    assert sorted(r.compact() for r, _ in roots) == ["a", "b", "c"]


def test_coefpoly_shift_and_eval():
    x = CoefPoly.x()
    p = x * x + CoefPoly.const(A)
    q = p.shift(rat(1))  # (x+1)^2 + a
    assert q == x * x + x.scale(2) + CoefPoly.const(A + rat(1))
    assert p.eval(rat(2)) == rat(4) + A


def test_coefpoly_gcd():
    x = CoefPoly.x()
    p = (x - CoefPoly.const(A)) * (x - CoefPoly.const(B))
    q = (x - CoefPoly.const(A)) * x
    g = CoefPoly.gcd(p, q)
    assert g == x - CoefPoly.const(A)


def test_paramrat_sqrt():
    assert (A * A).sqrt() == A or (A * A).sqrt() == -A
    assert ((A + B) ** 2).sqrt() in ((A + B), -(A + B))
    assert (A * B).sqrt() is None
    assert rat(Fraction(9, 4)).sqrt() == rat(Fraction(3, 2))


def test_subst():
    r = (A + B) / (A - B)
    s = r.subst({"a": rat(3)})
    assert s == (rat(3) + B) / (rat(3) - B)
    with pytest.raises(Exception):
        (ParamRat.const(1) / (A - rat(1))).subst({"a": rat(1)})
