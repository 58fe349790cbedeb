"""Unit tests for operator arithmetic and the transform suite."""

import random

import pytest

from weylred.classic import gauss, hermite, kummer, trivial_power
from weylred.errors import CollapsedToFunction, ZeroOperator
from weylred.scalar import CoefPoly, ParamRat
from weylred.weyl import (
    TwistSpec,
    WeylOperator,
    ade,
    adei,
    equiv,
    euler,
    laplace,
    laplace_inv,
    mul,
    rad_power,
    reduced_rep,
    shift_args,
    twisted_euler,
)

X = WeylOperator.x()
D = WeylOperator.d()
ONE = WeylOperator.const(1)


def c(v) -> WeylOperator:
    return WeylOperator.const(v)


def p(name) -> ParamRat:
    return ParamRat.param(name)


def rand_op(rng, max_ord=3, max_deg=3, params=("a", "b")) -> WeylOperator:
    coeffs = []
    for _ in range(rng.randint(1, max_ord + 1)):
        poly = [ParamRat.zero()] * (rng.randint(0, max_deg) + 1)
        for k in range(len(poly)):
            kind = rng.randint(0, 3)
            if kind == 0:
                poly[k] = ParamRat.const(rng.randint(-3, 3))
            elif kind == 1:
                poly[k] = ParamRat.param(rng.choice(params))
            elif kind == 2:
                poly[k] = ParamRat.param(rng.choice(params)) + ParamRat.const(rng.randint(-2, 2))
        coeffs.append(CoefPoly(poly))
    op = WeylOperator(coeffs)
    return op if not op.is_zero() else D


# -- product and normal ordering -------------------------------------------


def test_commutator():
    assert D * X - X * D == ONE


def test_mul_already_ordered():
    assert X * D == WeylOperator([CoefPoly([]), CoefPoly.x()])


def test_mul_second_order():
    # D^2 x^2 = x^2 D^2 + 4x D + 2
    lhs = (D * D) * (X * X)
    expect = (X * X) * (D * D) + c(4) * X * D + c(2)
    assert lhs == expect


def test_mul_associative_and_order_additive():
    rng = random.Random(5)
    for _ in range(12):
        P, Q, R = rand_op(rng, 2, 2), rand_op(rng, 2, 2), rand_op(rng, 2, 2)
        assert (P * Q) * R == P * (Q * R)
        assert (P * Q).order == P.order + Q.order


# -- Fourier-Laplace ----------------------------------------------------------


def test_laplace_generators():
    assert laplace(D) == X
    assert laplace(X) == -D
    # laplace(xD) = -Dx = -xD - 1
    assert laplace(X * D) == -(X * D) - ONE


def test_laplace_round_trip():
    P = X * X * D * D + X
    assert laplace_inv(laplace(P)) == P
    assert laplace(laplace_inv(P)) == P


def test_laplace_homomorphism():
    rng = random.Random(9)
    for _ in range(10):
        P, Q = rand_op(rng, 2, 2), rand_op(rng, 2, 2)
        assert laplace(P * Q) == laplace(P) * laplace(Q)


# -- reduced representative ---------------------------------------------------


def test_reduced_rep_strips_content():
    P = X * X * D + X  # x^2 D + x
    assert reduced_rep(P) == X * D + ONE


def test_reduced_rep_idempotent():
    P = X * D + ONE
    assert reduced_rep(P) == P
    rng = random.Random(2)
    for _ in range(10):
        Q = reduced_rep(rand_op(rng))
        assert reduced_rep(Q) == Q


def test_reduced_rep_zero_errors():
    with pytest.raises(ZeroOperator):
        reduced_rep(WeylOperator.zero())


def test_equiv():
    assert equiv(X * D + ONE, (X * D + ONE).scale(3))
    assert equiv(X * X * D + X, X * D + ONE)
    assert not equiv(X * D + ONE, X * D)


# -- gauge transforms ---------------------------------------------------------


def test_adei_simple_pole():
    lam = p("lam")
    loc = adei((CoefPoly.const(lam), CoefPoly.linear(-p("c"), 1)), D)
    # D - lam/(x-c), cleared: (x-c) D - lam
    assert loc.num == WeylOperator([CoefPoly.const(-lam), CoefPoly.linear(-p("c"), 1)])


def test_adei_identity_and_inverse():
    P = X * D * D + D
    assert adei(CoefPoly([]), P).num == P
    rng = random.Random(4)
    for _ in range(6):
        P = rand_op(rng, 2, 2)
        h = (
            CoefPoly.const(p("a")),
            CoefPoly.linear(ParamRat.const(-1), 1) * CoefPoly.linear(ParamRat.const(2), 1),
        )
        Q = adei(h, P)
        R = adei((-(h[0]), h[1]), Q)
        assert equiv(R.num, P)


def test_adei_polynomial():
    # (D - x)^2 = D^2 - 2xD + x^2 - 1
    got = adei(CoefPoly.x(), D * D).num
    expect = D * D - c(2) * X * D + X * X - ONE
    assert got == expect


def test_rad_power_examples():
    f = p("f")
    assert rad_power(0, f, D) == X * D - WeylOperator.const(f)
    P = kummer()
    assert rad_power(p("c0"), 0, P) == reduced_rep(P)
    # round trip at a regular point
    Q = rad_power(0, -f, rad_power(0, f, X * D))
    assert equiv(Q, X * D)


def test_ade_examples():
    beta = p("beta")
    assert ade(TwistSpec.of(0, beta), D) == D - WeylOperator.const(beta)
    alpha = p("alpha")
    assert ade(TwistSpec.of(alpha, 0), D) == D - WeylOperator.const(alpha) * X
    # exp(-x) twist of Kummer
    a, cc = p("a"), p("c")
    got = ade(TwistSpec.of(0, ParamRat.const(-1)), kummer())
    expect = (
        X * D * D
        + (X + WeylOperator.const(cc)) * D
        + WeylOperator.const(cc - a)
    )
    assert got == expect


def test_shift_args():
    alpha, beta = p("alpha"), p("beta")
    P = D - WeylOperator.const(alpha) * X - WeylOperator.const(beta)
    assert shift_args(P, alpha, beta) == D
    # Hermite shifted by (1, 0): D^2 + xD + a + 1
    got = shift_args(hermite(), 1, 0)
    assert got == D * D + X * D + WeylOperator.const(p("a") + ParamRat.const(1))
    Q = gauss()
    assert shift_args(Q, 0, 0) == Q


# -- Euler transforms ----------------------------------------------------------


def test_euler_intro_kummer():
    a, cc = p("a"), p("c")
    got = euler(0, a - ParamRat.const(1), kummer())
    expect = X * D + WeylOperator.const(cc - a) - X
    assert equiv(got, expect)


def test_euler_intro_gauss():
    a, b, cc = p("a"), p("b"), p("c")
    got = euler(0, b - ParamRat.const(1), gauss())
    one = ParamRat.const(1)
    expect = (X - X * X) * D + WeylOperator.const(cc - b) - WeylOperator.const(a - b + one) * X
    assert equiv(got, expect)


def test_euler_intro_hermite():
    a = p("a")
    got = euler(0, -a - ParamRat.const(1), hermite())
    assert equiv(got, D - X)


def test_euler_generic_shift_on_kummer():
    # E(0, g) maps Kummer(a, c) to Kummer(a-g, c-g)
    g = p("g")
    got = euler(0, g, kummer())
    a, cc = p("a"), p("c")
    expect = kummer(a - g, cc - g)
    assert equiv(got, expect)


def test_euler_stability_at_zero_parameter():
    for P in (gauss(), kummer(), hermite()):
        assert equiv(euler(0, 0, P), P)
        assert equiv(euler(2, 0, P), P)


def test_euler_inverse_round_trip():
    t = p("t")
    for P in (gauss(), kummer(), hermite()):
        Q = euler(0, t, P)
        assert equiv(euler(0, -t, Q), P)


def test_euler_collapse_detected():
    # x D - mu has the single infinity exponent -mu (solution x^mu), so
    # the order-dropping transform collapses the order-1 operator.
    mu = p("mu")
    with pytest.raises(CollapsedToFunction):
        euler(0, -mu - ParamRat.const(1), X * D - WeylOperator.const(mu))


def test_twisted_euler_matches_plain():
    P = X * D * D + D
    f = p("f")
    lhs = twisted_euler(TwistSpec.of(0, 0), [(ParamRat.zero(), f)], P)
    rhs = reduced_rep(euler(0, f, P))
    assert lhs == rhs


def test_twisted_euler_remark_identity():
    # E(alpha, f) equals the exp(alpha x)-conjugated plain Euler transform
    P = X * D * D + D
    f, alpha = p("f"), p("alpha")
    lhs = twisted_euler(TwistSpec.of(0, alpha), [(ParamRat.zero(), f)], P)
    rhs = reduced_rep(euler(alpha, f, P))
    assert lhs == rhs


def test_twisted_euler_collapse_to_trivial_form():
    # single-leg table with full named row: E((alpha/2)x^2; beta, nu) P ~ (D - alpha x - beta)^n
    cc, a = p("c"), p("a")
    P = X * D + WeylOperator.const(cc - a) - X  # reduced Kummer
    got = twisted_euler(TwistSpec.of(0, 1), [(ParamRat.zero(), cc - a)], P)
    assert equiv(got, trivial_power(0, 1, 1))


def test_trivial_power_normal_form():
    alpha, beta = p("alpha"), p("beta")
    P = trivial_power(alpha, beta, 2)
    assert P.order == 2
    assert shift_args(P, alpha, beta) == D * D
