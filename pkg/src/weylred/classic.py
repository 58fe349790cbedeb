"""Classical second-order operators used throughout the tests and demos."""

from __future__ import annotations

from .scalar import CoefPoly, ParamRat, _coerce_rat
from .weyl import WeylOperator


def _r(v) -> ParamRat:
    return _coerce_rat(v)


def gauss(a="a", b="b", c="c") -> WeylOperator:
    """x(1-x) D^2 + (c - (a+b+1)x) D - ab (hypergeometric)."""
    a, b, c = (_r(ParamRat.param(v)) if isinstance(v, str) else _r(v) for v in (a, b, c))
    one = ParamRat.one()
    return WeylOperator(
        [
            CoefPoly.const(-(a * b)),
            CoefPoly.linear(c, -(a + b + one)),
            CoefPoly([ParamRat.zero(), one, -one]),
        ]
    )


def kummer(a="a", c="c") -> WeylOperator:
    """x D^2 + (c - x) D - a (confluent hypergeometric)."""
    a, c = (_r(ParamRat.param(v)) if isinstance(v, str) else _r(v) for v in (a, c))
    one = ParamRat.one()
    return WeylOperator(
        [
            CoefPoly.const(-a),
            CoefPoly.linear(c, -one),
            CoefPoly([ParamRat.zero(), one]),
        ]
    )


def hermite(a="a") -> WeylOperator:
    """D^2 - x D + a (Hermite-Weber)."""
    a = _r(ParamRat.param(a)) if isinstance(a, str) else _r(a)
    one = ParamRat.one()
    return WeylOperator(
        [
            CoefPoly.const(a),
            CoefPoly([ParamRat.zero(), -one]),
            CoefPoly.const(one),
        ]
    )


def trivial_power(alpha, beta, n: int) -> WeylOperator:
    """(D - alpha x - beta)^n, the terminal form of the reduction."""
    alpha, beta = _r(alpha), _r(beta)
    base = WeylOperator([CoefPoly.linear(-beta, -alpha), CoefPoly.const(1)])
    return base**n
