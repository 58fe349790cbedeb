"""The Weyl algebra with parameters: normally ordered differential
operators and the transform suite (Fourier-Laplace, reduced
representative, additions, exponential twists, twisted Euler
transforms).

An operator is stored in normal form, sum over i of a_i(x) * D^i with
the polynomial coefficient on the left.  All transforms are pure
functions; `reduced_rep` returns a fully canonical representative of
the proportionality class, so `equiv` is structural equality of
canonical forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterable, Optional, Sequence

from .errors import CollapsedToFunction, WeylredError, ZeroOperator
from .scalar import CoefPoly, ParamPoly, ParamRat, _coerce_rat


class WeylOperator:
    """Normally ordered element sum_i a_i(x) D^i; coeffs[i] is a_i."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[CoefPoly]):
        cs = list(coeffs)
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)

    # -- constructors ----------------------------------------------------

    @staticmethod
    def zero() -> "WeylOperator":
        return WeylOperator([])

    @staticmethod
    def const(c) -> "WeylOperator":
        return WeylOperator([CoefPoly.const(c)])

    @staticmethod
    def x() -> "WeylOperator":
        return WeylOperator([CoefPoly.x()])

    @staticmethod
    def d() -> "WeylOperator":
        return WeylOperator([CoefPoly([]), CoefPoly.const(1)])

    @staticmethod
    def from_coeff(poly: CoefPoly, dpow: int = 0) -> "WeylOperator":
        return WeylOperator([CoefPoly([])] * dpow + [poly])

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def order(self) -> int:
        if not self.coeffs:
            raise ZeroOperator("order of the zero operator")
        return len(self.coeffs) - 1

    @property
    def degree(self) -> int:
        if not self.coeffs:
            raise ZeroOperator("degree of the zero operator")
        return max(c.degree for c in self.coeffs if not c.is_zero())

    def coeff(self, i: int) -> CoefPoly:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return CoefPoly([])

    def params(self) -> set:
        out = set()
        for c in self.coeffs:
            out |= c.params()
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, WeylOperator) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if self.is_zero():
            return "WeylOperator(0)"
        bits = [f"D^{i}: {c!r}" for i, c in enumerate(self.coeffs) if not c.is_zero()]
        return "WeylOperator[" + "; ".join(bits) + "]"

    # -- ring operations ----------------------------------------------------

    def __add__(self, other: "WeylOperator") -> "WeylOperator":
        n = max(len(self.coeffs), len(other.coeffs))
        return WeylOperator([self.coeff(i) + other.coeff(i) for i in range(n)])

    def __neg__(self) -> "WeylOperator":
        return WeylOperator([-c for c in self.coeffs])

    def __sub__(self, other: "WeylOperator") -> "WeylOperator":
        return self + (-other)

    def __mul__(self, other: "WeylOperator") -> "WeylOperator":
        return mul(self, other)

    def scale(self, c) -> "WeylOperator":
        c = _coerce_rat(c)
        return WeylOperator([p.scale(c) for p in self.coeffs])

    def __pow__(self, n: int) -> "WeylOperator":
        r = WeylOperator.const(1)
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def subst_params(self, values: dict) -> "WeylOperator":
        return WeylOperator([c.subst_params(values) for c in self.coeffs])


def mul(P: WeylOperator, Q: WeylOperator) -> WeylOperator:
    """Normally ordered product, via D^i a(x) = sum_k C(i,k) a^(k) D^(i-k)."""
    if P.is_zero() or Q.is_zero():
        return WeylOperator.zero()
    out = [CoefPoly([]) for _ in range(P.order + Q.order + 1)]
    # cache derivatives of Q's coefficients
    ders = []
    for b in Q.coeffs:
        row = [b]
        for _ in range(P.order):
            row.append(row[-1].derivative())
        ders.append(row)
    for i, a in enumerate(P.coeffs):
        if a.is_zero():
            continue
        for j in range(len(Q.coeffs)):
            if Q.coeffs[j].is_zero():
                continue
            for k in range(i + 1):
                dk = ders[j][k]
                if dk.is_zero():
                    continue
                out[i + j - k] = out[i + j - k] + (a * dk).scale(comb(i, k))
    return WeylOperator(out)


@dataclass(frozen=True)
class LocalizedOperator:
    """den(x)^{-1} * num, with den a polynomial in x only; den is monic
    and shares no x-factor with the coefficients of num."""

    den: CoefPoly
    num: WeylOperator

    def __post_init__(self):
        if self.den.is_zero():
            raise ZeroOperator("localized operator with zero denominator")
        if not self.num.is_zero():
            g = CoefPoly.gcd(self.den, _x_content(self.num))
            if g.degree > 0:
                object.__setattr__(self, "den", self.den.divexact(g).monic())
                object.__setattr__(
                    self, "num", WeylOperator([c.divexact(g) for c in self.num.coeffs])
                )


@dataclass(frozen=True)
class TwistSpec:
    """Exponential twist exp(p(x)) with p(x) = (quad/2) x^2 + lin x."""

    quad: ParamRat
    lin: ParamRat

    @staticmethod
    def of(quad, lin) -> "TwistSpec":
        return TwistSpec(_coerce_rat(quad), _coerce_rat(lin))

    def __neg__(self) -> "TwistSpec":
        return TwistSpec(-self.quad, -self.lin)

    def is_zero(self) -> bool:
        return self.quad.is_zero() and self.lin.is_zero()


class _CoefRat:
    """Rational function of x over ParamRat; internal to substitutions."""

    __slots__ = ("num", "den")

    def __init__(self, num: CoefPoly, den: CoefPoly):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            den = CoefPoly.const(1)
        else:
            g = CoefPoly.gcd(num, den)
            if g.degree > 0:
                num = num.divexact(g)
                den = den.divexact(g)
            lc = den.lead()
            if lc != ParamRat.one():
                num = num.scale(lc.inv())
                den = den.scale(lc.inv())
        self.num = num
        self.den = den

    @staticmethod
    def of(p: CoefPoly) -> "_CoefRat":
        return _CoefRat(p, CoefPoly.const(1))

    def is_zero(self):
        return self.num.is_zero()

    def __add__(self, o):
        return _CoefRat(self.num * o.den + o.num * self.den, self.den * o.den)

    def __neg__(self):
        return _CoefRat(-self.num, self.den)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        return _CoefRat(self.num * o.num, self.den * o.den)

    def derivative(self):
        n, d = self.num, self.den
        return _CoefRat(n.derivative() * d - n * d.derivative(), d * d)

    def __eq__(self, o):
        return isinstance(o, _CoefRat) and self.num == o.num and self.den == o.den


class _RatOp:
    """Operator with x-rational coefficients; the working form for
    derivation substitutions."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = list(coeffs)
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = cs

    @staticmethod
    def zero():
        return _RatOp([])

    @staticmethod
    def scalar(r: _CoefRat):
        return _RatOp([r])

    @staticmethod
    def from_weyl(P: WeylOperator):
        return _RatOp([_CoefRat.of(c) for c in P.coeffs])

    def coeff(self, i):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return _CoefRat.of(CoefPoly([]))

    def __add__(self, o):
        n = max(len(self.coeffs), len(o.coeffs))
        return _RatOp([self.coeff(i) + o.coeff(i) for i in range(n)])

    def __mul__(self, o):
        if not self.coeffs or not o.coeffs:
            return _RatOp.zero()
        out = [_CoefRat.of(CoefPoly([])) for _ in range(len(self.coeffs) + len(o.coeffs) - 1)]
        ders = []
        for b in o.coeffs:
            row = [b]
            for _ in range(len(self.coeffs) - 1):
                row.append(row[-1].derivative())
            ders.append(row)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j in range(len(o.coeffs)):
                if o.coeffs[j].is_zero():
                    continue
                for k in range(i + 1):
                    dk = ders[j][k]
                    if dk.is_zero():
                        continue
                    term = a * dk * _CoefRat.of(CoefPoly.const(comb(i, k)))
                    out[i + j - k] = out[i + j - k] + term
        return _RatOp(out)

    def to_localized(self) -> LocalizedOperator:
        den = CoefPoly.const(1)
        for c in self.coeffs:
            g = CoefPoly.gcd(den, c.den)
            den = den * c.den.divexact(g)
        num = []
        for c in self.coeffs:
            num.append(den.divexact(c.den) * c.num)
        return LocalizedOperator(den.monic(), WeylOperator(num))


def _apply_map(P: WeylOperator, x_img: _RatOp, d_img: _RatOp) -> _RatOp:
    """Image of P under the algebra map x -> x_img, D -> d_img.

    Horner accumulation from the top power of D down; within each
    coefficient, Horner from the top power of x down.
    """
    if P.is_zero():
        return _RatOp.zero()
    acc = _RatOp.zero()
    for i in range(P.order, -1, -1):
        acc = acc * d_img
        a = P.coeff(i)
        if a.is_zero():
            continue
        ai = _RatOp.zero()
        for k in range(a.degree, -1, -1):
            ai = ai * x_img
            ck = a.coeff(k)
            if not ck.is_zero():
                ai = ai + _RatOp.scalar(_CoefRat.of(CoefPoly.const(ck)))
        acc = acc + ai
    return acc


def _x_content(P: WeylOperator) -> CoefPoly:
    g = CoefPoly([])
    for c in P.coeffs:
        if not c.is_zero():
            g = CoefPoly.gcd(g, c)
    return g if not g.is_zero() else CoefPoly.const(1)


def reduced_rep(P) -> WeylOperator:
    """Canonical minimal-degree representative of the class {f(x) P}.

    Clears any x-denominator, divides out the x-content, clears the
    parameter denominators, divides out the parameter content, then
    scales so the top coefficient's leading term is monic.  Two
    operators are proportional over rational functions of x exactly
    when their canonical forms coincide.
    """
    if isinstance(P, LocalizedOperator):
        P = P.num
    if P.is_zero():
        raise ZeroOperator("reduced representative of zero")
    g = _x_content(P)
    if g.degree > 0:
        P = WeylOperator([c.divexact(g) for c in P.coeffs])
    # clear parameter denominators
    den = ParamPoly.const(1)
    for c in P.coeffs:
        for r in c.coeffs:
            den = ParamPoly.lcm(den, r.den)
    if not (den.is_const() and den.const_value() == 1):
        m = ParamRat(den, ParamPoly.const(1))
        P = P.scale(m)
    # divide out parameter content
    num_gcd = ParamPoly.const(0)
    for c in P.coeffs:
        for r in c.coeffs:
            if not r.is_zero():
                num_gcd = ParamPoly.gcd(num_gcd, r.num)
    if not num_gcd.is_zero() and not (num_gcd.is_const() and num_gcd.const_value() == 1):
        P = P.scale(ParamRat(ParamPoly.const(1), ParamPoly.const(1)) / ParamRat(num_gcd, ParamPoly.const(1)))
    # unit normalisation: top coefficient's leading term becomes monic
    top = P.coeffs[-1]
    lead = top.lead()
    u = ParamRat(ParamPoly.const(1), ParamPoly.const(1)) / ParamRat(
        ParamPoly.const(lead.num.lead_coeff()), ParamPoly.const(1)
    )
    return P.scale(u)


def equiv(P: WeylOperator, Q: WeylOperator) -> bool:
    """Proportionality over rational functions of x (exact test)."""
    return reduced_rep(P) == reduced_rep(Q)


def laplace(P: WeylOperator) -> WeylOperator:
    """Fourier-Laplace transform: x -> -D, D -> x."""
    img = _apply_map(
        P,
        _RatOp([_CoefRat.of(CoefPoly([])), _CoefRat.of(CoefPoly.const(-1))]),
        _RatOp([_CoefRat.of(CoefPoly.x())]),
    )
    loc = img.to_localized()
    if loc.den.degree > 0:
        raise WeylredError("internal: laplace produced a denominator")
    return loc.num.scale(loc.den.coeff(0).inv()) if loc.den.coeff(0) != ParamRat.one() else loc.num


def laplace_inv(P: WeylOperator) -> WeylOperator:
    """Inverse Fourier-Laplace transform: x -> D, D -> -x."""
    img = _apply_map(
        P,
        _RatOp([_CoefRat.of(CoefPoly([])), _CoefRat.of(CoefPoly.const(1))]),
        _RatOp([_CoefRat.of(-CoefPoly.x())]),
    )
    loc = img.to_localized()
    if loc.den.degree > 0:
        raise WeylredError("internal: laplace_inv produced a denominator")
    return loc.num.scale(loc.den.coeff(0).inv()) if loc.den.coeff(0) != ParamRat.one() else loc.num


def adei(h: _CoefRat | CoefPoly | tuple, P) -> LocalizedOperator:
    """Substitute D -> D - h(x) and normally order (gauge by e^{int h})."""
    if isinstance(h, tuple):
        h = _CoefRat(h[0], h[1])
    elif isinstance(h, CoefPoly):
        h = _CoefRat.of(h)
    if isinstance(P, LocalizedOperator):
        inner = adei(h, P.num)
        return LocalizedOperator((P.den * inner.den).monic(), inner.num)
    d_img = _RatOp([-h, _CoefRat.of(CoefPoly.const(1))])
    x_img = _RatOp([_CoefRat.of(CoefPoly.x())])
    return _apply_map(P, x_img, d_img).to_localized()


def rad_power(c, f, P) -> WeylOperator:
    """Addition at the point c: reduced conjugate by (x - c)^f."""
    c = _coerce_rat(c)
    f = _coerce_rat(f)
    if isinstance(P, WeylOperator) and P.is_zero():
        raise ZeroOperator("addition applied to zero")
    h = _CoefRat(CoefPoly.const(f), CoefPoly.linear(-c, 1))
    return reduced_rep(adei(h, P))


def ade(t: TwistSpec, P: WeylOperator) -> WeylOperator:
    """Exponential twist: D -> D - p'(x) for p = (quad/2) x^2 + lin x."""
    h = CoefPoly.linear(t.lin, t.quad)
    loc = adei(h, P)
    if loc.den.degree > 0:
        raise WeylredError("internal: polynomial twist produced a denominator")
    return loc.num.scale(loc.den.coeff(0).inv()) if loc.den.coeff(0) != ParamRat.one() else loc.num


def shift_args(P: WeylOperator, alpha, beta) -> WeylOperator:
    """P(x, D + alpha x + beta), the leg-selection substitution."""
    alpha = _coerce_rat(alpha)
    beta = _coerce_rat(beta)
    return ade(TwistSpec(-alpha, -beta), P)


def euler(alpha, f, P: WeylOperator) -> WeylOperator:
    """Twisted Euler transform E(alpha, f): Laplace conjugate of the
    addition by (x + alpha)^(-f), returned in canonical form."""
    alpha = _coerce_rat(alpha)
    f = _coerce_rat(f)
    if P.is_zero():
        raise ZeroOperator("euler applied to zero")
    Q = reduced_rep(P)
    Q = laplace_inv(Q)
    Q = rad_power(-alpha, -f, Q)
    Q = laplace(Q)
    Q = reduced_rep(Q)
    if Q.order == 0:
        raise CollapsedToFunction("euler transform collapsed to a function")
    return Q


def twisted_euler(t: TwistSpec, pairs: Sequence[tuple], P: WeylOperator) -> WeylOperator:
    """Conjugated product of Euler transforms:
    exp-twist by p, then E(alpha_i, f_i) right to left, then untwist."""
    if P.is_zero():
        raise ZeroOperator("twisted euler applied to zero")
    Q = ade(-t, P)
    for a, f in reversed(list(pairs)):
        Q = euler(a, f, Q)
    Q = ade(t, Q)
    return reduced_rep(Q)
