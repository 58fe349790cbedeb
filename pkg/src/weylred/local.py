"""Local analysis at singular points: Newton polygon, characteristic
polynomials and semi-simple exponents at infinity and at regular
points, truncated series solutions, and extraction of the full table
of local data.

Conventions.  A solution at infinity of datum value nu behaves like
x^(-nu) times a power series in 1/x (times an exponential twist); at a
finite point c the datum value is the honest exponent of (x-c).  The
Newton polygon plots (i, deg a_i - i) and takes the upper concave
hull, so slope 1 edges carry exp(alpha x) classes and slope 2 edges
carry exp((alpha/2) x^2) classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    CollapsedToFunction,
    NonSemiSimple,
    NonSplitting,
    NotRegularPoint,
    ResonantRecurrence,
    SlopeOutOfRange,
    WeylredError,
    ZeroOperator,
)
from .scalar import (
    CoefPoly,
    ParamRat,
    _coerce_rat,
    is_integer_constant,
    small_roots,
)
from .weyl import TwistSpec, WeylOperator, reduced_rep, shift_args


# ---------------------------------------------------------------------------
# exponent blocks


@dataclass(frozen=True)
class ExponentBlock:
    """[value]_mult = {value, value+1, ..., value+mult-1}."""

    value: ParamRat
    mult: int
    is_zero_block: bool = False

    def shifted(self, f: ParamRat) -> "ExponentBlock":
        v = self.value + f
        return ExponentBlock(v, self.mult, v.is_zero())

    def key(self):
        return (self.is_zero_block is False, -self.mult, self.value.sort_key())


@dataclass(frozen=True)
class ExponentSet:
    blocks: tuple

    def __init__(self, blocks):
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def total(self) -> int:
        return sum(b.mult for b in self.blocks)

    def named(self) -> tuple:
        return tuple(b for b in self.blocks if not b.is_zero_block)

    def zero_mult(self) -> int:
        return sum(b.mult for b in self.blocks if b.is_zero_block)

    def validate(self):
        zeros = [b for b in self.blocks if b.is_zero_block]
        if len(zeros) > 1:
            raise NonSemiSimple("more than one zero block at a point")
        for b in zeros:
            if not b.value.is_zero():
                raise NonSemiSimple("zero block with nonzero value")
        vals = [b.value for b in self.blocks]
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                if is_integer_constant(vals[i] - vals[j]) is not None:
                    from .errors import BlockCollision

                    raise BlockCollision(
                        f"blocks {vals[i].compact()} and {vals[j].compact()} "
                        "are integer-separated"
                    )

    def canonical(self) -> "ExponentSet":
        return ExponentSet(sorted(self.blocks, key=ExponentBlock.key))


def _group_chains(values: Sequence[ParamRat], context_zero: bool) -> list:
    """Group simple roots into integer-spaced consecutive chains.

    Returns ExponentBlock items; raises NonSemiSimple when a chain is
    not a consecutive run.  Zero-block flags are set only when
    context_zero is true (regular points).
    """
    remaining = list(values)
    blocks = []
    while remaining:
        base = remaining.pop(0)
        offsets = {0: base}
        rest = []
        for v in remaining:
            k = is_integer_constant(v - base)
            if k is None:
                rest.append(v)
            elif k in offsets:
                raise NonSemiSimple("repeated exponent in a chain")
            else:
                offsets[k] = v
        remaining = rest
        ks = sorted(offsets)
        if ks != list(range(ks[0], ks[0] + len(ks))):
            raise NonSemiSimple(
                "integer-spaced exponents with gaps (logarithmic case)"
            )
        value = offsets[ks[0]]
        flag = bool(context_zero and value.is_zero())
        blocks.append(ExponentBlock(value, len(ks), flag))
    return blocks


# ---------------------------------------------------------------------------
# Newton polygon


@dataclass(frozen=True)
class NewtonPolygon:
    vertices: tuple
    edges: tuple  # ((slope: Fraction, length: int), ...) left to right

    def slope_length(self, s) -> int:
        s = Fraction(s)
        for slope, length in self.edges:
            if slope == s:
                return length
        return 0

    def edge_span(self, s) -> Optional[tuple]:
        """(u_left, y_left, u_right) of the edge with slope s."""
        s = Fraction(s)
        for k in range(len(self.vertices) - 1):
            (u1, y1), (u2, _) = self.vertices[k], self.vertices[k + 1]
            slope = Fraction(y1 - self.vertices[k + 1][1], u2 - u1)
            if slope == s:
                return (u1, y1, u2)
        return None

    def max_slope(self) -> Fraction:
        return max((s for s, _ in self.edges), default=Fraction(0))


def newton_polygon(P: WeylOperator) -> NewtonPolygon:
    """Upper concave hull of the points (i, deg a_i - i); reported edge
    slopes are positive for downhill edges read left to right."""
    if P.is_zero():
        raise ZeroOperator("newton polygon of zero")
    pts = {}
    for i, a in enumerate(P.coeffs):
        if not a.is_zero():
            pts[i] = a.degree - i
    floor = min(pts.values())
    if 0 not in pts:
        pts[0] = floor
    points = sorted(pts.items())
    hull = []
    for u, y in points:
        while len(hull) >= 2:
            (u1, y1), (u2, y2) = hull[-2], hull[-1]
            if (u2 - u1) * (y - y1) - (y2 - y1) * (u - u1) >= 0:
                hull.pop()
            else:
                break
        hull.append((u, y))
    edges = []
    for k in range(len(hull) - 1):
        (u1, y1), (u2, y2) = hull[k], hull[k + 1]
        edges.append((Fraction(y1 - y2, u2 - u1), u2 - u1))
    return NewtonPolygon(tuple(hull), tuple(edges))


def _check_slopes(np: NewtonPolygon):
    for s, _ in np.edges:
        if s > 2:
            raise SlopeOutOfRange(f"edge of slope {s} (rank > 2 at infinity)")
        if 0 < s < 2 and s.denominator != 1:
            raise NonSplitting(f"fractional slope {s}: ramified exponential part")


# ---------------------------------------------------------------------------
# characteristic machinery at infinity


class InfinityExpansion:
    """Coefficient grid of P = sum_s x^(rho-s) P_s(D) and the derived
    lambda-polynomials p_k(lambda, 0); m is the first index with a
    nonzero p_k."""

    def __init__(self, P: WeylOperator):
        if P.is_zero():
            raise ZeroOperator("expansion of zero")
        self.order = P.order
        self.rho = P.degree
        # grid[s][j] = coefficient of x^(rho-s) in a_j
        self.grid = []
        for s in range(self.rho + 1):
            row = [P.coeff(j).coeff(self.rho - s) for j in range(self.order + 1)]
            self.grid.append(row)
        self._pk = []
        self.m = None
        for k in range(self.rho + self.order + 2):
            if not self.p(k).is_zero():
                self.m = k
                break
        if self.m is None:
            raise WeylredError("internal: no nonzero characteristic index")

    def _poch_poly(self, shift: int, length: int) -> CoefPoly:
        out = CoefPoly.const(1)
        lam = CoefPoly.x()
        for t in range(length):
            out = out * (lam + CoefPoly.const(shift + t))
        return out

    def p(self, k: int) -> CoefPoly:
        """p_k(lambda, 0) as a polynomial in lambda."""
        while len(self._pk) <= k:
            kk = len(self._pk)
            acc = CoefPoly([])
            for s in range(min(kk, self.rho) + 1):
                j = kk - s
                if j > self.order:
                    continue
                c = self.grid[s][j]
                if c.is_zero():
                    continue
                acc = acc + self._poch_poly(s + 1, kk - s).scale(c)
            self._pk.append(acc)
        return self._pk[k]

    @property
    def char_polys(self) -> list:
        return list(self._pk)

    def char_poly(self) -> CoefPoly:
        """The characteristic polynomial p_m(lambda - m, 0)."""
        return self.p(self.m).shift(ParamRat.const(-self.m))


def infinity_expansion(P: WeylOperator) -> InfinityExpansion:
    return InfinityExpansion(P)


def infinity_exponents(P: WeylOperator) -> ExponentSet:
    """Datum values nu (solutions ~ x^(-nu)) of the slope-0 part at
    infinity, grouped into consecutive chains and verified semi-simple."""
    ex = InfinityExpansion(P)
    char = ex.char_poly()
    if char.degree < 1:
        return ExponentSet([])
    roots, rem = small_roots(char)
    if rem.degree > 0:
        raise NonSplitting(
            "characteristic equation at infinity has roots outside Q(xi)"
        )
    if any(m > 1 for _, m in roots):
        raise NonSemiSimple("multiple characteristic exponent at infinity")
    values = [-(r) for r, _ in roots]
    blocks = _group_chains(values, context_zero=False)
    for b in blocks:
        for j in range(b.mult):
            v = b.value + ParamRat.const(j)
            for k in range(ex.m, ex.m + b.mult - j):
                arg = -v - ParamRat.const(k)
                if not ex.p(k).eval(arg).is_zero():
                    raise NonSemiSimple(
                        f"chain condition fails at value {v.compact()}, index {k}"
                    )
    return ExponentSet(sorted(blocks, key=ExponentBlock.key))


@dataclass(frozen=True)
class FormalSeries:
    """Truncated solution e^(p(x)) x^(-exponent) sum_s coeffs[s] x^(-s)."""

    exponent: ParamRat
    twist: TwistSpec
    coeffs: tuple
    trunc: int


def _clear_poly_family(polys) -> list:
    """Scale a family of CoefPoly values by one common denominator so
    every coefficient becomes polynomial (the recurrences they feed are
    homogeneous, so a common scale changes nothing)."""
    from .scalar import ParamPoly, ParamRat as PR

    den = ParamPoly.const(1)
    for p in polys:
        for c in p.coeffs:
            den = ParamPoly.lcm(den, c.den)
    scale = PR(den, ParamPoly.const(1))
    return [p.scale(scale) for p in polys]


def _solve_cleared_recurrence(polys, arg_fn, trunc: int, label: str):
    """Shared solver for both Frobenius recurrences.

    polys[d] is the cleared coefficient polynomial with lag d (d = 0
    multiplies the newest unknown); the t-th equation reads
    sum_j c_j polys[t-j](arg_fn(t, j)) = 0.  Numerators are tracked
    over an explicit factored denominator, so no intermediate
    normalisation happens.  Returns (nums, factors) with the true
    coefficient c_t = nums[t] / prod(factors[1..t])."""
    nums = [ParamRat.one()]
    factors = [ParamRat.one()]
    for t in range(1, trunc + 1):
        denom = polys[0].eval(arg_fn(t, t))
        acc = ParamRat.zero()
        # running product of factors[j+1 .. t-1], built from the top
        tail = ParamRat.one()
        for j in range(t - 1, -1, -1):
            d = t - j
            if d < len(polys):
                val = polys[d].eval(arg_fn(t, j))
                if not val.is_zero():
                    acc = acc + nums[j] * val * tail
            tail = tail * factors[j]
        if denom.is_zero():
            if acc.is_zero():
                nums.append(ParamRat.zero())
                factors.append(ParamRat.one())
                continue
            raise ResonantRecurrence(f"resonance at series index {t} ({label})")
        nums.append(-acc)
        factors.append(denom)
    return nums, factors


def _scaled_series(nums, factors) -> list:
    """Coefficients times the full denominator product (all polynomial)."""
    out = []
    tail = ParamRat.one()
    for j in range(len(nums) - 1, -1, -1):
        out.append(nums[j] * tail)
        tail = tail * factors[j]
    out.reverse()
    return out


def frobenius_series(P: WeylOperator, mu, trunc: int) -> FormalSeries:
    """Solve the recurrence for the solution x^(-mu) (1 + c_1/x + ...)."""
    mu = _coerce_rat(mu)
    nums, factors = _frobenius_raw(P, mu, trunc)
    coeffs = []
    den = ParamRat.one()
    for t, e in enumerate(nums):
        den = den * factors[t]
        coeffs.append(e / den if not e.is_zero() else ParamRat.zero())
    return FormalSeries(mu, TwistSpec.of(0, 0), tuple(coeffs), trunc)


def _frobenius_raw(P: WeylOperator, mu, trunc: int):
    ex = InfinityExpansion(P)
    musol = -mu
    polys = _clear_poly_family([ex.p(ex.m + d) for d in range(trunc + 1)])

    def arg_fn(t, _j):
        return musol - ParamRat.const(ex.m + t)

    return _solve_cleared_recurrence(polys, arg_fn, trunc, "infinity")


def _clear_denominators(coeffs) -> list:
    """Scale a coefficient list by the lcm of its denominators; residual
    tests are invariant under an overall scalar."""
    from .scalar import ParamPoly

    den = ParamPoly.const(1)
    for c in coeffs:
        den = ParamPoly.lcm(den, c.den)
    scale = ParamRat(den, ParamPoly.const(1))
    return [c * scale for c in coeffs]


def apply_at_infinity(P: WeylOperator, mu, coeffs) -> dict:
    """Coefficients of P applied to x^(-mu) sum_s coeffs[s] x^(-s),
    indexed so that key t holds the coefficient of x^(rho - mu - t).

    The series is cleared of parameter denominators first (an overall
    unit), so the result reports vanishing patterns faithfully."""
    mu = _coerce_rat(mu)
    coeffs = _clear_denominators(coeffs)
    musol = -mu
    rho = P.degree
    out = {}
    for i, a in enumerate(P.coeffs):
        if a.is_zero():
            continue
        for s, cs in enumerate(coeffs):
            if cs.is_zero():
                continue
            ff = ParamRat.one()
            for t in range(i):
                ff = ff * (musol - ParamRat.const(s + t))
            if ff.is_zero():
                continue
            for d in range(a.degree + 1):
                ad = a.coeff(d)
                if ad.is_zero():
                    continue
                t = rho - d + s + i
                out[t] = out.get(t, ParamRat.zero()) + ad * cs * ff
    return {t: v for t, v in out.items() if not v.is_zero()}


def frobenius_residual_ok(P: WeylOperator, mu, trunc: int) -> bool:
    """Truncated-series residual test: every coefficient that the solved
    recurrence controls must vanish."""
    mu = _coerce_rat(mu)
    nums, factors = _frobenius_raw(P, mu, trunc)
    ex = InfinityExpansion(P)
    res = apply_at_infinity(P, mu, _scaled_series(nums, factors))
    bound = ex.m + trunc
    return all(t > bound for t in res)


# ---------------------------------------------------------------------------
# regular points


def _regular_form(P: WeylOperator, c: ParamRat):
    """Coefficients A_i with P ~ sum_i (x-c)^((n-i)+t) A_i(x) D^(n-i),
    A_0(c) nonzero; raises NotRegularPoint when impossible."""
    n = P.order
    lead = P.coeffs[-1]
    vn = lead.valuation_at(c)
    t = vn - n
    lin = CoefPoly.linear(-c, 1)
    out = []
    for i in range(n + 1):
        coeff = P.coeff(n - i)
        e = (n - i) + t
        if coeff.is_zero():
            out.append(CoefPoly([]))
            continue
        if e >= 0:
            q = coeff
            for _ in range(e):
                qq = q.try_div_linear(c)
                if qq is None:
                    raise NotRegularPoint(
                        f"coefficient of D^{n - i} has too low a valuation at "
                        f"{c.compact()}"
                    )
                q = qq
            out.append(q)
        else:
            out.append(coeff * lin ** (-e))
    if out[0].eval(c).is_zero():
        raise NotRegularPoint("internal: normalised leading value vanishes")
    return out, t


def regular_char(P: WeylOperator, c, K: int) -> list:
    """Taylor coefficients f^c_k(nu), k = 0..K, of the indicial series
    at the regular singular point c."""
    c = _coerce_rat(c)
    A, _ = _regular_form(P, c)
    n = P.order
    B = [a.shift(c) for a in A]  # expand around c
    lam = CoefPoly.x()

    def falling(length: int) -> CoefPoly:
        out = CoefPoly.const(1)
        for t in range(length):
            out = out * (lam - CoefPoly.const(t))
        return out

    F = []
    for k in range(K + 1):
        acc = CoefPoly([])
        for i in range(n + 1):
            ci = B[i].coeff(k)
            if not ci.is_zero():
                acc = acc + falling(n - i).scale(ci)
        F.append(acc)
    # invert the unit series B[0]
    u0 = B[0].coeff(0)
    w = [u0.inv()]
    for k in range(1, K + 1):
        s = ParamRat.zero()
        for j in range(1, k + 1):
            s = s + B[0].coeff(j) * w[k - j]
        w.append(-(s / u0))
    out = []
    for k in range(K + 1):
        acc = CoefPoly([])
        for t in range(k + 1):
            acc = acc + F[t].scale(w[k - t])
        out.append(acc)
    return out


def regular_exponents(P: WeylOperator, c) -> ExponentSet:
    """Semi-simple exponents at the regular singular point c."""
    c = _coerce_rat(c)
    f0 = regular_char(P, c, 0)[0]
    roots, rem = small_roots(f0)
    if rem.degree > 0:
        raise NonSplitting(
            f"indicial equation at {c.compact()} has roots outside Q(xi)"
        )
    if any(m > 1 for _, m in roots):
        raise NonSemiSimple(f"multiple exponent at {c.compact()}")
    blocks = _group_chains([r for r, _ in roots], context_zero=True)
    depth = max((b.mult for b in blocks), default=1)
    fk = regular_char(P, c, depth - 1)
    for b in blocks:
        for j in range(b.mult):
            v = b.value + ParamRat.const(j)
            for k in range(1, b.mult - j):
                if not fk[k].eval(v).is_zero():
                    raise NonSemiSimple(
                        f"chain condition fails at {c.compact()}, "
                        f"value {v.compact()}, depth {k}"
                    )
    return ExponentSet(sorted(blocks, key=ExponentBlock.key))


def _regular_raw(P: WeylOperator, c, nu, trunc: int):
    fk = _clear_poly_family(regular_char(P, c, trunc))

    def arg_fn(_t, j):
        return nu + ParamRat.const(j)

    return _solve_cleared_recurrence(fk, arg_fn, trunc, f"point {c.compact()}")


def regular_series(P: WeylOperator, c, nu, trunc: int) -> tuple:
    """Coefficients d_0..d_trunc of the solution (x-c)^nu sum d_l (x-c)^l."""
    c, nu = _coerce_rat(c), _coerce_rat(nu)
    nums, factors = _regular_raw(P, c, nu, trunc)
    out = []
    den = ParamRat.one()
    for t, e in enumerate(nums):
        den = den * factors[t]
        out.append(e / den if not e.is_zero() else ParamRat.zero())
    return tuple(out)


def apply_at_point(P: WeylOperator, c, nu, coeffs) -> dict:
    """Coefficients of P applied to (x-c)^nu sum_l coeffs[l] (x-c)^l,
    indexed by the offset from (x-c)^nu."""
    c, nu = _coerce_rat(c), _coerce_rat(nu)
    coeffs = _clear_denominators(coeffs)
    n = P.order
    out = {}
    shifted = [P.coeff(k).shift(c) for k in range(n + 1)]
    for k in range(n + 1):
        a = shifted[k]
        if a.is_zero():
            continue
        for l, dl in enumerate(coeffs):
            if dl.is_zero():
                continue
            ff = ParamRat.one()
            for t in range(k):
                ff = ff * (nu + ParamRat.const(l - t))
            if ff.is_zero():
                continue
            for d in range(a.degree + 1):
                ad = a.coeff(d)
                if ad.is_zero():
                    continue
                o = l - k + d
                out[o] = out.get(o, ParamRat.zero()) + ad * dl * ff
    return {o: v for o, v in out.items() if not v.is_zero()}


def regular_residual_ok(P: WeylOperator, c, nu, trunc: int) -> bool:
    c, nu = _coerce_rat(c), _coerce_rat(nu)
    nums, factors = _regular_raw(P, c, nu, trunc)
    lead = P.coeffs[-1]
    t = lead.valuation_at(c) - P.order
    res = apply_at_point(P, c, nu, _scaled_series(nums, factors))
    bound = t + trunc
    return all(o > bound for o in res)


def power_divisibility(P: WeylOperator, c, m: int) -> Optional[WeylOperator]:
    """Q with P = (x-c)^m Q when the division is exact, else None."""
    c = _coerce_rat(c)
    if m < 1:
        raise ValueError("power_divisibility needs m >= 1")
    coeffs = []
    for a in P.coeffs:
        if a.is_zero():
            coeffs.append(a)
            continue
        for _ in range(m):
            a2 = a.try_div_linear(c)
            if a2 is None:
                return None
            a = a2
        coeffs.append(a)
    return WeylOperator(coeffs)


# ---------------------------------------------------------------------------
# the table of local data


def _edge_poly(P: WeylOperator, np: NewtonPolygon, slope: int) -> Optional[CoefPoly]:
    span = np.edge_span(slope)
    if span is None:
        return None
    u1, y1, u2 = span
    coeffs = [ParamRat.zero()] * (u2 + 1)
    for i in range(u1, u2 + 1):
        d_req = y1 + slope * u1 - (slope - 1) * i
        if 0 <= d_req:
            coeffs[i] = P.coeff(i).coeff(d_req)
    return CoefPoly(coeffs)


def _strip_monomial(p: CoefPoly) -> CoefPoly:
    k = 0
    while p.coeff(k).is_zero():
        k += 1
    return CoefPoly(p.coeffs[k:])


def local_datum(P: WeylOperator):
    """Full table of local data: regular rows plus the (alpha, beta,
    exponents) grid of exponential classes at infinity.

    The operator is canonicalised first, so the table depends only on
    the proportionality class.
    """
    from . import datum

    if P.is_zero():
        raise ZeroOperator("local data of zero")
    P = reduced_rep(P)
    if P.order == 0:
        raise CollapsedToFunction("order-0 operator has no local data")
    n = P.order

    # regular rows from the roots of the leading coefficient
    rows = []
    lead = P.coeffs[-1]
    if lead.degree > 0:
        roots, rem = small_roots(lead)
        if rem.degree > 0:
            raise NonSplitting("leading coefficient does not split over Q(xi)")
        for c, _ in sorted(roots, key=lambda rm: rm[0].sort_key()):
            rows.append(datum.RegularRow(c, regular_exponents(P, c)))

    np0 = newton_polygon(P)
    _check_slopes(np0)
    L2 = np0.slope_length(2)
    class_specs = []
    if L2:
        e2 = _strip_monomial(_edge_poly(P, np0, 2))
        croots, rem = small_roots(e2)
        if rem.degree > 0:
            raise NonSplitting("slope-2 edge equation does not split over Q(xi)")
        if sum(m for _, m in croots) != L2:
            raise NonSplitting("slope-2 edge equation is deficient")
        if n - L2 > 0:
            class_specs.append((ParamRat.zero(), n - L2))
        class_specs.extend(croots)
    else:
        class_specs.append((ParamRat.zero(), n))

    classes = []
    for alpha, n_cls in sorted(class_specs, key=lambda am: am[0].sort_key()):
        Qa = shift_args(P, alpha, 0)
        npa = newton_polygon(Qa)
        _check_slopes(npa)
        if npa.slope_length(2) != n - n_cls:
            raise NonSplitting(
                f"class {alpha.compact()}: inconsistent slope-2 structure"
            )
        L1 = npa.slope_length(1)
        leg_specs = []
        if L1:
            e1 = _strip_monomial(_edge_poly(Qa, npa, 1))
            broots, rem = small_roots(e1)
            if rem.degree > 0:
                raise NonSplitting(
                    f"class {alpha.compact()}: slope-1 edge does not split"
                )
            if sum(m for _, m in broots) != L1:
                raise NonSplitting(
                    f"class {alpha.compact()}: slope-1 edge equation deficient"
                )
            if n_cls - L1 > 0:
                leg_specs.append((ParamRat.zero(), n_cls - L1))
            leg_specs.extend(broots)
        else:
            leg_specs.append((ParamRat.zero(), n_cls))
        legs = []
        for beta, n_leg in sorted(leg_specs, key=lambda bm: bm[0].sort_key()):
            es = infinity_exponents(shift_args(P, alpha, beta))
            if es.total != n_leg:
                raise NonSplitting(
                    f"leg ({alpha.compact()}, {beta.compact()}): expected "
                    f"{n_leg} exponents, found {es.total}"
                )
            legs.append(datum.IrregularLeg(beta, es))
        classes.append(datum.IrregularClass(alpha, tuple(legs)))

    table = datum.LocalDatumTable(n, tuple(rows), tuple(classes))
    table.validate()
    return table
