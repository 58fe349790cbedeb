"""Exact scalar arithmetic: rationals, parameter polynomials, rational
functions in the parameters, and univariate polynomials over that field.

Everything here is immutable and exact.  `ParamRat` realises the scalar
field Q(xi) for a finite set of named parameters; `CoefPoly` is a
univariate polynomial over that field and serves both for coefficients
in x and for characteristic polynomials in an exponent variable.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Iterable, Optional, Sequence

from .errors import WeylredError

Rational = Fraction


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"cannot coerce {v!r} to a rational")


class ParamPoly:
    """Polynomial in named parameters with rational coefficients.

    Terms map exponent tuples to nonzero coefficients; the variable list
    is minimal and sorted, so equal polynomials compare equal
    structurally.  Term order is lex over the sorted variable names.
    """

    __slots__ = ("vars", "terms", "_h")

    def __init__(self, vars: Sequence[str], terms: dict):
        terms = {e: c for e, c in terms.items() if c != 0}
        vars = tuple(vars)
        # drop variables that no term uses
        if terms and vars:
            used = [any(e[i] for e in terms) for i in range(len(vars))]
            if not all(used):
                keep = [i for i, u in enumerate(used) if u]
                vars = tuple(vars[i] for i in keep)
                terms = {tuple(e[i] for i in keep): c for e, c in terms.items()}
        elif not terms:
            vars = ()
        self.vars = vars
        self.terms = terms
        self._h = None

    # -- constructors -------------------------------------------------

    @staticmethod
    def const(c) -> "ParamPoly":
        c = _as_fraction(c)
        return ParamPoly((), {(): c} if c else {})

    @staticmethod
    def var(name: str) -> "ParamPoly":
        return ParamPoly((name,), {(1,): Fraction(1)})

    # -- basic queries -------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.vars

    def const_value(self) -> Fraction:
        if self.vars:
            raise WeylredError("not a constant polynomial")
        return self.terms.get((), Fraction(0))

    def degree_in(self, name: str) -> int:
        if name not in self.vars:
            return 0
        i = self.vars.index(name)
        return max((e[i] for e in self.terms), default=0)

    def coeff_of(self, name: str, k: int) -> "ParamPoly":
        """Coefficient of name**k, a polynomial in the other parameters."""
        if name not in self.vars:
            return self if k == 0 else ParamPoly.const(0)
        i = self.vars.index(name)
        rest = self.vars[:i] + self.vars[i + 1 :]
        return ParamPoly(
            rest,
            {e[:i] + e[i + 1 :]: c for e, c in self.terms.items() if e[i] == k},
        )

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def lead(self) -> tuple:
        """(exponent tuple, coefficient) of the lex-leading term."""
        e = max(self.terms)
        return e, self.terms[e]

    def lead_coeff(self) -> Fraction:
        return self.terms[max(self.terms)]

    # -- alignment -----------------------------------------------------

    @staticmethod
    def _aligned(a: "ParamPoly", b: "ParamPoly"):
        if a.vars == b.vars:
            return a.vars, a.terms, b.terms
        vars = tuple(sorted(set(a.vars) | set(b.vars)))

        def remap(p):
            idx = [p.vars.index(v) if v in p.vars else None for v in vars]
            out = {}
            for e, c in p.terms.items():
                out[tuple(e[i] if i is not None else 0 for i in idx)] = c
            return out

        return vars, remap(a), remap(b)

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other: "ParamPoly") -> "ParamPoly":
        vars, ta, tb = ParamPoly._aligned(self, other)
        out = dict(ta)
        for e, c in tb.items():
            s = out.get(e, Fraction(0)) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return ParamPoly(vars, out)

    def __neg__(self) -> "ParamPoly":
        return ParamPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "ParamPoly") -> "ParamPoly":
        return self + (-other)

    def __mul__(self, other: "ParamPoly") -> "ParamPoly":
        if self.is_zero() or other.is_zero():
            return ParamPoly.const(0)
        vars, ta, tb = ParamPoly._aligned(self, other)
        out = {}
        for ea, ca in ta.items():
            for eb, cb in tb.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                s = out.get(e, Fraction(0)) + ca * cb
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return ParamPoly(vars, out)

    def scale(self, c) -> "ParamPoly":
        c = _as_fraction(c)
        if not c:
            return ParamPoly.const(0)
        return ParamPoly(self.vars, {e: k * c for e, k in self.terms.items()})

    def __pow__(self, n: int) -> "ParamPoly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        r = ParamPoly.const(1)
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ParamPoly)
            and self.vars == other.vars
            and self.terms == other.terms
        )

    def __hash__(self):
        if self._h is None:
            self._h = hash((self.vars, tuple(sorted(self.terms.items()))))
        return self._h

    def __repr__(self):
        return f"ParamPoly({self.compact()})"

    # -- division / gcd --------------------------------------------------

    def try_div(self, other: "ParamPoly") -> Optional["ParamPoly"]:
        """Exact quotient self/other, or None when not divisible."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero():
            return ParamPoly.const(0)
        vars, ta, tb = ParamPoly._aligned(self, other)
        rem = dict(ta)
        eb = max(tb)
        cb = tb[eb]
        quot = {}
        while rem:
            ea = max(rem)
            diff = tuple(x - y for x, y in zip(ea, eb))
            if any(d < 0 for d in diff):
                return None
            cq = rem[ea] / cb
            quot[diff] = cq
            for e, c in tb.items():
                key = tuple(x + y for x, y in zip(diff, e))
                s = rem.get(key, Fraction(0)) - cq * c
                if s:
                    rem[key] = s
                else:
                    rem.pop(key, None)
        return ParamPoly(vars, quot)

    def divexact(self, other: "ParamPoly") -> "ParamPoly":
        q = self.try_div(other)
        if q is None:
            raise WeylredError("inexact polynomial division")
        return q

    def monic(self) -> "ParamPoly":
        """Normalise so the lex-leading coefficient is 1."""
        if self.is_zero():
            return self
        return self.scale(1 / self.lead_coeff())

    # univariate view in one variable, coefficients in the remaining ones
    def _uni(self, name: str) -> list:
        i = self.vars.index(name)
        rest = self.vars[:i] + self.vars[i + 1 :]
        d = self.degree_in(name)
        coeffs = [dict() for _ in range(d + 1)]
        for e, c in self.terms.items():
            coeffs[e[i]][e[:i] + e[i + 1 :]] = c
        return [ParamPoly(rest, t) for t in coeffs]

    @staticmethod
    def _from_uni(name: str, coeffs: list) -> "ParamPoly":
        out = ParamPoly.const(0)
        xv = ParamPoly.var(name)
        for k, c in enumerate(coeffs):
            out = out + c * xv**k
        return out

    def _eval_uni(self, v: str, theta: dict) -> Optional[list]:
        """Evaluate all variables but v at rational points; None when
        the leading v-coefficient vanishes (degree drop)."""
        i = self.vars.index(v)
        d = self.degree_in(v)
        out = [Fraction(0)] * (d + 1)
        for e, c in self.terms.items():
            val = c
            for j, k in enumerate(e):
                if j != i and k:
                    val *= theta[self.vars[j]] ** k
            out[e[i]] += val
        if out[d] == 0:
            return None
        return out

    @staticmethod
    def coprime_certificate(a: "ParamPoly", b: "ParamPoly") -> bool:
        """True only when gcd(a, b) is provably 1: for every variable,
        an evaluation with surviving leading coefficient yields a
        constant univariate gcd."""
        names = sorted(set(a.vars) | set(b.vars))
        for v in names:
            da, db = a.degree_in(v), b.degree_in(v)
            if da == 0 or db == 0:
                continue  # gcd is v-free already
            ok = False
            for attempt in range(4):
                theta = {
                    u: Fraction(
                        _PROBE_POINTS[(sum(map(ord, u)) + attempt) % len(_PROBE_POINTS)]
                    )
                    for u in names
                }
                ua = a._eval_uni(v, theta)
                ub = b._eval_uni(v, theta)
                if ua is None and ub is None:
                    continue
                if ua is None or ub is None:
                    # one leading coefficient vanished; the other
                    # certifies on its own only if its gcd with the
                    # possibly-degenerate partner is constant -- skip.
                    continue
                if _uni_gcd_degree(ua, ub) == 0:
                    ok = True
                    break
            if not ok:
                return False
        return True

    @staticmethod
    def gcd(a: "ParamPoly", b: "ParamPoly") -> "ParamPoly":
        """Monic gcd via content/primitive-part recursion with a
        subresultant pseudo-remainder sequence; results are memoised."""
        if a.is_zero():
            return b.monic()
        if b.is_zero():
            return a.monic()
        if a.is_const() or b.is_const():
            return ParamPoly.const(1)
        if a == b:
            return a.monic()
        key = (a, b) if hash(a) <= hash(b) else (b, a)
        hit = _GCD_CACHE.get(key)
        if hit is not None:
            return hit
        out = ParamPoly._gcd_impl(a, b)
        if len(_GCD_CACHE) > 200000:
            _GCD_CACHE.clear()
        _GCD_CACHE[key] = out
        return out

    @staticmethod
    def _gcd_impl(a: "ParamPoly", b: "ParamPoly") -> "ParamPoly":
        # monomial shortcut: min exponents variable by variable
        ma, mb = a.monomial_exponents(), b.monomial_exponents()
        if ma is not None or mb is not None:
            mono, other = (ma, b) if ma is not None else (mb, a)
            vars, _, to = ParamPoly._aligned(
                ParamPoly(tuple(mono), {tuple(mono.values()): Fraction(1)}), other
            )
            mins = {v: mono.get(v, 0) for v in vars}
            for e in to:
                for v, k in zip(vars, e):
                    if mins.get(v, 0) > k:
                        mins[v] = k
            keep = [v for v in vars if mins.get(v, 0) > 0]
            return ParamPoly(
                tuple(keep), {tuple(mins[v] for v in keep): Fraction(1)}
            )
        # the gcd only involves variables common to both operands:
        # project out the others by taking coefficient contents
        common = set(a.vars) & set(b.vars)
        for p, other in ((a, "a"), (b, "b")):
            q = p
            for v in p.vars:
                if v not in common and q.degree_in(v) > 0:
                    q = ParamPoly._content(q._uni(v))
                    if q.is_const():
                        return ParamPoly.const(1)
            if other == "a":
                a = q
            else:
                b = q
        if a.is_const() or b.is_const():
            return ParamPoly.const(1)
        if ParamPoly.coprime_certificate(a, b):
            return ParamPoly.const(1)
        # main variable with the smallest pseudo-remainder sequence
        cand = [v for v in sorted(common) if a.degree_in(v) and b.degree_in(v)]
        if not cand:
            return ParamPoly.const(1)
        v = min(
            cand,
            key=lambda u: (min(a.degree_in(u), b.degree_in(u)), u),
        )
        ua, ub = a._uni(v), b._uni(v)
        ca, cb = ParamPoly._content(ua), ParamPoly._content(ub)
        pa = [c.divexact(ca) for c in ua]
        pb = [c.divexact(cb) for c in ub]
        g = ParamPoly._pp_prs(v, pa, pb)
        return (ParamPoly.gcd(ca, cb) * g).monic()

    @staticmethod
    def _content(coeffs: list) -> "ParamPoly":
        g = ParamPoly.const(0)
        for c in coeffs:
            if not c.is_zero():
                g = ParamPoly.gcd(g, c)
        return g if not g.is_zero() else ParamPoly.const(1)

    @staticmethod
    def _pp_prs(v: str, ua: list, ub: list) -> "ParamPoly":
        """Primitive PRS gcd of two primitive univariate-in-v polys."""
        A = _prs_lists(ua, ub)
        if len(A) == 1:
            return ParamPoly.const(1)
        return ParamPoly._from_uni(v, A)

    @staticmethod
    def lcm(a: "ParamPoly", b: "ParamPoly") -> "ParamPoly":
        if a.is_zero() or b.is_zero():
            return ParamPoly.const(0)
        return (a * b).divexact(ParamPoly.gcd(a, b)).monic()

    def monomial_exponents(self) -> Optional[dict]:
        """Variable -> exponent map when self is a single term, else None."""
        if len(self.terms) != 1:
            return None
        (e,) = self.terms
        return dict(zip(self.vars, e))

    def sqrt(self) -> Optional["ParamPoly"]:
        """Exact square root when self is a perfect square, else None."""
        if self.is_zero():
            return ParamPoly.const(0)
        if self.is_const():
            c = self.const_value()
            if c < 0:
                return None
            rn, rd = isqrt(c.numerator), isqrt(c.denominator)
            if rn * rn == c.numerator and rd * rd == c.denominator:
                return ParamPoly.const(Fraction(rn, rd))
            return None
        v = self.vars[0]
        u = self._uni(v)
        d = len(u) - 1
        if d % 2:
            return None
        m = d // 2
        top = u[d].sqrt()
        if top is None:
            return None
        q = [ParamPoly.const(0)] * (m + 1)
        q[m] = top
        two_top = top.scale(2)
        for k in range(1, m + 1):
            acc = u[2 * m - k]
            for j in range(1, k):
                acc = acc - q[m - j] * q[m - k + j]
            cand = acc.try_div(two_top)
            if cand is None:
                return None
            q[m - k] = cand
        root = ParamPoly._from_uni(v, q)
        if root * root == self:
            return root
        return None

    # -- substitution --------------------------------------------------

    def subst(self, values: dict) -> "ParamRat":
        """Substitute ParamRat values for some parameters."""
        out = ParamRat.const(0)
        cache = {}
        for name in self.vars:
            if name in values:
                cache[name] = _coerce_rat(values[name])
            else:
                cache[name] = ParamRat.param(name)
        for e, c in self.terms.items():
            term = ParamRat.const(c)
            for name, k in zip(self.vars, e):
                if k:
                    term = term * cache[name] ** k
            out = out + term
        return out

    # -- rendering -------------------------------------------------------

    def compact(self) -> str:
        """Canonical space-free text form, e.g. ``a^2*b-3*b+1/2``.

        Positive terms print first so differences read naturally."""
        if self.is_zero():
            return "0"
        parts = []
        ordered = sorted(self.terms, key=lambda e: (self.terms[e] < 0, tuple(-x for x in e)))
        for e in ordered:
            c = self.terms[e]
            factors = [
                name if k == 1 else f"{name}^{k}"
                for name, k in zip(self.vars, e)
                if k
            ]
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append(("+" if c > 0 else "-") + body)
        return "".join(parts)


# evaluation points for the coprimality probe (fixed for determinism)
_PROBE_POINTS = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)

_GCD_CACHE: dict = {}


def _uni_gcd_degree(ua: list, ub: list) -> int:
    """Degree of the gcd of two univariate rational polynomials."""

    def trim(u):
        while u and u[-1] == 0:
            u.pop()
        return u

    A, B = trim(list(ua)), trim(list(ub))
    while B:
        # A mod B
        lb = B[-1]
        while len(A) >= len(B):
            c = A[-1] / lb
            shift = len(A) - len(B)
            for i in range(len(B)):
                A[shift + i] -= c * B[i]
            A.pop()
            trim(A)
            if not A:
                break
        A, B = B, A
    return len(A) - 1


def _prs_lists(ua: list, ub: list) -> list:
    """Subresultant pseudo-remainder sequence on coefficient lists of
    ParamPoly values; returns the primitive last nonzero element."""

    def trim(u):
        while u and u[-1].is_zero():
            u.pop()
        return u

    def prem(A, B):
        # lc(B)^(deg A - deg B + 1) * A  mod  B
        A = list(A)
        lb = B[-1]
        db = len(B) - 1
        steps = len(A) - len(B) + 1
        done = 0
        while A and len(A) - 1 >= db:
            la = A[-1]
            shift = len(A) - 1 - db
            A = [c * lb for c in A]
            for i, bc in enumerate(B):
                A[shift + i] = A[shift + i] - la * bc
            A.pop()
            trim(A)
            done += 1
        # keep the classical normalisation lc(B)^(d+1) A mod B exact
        for _ in range(steps - done):
            A = [c * lb for c in A]
        return A

    A, B = trim(list(ua)), trim(list(ub))
    if len(A) < len(B):
        A, B = B, A
    if not B:
        return A
    one = ParamPoly.const(1)
    g, h = one, one
    while True:
        d = (len(A) - 1) - (len(B) - 1)
        R = trim(prem(A, B))
        if not R:
            cont = ParamPoly._content(B)
            return [c.divexact(cont) for c in B]
        if len(R) == 1:
            return [one]
        denom = g * h**d
        A = B
        B = [c.divexact(denom) for c in R]
        g = A[-1]
        if d == 0:
            pass
        elif d == 1:
            h = g
        else:
            h = (g**d).divexact(h ** (d - 1))


def _coerce_rat(v) -> "ParamRat":
    if isinstance(v, ParamRat):
        return v
    if isinstance(v, ParamPoly):
        return ParamRat(v, ParamPoly.const(1))
    return ParamRat.const(_as_fraction(v))


class ParamRat:
    """Reduced fraction of parameter polynomials: an element of Q(xi).

    Invariants: the denominator is nonzero and monic (lex-leading
    coefficient 1) and shares no factor with the numerator, so equality
    is structural.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: ParamPoly, den: ParamPoly):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator in ParamRat")
        if num.is_zero():
            den = ParamPoly.const(1)
        elif den.is_const():
            c = den.const_value()
            if c != 1:
                num = num.scale(1 / c)
                den = ParamPoly.const(1)
        else:
            g = ParamPoly.gcd(num, den)
            if not (g.is_const() and g.const_value() == 1):
                num = num.divexact(g)
                den = den.divexact(g)
            lc = den.lead_coeff()
            if lc != 1:
                num = num.scale(1 / lc)
                den = den.scale(1 / lc)
        self.num = num
        self.den = den

    # -- constructors ----------------------------------------------------

    @staticmethod
    def const(c) -> "ParamRat":
        return ParamRat(ParamPoly.const(c), ParamPoly.const(1))

    @staticmethod
    def param(name: str) -> "ParamRat":
        return ParamRat(ParamPoly.var(name), ParamPoly.const(1))

    @staticmethod
    def zero() -> "ParamRat":
        return _ZERO

    @staticmethod
    def one() -> "ParamRat":
        return _ONE

    # -- queries ---------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self) -> Fraction:
        return self.num.const_value() / self.den.const_value()

    def params(self) -> set:
        return set(self.num.vars) | set(self.den.vars)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "ParamRat":
        other = _coerce_rat(other)
        return ParamRat(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "ParamRat":
        return ParamRat(-self.num, self.den)

    def __sub__(self, other) -> "ParamRat":
        return self + (-_coerce_rat(other))

    def __rsub__(self, other) -> "ParamRat":
        return _coerce_rat(other) + (-self)

    def __mul__(self, other) -> "ParamRat":
        other = _coerce_rat(other)
        return ParamRat(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ParamRat":
        other = _coerce_rat(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero ParamRat")
        return ParamRat(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "ParamRat":
        return _coerce_rat(other) / self

    def __pow__(self, n: int) -> "ParamRat":
        if n < 0:
            return ParamRat.const(1) / self ** (-n)
        r = ParamRat.const(1)
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def inv(self) -> "ParamRat":
        return ParamRat.const(1) / self

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = ParamRat.const(other)
        return (
            isinstance(other, ParamRat)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"ParamRat({self.compact()})"

    # -- misc ---------------------------------------------------------------

    def subst(self, values: dict) -> "ParamRat":
        num = self.num.subst(values)
        den = self.den.subst(values)
        if den.is_zero():
            from .errors import PoleAtLimit

            raise PoleAtLimit(f"denominator {self.den.compact()} vanishes")
        return num / den

    def sqrt(self) -> Optional["ParamRat"]:
        rn = self.num.sqrt()
        if rn is None:
            return None
        rd = self.den.sqrt()
        if rd is None:
            return None
        return ParamRat(rn, ParamPoly.const(1)) / ParamRat(rd, ParamPoly.const(1))

    def sort_key(self) -> str:
        return self.compact()

    def compact(self) -> str:
        ns = self.num.compact()
        if self.den.is_const():
            return ns
        ds = self.den.compact()
        if len(self.num.terms) > 1 or ns.startswith("-"):
            ns = f"({ns})"
        elif "*" in ns or "^" in ns or "/" in ns:
            ns = f"({ns})"
        return f"{ns}/({ds})"


_ZERO = ParamRat(ParamPoly.const(0), ParamPoly.const(1))
_ONE = ParamRat(ParamPoly.const(1), ParamPoly.const(1))


def pochhammer(v: ParamRat, l: int) -> ParamRat:
    """Rising factorial v (v+1) ... (v+l-1); 1 when l = 0."""
    if l < 0:
        raise ValueError("pochhammer needs a nonnegative length")
    out = ParamRat.const(1)
    for i in range(l):
        out = out * (v + ParamRat.const(i))
    return out


def is_integer_constant(v: ParamRat) -> Optional[int]:
    """The integer value of v when v is an integer constant, else None."""
    if not v.is_const():
        return None
    c = v.const_value()
    if c.denominator != 1:
        return None
    return int(c)


class CoefPoly:
    """Univariate polynomial over ParamRat (in x, or in an exponent
    variable for characteristic equations).  coeffs[i] is the
    coefficient of the i-th power; the list carries no trailing zeros.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[ParamRat]):
        cs = list(coeffs)
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)

    # -- constructors -----------------------------------------------------

    @staticmethod
    def const(c) -> "CoefPoly":
        return CoefPoly([_coerce_rat(c)])

    @staticmethod
    def x() -> "CoefPoly":
        return CoefPoly([_ZERO, _ONE])

    @staticmethod
    def linear(c0, c1) -> "CoefPoly":
        return CoefPoly([_coerce_rat(c0), _coerce_rat(c1)])

    # -- queries -----------------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int) -> ParamRat:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return _ZERO

    def lead(self) -> ParamRat:
        if not self.coeffs:
            raise WeylredError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other: "CoefPoly") -> "CoefPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return CoefPoly([self.coeff(i) + other.coeff(i) for i in range(n)])

    def __neg__(self) -> "CoefPoly":
        return CoefPoly([-c for c in self.coeffs])

    def __sub__(self, other: "CoefPoly") -> "CoefPoly":
        return self + (-other)

    def __mul__(self, other: "CoefPoly") -> "CoefPoly":
        if self.is_zero() or other.is_zero():
            return CoefPoly([])
        out = [_ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return CoefPoly(out)

    def scale(self, c) -> "CoefPoly":
        c = _coerce_rat(c)
        return CoefPoly([a * c for a in self.coeffs])

    def __pow__(self, n: int) -> "CoefPoly":
        r = CoefPoly.const(1)
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def __eq__(self, other) -> bool:
        return isinstance(other, CoefPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if self.is_zero():
            return "CoefPoly(0)"
        parts = [f"({c.compact()})*x^{i}" for i, c in enumerate(self.coeffs) if not c.is_zero()]
        return "CoefPoly(" + " + ".join(parts) + ")"

    # -- calculus / evaluation ----------------------------------------------

    def derivative(self) -> "CoefPoly":
        return CoefPoly([self.coeffs[i] * ParamRat.const(i) for i in range(1, len(self.coeffs))])

    def eval(self, v) -> ParamRat:
        v = _coerce_rat(v)
        out = _ZERO
        for c in reversed(self.coeffs):
            out = out * v + c
        return out

    def shift(self, c) -> "CoefPoly":
        """Compose with x -> x + c (synthetic Horner shift)."""
        c = _coerce_rat(c)
        out = CoefPoly([])
        lin = CoefPoly.linear(c, 1)
        for a in reversed(self.coeffs):
            out = out * lin + CoefPoly.const(a)
        return out

    def valuation_at(self, c) -> int:
        """Multiplicity of (x - c) as a factor; -1 for the zero poly."""
        if self.is_zero():
            return -1
        v = 0
        p = self
        while True:
            q = p.try_div_linear(c)
            if q is None:
                return v
            p = q
            v += 1

    def try_div_linear(self, root) -> Optional["CoefPoly"]:
        """Exact quotient by (x - root), or None when root is no root."""
        root = _coerce_rat(root)
        if self.is_zero():
            return None
        rem = _ZERO
        out = [_ZERO] * max(len(self.coeffs) - 1, 0)
        for i in range(len(self.coeffs) - 1, -1, -1):
            cur = self.coeffs[i] + rem * root
            if i == 0:
                if not cur.is_zero():
                    return None
            else:
                out[i - 1] = cur
                rem = cur
        return CoefPoly(out)

    # -- field division / gcd ---------------------------------------------

    def divmod(self, other: "CoefPoly"):
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        q = [_ZERO] * max(len(self.coeffs) - len(other.coeffs) + 1, 0)
        rem = list(self.coeffs)
        lo = other.lead()
        dn = other.degree
        while len(rem) - 1 >= dn and rem:
            while rem and rem[-1].is_zero():
                rem.pop()
            if len(rem) - 1 < dn or not rem:
                break
            k = len(rem) - 1 - dn
            c = rem[-1] / lo
            q[k] = c
            for i, b in enumerate(other.coeffs):
                rem[k + i] = rem[k + i] - c * b
            rem.pop()
        return CoefPoly(q), CoefPoly(rem)

    def divexact(self, other: "CoefPoly") -> "CoefPoly":
        q, r = self.divmod(other)
        if not r.is_zero():
            raise WeylredError("inexact division of x-polynomials")
        return q

    def monic(self) -> "CoefPoly":
        if self.is_zero():
            return self
        return self.scale(self.lead().inv())

    def _cleared(self) -> list:
        """Coefficients as ParamPoly values (denominators cleared)."""
        den = ParamPoly.const(1)
        for c in self.coeffs:
            den = ParamPoly.lcm(den, c.den)
        out = []
        for c in self.coeffs:
            out.append(c.num * den.divexact(c.den))
        return out

    @staticmethod
    def gcd(a: "CoefPoly", b: "CoefPoly") -> "CoefPoly":
        """Monic gcd over Q(xi), computed fraction-free via a primitive
        pseudo-remainder sequence with ParamPoly coefficients."""
        if a.is_zero():
            return b.monic()
        if b.is_zero():
            return a.monic()
        if a.degree == 0 or b.degree == 0:
            return CoefPoly.const(1)
        ua = CoefPoly._primitive_list(a._cleared())
        ub = CoefPoly._primitive_list(b._cleared())
        g = _prs_lists(ua, ub)
        if len(g) <= 1:
            return CoefPoly.const(1)
        one = ParamPoly.const(1)
        return CoefPoly([ParamRat(c, one) for c in g]).monic()

    @staticmethod
    def _primitive_list(polys: list) -> list:
        cont = ParamPoly._content(polys)
        return [p.divexact(cont) for p in polys]

    def subst_params(self, values: dict) -> "CoefPoly":
        return CoefPoly([c.subst(values) for c in self.coeffs])

    def params(self) -> set:
        out = set()
        for c in self.coeffs:
            out |= c.params()
        return out


def _squarefree_parts(p: CoefPoly) -> list:
    """Yun decomposition: [(factor, multiplicity)], factors monic and
    squarefree, product of factor^mult differing from p by a unit."""
    p = p.monic()
    if p.degree <= 0:
        return []
    dp = p.derivative()
    g = CoefPoly.gcd(p, dp)
    c = p.divexact(g)
    d = dp.divexact(g) - c.derivative()
    out = []
    i = 1
    while c.degree > 0:
        f = CoefPoly.gcd(c, d)
        if f.degree > 0:
            out.append((f, i))
        c = c.divexact(f)
        d = d.divexact(f) - c.derivative()
        i += 1
    return out


def _roots_squarefree(f: CoefPoly) -> list:
    """Roots of a squarefree polynomial that lie in Q(xi); best effort."""
    roots = []
    f = f.monic()
    while f.degree >= 1:
        if f.degree == 1:
            roots.append(-f.coeff(0) / f.coeff(1))
            return roots
        r = _find_one_root(f)
        if r is None:
            break
        roots.append(r)
        f = f.try_div_linear(r)
    return roots


def _find_one_root(f: CoefPoly) -> Optional[ParamRat]:
    # root at zero
    if f.coeff(0).is_zero():
        return _ZERO
    # small integer roots (exponent chains are integer-spaced)
    for k in range(-16, 17):
        if f.eval(ParamRat.const(k)).is_zero():
            return ParamRat.const(k)
    # quadratic resolution when the discriminant is a square in Q(xi)
    if f.degree == 2:
        a, b, c = f.coeff(2), f.coeff(1), f.coeff(0)
        disc = b * b - ParamRat.const(4) * a * c
        s = disc.sqrt()
        if s is not None:
            return (-b + s) / (ParamRat.const(2) * a)
        return None
    # roots free of one parameter: gcd of the coefficient slices
    big = ParamPoly.const(1)
    for c in f.coeffs:
        big = ParamPoly.lcm(big, c.den)
    cleared = [(c * ParamRat(big, ParamPoly.const(1))).num for c in f.coeffs]
    names = sorted(set().union(*[set(p.vars) for p in cleared]))
    for name in names:
        maxd = max(p.degree_in(name) for p in cleared)
        if maxd == 0:
            continue
        g = None
        for k in range(maxd + 1):
            sl = CoefPoly(
                [ParamRat(p.coeff_of(name, k), ParamPoly.const(1)) for p in cleared]
            )
            if sl.is_zero():
                continue
            g = sl.monic() if g is None else CoefPoly.gcd(g, sl)
        if g is not None and 1 <= g.degree < f.degree:
            for r in _roots_squarefree(g):
                if f.eval(r).is_zero():
                    return r
    return None


def small_roots(p: CoefPoly):
    """All roots of p lying in Q(xi), with multiplicities, plus the
    rootless cofactor (the exact quotient of p by the found factors)."""
    if p.is_zero():
        from .errors import ZeroOperator

        raise ZeroOperator("small_roots of the zero polynomial")
    found = []
    for f, mult in _squarefree_parts(p):
        for r in _roots_squarefree(f):
            found.append((r, mult))
    rem = p
    for r, mult in found:
        for _ in range(mult):
            rem = rem.try_div_linear(r)
            if rem is None:
                raise WeylredError("internal: root division failed")
    found.sort(key=lambda rm: rm[0].sort_key())
    return found, rem
