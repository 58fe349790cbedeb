"""Expression front end: a recursive-descent parser for operator
expressions over x and D, and deterministic text / structured
renderers with parse(render(P)) == P.

Grammar (LL(1), explicit multiplication only):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' INT)?
    atom   := INT | IDENT | 'x' | 'D' | '(' expr ')'

Division is restricted to scalar divisors (exact in Q(xi)); the
exponent of '^' must be a literal nonnegative integer.
"""

from __future__ import annotations

import json
from typing import Optional

from .errors import ParseError
from .scalar import CoefPoly, ParamRat
from .weyl import WeylOperator

_RESERVED = {"x", "D"}


class _Lexer:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0
        self.tokens = []
        self._scan()
        self.i = 0

    def _scan(self):
        src = self.src
        n = len(src)
        i = 0
        while i < n:
            ch = src[i]
            if ch in " \t\r\n":
                i += 1
                continue
            if ch.isdigit():
                j = i
                while j < n and src[j].isdigit():
                    j += 1
                self.tokens.append(("int", src[i:j], i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < n and (src[j].isalnum() or src[j] == "_"):
                    j += 1
                self.tokens.append(("ident", src[i:j], i))
                i = j
                continue
            if ch == "∂":  # unicode partial sign, alias for D
                self.tokens.append(("ident", "D", i))
                i += 1
                continue
            if ch in "+-*/^()":
                self.tokens.append((ch, ch, i))
                i += 1
                continue
            raise ParseError(f"unexpected character {ch!r}", column=i)
        self.tokens.append(("eof", "", n))

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, kind):
        t = self.next()
        if t[0] != kind:
            raise ParseError(
                f"expected {kind!r}, found {t[1]!r}", column=t[2], expected=(kind,)
            )
        return t


class _Parser:
    def __init__(self, src: str):
        self.lex = _Lexer(src)

    def parse(self) -> WeylOperator:
        v = self._expr()
        t = self.lex.peek()
        if t[0] != "eof":
            raise ParseError(f"trailing input {t[1]!r}", column=t[2], expected=("eof",))
        return v

    def _expr(self) -> WeylOperator:
        v = self._term()
        while True:
            t = self.lex.peek()
            if t[0] == "+":
                self.lex.next()
                v = v + self._term()
            elif t[0] == "-":
                self.lex.next()
                v = v - self._term()
            else:
                return v

    def _term(self) -> WeylOperator:
        v = self._factor()
        while True:
            t = self.lex.peek()
            if t[0] == "*":
                self.lex.next()
                v = v * self._factor()
            elif t[0] == "/":
                self.lex.next()
                d = self._factor()
                s = _as_scalar(d)
                if s is None or s.is_zero():
                    raise ParseError(
                        "division needs a nonzero scalar divisor", column=t[2]
                    )
                v = v.scale(ParamRat.one() / s)
            else:
                return v

    def _factor(self) -> WeylOperator:
        t = self.lex.peek()
        if t[0] == "-":
            self.lex.next()
            return -self._factor()
        return self._power()

    def _power(self) -> WeylOperator:
        v = self._atom()
        t = self.lex.peek()
        if t[0] == "^":
            self.lex.next()
            e = self.lex.peek()
            if e[0] != "int":
                raise ParseError(
                    "exponent must be a literal nonnegative integer",
                    column=e[2],
                    expected=("int",),
                )
            self.lex.next()
            return v ** int(e[1])
        return v

    def _atom(self) -> WeylOperator:
        t = self.lex.next()
        if t[0] == "int":
            return WeylOperator.const(int(t[1]))
        if t[0] == "ident":
            if t[1] == "x":
                return WeylOperator.x()
            if t[1] == "D":
                return WeylOperator.d()
            return WeylOperator.const(ParamRat.param(t[1]))
        if t[0] == "(":
            v = self._expr()
            self.lex.expect(")")
            return v
        raise ParseError(
            f"expected an operand, found {t[1]!r}",
            column=t[2],
            expected=("int", "ident", "(",),
        )


def _as_scalar(P: WeylOperator) -> Optional[ParamRat]:
    if P.is_zero():
        return ParamRat.zero()
    if P.order > 0 or P.degree > 0:
        return None
    return P.coeff(0).coeff(0)


def parse_operator(src: str) -> WeylOperator:
    """Parse an operator expression over x and D into normal form."""
    if not src.strip():
        raise ParseError("empty expression")
    return _Parser(src).parse()


def parse_scalar(src: str) -> ParamRat:
    """Parse an expression that must reduce to an element of Q(xi)."""
    v = _as_scalar(parse_operator(src))
    if v is None:
        raise ParseError("expected a scalar expression (no x, no D)")
    return v


# ---------------------------------------------------------------------------
# rendering


def _scalar_pieces(q: ParamRat):
    """(sign, body) with the sign pulled out of simple negatives."""
    s = q.compact()
    if s.startswith("-"):
        rest = s[1:]
        depth = 0
        simple = True
        for ch in rest:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch in "+-" and depth == 0:
                simple = False
                break
        if simple:
            return "-", rest
    return "+", s


def _is_composite(body: str) -> bool:
    depth = 0
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0:
            return True
    return False


def _coeff_terms(a: CoefPoly):
    """(sign, body) pieces for an x-polynomial, positives first then
    descending x-power."""
    pieces = []
    for k in range(a.degree, -1, -1):
        q = a.coeff(k)
        if q.is_zero():
            continue
        sign, qs = _scalar_pieces(q)
        parts = []
        if qs != "1" or k == 0:
            parts.append(f"({qs})" if _is_composite(qs) and k > 0 else qs)
        if k == 1:
            parts.append("x")
        elif k > 1:
            parts.append(f"x^{k}")
        pieces.append((sign, "*".join(parts), k))
    pieces.sort(key=lambda t: (t[0] == "-", -t[2]))
    return [(s, b) for s, b, _ in pieces]


def render_operator(P: WeylOperator) -> str:
    """Canonical text form: descending D-power, coefficients grouped."""
    if P.is_zero():
        return "0"
    chunks = []
    for i in range(P.order, -1, -1):
        a = P.coeff(i)
        if a.is_zero():
            continue
        terms = _coeff_terms(a)
        dpart = "" if i == 0 else ("D" if i == 1 else f"D^{i}")
        if len(terms) == 1:
            sign, body = terms[0]
            if dpart:
                body = f"{body}*{dpart}" if body != "1" else dpart
            chunks.append((sign, body))
        else:
            inner = terms[0][1] if terms[0][0] == "+" else "-" + terms[0][1]
            for sign, body in terms[1:]:
                inner += f" {sign} {body}"
            if dpart:
                chunks.append(("+", f"({inner})*{dpart}"))
            else:
                chunks.append(("+", inner))
    out = chunks[0][1] if chunks[0][0] == "+" else "-" + chunks[0][1]
    for sign, body in chunks[1:]:
        out += f" {sign} {body}"
    return out


def operator_record(P: WeylOperator) -> dict:
    return {
        "schema": 1,
        "kind": "operator",
        "coeffs": [
            [i, P.coeff(i).compact() if hasattr(P.coeff(i), "compact") else None]
            for i in range(P.order + 1)
        ],
    }


def _coefpoly_compact(a: CoefPoly) -> str:
    if a.is_zero():
        return "0"
    terms = _coeff_terms(a)
    out = terms[0][1] if terms[0][0] == "+" else "-" + terms[0][1]
    for sign, body in terms[1:]:
        out += f"{sign}{body}"
    return out


def render(entity, format: str = "text") -> str:
    """Render an operator, a table, a lattice description or a script.

    format "text" gives the canonical human-readable form; "structured"
    gives JSON with exact scalars as strings.
    """
    from .datum import LocalDatumTable, render_table

    if format not in ("text", "structured"):
        raise ValueError(f"unknown format {format!r}")
    if isinstance(entity, WeylOperator):
        if format == "text":
            return render_operator(entity)
        rec = {
            "schema": 1,
            "kind": "operator",
            "coeffs": [
                [i, _coefpoly_compact(entity.coeff(i))]
                for i in range(entity.order + 1)
                if not entity.coeff(i).is_zero()
            ],
        }
        return json.dumps(rec, indent=2)
    if isinstance(entity, LocalDatumTable):
        if format == "text":
            return render_table(entity)
        return json.dumps(table_record(entity), indent=2)
    raise TypeError(f"cannot render {type(entity).__name__}")


def table_record(T) -> dict:
    def blocks(es):
        return [
            {"value": b.value.compact(), "mult": b.mult, "zero": b.is_zero_block}
            for b in es.blocks
        ]

    return {
        "schema": 1,
        "kind": "table",
        "order": T.order,
        "rows": [
            {"point": r.point.compact(), "blocks": blocks(r.exponents)}
            for r in T.rows
        ],
        "classes": [
            {
                "alpha": c.alpha.compact(),
                "legs": [
                    {"beta": l.beta.compact(), "blocks": blocks(l.exponents)}
                    for l in c.legs
                ],
            }
            for c in T.classes
        ],
    }
