"""Tables of local data as first-class values: rigidity index and the
table-level laws for additions, twisted Euler transforms and the
Fourier-Laplace transform.

Zero blocks at regular rows are stored explicitly so the addition can
move the zero designation; every sum taken over "named" blocks skips
them.  Irregular legs carry no zero-block convention.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

from .errors import Degenerate, NoZeroClass, NonSemiSimple, WeylredError
from .local import ExponentBlock, ExponentSet
from .scalar import ParamRat, _coerce_rat


@dataclass(frozen=True)
class RegularRow:
    point: ParamRat
    exponents: ExponentSet

    def named_mult(self) -> int:
        return sum(b.mult for b in self.exponents.named())

    def canonical(self) -> "RegularRow":
        return RegularRow(self.point, self.exponents.canonical())


@dataclass(frozen=True)
class IrregularLeg:
    beta: ParamRat
    exponents: ExponentSet

    @property
    def mult(self) -> int:
        return self.exponents.total

    def canonical(self) -> "IrregularLeg":
        return IrregularLeg(self.beta, self.exponents.canonical())


@dataclass(frozen=True)
class IrregularClass:
    alpha: ParamRat
    legs: tuple

    @property
    def mult(self) -> int:
        return sum(leg.mult for leg in self.legs)

    def canonical(self) -> "IrregularClass":
        return IrregularClass(
            self.alpha,
            tuple(sorted((l.canonical() for l in self.legs), key=lambda l: l.beta.sort_key())),
        )


@dataclass(frozen=True)
class LocalDatumTable:
    order: int
    rows: tuple
    classes: tuple

    def validate(self):
        if self.order < 1:
            raise WeylredError("table order must be positive")
        n = self.order
        for row in self.rows:
            row.exponents.validate()
            if row.exponents.total != n:
                raise WeylredError(
                    f"row at {row.point.compact()} sums to "
                    f"{row.exponents.total}, expected {n}"
                )
        pts = [r.point.compact() for r in self.rows]
        if len(set(pts)) != len(pts):
            raise WeylredError("repeated regular points")
        alphas = [c.alpha.compact() for c in self.classes]
        if len(set(alphas)) != len(alphas):
            raise WeylredError("repeated class twists")
        total = 0
        for cls in self.classes:
            betas = [l.beta.compact() for l in cls.legs]
            if len(set(betas)) != len(betas):
                raise WeylredError("repeated legs in a class")
            for leg in cls.legs:
                leg.exponents.validate()
                if leg.mult < 1:
                    raise WeylredError("empty leg")
            total += cls.mult
        if total != n:
            raise WeylredError(f"class multiplicities sum to {total}, expected {n}")

    def canonical(self) -> "LocalDatumTable":
        return LocalDatumTable(
            self.order,
            tuple(sorted((r.canonical() for r in self.rows), key=lambda r: r.point.sort_key())),
            tuple(
                sorted((c.canonical() for c in self.classes), key=lambda c: c.alpha.sort_key())
            ),
        )

    def named_total(self) -> int:
        return sum(r.named_mult() for r in self.rows)

    def find_class(self, alpha: ParamRat) -> Optional[int]:
        for i, c in enumerate(self.classes):
            if c.alpha == alpha:
                return i
        return None


class FinalForm(NamedTuple):
    alpha: ParamRat
    beta: ParamRat
    nu: ParamRat
    n: int
    collapsed: bool  # already the trivial power table


def trivial_power_table(alpha, beta, n: int) -> LocalDatumTable:
    """Table of (D - alpha x - beta)^n: no rows, one class/leg with the
    single chain [1-n]_n."""
    alpha, beta = _coerce_rat(alpha), _coerce_rat(beta)
    block = ExponentBlock(ParamRat.const(1 - n), n, False)
    leg = IrregularLeg(beta, ExponentSet([block]))
    return LocalDatumTable(n, (), (IrregularClass(alpha, (leg,)),))


def rigidity_index(T: LocalDatumTable) -> int:
    """idx = -((p+1) n^2 - sum n_i^2 - sum (n^i_j)^2 - sum (m^i_j)^2
    - sum (n^ij_k)^2), with zero blocks included in the row sum."""
    n = T.order
    p = len(T.rows)
    acc = (p + 1) * n * n
    for row in T.rows:
        acc -= sum(b.mult**2 for b in row.exponents.blocks)
    for cls in T.classes:
        acc -= cls.mult**2
        for leg in cls.legs:
            acc -= leg.mult**2
            acc -= sum(b.mult**2 for b in leg.exponents.blocks)
    return -acc


def _shift_row(row: RegularRow, f: ParamRat) -> RegularRow:
    zeros = [b for b in row.exponents.blocks if b.is_zero_block]
    named = [b for b in row.exponents.blocks if not b.is_zero_block]
    blocks = [b.shifted(f) for b in zeros + named]
    es = ExponentSet(blocks)
    es.validate()
    return RegularRow(row.point, es)


def _shift_leg(leg: IrregularLeg, f: ParamRat) -> IrregularLeg:
    blocks = [ExponentBlock(b.value + f, b.mult, False) for b in leg.exponents.blocks]
    es = ExponentSet(blocks)
    es.validate()
    return IrregularLeg(leg.beta, es)


def t_add(T: LocalDatumTable, i: int, f) -> LocalDatumTable:
    """Addition at row i: its block values gain f, every irregular
    block value loses f; zero flags are recomputed.  A row whose
    exponents become the plain chain [0]_n is dropped (the point turns
    ordinary and the reduced representative loses the factor)."""
    f = _coerce_rat(f)
    rows = list(T.rows)
    shifted = _shift_row(rows[i], f)
    if all(b.is_zero_block for b in shifted.exponents.blocks):
        rows.pop(i)
    else:
        rows[i] = shifted
    classes = tuple(
        IrregularClass(c.alpha, tuple(_shift_leg(l, -f) for l in c.legs))
        for c in T.classes
    )
    out = LocalDatumTable(T.order, tuple(rows), classes)
    out.validate()
    return out


def t_twist(T: LocalDatumTable, gamma, delta) -> LocalDatumTable:
    """Exponential twist by exp((gamma/2) x^2 + delta x): classes move
    to alpha+gamma, legs to beta+delta, exponents unchanged."""
    gamma, delta = _coerce_rat(gamma), _coerce_rat(delta)
    classes = tuple(
        IrregularClass(
            c.alpha + gamma,
            tuple(IrregularLeg(l.beta + delta, l.exponents) for l in c.legs),
        )
        for c in T.classes
    )
    out = LocalDatumTable(T.order, T.rows, classes)
    out.validate()
    return out


def _rebuild_rows(rows, f: ParamRat, new_order: int) -> tuple:
    """Shift named row blocks by f, drop old zero blocks, repad."""
    out = []
    for row in rows:
        named = [b.shifted(f) for b in row.exponents.blocks if not b.is_zero_block]
        named_mult = sum(b.mult for b in named)
        pad = new_order - named_mult
        if pad < 0:
            raise Degenerate(
                f"row at {row.point.compact()} overflows the new order"
            )
        blocks = ([ExponentBlock(ParamRat.zero(), pad, True)] if pad else []) + named
        if not blocks:
            continue
        es = ExponentSet(blocks)
        es.validate()
        if all(b.is_zero_block for b in blocks) and named_mult == 0:
            continue  # the point became ordinary
        out.append(RegularRow(row.point, es))
    return tuple(out)


def t_euler_generic(T: LocalDatumTable, alpha, beta, f):
    """Table law of E((alpha/2)x^2; beta, f) at the class alpha / leg
    beta (either may be absent from the table).  When f + 1 matches a
    block value of the target leg the absorbing (order-changing) form
    of the law applies; otherwise the generic form adds a block.

    Returns (table, predicted order).
    """
    alpha, beta, f = _coerce_rat(alpha), _coerce_rat(beta), _coerce_rat(f)
    n = T.order
    ci = T.find_class(alpha)
    cls = T.classes[ci] if ci is not None else IrregularClass(alpha, ())
    li = None
    for k, leg in enumerate(cls.legs):
        if leg.beta == beta:
            li = k
            break
    leg = cls.legs[li] if li is not None else IrregularLeg(beta, ExponentSet([]))

    target_k = None
    for k, b in enumerate(leg.exponents.blocks):
        if b.value == f + ParamRat.one():
            target_k = k
            break

    N = T.named_total() + (n - cls.mult)
    b_margin = N - leg.mult
    if target_k is not None:
        removed = leg.exponents.blocks[target_k].mult
        if n - removed <= 0 and b_margin <= 0:
            raise Degenerate("both order margins vanish: use the final collapse")
        if b_margin < 0:
            raise Degenerate("negative leg margin: invalid table")
        new_order = n - removed + b_margin
    else:
        if b_margin < 0:
            raise Degenerate("negative leg margin: invalid table")
        new_order = n + b_margin

    rows = _rebuild_rows(T.rows, f, new_order)

    new_legs = []
    for k, l in enumerate(cls.legs):
        if li is not None and k == li:
            blocks = []
            for bk, b in enumerate(l.exponents.blocks):
                if target_k is not None and bk == target_k:
                    if b_margin > 0:
                        blocks.append(
                            ExponentBlock(ParamRat.one() - f, b_margin, False)
                        )
                else:
                    blocks.append(ExponentBlock(b.value - f, b.mult, False))
            if target_k is None and b_margin > 0:
                blocks.insert(0, ExponentBlock(ParamRat.one() - f, b_margin, False))
            if blocks:
                es = ExponentSet(blocks)
                es.validate()
                new_legs.append(IrregularLeg(l.beta, es))
        else:
            new_legs.append(l)
    if li is None and b_margin > 0:
        es = ExponentSet([ExponentBlock(ParamRat.one() - f, b_margin, False)])
        new_legs.append(IrregularLeg(beta, es))
        new_legs.sort(key=lambda l: l.beta.sort_key())

    classes = []
    for k, c in enumerate(T.classes):
        if ci is not None and k == ci:
            if new_legs:
                classes.append(IrregularClass(alpha, tuple(new_legs)))
        else:
            classes.append(
                IrregularClass(c.alpha, tuple(_shift_leg(l, f) for l in c.legs))
            )
    if ci is None and new_legs:
        classes.append(IrregularClass(alpha, tuple(new_legs)))
        classes.sort(key=lambda c: c.alpha.sort_key())

    out = LocalDatumTable(new_order, rows, tuple(classes))
    out.validate()
    return out, new_order


def t_euler(T: LocalDatumTable, i: int, j: int, k: int):
    """Block-targeted twisted Euler transform at class i, leg j, block
    k (indices into the stored table); the parameter is nu - 1 for the
    block value nu.  Returns (table, predicted order)."""
    cls = T.classes[i]
    leg = cls.legs[j]
    blk = leg.exponents.blocks[k]
    n = T.order
    N = T.named_total() + (n - cls.mult)
    if n - blk.mult <= 0 and N - leg.mult <= 0:
        raise Degenerate("both order margins vanish: use the final collapse")
    return t_euler_generic(T, cls.alpha, leg.beta, blk.value - ParamRat.one())


def t_laplace(T: LocalDatumTable) -> LocalDatumTable:
    """Fourier-Laplace transform of the table; needs a class alpha = 0.

    Class-0 legs become regular rows (blocks nu - 1), regular rows
    become class-0 legs at -c (named blocks mu + 1), other classes map
    to alpha -> -1/alpha with legs beta/alpha and unchanged blocks.
    """
    return _laplace_table(T, inverse=False)


def t_laplace_inv(T: LocalDatumTable) -> LocalDatumTable:
    """Inverse Fourier-Laplace transform: rows c go to legs at +c,
    class-0 legs beta go to rows at -beta, alpha -> -1/alpha with legs
    -beta/alpha."""
    return _laplace_table(T, inverse=True)


def _laplace_table(T: LocalDatumTable, inverse: bool) -> LocalDatumTable:
    zi = T.find_class(ParamRat.zero())
    if zi is None:
        raise NoZeroClass("no exponential class with alpha = 0")
    cls0 = T.classes[zi]
    n = T.order
    new_order = T.named_total() + (n - cls0.mult)
    if new_order < 1:
        raise Degenerate("laplace image would have order 0")
    one = ParamRat.one()

    rows = []
    for leg in cls0.legs:
        blocks = []
        for b in leg.exponents.blocks:
            v = b.value - one
            blocks.append(ExponentBlock(v, b.mult, v.is_zero()))
        pad = new_order - leg.mult
        if pad:
            blocks = [ExponentBlock(ParamRat.zero(), pad, True)] + blocks
        point = -leg.beta if inverse else leg.beta
        es = ExponentSet(blocks)
        es.validate()
        rows.append(RegularRow(point, es))
    rows.sort(key=lambda r: r.point.sort_key())

    legs0 = []
    for row in T.rows:
        named = row.exponents.named()
        if not named:
            continue
        blocks = [ExponentBlock(b.value + one, b.mult, False) for b in named]
        beta = row.point if inverse else -row.point
        es = ExponentSet(blocks)
        es.validate()
        legs0.append(IrregularLeg(beta, es))
    legs0.sort(key=lambda l: l.beta.sort_key())

    classes = []
    if legs0:
        classes.append(IrregularClass(ParamRat.zero(), tuple(legs0)))
    for k, c in enumerate(T.classes):
        if k == zi:
            continue
        alpha = -(one / c.alpha)
        legs = []
        for l in c.legs:
            beta = (-(l.beta) if inverse else l.beta) / c.alpha
            legs.append(IrregularLeg(beta, l.exponents))
        legs.sort(key=lambda l: l.beta.sort_key())
        classes.append(IrregularClass(alpha, tuple(legs)))
    classes.sort(key=lambda c: c.alpha.sort_key())

    out = LocalDatumTable(new_order, tuple(rows), tuple(classes))
    out.validate()
    return out


def is_final(T: LocalDatumTable) -> Optional[FinalForm]:
    """Trivial-power certificate: either the table already is the table
    of (D - alpha x - beta)^n, or it has a single class/leg/block and
    fully named rows, so one twisted Euler transform collapses it."""
    if len(T.classes) != 1 or len(T.classes[0].legs) != 1:
        return None
    leg = T.classes[0].legs[0]
    if len(leg.exponents.blocks) != 1:
        return None
    blk = leg.exponents.blocks[0]
    alpha, beta = T.classes[0].alpha, leg.beta
    n = T.order
    if not T.rows and blk.value == ParamRat.const(1 - n) and blk.mult == n:
        return FinalForm(alpha, beta, blk.value, n, True)
    if T.named_total() == n and blk.mult == n:
        return FinalForm(alpha, beta, blk.value, n, False)
    return None


# ---------------------------------------------------------------------------
# text serialisation


def render_table(T: LocalDatumTable) -> str:
    lines = [f"order {T.order}"]

    def set_str(es: ExponentSet) -> str:
        return ", ".join(f"[{b.value.compact()}]_{b.mult}" for b in es.blocks)

    for row in T.rows:
        lines.append(f"reg {row.point.compact()} : {set_str(row.exponents)}")
    for cls in T.classes:
        for leg in cls.legs:
            lines.append(
                f"irr {cls.alpha.compact()} {leg.beta.compact()} : "
                f"{set_str(leg.exponents)}"
            )
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> LocalDatumTable:
    from .expr import parse_scalar

    order = None
    rows = []
    classes = {}
    class_order = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition(" ")
        if head == "order":
            order = int(rest.strip())
            continue
        if head == "steps":
            break
        body, _, blocks_part = line.partition(":")
        fields = body.split()
        blocks = []
        for tok in blocks_part.split(","):
            tok = tok.strip()
            if not tok:
                continue
            if not tok.startswith("[") or "]_" not in tok:
                raise WeylredError(f"bad block syntax: {tok!r}")
            val_s, _, mult_s = tok.rpartition("]_")
            value = parse_scalar(val_s[1:])
            blocks.append((value, int(mult_s)))
        if fields[0] == "reg":
            point = parse_scalar(fields[1])
            es = ExponentSet(
                [ExponentBlock(v, m, v.is_zero()) for v, m in blocks]
            )
            rows.append(RegularRow(point, es))
        elif fields[0] == "irr":
            alpha = parse_scalar(fields[1])
            beta = parse_scalar(fields[2])
            es = ExponentSet([ExponentBlock(v, m, False) for v, m in blocks])
            key = alpha.compact()
            if key not in classes:
                classes[key] = (alpha, [])
                class_order.append(key)
            classes[key][1].append(IrregularLeg(beta, es))
        else:
            raise WeylredError(f"bad table line: {line!r}")
    if order is None:
        raise WeylredError("table text lacks an order line")
    cls = tuple(
        IrregularClass(classes[k][0], tuple(classes[k][1])) for k in class_order
    )
    out = LocalDatumTable(order, tuple(rows), cls)
    out.validate()
    return out
