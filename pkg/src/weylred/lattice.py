"""Root-lattice picture of a table of local data: basis indexed by the
table shape, symmetric Cartan pairing, the tail-sum vector attached to
an operator, simple reflections, rigidity classification, and the
greedy reduction planner.

Index convention: (0, j, k) is depth k of the j-th regular row (named
blocks only, 1-based); (i, j, k) with i >= 1 is depth k of leg j of
the i-th irregular class.  Heads are the depth-1 nodes; heads of
different classes pair to -1, consecutive depths pair to -1, the
diagonal is 2 and everything else pairs to 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .datum import (
    FinalForm,
    LocalDatumTable,
    is_final,
    rigidity_index,
    t_add,
    t_euler,
)
from .errors import IndexMismatch, NotRigid, WeylredError
from .scalar import ParamRat


def _pairing(a: tuple, b: tuple) -> int:
    if a == b:
        return 2
    if a[:2] == b[:2] and abs(a[2] - b[2]) == 1:
        return -1
    if a[2] == 1 and b[2] == 1 and a[0] != b[0]:
        return -1
    return 0


@dataclass(frozen=True)
class CartanForm:
    indices: tuple  # tuple of (i, j, k) triples

    def pairing(self, a, b) -> int:
        return _pairing(a, b)

    def contains(self, idx) -> bool:
        return idx in self.indices


@dataclass(frozen=True)
class RootVector:
    coeffs: tuple  # sorted tuple of ((i, j, k), int) with nonzero ints

    @staticmethod
    def of(mapping: dict) -> "RootVector":
        return RootVector(tuple(sorted((k, v) for k, v in mapping.items() if v)))

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def height(self) -> int:
        return sum(v for _, v in self.coeffs)

    def support(self) -> tuple:
        return tuple(k for k, _ in self.coeffs)

    def coeff(self, idx) -> int:
        for k, v in self.coeffs:
            if k == idx:
                return v
        return 0

    def is_simple(self) -> Optional[tuple]:
        if len(self.coeffs) == 1 and self.coeffs[0][1] == 1:
            return self.coeffs[0][0]
        return None


def alpha_of(T: LocalDatumTable):
    """(CartanForm, RootVector): the basis read off the table shape and
    the vector of tail sums of multiplicities (zero blocks excluded)."""
    indices = []
    coeffs = {}
    for j, row in enumerate(T.rows, start=1):
        named = row.exponents.named()
        tail = sum(b.mult for b in named)
        for k in range(1, len(named) + 1):
            idx = (0, j, k)
            indices.append(idx)
            coeffs[idx] = tail
            tail -= named[k - 1].mult
    for i, cls in enumerate(T.classes, start=1):
        for j, leg in enumerate(cls.legs, start=1):
            blocks = leg.exponents.blocks
            tail = leg.mult
            for k in range(1, len(blocks) + 1):
                idx = (i, j, k)
                indices.append(idx)
                coeffs[idx] = tail
                tail -= blocks[k - 1].mult
    return CartanForm(tuple(indices)), RootVector.of(coeffs)


def inner(F: CartanForm, a: RootVector, b: RootVector) -> int:
    for v in (a, b):
        for idx, _ in v.coeffs:
            if not F.contains(idx):
                raise IndexMismatch(f"index {idx} outside the lattice")
    out = 0
    for ia, ca in a.coeffs:
        for ib, cb in b.coeffs:
            p = _pairing(ia, ib)
            if p:
                out += ca * cb * p
    return out


def pair_with_node(a: RootVector, idx: tuple) -> int:
    out = 0
    for ia, ca in a.coeffs:
        p = _pairing(ia, idx)
        if p:
            out += ca * p
    return out


def reflect(F: CartanForm, a: RootVector, at: tuple) -> RootVector:
    """Simple reflection: a - (a, v) v at the basis node `at`."""
    if not F.contains(at):
        raise IndexMismatch(f"index {at} outside the lattice")
    d = a.as_dict()
    d[at] = d.get(at, 0) - pair_with_node(a, at)
    return RootVector.of(d)


@dataclass(frozen=True)
class Classification:
    kind: str  # "v_member" | "imaginary" | "real_orbit" | "not_root_like"
    vector: RootVector
    word: tuple  # reflection nodes applied, in order

    def describe(self) -> str:
        body = ", ".join(f"{i}.{j}.{k}:{v}" for (i, j, k), v in self.vector.coeffs)
        return f"{self.kind} at [{body}] after {len(self.word)} reflections"


def _is_v_member(a: RootVector) -> bool:
    """One irregular head with coefficient n, regular chains with
    strictly decreasing coefficients bounded by n."""
    heads = [(idx, c) for idx, c in a.coeffs if idx[0] >= 1]
    if len(heads) != 1:
        return False
    (idx, n) = heads[0]
    if idx[2] != 1 or n < 1:
        return False
    chains = {}
    for (i, j, k), c in a.coeffs:
        if i == 0:
            chains.setdefault(j, {})[k] = c
    for j, chain in chains.items():
        ks = sorted(chain)
        if ks != list(range(1, len(ks) + 1)):
            return False
        seq = [chain[k] for k in ks]
        if seq[0] > n:
            return False
        if any(seq[t] <= seq[t + 1] for t in range(len(seq) - 1)):
            return False
        if any(v < 1 for v in seq):
            return False
    return True


def _support_connected(F: CartanForm, a: RootVector) -> bool:
    nodes = list(a.support())
    if not nodes:
        return False
    seen = {nodes[0]}
    frontier = [nodes[0]]
    while frontier:
        cur = frontier.pop()
        for other in nodes:
            if other not in seen and _pairing(cur, other) != 0:
                seen.add(other)
                frontier.append(other)
    return len(seen) == len(nodes)


def classify(F: CartanForm, a: RootVector) -> Classification:
    """Height-decreasing descent of a positive lattice vector until a
    recognisable endpoint."""
    word = []
    cur = a
    for _ in range(max(2 * a.height() + 4, 16)):
        if _is_v_member(cur):
            return Classification("v_member", cur, tuple(word))
        simple = cur.is_simple()
        if simple is not None:
            return Classification("real_orbit", cur, tuple(word))
        pairs = [(pair_with_node(cur, idx), idx) for idx in F.indices]
        pos = [(p, idx) for p, idx in pairs if p > 0 and cur.coeff(idx) > 0]
        if not pos:
            if all(p <= 0 for p, _ in pairs):
                kind = "imaginary" if _support_connected(F, cur) else "not_root_like"
                return Classification(kind, cur, tuple(word))
            return Classification("not_root_like", cur, tuple(word))
        # prefer deep irregular nodes on ties: that path ends inside V
        pos.sort(key=lambda t: (-t[0], -t[1][0], -t[1][2], t[1][1]))
        p, idx = pos[0]
        nxt = reflect(F, cur, idx)
        if any(v < 0 for _, v in nxt.coeffs):
            return Classification("real_orbit", cur, tuple(word))
        word.append(idx)
        cur = nxt
    return Classification("not_root_like", cur, tuple(word))


def dynkin_text(F: CartanForm, a: Optional[RootVector] = None) -> str:
    """Nodes with coefficients plus adjacency pairs (edge multiplicity
    is the negated pairing); stable ordering."""
    lines = []
    for idx in sorted(F.indices):
        c = a.coeff(idx) if a is not None else 0
        tag = f"node {idx[0]}.{idx[1]}.{idx[2]}"
        lines.append(f"{tag} coeff {c}" if a is not None else tag)
    for i, x in enumerate(sorted(F.indices)):
        for y in sorted(F.indices)[i + 1 :]:
            p = _pairing(x, y)
            if p:
                lines.append(
                    f"edge {x[0]}.{x[1]}.{x[2]} {y[0]}.{y[1]}.{y[2]} {-p}"
                )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# reduction planning


@dataclass(frozen=True)
class PlanStep:
    """One planned move with its predicted table state."""

    kind: str  # "permute" | "add" | "euler" | "collapse"
    # permute: target = (class_i, leg_j) with class_i = 0 for rows; order = tuple
    # add: row index + point + f
    # euler: class/leg indices + alpha/beta/nu values
    # collapse: alpha/beta/nu values + n
    data: dict
    predicted_table: Optional[LocalDatumTable]
    predicted_order: int


def _sorted_block_order(blocks) -> tuple:
    order = sorted(
        range(len(blocks)),
        key=lambda k: (-blocks[k].mult, blocks[k].value.sort_key()),
    )
    return tuple(order)


def _permute_leg(T: LocalDatumTable, ci: int, lj: int, order: tuple) -> LocalDatumTable:
    from .datum import ExponentSet, IrregularClass, IrregularLeg

    cls = T.classes[ci]
    leg = cls.legs[lj]
    blocks = [leg.exponents.blocks[k] for k in order]
    legs = list(cls.legs)
    legs[lj] = IrregularLeg(leg.beta, ExponentSet(blocks))
    classes = list(T.classes)
    classes[ci] = IrregularClass(cls.alpha, tuple(legs))
    return LocalDatumTable(T.order, T.rows, tuple(classes))


def _permute_row(T: LocalDatumTable, rj: int, order: tuple) -> LocalDatumTable:
    from .datum import ExponentSet, RegularRow

    row = T.rows[rj]
    named = list(row.exponents.named())
    zeros = [b for b in row.exponents.blocks if b.is_zero_block]
    blocks = zeros + [named[k] for k in order]
    rows = list(T.rows)
    rows[rj] = RegularRow(row.point, ExponentSet(blocks))
    return LocalDatumTable(T.order, tuple(rows), T.classes)


def plan_reduction(T: LocalDatumTable) -> list:
    """Greedy move plan that drives a positive-rigidity table to the
    trivial power form; each Euler step drops the order by the pairing
    of the tail-sum vector with the targeted head node."""
    T.validate()
    F, a = alpha_of(T)
    idx = rigidity_index(T)
    if inner(F, a, a) != idx:
        raise WeylredError("internal: rigidity index disagrees with the pairing")
    if idx <= 0:
        cert = classify(F, a)
        raise NotRigid(
            f"rigidity index {idx} is not positive: {cert.describe()}",
            certificate=cert,
        )
    steps = []
    sim = T
    euler_budget = a.height()
    eulers = 0
    while True:
        fin = is_final(sim)
        if fin is not None:
            if not fin.collapsed:
                from .datum import trivial_power_table

                target = trivial_power_table(fin.alpha, fin.beta, fin.n)
                steps.append(
                    PlanStep(
                        "collapse",
                        {
                            "alpha": fin.alpha,
                            "beta": fin.beta,
                            "nu": fin.nu,
                            "n": fin.n,
                            "pre_table": sim,
                        },
                        target,
                        fin.n,
                    )
                )
            return steps

        # sort leg blocks by descending multiplicity
        changed = True
        while changed:
            changed = False
            for ci, cls in enumerate(sim.classes):
                for lj, leg in enumerate(cls.legs):
                    order = _sorted_block_order(leg.exponents.blocks)
                    if order != tuple(range(len(order))):
                        sim = _permute_leg(sim, ci, lj, order)
                        steps.append(
                            PlanStep(
                                "permute",
                                {"class": ci + 1, "leg": lj + 1, "order": order},
                                sim,
                                sim.order,
                            )
                        )
                        changed = True

        # additions: give every row a maximal zero block
        did_add = True
        while did_add:
            did_add = False
            for rj in range(len(sim.rows)):
                row = sim.rows[rj]
                named = row.exponents.named()
                if not named:
                    continue
                zero = row.exponents.zero_mult()
                best = max(range(len(named)), key=lambda k: named[k].mult)
                if named[best].mult <= zero:
                    continue
                if best != 0:
                    order = (best,) + tuple(
                        k for k in range(len(named)) if k != best
                    )
                    sim = _permute_row(sim, rj, order)
                    steps.append(
                        PlanStep(
                            "permute",
                            {"class": 0, "leg": rj + 1, "order": order},
                            sim,
                            sim.order,
                        )
                    )
                point = sim.rows[rj].point
                f = -sim.rows[rj].exponents.named()[0].value
                sim = t_add(sim, rj, f)
                steps.append(
                    PlanStep(
                        "add",
                        {"row": rj, "point": point, "f": f},
                        sim,
                        sim.order,
                    )
                )
                did_add = True
                break  # indices may have shifted: rescan
        if is_final(sim) is not None:
            continue

        # best head for an order-dropping Euler step
        _, a_now = alpha_of(sim)
        best = None
        for ci, cls in enumerate(sim.classes):
            for lj, leg in enumerate(cls.legs):
                drop = pair_with_node(a_now, (ci + 1, lj + 1, 1))
                if best is None or drop > best[0]:
                    best = (drop, ci, lj)
        if best is None or best[0] <= 0:
            raise WeylredError(
                "internal: no order-dropping move on a rigid table"
            )
        drop, ci, lj = best
        cls = sim.classes[ci]
        leg = cls.legs[lj]
        nu = leg.exponents.blocks[0].value
        sim, new_order = t_euler(sim, ci, lj, 0)
        eulers += 1
        if eulers > euler_budget:
            raise WeylredError("internal: Euler budget exceeded in the planner")
        steps.append(
            PlanStep(
                "euler",
                {
                    "class": ci + 1,
                    "leg": lj + 1,
                    "block": 1,
                    "alpha": cls.alpha,
                    "beta": leg.beta,
                    "nu": nu,
                },
                sim,
                new_order,
            )
        )
