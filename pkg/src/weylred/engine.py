"""Orchestration: end-to-end symbolic reduction with per-step
cross-validation, invertible scripts, versal additions and parameter
limits (confluence), and the order-drop criterion for Euler transforms
at a regular infinity.

Every reduction step carries the table predicted by the combinatorial
laws; the symbolic executor recomputes the table of local data after
each step and insists on exact agreement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .datum import (
    FinalForm,
    LocalDatumTable,
    is_final,
    parse_table,
    render_table,
    rigidity_index,
    t_add,
    t_euler_generic,
)
from .errors import (
    CrossValidationFailure,
    NotRigid,
    ParameterClash,
    PoleAtLimit,
    RoundTripFailure,
    WeylredError,
)
from .lattice import PlanStep, alpha_of, inner, plan_reduction
from .local import local_datum
from .scalar import CoefPoly, ParamRat, _coerce_rat
from .weyl import (
    TwistSpec,
    WeylOperator,
    adei,
    equiv,
    euler,
    rad_power,
    reduced_rep,
    twisted_euler,
)
from .classic import trivial_power


@dataclass(frozen=True)
class ReductionStep:
    """One replayable step.

    kinds and data:
      permute   class (0 = rows), leg, order
      add       point, f
      euler     class/leg/block indices plus alpha, beta, nu values
      euler_at  alpha, beta, f  (generic parameter; used by inverses)
      collapse  alpha, beta, nu, n (terminal twisted Euler transform)
      expand    alpha, beta, nu, n, rows=((point, f), ...) (inverse of
                a collapse, realised by additions)
    """

    kind: str
    data: dict
    predicted_table: Optional[LocalDatumTable] = None
    predicted_order: int = 0

    def semantics(self):
        d = self.data
        if self.kind == "permute":
            return ("permute", d["class"], d["leg"], tuple(d["order"]))
        if self.kind == "add":
            return ("add", d["point"].compact(), d["f"].compact())
        if self.kind in ("euler", "euler_at"):
            f = d["nu"] - ParamRat.one() if self.kind == "euler" else d["f"]
            return ("euler", d["alpha"].compact(), d["beta"].compact(), f.compact())
        if self.kind == "collapse":
            return ("collapse", d["alpha"].compact(), d["beta"].compact(),
                    d["nu"].compact(), d["n"])
        if self.kind == "expand":
            return ("expand", d["alpha"].compact(), d["beta"].compact(),
                    d["nu"].compact(), d["n"],
                    tuple((pt.compact(), f.compact()) for pt, f in d["rows"]))
        raise WeylredError(f"unknown step kind {self.kind}")


@dataclass(frozen=True)
class ReductionScript:
    initial_table: LocalDatumTable
    steps: tuple
    final_form: tuple  # (alpha, beta, n)

    def semantically_equal(self, other: "ReductionScript") -> bool:
        return (
            self.initial_table.canonical() == other.initial_table.canonical()
            and tuple(s.semantics() for s in self.steps)
            == tuple(s.semantics() for s in other.steps)
        )


def _execute_step(op: WeylOperator, step: ReductionStep) -> WeylOperator:
    d = step.data
    if step.kind == "permute":
        return op
    if step.kind == "add":
        return rad_power(d["point"], d["f"], op)
    if step.kind == "euler":
        f = d["nu"] - ParamRat.one()
        return twisted_euler(TwistSpec(d["alpha"], d["beta"]), [(ParamRat.zero(), f)], op)
    if step.kind == "euler_at":
        return twisted_euler(
            TwistSpec(d["alpha"], d["beta"]), [(ParamRat.zero(), d["f"])], op
        )
    if step.kind == "collapse":
        return twisted_euler(
            TwistSpec(d["alpha"], d["beta"]), [(ParamRat.zero(), d["nu"])], op
        )
    if step.kind == "expand":
        for pt, f in d["rows"]:
            op = rad_power(pt, f, op)
        return op
    raise WeylredError(f"unknown step kind {step.kind}")


def _plan_to_steps(plan) -> list:
    out = []
    for s in plan:
        if s.kind == "permute":
            out.append(
                ReductionStep(
                    "permute",
                    {"class": s.data["class"], "leg": s.data["leg"], "order": s.data["order"]},
                    s.predicted_table,
                    s.predicted_order,
                )
            )
        elif s.kind == "add":
            out.append(
                ReductionStep(
                    "add",
                    {"row": s.data["row"], "point": s.data["point"], "f": s.data["f"]},
                    s.predicted_table,
                    s.predicted_order,
                )
            )
        elif s.kind == "euler":
            out.append(ReductionStep("euler", dict(s.data), s.predicted_table, s.predicted_order))
        elif s.kind == "collapse":
            out.append(ReductionStep("collapse", dict(s.data), s.predicted_table, s.predicted_order))
        else:
            raise WeylredError(f"unexpected planned step {s.kind}")
    return out


def reduce(P: WeylOperator):
    """Reduce a rigid operator to (D - alpha x - beta)^n, validating the
    predicted table of local data after every symbolic step.

    Returns (ReductionScript, trace), where trace[0] is the reduced
    input and trace[k] the operator after step k.
    """
    T0 = local_datum(P)
    idx = rigidity_index(T0)
    F, a = alpha_of(T0)
    if inner(F, a, a) != idx:
        raise CrossValidationFailure("rigidity index disagrees with the pairing")
    plan = plan_reduction(T0)  # raises NotRigid with certificate when idx <= 0
    steps = _plan_to_steps(plan)
    op = reduced_rep(P)
    trace = [op]
    for k, step in enumerate(steps):
        op = _execute_step(op, step)
        trace.append(op)
        observed = local_datum(op)
        if observed.canonical() != step.predicted_table.canonical():
            raise CrossValidationFailure(
                f"step {k + 1} ({step.kind}): table of local data does not "
                "match the prediction"
            )
        if rigidity_index(observed) != idx:
            raise CrossValidationFailure(
                f"step {k + 1} ({step.kind}): rigidity index changed"
            )
    fin = is_final(local_datum(op))
    if fin is None or not fin.collapsed:
        raise CrossValidationFailure("reduction did not reach the trivial form")
    target = trivial_power(fin.alpha, fin.beta, fin.n)
    if not equiv(op, target):
        raise CrossValidationFailure("final operator is not the trivial power")
    script = ReductionScript(T0, tuple(steps), (fin.alpha, fin.beta, fin.n))
    return script, trace


def invert_script(S: ReductionScript) -> ReductionScript:
    """Reverse a script: additions flip sign, Euler steps become
    generic transforms with the negated parameter, a collapse is undone
    by the additions that rebuild its regular rows (order-1 endpoints).
    """
    out = []
    for step in reversed(S.steps):
        d = step.data
        if step.kind == "permute":
            order = d["order"]
            inv = tuple(sorted(range(len(order)), key=lambda i: order[i]))
            out.append(ReductionStep("permute", {"class": d["class"], "leg": d["leg"], "order": inv}))
        elif step.kind == "add":
            out.append(ReductionStep("add", {"row": d.get("row", 0), "point": d["point"], "f": -d["f"]}))
        elif step.kind == "euler":
            out.append(
                ReductionStep(
                    "euler_at",
                    {
                        "alpha": d["alpha"],
                        "beta": d["beta"],
                        "f": -(d["nu"] - ParamRat.one()),
                    },
                )
            )
        elif step.kind == "euler_at":
            out.append(
                ReductionStep(
                    "euler_at",
                    {"alpha": d["alpha"], "beta": d["beta"], "f": -d["f"]},
                )
            )
        elif step.kind == "collapse":
            if d["n"] != 1:
                raise RoundTripFailure(
                    "collapse inversion is only supported for order-1 endpoints"
                )
            pre = d["pre_table"]
            rows = tuple(
                (row.point, row.exponents.named()[0].value) for row in pre.rows
            )
            for _, blocks in (
                (row.point, row.exponents.named()) for row in pre.rows
            ):
                if len(blocks) != 1:
                    raise RoundTripFailure(
                        "collapse inversion needs single-block rows"
                    )
            out.append(
                ReductionStep(
                    "expand",
                    {
                        "alpha": d["alpha"],
                        "beta": d["beta"],
                        "nu": d["nu"],
                        "n": d["n"],
                        "rows": rows,
                    },
                )
            )
        elif step.kind == "expand":
            out.append(
                ReductionStep(
                    "collapse",
                    {
                        "alpha": d["alpha"],
                        "beta": d["beta"],
                        "nu": d["nu"],
                        "n": d["n"],
                        "pre_table": None,
                    },
                )
            )
        else:
            raise WeylredError(f"cannot invert step {step.kind}")
    return ReductionScript(S.initial_table, tuple(out), S.final_form)


def replay(S: ReductionScript, op: WeylOperator) -> WeylOperator:
    """Execute a script's steps on an operator, without table checks."""
    for step in S.steps:
        op = _execute_step(op, step)
    return op


def verify_round_trip(P: WeylOperator) -> bool:
    """reduce, invert, replay from the final operator; compare."""
    script, trace = reduce(P)
    inv = invert_script(script)
    back = replay(inv, trace[-1])
    if not equiv(back, P):
        raise RoundTripFailure("inverted script does not reproduce the input")
    return True


# ---------------------------------------------------------------------------
# versal additions and limits


@dataclass(frozen=True)
class VersalSpec:
    """Deformed addition with fresh parameters a_1[, a_2] and weights
    lambda_1[, lambda_2]; the a -> 0 limit produces exponential twists."""

    a_params: tuple
    lambdas: tuple

    def __post_init__(self):
        if not 1 <= len(self.a_params) <= 2:
            raise WeylredError("versal additions support one or two parameters")
        if len(self.a_params) != len(self.lambdas):
            raise WeylredError("parameter/weight count mismatch")


def versal_ad(V: VersalSpec, P: WeylOperator) -> WeylOperator:
    """Reduced versal addition.

    n = 1: D -> D + lambda_1/(1 - a_1 x);
    n = 2: D -> D + lambda_1/(1 - a_1 x)
                 + lambda_2 x/((1 - a_1 x)(1 - a_2 x)).
    """
    used = P.params()
    for name in V.a_params:
        if name in used:
            raise ParameterClash(f"versal parameter {name!r} already in use")
    a1 = ParamRat.param(V.a_params[0])
    l1 = _coerce_rat(V.lambdas[0])
    one = ParamRat.one()
    den1 = CoefPoly.linear(one, -a1)  # 1 - a1 x
    if len(V.a_params) == 1:
        num = CoefPoly.const(-l1)
        den = den1
    else:
        a2 = ParamRat.param(V.a_params[1])
        l2 = _coerce_rat(V.lambdas[1])
        den2 = CoefPoly.linear(one, -a2)
        num = -(CoefPoly.const(l1) * den2 + CoefPoly.linear(ParamRat.zero(), l2))
        den = den1 * den2
    # adei(h) substitutes D -> D - h; the kernel enters with D + kernel
    return reduced_rep(adei((num, den), P))


def limit_at(P: WeylOperator, at) -> WeylOperator:
    """Exact substitution of parameter values (PoleAtLimit when a
    coefficient denominator vanishes there)."""
    values = {name: _coerce_rat(v) for name, v in dict(at).items()}
    return P.subst_params(values)


def fresh_params(P: WeylOperator, count: int, prefix: str = "a") -> list:
    used = P.params()
    out = []
    k = 1
    while len(out) < count:
        name = f"{prefix}{k}"
        if name not in used and name not in out:
            out.append(name)
        k += 1
    return out


def deconfluence(S: ReductionScript):
    """Replace the exponential twists hidden in a reduction by versal
    additions with fresh parameters: replaying the returned script
    builds a Fuchsian family whose limit at 0 recovers the original
    operator class.

    Returns (fuchsian_steps, family) where fuchsian_steps is a list of
    (kind, data) records including the versal seeds, and family is the
    resulting operator over the extended parameter field.
    """
    alpha, beta, n = S.final_form
    inv = invert_script(S)
    taken = set()
    for step in S.steps:
        for v in step.data.values():
            if isinstance(v, ParamRat):
                taken |= v.params()
    taken |= {p for p in alpha.params() | beta.params()}

    minted = []

    def mint():
        k = 1
        while True:
            name = f"v{k}"
            if name not in taken:
                taken.add(name)
                minted.append(name)
                return name
            k += 1

    fsteps = []
    # seed: (D - alpha x - beta)^n as a limit of a versal addition of D^n
    s1, s2 = mint(), mint()
    seed_spec = VersalSpec((s1, s2), (-beta, -alpha))
    family = versal_ad(seed_spec, WeylOperator.d() ** n)
    fsteps.append(("versal", {"a": (s1, s2), "lambda": (-beta, -alpha)}))

    for step in inv.steps:
        d = step.data
        if step.kind == "permute":
            continue
        if step.kind == "add":
            family = rad_power(d["point"], d["f"], family)
            fsteps.append(("add", {"point": d["point"], "f": d["f"]}))
            continue
        if step.kind == "expand":
            for pt, f in d["rows"]:
                family = rad_power(pt, f, family)
                fsteps.append(("add", {"point": pt, "f": f}))
            continue
        if step.kind in ("euler_at", "euler"):
            a_cls = d["alpha"]
            b_leg = d["beta"]
            f = d["f"] if step.kind == "euler_at" else d["nu"] - ParamRat.one()
            if not (a_cls.is_zero() and b_leg.is_zero()):
                # untwist exp(-(a/2)x^2 - b x) as a versal addition
                u1, u2 = mint(), mint()
                family = versal_ad(VersalSpec((u1, u2), (b_leg, a_cls)), family)
                fsteps.append(("versal", {"a": (u1, u2), "lambda": (b_leg, a_cls)}))
            family = euler(0, f, family)
            fsteps.append(("euler", {"f": f}))
            if not (a_cls.is_zero() and b_leg.is_zero()):
                w1, w2 = mint(), mint()
                family = versal_ad(VersalSpec((w1, w2), (-b_leg, -a_cls)), family)
                fsteps.append(("versal", {"a": (w1, w2), "lambda": (-b_leg, -a_cls)}))
            continue
        raise WeylredError(f"cannot deconfluence step {step.kind}")
    return fsteps, family, minted


# ---------------------------------------------------------------------------
# order-drop criterion at a regular infinity


def order_drop_iff(P: WeylOperator, block_index: int):
    """(predicted, observed) for the order-dropping Euler transform at
    the block_index-th infinity exponent chain of an operator with a
    regular singular point at infinity.

    predicted: deg P - ord P < n_i;  observed: the transform with
    parameter (block value - 1) lowered the order.
    """
    from .errors import NonSemiSimple, NotRegularPoint
    from .scalar import is_integer_constant

    P = reduced_rep(P)
    T = local_datum(P)
    if len(T.classes) != 1 or len(T.classes[0].legs) != 1:
        raise NotRegularPoint("infinity is not a regular singular point")
    cls = T.classes[0]
    if not cls.alpha.is_zero() or not cls.legs[0].beta.is_zero():
        raise NotRegularPoint("infinity carries an exponential twist")
    blocks = cls.legs[0].exponents.blocks
    for b in blocks:
        if is_integer_constant(b.value) is not None:
            raise NonSemiSimple("integer exponent at infinity")
    blk = blocks[block_index]
    predicted = (P.degree - P.order) < blk.mult
    Q = euler(0, blk.value - ParamRat.one(), P)
    observed = Q.order < P.order
    return predicted, observed


# ---------------------------------------------------------------------------
# script files


def render_script(S: ReductionScript) -> str:
    """Line-oriented script file with the initial table as header."""
    lines = ["schema 1", render_table(S.initial_table).rstrip("\n"), "steps"]
    for step in S.steps:
        d = step.data
        if step.kind == "permute":
            order = " ".join(str(k + 1) for k in d["order"])
            lines.append(f"permute {d['class']} {d['leg']} {order}")
        elif step.kind == "add":
            lines.append(f"add {d['point'].compact()} {d['f'].compact()}")
        elif step.kind == "euler":
            lines.append(
                f"euler {d['class']} {d['leg']} {d['block']} {d['nu'].compact()}"
            )
        elif step.kind == "euler_at":
            lines.append(
                f"euler_at {d['alpha'].compact()} {d['beta'].compact()} "
                f"{d['f'].compact()}"
            )
        elif step.kind == "collapse":
            lines.append(
                f"collapse {d['alpha'].compact()} {d['beta'].compact()} "
                f"{d['nu'].compact()} {d['n']}"
            )
        elif step.kind == "expand":
            rows = " ".join(f"{pt.compact()} {f.compact()}" for pt, f in d["rows"])
            lines.append(
                f"expand {d['alpha'].compact()} {d['beta'].compact()} "
                f"{d['nu'].compact()} {d['n']} {rows}"
            )
        else:
            raise WeylredError(f"cannot serialise step {step.kind}")
    alpha, beta, n = S.final_form
    lines.append(f"final {alpha.compact()} {beta.compact()} {n}")
    return "\n".join(lines) + "\n"


def parse_script(text: str) -> ReductionScript:
    from .expr import parse_scalar

    head, _, tail = text.partition("steps")
    if not tail:
        raise WeylredError("script file lacks a steps section")
    table = parse_table(head)
    steps = []
    final = None
    for raw in tail.splitlines():
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "permute":
            order = tuple(int(x) - 1 for x in parts[3:])
            steps.append(
                ReductionStep(
                    "permute",
                    {"class": int(parts[1]), "leg": int(parts[2]), "order": order},
                )
            )
        elif kind == "add":
            steps.append(
                ReductionStep(
                    "add",
                    {"row": None, "point": parse_scalar(parts[1]), "f": parse_scalar(parts[2])},
                )
            )
        elif kind == "euler":
            steps.append(
                ReductionStep(
                    "euler_indexed",
                    {
                        "class": int(parts[1]),
                        "leg": int(parts[2]),
                        "block": int(parts[3]),
                        "nu": parse_scalar(parts[4]),
                    },
                )
            )
        elif kind == "euler_at":
            steps.append(
                ReductionStep(
                    "euler_at",
                    {
                        "alpha": parse_scalar(parts[1]),
                        "beta": parse_scalar(parts[2]),
                        "f": parse_scalar(parts[3]),
                    },
                )
            )
        elif kind == "collapse":
            steps.append(
                ReductionStep(
                    "collapse",
                    {
                        "alpha": parse_scalar(parts[1]),
                        "beta": parse_scalar(parts[2]),
                        "nu": parse_scalar(parts[3]),
                        "n": int(parts[4]),
                        "pre_table": None,
                    },
                )
            )
        elif kind == "expand":
            vals = [parse_scalar(x) for x in parts[5:]]
            rows = tuple((vals[i], vals[i + 1]) for i in range(0, len(vals), 2))
            steps.append(
                ReductionStep(
                    "expand",
                    {
                        "alpha": parse_scalar(parts[1]),
                        "beta": parse_scalar(parts[2]),
                        "nu": parse_scalar(parts[3]),
                        "n": int(parts[4]),
                        "rows": rows,
                    },
                )
            )
        elif kind == "final":
            final = (parse_scalar(parts[1]), parse_scalar(parts[2]), int(parts[3]))
        else:
            raise WeylredError(f"unknown script line {line!r}")
    if final is None:
        raise WeylredError("script file lacks a final line")
    return ReductionScript(table, tuple(steps), final)


def replay_table(S: ReductionScript) -> LocalDatumTable:
    """Deterministic table-level replay of a parsed script."""
    sim = S.initial_table
    for step in S.steps:
        d = step.data
        if step.kind == "permute":
            from .lattice import _permute_leg, _permute_row

            if d["class"] == 0:
                sim = _permute_row(sim, d["leg"] - 1, d["order"])
            else:
                sim = _permute_leg(sim, d["class"] - 1, d["leg"] - 1, d["order"])
        elif step.kind == "add":
            rj = next(
                i for i, row in enumerate(sim.rows) if row.point == d["point"]
            )
            sim = t_add(sim, rj, d["f"])
        elif step.kind == "euler_indexed":
            ci, lj, bk = d["class"] - 1, d["leg"] - 1, d["block"] - 1
            cls = sim.classes[ci]
            leg = cls.legs[lj]
            sim, _ = t_euler_generic(
                sim, cls.alpha, leg.beta, d["nu"] - ParamRat.one()
            )
        elif step.kind == "euler":
            sim, _ = t_euler_generic(
                sim, d["alpha"], d["beta"], d["nu"] - ParamRat.one()
            )
        elif step.kind == "euler_at":
            sim, _ = t_euler_generic(sim, d["alpha"], d["beta"], d["f"])
        elif step.kind == "collapse":
            from .datum import trivial_power_table

            sim = trivial_power_table(d["alpha"], d["beta"], d["n"])
        elif step.kind == "expand":
            raise WeylredError("expand steps replay symbolically only")
        else:
            raise WeylredError(f"cannot replay step {step.kind}")
    return sim
