"""End-to-end reduction, script inversion, versal additions, limits."""

import pytest

from weylred.classic import gauss, hermite, kummer, trivial_power
from weylred.engine import (
    ReductionScript,
    VersalSpec,
    deconfluence,
    invert_script,
    limit_at,
    order_drop_iff,
    parse_script,
    reduce,
    render_script,
    replay,
    replay_table,
    verify_round_trip,
    versal_ad,
)
from weylred.errors import NotRigid, ParameterClash, PoleAtLimit
from weylred.expr import parse_operator
from weylred.datum import rigidity_index
from weylred.local import local_datum
from weylred.scalar import CoefPoly, ParamRat
from weylred.weyl import TwistSpec, WeylOperator, ade, equiv, euler, rad_power

X = WeylOperator.x()
D = WeylOperator.d()


def p(name):
    return ParamRat.param(name)


def r(v):
    return ParamRat.const(v)


def synthetic_order3_kummer():
    return euler(2, p("g"), kummer())


def synthetic_order3_hermite():
    return euler(2, p("g"), hermite())


HEUN_IDX0 = (
    "x*(x-1)*(x-3)*D^2 + (c*(x-1)*(x-3) + d*x*(x-3) + e*x*(x-1))*D"
    " + s*(c+d+e-1-s)*x + w"
)


# -- reduce ---------------------------------------------------------------


def test_reduce_kummer():
    script, trace = reduce(kummer())
    kinds = [s.kind for s in script.steps]
    assert kinds == ["euler", "collapse"]
    # the intermediate is the classical first-order form
    expect = X * D + WeylOperator.const(p("c") - p("a")) - X
    assert equiv(trace[1], expect)
    alpha, beta, n = script.final_form
    assert (alpha, beta, n) == (r(0), r(1), 1)
    assert equiv(trace[-1], trivial_power(0, 1, 1))


def test_reduce_hermite():
    script, trace = reduce(hermite())
    assert script.final_form == (r(1), r(0), 1)
    assert equiv(trace[-1], D - X)


def test_reduce_gauss():
    script, trace = reduce(gauss())
    eulers = [s for s in script.steps if s.kind == "euler"]
    assert len(eulers) == 1
    assert equiv(trace[-1], D)
    # the post-Euler operator matches the classical identity
    one = r(1)
    expect = (X - X * X) * D + WeylOperator.const(p("c") - p("b")) - (
        WeylOperator.const(p("a") - p("b") + one) * X
    )
    assert equiv(trace[1], expect)


def test_reduce_synthetic_order3():
    for P in (synthetic_order3_kummer(), synthetic_order3_hermite()):
        script, trace = reduce(P)
        assert trace[-1].order == script.final_form[2] == 1
        assert rigidity_index(script.initial_table) == 2


def test_reduce_not_rigid():
    P = parse_operator(HEUN_IDX0)
    T = local_datum(P)
    assert rigidity_index(T) == 0
    with pytest.raises(NotRigid) as exc:
        reduce(P)
    assert exc.value.certificate is not None


def test_euler_step_count_bounded_by_height():
    from weylred.lattice import alpha_of

    for P in (gauss(), kummer(), hermite()):
        script, _ = reduce(P)
        _, a = alpha_of(script.initial_table)
        eulers = [s for s in script.steps if s.kind == "euler"]
        assert len(eulers) <= a.height()


# -- inversion -----------------------------------------------------------------


def test_invert_script_corpus():
    for P in (gauss(), kummer(), hermite()):
        assert verify_round_trip(P)


def test_invert_script_synthetic():
    assert verify_round_trip(synthetic_order3_kummer())
    assert verify_round_trip(synthetic_order3_hermite())


def test_invert_empty_script():
    T = local_datum(trivial_power(1, 0, 1))
    S = ReductionScript(T, (), (r(1), r(0), 1))
    inv = invert_script(S)
    assert inv.steps == ()


def test_invert_twice_is_semantically_identity():
    script, _ = reduce(kummer())
    inv = invert_script(script)
    again = invert_script(inv)
    back = invert_script(again)
    assert again.semantically_equal(invert_script(invert_script(again)))
    # replaying the double inverse equals replaying the original inverse
    final = trivial_power(0, 1, 1)
    assert equiv(replay(back, final), replay(inv, final))


# -- versal additions and limits ---------------------------------------------


def test_versal_one_parameter():
    lam = p("lam")
    got = versal_ad(VersalSpec(("a1",), (lam,)), D)
    a1 = p("a1")
    expect = WeylOperator(
        [CoefPoly.const(lam), CoefPoly.linear(r(1), -a1)]
    )  # (1 - a1 x) D + lam
    assert got == expect


def test_versal_matches_plain_addition():
    lam = p("lam")
    a1 = p("a1")
    got = versal_ad(VersalSpec(("a1",), (lam,)), kummer())
    expect = rad_power(r(1) / a1, lam / a1, kummer())
    assert equiv(got, expect)


def test_versal_two_parameters():
    l1, l2 = p("l1"), p("l2")
    got = versal_ad(VersalSpec(("a1", "a2"), (l1, l2)), D)
    a1, a2 = p("a1"), p("a2")
    d1 = CoefPoly.linear(r(1), -a1)
    d2 = CoefPoly.linear(r(1), -a2)
    num = CoefPoly.const(l1) * d2 + CoefPoly.linear(r(0), l2)
    expect = WeylOperator([num, d1 * d2])
    assert got == expect


def test_versal_product_of_additions_identity():
    # the closed kernel form equals the composite of two additions
    l1, l2 = p("l1"), p("l2")
    a1, a2 = p("a1"), p("a2")
    e1 = l1 / a1 + l2 / (a1 * (a1 - a2))
    e2 = l2 / (a2 * (a2 - a1))
    P = kummer()
    via_product = rad_power(r(1) / a2, e2, rad_power(r(1) / a1, e1, P))
    via_kernel = versal_ad(VersalSpec(("a1", "a2"), (l1, l2)), P)
    assert equiv(via_product, via_kernel)


def test_versal_zero_weight():
    from weylred.weyl import reduced_rep

    got = versal_ad(VersalSpec(("a1",), (r(0),)), kummer())
    assert got == reduced_rep(kummer())


def test_versal_parameter_clash():
    with pytest.raises(ParameterClash):
        versal_ad(VersalSpec(("a",), (r(1),)), kummer())


def test_limit_one_parameter():
    lam = p("lam")
    fam = versal_ad(VersalSpec(("a1",), (lam,)), kummer())
    lim = limit_at(fam, [("a1", 0)])
    expect = ade(TwistSpec.of(0, -lam), kummer())
    assert equiv(lim, expect)


def test_limit_two_parameters():
    l1, l2 = p("l1"), p("l2")
    fam = versal_ad(VersalSpec(("a1", "a2"), (l1, l2)), D)
    lim = limit_at(fam, [("a1", 0), ("a2", 0)])
    assert lim == D + WeylOperator.const(l1) + WeylOperator.const(l2) * X


def test_limit_pole_detected():
    P = kummer().scale(ParamRat.one() / (p("a") - r(1)))
    with pytest.raises(PoleAtLimit):
        limit_at(P, [("a", 1)])


def test_deconfluence_kummer():
    script, _ = reduce(kummer())
    fsteps, family, minted = deconfluence(script)
    T = local_datum(family)
    # Fuchsian: single class alpha = 0, single leg beta = 0
    assert len(T.classes) == 1
    assert T.classes[0].alpha.is_zero()
    assert all(leg.beta.is_zero() for leg in T.classes[0].legs)
    assert rigidity_index(T) == 2
    lim = limit_at(family, [(m, 0) for m in minted])
    assert equiv(lim, kummer())


# -- order drop criterion ---------------------------------------------------


def test_order_drop_gauss_blocks():
    P = gauss()
    for k in range(2):
        predicted, observed = order_drop_iff(P, k)
        assert predicted is True and observed is True


def test_order_drop_negative_cases():
    f = p("f")
    P = rad_power(0, f, gauss())  # deg - ord = 1 = n_i
    T = local_datum(P)
    blocks = T.classes[0].legs[0].exponents.blocks
    for k in range(len(blocks)):
        predicted, observed = order_drop_iff(P, k)
        assert predicted is False and observed is False
    Q = rad_power(2, f, gauss())  # deg - ord = 2 > n_i
    for k in range(2):
        predicted, observed = order_drop_iff(Q, k)
        assert predicted is False and observed is False


# -- script files ----------------------------------------------------------------


def test_script_round_trip():
    script, _ = reduce(kummer())
    text = render_script(script)
    parsed = parse_script(text)
    assert render_script(parsed) == text
    assert parsed.final_form == script.final_form


def test_replay_table_matches_predictions():
    script, _ = reduce(kummer())
    parsed = parse_script(render_script(script))
    end = replay_table(parsed)
    assert end.canonical() == script.steps[-1].predicted_table.canonical()
