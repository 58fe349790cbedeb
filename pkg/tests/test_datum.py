"""Table-level transformation laws and the rigidity index."""

import random

import pytest

from weylred.classic import gauss, hermite, kummer
from weylred.datum import (
    LocalDatumTable,
    is_final,
    parse_table,
    render_table,
    rigidity_index,
    t_add,
    t_euler,
    t_euler_generic,
    t_laplace,
    t_laplace_inv,
    trivial_power_table,
)
from weylred.errors import Degenerate
from weylred.local import local_datum
from weylred.scalar import ParamRat
from weylred.weyl import WeylOperator, laplace, rad_power, reduced_rep


def p(name):
    return ParamRat.param(name)


def r(v):
    return ParamRat.const(v)


def same(T1, T2):
    return T1.canonical() == T2.canonical()


# -- rigidity index -----------------------------------------------------------


def test_rigidity_corpus():
    assert rigidity_index(local_datum(gauss())) == 2
    assert rigidity_index(local_datum(kummer())) == 2
    assert rigidity_index(local_datum(hermite())) == 2


def test_rigidity_trivial_power():
    assert rigidity_index(trivial_power_table(p("alpha"), p("beta"), 1)) == 2
    assert rigidity_index(trivial_power_table(p("alpha"), p("beta"), 3)) == 18


# -- additions ---------------------------------------------------------------


def test_t_add_matches_symbolic_kummer():
    T = local_datum(kummer())
    f = p("f")
    predicted = t_add(T, 0, f)
    symbolic = local_datum(rad_power(0, f, kummer()))
    assert same(predicted, symbolic)


def test_t_add_identity_and_inverse():
    T = local_datum(gauss())
    assert same(t_add(T, 0, r(0)), T)
    f = p("f")
    assert same(t_add(t_add(T, 1, f), 1, -f), T)


def test_t_add_moves_zero_block():
    T = local_datum(kummer())
    mu = T.rows[0].exponents.named()[0].value  # 1 - c
    T2 = t_add(T, 0, -mu)
    zero = [b for b in T2.rows[0].exponents.blocks if b.is_zero_block]
    assert zero and zero[0].mult == 1
    # the former zero block is now a named block at -mu
    named = T2.rows[0].exponents.named()
    assert any(b.value == -mu for b in named)


def test_t_add_new_point_matches_symbolic():
    # addition at an ordinary point creates a full chain row
    f = p("f")
    predicted_op = rad_power(2, f, kummer())
    T = local_datum(predicted_op)
    row = [row for row in T.rows if row.point == r(2)]
    assert row and row[0].exponents.named()[0].mult == 2
    assert row[0].exponents.named()[0].value == f


# -- block-targeted Euler ------------------------------------------------------


def test_t_euler_kummer_first_leg():
    T = local_datum(kummer())
    T2, order = t_euler(T, 0, 0, 0)  # class alpha=0, leg beta=0, block [a]
    assert order == 1
    # expected: table of x D + (c-a) - x
    expect = local_datum(
        WeylOperator.x() * WeylOperator.d()
        + WeylOperator.const(p("c") - p("a"))
        - WeylOperator.x()
    )
    assert same(T2, expect)


def test_t_euler_round_trip_surviving_block():
    # build a table with leg margin > 0, so the targeted block survives
    # with the transformed value 2 - nu; the inverse targets that value
    from weylred.weyl import euler

    T0 = local_datum(euler(2, p("g"), kummer()))
    T = t_add(T0, 0, p("f"))  # zero block becomes named: margin grows
    ci = T.find_class(r(0))
    cls = T.classes[ci]
    lj = next(i for i, leg in enumerate(cls.legs) if leg.beta == r(0))
    nu = cls.legs[lj].exponents.blocks[0].value
    T2, order2 = t_euler(T, ci, lj, 0)
    assert order2 > T.order - cls.legs[lj].exponents.blocks[0].mult
    leg2 = next(
        l for l in T2.classes[T2.find_class(r(0))].legs if l.beta == r(0)
    )
    assert any(b.value == r(2) - nu for b in leg2.exponents.blocks)
    T3, _ = t_euler_generic(T2, r(0), r(0), r(1) - nu)
    assert same(T3, T)


def test_t_euler_degenerate_guard():
    T = local_datum(
        WeylOperator.x() * WeylOperator.d()
        + WeylOperator.const(p("c") - p("a"))
        - WeylOperator.x()
    )
    with pytest.raises(Degenerate):
        t_euler(T, 0, 0, 0)


def test_t_euler_generic_phantom_leg_kummer():
    # E(2, g) on Kummer: order grows to 3, new leg at beta = 2
    from weylred.weyl import euler

    g = p("g")
    T = local_datum(kummer())
    predicted, order = t_euler_generic(T, r(0), r(2), g)
    assert order == 3
    symbolic = local_datum(euler(2, g, kummer()))
    assert same(predicted, symbolic)


def test_t_euler_generic_phantom_leg_hermite():
    from weylred.weyl import euler

    g = p("g")
    T = local_datum(hermite())
    predicted, order = t_euler_generic(T, r(0), r(2), g)
    assert order == 3
    symbolic = local_datum(euler(2, g, hermite()))
    assert same(predicted, symbolic)


def test_rigidity_invariant_under_table_moves():
    T = local_datum(kummer())
    f = p("f")
    assert rigidity_index(t_add(T, 0, f)) == rigidity_index(T)
    T2, _ = t_euler(T, 0, 0, 0)
    assert rigidity_index(T2) == rigidity_index(T)
    assert rigidity_index(t_laplace(T)) == rigidity_index(T)


# -- Fourier-Laplace on tables ---------------------------------------------------


def test_t_laplace_kummer_matches_symbolic():
    T = local_datum(kummer())
    predicted = t_laplace(T)
    symbolic = local_datum(laplace(reduced_rep(kummer())))
    assert same(predicted, symbolic)
    assert predicted.order == 1


def test_t_laplace_round_trip():
    for op in (kummer(), gauss()):
        T = local_datum(op)
        assert same(t_laplace_inv(t_laplace(T)), T)
        assert same(t_laplace(t_laplace_inv(T)), T)


def test_t_laplace_fuchsian_creates_regular_point():
    T = local_datum(gauss())
    out = t_laplace(T)
    assert any(row.point.is_zero() for row in out.rows)


# -- final-form detection ------------------------------------------------------


def test_is_final_trivial_table():
    T = trivial_power_table(p("alpha"), p("beta"), 1)
    fin = is_final(T)
    assert fin and fin.collapsed and fin.n == 1


def test_is_final_reduced_kummer():
    T = local_datum(
        WeylOperator.x() * WeylOperator.d()
        + WeylOperator.const(p("c") - p("a"))
        - WeylOperator.x()
    )
    fin = is_final(T)
    assert fin and not fin.collapsed
    assert fin.alpha == r(0) and fin.beta == r(1) and fin.n == 1


def test_is_final_rejects_kummer():
    assert is_final(local_datum(kummer())) is None


# -- serialisation ---------------------------------------------------------------


def test_table_text_round_trip():
    for op in (gauss(), kummer(), hermite()):
        T = local_datum(op)
        text = render_table(T)
        assert same(parse_table(text), T)
        assert parse_table(render_table(parse_table(text))) == parse_table(text)
