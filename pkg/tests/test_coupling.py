import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cohfluct import fixtures as fx
from cohfluct.coupling import (EXACT, FLOOR, Coupling, canonical_coupling, condition_residuals,
                               explicit_coupling, feasibility_lp, marginal_w, mix,
                               random_valid_coupling)
from cohfluct.errors import GridError, InconclusiveError, ValidationError

from conftest import prob_vectors

LN2 = math.log(2)


def test_canonical_half_to_pure():
    c = fx.half_to_pure()
    assert c.F == 1
    assert c.table[0, 0, 2] == 0.5 and c.table[1, 0, 2] == 0.5
    assert c.table.sum() == 1.0
    pw = marginal_w(c)
    assert pw.at(1) == 1.0
    assert pw.mean_w() == pytest.approx(LN2, abs=1e-15)


def test_canonical_identity():
    c = canonical_coupling([0.25] * 4, [0.25] * 4, 2)
    assert c.F == 0 and marginal_w(c).at(0) == pytest.approx(1.0)


def test_canonical_on_equal_nonflat_states_is_not_trivial():
    # the product construction moves battery charge even when p = q
    c = canonical_coupling([0.5, 0.25, 0.25], [0.5, 0.25, 0.25], 2)
    assert c.residuals.worst < 1e-12
    # pairs with p_i = q_j: (1/2)(1/2) + 4 (1/4)(1/4)
    assert marginal_w(c).at(0) == pytest.approx(0.5)


def test_canonical_d4_grid_values():
    c = fx.canonical_d4()
    # f for i = 0..3 is log2((1/4)/p_i) = (-1, 0, +1, +1) for every j
    for i, f in enumerate((-1, 0, 1, 1)):
        assert np.count_nonzero(c.table[i]) == 4
        assert np.all(c.table[i, :, f + c.F] > 0)
    pw = marginal_w(c)
    assert (pw.at(-1), pw.at(0), pw.at(1)) == pytest.approx((0.5, 0.25, 0.25), abs=1e-15)
    assert pw.w[0] == -LN2


def test_canonical_rejects_off_grid():
    with pytest.raises(GridError) as err:
        canonical_coupling([1 / 3, 2 / 3], [0.5, 0.5], 2)
    assert (0, 0) in err.value.offending


def test_canonical_u3_grid():
    # ratio 3/2 sits on the u=3 grid
    c = canonical_coupling([0.6, 0.4], [0.6, 0.4], 3)
    assert c.residuals.worst < 1e-12


def test_breathing_residuals_and_marginal():
    c = fx.breathing()
    assert c.residuals.worst < 1e-12
    pw = marginal_w(c)
    assert pw.at(1) == pytest.approx(1 / 3) and pw.at(-1) == pytest.approx(2 / 3)


def test_empty_table_is_maximally_violating():
    c = explicit_coupling([0.5, 0.5], [0.5, 0.5], [], 2)
    assert c.residuals.r1 == 1.0


def test_canonical_reentered_explicitly():
    c = fx.canonical_d4()
    again = explicit_coupling(c.p, c.q, c.records(), 2, F=c.F)
    assert np.array_equal(again.table, c.table)
    assert again.residuals == c.residuals


def test_single_sided_support_violates_condition_two():
    p, q = [0.5, 0.25, 0.25], [0.5, 0.5]
    entries = [(i, j, -1, pi) for i, pi in enumerate(p) for j in range(2)]
    c = explicit_coupling(p, q, entries, 2)
    assert c.residuals.r1 < 1e-15 and c.residuals.r3 < 1e-15
    # condition 2 row i sums to 2 p_i e^{-ln 2} = p_i, worst at p_i = 1/4
    assert c.residuals.r2 == pytest.approx(0.75)


@pytest.mark.parametrize("entries, fragment", [
    ([(0, 0, 0, -0.1)], "negative"),
    ([(2, 0, 0, 0.1)], "i=2"),
    ([(0, 5, 0, 0.1)], "j=5"),
    ([(0, 1, 0, 0.1)], "supp"),
    ([(0, 0, 0.5, 0.1)], "integer"),
])
def test_explicit_validation(entries, fragment):
    with pytest.raises(ValidationError, match=fragment):
        explicit_coupling([0.5, 0.5], [1.0, 0.0], entries, 2)


def test_coupling_type_guards():
    with pytest.raises(ValidationError):
        Coupling(fx.breathing().p, fx.breathing().q, np.zeros((2, 2, 2)), 2)
    with pytest.raises(ValidationError):
        Coupling(fx.breathing().p, fx.breathing().q, np.zeros((2, 2, 1)), 2, mode="bogus")


def test_mix_examples():
    c = fx.breathing()
    assert np.array_equal(mix([c], [1.0]).table, c.table)
    canon = canonical_coupling([0.5, 0.5], [0.5, 0.5], 2)
    m = mix([canon, c], [0.5, 0.5])
    assert m.residuals.worst < 1e-12 and m.F == 1
    with pytest.raises(ValidationError):
        mix([c, fx.half_to_pure()], [0.5, 0.5])
    with pytest.raises(ValidationError):
        mix([c, c], [0.7, 0.7])


def test_feasibility_examples():
    ok, witness = feasibility_lp([0.5, 0.25, 0.125, 0.125], [0.25] * 4, 1, 2)
    assert ok and witness.residuals.worst < 1e-8
    ok, witness = feasibility_lp(**{k: v for k, v in fx.LP_EXAMPLE.items()}, F=1)
    assert not ok and witness is None
    ok, witness = feasibility_lp([0.3, 0.7], [0.3, 0.7], 0, 2)
    assert ok and np.allclose(witness.table[:, :, 0].sum(axis=1), 1.0)


def test_lp_example_feasible_with_full_grid():
    # allowing f = +1 as well restores feasibility (the canonical coupling uses it)
    ok, _ = feasibility_lp(fx.LP_EXAMPLE["p"], fx.LP_EXAMPLE["q"], 1, 2)
    assert ok


def test_feasibility_inconclusive_on_iteration_cap():
    with pytest.raises(InconclusiveError):
        feasibility_lp([0.4, 0.3, 0.2, 0.1], [0.25] * 4, 3, 2, maxiter=1)


def test_feasibility_guards():
    with pytest.raises(ValidationError):
        feasibility_lp([1.0], [1.0], 17, 2)
    with pytest.raises(ValidationError):
        feasibility_lp([1.0], [1.0], 1, 2, f_values=[2])


def test_feasibility_monotone_in_F(rng):
    for _ in range(10):
        p = rng.dirichlet(np.ones(3))
        q = rng.dirichlet(np.ones(3))
        p[0] += 1 - p.sum()
        q[0] += 1 - q.sum()
        prev = False
        for F in range(0, 5):
            ok, _ = feasibility_lp(p, q, F, 2)
            assert ok or not prev
            prev = ok


def test_random_valid_coupling(rng):
    c = random_valid_coupling([0.5, 0.25, 0.125, 0.125], [0.25] * 4, 2, 2, rng)
    assert c.residuals.worst < 1e-8 and c.F == 2


@given(prob_vectors(max_dim=6, allow_zeros=False), prob_vectors(max_dim=6),
       st.sampled_from([2, 3, 4]))
def test_floor_mode_invariants(p, q, u):
    c = canonical_coupling(p, q, u, FLOOR)
    res = condition_residuals(c)
    assert res.r1 < 1e-12 and res.r3 < 1e-12 and res.r2 == 0.0
    assert res.c2_kind == "inequality"
    assert res.c2_max <= 1 + 1e-12
    assert res.c2_min >= math.exp(-c.delta_w) - 1e-12


@given(st.lists(st.integers(0, 4), min_size=2, max_size=5),
       st.lists(st.integers(0, 4), min_size=2, max_size=5))
def test_dyadic_canonical_is_exact(ep, eq):
    p = np.array([2.0 ** -e for e in ep])
    q = np.array([2.0 ** -e for e in eq])
    p, q = p / p.sum(), q / q.sum()
    try:
        c = canonical_coupling(p, q, 2, EXACT)
    except (GridError, ValidationError):
        return
    assert c.residuals.worst < 1e-12
    # exponent w - ln q_j + ln p_i vanishes on the support
    i, j, k = np.nonzero(c.table)
    expo = (k - c.F) * c.delta_w - np.log(q[j]) + np.log(p[i])
    assert np.abs(expo).max() < 1e-9


@given(st.floats(0, 1))
def test_mixture_residuals_linear(t):
    a = fx.breathing()
    b = canonical_coupling([0.5, 0.5], [0.5, 0.5], 2).with_grid(1)
    m = mix([a, b], [t, 1 - t])
    assert m.residuals.worst <= max(a.residuals.worst, b.residuals.worst) + 1e-14 + 1e-15
    assert abs(marginal_w(m).total() - 1) <= m.residuals.r1 + 1e-15


def test_records_round_trip_dicts():
    c = fx.breathing()
    recs = c.records()
    assert set(recs[0]) == {"i", "j", "f", "value"}
    assert np.array_equal(explicit_coupling(c.p, c.q, recs, 2).table, c.table)
