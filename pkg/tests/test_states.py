import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cohfluct.errors import ValidationError
from cohfluct.states import (DiagonalState, c_rel_pure, diagonal_rank, is_uniform_on_support,
                             max_coherent, renyi_entropy, shannon_entropy)

from conftest import prob_vectors


def test_shannon_examples():
    assert shannon_entropy([1.0, 0.0]) == 0.0
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)
    # independent oracle: (1/2) ln 2 + (1/4) ln 4 + 2 (1/8) ln 8 = 1.75 ln 2
    assert shannon_entropy([0.5, 0.25, 0.125, 0.125]) == pytest.approx(1.75 * math.log(2), abs=1e-15)
    assert shannon_entropy([0.5, 0.25, 0.125, 0.125]) == pytest.approx(1.213008, abs=1e-6)


def test_c_rel_pure_examples():
    assert c_rel_pure(max_coherent(3)) == pytest.approx(math.log(3), abs=1e-15)
    assert c_rel_pure([1.0, 0.0, 0.0]) == 0.0
    assert c_rel_pure([0.5, 0.25, 0.125, 0.125]) == shannon_entropy([0.5, 0.25, 0.125, 0.125])


def test_diagonal_rank_examples():
    assert diagonal_rank([0.5, 0.5, 0, 0]) == 2
    assert diagonal_rank([0.5, 0.25, 0.25, 0]) == 3
    assert diagonal_rank(max_coherent(4)) == 4
    with pytest.raises(ValidationError):
        diagonal_rank([1.0], tol=-1)


def test_renyi_examples():
    for a in (0.3, 2.0, 7.5):
        assert renyi_entropy(max_coherent(5), a) == pytest.approx(math.log(5), abs=1e-12)
    assert renyi_entropy([0.5, 0.5], 2) == pytest.approx(math.log(2), abs=1e-15)
    assert renyi_entropy([1.0, 0.0], 2) == 0.0
    assert renyi_entropy([0.3, 0.7], 1) == shannon_entropy([0.3, 0.7])
    assert renyi_entropy([0.3, 0.7], 0) == 0.0


def test_renyi_negative_alpha_ignores_zero_entries():
    # only the support enters: (1/2, 1/2, 0) behaves like (1/2, 1/2)
    assert renyi_entropy([0.5, 0.5, 0.0], -2) == pytest.approx(renyi_entropy([0.5, 0.5], -2))
    assert math.isfinite(renyi_entropy([0.9, 0.1, 0.0], -3))


def test_max_coherent():
    assert np.array_equal(max_coherent(2).probs, [0.5, 0.5])
    assert np.array_equal(max_coherent(4).probs, [0.25] * 4)
    with pytest.raises(ValidationError):
        max_coherent(0)


@pytest.mark.parametrize("bad, fragment", [
    ([0.5, 0.48], "sum="), ([1.5, -0.5], "negative"), ([], "empty"), ([float("nan"), 1], "non-finite"),
])
def test_validation(bad, fragment):
    with pytest.raises(ValidationError, match=fragment):
        DiagonalState(bad)


def test_state_is_immutable_and_indexable():
    s = DiagonalState([0.25, 0.75], label="x")
    assert s.dim == len(s) == 2 and s[1] == 0.75 and list(s) == [0.25, 0.75]
    with pytest.raises(ValueError):
        s.probs[0] = 1.0
    assert list(s.support()) == [0, 1]


def test_entropy_of_uniform_up_to_64():
    for d in range(1, 65):
        assert abs(shannon_entropy(max_coherent(d)) - math.log(d)) < 1e-12


def test_uniform_on_support():
    assert is_uniform_on_support([0.5, 0.5, 0.0])
    assert not is_uniform_on_support([0.5, 0.3, 0.2])


@given(prob_vectors(allow_zeros=False))
def test_renyi_tends_to_shannon(p):
    h = shannon_entropy(p)
    for a in (1 - 1e-6, 1 + 1e-6):
        assert abs(renyi_entropy(p, a) - h) < 1e-5


@given(prob_vectors(), st.randoms(use_true_random=False))
def test_c_rel_permutation_invariant(p, r):
    perm = list(range(p.size))
    r.shuffle(perm)
    assert abs(c_rel_pure(p) - c_rel_pure(p[perm])) < 1e-12


@given(prob_vectors())
def test_entropy_bounds(p):
    h = shannon_entropy(p)
    assert -1e-15 <= h <= math.log(diagonal_rank(p)) + 1e-12
