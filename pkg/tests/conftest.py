import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def prob_vectors(draw, min_dim=2, max_dim=8, allow_zeros=True):
    d = draw(st.integers(min_dim, max_dim))
    lo = 0.0 if allow_zeros else 1e-3
    raw = draw(st.lists(st.floats(lo, 1.0, allow_nan=False), min_size=d, max_size=d))
    v = np.array(raw) + (0.0 if allow_zeros else 1e-3)
    if v.sum() <= 0:
        v[0] = 1.0
    v = v / v.sum()
    # exact renormalisation so the 1e-12 validator always accepts
    v[np.argmax(v)] += 1.0 - v.sum()
    return v


def random_bistochastic(rng, d, terms=None):
    terms = terms or rng.integers(1, d * d + 1)
    w = rng.dirichlet(np.ones(terms))
    out = np.zeros((d, d))
    for wk in w:
        out[np.arange(d), rng.permutation(d)] += wk
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)
