"""Diagonal representation of pure states and their coherence.

A pure state is stored only through the probabilities of its diagonal in the
reference basis; phases never enter any convertibility question handled here.
All entropies are in nats.  (The distillable coherence in bits is
``c_rel_pure(p) / ln 2``; no separate helper is provided.)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

NORM_TOL = 1e-12


@dataclass(frozen=True)
class DiagonalState:
    """Probability vector of the diagonal coefficients of a pure state."""

    probs: np.ndarray
    label: str | None = None
    tol: float = field(default=NORM_TOL, repr=False, compare=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        if p.size == 0:
            raise ValidationError("probs: empty vector")
        if not np.all(np.isfinite(p)):
            raise ValidationError("probs: non-finite entry")
        if np.any(p < 0):
            raise ValidationError(f"probs: negative entry {p.min():.3g}")
        total = p.sum()
        if abs(total - 1.0) > self.tol:
            raise ValidationError(f"probs: sum={total:.17g}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def dim(self) -> int:
        return self.probs.size

    def __len__(self):
        return self.dim

    def __iter__(self):
        return iter(self.probs)

    def __getitem__(self, k):
        return self.probs[k]

    def support(self, tol: float = 0.0) -> np.ndarray:
        """Indices with probability strictly above ``tol``."""
        return np.flatnonzero(self.probs > tol)


def as_state(p, tol: float = NORM_TOL) -> DiagonalState:
    if isinstance(p, DiagonalState):
        return p
    return DiagonalState(p, tol=tol)


def _xlogx(p):
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log(p[nz])
    return out


def shannon_entropy(p) -> float:
    """Shannon entropy in nats, with ``0 ln 0 = 0``."""
    p = as_state(p).probs
    return float(max(0.0, -_xlogx(p).sum()))


def c_rel_pure(p) -> float:
    """Relative entropy of coherence of a pure state with diagonal ``p``.

    The von Neumann entropy of a pure state vanishes, so this reduces to the
    Shannon entropy of the dephased state.
    """
    return shannon_entropy(p)


def diagonal_rank(p, tol: float = 1e-12) -> int:
    if tol < 0:
        raise ValidationError("tol must be >= 0")
    return int(np.count_nonzero(as_state(p).probs > tol))


def renyi_entropy(p, alpha: float) -> float:
    """Signed Rényi entropy ``sgn(a) ln(sum p^a) / (1 - a)``.

    ``alpha == 1`` returns the Shannon entropy.  Zero entries are dropped
    before exponentiation for every ``alpha`` (they contribute nothing for
    ``alpha > 0`` and would diverge otherwise), so for ``alpha <= 0`` the
    value only depends on the support.
    """
    p = as_state(p).probs
    if alpha == 1:
        return shannon_entropy(p)
    s = p[p > 0]
    if alpha == 0:
        # sgn(0) = 0
        return 0.0
    # ln(sum p^a) evaluated stably in log space
    log_sum = np.logaddexp.reduce(alpha * np.log(s))
    return float(np.sign(alpha) * log_sum / (1.0 - alpha))


def max_coherent(d: int) -> DiagonalState:
    """Diagonal of the uniform superposition over ``d`` basis states."""
    if int(d) != d or d < 1:
        raise ValidationError(f"d must be a positive integer, got {d!r}")
    d = int(d)
    return DiagonalState(np.full(d, 1.0 / d), label=f"max_coherent({d})")


def is_uniform_on_support(p, tol: float = 1e-12) -> bool:
    p = as_state(p).probs
    s = p[p > tol]
    return bool(np.all(np.abs(s - 1.0 / s.size) <= tol))
