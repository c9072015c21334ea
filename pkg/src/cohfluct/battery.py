"""Coherence battery in collapsed level form.

A battery with ``n`` cells has levels ``x = 0..n``; level ``x`` holds ``x``
charged cells (``u``-dimensional maximally coherent) and ``n - x`` discharged
ones (``u - 1``-dimensional).  Its dephased state restricted to level ``x`` is
uniform on ``m_x = u**x * (u-1)**(n-x)`` basis elements, so a battery is fully
described by the occupation profile ``alpha`` over levels and the log
multiplicities.  Multiplicities are never formed as integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, WraparoundError

__all__ = [
    "Battery", "UniformWindow", "TruncatedGaussian", "coherence_quantum",
    "new_battery", "level_coherence", "log_multiplicity", "log_multiplicities",
    "uniformity_epsilon", "shift_alpha", "support_range",
]


def coherence_quantum(u: int) -> float:
    """Level spacing ``ln(u / (u - 1))`` in nats."""
    _check_u(u)
    return math.log(u) - math.log(u - 1)


def _check_u(u):
    if int(u) != u or u < 2:
        raise ValidationError(f"u must be an integer >= 2, got {u!r}")


def _check_level(n, x):
    if int(n) != n or n < 0:
        raise ValidationError(f"n must be a nonnegative integer, got {n!r}")
    if int(x) != x or not 0 <= x <= n:
        raise ValidationError(f"level {x!r} outside [0, {n}]")


def level_coherence(u: int, n: int, x: int) -> float:
    """Relative entropy of coherence of the level-``x`` eigenstate."""
    _check_u(u)
    _check_level(n, x)
    return x * math.log(u) + (n - x) * math.log(u - 1)


def log_multiplicity(u: int, n: int, x: int) -> float:
    """``ln m_x`` with ``m_x`` the support size of level ``x``.

    Numerically identical to :func:`level_coherence`, because the level
    eigenstate is maximally coherent on exactly that support.
    """
    return level_coherence(u, n, x)


def log_multiplicities(u: int, n: int) -> np.ndarray:
    _check_u(u)
    x = np.arange(n + 1)
    return x * math.log(u) + (n - x) * math.log(u - 1)


@dataclass(frozen=True)
class UniformWindow:
    lo: int
    hi: int

    def weights(self, n):
        if not (0 <= self.lo <= self.hi <= n):
            raise ValidationError(f"window [{self.lo}, {self.hi}] outside [0, {n}]")
        a = np.zeros(n + 1)
        a[self.lo:self.hi + 1] = 1.0
        return a


@dataclass(frozen=True)
class TruncatedGaussian:
    """Gaussian profile restricted to ``[lo, hi]`` (default: all levels)."""

    center: float
    sigma: float
    lo: int | None = None
    hi: int | None = None

    def weights(self, n):
        if self.sigma <= 0:
            raise ValidationError(f"sigma must be > 0, got {self.sigma}")
        lo = 0 if self.lo is None else self.lo
        hi = n if self.hi is None else self.hi
        if not (0 <= lo <= hi <= n):
            raise ValidationError(f"window [{lo}, {hi}] outside [0, {n}]")
        x = np.arange(n + 1)
        a = np.exp(-0.5 * ((x - self.center) / self.sigma) ** 2)
        a[:lo] = 0.0
        a[hi + 1:] = 0.0
        return a


@dataclass(frozen=True)
class Battery:
    u: int
    n: int
    alpha: np.ndarray
    delta_w: float

    def __post_init__(self):
        a = np.array(self.alpha, dtype=float)
        if a.shape != (self.n + 1,):
            raise ValidationError(f"alpha must have n+1={self.n + 1} entries")
        if np.any(a < 0) or abs(a.sum() - 1) > 1e-12:
            raise ValidationError("alpha must be a probability vector over levels")
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @property
    def log_mult(self) -> np.ndarray:
        return log_multiplicities(self.u, self.n)

    def support(self, tol=0.0):
        return np.flatnonzero(self.alpha > tol)


def new_battery(u: int, n: int, profile) -> Battery:
    _check_u(u)
    if int(n) != n or n < 0:
        raise ValidationError(f"n must be a nonnegative integer, got {n!r}")
    n = int(n)
    w = profile.weights(n)
    total = w.sum()
    if total <= 0:
        raise ValidationError("profile has no mass on [0, n]")
    return Battery(int(u), n, w / total, coherence_quantum(u))


def support_range(b: Battery):
    s = b.support()
    return int(s[0]), int(s[-1])


def _l1_direct(alpha, y):
    # sum_x |alpha_x - alpha_{x+y}|, out-of-range entries read as 0
    n1 = alpha.size
    total = 0.0
    for x in range(-abs(y), n1 + abs(y)):
        a = alpha[x] if 0 <= x < n1 else 0.0
        b = alpha[x + y] if 0 <= x + y < n1 else 0.0
        total += abs(a - b)
    return total


def uniformity_epsilon(b: Battery, f_max: int) -> float:
    """Smallest ``eps`` with ``sum_x |a_x - a_{x+y}| <= |y| sqrt(8 eps)`` for
    every ``1 <= |y| <= f_max``."""
    if f_max < 1:
        raise ValidationError("f_max must be >= 1")
    worst = max(_l1_direct(b.alpha, y) / y for y in range(1, int(f_max) + 1))
    return worst ** 2 / 8.0


def shift_alpha(b: Battery, f: int) -> Battery:
    """Raise (``f > 0``) or lower the whole profile by ``f`` levels."""
    if f == 0:
        return b
    lo, hi = support_range(b)
    if lo + f < 0 or hi + f > b.n:
        raise WraparoundError(
            f"shift by {f} moves support [{lo}, {hi}] outside [0, {b.n}]")
    a = np.zeros_like(b.alpha)
    a[lo + f:hi + f + 1] = b.alpha[lo:hi + 1]
    return Battery(b.u, b.n, a, b.delta_w)
