"""Protocol machinery on the collapsed (system index, battery level) space.

Everything is indexed by system index and battery level ``x``; a quantity
attached to a single basis element of level ``x`` is recovered by dividing
level masses by ``m_x``.  The window ``S = [f_max, n - f_max]`` (width
``N + 1`` with ``N = n - 2 f_max``) carries the final battery state, so every
shift by a realised ``f`` stays inside ``[0, n]``.

The block transition stores the window part of the bistochastic matrix,
``P(i, x | j, x') = sum_f P(i, f | j) [x' - x = f]`` for ``x'`` in ``S`` and
``j`` in supp(q); on basis elements this is ``P(i, x | j, x') / m_x``.  The
remaining ("exterior") columns are filled uniformly with each row's slack,
which is kept symbolic: the completion is described by the per-row slack and
the log of the number of exterior columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from .battery import Battery, UniformWindow, TruncatedGaussian, log_multiplicities, new_battery
from .coupling import Coupling, ConditionResiduals, Distribution, EXACT
from .errors import ConditionViolation, ValidationError, WraparoundError
from .states import DiagonalState, as_state, max_coherent


@dataclass(frozen=True)
class WindowSpec:
    n: int
    f_max: int

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError(
                f"n={self.n} too small for f_max={self.f_max}: need n >= {2 * self.f_max + 1}")

    @property
    def N(self) -> int:
        return self.n - 2 * self.f_max

    @property
    def lo(self) -> int:
        return self.f_max

    @property
    def hi(self) -> int:
        return self.n - self.f_max

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def indicator(self) -> np.ndarray:
        out = np.zeros(self.n + 1, dtype=bool)
        out[self.lo:self.hi + 1] = True
        return out

    def inner(self) -> "WindowSpec":
        """Reverse-protocol window ``S'`` of width ``N - 2 f_max + 1``."""
        if self.N - 2 * self.f_max < 1:
            raise ValidationError(
                f"inner window empty: N'={self.N - 2 * self.f_max} for n={self.n}")
        return WindowSpec(self.n, 2 * self.f_max)


def make_window(n: int, c: Coupling) -> WindowSpec:
    return WindowSpec(int(n), c.f_max)


def minimum_n(c: Coupling) -> int:
    return 2 * c.f_max + 1


@dataclass(frozen=True)
class CollapsedState:
    """Diagonal of a joint system-battery state in collapsed form.

    ``mass[i, x]`` is the total probability on system index ``i`` and battery
    level ``x``; each of the ``m_x`` basis elements of that level carries
    ``mass[i, x] / m_x``.
    """

    mass: np.ndarray
    log_mult: np.ndarray

    @property
    def entries(self) -> np.ndarray:
        return self.mass * np.exp(-self.log_mult)[None, :]

    def total(self) -> float:
        """Multiplicity-weighted sum of the per-element entries."""
        return float((self.entries * np.exp(self.log_mult)[None, :]).sum())

    def system_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=1)


def _pad(c: Coupling):
    """Coupling table on a square ``d x d`` system space (zero padded)."""
    d = max(c.p.dim, c.q.dim)
    t = np.zeros((d, d, c.table.shape[2]))
    t[:c.p.dim, :c.q.dim] = c.table
    q = np.zeros(d)
    q[:c.q.dim] = c.q.probs
    return d, t, q


def build_joint_states(c: Coupling, u: int, w: WindowSpec):
    """Collapsed diagonals of the sequence states ``(Psi_N, Phi_N)``.

    ``Phi_N`` is ``q`` times a battery uniform on the window; ``Psi_N`` has
    level mass ``sum_f p_{i,f} [x + f in S] / (N + 1)`` with
    ``p_{i,f} = sum_j P(i, f | j) q_j``.
    """
    if c.f_max > w.f_max or u != c.u:
        raise ValidationError("window does not match coupling")
    d, t, q = _pad(c)
    logm = log_multiplicities(u, w.n)
    ind = w.indicator()
    p_if = (t * q[None, :, None]).sum(axis=1)       # (d, 2F+1)
    psi = np.zeros((d, w.n + 1))
    for k, f in enumerate(c.f_values):
        if not p_if[:, k].any():
            continue
        xs = np.arange(w.n + 1)
        hit = (xs + f >= 0) & (xs + f <= w.n)
        shifted = np.zeros(w.n + 1, dtype=bool)
        shifted[hit] = ind[xs[hit] + f]
        psi += np.outer(p_if[:, k], shifted)
    psi /= (w.N + 1)
    phi = np.outer(q, ind.astype(float)) / (w.N + 1)
    return CollapsedState(psi, logm), CollapsedState(phi, logm)


@dataclass(frozen=True)
class BlockTransition:
    """Window blocks of the bistochastic ``G_N`` plus its symbolic completion."""

    coupling: Coupling
    window: WindowSpec
    u: int
    blocks: np.ndarray         # [i, x, j, x'] collapsed P(i, x | j, x')
    log_mult: np.ndarray
    row_mass: np.ndarray       # [i, x]
    log_exterior: float        # log of the number of exterior columns (-inf if none)

    @property
    def d(self) -> int:
        return self.blocks.shape[0]

    @property
    def delta_w(self) -> float:
        return self.coupling.delta_w

    @property
    def row_slack(self) -> np.ndarray:
        return 1.0 - self.row_mass

    def column_sums(self) -> np.ndarray:
        """Collapsed column sums over window columns ``(j in supp q, x' in S)``."""
        sums = self.blocks.sum(axis=(0, 1))
        js = self.coupling.q.support()
        return sums[np.ix_(js, self.window.levels)]

    def completion_value(self) -> np.ndarray:
        """Per-element value of the uniform completion for each row ``(i, x)``."""
        if self.log_exterior == -math.inf:
            return np.zeros_like(self.row_mass)
        return self.row_slack * math.exp(-self.log_exterior)

    def exterior_column_sum(self) -> float:
        """Common column sum of every exterior column, evaluated in log space.

        Equals ``sum_{i,x} m_x slack(i, x) / (#exterior)``, which must be 1.
        With no exterior columns the total slack must vanish instead, and the
        total slack is returned.
        """
        slack = self.row_slack
        if self.log_exterior == -math.inf:
            return float(np.abs(slack).max())
        scale = np.exp(self.log_mult - self.log_exterior)
        return float((slack * scale[None, :]).sum())


def _log_exterior(d, d_q, logm, window):
    # (#rows) - (#window columns) = d * sum_x m_x - d_q * sum_{x in S} m_x
    ind = window.indicator()
    terms = []
    if ind.sum() < ind.size:
        terms.append(math.log(d) + logsumexp(logm[~ind]))
    if d > d_q:
        terms.append(math.log(d - d_q) + logsumexp(logm[ind]))
    return float(logsumexp(terms)) if terms else -math.inf


def build_transition(c: Coupling, u: int, w: WindowSpec, tol: float = 1e-9) -> BlockTransition:
    if u != c.u:
        raise ValidationError(f"u={u} differs from coupling u={c.u}")
    if c.f_max > w.f_max:
        raise ValidationError("window narrower than the coupling's fluctuations")
    res = c.residuals
    if res.r1 > tol or res.r2 > tol:
        raise ConditionViolation(
            f"coupling violates conditions 1/2 (r1={res.r1:.3g}, r2={res.r2:.3g})")
    d, t, _ = _pad(c)
    n = w.n
    logm = log_multiplicities(u, n)
    blocks = np.zeros((d, n + 1, d, n + 1))
    js = c.q.support()
    for k, f in enumerate(c.f_values):
        if not t[:, :, k].any():
            continue
        for xp in w.levels:
            blocks[:, xp - f, js, xp] += t[:, js, k]

    # row mass: sum_{j, x'} exp((x' - x) dw) P(i, x | j, x')
    # only shifts x' - x = f on the grid are occupied, so exp stays bounded
    row_mass = np.zeros((d, n + 1))
    for f in c.f_values:
        lo, hi = max(0, -f), min(n, n - f)
        if lo > hi:
            continue
        xs = np.arange(lo, hi + 1)
        row_mass[:, xs] += math.exp(f * c.delta_w) * blocks[:, xs, :, xs + f].sum(axis=2).T
    if row_mass.max() > 1 + tol:
        raise ConditionViolation(
            f"row mass {row_mass.max():.17g} exceeds 1: condition 2 violated")
    log_ext = _log_exterior(d, js.size, logm, w)
    return BlockTransition(c, w, u, blocks, logm, row_mass, log_ext)


def verify_transport(G: BlockTransition, phiN: CollapsedState, psiN: CollapsedState,
                     tol: float | None = None) -> float:
    """Largest level-mass error of ``G Phi_N`` against ``Psi_N``.

    Only window columns carry ``Phi_N`` mass, so the completion never enters.
    """
    image = np.einsum("ixjy,jy->ix", G.blocks, phiN.mass)
    return float(np.abs(image - psiN.mass).max())


def _check_support(b: Battery, lo, hi, what):
    s = b.support()
    if s.size and (s[0] < lo or s[-1] > hi):
        raise WraparoundError(
            f"battery support [{s[0]}, {s[-1]}] escapes {what} [{lo}, {hi}]")


def _check_battery(G, b):
    if b.n != G.window.n or b.u != G.u:
        raise ValidationError("battery (u, n) does not match the transition")


def forward_protocol(G: BlockTransition, b: Battery) -> Coupling:
    """Fluctuation statistics of the measure-transform-measure protocol.

    ``P(i, f | j) = sum_{x'} alpha_{x'} Q(i, x' - f | j, x')`` where inside
    the window ``Q`` coincides with the collapsed block.
    """
    _check_battery(G, b)
    w = G.window
    _check_support(b, w.lo, w.hi, "window S")
    c = G.coupling
    out = np.zeros((G.d, G.d, c.table.shape[2]))
    for k, f in enumerate(c.f_values):
        for xp in b.support():
            if 0 <= xp - f <= w.n:
                out[:, :, k] += b.alpha[xp] * G.blocks[:, xp - f, :, xp]
    table = out[:c.p.dim, :c.q.dim]
    return Coupling(c.p, c.q, table, c.u, c.mode)


@dataclass(frozen=True)
class ReverseCoupling:
    """``P_rev(j, g | i)`` with reverse battery change ``g * delta_w``.

    ``table[j, i, g + F]``; the forward change ``f`` maps to ``g = -f``.
    ``q_rev`` is the reverse final diagonal (index ``i``) and ``p_rev`` the
    reverse initial diagonal (index ``j``).
    """

    p_rev: np.ndarray
    q_rev: np.ndarray
    table: np.ndarray
    u: int
    delta_w: float

    @property
    def F(self) -> int:
        return self.table.shape[2] // 2

    @property
    def g_values(self) -> np.ndarray:
        return np.arange(-self.F, self.F + 1)

    def residuals(self) -> ConditionResiduals:
        t = self.table
        si, sj = self.q_rev > 0, self.p_rev > 0
        norm = t.sum(axis=(0, 2))[si]
        r1 = float(np.abs(norm - 1).max())
        c2 = (t * np.exp(self.g_values * self.delta_w)).sum(axis=(1, 2))[sj]
        r2 = float(np.abs(c2 - 1).max())
        marg = (t * self.q_rev[None, :, None]).sum(axis=(1, 2))
        r3 = float(np.abs(marg - self.p_rev).max())
        return ConditionResiduals(r1, r2, r3, "equality", float(c2.min()), float(c2.max()))

    def marginal(self) -> Distribution:
        """``P_rev(g) = sum_{i,j} P_rev(j, g | i) q_rev_i``."""
        prob = (self.table * self.q_rev[None, :, None]).sum(axis=(0, 1))
        return Distribution(self.g_values, prob, self.delta_w)


def default_reverse_final(c: Coupling) -> np.ndarray:
    """Maximally coherent state on supp(p), padded to the square system."""
    d = max(c.p.dim, c.q.dim)
    out = np.zeros(d)
    sp = c.p.support()
    out[sp] = 1.0 / sp.size
    return out


def reverse_protocol(G: BlockTransition, b: Battery, q_rev=None) -> ReverseCoupling:
    """Reverse statistics from the dual map.

    ``P_rev(j, -f | i) = sum_{x''} alpha_{x''} e^{f dw} Q(i, x'' | j, x'' + f)``;
    ``b`` must be supported on the inner window ``S'`` so every probed column
    ``x'' + f`` stays in ``S``.
    """
    _check_battery(G, b)
    inner = G.window.inner()
    _check_support(b, inner.lo, inner.hi, "inner window S'")
    c = G.coupling
    d = G.d
    F = c.F
    out = np.zeros((d, d, 2 * F + 1))         # [j, i, g + F]
    for k, f in enumerate(c.f_values):
        scale = math.exp(f * c.delta_w)
        for xs in b.support():
            if not 0 <= xs + f <= G.window.n:
                continue
            out[:, :, F - f] += b.alpha[xs] * scale * G.blocks[:, xs, :, xs + f].T
    qr = default_reverse_final(c) if q_rev is None else np.asarray(q_rev, float)
    if qr.shape != (d,):
        raise ValidationError(f"q_rev must have {d} entries")
    p_rev = (out * qr[None, :, None]).sum(axis=(1, 2))
    return ReverseCoupling(p_rev, qr, out, c.u, c.delta_w)


def overlap_to_ideal(psiN: CollapsedState, p, w: WindowSpec):
    """Overlap of ``Psi_N`` with the product of ``p`` and a flat battery.

    Returns ``(overlap, bound)`` with ``bound = 1 / (1 + 2 f_max / (N + 1))``.
    """
    p = np.asarray(as_state(p).probs)
    pp = np.zeros(psiN.mass.shape[0])
    pp[:p.size] = p
    ov = float(np.sqrt(pp[:, None] / (w.n + 1) * psiN.mass).sum())
    bound = 1.0 / (1.0 + 2.0 * w.f_max / (w.N + 1))
    return ov, bound


def window_battery(u: int, w: WindowSpec, kind: str = "uniform_window",
                   sigma: float | None = None, inner: bool = False) -> Battery:
    """Battery centred on the (inner) window and supported inside it.

    The Gaussian default width is ``N / 8``.
    """
    win = w.inner() if inner else w
    if kind == "uniform_window":
        return new_battery(u, w.n, UniformWindow(win.lo, win.hi))
    if kind == "truncated_gaussian":
        s = w.N / 8 if sigma is None else sigma
        centre = (win.lo + win.hi) / 2
        return new_battery(u, w.n, TruncatedGaussian(centre, s, win.lo, win.hi))
    raise ValidationError(f"unknown profile kind {kind!r}")
