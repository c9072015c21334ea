"""Dense full-label cross-check of the collapsed protocol machinery.

The battery's dephased support is enumerated label by label: level ``x``
owns the product set ``{0..u-1}^x x {u..2u-2}^(n-x)`` of cell labels, so
``m_x = u^x (u-1)^(n-x)`` labels.  The bistochastic matrix is materialised
on (system index, label) pairs directly from the coupling table, including
the uniform completion of the exterior columns, and the forward and reverse
statistics are recomputed with dense linear algebra.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, asdict

import numpy as np

from .coupling import Coupling
from .errors import SizeCapError, ValidationError
from .protocol import (build_joint_states, build_transition, forward_protocol,
                       make_window, reverse_protocol, verify_transport, window_battery)

MAX_DENSE_DIM = 2048


@dataclass(frozen=True)
class OracleReport:
    dim: int
    row_sum_error: float
    col_sum_error: float
    min_entry: float
    transport_error_dense: float
    transport_error_collapsed: float
    psi_entry_mismatch: float
    forward_mismatch: float
    reverse_mismatch: float
    exterior_columns: int
    tolerance: float = 1e-12

    @property
    def passed(self) -> bool:
        return max(self.row_sum_error, self.col_sum_error, self.transport_error_dense,
                   self.transport_error_collapsed, self.psi_entry_mismatch,
                   self.forward_mismatch, self.reverse_mismatch,
                   -self.min_entry) <= self.tolerance

    def as_dict(self):
        out = asdict(self)
        out["passed"] = self.passed
        return out


def battery_labels(u: int, n: int):
    """Cell-label tuples grouped by level, in level order."""
    charged = range(u)
    discharged = range(u, 2 * u - 1)
    return [list(itertools.product(*([charged] * x + [discharged] * (n - x))))
            for x in range(n + 1)]


def dense_transition(c: Coupling, u: int, n: int):
    """Dense ``G`` over (system index, battery label) plus bookkeeping.

    Returns ``(G, level, sys_index, mult, window)`` where ``level[k]`` and
    ``sys_index[k]`` describe row/column ``k``.
    """
    w = make_window(n, c)
    labels = battery_labels(u, n)
    mult = np.array([len(lv) for lv in labels])
    d = max(c.p.dim, c.q.dim)
    M = int(mult.sum())
    D = d * M
    if D > MAX_DENSE_DIM:
        raise SizeCapError(f"dense dimension {D} exceeds cap {MAX_DENSE_DIM}")

    level_of_label = np.concatenate([np.full(m, x) for x, m in enumerate(mult)])
    level = np.tile(level_of_label, d)
    sys_index = np.repeat(np.arange(d), M)

    # P(i, f | j) on the square system space
    cond = np.zeros((d, d, c.table.shape[2]))
    cond[:c.p.dim, :c.q.dim] = c.table
    F = c.F
    q = np.zeros(d)
    q[:c.q.dim] = c.q.probs

    in_window = (level >= w.lo) & (level <= w.hi) & (q[sys_index] > 0)
    G = np.zeros((D, D))
    for col in np.flatnonzero(in_window):
        j, xp = sys_index[col], level[col]
        shift = xp - level
        ok = np.abs(shift) <= F
        G[ok, col] = cond[sys_index[ok], j, shift[ok] + F] / mult[level[ok]]
    slack = 1.0 - G.sum(axis=1)
    exterior = np.flatnonzero(~in_window)
    if exterior.size:
        G[:, exterior] = (slack / exterior.size)[:, None]
    return G, level, sys_index, mult, w, in_window


def _level_aggregator(level, sys_index, d, n):
    # L[k, (i, x)] = 1 when element k has system index i and level x
    L = np.zeros((level.size, d * (n + 1)))
    L[np.arange(level.size), sys_index * (n + 1) + level] = 1.0
    return L


def full_label_oracle(c: Coupling, u: int, n: int, tol: float = 1e-12) -> OracleReport:
    """Compare the collapsed construction with an explicit dense one."""
    if c.u != u:
        raise ValidationError("u differs from the coupling's u")
    G, level, sys_index, mult, w, in_window = dense_transition(c, u, n)
    d = max(c.p.dim, c.q.dim)
    D = G.shape[0]
    q = np.zeros(d)
    q[:c.q.dim] = c.q.probs

    # dense joint states, element by element
    p_if = np.zeros((d, c.table.shape[2]))
    p_if[:c.p.dim] = (c.table * c.q.probs[None, :, None]).sum(axis=1)
    phi = np.where(in_window, q[sys_index] / ((w.N + 1) * mult[level]), 0.0)
    psi = np.zeros(D)
    for k, f in enumerate(c.f_values):
        hit = (level + f >= w.lo) & (level + f <= w.hi)
        psi += np.where(hit, p_if[sys_index, k], 0.0)
    psi /= (w.N + 1) * mult[level]

    transport_dense = float(np.abs(G @ phi - psi).max())

    # collapsed side
    Gc = build_transition(c, u, w)
    psi_c, phi_c = build_joint_states(c, u, w)
    transport_collapsed = verify_transport(Gc, phi_c, psi_c)
    psi_mismatch = float(np.abs(psi_c.entries[sys_index, level] - psi).max())

    # aggregate to levels: Q(i,x|j,x') = sum_{z in x, z' in x'} G / m_{x'}
    L = _level_aggregator(level, sys_index, d, n)
    agg = (L.T @ G @ L).reshape(d, n + 1, d, n + 1)
    Q = agg / mult[None, None, None, :]
    # dual map acts as the transpose: Qrev(j,x'|i,x) = sum G^T / m_x
    aggT = (L.T @ G.T @ L).reshape(d, n + 1, d, n + 1)
    Qrev = aggT / mult[None, None, None, :]

    fwd_battery = window_battery(u, w)
    rev_battery = window_battery(u, w, inner=True)
    F = c.F
    fwd = np.zeros((d, d, 2 * F + 1))
    for k, f in enumerate(c.f_values):
        for xp in range(n + 1):
            if fwd_battery.alpha[xp] and 0 <= xp - f <= n:
                fwd[:, :, k] += fwd_battery.alpha[xp] * Q[:, xp - f, :, xp]
    rev = np.zeros((d, d, 2 * F + 1))                 # [j, i, g + F]
    for k, f in enumerate(c.f_values):
        for xs in range(n + 1):
            if rev_battery.alpha[xs] and 0 <= xs + f <= n:
                rev[:, :, F - f] += rev_battery.alpha[xs] * Qrev[:, xs + f, :, xs]

    fwd_c = forward_protocol(Gc, fwd_battery)
    rev_c = reverse_protocol(Gc, rev_battery)
    # conditionals on j outside supp(q) are undefined on the collapsed side
    js = c.q.support()
    fwd_mismatch = float(np.abs(fwd[:c.p.dim, js] - fwd_c.table[:, js]).max())
    rev_mismatch = float(np.abs(rev - rev_c.table).max())

    return OracleReport(
        dim=D,
        row_sum_error=float(np.abs(G.sum(axis=1) - 1).max()),
        col_sum_error=float(np.abs(G.sum(axis=0) - 1).max()),
        min_entry=float(G.min()),
        transport_error_dense=transport_dense,
        transport_error_collapsed=transport_collapsed,
        psi_entry_mismatch=psi_mismatch,
        forward_mismatch=fwd_mismatch,
        reverse_mismatch=rev_mismatch,
        exterior_columns=int((~in_window).sum()),
        tolerance=tol,
    )
