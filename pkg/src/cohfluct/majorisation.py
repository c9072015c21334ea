"""Majorisation, bistochastic transport and Birkhoff decomposition.

Direction convention: a transformation ``psi -> phi`` is possible under
(strictly) incoherent operations iff ``p`` (diagonal of ``psi``) is majorised
by ``q`` (diagonal of ``phi``), witnessed by a bistochastic ``B`` with
``p = B q``.  The map therefore runs *backwards*, from the final diagonal to
the initial one, and every function here keeps that orientation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, MajorisationError, ValidationError
from .states import DiagonalState, as_state

BISTOCHASTIC_TOL = 1e-12


@dataclass(frozen=True)
class Bistochastic:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"bistochastic matrix must be square, got {m.shape}")
        if np.any(m < -BISTOCHASTIC_TOL):
            raise ValidationError("bistochastic matrix has negative entries")
        rows = np.abs(m.sum(axis=1) - 1).max()
        cols = np.abs(m.sum(axis=0) - 1).max()
        if rows > BISTOCHASTIC_TOL or cols > BISTOCHASTIC_TOL:
            raise ValidationError(
                f"not bistochastic: row error {rows:.3g}, column error {cols:.3g}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def as_bistochastic(b) -> Bistochastic:
    return b if isinstance(b, Bistochastic) else Bistochastic(b)


@dataclass(frozen=True)
class PermutationMixture:
    """Convex combination ``sum_m r_m Xi_m`` of permutation matrices.

    ``perms[m][i]`` is the column holding the 1 in row ``i`` of ``Xi_m``.
    """

    weights: tuple
    perms: tuple

    @property
    def dim(self) -> int:
        return len(self.perms[0]) if self.perms else 0

    def __len__(self):
        return len(self.weights)

    def matrix(self) -> np.ndarray:
        d = self.dim
        out = np.zeros((d, d))
        rows = np.arange(d)
        for r, perm in zip(self.weights, self.perms):
            out[rows, list(perm)] += r
        return out

    def dual(self) -> "PermutationMixture":
        """Mixture of the inverse permutations (the dual unital map)."""
        inv = tuple(tuple(int(k) for k in np.argsort(perm)) for perm in self.perms)
        return PermutationMixture(self.weights, inv)


def _sorted_desc(p):
    # stable descending sort: ties keep original index order
    order = np.argsort(-p, kind="stable")
    return order, p[order]


def majorisation_gap(p, q) -> np.ndarray:
    """Prefix sums of sorted ``q`` minus those of sorted ``p`` (>= 0 iff p ≺ q)."""
    p, q = as_state(p), as_state(q)
    if p.dim != q.dim:
        raise ValidationError(f"dimension mismatch: {p.dim} vs {q.dim}")
    _, ps = _sorted_desc(p.probs)
    _, qs = _sorted_desc(q.probs)
    return np.cumsum(qs) - np.cumsum(ps)


def is_majorised(p, q, tol: float = 1e-12) -> bool:
    """True iff ``p`` is majorised by ``q``."""
    gap = majorisation_gap(p, q)
    return bool(np.all(gap >= -tol) and abs(gap[-1]) <= tol)


def hlp_transport(p, q, tol: float = 1e-12) -> Bistochastic:
    """Bistochastic ``B`` with ``p = B q``, built from a chain of T-transforms.

    Both vectors are sorted in descending order; the sorted ``q`` is moved
    towards the sorted ``p`` by at most ``d - 1`` T-transforms
    ``lam * I + (1 - lam) * swap(j, k)``, each of which fixes at least one more
    coordinate.  The sorting permutations are composed back in at the end.
    """
    p, q = as_state(p), as_state(q)
    gap = majorisation_gap(p, q)
    bad = np.flatnonzero(gap < -tol)
    if bad.size:
        k = int(bad[0])
        raise MajorisationError(
            f"p is not majorised by q: prefix {k + 1} has gap {gap[k]:.3g}", k)

    d = p.dim
    op, ps = _sorted_desc(p.probs)
    oq, qs = _sorted_desc(q.probs)
    y = qs.copy()
    T = np.eye(d)
    step_tol = 1e-15
    for _ in range(d - 1):
        diff = y - ps
        # largest j with y_j > p_j, then smallest k > j with y_k < p_k
        js = np.flatnonzero(diff > step_tol)
        if js.size == 0:
            break
        j = int(js[-1])
        ks = np.flatnonzero(diff[j + 1:] < -step_tol)
        if ks.size == 0:
            break
        k = j + 1 + int(ks[0])
        delta = min(diff[j], -diff[k])
        spread = y[j] - y[k]
        t = delta / spread
        step = np.eye(d)
        step[[j, k], [j, k]] = 1 - t
        step[[j, k], [k, j]] = t
        y = step @ y
        T = step @ T

    # p = Pp^T T Pq q, where (Pq q)[a] = q[oq[a]]
    Pq = np.zeros((d, d))
    Pq[np.arange(d), oq] = 1
    Pp = np.zeros((d, d))
    Pp[np.arange(d), op] = 1
    B = Pp.T @ T @ Pq
    err = np.abs(B @ q.probs - p.probs).max()
    if err > max(tol, 1e-12):
        raise DegeneracyError(f"transport residual {err:.3g} above tolerance")
    return Bistochastic(B)


def _augment(u, adj, match_col, seen):
    for v in adj[u]:
        if not seen[v]:
            seen[v] = True
            if match_col[v] < 0 or _augment(match_col[v], adj, match_col, seen):
                match_col[v] = u
                return True
    return False


def _has_perfect_matching(rows, cols, support) -> bool:
    """Kuhn's augmenting-path test on the sub-graph ``rows x cols``."""
    col_index = {c: k for k, c in enumerate(cols)}
    adj = [[col_index[c] for c in cols if support[r, c]] for r in rows]
    match_col = [-1] * len(cols)
    for u in range(len(rows)):
        if not _augment(u, adj, match_col, [False] * len(cols)):
            return False
    return True


def lexicographic_matching(support: np.ndarray):
    """Lexicographically smallest perfect matching of a boolean support, or None."""
    d = support.shape[0]
    if not _has_perfect_matching(list(range(d)), list(range(d)), support):
        return None
    perm = []
    free = list(range(d))
    for r in range(d):
        for c in free:
            if not support[r, c]:
                continue
            rest = [x for x in free if x != c]
            if _has_perfect_matching(list(range(r + 1, d)), rest, support):
                perm.append(c)
                free = rest
                break
        else:  # pragma: no cover - excluded by the initial existence test
            return None
    return tuple(perm)


def birkhoff(B, tol: float = 1e-13) -> PermutationMixture:
    """Birkhoff–von Neumann decomposition by repeated matching and peeling."""
    B = as_bistochastic(B)
    resid = B.entries.copy()
    d = B.dim
    rows = np.arange(d)
    weights, perms = [], []
    while resid.max() > tol:
        perm = lexicographic_matching(resid > tol)
        if perm is None:
            raise DegeneracyError(
                f"no perfect matching with residual max {resid.max():.3g}; tol too tight")
        r = float(resid[rows, list(perm)].min())
        resid[rows, list(perm)] -= r
        weights.append(r)
        perms.append(perm)
        if len(weights) > d * d:
            raise DegeneracyError("decomposition did not terminate")
    return PermutationMixture(tuple(weights), tuple(perms))


def apply_transport(B, v) -> DiagonalState:
    B = as_bistochastic(B)
    v = as_state(v)
    if B.dim != v.dim:
        raise ValidationError(f"dimension mismatch: {B.dim} vs {v.dim}")
    out = B.entries @ v.probs
    return DiagonalState(np.clip(out, 0.0, None))


def dual(B) -> Bistochastic:
    """Diagonal action of the dual map: the transpose."""
    return Bistochastic(as_bistochastic(B).entries.T)
