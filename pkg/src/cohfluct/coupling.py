"""Conditional fluctuation distributions ``P(i, w | j)``.

A coupling ties the initial diagonal ``p`` (index ``i``), the final diagonal
``q`` (index ``j``) and the battery change ``w = f * delta_w`` stored on the
integer grid ``f in [-F, F]``.  A battery-assisted transformation exists iff
there is a coupling satisfying

1. ``sum_{i,w} P(i,w|j) = 1``            for every ``j`` in supp(q),
2. ``sum_{j,w} P(i,w|j) e^w = 1``        for every ``i`` in supp(p),
3. ``sum_{j,w} P(i,w|j) q_j = p_i``      for every ``i``.

Conditionals for ``j`` outside supp(q) are undefined and kept at zero.
Condition 2 is imposed on supp(p) only: rows with ``p_i = 0`` carry no mass
by condition 3 and cannot reach 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linprog

from .battery import coherence_quantum
from .errors import GridError, InconclusiveError, ValidationError
from .states import DiagonalState, as_state

EXACT = "exact"
FLOOR = "floor"
MODES = (EXACT, FLOOR)
GRID_TOL = 1e-9
LP_MAX_DIM = 16
LP_MAX_F = 16


@dataclass(frozen=True)
class ConditionResiduals:
    """Worst-case violations of the three conditions.

    In floor mode condition 2 only holds as ``<= 1``; ``r2`` then measures
    the excess above 1 and ``c2_kind`` is ``"inequality"``.
    """

    r1: float
    r2: float
    r3: float
    c2_kind: str = "equality"
    c2_min: float = 1.0
    c2_max: float = 1.0

    @property
    def worst(self) -> float:
        return max(self.r1, self.r2, self.r3)

    def as_dict(self):
        return {"r1": self.r1, "r2": self.r2, "r3": self.r3,
                "condition2": self.c2_kind,
                "condition2_min": self.c2_min, "condition2_max": self.c2_max}


@dataclass(frozen=True)
class Distribution:
    """A distribution of battery changes on the integer grid."""

    f: np.ndarray
    prob: np.ndarray
    delta_w: float

    @property
    def w(self) -> np.ndarray:
        return self.f * self.delta_w

    def support(self, tol: float = 1e-12) -> np.ndarray:
        return self.f[self.prob > tol]

    def at(self, f: int) -> float:
        k = np.flatnonzero(self.f == f)
        return float(self.prob[k[0]]) if k.size else 0.0

    def total(self) -> float:
        return float(self.prob.sum())

    def mean_w(self) -> float:
        return float((self.prob * self.w).sum())

    def rows(self):
        """``(f, w_nats, probability)`` triples, one per grid point."""
        return [(int(f), float(f * self.delta_w), float(p))
                for f, p in zip(self.f, self.prob)]


@dataclass(frozen=True)
class Coupling:
    p: DiagonalState
    q: DiagonalState
    table: np.ndarray  # (dim p, dim q, 2F+1), last axis is f + F
    u: int
    mode: str = EXACT

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        t = np.array(self.table, dtype=float)
        if t.ndim != 3 or t.shape[:2] != (self.p.dim, self.q.dim) or t.shape[2] % 2 != 1:
            raise ValidationError(f"table shape {t.shape} does not match marginals")
        if np.any(t < 0):
            raise ValidationError("coupling entries must be >= 0")
        off = self.q.probs <= 0
        if np.any(t[:, off, :] != 0):
            raise ValidationError("entries given for j outside supp(q)")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def delta_w(self) -> float:
        return coherence_quantum(self.u)

    @property
    def F(self) -> int:
        return self.table.shape[2] // 2

    @property
    def f_values(self) -> np.ndarray:
        return np.arange(-self.F, self.F + 1)

    @property
    def f_max(self) -> int:
        used = np.flatnonzero(self.table.sum(axis=(0, 1)) > 0)
        return int(np.abs(self.f_values[used]).max()) if used.size else 0

    @cached_property
    def residuals(self) -> ConditionResiduals:
        return condition_residuals(self)

    def joint(self) -> np.ndarray:
        """``P(i, j, w) = P(i, w | j) q_j``."""
        return self.table * self.q.probs[None, :, None]

    def with_grid(self, F: int) -> "Coupling":
        """Same coupling embedded in the wider grid ``[-F, F]``."""
        if F < self.F:
            raise ValidationError(f"cannot shrink grid from {self.F} to {F}")
        pad = F - self.F
        t = np.pad(self.table, ((0, 0), (0, 0), (pad, pad)))
        return Coupling(self.p, self.q, t, self.u, self.mode)

    def records(self):
        """Nonzero entries as ``{"i", "j", "f", "value"}`` records."""
        out = []
        for i, j, k in zip(*np.nonzero(self.table)):
            out.append({"i": int(i), "j": int(j), "f": int(k - self.F),
                        "value": float(self.table[i, j, k])})
        return out


def _snap(r):
    k = round(r)
    return k if abs(r - k) <= GRID_TOL else None


def canonical_coupling(p, q, u: int, mode: str = EXACT) -> Coupling:
    """Product coupling ``P(i, w | j) = p_i`` at ``w = ln(q_j / p_i)``.

    In ``exact`` mode every log-ratio must sit on the grid; in ``floor``
    mode it is rounded down to ``floor(w / delta_w)``.
    """
    p, q = as_state(p), as_state(q)
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    dw = coherence_quantum(u)
    cells, offending = [], []
    for i in p.support():
        for j in q.support():
            r = (math.log(q[j]) - math.log(p[i])) / dw
            k = _snap(r)
            if k is None:
                if mode == EXACT:
                    offending.append((int(i), int(j)))
                    continue
                k = math.floor(r)
            cells.append((int(i), int(j), int(k), float(p[i])))
    if offending:
        raise GridError(f"log-ratios off the grid for pairs {offending}", offending)
    F = max((abs(k) for _, _, k, _ in cells), default=0)
    table = np.zeros((p.dim, q.dim, 2 * F + 1))
    for i, j, k, v in cells:
        table[i, j, k + F] += v
    return Coupling(p, q, table, int(u), mode)


def _record(e):
    if isinstance(e, dict):
        return e["i"], e["j"], e["f"], e["value"]
    return tuple(e)


def explicit_coupling(p, q, entries, u: int, mode: str = EXACT, F: int | None = None) -> Coupling:
    """Coupling from ``(i, j, f, value)`` entries (tuples or dicts).

    Nothing is enforced about the three conditions: residuals are computed and
    reported so infeasible tables can be studied.
    """
    p, q = as_state(p), as_state(q)
    recs = [_record(e) for e in entries]
    for i, j, f, v in recs:
        if v < 0:
            raise ValidationError(f"entry ({i},{j},{f}) has negative value {v}")
        if int(i) != i or not 0 <= i < p.dim:
            raise ValidationError(f"i={i} out of range [0, {p.dim})")
        if int(j) != j or not 0 <= j < q.dim:
            raise ValidationError(f"j={j} out of range [0, {q.dim})")
        if int(f) != f:
            raise ValidationError(f"f={f} is not an integer")
        if q[int(j)] <= 0:
            raise ValidationError(f"j={j} lies outside supp(q)")
    need = max((abs(int(f)) for _, _, f, _ in recs), default=0)
    F = need if F is None else int(F)
    if F < need:
        raise ValidationError(f"grid half-width F={F} smaller than max |f|={need}")
    table = np.zeros((p.dim, q.dim, 2 * F + 1))
    for i, j, f, v in recs:
        table[int(i), int(j), int(f) + F] += float(v)
    return Coupling(p, q, table, int(u), mode)


def condition_residuals(c: Coupling) -> ConditionResiduals:
    t = c.table
    sp, sq = c.p.probs > 0, c.q.probs > 0
    col = t.sum(axis=(0, 2))[sq]
    r1 = float(np.abs(col - 1).max()) if col.size else 1.0

    # only occupied grid columns, so unused extreme f never overflow exp
    used = t.any(axis=(0, 1))
    weights = np.exp(c.f_values[used] * c.delta_w)
    c2 = (t[:, :, used] * weights).sum(axis=(1, 2))[sp]
    if c.mode == EXACT:
        r2 = float(np.abs(c2 - 1).max())
        kind = "equality"
    else:
        r2 = float(max(0.0, (c2 - 1).max()))
        kind = "inequality"

    marg = (t * c.q.probs[None, :, None]).sum(axis=(1, 2))
    r3 = float(np.abs(marg - c.p.probs).max())
    return ConditionResiduals(r1, r2, r3, kind, float(c2.min()), float(c2.max()))


def marginal_w(c: Coupling) -> Distribution:
    """``P(w) = sum_{i,j} P(i, w | j) q_j``."""
    return Distribution(c.f_values, c.joint().sum(axis=(0, 1)), c.delta_w)


def mix(couplings, weights) -> Coupling:
    """Convex combination of couplings sharing marginals, ``u`` and mode."""
    couplings = list(couplings)
    w = np.asarray(weights, dtype=float)
    if not couplings or w.shape != (len(couplings),):
        raise ValidationError("need one weight per coupling")
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise ValidationError("weights must form a probability vector")
    ref = couplings[0]
    for c in couplings[1:]:
        if (c.u != ref.u or c.mode != ref.mode
                or c.p.dim != ref.p.dim or c.q.dim != ref.q.dim
                or not np.array_equal(c.p.probs, ref.p.probs)
                or not np.array_equal(c.q.probs, ref.q.probs)):
            raise ValidationError("couplings to mix must share p, q, u and mode")
    F = max(c.F for c in couplings)
    table = sum(wk * c.with_grid(F).table for wk, c in zip(w, couplings))
    return Coupling(ref.p, ref.q, table, ref.u, ref.mode)


def _lp_system(p, q, f_values, u):
    dw = coherence_quantum(u)
    js = q.support()
    nf = len(f_values)
    shape = (p.dim, js.size, nf)
    nvar = int(np.prod(shape))
    idx = np.arange(nvar).reshape(shape)
    rows, b = [], []
    for jj in range(js.size):                       # condition 1
        a = np.zeros(nvar)
        a[idx[:, jj, :].ravel()] = 1.0
        rows.append(a)
        b.append(1.0)
    ew = np.exp(np.asarray(f_values) * dw)
    for i in p.support():                            # condition 2
        a = np.zeros(nvar)
        a[idx[i].ravel()] = np.tile(ew, js.size)
        rows.append(a)
        b.append(1.0)
    for i in range(p.dim):                           # condition 3
        a = np.zeros(nvar)
        a[idx[i].ravel()] = np.repeat(q.probs[js], nf)
        rows.append(a)
        b.append(p[i])
    return np.array(rows), np.array(b), js, shape


def _solve_lp(p, q, f_values, u, cost, maxiter):
    A, b, js, shape = _lp_system(p, q, f_values, u)
    c = np.zeros(A.shape[1]) if cost is None else np.asarray(cost, float)
    res = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs",
                  options={"maxiter": maxiter, "primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    return res, js, shape


def feasibility_lp(p, q, F: int, u: int, f_values=None, maxiter: int = 10_000,
                   cost=None):
    """Decide whether a coupling on the grid ``[-F, F]`` satisfies all conditions.

    ``f_values`` restricts the allowed battery changes to a subset of the
    grid.  Returns ``(feasible, witness)``; the witness is ``None`` when
    infeasible.  Raises :class:`InconclusiveError` when the solver stops
    early or returns a witness whose residuals exceed ``1e-8``.
    """
    p, q = as_state(p), as_state(q)
    if max(p.dim, q.dim) > LP_MAX_DIM or F > LP_MAX_F:
        raise ValidationError(f"LP limited to d <= {LP_MAX_DIM}, F <= {LP_MAX_F}")
    if F < 0:
        raise ValidationError("F must be >= 0")
    grid = np.arange(-F, F + 1)
    fv = grid if f_values is None else np.array(sorted(set(int(f) for f in f_values)))
    if fv.size == 0 or np.any(np.abs(fv) > F):
        raise ValidationError(f"f_values must be a nonempty subset of [-{F}, {F}]")
    res, js, shape = _solve_lp(p, q, fv, u, cost, maxiter)
    if res.status == 2:
        return False, None
    if res.status != 0:
        raise InconclusiveError(f"LP stopped with status {res.status}: {res.message}")
    x = np.clip(res.x.reshape(shape), 0.0, None)
    x[x < 1e-14] = 0.0
    table = np.zeros((p.dim, q.dim, 2 * F + 1))
    for jj, j in enumerate(js):
        table[:, j, fv + F] = x[:, jj, :]
    witness = Coupling(p, q, table, int(u), EXACT)
    if witness.residuals.worst >= 1e-8:
        raise InconclusiveError(
            f"LP witness residual {witness.residuals.worst:.3g} above 1e-8")
    return True, witness


def random_valid_coupling(p, q, F: int, u: int, rng) -> Coupling:
    """A vertex of the feasible polytope picked by a random linear objective."""
    p, q = as_state(p), as_state(q)
    nvar = p.dim * q.support().size * (2 * F + 1)
    ok, witness = feasibility_lp(p, q, F, u, cost=rng.standard_normal(nvar))
    if not ok:
        raise ValidationError("no valid coupling on this grid")
    return witness
