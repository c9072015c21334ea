"""Fluctuation statements about coherence changes, checked on a coupling.

Each check returns a :class:`TheoremReport`; ``holds`` is decided by the
relation and tolerance alone, so reports are plain data and reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import EXACT, Coupling, marginal_w
from .errors import PreconditionError, ValidationError
from .majorisation import is_majorised
from .protocol import ReverseCoupling
from .states import as_state, c_rel_pure, diagonal_rank, is_uniform_on_support, renyi_entropy

SUPPORT_TOL = 1e-12
EQUALS, LEQ, GEQ = "equals", "leq", "geq"


@dataclass(frozen=True)
class TheoremReport:
    name: str
    lhs: float
    rhs: float
    relation: str
    residual: float
    tolerance: float
    holds: bool
    extras: dict = field(default_factory=dict)

    def as_dict(self):
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "relation": self.relation, "residual": self.residual,
                "tolerance": self.tolerance, "holds": self.holds,
                "extras": dict(self.extras)}


def _report(name, lhs, rhs, relation, tol, residual=None, **extras):
    lhs, rhs = float(lhs), float(rhs)
    if relation == EQUALS:
        res = abs(lhs - rhs) if residual is None else residual
    elif relation == LEQ:
        res = max(0.0, lhs - rhs) if residual is None else residual
    else:
        res = max(0.0, rhs - lhs) if residual is None else residual
    return TheoremReport(name, lhs, rhs, relation, float(res), float(tol),
                         bool(res <= tol), extras)


def integral_ft(c: Coupling, tol: float = 1e-9) -> TheoremReport:
    """``< exp(w - ln q_j + ln p_i) > = 1`` over the joint distribution."""
    if c.mode != EXACT:
        raise PreconditionError("integral relation needs an exact-grid coupling")
    used = c.table.any(axis=(0, 1))
    ew = np.exp(c.f_values[used] * c.delta_w)
    lhs = (c.table[:, :, used] * ew * c.p.probs[:, None, None]).sum()
    return _report("integral_ft", lhs, 1.0, EQUALS, tol)


def second_law(c: Coupling, tol: float = 1e-9) -> TheoremReport:
    mean_w = marginal_w(c).mean_w()
    rhs = c_rel_pure(c.p) - c_rel_pure(c.q)
    return _report("second_law", mean_w, rhs, LEQ, tol, gap=rhs - mean_w)


def third_law(c: Coupling, tol: float = 1e-9) -> TheoremReport:
    """``sum_w e^w >= q_min / (d' p_min)``.

    The sum runs over the distinct realised values of ``w`` (``P(w) > 1e-12``);
    the sum over the whole grid is reported in ``extras["grid_sum"]``.
    """
    pw = marginal_w(c)
    supp = pw.support(SUPPORT_TOL)
    if supp.size == 0:
        raise PreconditionError("P(w) has empty support")
    lhs = float(np.exp(supp * c.delta_w).sum())
    p_min = c.p.probs[c.p.probs > SUPPORT_TOL].min()
    q_min = c.q.probs[c.q.probs > SUPPORT_TOL].min()
    d_final = diagonal_rank(c.q, SUPPORT_TOL)
    rhs = q_min / (d_final * p_min)
    with np.errstate(over="ignore"):
        grid_sum = float(np.exp(c.f_values * c.delta_w).sum())
    return _report("third_law", lhs, rhs, GEQ, tol, grid_sum=grid_sum,
                   support=[int(f) for f in supp], f_max=int(np.abs(supp).max()))


def _require_flat_final(c):
    if not is_uniform_on_support(c.q, SUPPORT_TOL):
        raise PreconditionError("final state is not maximally coherent on its support")


def jarzynski(c: Coupling, tol: float = 1e-9) -> TheoremReport:
    """``<e^w> = d / d'`` for a final state maximally coherent on its support.

    On a floor-discretised grid the relation degrades to ``<=``.
    """
    _require_flat_final(c)
    pw = marginal_w(c)
    on = pw.prob > 0
    lhs = float((pw.prob[on] * np.exp(pw.w[on])).sum())
    rhs = diagonal_rank(c.p, SUPPORT_TOL) / diagonal_rank(c.q, SUPPORT_TOL)
    relation = EQUALS if c.mode == EXACT else LEQ
    return _report("jarzynski", lhs, rhs, relation, tol)


def tail_bound(c: Coupling, r: float, tol: float = 1e-12) -> TheoremReport:
    """``P(w >= ln(d/d') + r) <= e^{-r}``."""
    if r <= 0:
        raise ValidationError("r must be > 0")
    _require_flat_final(c)
    pw = marginal_w(c)
    threshold = math.log(diagonal_rank(c.p, SUPPORT_TOL) / diagonal_rank(c.q, SUPPORT_TOL)) + r
    lhs = float(pw.prob[pw.w >= threshold - 1e-12].sum())
    return _report("tail_bound", lhs, math.exp(-r), LEQ, tol, r=float(r), threshold=threshold)


def crooks(forward: Coupling, reverse: ReverseCoupling, tol: float = 1e-10) -> TheoremReport:
    """``P(w) / P_rev(-w) = e^{-w} d / d'`` between forward and reverse runs.

    ``residual`` is ``max_w |P(w) e^w d'/d - P_rev(-w)|`` over the union of
    both supports.  ``lhs``/``rhs`` hold the ratio and its prediction at the
    smallest supported ``w``.
    """
    _require_flat_final(forward)
    d_final = diagonal_rank(forward.q, SUPPORT_TOL)
    d_init = diagonal_rank(forward.p, SUPPORT_TOL)
    qr = reverse.q_rev
    qs = qr[qr > SUPPORT_TOL]
    if qs.size != d_init or not np.all(np.abs(qs - 1.0 / d_init) <= SUPPORT_TOL):
        raise PreconditionError("reverse final state is not maximally coherent of rank d")

    # both marginals as functions of the forward change f
    pw = forward.table.sum(axis=(0, 1)) / d_final
    F = forward.F
    rev_by_g = reverse.table.sum(axis=(0, 1)) / d_init          # index g + F
    prev = rev_by_g[::-1]                                        # index f + F with g = -f
    fvals = forward.f_values
    w = fvals * forward.delta_w
    supported = (pw > SUPPORT_TOL) | (prev > SUPPORT_TOL)
    diff = np.zeros_like(pw)
    diff[supported] = np.abs(pw[supported] * np.exp(w[supported]) * d_final / d_init
                             - prev[supported])
    residual = float(diff[supported].max()) if supported.any() else 0.0

    k = int(np.flatnonzero(supported)[0]) if supported.any() else F
    ratio = pw[k] / prev[k] if prev[k] > 0 else math.inf
    predicted = math.exp(-w[k]) * d_init / d_final
    spot = {int(f): {"P": float(a), "P_rev": float(b)}
            for f, a, b in zip(fvals, pw, prev) if a > SUPPORT_TOL or b > SUPPORT_TOL}
    return _report("crooks", ratio, predicted, EQUALS, tol, residual=residual,
                   spot_w=float(w[k]), d=d_init, d_prime=d_final,
                   table={str(f): v for f, v in spot.items()})


def default_alpha_grid(points: int = 40, lo: float = 1e-2, hi: float = 50.0):
    half = np.geomspace(lo, hi, points // 2)
    grid = np.concatenate([-half[::-1], half])
    return grid[np.abs(grid - 1) > 1e-9]


def renyi_gaps(p, q, d: int, alpha_grid=None):
    """Per-alpha values ``(S_a(p) - ln d)/|a|`` and ``(S_a(q) - ln d)/|a|``."""
    grid = default_alpha_grid() if alpha_grid is None else np.asarray(alpha_grid, float)
    if np.any(grid == 0) or np.any(grid == 1):
        raise ValidationError("alpha grid must exclude 0 and 1")
    lp = np.array([(renyi_entropy(p, a) - math.log(d)) / abs(a) for a in grid])
    lq = np.array([(renyi_entropy(q, a) - math.log(d)) / abs(a) for a in grid])
    return grid, lp, lq


def renyi_catalytic(p, q, d: int, alpha_grid=None) -> bool:
    """Sampled check of the exact-catalysis Rényi conditions.

    Strict inequality is tested at every grid point only; this is a necessary
    condition sampler, not a proof over all real alpha.
    """
    _, lp, lq = renyi_gaps(p, q, d, alpha_grid)
    return bool(np.all(lp > lq))


@dataclass(frozen=True)
class CriterionComparison:
    majorised: bool
    entropy_ordered: bool
    c_rel_initial: float
    c_rel_final: float

    @property
    def disagree(self) -> bool:
        return self.majorised != self.entropy_ordered

    def as_dict(self):
        return {"majorised": self.majorised, "entropy_ordered": self.entropy_ordered,
                "c_rel_initial": self.c_rel_initial, "c_rel_final": self.c_rel_final,
                "disagree": self.disagree}


def entropy_vs_majorisation(p, q, tol: float = 1e-12) -> CriterionComparison:
    """Majorisation against the single-entropy ordering ``C(psi) >= C(phi)``.

    Majorisation is the actual convertibility criterion; for ``d >= 3`` the
    entropy ordering is strictly weaker and the two can disagree.
    """
    p, q = as_state(p), as_state(q)
    cp, cq = c_rel_pure(p), c_rel_pure(q)
    return CriterionComparison(is_majorised(p, q, tol), cp >= cq - tol, cp, cq)
