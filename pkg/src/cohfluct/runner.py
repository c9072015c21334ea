"""Experiment pipeline behind the command line.

coupling -> window -> block transition -> forward / reverse protocols ->
theorem reports.  Functions return plain dictionaries plus an exit code and
write their files under ``cfg.out_dir``.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import theorems as th
from .battery import uniformity_epsilon
from .config import ExperimentConfig
from .coupling import EXACT, marginal_w, mix, random_valid_coupling
from .errors import CohFluctError, PreconditionError
from .oracle import full_label_oracle
from .protocol import (WindowSpec, build_joint_states, build_transition, forward_protocol,
                       overlap_to_ideal, reverse_protocol, verify_transport, window_battery)
from .report import DISTRIBUTION_COLUMNS, write_csv, write_distribution, write_json

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3
THEOREM_CHECKS = ("integral_ft", "second_law", "third_law", "jarzynski", "tail_bound")
PROTOCOL_CHECKS = ("transport", "overlap", "round_trip", "crooks")
SWEEP_COLUMNS = ("n", "N", "epsilon", "r1", "r2", "r3", "overlap", "bound",
                 "r2_bound", "r3_bound", "sigma", "status")
OVERLAP_SLACK = 1e-12


def _error(exc):
    return {"type": type(exc).__name__, "message": str(exc)}


def _theorem_reports(c, cfg, names, tol_of):
    """TheoremReports for ``names``; precondition failures come back as errors."""
    out = {}
    for name in names:
        try:
            if name == "integral_ft":
                out[name] = [th.integral_ft(c, tol_of(name))]
            elif name == "second_law":
                out[name] = [th.second_law(c, tol_of(name))]
            elif name == "third_law":
                out[name] = [th.third_law(c, tol_of(name))]
            elif name == "jarzynski":
                out[name] = [th.jarzynski(c, tol_of(name))]
            elif name == "tail_bound":
                out[name] = [th.tail_bound(c, r, tol_of(name)) for r in cfg.tail_r]
        except PreconditionError as exc:
            out[name] = exc
    return out


def _applicable(c, name):
    if name == "integral_ft":
        return c.mode == EXACT
    if name in ("jarzynski", "tail_bound", "crooks"):
        sq = c.q.probs[c.q.probs > 1e-12]
        return bool(np.all(np.abs(sq - sq[0]) <= 1e-12))
    return True


def _battery(cfg, w, inner=False, sigma=None):
    prof = cfg.alpha_profile
    s = prof.get("sigma") if sigma is None else sigma
    return window_battery(cfg.u, w, prof["kind"], s, inner=inner)


def _mixtures(c, cfg):
    """Theorem checks on random convex mixtures of ``c`` with LP vertices."""
    if c.mode != EXACT:
        return {"count": 0, "skipped": "mixtures need an exact-grid coupling", "all_hold": True}
    rng = np.random.default_rng(cfg.seed)
    F = max(c.F, 1)
    names = [n for n in THEOREM_CHECKS if _applicable(c, n)]
    failures = []
    for k in range(cfg.mixtures):
        other = random_valid_coupling(c.p, c.q, F, cfg.u, rng)
        t = float(rng.uniform())
        m = mix([c.with_grid(F), other], [t, 1.0 - t])
        for name, reps in _theorem_reports(m, cfg, names, cfg.tol).items():
            for rep in reps:
                if not rep.holds:
                    failures.append({"index": k, **rep.as_dict()})
    return {"count": cfg.mixtures, "seed": cfg.seed, "checks": names,
            "failures": failures, "all_hold": not failures}


def run_experiment(cfg: ExperimentConfig, checks=None):
    """Run the requested checks; returns ``(report, exit_code)`` and writes files.

    Writes ``report.json``, ``p_w.csv`` and ``p_rev_w.csv`` into ``cfg.out_dir``.
    """
    out = Path(cfg.out_dir)
    explicit = checks is not None or cfg.checks_explicit
    requested = tuple(checks) if checks is not None else cfg.checks
    try:
        report, code = _run(cfg, requested, explicit, out)
    except CohFluctError as exc:
        report = {"status": "error", "error": _error(exc)}
        code = EXIT_INTERNAL
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        report = {"status": "error", "error": _error(exc)}
        code = EXIT_INTERNAL
    write_json(out / "report.json", report)
    return report, code


def _run(cfg, requested, explicit, out):
    c = cfg.build_coupling()
    res = c.residuals
    results = {}
    skipped = {}
    theorems = []

    active = []
    for name in requested:
        if not explicit and not _applicable(c, name):
            skipped[name] = "precondition not met"
        else:
            active.append(name)

    if "conditions" in active:
        tol = cfg.tol("conditions")
        results["conditions"] = {"holds": res.worst <= tol, "tolerance": tol, **res.as_dict()}

    for name, reps in _theorem_reports(c, cfg, [n for n in active if n in THEOREM_CHECKS],
                                       cfg.tol).items():
        if isinstance(reps, Exception):
            results[name] = {"holds": False, "error": _error(reps)}
            continue
        theorems.extend(r.as_dict() for r in reps)
        results[name] = {"holds": all(r.holds for r in reps)}

    # protocol stage
    window = None
    proto = {}
    fwd = rev = None
    try:
        window = WindowSpec(cfg.n, c.f_max)
        G = build_transition(c, cfg.u, window)
        psi, phi = build_joint_states(c, cfg.u, window)
        b = _battery(cfg, window)
        fwd = forward_protocol(G, b)
        proto["transport_error"] = verify_transport(G, phi, psi)
        proto["round_trip_error"] = float(np.abs(fwd.table - c.table).max())
        proto["exterior_column_sum"] = G.exterior_column_sum()
        ov, bound = overlap_to_ideal(psi, c.p, window)
        proto["overlap"] = {"value": ov, "bound": bound, "holds": ov >= bound - OVERLAP_SLACK}
        try:
            rev = reverse_protocol(G, _battery(cfg, window, inner=True))
            proto["reverse_residuals"] = rev.residuals().as_dict()
        except CohFluctError as exc:
            proto["reverse_error"] = _error(exc)
    except CohFluctError as exc:
        proto["error"] = _error(exc)

    for name in (n for n in active if n in PROTOCOL_CHECKS):
        tol = cfg.tol(name)
        if name == "crooks":
            if rev is None:
                err = proto.get("reverse_error") or proto.get("error")
                results[name] = {"holds": False, "error": err}
                continue
            try:
                rep = th.crooks(c, rev, tol)
            except PreconditionError as exc:
                results[name] = {"holds": False, "error": _error(exc)}
                continue
            theorems.append(rep.as_dict())
            results[name] = {"holds": rep.holds, "residual": rep.residual}
            continue
        if "error" in proto:
            results[name] = {"holds": False, "error": proto["error"]}
        elif name == "transport":
            e = proto["transport_error"]
            results[name] = {"holds": e <= tol, "error_max": e, "tolerance": tol}
        elif name == "round_trip":
            e = proto["round_trip_error"]
            results[name] = {"holds": e <= tol, "error_max": e, "tolerance": tol}
        elif name == "overlap":
            results[name] = dict(proto["overlap"])

    oracle = None
    if "oracle" in active:
        try:
            rep = full_label_oracle(c, cfg.u, cfg.n, cfg.tol("oracle"))
            oracle = rep.as_dict()
            results["oracle"] = {"holds": rep.passed}
        except CohFluctError as exc:
            results["oracle"] = {"holds": False, "error": _error(exc)}

    mixtures = _mixtures(c, cfg) if cfg.mixtures else None

    ok = all(r["holds"] for r in results.values())
    if mixtures is not None:
        ok = ok and mixtures["all_hold"]

    write_distribution(out / "p_w.csv", marginal_w(c))
    if rev is not None:
        write_distribution(out / "p_rev_w.csv", rev.marginal())
    else:
        write_csv(out / "p_rev_w.csv", DISTRIBUTION_COLUMNS, [])

    report = {
        "status": "pass" if ok else "fail",
        "config": cfg.as_dict(),
        "coupling": {"mode": c.mode, "u": c.u, "delta_w": c.delta_w, "F": c.F,
                     "f_max": c.f_max, "entries": c.records()},
        "residuals": res.as_dict(),
        "window": None if window is None else
        {"n": window.n, "N": window.N, "f_max": window.f_max, "lo": window.lo, "hi": window.hi},
        "protocol": proto,
        "checks": results,
        "skipped": skipped,
        "theorems": theorems,
    }
    if oracle is not None:
        report["oracle"] = oracle
    if mixtures is not None:
        report["mixtures"] = mixtures
    return report, (EXIT_OK if ok else EXIT_FAIL)


def sweep_points(cfg: ExperimentConfig):
    """Per-point rows for the configured sweep, ordered by the swept parameter."""
    c = cfg.build_coupling()
    spec = cfg.sweep or {"n": [cfg.n, cfg.n, 1]}
    if "n" in spec:
        start, stop, step = spec["n"]
        points = [(n, None) for n in range(start, stop + 1, step)]
    else:
        points = [(cfg.n, s) for s in spec["sigma"]]
    rows = []
    for n, sigma in points:
        rows.append(_sweep_point(c, cfg, n, sigma))
    return rows


def _sweep_point(c, cfg, n, sigma):
    row = dict.fromkeys(SWEEP_COLUMNS, math.nan)
    row["n"] = n
    row["sigma"] = sigma if sigma is not None else cfg.alpha_profile.get("sigma", math.nan)
    try:
        w = WindowSpec(n, c.f_max)
        row["N"] = w.N
        G = build_transition(c, cfg.u, w)
        psi, _ = build_joint_states(c, cfg.u, w)
        if sigma is not None:
            b = window_battery(cfg.u, w, "truncated_gaussian", sigma)
        else:
            b = _battery(cfg, w)
            if cfg.alpha_profile["kind"] == "truncated_gaussian" and "sigma" not in cfg.alpha_profile:
                row["sigma"] = w.N / 8
        fm = max(c.f_max, 1)
        eps = uniformity_epsilon(b, fm)
        r = forward_protocol(G, b).residuals
        ov, bound = overlap_to_ideal(psi, c.p, w)
        row.update(epsilon=eps, r1=r.r1, r2=r.r2, r3=r.r3, overlap=ov, bound=bound,
                   r2_bound=math.sqrt(8 * eps) * fm * (fm + 1), r3_bound=eps / 2)
        tol = cfg.tol("conditions")
        good = (r.r1 <= tol and r.r2 <= row["r2_bound"] + tol
                and r.r3 <= row["r3_bound"] + tol and ov >= bound - OVERLAP_SLACK)
        row["status"] = "ok" if good else "fail"
    except CohFluctError as exc:
        row["status"] = f"error: {type(exc).__name__}: {exc}"
    return row


def run_sweep(cfg: ExperimentConfig):
    """Write ``sweep.csv``; exit code 0 iff every point passes."""
    rows = sweep_points(cfg)
    path = write_csv(Path(cfg.out_dir) / "sweep.csv", SWEEP_COLUMNS,
                     [[row[k] for k in SWEEP_COLUMNS] for row in rows])
    code = EXIT_OK if all(r["status"] == "ok" for r in rows) else EXIT_FAIL
    return rows, code, path


def run_oracle(cfg: ExperimentConfig):
    c = cfg.build_coupling()
    rep = full_label_oracle(c, cfg.u, cfg.n, cfg.tol("oracle"))
    write_json(Path(cfg.out_dir) / "oracle.json", rep.as_dict())
    return rep, (EXIT_OK if rep.passed else EXIT_FAIL)
