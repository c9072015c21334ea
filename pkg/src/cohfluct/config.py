"""Experiment configuration: JSON schema checks and defaults."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .coupling import EXACT, FLOOR, Coupling, canonical_coupling, explicit_coupling
from .errors import CohFluctError

KNOWN_CHECKS = ("conditions", "integral_ft", "second_law", "third_law", "jarzynski",
                "tail_bound", "crooks", "transport", "overlap", "round_trip", "oracle")
DEFAULT_CHECKS = tuple(c for c in KNOWN_CHECKS if c != "oracle")
DEFAULT_TOL = 1e-10
DEFAULT_TAIL_R = (0.1, 0.5, 1.0, 2.0)
PROFILE_KINDS = ("uniform_window", "truncated_gaussian")
KNOWN_KEYS = {"p", "q", "u", "n", "alpha_profile", "coupling", "checks", "tolerances",
              "seed", "out_dir", "tail_r", "mixtures", "sweep"}


class ConfigError(CohFluctError):
    """Schema violation; ``str(err)`` reads ``"<field>: <constraint>"``."""

    def __init__(self, field_name: str, constraint: str):
        super().__init__(f"{field_name}: {constraint}")
        self.field = field_name
        self.constraint = constraint


@dataclass(frozen=True)
class ExperimentConfig:
    p: tuple
    q: tuple
    u: int
    n: int
    alpha_profile: dict
    coupling: dict
    checks: tuple
    tolerances: dict
    seed: int = 0
    out_dir: str = "out"
    tail_r: tuple = DEFAULT_TAIL_R
    mixtures: int = 0
    sweep: dict | None = None
    checks_explicit: bool = field(default=False, compare=False)

    def tol(self, check: str) -> float:
        return self.tolerances.get(check, DEFAULT_TOL)

    def build_coupling(self) -> Coupling:
        return _build_coupling(self.p, self.q, self.u, self.coupling)

    def as_dict(self):
        out = asdict(self)
        out.pop("checks_explicit")
        return out


def _prob_vector(name, v):
    if not isinstance(v, list) or not v:
        raise ConfigError(name, "must be a nonempty array of numbers")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        raise ConfigError(name, "entries must be numbers")
    if not all(math.isfinite(x) for x in v):
        raise ConfigError(name, "entries must be finite")
    if any(x < 0 for x in v):
        raise ConfigError(name, f"negative entry {min(v)!r}")
    s = math.fsum(v)
    if abs(s - 1.0) > 1e-12:
        raise ConfigError(name, f"sum={s:.12g}")
    return tuple(float(x) for x in v)


def _int(name, v, lo):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(name, "must be an integer")
    if v < lo:
        raise ConfigError(name, f"must be >= {lo}, got {v}")
    return v


def _profile(raw):
    if raw is None:
        return {"kind": "uniform_window"}
    if not isinstance(raw, dict) or raw.get("kind") not in PROFILE_KINDS:
        raise ConfigError("alpha_profile.kind", f"must be one of {list(PROFILE_KINDS)}")
    out = {"kind": raw["kind"]}
    if raw["kind"] == "truncated_gaussian" and raw.get("sigma") is not None:
        s = raw["sigma"]
        if not isinstance(s, (int, float)) or isinstance(s, bool) or not s > 0:
            raise ConfigError("alpha_profile.sigma", "must be a number > 0")
        out["sigma"] = float(s)
    return out


def _coupling_spec(raw):
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("coupling", "must be an object")
    mode = raw.get("mode", "canonical")
    if mode not in ("canonical", "explicit"):
        raise ConfigError("coupling.mode", "must be 'canonical' or 'explicit'")
    grid = raw.get("grid", EXACT)
    if grid not in (EXACT, FLOOR):
        raise ConfigError("coupling.grid", "must be 'exact' or 'floor'")
    out = {"mode": mode, "grid": grid}
    if mode == "explicit":
        table = raw.get("table")
        if not isinstance(table, list) or not table:
            raise ConfigError("coupling.table", "explicit mode needs a nonempty table")
        recs = []
        for k, e in enumerate(table):
            if not isinstance(e, dict) or set(e) != {"i", "j", "f", "value"}:
                raise ConfigError(f"coupling.table[{k}]", "needs exactly keys i, j, f, value")
            for key in ("i", "j", "f"):
                if isinstance(e[key], bool) or not isinstance(e[key], int):
                    raise ConfigError(f"coupling.table[{k}].{key}", "must be an integer")
            v = e["value"]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"coupling.table[{k}].value", "must be a finite number")
            if v < 0:
                raise ConfigError(f"coupling.table[{k}].value", f"must be >= 0, got {v}")
            recs.append({"i": e["i"], "j": e["j"], "f": e["f"], "value": float(v)})
        out["table"] = recs
    return out


def _build_coupling(p, q, u, spec) -> Coupling:
    if spec["mode"] == "canonical":
        return canonical_coupling(list(p), list(q), u, spec["grid"])
    return explicit_coupling(list(p), list(q), spec["table"], u, spec["grid"])


def _checks(raw):
    if raw is None:
        return DEFAULT_CHECKS, False
    if isinstance(raw, str):
        raw = [c.strip() for c in raw.split(",") if c.strip()]
    if not isinstance(raw, list) or not raw:
        raise ConfigError("checks", "must be a nonempty list of check names")
    for c in raw:
        if c not in KNOWN_CHECKS:
            raise ConfigError("checks", f"unknown check {c!r}; known: {', '.join(KNOWN_CHECKS)}")
    return tuple(dict.fromkeys(raw)), True


def _tolerances(raw):
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("tolerances", "must be an object")
    out = {c: DEFAULT_TOL for c in KNOWN_CHECKS}
    for k, v in raw.items():
        if k not in KNOWN_CHECKS:
            raise ConfigError(f"tolerances.{k}", "not a known check")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v >= 0:
            raise ConfigError(f"tolerances.{k}", "must be a number >= 0")
        out[k] = float(v)
    return out


def _sweep(raw):
    if raw is None:
        return None
    if not isinstance(raw, dict) or len(raw) != 1 or not set(raw) <= {"n", "sigma"}:
        raise ConfigError("sweep", "must be {'n': [start, stop, step]} or {'sigma': [...]}")
    if "n" in raw:
        r = raw["n"]
        if (not isinstance(r, list) or len(r) != 3
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in r)):
            raise ConfigError("sweep.n", "must be three integers [start, stop, step]")
        if r[2] < 1 or r[1] < r[0]:
            raise ConfigError("sweep.n", "needs step >= 1 and stop >= start")
        return {"n": list(r)}
    s = raw["sigma"]
    if (not isinstance(s, list) or not s
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0 for x in s)):
        raise ConfigError("sweep.sigma", "must be a nonempty list of numbers > 0")
    return {"sigma": [float(x) for x in s]}


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    for key in ("p", "q", "u"):
        if key not in raw:
            raise ConfigError(key, "required")
    p = _prob_vector("p", raw["p"])
    q = _prob_vector("q", raw["q"])
    u = _int("u", raw["u"], 2)
    profile = _profile(raw.get("alpha_profile"))
    spec = _coupling_spec(raw.get("coupling"))
    checks, explicit = _checks(raw.get("checks"))
    tolerances = _tolerances(raw.get("tolerances"))
    seed = _int("seed", raw.get("seed", 0), 0)
    mixtures = _int("mixtures", raw.get("mixtures", 0), 0)
    tail_r = raw.get("tail_r", list(DEFAULT_TAIL_R))
    if (not isinstance(tail_r, list) or not tail_r
            or not all(isinstance(r, (int, float)) and not isinstance(r, bool) and r > 0
                       for r in tail_r)):
        raise ConfigError("tail_r", "must be a nonempty list of numbers > 0")
    sweep = _sweep(raw.get("sweep"))

    try:
        coupling = _build_coupling(p, q, u, spec)
    except CohFluctError as exc:
        raise ConfigError("coupling", str(exc)) from exc

    if "n" in raw and raw["n"] is not None:
        n = _int("n", raw["n"], 2 * coupling.f_max + 1)
    else:
        n = 4 * coupling.f_max + 3

    out_dir = raw.get("out_dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError("out_dir", "must be a nonempty path string")

    return ExperimentConfig(p=p, q=q, u=u, n=n, alpha_profile=profile, coupling=spec,
                            checks=checks, tolerances=tolerances, seed=seed,
                            out_dir=out_dir, tail_r=tuple(float(r) for r in tail_r),
                            mixtures=mixtures, sweep=sweep, checks_explicit=explicit)


def parse_config(path) -> ExperimentConfig:
    """Load and validate a JSON config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return config_from_dict(raw)

