"""JSON configuration with validation.

Blocks: ``domain``, ``observation``, ``coefficients``, ``grid``, ``run``.
Expressions follow the grammar of :mod:`movingwave.expr`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import expr as E
from .errors import ParseError, ValidationError
from .geometry import MovingDomain, ObservationFrame, check_admissibility
from .wavesolver import CoefficientSet, GridSpec, max_stable_step

RUN_DEFAULTS = {
    "seed": 1,
    "trials": 20,
    "manufactured_trials": 5,
    "modes": 6,
    "a_multipliers": [1, 2, 4, 8],
    "a": None,
    "cg_tol": 1e-8,
    "max_iter": 500,
    "initial": None,
    "target": None,
    "refine": False,
    "box": "substitution",
}


@dataclass
class Config:
    domain: MovingDomain
    x0: list
    t0: float
    t0_auto: bool
    delta: float
    sigma: float
    coeffs: CoefficientSet
    Nx: int
    Nt: int
    run: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.domain.dim

    def grid(self):
        return GridSpec(self.Nx, self.Nt, self.domain.tau_minus, self.domain.tau_plus)

    def frame(self, resolution=None):
        if resolution is None:
            resolution = (self.Nt, self.Nx + 1)
        return ObservationFrame.for_domain(self.domain, self.t0, self.x0, resolution)


def _require(block, key, path):
    if not isinstance(block, dict) or key not in block:
        raise ValidationError(f"missing required field {path}.{key}", field=f"{path}.{key}")
    return block[key]


def _number(v, name, positive=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{name} must be a number", field=name)
    if integer and int(v) != v:
        raise ValidationError(f"{name} must be an integer", field=name)
    if not math.isfinite(v) or (positive and v <= 0):
        raise ValidationError(f"{name} must be a positive finite number", field=name)
    return int(v) if integer else float(v)


def _expr(text, name, variables):
    try:
        return E.parse(text if isinstance(text, str) else float(text), variables=variables)
    except ParseError as exc:
        raise ParseError(f"{name}: {exc.detail}", line=exc.line, column=exc.column) from exc


def _curves(v, n, name):
    if isinstance(v, (str, int, float)) and n == 1:
        v = [v]
    if not isinstance(v, list) or len(v) != n:
        raise ValidationError(f"{name} needs one expression per dimension", field=name)
    return tuple(_expr(s, f"{name}[{i}]", {"t"}) for i, s in enumerate(v))


def load_json(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc


def parse_config(path_or_dict):
    """Read and validate a configuration file (or an already loaded dict)."""
    if isinstance(path_or_dict, dict):
        raw = path_or_dict
    else:
        path = Path(path_or_dict)
        if not path.exists():
            raise ValidationError(f"config file {path} does not exist", field="config")
        raw = load_json(path.read_text())
    if not isinstance(raw, dict):
        raise ValidationError("configuration must be a JSON object", field="config")

    dom = _require(raw, "domain", "config")
    n = _number(dom.get("n", 1), "domain.n", integer=True)
    if n not in (1, 2, 3):
        raise ValidationError("domain.n must be 1, 2 or 3", field="domain.n")
    lower = _curves(_require(dom, "lower", "domain"), n, "domain.lower")
    upper = _curves(_require(dom, "upper", "domain"), n, "domain.upper")
    tau_m = _number(_require(dom, "tau_minus", "domain"), "domain.tau_minus")
    tau_p = _number(_require(dom, "tau_plus", "domain"), "domain.tau_plus")
    margin = _number(dom.get("margin", 0.05), "domain.margin", positive=True)
    domain = MovingDomain(lower, upper, tau_m, tau_p, margin=margin,
                          sample_resolution=int(dom.get("sample_resolution", 200)))

    obs = _require(raw, "observation", "config")
    x0 = _require(obs, "x0", "observation")
    x0 = [x0] if isinstance(x0, (int, float)) else x0
    if not isinstance(x0, list) or len(x0) != n:
        raise ValidationError("observation.x0 needs n coordinates", field="observation.x0")
    x0 = [_number(v, "observation.x0") for v in x0]
    delta = _number(_require(obs, "delta", "observation"), "observation.delta", positive=True)
    if not delta < 1:
        raise ValidationError("observation.delta must lie in (0, 1)", field="observation.delta")
    sigma = _number(_require(obs, "sigma", "observation"), "observation.sigma", positive=True)
    t0_raw = obs.get("t0", "auto")
    if t0_raw == "auto":
        adm = check_admissibility(domain, x0)
        lo, hi = adm.t0_interval
        if not lo < hi:
            raise ValidationError("no admissible t0: the window is too short "
                                  f"({tau_p - tau_m:g} <= R+ + R- = "
                                  f"{adm.r_plus + adm.r_minus:g})", field="observation.t0")
        t0, t0_auto = adm.auto_t0, True
    else:
        t0, t0_auto = _number(t0_raw, "observation.t0"), False

    co = raw.get("coefficients", {}) or {}
    allowed = E.allowed_variables(n)
    coeffs = CoefficientSet(*(_expr(co.get(k, "0"), f"coefficients.{k}", allowed)
                              for k in ("Xt", "Xx", "q", "V")))

    gr = _require(raw, "grid", "config")
    nx = _number(_require(gr, "Nx", "grid"), "grid.Nx", positive=True, integer=True)
    nt_raw = _require(gr, "Nt", "grid")
    if nt_raw == "auto":
        probe = GridSpec(nx, 2, tau_m, tau_p)
        kmax = max_stable_step(domain, probe) if n == 1 else probe.hhat * 0.8
        nt = int(math.ceil((tau_p - tau_m) / kmax))
    else:
        nt = _number(nt_raw, "grid.Nt", positive=True, integer=True)

    run = dict(RUN_DEFAULTS)
    run.update(raw.get("run", {}) or {})
    for key in ("trials", "manufactured_trials", "modes", "max_iter"):
        run[key] = _number(run[key], f"run.{key}", integer=True)
        if run[key] < 0:
            raise ValidationError(f"run.{key} must be nonnegative", field=f"run.{key}")
    run["seed"] = _number(run["seed"], "run.seed", integer=True)
    run["cg_tol"] = _number(run["cg_tol"], "run.cg_tol", positive=True)
    if run["a"] is not None:
        vals = run["a"] if isinstance(run["a"], list) else [run["a"]]
        run["a"] = [_number(v, "run.a", positive=True) for v in vals]
    run["a_multipliers"] = [_number(v, "run.a_multipliers", positive=True)
                            for v in run["a_multipliers"]]
    for key in ("initial", "target"):
        val = run[key]
        if val is not None and val != "random":
            if not isinstance(val, list) or len(val) != 2:
                raise ValidationError(f"run.{key} must be 'random' or a pair of "
                                      "expressions", field=f"run.{key}")
            run[key] = [_expr(s, f"run.{key}", {"x", "x1"}) for s in val]
    return Config(domain, x0, t0, t0_auto, delta, sigma, coeffs, nx, nt, run, raw)
