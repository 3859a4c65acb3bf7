"""Command line interface: ``movingwave <command> --config <path>``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import estimates as est
from .config import parse_config
from .errors import (EmptyRegion, NoConvergence, NumericalFailure, ParseError,
                     ValidationError, MovingWaveError)
from .geometry import CellGrid, build_region_masks, check_admissibility
from .hum import HUMContext, synthesize_control
from .io import write_csv, write_field_csv, write_json
from .rng import SplitMix64
from .wavesolver import energy_levels, solve_adjoint, solve_controlled
from .weights import CarlemanParams, a_floor, check_derivative_bound

COMMANDS = ("regions", "simulate", "adjoint", "energy", "carleman-check",
            "observability", "control")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def _report(**kw):
    base = {"params": None, "grid": None, "lhs": None, "rhs": None, "empirical_C": None,
            "ratios": [], "residuals": [], "final_error_ratio": None, "wall_time_s": None}
    base.update(kw)
    return base


class Runner:
    def __init__(self, cfg, out, seed=None, timing=False):
        self.cfg = cfg
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.seed = cfg.run["seed"] if seed is None else int(seed)
        self.timing = timing
        self.start = time.perf_counter()

    # shared pieces
    def setup(self):
        cfg = self.cfg
        d = cfg.domain
        self.frame = cfg.frame()
        self.m0, self.m1 = (cfg.coeffs.sup_norms(d, cfg.grid()) if cfg.dim == 1 else (1.0, 1.0))
        self.params = CarlemanParams.observability(
            a=max(cfg.dim**2, 1), delta=cfg.delta, R=self.frame.r_plus, sigma=cfg.sigma)
        self.a_floor = a_floor(cfg.dim, cfg.delta, self.frame.r_plus, self.frame.r_minus,
                               self.m0, self.m1)
        if cfg.dim == 1:
            self.cells = CellGrid.from_solver(d, cfg.grid())
        else:
            self.cells = CellGrid(d, cfg.Nt, (cfg.Nx + 1,) * cfg.dim)
        self.masks = build_region_masks(d, self.frame, self.params, self.cells)

    def params_dict(self):
        p = self.params.as_dict()
        p.update({"t0": self.frame.t0, "x0": self.frame.x0.tolist(),
                  "R_plus": self.frame.r_plus, "R_minus": self.frame.r_minus,
                  "location": self.frame.location, "a_floor": self.a_floor,
                  "M0": self.m0, "M1": self.m1, "seed": self.seed,
                  "coefficients": self.cfg.coeffs.as_dict()})
        return p

    def grid_dict(self):
        if self.cfg.dim == 1:
            return self.cfg.grid().as_dict()
        return {"Nt": self.cfg.Nt, "cells": list(self.cells.ncells)}

    def finish(self, report):
        if self.timing:
            report["wall_time_s"] = time.perf_counter() - self.start
        write_json(self.out / "report.json", report)

    def need_1d(self, what):
        if self.cfg.dim != 1:
            raise ValidationError(f"{what} requires domain.n = 1", field="domain.n")

    def initial_data(self, rng, key="initial"):
        choice = self.cfg.run[key]
        d = self.cfg.domain
        if choice is None or choice == "random":
            a, b = est.random_modes(rng, self.cfg.run["modes"])
            tau = d.tau_minus if key == "initial" else d.tau_plus
            return est.sine_series_data(d, a, b, tau)
        return tuple(choice)

    # commands
    def regions(self):
        self.setup()
        m = self.masks
        cfg = self.cfg
        adm = check_admissibility(cfg.domain, self.frame)
        rows = {k: [] for k in ("t", "i", "x", "f", "nf", "dp", "g", "w", "wp")}
        extra = [[] for _ in range(cfg.dim - 1)]
        tc, xc = self.cells.centers
        lower = [f for f in m.faces if f.axis == 0 and f.side == "lower"][0]
        upper = [f for f in m.faces if f.axis == 0 and f.side == "upper"][0]
        for r in range(self.cells.nt):
            cell_pts = xc[r].reshape(-1, cfg.dim)
            nf_cells = m.f_center[r].reshape(-1)
            blocks = []
            lw = (lower.x[r].reshape(-1, cfg.dim), lower.f_p[r].reshape(-1),
                  lower.nf_p[r].reshape(-1), lower.gamma_plus[r].reshape(-1))
            uw = (upper.x[r].reshape(-1, cfg.dim), upper.f_p[r].reshape(-1),
                  upper.nf_p[r].reshape(-1), upper.gamma_plus[r].reshape(-1))
            blocks.append(("wall", lw))
            blocks.append(("cells", (cell_pts, nf_cells, m.d_p[r].reshape(-1),
                                     m.w[r].reshape(-1), m.w_prime[r].reshape(-1))))
            blocks.append(("wall", uw))
            idx = 0
            for kind, data in blocks:
                if kind == "wall":
                    pts, f, nf, gam = data
                    for j in range(len(f)):
                        rows["t"].append(self.cells.t_centers[r])
                        rows["i"].append(idx)
                        rows["x"].append(pts[j, 0])
                        for e in range(cfg.dim - 1):
                            extra[e].append(pts[j, e + 1])
                        rows["f"].append(f[j])
                        rows["nf"].append(nf[j])
                        rows["dp"].append(f[j] > 0)
                        rows["g"].append(bool(gam[j]))
                        rows["w"].append(False)
                        rows["wp"].append(False)
                        idx += 1
                else:
                    pts, f, dp, w, wp = data
                    for j in range(len(f)):
                        rows["t"].append(self.cells.t_centers[r])
                        rows["i"].append(idx)
                        rows["x"].append(pts[j, 0])
                        for e in range(cfg.dim - 1):
                            extra[e].append(pts[j, e + 1])
                        rows["f"].append(f[j])
                        rows["nf"].append(float("nan"))
                        rows["dp"].append(dp[j] > 0)
                        rows["g"].append(False)
                        rows["w"].append(w[j] > 0)
                        rows["wp"].append(wp[j] > 0)
                        idx += 1
        header = ["t", "x_index", "x", "f_p", "Nf_p", "in_Dp", "in_Gamma", "in_W", "in_Wprime"]
        header += [f"x{e + 2}" for e in range(cfg.dim - 1)]
        cols = [np.array(rows[k]) for k in ("t", "i", "x", "f", "nf", "dp", "g", "w", "wp")]
        cols[1] = cols[1].astype(np.int64)
        for k in (5, 6, 7, 8):
            cols[k] = cols[k].astype(bool)
        write_csv(self.out / "regions.csv", header, cols + [np.array(e) for e in extra])
        measures = {k: m.measure(k) for k in ("D_p", "U∩D_p", "W", "W'", "Gamma+", "Gamma'")}
        self.finish(_report(params=self.params_dict(), grid=self.grid_dict(),
                            admissibility=adm.as_dict(), measures=measures,
                            gamma_plus_empty=m.gamma_plus_empty))
        return EXIT_OK

    def simulate(self):
        self.need_1d("simulate")
        self.setup()
        rng = SplitMix64(self.seed)
        fld = solve_controlled(self.cfg.domain, self.cfg.coeffs, self.cfg.grid(),
                               self.initial_data(rng))
        return self._field_outputs(fld)

    def adjoint(self):
        self.need_1d("adjoint")
        self.setup()
        rng = SplitMix64(self.seed)
        fld = solve_adjoint(self.cfg.domain, self.cfg.coeffs, self.cfg.grid(),
                            self.initial_data(rng))
        return self._field_outputs(fld)

    def _field_outputs(self, fld):
        write_field_csv(self.out / "field.csv", fld)
        grad, l2, tot = energy_levels(fld, self.m0)
        self.finish(_report(params=self.params_dict(), grid=self.grid_dict(),
                            energy={"tau_minus": tot[0], "tau_plus": tot[-1]},
                            max_abs=float(np.max(np.abs(fld.values)))))
        return EXIT_OK

    def energy(self):
        self.need_1d("energy")
        self.setup()
        rng = SplitMix64(self.seed)
        cfg = self.cfg
        fld = solve_adjoint(cfg.domain, cfg.coeffs, cfg.grid(), self.initial_data(rng))
        grad, l2, tot = energy_levels(fld, self.m0)
        write_csv(self.out / "energy.csv", ["t", "gradient", "l2", "total"],
                  [fld.times, grad, l2, tot])
        consts = est.fit_energy_constants(fld.times, tot, self.m0, self.m1)
        restricted = est.restricted_energy_ratio(fld, self.frame, self.m0)
        self.finish(_report(params=self.params_dict(), grid=self.grid_dict(),
                            energy_constants=consts.as_dict(),
                            restricted_energy_ratio=restricted))
        return EXIT_OK

    def _a_values(self):
        run = self.cfg.run
        if run["a"] is not None:
            vals = run["a"]
        else:
            vals = [self.a_floor * m for m in run["a_multipliers"]]
        for a in vals:
            self.params.with_a(a).check(self.cfg.dim)
        return vals

    def carleman_check(self):
        self.setup()
        cfg = self.cfg
        a_vals = self._a_values()
        f_min = self.cells.spacing() ** 2
        samples = []
        if cfg.dim == 1 and cfg.run["trials"] > 0:
            fields = est.random_adjoint_trials(cfg.domain, cfg.coeffs, cfg.grid(),
                                               cfg.run["trials"], self.seed, cfg.run["modes"])
            samples += [est.sample_from_field(f, self.masks, cfg.run["box"], f"adjoint{i}")
                        for i, f in enumerate(fields)]
        for i, node in enumerate(est.manufactured_trials(cfg.domain,
                                                         cfg.run["manufactured_trials"],
                                                         self.seed)):
            samples.append(est.sample_from_expression(node, self.masks,
                                                      label=f"manufactured{i}"))
        if not samples:
            raise ValidationError("no trials requested", field="run.trials")
        chk = est.check_carleman(self.frame, self.params, samples, a_vals, f_min,
                                 self.grid_dict())
        deriv = check_derivative_bound(cfg.domain, self.frame, self.params,
                                       sample_count=2000, a_values=a_vals, seed=self.seed)
        self.finish(_report(
            params=self.params_dict(), grid=self.grid_dict(),
            lhs=[[r.lhs for r in rs] for rs in chk.reports],
            rhs=[[r.rhs for r in rs] for rs in chk.reports],
            empirical_C=chk.max_ratio,
            ratios=[[r.ratio for r in rs] for rs in chk.reports],
            a_values=chk.a_values, spread=chk.spread, finite=chk.finite,
            log_scale=[[r.log_scale for r in rs] for rs in chk.reports],
            derivative_bound=deriv.as_dict()))
        return EXIT_OK

    def observability(self):
        self.need_1d("observability")
        cfg = self.cfg
        adm = check_admissibility(cfg.domain, cfg.x0, t0=cfg.t0)
        if not adm.passed:
            raise ValidationError(
                f"window not admissible: tau+ - tau- = "
                f"{cfg.domain.tau_plus - cfg.domain.tau_minus:g}, R+ + R- = "
                f"{adm.r_plus + adm.r_minus:g}, t0 gaps = "
                f"({adm.t0_lower_gap}, {adm.t0_upper_gap})", field="domain.tau_plus")
        self.setup()
        grids = [cfg.grid()] + ([cfg.grid().refined()] if cfg.run["refine"] else [])
        results = []
        for g in grids:
            masks = self.masks if g == cfg.grid() else build_region_masks(
                cfg.domain, self.frame, self.params, CellGrid.from_solver(cfg.domain, g))
            fields = est.random_adjoint_trials(cfg.domain, cfg.coeffs, g, cfg.run["trials"],
                                               self.seed, cfg.run["modes"])
            results.append(est.check_observability(fields, masks, self.frame, g.as_dict()))
        main = results[0]
        report = _report(params=self.params_dict(), grid=self.grid_dict(),
                         lhs=[r.lhs for r in main.reports], rhs=[r.rhs for r in main.reports],
                         empirical_C=main.empirical_C, ratios=main.ratios,
                         admissibility=adm.as_dict(),
                         restricted_energy_ratios=main.restricted_ratios)
        if len(results) > 1:
            report["refined_empirical_C"] = results[1].empirical_C
            report["refinement_ratio"] = results[1].empirical_C / main.empirical_C
        self.finish(report)
        return EXIT_OK if main.finite else EXIT_NUMERICAL

    def control(self):
        self.need_1d("control")
        self.setup()
        cfg = self.cfg
        rng = SplitMix64(self.seed)
        initial = self.initial_data(rng)
        target = None if cfg.run["target"] is None else self.initial_data(rng, "target")
        ctx = HUMContext(cfg.domain, cfg.coeffs, cfg.grid(), self.masks.w_prime)
        res = synthesize_control(ctx, initial, target, cfg.run["cg_tol"], cfg.run["max_iter"])
        write_field_csv(self.out / "control.csv", res.field, res.control)
        write_field_csv(self.out / "field.csv", res.field)
        self.finish(_report(params=self.params_dict(), grid=self.grid_dict(),
                            residuals=res.state.residuals,
                            final_error_ratio=res.final_error_ratio,
                            final_error=res.final_error,
                            uncontrolled_error=res.uncontrolled_error,
                            iterations=res.state.iterations,
                            gramian_applications=res.state.apply_count,
                            converged=res.converged))
        if not res.converged:
            raise NoConvergence(f"no convergence after {res.state.iterations} iterations "
                                f"(relative residual {res.state.residuals[-1]:.3e})",
                                residuals=res.state.residuals)
        return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="movingwave",
                                description="Carleman/observability checks and interior "
                                            "control for waves on moving domains.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--seed", type=int, default=None, help="override run.seed (u64)")
    p.add_argument("--timing", action="store_true",
                   help="record wall_time_s (makes report.json nondeterministic)")
    return p


def run(command, config, out=".", seed=None, timing=False):
    """Run one command; returns the exit code."""
    try:
        cfg = config if not isinstance(config, (str, Path)) else parse_config(config)
        if seed is not None and not 0 <= int(seed) < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer", field="seed")
        runner = Runner(cfg, out, seed, timing)
        return getattr(runner, command.replace("-", "_"))()
    except (ParseError, ValidationError, EmptyRegion) as exc:
        print(f"movingwave: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print(f"movingwave: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except MovingWaveError as exc:
        print(f"movingwave: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.out, args.seed, args.timing)


if __name__ == "__main__":
    sys.exit(main())
