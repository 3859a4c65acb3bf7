"""Quadrature of weighted spacetime integrals and inequality checks.

Spacetime integrals use the midpoint rule on the cells of a
:class:`~movingwave.geometry.CellGrid`, weighting each cell by the
fraction of it covered by the region of integration.  Weighted integrals
share a common scale ``exp(-log_scale)`` so that large ``a`` does not
overflow; ratios are unaffected.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import expr as E
from .errors import BoundaryConditionViolation, EmptyRegion, ValidationError
from .geometry import CellGrid, eval_null_frame, face_normal
from .rng import SplitMix64
from .wavesolver import CoefficientSet, SpacetimeField, energy_levels, solve_adjoint
from .weights import log_weight_base


# ------------------------------------------------------------- cell operator


class CellOperator:
    """Values and derivatives at cell centres from nodal values (n = 1).

    Centre values average the four corners; ``psi_t`` and ``psi_xi`` are
    the centred differences across the cell.  The physical time
    derivative is ``psi_t + c psi_xi``.  :meth:`adjoint` applies the
    transpose, so quadratic forms built from it are symmetric.
    """

    def __init__(self, domain, grid):
        self.domain, self.grid = domain, grid
        self.cells = CellGrid.from_solver(domain, grid)
        tc = self.cells.t_centers
        lo, up = domain.lower[0], domain.upper[0]
        self.L = up(tc) - lo(tc)
        xic = self.cells.xhat_centers[0]
        da, db = lo.velocity(tc), up.velocity(tc)
        self.c = -(da[:, None] + xic[None, :] * (db - da)[:, None]) / self.L[:, None]
        self.volume = grid.k * grid.hhat * np.broadcast_to(self.L[:, None], self.c.shape)

    def apply(self, values):
        """``(value, phi_t, phi_x)`` at centres from nodal ``(Nt+1, Nx+2)`` values."""
        p = values
        k, h = self.grid.k, self.grid.hhat
        a, b = p[:-1, :-1], p[:-1, 1:]
        c, d = p[1:, :-1], p[1:, 1:]
        val = 0.25 * (a + b + c + d)
        dt = (c + d - a - b) / (2 * k)
        dx = (b + d - a - c) / (2 * h)
        return val, dt + self.c * dx, dx / self.L[:, None]

    def adjoint(self, cval, cphit):
        """Transpose of ``values -> (value, phi_t)``."""
        k, h = self.grid.k, self.grid.hhat
        av = 0.25 * cval
        bt = cphit / (2 * k)
        bx = cphit * self.c / (2 * h)
        out = np.zeros((self.grid.Nt + 1, self.grid.Nx + 2))
        out[:-1, :-1] += av - bt - bx
        out[:-1, 1:] += av - bt + bx
        out[1:, :-1] += av + bt - bx
        out[1:, 1:] += av + bt + bx
        return out

    def observation_form(self, weights):
        """Symmetric operator ``Q`` with ``<phi, Q psi> = sum w vol (phi_t psi_t + phi psi)``."""
        wv = weights * self.volume

        def q(values):
            val, pt, _ = self.apply(values)
            return self.adjoint(wv * val, wv * pt)
        return q

    def observation(self, values, weights):
        val, pt, _ = self.apply(values)
        return float(np.sum(weights * self.volume * (pt * pt + val * val)))


# ---------------------------------------------------------- quadrature data


@dataclass
class QuadratureSample:
    """A function sampled at cell centres with everything the checks need.

    ``phi_x`` has shape ``(M, n)``; ``box`` holds the wave operator applied
    to the function.  Region fractions come from the geometry masks.
    """

    t: np.ndarray
    x: np.ndarray
    volume: np.ndarray
    phi: np.ndarray
    phi_t: np.ndarray
    phi_x: np.ndarray
    box: np.ndarray
    frac_dp: np.ndarray
    frac_w: np.ndarray
    frac_wprime: np.ndarray
    boundary_max: float = 0.0
    label: str = ""

    def scaled(self, c):
        return QuadratureSample(self.t, self.x, self.volume, c * self.phi, c * self.phi_t,
                                c * self.phi_x, c * self.box, self.frac_dp, self.frac_w,
                                self.frac_wprime, abs(c) * self.boundary_max, self.label)

    @property
    def scale(self):
        return float(max(np.max(np.abs(self.phi)), np.max(np.abs(self.phi_t)),
                         np.max(np.abs(self.phi_x))))


def _flat(masks, arr):
    return np.asarray(arr, dtype=float).reshape(-1)


def _boundary_max_field(fld, frame):
    nf0 = eval_null_frame(frame, fld.times, fld.x[:, 0]).f_p
    nf1 = eval_null_frame(frame, fld.times, fld.x[:, -1]).f_p
    v0 = np.abs(fld.values[:, 0])[nf0 > 0]
    v1 = np.abs(fld.values[:, -1])[nf1 > 0]
    return float(max(v0.max(initial=0.0), v1.max(initial=0.0)))


def box_substitution(fld, op, centres):
    """``-X.grad phi - V phi`` at cell centres (wave operator of an adjoint solution)."""
    val, pt, px = centres
    tc, xc = op.cells.centers
    xc = xc[..., 0]
    co = fld.coeffs
    return -(co.evaluate("Xt", tc, xc) * pt + co.evaluate("Xx", tc, xc) * px
             + co.evaluate("V", tc, xc) * val)


def box_discrete(fld, op):
    """``-phi_tt + phi_xx`` by second differences in mapped coordinates."""
    g = fld.grid
    k, h = g.k, g.hhat
    v = fld.values
    L = fld.L[:, None]
    t = g.times
    lo, up = fld.domain.lower[0], fld.domain.upper[0]
    da, db = lo.velocity(t), up.velocity(t)
    dda, ddb = lo.acceleration(t), up.acceleration(t)
    xi = g.xi[None, :]
    c = fld.c
    ct = -(dda[:, None] + xi * (ddb - dda)[:, None]) / L - 2 * c * (db - da)[:, None] / L
    out = np.zeros_like(v)
    i = (slice(1, -1), slice(1, -1))
    vtt = (v[2:, 1:-1] - 2 * v[1:-1, 1:-1] + v[:-2, 1:-1]) / k**2
    vxx = (v[1:-1, 2:] - 2 * v[1:-1, 1:-1] + v[1:-1, :-2]) / h**2
    vx = (v[1:-1, 2:] - v[1:-1, :-2]) / (2 * h)
    vtx = (v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) / (4 * k * h)
    A = 1.0 / L[1:-1] ** 2 - c[i] ** 2
    out[i] = -vtt - 2 * c[i] * vtx + A * vxx - ct[i] * vx
    out = np.pad(out[1:-1, 1:-1], 1, mode="edge")
    return 0.25 * (out[:-1, :-1] + out[:-1, 1:] + out[1:, :-1] + out[1:, 1:])


def sample_from_field(fld, masks, box="substitution", label=""):
    """Quadrature data for a discrete field on the solver grid."""
    op = CellOperator(fld.domain, fld.grid)
    if masks.grid.shape != op.cells.shape:
        raise ValidationError("masks were built on a different grid")
    centres = op.apply(fld.values)
    val, pt, px = centres
    if box == "substitution":
        bx = box_substitution(fld, op, centres)
    elif box == "discrete":
        bx = box_discrete(fld, op)
    else:
        raise ValueError(box)
    tc, xc = op.cells.centers
    return QuadratureSample(tc.reshape(-1), xc.reshape(-1, 1), op.volume.reshape(-1),
                            val.reshape(-1), pt.reshape(-1), px.reshape(-1, 1),
                            bx.reshape(-1), _flat(masks, masks.d_p), _flat(masks, masks.w),
                            _flat(masks, masks.w_prime),
                            _boundary_max_field(fld, masks.frame), label)


def wave_operator_expr(node, n):
    """``-phi_tt + sum_i phi_{x_i x_i}`` as an expression."""
    out = E.neg(node.diff("t").diff("t"))
    names = ["x"] if n == 1 and "x" in node.variables() else [f"x{i + 1}" for i in range(n)]
    for v in names:
        out = E.add(out, node.diff(v).diff(v))
    return out


def _env(t, x, n):
    env = {"t": t}
    for i in range(n):
        env[f"x{i + 1}"] = x[..., i]
    if n == 1:
        env["x"] = x[..., 0]
    return env


def sample_from_expression(node, masks, box=None, label=""):
    """Quadrature data for a closed-form function on the mask grid (any n)."""
    if isinstance(node, str):
        node = E.parse(node)
    grid = masks.grid
    n = grid.domain.dim
    tc, xc = grid.centers
    env = _env(tc, xc, n)
    names = [f"x{i + 1}" for i in range(n)]
    if n == 1 and "x" in node.variables():
        names = ["x"]
    phi = E.evaluate_like(node, env, tc)
    pt = E.evaluate_like(node.diff("t"), env, tc)
    px = np.stack([E.evaluate_like(node.diff(v), env, tc) for v in names], axis=-1)
    bnode = wave_operator_expr(node, n) if box is None else box
    bx = E.evaluate_like(bnode, env, tc)
    bmax = 0.0
    for f in masks.faces:
        sel = f.valid & (f.f_p > 0)
        if np.any(sel):
            vals = E.evaluate_like(node, _env(f.t, f.x, n), f.t)
            bmax = max(bmax, float(np.max(np.abs(vals[sel]))))
    return QuadratureSample(tc.reshape(-1), xc.reshape(-1, n), grid.volumes.reshape(-1),
                            phi.reshape(-1), pt.reshape(-1), px.reshape(-1, n), bx.reshape(-1),
                            masks.d_p.reshape(-1), masks.w.reshape(-1),
                            masks.w_prime.reshape(-1), bmax, label)


# ------------------------------------------------------------ Carleman


@dataclass
class EstimateReport:
    lhs: float
    rhs: float
    params: dict
    grid: dict
    terms: dict = field(default_factory=dict)
    log_scale: float = 0.0
    label: str = ""

    @property
    def skipped(self):
        return self.lhs == 0.0 and self.rhs == 0.0

    @property
    def ratio(self):
        if self.skipped:
            return float("nan")
        if self.rhs == 0.0:
            return float("inf")
        return self.lhs / self.rhs

    @property
    def constant(self):
        return self.ratio

    def as_dict(self):
        return {"label": self.label, "lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio,
                "skipped": self.skipped, "log_scale": self.log_scale, "terms": self.terms,
                "params": self.params, "grid": self.grid}


def _weight_parts(sample, frame, params, f_min):
    nf = eval_null_frame(frame, sample.t, sample.x)
    keep = nf.f_p > f_min
    g = np.full(sample.t.shape, -np.inf)
    if np.any(keep):
        g[keep] = log_weight_base(frame, params, sample.t[keep], sample.x[keep], check=True)
    return nf, keep, g


def carleman_terms(sample, frame, params, f_min, log_scale=None, check_boundary=True,
                   tol=1e-8):
    """Raw weighted integrals of both sides (``C`` and prefactors stripped).

    Returns ``(terms, log_scale)``; terms are scaled by ``exp(-log_scale)``.
    """
    if check_boundary and sample.boundary_max > tol * max(sample.scale, 1e-300):
        raise BoundaryConditionViolation(
            f"function does not vanish on the boundary inside D_p "
            f"(max {sample.boundary_max:.3g})")
    nf, keep, g = _weight_parts(sample, frame, params, f_min)
    lz = 2.0 * params.a * g
    if log_scale is None:
        log_scale = float(np.max(lz[keep])) if np.any(keep) else 0.0
    z = np.where(keep, np.exp(lz - log_scale), 0.0)
    f = np.where(keep, nf.f_p, 1.0)
    r = np.where(keep, nf.r_p, 1.0)
    x_p = sample.x - frame.x0
    er = x_p / r[:, None]
    phi_r = np.sum(er * sample.phi_x, axis=-1)
    tang = sample.phi_x - er * phi_r[:, None]
    phi_u = sample.phi_t - phi_r
    phi_v = sample.phi_t + phi_r
    dp = sample.volume * sample.frac_dp * z
    wv = sample.volume * sample.frac_w * z
    terms = {
        "uv": float(np.sum(dp / r * ((nf.u_p * phi_u) ** 2 + (nf.v_p * phi_v) ** 2))),
        "angular": float(np.sum(dp / r * f * np.sum(tang * tang, axis=-1))),
        "zeroth": float(np.sum(dp * f**-0.5 * sample.phi**2)),
        "box": float(np.sum(dp * f * sample.box**2)),
        "W_dt": float(np.sum(wv / f * sample.phi_t**2)),
        "W_zeroth": float(np.sum(wv * f**-3 * sample.phi**2)),
    }
    return terms, log_scale


def carleman_lhs(sample, frame, params, f_min, log_scale=None, check_boundary=True):
    """``eps * (uv + angular) + b a^2 * zeroth`` and its parts."""
    terms, ls = carleman_terms(sample, frame, params, f_min, log_scale, check_boundary)
    first = params.eps * (terms["uv"] + terms["angular"])
    zeroth = params.b * params.a**2 * terms["zeroth"]
    return {"first_order": first, "zeroth_order": zeroth, "angular": terms["angular"],
            "total": first + zeroth, "log_scale": ls}


def carleman_rhs(sample, frame, params, f_min, log_scale=None, check_boundary=True):
    """``box / a + a R^2 W_dt + a^4 R^4 W_zeroth`` and its parts."""
    terms, ls = carleman_terms(sample, frame, params, f_min, log_scale, check_boundary)
    a, R = params.a, params.R
    box = terms["box"] / a
    wdt = a * R**2 * terms["W_dt"]
    w0 = a**4 * R**4 * terms["W_zeroth"]
    return {"box": box, "W_dt": wdt, "W_zeroth": w0, "total": box + wdt + w0,
            "log_scale": ls}


def carleman_report(sample, frame, params, f_min, grid_info=None):
    terms, ls = carleman_terms(sample, frame, params, f_min)
    a, R, b, eps = params.a, params.R, params.b, params.eps
    lhs = eps * (terms["uv"] + terms["angular"]) + b * a * a * terms["zeroth"]
    rhs = terms["box"] / a + a * R * R * terms["W_dt"] + a**4 * R**4 * terms["W_zeroth"]
    named = {"lhs_first_order": eps * (terms["uv"] + terms["angular"]),
             "lhs_zeroth_order": b * a * a * terms["zeroth"],
             "rhs_box": terms["box"] / a, "rhs_W_dt": a * R * R * terms["W_dt"],
             "rhs_W_zeroth": a**4 * R**4 * terms["W_zeroth"]}
    return EstimateReport(lhs, rhs, params.as_dict(), grid_info or {}, named, ls,
                          sample.label)


@dataclass
class CarlemanCheck:
    a_values: list
    reports: list          # one list of EstimateReport per a
    max_ratio: list

    @property
    def finite(self):
        return all(np.isfinite(r) and r > 0 for r in self.max_ratio)

    @property
    def spread(self):
        r = np.asarray(self.max_ratio)
        return float(r.max() / r.min())

    def passed(self, limit=2.0):
        return self.finite and self.spread <= limit

    def as_dict(self):
        return {"a_values": self.a_values, "max_ratio": self.max_ratio,
                "spread": self.spread, "finite": self.finite,
                "reports": [[r.as_dict() for r in rs] for rs in self.reports]}


def check_carleman(frame, params, samples, a_values, f_min, grid_info=None):
    """Ratios ``LHS / RHS`` for every sample and every ``a`` in the sweep."""
    reports, maxima = [], []
    for a in a_values:
        p = params.with_a(a)
        rs = [carleman_report(s, frame, p, f_min, grid_info) for s in samples]
        vals = [r.ratio for r in rs if not r.skipped]
        reports.append(rs)
        maxima.append(float(max(vals)) if vals else float("nan"))
    return CarlemanCheck([float(a) for a in a_values], reports, maxima)


# ------------------------------------------------------------ trial data


def random_modes(rng, modes=6, decay=1.0):
    """Coefficients of a smooth random sine series (value and velocity)."""
    m = np.arange(1, modes + 1)
    a = rng.normal(modes) / m**decay
    b = rng.normal(modes) * np.pi / m**(decay - 1.0) / m
    return a, b


def sine_series_data(domain, coef_a, coef_b, tau):
    """Initial data ``(phi0, phi1)`` as callables in ``x`` at time ``tau``."""
    lo = float(domain.lower[0](tau))
    L = float(domain.upper[0](tau)) - lo
    m = np.arange(1, len(coef_a) + 1)

    def basis(x):
        xi = (np.asarray(x)[..., None] - lo) / L
        return np.sin(np.pi * m * xi)

    return (lambda x: basis(x) @ coef_a, lambda x: basis(x) @ coef_b)


def random_adjoint_trials(domain, coeffs, grid, count, seed, modes=6, direction="forward"):
    """Adjoint solutions from smooth random data (reproducible across grids)."""
    rng = SplitMix64(seed)
    tau = domain.tau_minus if direction == "forward" else domain.tau_plus
    out = []
    for _ in range(count):
        a, b = random_modes(rng, modes)
        data = sine_series_data(domain, a, b, tau)
        out.append(solve_adjoint(domain, coeffs, grid, data, direction))
    return out


def manufactured_trials(domain, count, seed=0):
    """Closed-form functions vanishing on every face of a box domain.

    Products of ``sin(m pi xhat_i)`` with a smooth random time factor;
    valid in any dimension.
    """
    rng = SplitMix64(seed)
    n = domain.dim
    out = []
    for _ in range(count):
        parts = []
        for i in range(n):
            m = 1 + int(rng.next_u64() % np.uint64(3))
            xi = f"x{i + 1}"
            lo = str(domain.lower[i].node)
            up = str(domain.upper[i].node)
            parts.append(f"sin({m}*pi*({xi} - ({lo}))/(({up}) - ({lo})))")
        w1, w2, ph = rng.uniform(3, 0.5, 2.0)
        time = f"(cos({w1:.6f}*t + {ph:.6f}) + 0.5*sin({w2:.6f}*t))"
        out.append(E.parse("*".join(parts) + "*" + time))
    return out


# -------------------------------------------------------- observability


def slice_energy(fld, level):
    """``int (|grad phi|^2 + phi^2)`` on one level."""
    grad, l2, _ = energy_levels(fld, m0=1.0)
    return float(grad[level] + l2[level])


def observability_report(fld, masks, grid_info=None, label=""):
    grad, l2, _ = energy_levels(fld, m0=1.0)
    lhs = float(max(grad[0] + l2[0], grad[-1] + l2[-1]))
    op = CellOperator(fld.domain, fld.grid)
    rhs = op.observation(fld.values, masks.w_prime)
    return EstimateReport(lhs, rhs, {}, grid_info or {},
                          {"energy_tau_minus": float(grad[0] + l2[0]),
                           "energy_tau_plus": float(grad[-1] + l2[-1]),
                           "observation": rhs}, 0.0, label)


def restricted_energy_ratio(fld, frame, m0=1.0):
    """Largest ratio of the energy restricted to ``D_p`` between any level and ``t_p``."""
    nf = eval_null_frame(frame, fld.times[:, None], fld.x)
    mask = (nf.f_p > 0).astype(float)
    _, _, tot = energy_levels(fld, m0=1.0 + m0, mask=mask)
    n0 = int(np.clip(round((frame.t0 - fld.grid.tau_minus) / fld.grid.k), 0, fld.grid.Nt))
    if tot[n0] <= 0:
        return float("nan")
    return float(np.max(tot) / tot[n0])


@dataclass
class ObservabilityCheck:
    reports: list
    restricted_ratios: list

    @property
    def ratios(self):
        return [r.ratio for r in self.reports if not r.skipped]

    @property
    def empirical_C(self):
        r = self.ratios
        return float(max(r)) if r else float("nan")

    @property
    def finite(self):
        return all(np.isfinite(r) for r in self.ratios)

    def as_dict(self):
        return {"empirical_C": self.empirical_C, "ratios": self.ratios,
                "restricted_energy_ratios": self.restricted_ratios,
                "reports": [r.as_dict() for r in self.reports]}


def check_observability(fields, masks, frame=None, grid_info=None, require_region=True):
    """Both sides of the observability inequality for each field."""
    if require_region and not np.any(masks.w_prime > 0):
        raise EmptyRegion("W' is empty")
    frame = masks.frame if frame is None else frame
    reports, restricted = [], []
    for i, fld in enumerate(fields):
        reports.append(observability_report(fld, masks, grid_info, label=f"trial{i}"))
        m0 = fld.coeffs.sup_norms(fld.domain, fld.grid)[0]
        restricted.append(restricted_energy_ratio(fld, frame, m0))
    return ObservabilityCheck(reports, restricted)


# -------------------------------------------------------- energy constants


@dataclass(frozen=True)
class EnergyConstants:
    C: float
    C_prime: float
    rate: float      # M0**0.5 + M1
    pairs: int

    def holds(self, e1, e2, dt, rtol=1e-9):
        bound = self.C * np.exp(self.C_prime * self.rate * abs(dt))
        return e1 <= bound * e2 * (1 + rtol) and e2 <= bound * e1 * (1 + rtol)

    def as_dict(self):
        return {"C": self.C, "C_prime": self.C_prime, "rate": self.rate, "pairs": self.pairs}


def fit_energy_constants(times, energies, m0, m1, max_levels=60):
    """Smallest ``(log C, C')`` with ``E(t1) <= C exp(C' (M0^0.5 + M1)|t1 - t2|) E(t2)``.

    Minimises ``log C + C' rate T`` over all ordered level pairs (both
    orders, so the same pair of constants serves both directions).
    """
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    idx = np.unique(np.linspace(0, len(times) - 1, min(max_levels, len(times))).astype(int))
    t = times[idx]
    le = np.log(energies[idx])
    rate = float(np.sqrt(m0) + m1)
    i, j = np.meshgrid(np.arange(len(t)), np.arange(len(t)), indexing="ij")
    sel = i != j
    dt = np.abs(t[i] - t[j])[sel]
    gap = (le[i] - le[j])[sel]
    # gap <= logC + C' rate dt  ->  -logC - rate dt C' <= -gap
    a_ub = np.stack([-np.ones_like(dt), -rate * dt], axis=1)
    T = float(times[-1] - times[0])
    res = linprog(c=[1.0, rate * T], A_ub=a_ub, b_ub=-gap, bounds=[(0, None), (0, None)],
                  method="highs")
    if not res.success:
        raise ValidationError(f"energy-constant fit failed: {res.message}")
    return EnergyConstants(float(np.exp(res.x[0])), float(res.x[1]), rate, int(sel.sum()))


# ------------------------------------------------------- boundary integral


def boundary_integral(fld, frame, params, masks=None):
    """Weighted boundary term over ``Gamma+`` for a field on a moving interval.

    The normal derivative uses one-sided second-order differences; each
    boundary segment between two levels is integrated with the midpoint
    rule against ``sqrt(1 - speed**2) dt``.
    """
    g = fld.grid
    t = g.times
    psi_xi = fld.psi_xi()
    tm = 0.5 * (t[1:] + t[:-1])
    total = 0.0
    for side, col in (("lower", 0), ("upper", -1)):
        curve = fld.domain.lower[0] if side == "lower" else fld.domain.upper[0]
        nu_t, nu_x = face_normal(fld.domain, 0, side, t)
        L = fld.L
        c = fld.c[:, col]
        # phi vanishes on the wall so psi_t = 0 there
        nphi = nu_t * c * psi_xi[:, col] + nu_x * psi_xi[:, col] / L
        nm = 0.5 * (nphi[1:] + nphi[:-1])
        xw = curve(tm)
        nu_tm, nu_xm = face_normal(fld.domain, 0, side, tm)
        nfr = eval_null_frame(frame, tm, xw)
        x_p = xw - frame.x0[0]
        nf = 0.5 * (x_p * nu_xm - nfr.t_p * nu_tm)
        with np.errstate(divide="ignore", invalid="ignore"):
            nr = np.where(nfr.r_p > 0, x_p * nu_xm / nfr.r_p, 0.0)
        cond = (1 - params.eps * nfr.r_p) * nf + params.eps * nfr.f_p * nr
        if masks is not None:
            face = [f for f in masks.faces if f.side == side][0]
            active = face.gamma_plus.reshape(-1)
        else:
            active = (nfr.f_p > 0) & (cond > 0)
        keep = active & (nfr.f_p > 0)
        if not np.any(keep):
            continue
        lz = np.full(tm.shape, -np.inf)
        lz[keep] = 2 * params.a * log_weight_base(frame, params, tm[keep], xw[keep])
        speed = curve.velocity(tm)
        integrand = np.exp(lz) * cond * nm**2 * np.sqrt(1 - speed**2)
        total += float(np.sum(np.where(keep, integrand, 0.0)) * g.k)
    return total


def field_from_expression(domain, grid, node, coeffs=None):
    """Nodal samples of a closed-form function as a non-Dirichlet field."""
    if isinstance(node, str):
        node = E.parse(node)
    t = grid.times[:, None]
    lo = domain.lower[0](grid.times)[:, None]
    L = domain.upper[0](grid.times)[:, None] - lo
    x = lo + grid.xi[None, :] * L
    vals = E.evaluate_like(node, {"t": np.broadcast_to(t, x.shape), "x": x, "x1": x}, x)
    return SpacetimeField(domain, grid, vals, coeffs or CoefficientSet(), dirichlet=False)
