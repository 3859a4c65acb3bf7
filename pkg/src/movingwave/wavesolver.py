"""Leapfrog solver for 1+1 dimensional wave systems on moving intervals.

Both systems share the form

    -phi_tt + phi_xx + s (X^t phi_t + X^x phi_x) + P phi = S

with ``s = +1, P = V`` for the adjoint system and ``s = -1, P = q`` for the
controlled system.  With ``xi = (x - alpha(t)) / L(t)`` and
``psi(t, xi) = phi(t, x)`` the equation becomes

    -psi_tt - 2 c psi_txi + A psi_xixi + B psi_xi + E psi_t + P psi = S

where ``c = -(alpha' + xi L') / L``, ``A = 1/L**2 - c**2``,
``B = -(c_t + c c_xi) + s (X^t c + X^x / L)`` and ``E = s X^t``.

The scheme is leapfrog with every term centred at the current level.  The
mixed derivative is centred in time too, so each step solves one
tridiagonal system (diagonal when the wall is static and ``X^t = 0``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import solve_banded

from . import expr as E
from . import kernels
from .errors import CFLViolation, UnstableBlowup, ValidationError

C_SAFE = 0.8
BLOWUP = 1e12


@dataclass(frozen=True)
class GridSpec:
    """``Nx`` interior nodes on the reference interval, ``Nt`` steps."""

    Nx: int
    Nt: int
    tau_minus: float = 0.0
    tau_plus: float = 1.0

    def __post_init__(self):
        if int(self.Nx) < 3 or int(self.Nt) < 2:
            raise ValidationError("grid needs Nx >= 3 and Nt >= 2", field="grid")
        if not self.tau_minus < self.tau_plus:
            raise ValidationError("empty time window", field="grid")

    @classmethod
    def for_domain(cls, domain, Nx, Nt):
        return cls(int(Nx), int(Nt), domain.tau_minus, domain.tau_plus)

    @property
    def hhat(self):
        return 1.0 / (self.Nx + 1)

    @property
    def k(self):
        return (self.tau_plus - self.tau_minus) / self.Nt

    @cached_property
    def times(self):
        return self.tau_minus + self.k * np.arange(self.Nt + 1)

    @cached_property
    def xi(self):
        return np.arange(self.Nx + 2) * self.hhat

    def refined(self):
        """Halve both spacings (``Nx -> 2 Nx + 1``)."""
        return GridSpec(2 * self.Nx + 1, 2 * self.Nt, self.tau_minus, self.tau_plus)

    def as_dict(self):
        return {"Nx": self.Nx, "Nt": self.Nt, "tau_minus": self.tau_minus,
                "tau_plus": self.tau_plus, "hhat": self.hhat, "k": self.k}


def max_stable_step(domain, grid):
    """Largest ``k`` allowed by the CFL rule on the grid's levels."""
    t = grid.times
    lo, up = domain.lower[0], domain.upper[0]
    L = up(t) - lo(t)
    da, db = lo.velocity(t), up.velocity(t)
    speed = np.maximum(np.abs(da), np.abs(db))  # transport speed is linear in xi
    return float(C_SAFE * grid.hhat * np.min(L / (1.0 + speed)))


def check_cfl(domain, grid):
    kmax = max_stable_step(domain, grid)
    if grid.k > kmax * (1 + 1e-12):
        raise CFLViolation(f"time step {grid.k:.6g} exceeds CFL limit {kmax:.6g}; "
                           f"increase Nt to at least "
                           f"{int(np.ceil((grid.tau_plus - grid.tau_minus) / kmax))}")


# ------------------------------------------------------------- coefficients


def _as_node(v, n=1):
    if isinstance(v, E.Node):
        return v
    return E.parse(str(v) if not isinstance(v, (int, float)) else v,
                   variables=E.allowed_variables(n))


@dataclass(frozen=True)
class CoefficientSet:
    """Transport field ``X``, control potential ``q`` and adjoint potential ``V``."""

    Xt: E.Node = E.ZERO
    Xx: E.Node = E.ZERO
    q: E.Node = E.ZERO
    V: E.Node = E.ZERO

    def __post_init__(self):
        for name in ("Xt", "Xx", "q", "V"):
            object.__setattr__(self, name, _as_node(getattr(self, name)))

    @classmethod
    def free(cls):
        return cls()

    @property
    def is_free(self):
        return all(getattr(self, k) == E.ZERO for k in ("Xt", "Xx", "q", "V"))

    def evaluate(self, name, t, x):
        node = getattr(self, name) if isinstance(name, str) else name
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        return E.evaluate_like(node, {"t": t, "x": x, "x1": x}, t)

    @cached_property
    def div_X(self):
        return E.add(self.Xt.diff("t"), E.add(self.Xx.diff("x"), self.Xx.diff("x1")))

    def dual_potential(self):
        """Adjoint potential paired with the controlled system: ``q + div X``."""
        return E.add(self.q, self.div_X)

    def sup_norms(self, domain, grid):
        """``M0 = 1 + sup|V|`` and ``M1 = 1 + sup|(X^t, X^x)|`` on the grid nodes."""
        t = grid.times[:, None]
        x = domain.lower[0](t) + grid.xi[None, :] * (domain.upper[0](t) - domain.lower[0](t))
        v = self.evaluate("V", t, x)
        xt = self.evaluate("Xt", t, x)
        xx = self.evaluate("Xx", t, x)
        m0 = 1.0 + float(np.max(np.abs(v)))
        m1 = 1.0 + float(np.max(np.hypot(xt, xx)))
        if not (np.isfinite(m0) and np.isfinite(m1)):
            raise ValidationError("coefficients are not finite on the domain",
                                  field="coefficients")
        return m0, m1

    def as_dict(self):
        return {k: str(getattr(self, k)) for k in ("Xt", "Xx", "q", "V")}


class MappedScheme:
    """Coefficients of the mapped equation on all levels and interior nodes."""

    def __init__(self, domain, coeffs, grid, system="adjoint"):
        if domain.dim != 1:
            raise ValidationError("the wave solver supports n = 1 only", field="domain.n")
        if system not in ("adjoint", "controlled"):
            raise ValueError(system)
        check_cfl(domain, grid)
        self.domain, self.coeffs, self.grid, self.system = domain, coeffs, grid, system
        s = 1.0 if system == "adjoint" else -1.0
        t = grid.times
        lo, up = domain.lower[0], domain.upper[0]
        self.alpha = lo(t)
        self.L = up(t) - self.alpha
        da, db = lo.velocity(t), up.velocity(t)
        dda, ddb = lo.acceleration(t), up.acceleration(t)
        dL, ddL = db - da, ddb - dda
        xi = grid.xi[None, :]
        T = t[:, None]
        L = self.L[:, None]
        self.x = self.alpha[:, None] + xi * L
        c = -(da[:, None] + xi * dL[:, None]) / L
        ct_plus_ccxi = -(dda[:, None] + xi * ddL[:, None]) / L - 2.0 * c * dL[:, None] / L
        Xt = coeffs.evaluate("Xt", T, self.x)
        Xx = coeffs.evaluate("Xx", T, self.x)
        P = coeffs.evaluate("V" if s > 0 else "q", T, self.x)
        self.c = c                      # (Nt+1, Nx+2), boundary columns included
        self.A = 1.0 / L**2 - c**2
        self.B = -ct_plus_ccxi + s * (Xt * c + Xx / L)
        self.E = s * Xt
        self.P = P

    # interior slices
    def _i(self, arr):
        return arr[:, 1:-1]

    def tridiagonals(self, sigma):
        """``(new, cur, old)`` arrays of shape ``(Nt+1, 3, Nx)`` per current level."""
        g = self.grid
        k, h = g.k, g.hhat
        c, A, B, Ec, P = (self._i(a) for a in (self.c, self.A, self.B, self.E, self.P))
        nl, m = c.shape
        new = np.empty((nl, 3, m))
        cur = np.empty((nl, 3, m))
        old = np.empty((nl, 3, m))
        off = sigma * c * k / (2.0 * h)
        new[:, 0] = -off
        new[:, 1] = 1.0 - sigma * Ec * k / 2.0
        new[:, 2] = off
        old[:, 0] = -off
        old[:, 1] = -1.0 - sigma * Ec * k / 2.0
        old[:, 2] = off
        cur[:, 0] = k * k * (A / h**2 - B / (2 * h))
        cur[:, 1] = 2.0 + k * k * (-2.0 * A / h**2 + P)
        cur[:, 2] = k * k * (A / h**2 + B / (2 * h))
        for arr in (new, cur, old):
            arr[:, 0, 0] = 0.0
            arr[:, 2, -1] = 0.0
        return new, cur, old

    # spatial difference operators on interior values with zero boundary
    def _d0(self, v):
        p = np.pad(v, 1)
        return (p[2:] - p[:-2]) / (2.0 * self.grid.hhat)

    def _d2(self, v):
        p = np.pad(v, 1)
        return (p[2:] - 2.0 * p[1:-1] + p[:-2]) / self.grid.hhat**2

    def _rest_operator(self, n, v, w):
        """``A psi_xixi + B psi_xi + E w - 2 c w_xi + P psi`` at level ``n``."""
        c, A, B, Ec, P = (self._i(a)[n] for a in (self.c, self.A, self.B, self.E, self.P))
        return A * self._d2(v) + B * self._d0(v) + Ec * w - 2.0 * c * self._d0(w) + P * v

    def first_step(self, n, v, w, sigma, src=None):
        """Level ``n + sigma`` from the value ``v`` and ``w = psi_t`` at level ``n``."""
        k = self.grid.k
        acc = self._rest_operator(n, v, w)
        if src is not None:
            acc = acc - src
        return v + sigma * k * w + 0.5 * k * k * acc

    def velocity_from_levels(self, n, v, v_next, sigma, src=None):
        """Inverse of :meth:`first_step`: ``w`` with ``first_step(n, v, w) = v_next``."""
        g = self.grid
        k, h = g.k, g.hhat
        c, Ec = self._i(self.c)[n], self._i(self.E)[n]
        rhs = v_next - v - 0.5 * k * k * self._rest_operator(n, v, np.zeros_like(v))
        if src is not None:
            rhs = rhs + 0.5 * k * k * src
        ab = np.zeros((3, v.shape[0]))
        ab[1] = sigma * k + 0.5 * k * k * Ec
        # -k^2 c d0(w): sup coefficient on w[j+1] is -k^2 c_j / (2h)
        ab[0, 1:] = -k * k * c[:-1] / (2 * h)
        ab[2, :-1] = k * k * c[1:] / (2 * h)
        return solve_banded((1, 1), ab, rhs)

    def mapped_velocity(self, n, v, phys_t):
        """``psi_t = phi_t - c psi_xi`` at level ``n`` from interior values."""
        return phys_t - self._i(self.c)[n] * self._d0(v)

    def physical_velocity(self, n, v, w):
        return w + self._i(self.c)[n] * self._d0(v)


# ------------------------------------------------------------------ fields


@dataclass
class SpacetimeField:
    """Nodal values ``values[n, j]`` at ``(t_n, alpha + xi_j L)``."""

    domain: object
    grid: GridSpec
    values: np.ndarray
    coeffs: CoefficientSet = field(default_factory=CoefficientSet)
    system: str = "adjoint"
    dirichlet: bool = True

    def __post_init__(self):
        g = self.grid
        if self.values.shape != (g.Nt + 1, g.Nx + 2):
            raise ValidationError("field shape does not match the grid")
        if self.dirichlet and (np.any(self.values[:, 0] != 0) or np.any(self.values[:, -1] != 0)):
            raise ValidationError("Dirichlet field has nonzero boundary values")

    @cached_property
    def alpha(self):
        return self.domain.lower[0](self.grid.times)

    @cached_property
    def L(self):
        return self.domain.upper[0](self.grid.times) - self.alpha

    @cached_property
    def x(self):
        return self.alpha[:, None] + self.grid.xi[None, :] * self.L[:, None]

    @cached_property
    def c(self):
        t = self.grid.times
        da = self.domain.lower[0].velocity(t)
        db = self.domain.upper[0].velocity(t)
        return -(da[:, None] + self.grid.xi[None, :] * (db - da)[:, None]) / self.L[:, None]

    @property
    def times(self):
        return self.grid.times

    def level_index(self, tau):
        n = int(round((tau - self.grid.tau_minus) / self.grid.k))
        if n < 0 or n > self.grid.Nt:
            raise ValidationError(f"time {tau} outside the window")
        return n

    def psi_t(self):
        """Mapped time derivative at every node (second order, one-sided at ends)."""
        v, k = self.values, self.grid.k
        out = np.empty_like(v)
        out[1:-1] = (v[2:] - v[:-2]) / (2 * k)
        out[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * k)
        out[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * k)
        return out

    def psi_xi(self):
        v, h = self.values, self.grid.hhat
        out = np.empty_like(v)
        out[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * h)
        out[:, 0] = (-3 * v[:, 0] + 4 * v[:, 1] - v[:, 2]) / (2 * h)
        out[:, -1] = (3 * v[:, -1] - 4 * v[:, -2] + v[:, -3]) / (2 * h)
        return out

    def phi_t(self):
        """Physical ``d/dt`` at fixed ``x``."""
        return self.psi_t() + self.c * self.psi_xi()

    def phi_x(self):
        return self.psi_xi() / self.L[:, None]

    def slice(self, tau):
        """``(x, value, phi_t)`` on the level nearest to ``tau``."""
        n = self.level_index(tau)
        return self.x[n], self.values[n], self.phi_t()[n]

    def interpolate(self, t, x):
        """Bilinear interpolation in ``(t, xi)``; zero outside the domain."""
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        g = self.grid
        a = self.domain.lower[0](t)
        L = self.domain.upper[0](t) - a
        xi = (x - a) / L
        s = np.clip((t - g.tau_minus) / g.k, 0, g.Nt)
        r = np.clip(xi / g.hhat, 0, g.Nx + 1)
        n0 = np.minimum(np.floor(s).astype(int), g.Nt - 1)
        j0 = np.minimum(np.floor(r).astype(int), g.Nx)
        ws, wr = s - n0, r - j0
        v = self.values
        out = ((1 - ws) * ((1 - wr) * v[n0, j0] + wr * v[n0, j0 + 1])
               + ws * ((1 - wr) * v[n0 + 1, j0] + wr * v[n0 + 1, j0 + 1]))
        inside = (xi >= 0) & (xi <= 1) & (t >= g.tau_minus) & (t <= g.tau_plus)
        return np.where(inside, out, 0.0)

    def __mul__(self, c):
        return SpacetimeField(self.domain, self.grid, self.values * c, self.coeffs,
                              self.system, self.dirichlet)

    __rmul__ = __mul__


# ------------------------------------------------------------------- solves


def _eval_data(item, x, t=None):
    if item is None:
        return np.zeros_like(x)
    if isinstance(item, np.ndarray):
        return np.asarray(item, dtype=float)
    if isinstance(item, (str, E.Node)):
        node = _as_node(item)
        tt = np.zeros_like(x) if t is None else np.broadcast_to(t, x.shape)
        return E.evaluate_like(node, {"t": tt, "x": x, "x1": x}, x)
    if callable(item):
        if t is None:
            return np.asarray(item(x), dtype=float) * np.ones_like(x)
        return np.asarray(item(t, x), dtype=float) * np.ones_like(x)
    return np.full_like(x, float(item))


def _source_levels(source, scheme):
    """Source values on all levels at interior nodes, or ``None``."""
    if source is None:
        return None
    g = scheme.grid
    if isinstance(source, np.ndarray):
        if source.shape == (g.Nt + 1, g.Nx + 2):
            return np.ascontiguousarray(source[:, 1:-1], dtype=float)
        if source.shape == (g.Nt + 1, g.Nx):
            return np.ascontiguousarray(source, dtype=float)
        raise ValidationError("source array does not match the grid")
    T = np.broadcast_to(g.times[:, None], scheme.x.shape)
    vals = _eval_data(source, scheme.x, T)
    return np.ascontiguousarray(vals[:, 1:-1])


def _check_boundary(v, name, tol=1e-10):
    scale = max(1.0, float(np.max(np.abs(v))))
    if abs(v[0]) > tol * scale or abs(v[-1]) > tol * scale:
        raise ValidationError(f"{name} does not vanish at the boundary nodes")


def run_scheme(scheme, first, second, sigma, src=None, backend=None):
    """Sweep from two given levels; returns all levels in time order.

    ``first``/``second`` are interior values at the starting level and the
    next level in direction ``sigma``; ``src`` holds source values per level.
    """
    g = scheme.grid
    nt, m = g.Nt, g.Nx
    new, cur, old = scheme.tridiagonals(sigma)
    if sigma > 0:
        levels = np.arange(1, nt)          # current level of each step
    else:
        levels = np.arange(nt - 1, 0, -1)
    k2 = g.k**2
    s_steps = np.zeros((nt - 1, m)) if src is None else -k2 * src[levels]
    out = np.zeros((nt + 1, m))
    out[0], out[1] = first, second
    sweep = kernels.three_level_sweep if backend is None else kernels.BACKENDS[backend]
    bad = sweep(np.ascontiguousarray(new[levels]), np.ascontiguousarray(cur[levels]),
                np.ascontiguousarray(old[levels]), np.ascontiguousarray(s_steps),
                out, BLOWUP)
    if bad >= 0:
        lvl = int(levels[bad] + sigma)
        raise UnstableBlowup(step=lvl, value=float(np.max(np.abs(out[bad + 2]))))
    if sigma < 0:
        out = out[::-1]
    return out


def _solve(domain, coeffs, grid, system, initial, direction, source, backend):
    scheme = MappedScheme(domain, coeffs, grid, system)
    sigma = 1 if direction == "forward" else -1
    if direction not in ("forward", "backward"):
        raise ValidationError("direction must be 'forward' or 'backward'")
    n0 = 0 if sigma > 0 else grid.Nt
    x0 = scheme.x[n0]
    d0 = _eval_data(initial[0], x0)
    d1 = _eval_data(initial[1], x0)
    _check_boundary(d0, "initial value")
    v = d0[1:-1].copy()
    w = scheme.mapped_velocity(n0, v, d1[1:-1])
    src = _source_levels(source, scheme)
    second = scheme.first_step(n0, v, w, sigma, None if src is None else src[n0])
    levels = run_scheme(scheme, v, second, sigma, src, backend)
    values = np.zeros((grid.Nt + 1, grid.Nx + 2))
    values[:, 1:-1] = levels
    return SpacetimeField(domain, grid, values, coeffs, system)


def solve_adjoint(domain, coeffs, grid, initial, direction="forward", source=None,
                  backend=None):
    """Solve ``-phi_tt + phi_xx + X.grad phi + V phi = source``, ``phi = 0`` on the walls.

    ``initial = (phi0, phi1)`` is given at ``tau_minus`` for a forward sweep
    and at ``tau_plus`` for a backward sweep.  Entries may be nodal arrays
    (``Nx + 2`` values), expression strings in ``x``, or callables.
    """
    return _solve(domain, coeffs, grid, "adjoint", initial, direction, source, backend)


def solve_controlled(domain, coeffs, grid, initial, control=None, backend=None):
    """Solve ``-y_tt + y_xx - X.grad y + q y = control`` forward from ``tau_minus``.

    ``control`` is a nodal source array (``(Nt+1, Nx+2)``), typically the
    output of the duality loop, which vanishes away from ``W'``.
    """
    return _solve(domain, coeffs, grid, "controlled", initial, "forward", control, backend)


# ---------------------------------------------------------------- energies


@dataclass(frozen=True)
class Energy:
    gradient: float
    l2: float
    total: float

    def as_dict(self):
        return {"gradient": self.gradient, "l2": self.l2, "total": self.total}


def _trapezoid_weights(m):
    w = np.ones(m)
    w[0] = w[-1] = 0.5
    return w


def energy_levels(fld, m0=None, mask=None):
    """Energies on every level: ``int |grad phi|^2``, ``int phi^2`` and the total.

    ``mask`` optionally restricts the nodal integrands (nodes with weight 0
    are dropped; edges need both ends).
    """
    g = fld.grid
    if m0 is None:
        m0 = fld.coeffs.sup_norms(fld.domain, g)[0]
    h = g.hhat * fld.L[:, None]
    v = fld.values
    pt = fld.phi_t()
    wts = _trapezoid_weights(g.Nx + 2)[None, :]
    node_mask = np.ones_like(v) if mask is None else mask.astype(float)
    edge_mask = node_mask[:, 1:] * node_mask[:, :-1]
    dx = np.diff(v, axis=1) / h
    grad = np.sum(h * edge_mask * dx**2, axis=1) + np.sum(h * wts * node_mask * pt**2, axis=1)
    l2 = np.sum(h * wts * node_mask * v**2, axis=1)
    return grad, l2, grad + m0 * l2


def energy(fld, domain=None, coeffs=None, tau=None, m0=None):
    """Energy of ``fld`` on the level nearest to ``tau``."""
    if coeffs is not None and m0 is None:
        m0 = coeffs.sup_norms(fld.domain, fld.grid)[0]
    grad, l2, tot = energy_levels(fld, m0)
    n = fld.level_index(fld.grid.tau_minus if tau is None else tau)
    return Energy(float(grad[n]), float(l2[n]), float(tot[n]))


def discrete_energy(fld):
    """Conserved quantity of the scheme between levels ``n`` and ``n + 1``.

    Exact invariant for a static interval with ``X = 0`` and time-independent
    potential; returns ``Nt`` values.
    """
    g = fld.grid
    v = fld.values
    L = fld.L
    h = g.hhat * L[:-1]
    scheme = MappedScheme(fld.domain, fld.coeffs, g, fld.system)
    A = scheme.A[:-1, 1:]  # use the edge value, constant for a static interval
    P = scheme.P[:-1]
    dv = np.diff(v, axis=0) / g.k
    kin = np.sum(h[:, None] * dv**2, axis=1)
    edges = np.sum(h[:, None] * A * (np.diff(v[1:], axis=1) / g.hhat)
                   * (np.diff(v[:-1], axis=1) / g.hhat), axis=1)
    pot = np.sum(h[:, None] * P * v[1:] * v[:-1], axis=1)
    return kin + edges - pot


def free_wave_operator(values, grid, L=1.0):
    """``-D_tt y + D_xx y`` on interior levels and nodes of a static grid."""
    k, h = grid.k, grid.hhat * L
    y = values
    return (-(y[2:, 1:-1] - 2 * y[1:-1, 1:-1] + y[:-2, 1:-1]) / k**2
            + (y[1:-1, 2:] - 2 * y[1:-1, 1:-1] + y[1:-1, :-2]) / h**2)


def duality_defect(y, phi, grid, L=1.0):
    """``<Ly, phi> - <y, L phi>`` minus the time-boundary terms.

    For fields vanishing on the spatial boundary the remainder is the
    summation-by-parts residual of the stencil and should be roundoff.
    """
    k, h = grid.k, grid.hhat * L
    Ly = free_wave_operator(y, grid, L)
    Lp = free_wave_operator(phi, grid, L)
    inner = h * k * (np.sum(Ly * phi[1:-1, 1:-1]) - np.sum(y[1:-1, 1:-1] * Lp))
    # time boundary terms of sum_n (y^{n+1} - 2y^n + y^{n-1}) phi^n
    yi, pi = y[:, 1:-1], phi[:, 1:-1]
    bt = -(h / k) * (np.sum(yi[-1] * pi[-2] - yi[-2] * pi[-1])
                     - np.sum(yi[1] * pi[0] - yi[0] * pi[1]))
    scale = h * k * (np.sum(np.abs(Ly * phi[1:-1, 1:-1])) + np.sum(np.abs(y[1:-1, 1:-1] * Lp)))
    return float(inner - bt), float(scale)
