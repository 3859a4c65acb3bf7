"""Interior control by the duality (HUM) method with conjugate gradients.

The discrete controlled system advances level pairs; its rows are

    Tnew_n y^{n+1} = Tcur_n y^n + Told_n y^{n-1} - k^2 S^n,  n = 1..Nt-1.

The adjoint state is obtained from the exact transpose of these rows, so
the map ``seed -> final levels`` is symmetric for the Euclidean pairing
and equals the observation form of the adjoint field on ``W'``.  The
transpose realises the adjoint system with potential ``q + div X``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NoConvergence, UnstableBlowup, ValidationError
from .estimates import CellOperator
from .wavesolver import (BLOWUP, MappedScheme, SpacetimeField, _eval_data, run_scheme,
                         solve_controlled)


def _transpose(tri):
    """Transpose a batch of tridiagonals stored as ``(sub, diag, sup)`` rows."""
    out = np.zeros_like(tri)
    out[..., 1, :] = tri[..., 1, :]
    out[..., 0, 1:] = tri[..., 2, :-1]
    out[..., 2, :-1] = tri[..., 0, 1:]
    return out


@dataclass
class HUMState:
    """Bookkeeping of one control synthesis."""

    seed: np.ndarray
    apply_count: int = 0
    residuals: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0


class HUMContext:
    """Precomputed operators for gramian applications on one configuration.

    ``weights`` are the ``W'`` cell fractions on the solver cell grid.
    """

    def __init__(self, domain, coeffs, grid, weights, backend=None):
        self.domain, self.coeffs, self.grid = domain, coeffs, grid
        self.scheme = MappedScheme(domain, coeffs, grid, "controlled")
        self.backend = backend
        self.op = CellOperator(domain, grid)
        w = np.array(weights, dtype=float)
        if w.shape != self.op.cells.shape:
            raise ValidationError("weights do not match the cell grid")
        # rows touching the first and last level carry no observation
        w[0] = 0.0
        w[-1] = 0.0
        self.weights = w
        self.q = self.op.observation_form(w)
        new, cur, old = self.scheme.tridiagonals(+1)
        self.new, self.cur, self.old = new, cur, old
        nt = grid.Nt
        # step m = Nt..2 computes lambda^{m-1}
        ms = np.arange(nt, 1, -1)
        zero = np.zeros_like(new[:1])
        old_ext = np.concatenate([old, zero], axis=0)  # Told_{Nt+1} multiplies zero
        self._adj_new = np.ascontiguousarray(_transpose(new[ms - 1]))
        self._adj_cur = np.ascontiguousarray(_transpose(cur[ms]))
        self._adj_old = np.ascontiguousarray(_transpose(old_ext[ms + 1]))
        self._scale = grid.k * grid.hhat * self.scheme.L   # per level
        self.apply_count = 0

    @property
    def size(self):
        return 2 * self.grid.Nx

    @property
    def control_support(self):
        """Nodes touched by a cell with positive weight (boundary columns excluded)."""
        act = self.weights > 0
        nodes = np.zeros((self.grid.Nt + 1, self.grid.Nx + 2), dtype=bool)
        nodes[:-1, :-1] |= act
        nodes[:-1, 1:] |= act
        nodes[1:, :-1] |= act
        nodes[1:, 1:] |= act
        nodes[:, 0] = nodes[:, -1] = False
        return nodes

    def split(self, vec):
        m = self.grid.Nx
        return vec[:m], vec[m:]

    def adjoint_levels(self, seed):
        """Multipliers ``lambda^n`` (levels 1..Nt-1) for a seed ``(g_N, g_{N-1})``."""
        g = self.grid
        gN, gN1 = self.split(np.asarray(seed, dtype=float))
        src = np.zeros((g.Nt - 1, g.Nx))
        src[0] = -g.k**2 * gN
        src[1] = -g.k**2 * gN1
        out = np.zeros((g.Nt + 1, g.Nx))
        sweep = kernels.three_level_sweep if self.backend is None else kernels.BACKENDS[self.backend]
        bad = sweep(self._adj_new, self._adj_cur, self._adj_old, src, out, BLOWUP)
        if bad >= 0:
            raise UnstableBlowup(step=g.Nt - 1 - bad, value=float(np.max(np.abs(out[bad + 2]))))
        lam = np.zeros((g.Nt + 1, g.Nx))
        lam[1:g.Nt] = out[:1:-1]   # out[s+2] holds lambda^{Nt-1-s}
        return lam

    def adjoint_field(self, seed):
        """Physical adjoint values ``phi^n = lambda^n / (k h L_n)`` with zero walls."""
        lam = self.adjoint_levels(seed)
        vals = np.zeros((self.grid.Nt + 1, self.grid.Nx + 2))
        vals[:, 1:-1] = lam / self._scale[:, None]
        return vals

    def source_from_adjoint(self, phi_values):
        """Weak control source ``S = Q phi / (k h L)`` on interior nodes, levels 1..Nt-1."""
        qphi = self.q(phi_values)
        src = np.zeros_like(qphi)
        src[1:-1, 1:-1] = qphi[1:-1, 1:-1] / self._scale[1:-1, None]
        return src

    def forward_final(self, src):
        """Final level pair ``(y^N, y^{N-1})`` from zero data and source ``src``."""
        g = self.grid
        levels = run_scheme(self.scheme, np.zeros(g.Nx), np.zeros(g.Nx), +1,
                            np.ascontiguousarray(src[:, 1:-1]), self.backend)
        return np.concatenate([levels[-1], levels[-2]])

    def apply(self, seed):
        """Gramian: seed -> final levels of the controlled system."""
        self.apply_count += 1
        phi = self.adjoint_field(seed)
        return self.forward_final(self.source_from_adjoint(phi))

    def form(self, seed_a, seed_b):
        """``<Lambda a, b>`` computed directly from two adjoint fields."""
        pa = self.adjoint_field(seed_a)
        pb = self.adjoint_field(seed_b)
        return float(np.sum(pa * self.q(pb)))

    # state <-> level pairs at tau_plus
    def levels_from_state(self, y, yt):
        """Level pair ``(y^N, y^{N-1})`` for a final state on interior nodes."""
        n = self.grid.Nt
        w = self.scheme.mapped_velocity(n, y, yt)
        prev = self.scheme.first_step(n, y, w, -1)
        return np.concatenate([y, prev])

    def state_from_levels(self, vec):
        n = self.grid.Nt
        y, prev = self.split(vec)
        w = self.scheme.velocity_from_levels(n, y, prev, -1)
        return y, self.scheme.physical_velocity(n, y, w)

    def state_norm(self, y, yt):
        """Discrete ``H^1 x L^2`` norm on the last level."""
        hL = self.grid.hhat * self.scheme.L[-1]
        p = np.pad(y, 1)
        grad = np.sum(np.diff(p) ** 2) / hL
        return float(np.sqrt(grad + hL * np.sum(y * y) + hL * np.sum(yt * yt)))


def gramian_apply(seed, ctx):
    return ctx.apply(seed)


def gramian_form(seed_a, seed_b, ctx):
    return ctx.form(seed_a, seed_b)


@dataclass
class ControlResult:
    state: HUMState
    control: np.ndarray
    field: SpacetimeField
    free_field: SpacetimeField
    final_error: float
    uncontrolled_error: float
    wall_time_s: float

    @property
    def final_error_ratio(self):
        if self.uncontrolled_error == 0:
            return 0.0
        return self.final_error / self.uncontrolled_error

    @property
    def converged(self):
        return self.state.converged


def conjugate_gradient(apply, rhs, tol=1e-8, max_iter=500):
    """Plain CG; returns ``(x, residual history, converged)``.

    Residuals are relative to ``|rhs|``; the first entry is 1.
    """
    x = np.zeros_like(rhs)
    norm_b = float(np.linalg.norm(rhs))
    if norm_b == 0.0:
        return x, [0.0], True
    r = rhs.copy()
    p = r.copy()
    rr = float(r @ r)
    hist = [1.0]
    for _ in range(max_iter):
        ap = apply(p)
        pap = float(p @ ap)
        if not pap > 0.0:
            return x, hist, False
        alpha = rr / pap
        x += alpha * p
        r -= alpha * ap
        rr_new = float(r @ r)
        hist.append(np.sqrt(rr_new) / norm_b)
        if hist[-1] <= tol:
            return x, hist, True
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x, hist, False


def conjugate_residual(apply, rhs, tol=1e-8, max_iter=500):
    """Conjugate residual iteration for a symmetric positive definite operator.

    Same Krylov spaces and cost as CG (one application per step), but each
    iterate minimises the Euclidean residual, so the history is monotone.
    """
    x = np.zeros_like(rhs)
    norm_b = float(np.linalg.norm(rhs))
    if norm_b == 0.0:
        return x, [0.0], True
    r = rhs.copy()
    ar = apply(r)
    p = r.copy()
    ap = ar.copy()
    rar = float(r @ ar)
    hist = [1.0]
    for _ in range(max_iter):
        apap = float(ap @ ap)
        if not (rar > 0.0 and apap > 0.0):
            return x, hist, False
        alpha = rar / apap
        x += alpha * p
        r -= alpha * ap
        hist.append(float(np.linalg.norm(r)) / norm_b)
        if hist[-1] <= tol:
            return x, hist, True
        ar = apply(r)
        rar_new = float(r @ ar)
        beta = rar_new / rar
        p = r + beta * p
        ap = ar + beta * ap
        rar = rar_new
    return x, hist, False


SOLVERS = {"cr": conjugate_residual, "cg": conjugate_gradient}


def synthesize_control(ctx, initial, target=None, cg_tol=1e-8, max_iter=500, strict=False,
                       method="cr"):
    """Control on ``W'`` steering ``initial`` to ``target`` (default: rest).

    ``initial`` and ``target`` are ``(y, y_t)`` pairs of nodal arrays,
    expressions or callables; the target lives at ``tau_plus``.
    """
    t0 = time.perf_counter()
    g = ctx.grid
    free = solve_controlled(ctx.domain, ctx.coeffs, g, initial, backend=ctx.backend)
    free_vec = np.concatenate([free.values[-1, 1:-1], free.values[-2, 1:-1]])
    xN = ctx.scheme.x[-1]
    if target is None:
        ty = np.zeros(g.Nx)
        tyt = np.zeros(g.Nx)
    else:
        ty = _eval_data(target[0], xN)[1:-1]
        tyt = _eval_data(target[1], xN)[1:-1]
    target_vec = ctx.levels_from_state(ty, tyt)
    rhs = target_vec - free_vec
    start = ctx.apply_count
    scale = max(np.linalg.norm(target_vec), np.linalg.norm(free_vec))
    if np.linalg.norm(rhs) <= cg_tol * scale:
        # free evolution already reaches the target
        seed, hist, ok = np.zeros_like(rhs), [float(np.linalg.norm(rhs) / scale)], True
    else:
        seed, hist, ok = SOLVERS[method](ctx.apply, rhs, cg_tol, max_iter)
    state = HUMState(seed, ctx.apply_count - start, hist, ok, len(hist) - 1)
    if strict and not ok:
        raise NoConvergence(f"CG stopped at relative residual {hist[-1]:.3e}", residuals=hist)
    control = ctx.source_from_adjoint(ctx.adjoint_field(seed))
    controlled = solve_controlled(ctx.domain, ctx.coeffs, g, initial, control=control,
                                  backend=ctx.backend)
    y_end, yt_end = ctx.state_from_levels(
        np.concatenate([controlled.values[-1, 1:-1], controlled.values[-2, 1:-1]]))
    fy, fyt = ctx.state_from_levels(free_vec)
    err = ctx.state_norm(y_end - ty, yt_end - tyt)
    err0 = ctx.state_norm(fy - ty, fyt - tyt)
    return ControlResult(state, control, controlled, free, err, err0,
                         time.perf_counter() - t0)
