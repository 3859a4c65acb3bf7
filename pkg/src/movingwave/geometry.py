"""Moving-boundary domains, shifted null coordinates and observation regions.

A domain is a box whose faces move in time, ``alpha_i(t) < x_i < beta_i(t)``.
In one space dimension this is an interval with two moving walls; for
``n >= 2`` the box has corners, which are excluded from every boundary mask.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from . import expr as E
from .errors import (EmptyRegion, LuminalBoundary, NotOnBoundary,
                     ValidationError)

DEFAULT_MARGIN = 0.05


class _Curve:
    """A boundary curve ``t -> value`` with two analytic derivatives."""

    def __init__(self, node):
        if isinstance(node, str) or isinstance(node, (int, float)):
            node = E.parse(node, variables={"t"})
        extra = node.variables() - {"t"} - set(E.CONSTANTS)
        if extra:
            raise ValidationError(
                f"boundary curve may depend on t only, found {sorted(extra)}")
        self.node = node
        self.d1 = node.diff("t")
        self.d2 = self.d1.diff("t")

    def _eval(self, node, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(E.evaluate(node, {"t": t}), dtype=float),
                               t.shape).copy() if t.shape else float(E.evaluate(node, {"t": t}))

    def __call__(self, t):
        return self._eval(self.node, t)

    def velocity(self, t):
        return self._eval(self.d1, t)

    def acceleration(self, t):
        return self._eval(self.d2, t)


@dataclass(frozen=True)
class MovingDomain:
    """Box domain with time-dependent faces on the window ``[tau_minus, tau_plus]``."""

    lower: tuple
    upper: tuple
    tau_minus: float
    tau_plus: float
    margin: float = DEFAULT_MARGIN
    sample_resolution: int = 200

    def __post_init__(self):
        lo = tuple(c if isinstance(c, _Curve) else _Curve(c) for c in self.lower)
        up = tuple(c if isinstance(c, _Curve) else _Curve(c) for c in self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        if len(lo) != len(up) or len(lo) not in (1, 2, 3):
            raise ValidationError("dimension must be 1, 2 or 3 with one lower and "
                                  "one upper curve per axis", field="domain.n")
        if not self.tau_minus < self.tau_plus:
            raise ValidationError("tau_minus must be below tau_plus",
                                  field="domain.tau_plus")
        if not 0.0 < self.margin < 1.0:
            raise ValidationError("margin must lie in (0, 1)", field="domain.margin")
        self.validate()

    @classmethod
    def interval(cls, lower, upper, tau_minus, tau_plus, **kw):
        return cls((lower,), (upper,), tau_minus, tau_plus, **kw)

    @property
    def dim(self):
        return len(self.lower)

    @property
    def window(self):
        return (self.tau_minus, self.tau_plus)

    def sample_times(self):
        n = max(2, int(math.ceil(self.sample_resolution * (self.tau_plus - self.tau_minus))) + 1)
        return np.linspace(self.tau_minus, self.tau_plus, n)

    def validate(self):
        ts = self.sample_times()
        for i in range(self.dim):
            width = self.upper[i](ts) - self.lower[i](ts)
            if not np.all(np.isfinite(width)) or np.any(width <= 0.0):
                raise ValidationError(f"empty cross section along axis {i + 1}",
                                      field="domain.boundaries")
            speed = max(np.max(np.abs(self.lower[i].velocity(ts))),
                        np.max(np.abs(self.upper[i].velocity(ts))))
            if speed > 1.0 - self.margin:
                raise ValidationError(
                    f"boundary speed {speed:.4g} along axis {i + 1} exceeds "
                    f"1 - margin = {1.0 - self.margin:.4g} (boundary not timelike)",
                    field="domain.boundaries")

    def alpha(self, t):
        return np.stack([c(t) for c in self.lower], axis=-1)

    def beta(self, t):
        return np.stack([c(t) for c in self.upper], axis=-1)

    def width(self, t):
        return self.beta(t) - self.alpha(t)

    def max_speed(self):
        ts = self.sample_times()
        return max(float(np.max(np.abs(c.velocity(ts))))
                   for c in self.lower + self.upper)

    def contains(self, t, x, closed=False):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        a = self.alpha(t)
        b = self.beta(t)
        if x.ndim == t.ndim:
            x = x[..., None]
        if closed:
            return np.all((x >= a) & (x <= b), axis=-1)
        return np.all((x > a) & (x < b), axis=-1)

    def boundary_radius(self, tau, x0):
        """``sup |y - x0|`` over the boundary of the slice at ``tau``."""
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        a = self.alpha(tau)
        b = self.beta(tau)
        far = np.maximum(np.abs(a - x0), np.abs(b - x0))
        return float(np.sqrt(np.sum(far**2)))

    def slice_distance(self, tau, x0):
        """Distance from ``x0`` to the closed slice at ``tau`` (0 inside)."""
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        a = self.alpha(tau)
        b = self.beta(tau)
        nearest = np.clip(x0, a, b)
        return float(np.linalg.norm(x0 - nearest))


class CylinderMap:
    """Reparametrisation ``xhat_i = (x_i - alpha_i(t)) / (beta_i(t) - alpha_i(t))``."""

    def __init__(self, domain):
        self.domain = domain

    def forward(self, t, x):
        x = np.asarray(x, dtype=float)
        a = self.domain.alpha(t)
        return (x - a) / (self.domain.beta(t) - a)

    def inverse(self, t, xhat):
        xhat = np.asarray(xhat, dtype=float)
        a = self.domain.alpha(t)
        return a + xhat * (self.domain.beta(t) - a)

    def dxhat_dx(self, t):
        return 1.0 / self.domain.width(t)

    def dxhat_dt(self, t, xhat):
        d = self.domain
        da = np.stack([c.velocity(t) for c in d.lower], axis=-1)
        db = np.stack([c.velocity(t) for c in d.upper], axis=-1)
        return -(da + np.asarray(xhat) * (db - da)) / d.width(t)


class NullFrame(NamedTuple):
    t_p: np.ndarray
    r_p: np.ndarray
    u_p: np.ndarray
    v_p: np.ndarray
    f_p: np.ndarray


@dataclass(frozen=True)
class ObservationFrame:
    """Shifted coordinates about ``p = (t0, x0)``.

    ``r_plus`` bounds ``r_p`` on the part of the domain outside the null
    cone of ``p``; ``r_minus`` depends on where ``p`` sits (see
    :meth:`for_domain`).
    """

    t0: float
    x0: np.ndarray
    r_plus: float = float("nan")
    r_minus: float = float("nan")
    location: str = "unknown"

    def __post_init__(self):
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=float)))

    @property
    def dim(self):
        return self.x0.shape[0]

    @classmethod
    def for_domain(cls, domain, t0, x0, resolution=(200, 200), twin_offset=None):
        """Build a frame and compute ``r_plus``/``r_minus`` on ``domain``.

        ``r_minus`` is the distance from ``x0`` to the slice at ``t0`` when
        ``p`` lies outside the closed domain.  For interior and boundary
        points it is ``twin_offset`` if given (half the separation of the
        twin observation points), otherwise the boundary radius at
        ``tau_minus``.
        """
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        if x0.shape[0] != domain.dim:
            raise ValidationError("x0 dimension does not match domain",
                                  field="observation.x0")
        base = cls(float(t0), x0)
        location = classify_point(domain, t0, x0)
        r_plus = radius_bound(domain, base, resolution)
        if location == "exterior":
            r_minus = domain.slice_distance(t0, x0)
        elif twin_offset is not None:
            r_minus = float(twin_offset)
        else:
            r_minus = domain.boundary_radius(domain.tau_minus, x0)
        return cls(float(t0), x0, r_plus, r_minus, location)

    def twin_points(self, offset, axis=0):
        """Two points at time ``t0`` separated by ``2 * offset``."""
        e = np.zeros(self.dim)
        e[axis] = offset
        return (ObservationFrame(self.t0, self.x0 - e), ObservationFrame(self.t0, self.x0 + e))


def classify_point(domain, t0, x0, tol=1e-12):
    a = domain.alpha(t0)
    b = domain.beta(t0)
    x0 = np.atleast_1d(x0)
    if np.all(x0 > a + tol) and np.all(x0 < b - tol):
        return "interior"
    if np.all(x0 >= a - tol) and np.all(x0 <= b + tol):
        return "boundary"
    return "exterior"


def eval_null_frame(frame, t, x):
    """Shifted Cartesian/null coordinates of the points ``(t, x)``.

    ``x`` has shape ``(..., n)`` (a trailing axis may be omitted when n=1).
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == t.ndim:
        x = x[..., None]
    t_p = t - frame.t0
    x_p = x - frame.x0
    r_p = np.sqrt(np.sum(x_p * x_p, axis=-1))
    u_p = 0.5 * (t_p - r_p)
    v_p = 0.5 * (t_p + r_p)
    f_p = -u_p * v_p
    return NullFrame(t_p, r_p, u_p, v_p, f_p)


def radius_bound(domain, frame, resolution=(200, 200)):
    """Upper bound for ``r_p`` on the closed domain outside the cone.

    Maximum over grid nodes where ``f_p > 0`` plus one physical spatial
    spacing, which covers the continuum supremum.
    """
    nt, nx = resolution
    ts = np.linspace(domain.tau_minus, domain.tau_plus, nt + 1)
    best = 0.0
    hmax = 0.0
    n = domain.dim
    xh = np.linspace(0.0, 1.0, nx + 1)
    grids = np.meshgrid(*([xh] * n), indexing="ij")
    xhat = np.stack([g.ravel() for g in grids], axis=-1)
    for t in ts:
        a = domain.alpha(t)
        w = domain.width(t)
        x = a + xhat * w
        nf = eval_null_frame(frame, np.full(x.shape[0], t), x)
        sel = nf.f_p > 0
        if np.any(sel):
            best = max(best, float(np.max(nf.r_p[sel])))
        hmax = max(hmax, float(np.max(w)) / nx)
    return best + hmax


# ----------------------------------------------------------------- normals


def face_normal(domain, axis, side, t):
    """Minkowski outward unit normal on the face ``x_axis = alpha/beta(t)``.

    Returns ``(nu_t, nu_axis)``; the remaining spatial components vanish.
    """
    curve = domain.lower[axis] if side == "lower" else domain.upper[axis]
    s = np.asarray(curve.velocity(t), dtype=float)
    if np.any(np.abs(s) >= 1.0 - domain.margin):
        raise LuminalBoundary("boundary speed reaches the light-speed margin")
    gamma = 1.0 / np.sqrt(1.0 - s * s)
    sign = 1.0 if side == "upper" else -1.0
    # tangent (1, s) is g-orthogonal to (s, 1)
    return sign * s * gamma, sign * gamma


def minkowski_normal(domain, t, x, tol=1e-9):
    """Outward unit normal ``N = (nu_t, nu)`` at the boundary point ``(t, x)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    a = domain.alpha(t)
    b = domain.beta(t)
    hits = []
    for i in range(domain.dim):
        if abs(x[i] - a[i]) <= tol * max(1.0, abs(a[i])):
            hits.append((i, "lower"))
        elif abs(x[i] - b[i]) <= tol * max(1.0, abs(b[i])):
            hits.append((i, "upper"))
    inside = np.all((x >= a - tol) & (x <= b + tol))
    if not hits or not inside:
        raise NotOnBoundary(f"point ({t}, {x.tolist()}) is not on the boundary")
    if len(hits) > 1:
        raise NotOnBoundary("normal undefined at a corner of the box")
    i, side = hits[0]
    nu_t, nu_i = face_normal(domain, i, side, t)
    nu = np.zeros(domain.dim)
    nu[i] = float(nu_i)
    return float(nu_t), nu


def normal_derivatives(frame, t, x, nu_t, nu):
    """``N f_p`` and ``N r_p`` for a normal ``(nu_t, nu)`` at ``(t, x)``."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == t.ndim:
        x = x[..., None]
    x_p = x - frame.x0
    t_p = t - frame.t0
    xdotnu = np.sum(x_p * nu, axis=-1)
    r_p = np.sqrt(np.sum(x_p * x_p, axis=-1))
    nf = 0.5 * (xdotnu - t_p * nu_t)
    with np.errstate(divide="ignore", invalid="ignore"):
        nr = np.where(r_p > 0, xdotnu / r_p, 0.0)
    return nf, nr


# ------------------------------------------------------------------- grids


@dataclass(frozen=True)
class CellGrid:
    """Uniform cells in mapped coordinates ``(t, xhat)`` on the window."""

    domain: MovingDomain
    nt: int
    ncells: tuple

    def __post_init__(self):
        nc = tuple(int(v) for v in np.atleast_1d(self.ncells))
        if len(nc) != self.domain.dim:
            raise ValidationError("one cell count per spatial axis required")
        object.__setattr__(self, "ncells", nc)

    @classmethod
    def from_solver(cls, domain, grid):
        return cls(domain, grid.Nt, (grid.Nx + 1,))

    @property
    def k(self):
        return (self.domain.tau_plus - self.domain.tau_minus) / self.nt

    @property
    def hhat(self):
        return tuple(1.0 / m for m in self.ncells)

    @property
    def shape(self):
        return (self.nt,) + self.ncells

    @cached_property
    def t_centers(self):
        return self.domain.tau_minus + (np.arange(self.nt) + 0.5) * self.k

    @cached_property
    def xhat_centers(self):
        return tuple((np.arange(m) + 0.5) / m for m in self.ncells)

    def physical(self, t_rows, xhat_axes):
        """Physical coordinates for a tensor grid: ``t`` rows x mapped axes."""
        n = self.domain.dim
        a = self.domain.alpha(t_rows)  # (nt, n)
        w = self.domain.width(t_rows)
        mesh = np.meshgrid(*xhat_axes, indexing="ij")
        shape = (len(t_rows),) + mesh[0].shape
        x = np.empty(shape + (n,))
        for i in range(n):
            sl = (slice(None),) + (None,) * n
            x[..., i] = a[:, i][sl] + mesh[i][None] * w[:, i][sl]
        t = np.broadcast_to(np.asarray(t_rows)[(slice(None),) + (None,) * n], shape)
        return t, x

    @cached_property
    def centers(self):
        return self.physical(self.t_centers, self.xhat_centers)

    @cached_property
    def volumes(self):
        w = self.domain.width(self.t_centers)
        vol = self.k * np.prod(w * np.asarray(self.hhat), axis=-1)
        return np.broadcast_to(vol[(slice(None),) + (None,) * self.domain.dim], self.shape)

    def subsample_offsets(self):
        """``2**(n+1)`` offsets at quarter positions inside a cell."""
        n = self.domain.dim
        out = []
        for bits in range(2 ** (n + 1)):
            out.append(tuple(-0.25 if (bits >> d) & 1 else 0.25 for d in range(n + 1)))
        return out

    def subsample_points(self, offset):
        dt = offset[0] * self.k
        t_rows = self.t_centers + dt
        axes = tuple(xc + o * h for xc, o, h in zip(self.xhat_centers, offset[1:], self.hhat))
        return self.physical(t_rows, axes)

    def spacing(self):
        """Largest physical cell edge (time or space) over the window."""
        w = self.domain.width(self.t_centers)
        return float(max(self.k, np.max(w * np.asarray(self.hhat))))


@dataclass
class Face:
    """Boundary cells of one face of the box on one side."""

    axis: int
    side: str
    t: np.ndarray          # (nt, *tangential)
    x: np.ndarray          # (nt, *tangential, n)
    valid: np.ndarray      # corner cells excluded
    nu_t: np.ndarray
    nu_axis: np.ndarray
    f_p: np.ndarray
    nf_p: np.ndarray
    nr_p: np.ndarray
    r_p: np.ndarray
    area: np.ndarray       # induced measure of each boundary cell
    gamma_plus: np.ndarray = None
    gamma_prime: np.ndarray = None


def build_faces(grid, frame, eps):
    domain = grid.domain
    n = domain.dim
    faces = []
    for axis in range(n):
        tang = [i for i in range(n) if i != axis]
        for side in ("lower", "upper"):
            axes = []
            for i in range(n):
                if i == axis:
                    axes.append(np.array([0.0 if side == "lower" else 1.0]))
                else:
                    axes.append(grid.xhat_centers[i])
            t, x = grid.physical(grid.t_centers, tuple(axes))
            t = np.squeeze(t, axis=1 + axis)
            x = np.squeeze(x, axis=1 + axis)
            valid = np.ones(t.shape, dtype=bool)
            for j, i in enumerate(tang):
                idx = [slice(None)] * valid.ndim
                idx[1 + j] = 0
                valid[tuple(idx)] = False
                idx[1 + j] = -1
                valid[tuple(idx)] = False
            nu_t, nu_ax = face_normal(domain, axis, side, t)
            nu = np.zeros(x.shape)
            nu[..., axis] = nu_ax
            nf, nr = normal_derivatives(frame, t, x, nu_t, nu)
            nfr = eval_null_frame(frame, t, x)
            curve = domain.lower[axis] if side == "lower" else domain.upper[axis]
            s = curve.velocity(t)
            w = domain.width(t)
            area = grid.k * np.sqrt(1.0 - s * s)
            for i in tang:
                area = area * w[..., i] * grid.hhat[i]
            face = Face(axis, side, t, x, valid, nu_t, nu_ax, nfr.f_p, nf, nr,
                        nfr.r_p, area)
            cond = (1.0 - eps * nfr.r_p) * nf + eps * nfr.f_p * nr
            face.gamma_plus = valid & (nfr.f_p > 0) & (cond > 0)
            face.gamma_prime = valid & (nfr.f_p > 0) & (nf > 0)
            faces.append(face)
    return faces


@dataclass
class RegionMasks:
    """Region indicators on a :class:`CellGrid`.

    Cell arrays hold the covered fraction (from ``2**(n+1)`` subsamples);
    face arrays hold booleans per boundary cell.
    """

    grid: CellGrid
    frame: ObservationFrame
    eps: float
    sigma: float
    d_p: np.ndarray
    u_d_p: np.ndarray
    o_sigma: np.ndarray
    o_sigma_prime: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray
    f_center: np.ndarray
    faces: list = field(default_factory=list)

    def measure(self, kind):
        if kind in ("Gamma+", "Gamma'"):
            attr = "gamma_plus" if kind == "Gamma+" else "gamma_prime"
            return float(sum(np.sum(f.area[getattr(f, attr)]) for f in self.faces))
        arr = {"D_p": self.d_p, "U∩D_p": self.u_d_p, "O_sigma": self.o_sigma,
               "W": self.w, "W'": self.w_prime}[kind]
        return float(np.sum(arr * self.grid.volumes))

    @property
    def gamma_plus_empty(self):
        return not any(np.any(f.gamma_plus) for f in self.faces)


def _axis_coords(x_row, n):
    """Per-axis 1D coordinates of a tensor-product block of points."""
    out = []
    for i in range(n):
        idx = [0] * n
        idx[i] = slice(None)
        out.append(x_row[tuple(idx) + (i,)])
    return out


def _sigma_fraction(grid, faces, attr, sigma, frame, require_dp):
    """Fraction of subsamples within ``sigma`` (same time) of active face points.

    Faces are flat, so the squared distance to a face point splits into a
    normal part and a tangential part; only the tangential part needs a
    nearest-neighbour query, on the lower-dimensional tangential grid.
    """
    domain = grid.domain
    n = domain.dim
    offsets = grid.subsample_offsets()
    total = np.zeros(grid.shape)
    if sigma <= 0:
        return total
    for off in offsets:
        t_sub, x_sub = grid.subsample_points(off)
        dt = off[0] * grid.k
        hit = np.zeros(grid.shape, dtype=bool)
        if n == 1:
            # faces are points: vectorise over rows
            tr = grid.t_centers + dt
            best = np.full(grid.shape, np.inf)
            for f in faces:
                curve = domain.lower[0] if f.side == "lower" else domain.upper[0]
                d2 = (x_sub[..., 0] - curve(tr)[:, None]) ** 2
                best = np.where(getattr(f, attr)[:, None], np.minimum(best, d2), best)
            hit = best < sigma * sigma
        for row in range(grid.nt if n > 1 else 0):
            tr = grid.t_centers[row] + dt
            coords = _axis_coords(x_sub[row], n)
            a = domain.alpha(tr)
            w = domain.width(tr)
            a0 = domain.alpha(grid.t_centers[row])
            w0 = domain.width(grid.t_centers[row])
            best = np.full(grid.shape[1:], np.inf)
            for f in faces:
                act = getattr(f, attr)[row]
                if not np.any(act):
                    continue
                curve = domain.lower[f.axis] if f.side == "lower" else domain.upper[f.axis]
                shape = [1] * n
                shape[f.axis] = -1
                d2 = ((coords[f.axis] - curve(tr)) ** 2).reshape(shape)
                tang = [i for i in range(n) if i != f.axis]
                if tang:
                    # active face points moved to the subsample time
                    xf = f.x[row][act].reshape(-1, n)[:, tang]
                    xf = a[tang] + (xf - a0[tang]) / w0[tang] * w[tang]
                    mesh = np.meshgrid(*[coords[i] for i in tang], indexing="ij")
                    q = np.stack([m.ravel() for m in mesh], axis=-1)
                    dtan, _ = cKDTree(xf).query(q, k=1)
                    tshape = [len(coords[i]) for i in tang]
                    dtan = dtan.reshape(tshape)
                    dtan = np.expand_dims(dtan, f.axis)
                    d2 = d2 + dtan**2
                best = np.minimum(best, d2)
            hit[row] = best < sigma * sigma
        if require_dp:
            nf = eval_null_frame(frame, t_sub, x_sub)
            hit &= nf.f_p > 0
        total += hit
    return total / len(offsets)


def build_region_masks(domain, frame, params, grid, strict=False):
    """Masks for ``D_p``, ``Gamma+``, ``Gamma'``, ``O_sigma``, ``W`` and ``W'``.

    ``params`` needs ``eps`` and ``sigma``.  ``W'`` is ``W`` grown by one
    cell layer in every direction.  An empty ``Gamma+`` leaves ``W`` empty;
    pass ``strict=True`` to raise :class:`EmptyRegion` instead.
    """
    if not isinstance(grid, CellGrid):
        grid = CellGrid.from_solver(domain, grid)
    eps = float(params.eps)
    sigma = float(params.sigma)
    offsets = grid.subsample_offsets()
    dp = np.zeros(grid.shape)
    for off in offsets:
        t_sub, x_sub = grid.subsample_points(off)
        dp += eval_null_frame(frame, t_sub, x_sub).f_p > 0
    dp /= len(offsets)
    tc, xc = grid.centers
    f_center = eval_null_frame(frame, tc, xc).f_p
    faces = build_faces(grid, frame, eps)
    if strict and not any(np.any(f.gamma_plus) for f in faces):
        raise EmptyRegion("Gamma+ is empty: observability cannot be verified")
    o_sig = _sigma_fraction(grid, faces, "gamma_plus", sigma, frame, False)
    w = _sigma_fraction(grid, faces, "gamma_plus", sigma, frame, True)
    o_sig_prime = _sigma_fraction(grid, faces, "gamma_prime", sigma, frame, False)
    structure = np.ones((3,) * (domain.dim + 1), dtype=bool)
    w_prime = ndimage.binary_dilation(w > 0, structure=structure).astype(float)
    return RegionMasks(grid, frame, eps, sigma, dp, dp.copy(), o_sig, o_sig_prime,
                       w, w_prime, f_center, faces)


# ----------------------------------------------------------- admissibility


@dataclass(frozen=True)
class AdmissibilityReport:
    r_plus: float
    r_minus: float
    window_gap: float
    t0: float | None
    t0_lower_gap: float | None
    t0_upper_gap: float | None
    t0_interval: tuple

    @property
    def window_ok(self):
        return self.window_gap > 0

    @property
    def passed(self):
        if not self.window_ok:
            return False
        if self.t0 is None:
            return True
        return self.t0_lower_gap > 0 and self.t0_upper_gap > 0

    @property
    def auto_t0(self):
        lo, hi = self.t0_interval
        return 0.5 * (lo + hi)

    def as_dict(self):
        return {"R_plus": self.r_plus, "R_minus": self.r_minus,
                "window_gap": self.window_gap, "t0": self.t0,
                "t0_lower_gap": self.t0_lower_gap, "t0_upper_gap": self.t0_upper_gap,
                "t0_interval": list(self.t0_interval), "passed": self.passed}


def check_admissibility(domain, frame, window=None, t0=None):
    """Window-length and observation-time conditions of the main estimate.

    ``R_pm`` is the largest distance from ``x0`` to the boundary at
    ``tau_pm``.  Requires ``tau_plus - tau_minus > R_plus + R_minus`` and,
    when ``t0`` is known, ``t0 - tau_minus > R_minus`` and
    ``tau_plus - t0 > R_plus``.  ``frame`` is an :class:`ObservationFrame`
    or a bare spatial point ``x0``.
    """
    if isinstance(frame, ObservationFrame):
        x0 = frame.x0
        if t0 is None:
            t0 = frame.t0
    else:
        x0 = frame
    tau_m, tau_p = window if window is not None else domain.window
    r_minus = domain.boundary_radius(tau_m, x0)
    r_plus = domain.boundary_radius(tau_p, x0)
    gap = (tau_p - tau_m) - (r_plus + r_minus)
    interval = (tau_m + r_minus, tau_p - r_plus)
    if t0 is None:
        return AdmissibilityReport(r_plus, r_minus, gap, None, None, None, interval)
    t0 = float(t0)
    return AdmissibilityReport(r_plus, r_minus, gap, t0, t0 - tau_m - r_minus,
                               tau_p - t0 - r_plus, interval)
