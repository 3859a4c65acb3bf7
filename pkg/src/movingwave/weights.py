"""Carleman weight, parameter regime and the weight-derivative bound."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateDenominator, DomainError, ValidationError
from .geometry import eval_null_frame
from .rng import SplitMix64


@dataclass(frozen=True)
class CarlemanParams:
    """Parameters ``(a, b, eps, delta, sigma, R)`` of the weight.

    Construction does not validate; call :meth:`check` before running
    estimates.  Degenerate values (``eps = b = 0``) are useful for tests.
    """

    a: float
    b: float
    eps: float
    delta: float = 0.5
    sigma: float = 0.5
    R: float = 1.0

    @classmethod
    def observability(cls, a, delta, R, sigma):
        """``eps = delta**2 / R`` and ``b = delta / R``."""
        return cls(a=float(a), b=delta / R, eps=delta * delta / R,
                   delta=float(delta), sigma=float(sigma), R=float(R))

    def with_a(self, a):
        d = asdict(self)
        d["a"] = float(a)
        return CarlemanParams(**d)

    def check(self, n):
        if not self.a >= n * n:
            raise ValidationError(f"a = {self.a} is below n^2 = {n * n}", field="run.a")
        if not self.b > 0 or not self.eps > 0:
            raise ValidationError("b and eps must be positive", field="observation.delta")
        if not 0 < self.delta < 1:
            raise ValidationError("delta must lie in (0, 1)", field="observation.delta")
        if not self.sigma > 0:
            raise ValidationError("sigma must be positive", field="observation.sigma")
        if not self.R > 0:
            raise ValidationError("R must be positive", field="observation.R")
        tol = 1e-12
        if self.b * self.R > 1 + tol or self.eps > self.b * (1 + tol):
            raise ValidationError("need b*R <= 1 and eps <= b", field="observation.delta")
        return self

    def as_dict(self):
        return asdict(self)


def a_floor(n, delta, r_plus, r_minus, m0, m1):
    """Smallest ``a`` suggested by the observability argument (unit constants)."""
    return float(max(n * n, r_plus,
                     delta ** (-1.0 / 3.0) * r_plus ** (4.0 / 3.0) * m0 ** (2.0 / 3.0),
                     delta ** -2.0 * r_minus ** -2.0 * r_plus ** 4 * m1 ** 2))


def log_weight_base(frame, params, t, x, check=True):
    """``G`` with ``log zeta = 2 a G``; ``-inf`` where ``f_p = 0``.

    Points with ``f_p < 0`` raise :class:`DomainError` when ``check`` is set,
    otherwise they return ``nan``.
    """
    nf = eval_null_frame(frame, t, x)
    eps = params.eps
    du = 1.0 + eps * nf.u_p
    dv = 1.0 - eps * nf.v_p
    f = nf.f_p
    if check:
        if np.any(f < 0):
            raise DomainError("weight evaluated inside the null cone (f_p < 0)")
        if np.any(du <= 0) or np.any(dv <= 0):
            raise DegenerateDenominator("1 + eps*u_p or 1 - eps*v_p is not positive "
                                        "(eps*R >= 1?)")
    with np.errstate(divide="ignore", invalid="ignore"):
        q = f / (du * dv)
        g = np.log(f) - np.log(du) - np.log(dv) + 2.0 * params.b * np.sqrt(q)
    g = np.where(f > 0, g, np.where(f == 0, -np.inf, np.nan))
    return g


def log_zeta(frame, params, t, x, check=True):
    return 2.0 * params.a * log_weight_base(frame, params, t, x, check)


def zeta(frame, params, t, x):
    """Carleman weight at ``(t, x)``; zero on the null cone."""
    return np.exp(log_zeta(frame, params, t, x))


# ----------------------------------------------------------- derivative bound


@dataclass
class DerivativeBoundReport:
    a_values: list
    max_ratio: list
    points: int
    f_min: float

    @property
    def spread(self):
        r = np.asarray(self.max_ratio)
        return float(r.max() / r.min())

    @property
    def relative_variation(self):
        r = np.asarray(self.max_ratio)
        return float((r.max() - r.min()) / r.min())

    def as_dict(self):
        return {"a_values": list(self.a_values), "max_ratio": list(self.max_ratio),
                "points": self.points, "f_min": self.f_min, "spread": self.spread}


def sample_exterior_points(domain, frame, count, seed=0, f_min=0.0, max_rounds=200):
    """Uniform samples of ``U ∩ {f_p > f_min}`` in mapped coordinates."""
    rng = SplitMix64(seed)
    n = domain.dim
    ts, xs = [], []
    have = 0
    for _ in range(max_rounds):
        m = max(4 * (count - have), 256)
        t = rng.uniform(m, domain.tau_minus, domain.tau_plus)
        xhat = rng.uniform(m * n).reshape(m, n)
        x = domain.alpha(t) + xhat * domain.width(t)
        keep = eval_null_frame(frame, t, x).f_p > f_min
        ts.append(t[keep])
        xs.append(x[keep])
        have += int(keep.sum())
        if have >= count:
            break
    t = np.concatenate(ts)[:count]
    x = np.concatenate(xs)[:count]
    if t.shape[0] < count:
        raise ValidationError("could not sample enough points with f_p > f_min")
    return t, x


def derivative_ratios(frame, params, t, x, h=1e-6):
    """``|grad zeta| / (a R zeta / f_p)`` by central differences in log space."""
    n = x.shape[-1]
    g0 = log_weight_base(frame, params, t, x)
    f = eval_null_frame(frame, t, x).f_p
    a2 = 2.0 * params.a
    grad2 = np.zeros_like(t)
    for d in range(n + 1):
        tp, tm = t.copy(), t.copy()
        xp, xm = x.copy(), x.copy()
        if d == 0:
            tp += h
            tm -= h
        else:
            xp[:, d - 1] += h
            xm[:, d - 1] -= h
        gp = log_weight_base(frame, params, tp, xp)
        gm = log_weight_base(frame, params, tm, xm)
        # (zeta(+) - zeta(-)) / (2h zeta)
        comp = (np.exp(a2 * (gp - g0)) - np.exp(a2 * (gm - g0))) / (2.0 * h)
        grad2 += comp * comp
    return np.sqrt(grad2) * f / (params.a * params.R)


def check_derivative_bound(domain, frame, params, sample_count=10_000, a_values=None,
                           seed=0, f_min=None, h=1e-6):
    """Maximum of the derivative ratio over sampled points, per ``a``."""
    n = domain.dim
    if a_values is None:
        a_values = [n * n * m for m in (1, 2, 4, 8)]
    if f_min is None:
        f_min = 1e-4 * params.R ** 2
    t, x = sample_exterior_points(domain, frame, sample_count, seed, f_min)
    maxima = []
    for a in a_values:
        r = derivative_ratios(frame, params.with_a(a), t, x, h)
        maxima.append(float(np.max(r)))
    return DerivativeBoundReport(list(map(float, a_values)), maxima, int(t.shape[0]),
                                 float(f_min))
