"""Shared drivers for the solver and acceptance tests."""
import numpy as np

from movingwave import expr as E
from movingwave.estimates import wave_operator_expr
from movingwave.geometry import MovingDomain
from movingwave.wavesolver import (CoefficientSet, GridSpec, energy_levels, discrete_energy,
                                   solve_adjoint)

MMS_EXACT = "sin(pi*x/(1 + 0.25*t))*cos(t)"


def mms_errors(grids=((50, 200), (101, 400), (203, 800)), backend=None):
    """Max nodal error of the manufactured solution on ``[0, 1 + 0.25 t]``."""
    dom = MovingDomain.interval("0", "1 + 0.25*t", 0.0, 2.0)
    node = E.parse(MMS_EXACT)
    src = wave_operator_expr(node, 1)
    phi0 = node
    phi1 = node.diff("t")
    errs = []
    for nx, nt in grids:
        g = GridSpec(nx, nt, 0.0, 2.0)
        fld = solve_adjoint(dom, CoefficientSet(), g, (phi0, _at_zero(phi1)), source=src,
                            backend=backend)
        T = np.broadcast_to(g.times[:, None], fld.x.shape)
        exact = E.evaluate_like(node, {"t": T, "x": fld.x}, fld.x)
        errs.append(float(np.max(np.abs(fld.values - exact))))
    return errs


def _at_zero(node):
    return lambda x: E.evaluate_like(node, {"t": np.zeros_like(x), "x": x}, x)


def observed_orders(errs):
    e = np.asarray(errs)
    return np.log2(e[:-1] / e[1:])


def static_energy_run(nx=200, nt=800, backend=None):
    """Free wave ``sin(pi x) cos(pi t)`` on ``(0, 1)`` over ``[0, 2]``."""
    dom = MovingDomain.interval("0", "1", 0.0, 2.0)
    g = GridSpec(nx, nt, 0.0, 2.0)
    fld = solve_adjoint(dom, CoefficientSet(), g, ("sin(pi*x)", "0"), backend=backend)
    disc = discrete_energy(fld)
    drift = float(np.max(np.abs(disc - disc[0])) / disc[0])
    grad, _, _ = energy_levels(fld, m0=1.0)
    grad_err = float(np.max(np.abs(grad - np.pi**2 / 2)) / (np.pi**2 / 2))
    exact = np.sin(np.pi * fld.x) * np.cos(np.pi * g.times[:, None])
    sol_err = float(np.max(np.abs(fld.values - exact)))
    return fld, drift, grad_err, sol_err
