import numpy as np
import pytest

from helpers import mms_errors, observed_orders, static_energy_run
from movingwave import kernels
from movingwave.errors import CFLViolation, ValidationError
from movingwave.estimates import fit_energy_constants
from movingwave.geometry import MovingDomain
from movingwave.wavesolver import (CoefficientSet, GridSpec, MappedScheme, duality_defect,
                                   energy, energy_levels, max_stable_step, solve_adjoint,
                                   solve_controlled)


def test_grid_spacings():
    g = GridSpec(9, 20, 0.0, 2.0)
    assert g.hhat == 0.1 and g.k == 0.1
    r = g.refined()
    assert r.hhat == pytest.approx(0.05) and r.k == pytest.approx(0.05)


def test_cfl_violation():
    d = MovingDomain.interval("0", "1", 0.0, 2.0)
    with pytest.raises(CFLViolation):
        MappedScheme(d, CoefficientSet(), GridSpec(99, 20, 0.0, 2.0))
    g = GridSpec(99, 300, 0.0, 2.0)
    assert g.k <= max_stable_step(d, g)


def test_standing_wave_static(static_run):
    _, drift, grad_err, sol_err = static_run
    assert drift <= 1e-10
    assert grad_err <= 1e-4
    assert sol_err <= 1e-4


@pytest.fixture(scope="module")
def static_run():
    return static_energy_run()


def test_energy_record_closed_form(static_run):
    fld = static_run[0]
    e = energy(fld, tau=0.5)
    # at t = 0.5 the field vanishes and the energy is all kinetic
    assert e.gradient == pytest.approx(np.pi**2 / 2, rel=1e-4)
    assert e.l2 == pytest.approx(0.0, abs=1e-8)
    e0 = energy(fld, tau=0.0)
    assert e0.total == pytest.approx(np.pi**2 / 2 + 0.5, rel=1e-4)


def test_zero_data_gives_zero():
    d = MovingDomain.interval("0", "1 + 0.25*t", 0.0, 1.0)
    fld = solve_adjoint(d, CoefficientSet(), GridSpec(20, 60, 0.0, 1.0), ("0", "0"))
    assert not np.any(fld.values)
    y = solve_controlled(d, CoefficientSet(), GridSpec(20, 60, 0.0, 1.0), ("0", "0"))
    assert not np.any(y.values)
    assert energy(fld).total == 0.0


def test_manufactured_solution_second_order():
    errs = mms_errors()
    orders = observed_orders(errs)
    assert np.all(np.abs(orders - 2.0) <= 0.2), (errs, orders)


@pytest.mark.parametrize("backend", sorted(kernels.BACKENDS))
def test_backends_give_identical_fields(backend):
    d = MovingDomain.interval("-1", "1 + 0.2*t", 0.0, 1.5)
    co = CoefficientSet(Xt="0.3", Xx="0.2*x", V="cos(t)")
    g = GridSpec(30, 80, 0.0, 1.5)
    data = ("sin(pi*(x + 1)/2)", "0.5*sin(pi*(x + 1))")
    ref = solve_adjoint(d, co, g, data, backend="python")
    out = solve_adjoint(d, co, g, data, backend=backend)
    np.testing.assert_allclose(out.values, ref.values, rtol=1e-12, atol=1e-13)


def test_backward_sweep_reverses_forward():
    d = MovingDomain.interval("0", "1 + 0.25*t", 0.0, 1.0)
    g = GridSpec(60, 200, 0.0, 1.0)
    fwd = solve_adjoint(d, CoefficientSet(), g, ("sin(pi*x)", "0"))
    xN, vN, tN = fwd.slice(1.0)
    back = solve_adjoint(d, CoefficientSet(), g, (vN, tN), direction="backward")
    assert np.max(np.abs(back.values[0] - fwd.values[0])) < 5e-3


def test_initial_value_must_vanish_on_walls():
    d = MovingDomain.interval("0", "1", 0.0, 1.0)
    with pytest.raises(ValidationError):
        solve_adjoint(d, CoefficientSet(), GridSpec(20, 60, 0.0, 1.0), ("1 + x", "0"))


def test_causality_of_localised_source():
    d = MovingDomain.interval("-1", "1", 0.0, 2.0)
    g = GridSpec(79, 200, 0.0, 2.0)
    src = np.zeros((g.Nt + 1, g.Nx + 2))
    n_on, j_on = 50, 70
    src[n_on:n_on + 5, j_on:j_on + 3] = 1.0
    y = solve_controlled(d, CoefficientSet(), g, ("0", "0"), control=src)
    # nothing happens before the source switches on
    assert not np.any(y.values[:n_on + 1])
    # numerical domain of dependence: one node per step at most
    for n in range(n_on + 1, n_on + 20):
        nz = np.nonzero(y.values[n])[0]
        assert nz.min() >= j_on - (n - n_on) and nz.max() <= j_on + 2 + (n - n_on)
    # the physical cone bounds the bulk of the signal
    t_on = g.times[n_on]
    x_on = y.x[n_on, j_on]
    n = n_on + 40
    far = np.abs(y.x[n] - x_on) > (g.times[n] - t_on) + 0.2
    assert np.max(np.abs(y.values[n, far])) < 1e-3 * np.max(np.abs(y.values[n]))


def test_summation_by_parts_on_static_grid():
    d = MovingDomain.interval("0", "1", 0.0, 1.0)
    g = GridSpec(30, 80, 0.0, 1.0)
    rng = np.random.default_rng(0)
    y = np.zeros((g.Nt + 1, g.Nx + 2))
    p = np.zeros_like(y)
    y[:, 1:-1] = rng.normal(size=(g.Nt + 1, g.Nx))
    p[:, 1:-1] = rng.normal(size=(g.Nt + 1, g.Nx))
    defect, scale = duality_defect(y, p, g)
    assert abs(defect) <= 1e-12 * scale


def test_energy_constants_fit_and_hold():
    d = MovingDomain.interval("-1", "1 + 0.2*t", 0.0, 2.0)
    co = CoefficientSet(V="0.5*sin(t)", Xx="0.3")
    g = GridSpec(40, 160, 0.0, 2.0)
    fld = solve_adjoint(d, co, g, ("sin(pi*(x + 1)/2)", "0"))
    m0, m1 = co.sup_norms(d, g)
    _, _, tot = energy_levels(fld, m0)
    const = fit_energy_constants(g.times, tot, m0, m1)
    for i in range(0, g.Nt + 1, 16):
        for j in range(0, g.Nt + 1, 16):
            assert const.holds(tot[i], tot[j], g.times[i] - g.times[j])


def test_wave_solver_is_one_dimensional():
    d = MovingDomain(("0", "0"), ("1", "1"), 0.0, 1.0)
    with pytest.raises(ValidationError):
        MappedScheme(d, CoefficientSet(), GridSpec(10, 60, 0.0, 1.0))
