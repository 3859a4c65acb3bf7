import numpy as np
import pytest

from movingwave.errors import NoConvergence
from movingwave.estimates import random_modes, sine_series_data
from movingwave.geometry import CellGrid, MovingDomain, ObservationFrame, build_region_masks
from movingwave.hum import (HUMContext, conjugate_gradient, conjugate_residual,
                            gramian_apply, gramian_form, synthesize_control)
from movingwave.rng import SplitMix64
from movingwave.wavesolver import CoefficientSet, GridSpec, solve_controlled
from movingwave.weights import CarlemanParams


def _context(sigma=0.75, coeffs=None, Nx=29, Nt=48, upper="1"):
    d = MovingDomain.interval("-1", upper, 0.0, 2.5)
    g = GridSpec(Nx, Nt, 0.0, 2.5)
    fr = ObservationFrame.for_domain(d, 1.25, [0.0], resolution=(Nt, Nx + 1))
    prm = CarlemanParams.observability(1.0, 0.5, fr.r_plus, sigma)
    masks = build_region_masks(d, fr, prm, CellGrid.from_solver(d, g))
    return HUMContext(d, coeffs or CoefficientSet(), g, masks.w_prime)


@pytest.fixture(scope="module")
def ctx():
    return _context()


@pytest.fixture(scope="module")
def ctx_coeffs():
    return _context(coeffs=CoefficientSet(Xt="0.2", Xx="0.3*cos(t)", q="0.5*x", V="1"),
                    upper="1 + 0.1*t", Nt=60)


@pytest.mark.parametrize("which", ["ctx", "ctx_coeffs"])
def test_gramian_symmetry(which, request):
    c = request.getfixturevalue(which)
    rng = np.random.default_rng(4)
    m = c.size
    cols = {}
    for i in set(rng.integers(0, m, 20).tolist()):
        e = np.zeros(m)
        e[i] = 1.0
        cols[i] = gramian_apply(e, c)
    scale = max(np.max(np.abs(v)) for v in cols.values())
    keys = sorted(cols)
    pairs = [(keys[i], keys[-1 - i]) for i in range(10)]
    for i, j in pairs:
        assert abs(cols[i][j] - cols[j][i]) <= 1e-10 * scale


def test_form_equals_applied_pairing(ctx):
    rng = np.random.default_rng(5)
    a, b = rng.normal(size=(2, ctx.size))
    direct = gramian_form(a, b, ctx)
    assert direct == pytest.approx(gramian_apply(a, ctx) @ b, rel=1e-10)
    assert direct == pytest.approx(gramian_apply(b, ctx) @ a, rel=1e-10)


def test_zero_seed_and_linearity(ctx):
    assert not np.any(ctx.apply(np.zeros(ctx.size)))
    rng = np.random.default_rng(6)
    a, b = rng.normal(size=(2, ctx.size))
    lhs = ctx.apply(2.0 * a - 3.0 * b)
    rhs = 2.0 * ctx.apply(a) - 3.0 * ctx.apply(b)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-12 * np.max(np.abs(rhs)))


def test_gramian_positive(ctx):
    rng = np.random.default_rng(7)
    for _ in range(20):
        s = rng.normal(size=ctx.size)
        assert ctx.apply(s) @ s > 0


def test_state_level_round_trip(ctx):
    rng = np.random.default_rng(8)
    y, yt = rng.normal(size=(2, ctx.grid.Nx))
    y2, yt2 = ctx.state_from_levels(ctx.levels_from_state(y, yt))
    np.testing.assert_allclose(y2, y, atol=1e-12)
    np.testing.assert_allclose(yt2, yt, rtol=1e-9, atol=1e-9)


@pytest.fixture(scope="module")
def controlled(ctx):
    rng = SplitMix64(3)
    a, b = random_modes(rng, 6)
    data = sine_series_data(ctx.domain, a, b, 0.0)
    return data, synthesize_control(ctx, data, cg_tol=1e-8, max_iter=500)


def test_control_drives_to_rest(controlled):
    _, res = controlled
    assert res.converged
    assert res.state.residuals[-1] <= 1e-8
    assert res.final_error_ratio <= 1e-3
    hist = np.asarray(res.state.residuals)
    assert np.all(np.diff(hist) <= 1e-12)


def test_control_vanishes_outside_support(ctx, controlled):
    _, res = controlled
    outside = ~ctx.control_support
    assert np.all(res.control[outside] == 0.0)
    assert np.any(res.control != 0.0)


def test_target_equal_to_free_evolution_needs_no_iterations(ctx, controlled):
    data, _ = controlled
    free = solve_controlled(ctx.domain, ctx.coeffs, ctx.grid, data)
    y, yt = ctx.state_from_levels(np.concatenate([free.values[-1, 1:-1],
                                                  free.values[-2, 1:-1]]))
    pad = lambda v: np.pad(v, 1)
    res = synthesize_control(ctx, data, target=(pad(y), pad(yt)))
    assert res.state.iterations == 0 and res.state.apply_count == 0
    assert not np.any(res.control)


def test_empty_support_does_not_converge(ctx):
    empty = HUMContext(ctx.domain, ctx.coeffs, ctx.grid, np.zeros_like(ctx.weights))
    data = ("sin(pi*(x + 1)/2)", "0")
    res = synthesize_control(empty, data, max_iter=20)
    assert not res.converged
    assert res.state.residuals[-1] == pytest.approx(1.0)
    with pytest.raises(NoConvergence):
        synthesize_control(empty, data, max_iter=20, strict=True)


@pytest.mark.parametrize("solver", [conjugate_gradient, conjugate_residual])
def test_krylov_solvers_on_spd_matrix(solver):
    rng = np.random.default_rng(9)
    q, _ = np.linalg.qr(rng.normal(size=(40, 40)))
    mat = q @ np.diag(np.linspace(1, 50, 40)) @ q.T
    b = rng.normal(size=40)
    x, hist, ok = solver(lambda v: mat @ v, b, tol=1e-10, max_iter=200)
    assert ok and hist[-1] <= 1e-10
    np.testing.assert_allclose(mat @ x, b, atol=1e-8)
    if solver is conjugate_residual:
        assert np.all(np.diff(hist) <= 0)


def test_backends_give_same_gramian(ctx):
    other = HUMContext(ctx.domain, ctx.coeffs, ctx.grid, ctx.weights, backend="python")
    s = np.random.default_rng(10).normal(size=ctx.size)
    np.testing.assert_allclose(other.apply(s), ctx.apply(s), rtol=1e-11, atol=1e-14)


def test_control_is_linear_in_data(ctx):
    d1 = ("sin(pi*(x + 1)/2)", "0")
    d2 = ("0", "sin(pi*(x + 1))")
    both = ("sin(pi*(x + 1)/2)", "sin(pi*(x + 1))")
    c1 = synthesize_control(ctx, d1, cg_tol=1e-12).control
    c2 = synthesize_control(ctx, d2, cg_tol=1e-12).control
    c12 = synthesize_control(ctx, both, cg_tol=1e-12).control
    assert np.max(np.abs(c12 - c1 - c2)) <= 1e-6 * np.max(np.abs(c12))


def test_larger_observation_region_does_not_slow_convergence():
    """Iteration count with the reference grid as sigma grows."""
    rng = SplitMix64(1)
    a, b = random_modes(rng, 6)
    its = []
    for sigma in (0.5, 0.75, 1.0):
        c = _context(sigma=sigma, Nx=59, Nt=94)
        data = sine_series_data(c.domain, a, b, 0.0)
        res = synthesize_control(c, data)
        assert res.converged
        its.append(res.state.iterations)
    for small, large in zip(its, its[1:]):
        assert large <= 2 * small
