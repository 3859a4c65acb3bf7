import numpy as np
import pytest
from scipy import integrate

from movingwave import expr as E
from movingwave.errors import BoundaryConditionViolation, EmptyRegion, ValidationError
from movingwave.estimates import (CellOperator, boundary_integral, carleman_lhs,
                                  carleman_report, carleman_rhs, carleman_terms,
                                  check_carleman, check_observability, field_from_expression,
                                  manufactured_trials, random_adjoint_trials,
                                  sample_from_expression, sample_from_field)
from movingwave.geometry import CellGrid, MovingDomain, ObservationFrame, build_region_masks
from movingwave.wavesolver import CoefficientSet, GridSpec, SpacetimeField
from movingwave.weights import CarlemanParams


@pytest.fixture(scope="module")
def static_setup():
    d = MovingDomain.interval("-1", "1", 0.0, 2.5)
    g = GridSpec(39, 80, 0.0, 2.5)
    fr = ObservationFrame.for_domain(d, 1.25, [0.0], resolution=(80, 40))
    prm = CarlemanParams.observability(4.0, 0.5, fr.r_plus, 0.75)
    masks = build_region_masks(d, fr, prm, CellGrid.from_solver(d, g))
    fields = random_adjoint_trials(d, CoefficientSet(), g, 3, seed=11)
    return d, g, fr, prm, masks, fields


def test_scaling_invariance(static_setup):
    d, g, fr, prm, masks, fields = static_setup
    s = sample_from_field(fields[0], masks)
    f_min = masks.grid.spacing() ** 2
    for a in (1.0, 4.0, 16.0):
        p = prm.with_a(a)
        r1 = carleman_report(s, fr, p, f_min).ratio
        r3 = carleman_report(s.scaled(3.0), fr, p, f_min).ratio
        assert abs(r3 - r1) <= 1e-10 * abs(r1)
    # the field itself can be scaled before sampling
    s3 = sample_from_field(fields[0] * 3.0, masks)
    r = carleman_report(s, fr, prm, f_min).ratio
    assert carleman_report(s3, fr, prm, f_min).ratio == pytest.approx(r, rel=1e-10)


def test_angular_term_vanishes_in_one_dimension(static_setup):
    d, g, fr, prm, masks, fields = static_setup
    s = sample_from_field(fields[1], masks)
    lhs = carleman_lhs(s, fr, prm, 1e-4)
    assert lhs["angular"] == 0.0
    assert lhs["first_order"] > 0


def test_zero_field_is_skipped(static_setup):
    d, g, fr, prm, masks, fields = static_setup
    zero = SpacetimeField(d, g, np.zeros((g.Nt + 1, g.Nx + 2)))
    rep = carleman_report(sample_from_field(zero, masks), fr, prm, 1e-4)
    assert rep.lhs == 0.0 and rep.rhs == 0.0 and rep.skipped
    assert np.isnan(rep.ratio)
    obs = check_observability([zero], masks)
    assert obs.reports[0].skipped and obs.ratios == []


def test_boundary_condition_violation(static_setup):
    d, g, fr, prm, masks, fields = static_setup
    bad = field_from_expression(d, g, "1 + x")
    with pytest.raises(BoundaryConditionViolation):
        carleman_report(sample_from_field(bad, masks), fr, prm, 1e-4)
    with pytest.raises(BoundaryConditionViolation):
        carleman_report(sample_from_expression("cos(x)*t", masks), fr, prm, 1e-4)


def test_empty_w_gives_zero_observation_terms(static_setup):
    d, g, fr, prm, masks, fields = static_setup
    empty = build_region_masks(d, fr, CarlemanParams(prm.a, prm.b, prm.eps, sigma=0.0),
                               masks.grid)
    rhs = carleman_rhs(sample_from_field(fields[0], empty), fr, prm, 1e-4)
    assert rhs["W_dt"] == 0.0 and rhs["W_zeroth"] == 0.0 and rhs["box"] >= 0.0
    with pytest.raises(EmptyRegion):
        check_observability(fields, empty)
    res = check_observability(fields, empty, require_region=False)
    assert all(np.isinf(r) for r in res.ratios) and not np.isfinite(res.empirical_C)


def test_doubling_a_against_direct_recomputation(static_setup):
    d, g, fr, _, masks, fields = static_setup
    s = sample_from_field(fields[2], masks)
    p1 = CarlemanParams(3.0, 0.3, 0.0, R=fr.r_plus)
    p2 = p1.with_a(6.0)
    r1 = carleman_rhs(s, fr, p1, 1e-4, log_scale=0.0)
    r2 = carleman_rhs(s, fr, p2, 1e-4, log_scale=0.0)
    f = 0.25 * ((s.x[:, 0] - fr.x0[0]) ** 2 - (s.t - fr.t0) ** 2)
    keep = f > 1e-4
    fk = np.where(keep, f, 1.0)
    base = np.where(keep, fk * np.exp(2 * 0.3 * np.sqrt(fk)), 0.0)
    for a, rr in ((3.0, r1), (6.0, r2)):
        z = base ** (2 * a)
        direct = a**4 * fr.r_plus**4 * np.sum(s.volume * s.frac_w * z * fk**-3 * s.phi**2)
        assert rr["W_zeroth"] == pytest.approx(direct, rel=1e-10)
    t1, _ = carleman_terms(s, fr, p1, 1e-4, log_scale=0.0)
    assert r1["W_zeroth"] / t1["W_zeroth"] == pytest.approx(3.0**4 * fr.r_plus**4)
    t2, _ = carleman_terms(s, fr, p2, 1e-4, log_scale=0.0)
    prefactor = (r2["W_zeroth"] / t2["W_zeroth"]) / (r1["W_zeroth"] / t1["W_zeroth"])
    assert prefactor == pytest.approx(16.0)


def test_check_carleman_sweep_is_finite(static_setup):
    d, g, fr, prm, masks, fields = static_setup
    samples = [sample_from_field(f, masks) for f in fields]
    samples += [sample_from_field(f, masks, box="discrete") for f in fields]
    chk = check_carleman(fr, prm, samples, [1.0, 2.0, 4.0], masks.grid.spacing() ** 2)
    assert chk.finite and len(chk.max_ratio) == 3
    for reps in chk.reports:
        for rep in reps:
            assert all(v >= 0 for v in rep.terms.values())


def test_manufactured_trials_vanish_on_faces():
    d = MovingDomain(("-1", "-1"), ("1", "1 + 0.1*t"), 0.0, 3.0)
    nodes = manufactured_trials(d, 4, seed=2)
    t = np.linspace(0, 3, 7)
    for node in nodes:
        for x1 in (-1.0,):
            v = E.evaluate_like(node, {"t": t, "x1": np.full_like(t, x1), "x2": 0.3 + 0 * t}, t)
            assert np.max(np.abs(v)) < 1e-14
        v = E.evaluate_like(node, {"t": t, "x1": 0.2 + 0 * t, "x2": 1 + 0.1 * t}, t)
        assert np.max(np.abs(v)) < 1e-14


def _zeta_closed(params, tp, r):
    u, v = 0.5 * (tp - r), 0.5 * (tp + r)
    f = -u * v
    q = f / ((1 + params.eps * u) * (1 - params.eps * v))
    with np.errstate(invalid="ignore"):
        out = (q * np.exp(2 * params.b * np.sqrt(q))) ** (2 * params.a)
    return np.where(f > 0, out, 0.0)


def test_radial_bump_against_polar_quadrature():
    d = MovingDomain(("-1", "-1"), ("1", "1"), 0.0, 3.5)
    fr = ObservationFrame(1.75, [0.0, 0.0], 1.5, 1.0)
    prm = CarlemanParams.observability(4.0, 0.5, 1.5, 0.5)
    grid = CellGrid(d, 140, (120, 120))
    masks = build_region_masks(d, fr, prm, grid)
    rho2 = 0.81
    g = f"({rho2} - x1^2 - x2^2)"
    node = E.parse(f"(({g} + abs({g}))/2)^4*cos(t)")
    s = sample_from_expression(node, masks)
    terms, _ = carleman_terms(s, fr, prm, 0.0, log_scale=0.0, check_boundary=False)
    assert abs(terms["angular"]) <= 1e-12 * terms["uv"]

    rho = np.sqrt(rho2)

    def integrand(r, t):
        tp = t - fr.t0
        gr = (rho2 - r * r) ** 4
        dg = -8 * r * (rho2 - r * r) ** 3
        ph_t = -gr * np.sin(t)
        ph_r = dg * np.cos(t)
        u, v = 0.5 * (tp - r), 0.5 * (tp + r)
        z = _zeta_closed(prm, tp, r)
        return 2 * np.pi * z * ((u * (ph_t - ph_r)) ** 2 + (v * (ph_t + ph_r)) ** 2)

    ref, _ = integrate.dblquad(integrand, 0.0, 3.5, lambda t: abs(t - 1.75),
                               lambda t: max(rho, abs(t - 1.75)), epsabs=0, epsrel=1e-9)
    assert terms["uv"] == pytest.approx(ref, rel=1e-2)


def _boundary_closed_form():
    # eps = b = 0, a = 1: zeta = f^2, N f = 1/4 on both walls for x0 = 1/2
    def integrand(t):
        f = 0.25 * (0.25 - (t - 1.0) ** 2)
        return f**2 * 0.25 * (np.pi * np.cos(np.pi * t)) ** 2
    val, _ = integrate.quad(integrand, 0.5, 1.5, epsabs=0, epsrel=1e-12)
    return 2 * val


def test_boundary_integral_closed_form():
    d = MovingDomain.interval("0", "1", 0.0, 2.0)
    fr = ObservationFrame(1.0, [0.5])
    prm = CarlemanParams(1.0, 0.0, 0.0)
    ref = _boundary_closed_form()
    errs = []
    for nx, nt in ((49, 200), (99, 400)):
        fld = field_from_expression(d, GridSpec(nx, nt, 0.0, 2.0), "sin(pi*x)*cos(pi*t)")
        errs.append(abs(boundary_integral(fld, fr, prm) - ref) / ref)
    assert errs[1] < 1e-3
    assert errs[0] / errs[1] > 3.0


def test_boundary_integral_empty_gamma_plus():
    d = MovingDomain.interval("0", "1", 0.0, 2.0)
    fld = field_from_expression(d, GridSpec(49, 200, 0.0, 2.0), "sin(pi*x)*cos(pi*t)")
    far = ObservationFrame(-10.0, [0.5])
    assert boundary_integral(fld, far, CarlemanParams(1.0, 0.0, 0.0)) == 0.0


def test_cell_operator_adjoint_identity():
    d = MovingDomain.interval("-1", "1 + 0.2*t", 0.0, 1.0)
    g = GridSpec(15, 40, 0.0, 1.0)
    op = CellOperator(d, g)
    rng = np.random.default_rng(1)
    v = rng.normal(size=(g.Nt + 1, g.Nx + 2))
    cv = rng.normal(size=op.c.shape)
    ct = rng.normal(size=op.c.shape)
    val, pt, _ = op.apply(v)
    lhs = np.sum(val * cv) + np.sum(pt * ct)
    assert lhs == pytest.approx(np.sum(v * op.adjoint(cv, ct)), rel=1e-12)


def test_masks_must_match_field_grid(static_setup):
    d, g, fr, prm, masks, fields = static_setup
    other = random_adjoint_trials(d, CoefficientSet(), GridSpec(19, 40, 0.0, 2.5), 1, 0)[0]
    with pytest.raises(ValidationError):
        sample_from_field(other, masks)
