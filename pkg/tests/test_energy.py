import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bubble_reduce.energy import (
    AxisymmetricGrid,
    BubbleAtom,
    Configuration,
    FitModel,
    NonReducibleError,
    coefficient_extraction,
    energy_functional,
    expansion_prediction,
    fit_leading_coefficient,
    pair_interaction,
    poisson_extension,
    project_hardy_bubble,
    project_standard_bubble,
    single_bubble_deficit,
)
from bubble_reduce.geometry import BallDomain
from bubble_reduce.integrals import expansion_constants, instanton_integrals, sphere_area
from bubble_reduce.profiles import critical_exponent, hardy_params, instanton_constant

N = 7
M = (N - 2) / 2
C0 = instanton_constant(N)


def boundary_points(rng, n):
    y = rng.normal(size=(n, N))
    return y / np.linalg.norm(y, axis=1, keepdims=True)


# --------------------------------------------------------------------------
# Projections


def test_hardy_correction_is_the_boundary_value():
    p = hardy_params(N, 1e-3)
    bubble = project_hardy_bubble(p, 0.1)
    assert bubble.boundary_constant == pytest.approx(p.c_mu * (0.1 / 1.01) ** 2.5, rel=1e-14)


def test_hardy_correction_leading_term():
    p = hardy_params(N, 1e-3)
    gaps = [project_hardy_bubble(p, s).boundary_constant / (p.c_mu * s**M) - 1 for s in (0.02, 0.01)]
    assert gaps[0] / gaps[1] == pytest.approx(4.0, rel=1e-2)


def test_centred_standard_correction_is_constant():
    bubble = project_standard_bubble(N, 0.3, 0.0)
    z = np.linspace(-0.9, 0.9, 7)
    np.testing.assert_allclose(bubble.correction(z, 0.1), C0 * (0.3 / 1.09) ** M, rtol=1e-14)


@pytest.mark.parametrize("kind", ["standard", "hardy"])
def test_projections_vanish_on_the_sphere(kind, rng):
    bubble = project_standard_bubble(N, 0.2, 0.4) if kind == "standard" else project_hardy_bubble(hardy_params(N, 0.5), 0.2)
    values = bubble.at_points(boundary_points(rng, 100))
    assert np.max(np.abs(values["projected"])) <= 1e-9 * np.max(values["profile"])


@pytest.mark.parametrize("point", [(0.0, 0.0), (0.3, 0.2), (-0.5, 0.6)])
def test_standard_correction_is_the_harmonic_extension_of_the_trace(point):
    bubble = project_standard_bubble(N, 0.3, 0.4)
    trace = lambda c: bubble.profile(c, np.sqrt(np.maximum(1 - c * c, 0.0)))  # noqa: E731
    z, rp = point
    assert bubble.correction(z, rp) == pytest.approx(poisson_extension(N, trace, z, rp), rel=1e-9)


def test_standard_correction_tends_to_the_regular_part():
    xi = 0.3
    x = np.array([-0.2, 0.5] + [0.0] * (N - 2))
    H = BallDomain(N).regular_part(np.eye(N)[0] * xi, x)
    gaps = [
        abs(project_standard_bubble(N, d, xi).correction(x[0], abs(x[1])) / (C0 * d**M * H) - 1)
        for d in (0.2, 0.1, 0.05)
    ]
    orders = [math.log2(gaps[i] / gaps[i + 1]) for i in range(2)]
    assert orders == pytest.approx([2.0, 2.0], abs=0.1)


@given(z=st.floats(-0.99, 0.99), rp=st.floats(0.0, 0.99), delta=st.floats(0.01, 0.5), xi=st.floats(-0.8, 0.8))
def test_correction_lies_between_zero_and_the_profile(z, rp, delta, xi):
    if z * z + rp * rp >= 1:
        return
    bubble = project_standard_bubble(N, delta, xi)
    c = bubble.correction(z, rp)
    assert 0 <= c <= bubble.profile(z, rp) * (1 + 1e-12)


@given(r=st.floats(0.0, 0.999), sigma=st.floats(0.01, 0.5), mu=st.floats(0.0, 6.0))
def test_hardy_correction_lies_below_the_profile(r, sigma, mu):
    bubble = project_hardy_bubble(hardy_params(N, mu), sigma)
    if mu > 0 and r == 0:
        return
    assert 0 <= bubble.boundary_constant <= bubble.profile(r, 0.0) * (1 + 1e-12)


def test_off_axis_centres_are_not_reducible():
    with pytest.raises(NonReducibleError):
        project_standard_bubble(N, 0.1, np.r_[0.2, 0.1, [0.0] * (N - 2)])
    with pytest.raises(NonReducibleError):
        Configuration.from_points(N, [("standard", 1, 0.1, np.r_[0.2, 0.1, [0.0] * (N - 2)])])
    with pytest.raises(NonReducibleError):
        BubbleAtom("hardy", 1, 0.1, 0.3)


def test_configuration_validation():
    with pytest.raises(ValueError):
        Configuration(N, ())
    with pytest.raises(ValueError):
        Configuration(N, (BubbleAtom("standard", 1, 0.1, 1.0),))
    with pytest.raises(ValueError):
        BubbleAtom("standard", 2, 0.1, 0.0)


# --------------------------------------------------------------------------
# Grid and energy


def test_grid_integrates_polynomials_over_the_ball():
    grid = AxisymmetricGrid(N, [0.0, 0.5], [0.1, 0.05])
    volume = sphere_area(N) / N
    assert grid.integrate(np.ones_like(grid.z)) == pytest.approx(volume, rel=1e-12)
    r2 = grid.z**2 + grid.rp**2
    assert grid.integrate(r2) == pytest.approx(sphere_area(N) / (N + 2), rel=1e-12)
    assert grid.integrate(grid.z) == pytest.approx(0.0, abs=1e-14)


def test_by_parts_quadratic_form_matches_gradient_quadrature():
    config = Configuration(N, (BubbleAtom("standard", 1, 0.2, 0.3),))
    grid = config.grid()
    (bubble,) = config.bubbles()
    h = 1e-6
    z, rp = grid.z, grid.rp
    dz = (bubble.projected(z + h, rp) - bubble.projected(z - h, rp)) / (2 * h)
    drp = (bubble.projected(z, rp + h) - bubble.projected(z, np.abs(rp - h))) / (2 * h)
    direct = grid.integrate(dz**2 + drp**2)
    by_parts = energy_functional(config).interactions[0, 0]
    assert by_parts == pytest.approx(direct, rel=1e-4)


def test_energy_is_even_in_the_signs():
    atoms = (BubbleAtom("hardy", 1, 0.2), BubbleAtom("standard", -1, 0.1, 0.5))
    flipped = tuple(BubbleAtom(a.kind, -a.sign, a.scale, a.center) for a in atoms)
    a = energy_functional(Configuration(N, atoms, mu=0.01, eps=0.01))
    b = energy_functional(Configuration(N, flipped, mu=0.01, eps=0.01))
    for part in ("quadratic", "critical", "subcritical", "total"):
        assert getattr(a, part) == pytest.approx(getattr(b, part), rel=1e-13)


def test_energy_is_invariant_under_reflection():
    atoms = (BubbleAtom("standard", 1, 0.15, 0.4), BubbleAtom("standard", -1, 0.1, -0.2))
    mirrored = tuple(BubbleAtom(a.kind, a.sign, a.scale, -a.center) for a in atoms)
    a = energy_functional(Configuration(N, atoms, eps=0.02))
    b = energy_functional(Configuration(N, mirrored, eps=0.02))
    assert a.total == pytest.approx(b.total, rel=1e-10)


def test_interaction_by_parts_orders_agree():
    result = pair_interaction(N, 0.05, 0.5)
    assert result["asymmetry"] < 1e-6


def test_standard_deficit_coefficient():
    scales = [0.05, 0.02, 0.01]
    kernel = instanton_integrals(N).int_standard_kernel
    deficits = [single_bubble_deficit(N, "standard", d, 0.3) for d in scales]
    fitted = fit_leading_coefficient(scales, deficits, N - 2)
    target = C0 ** critical_exponent(N) * (1 - 0.09) ** (2 - N) * kernel
    assert fitted == pytest.approx(target, rel=0.05)
    # The quadratic part stays below the whole-space energy, and the gap shrinks at rate scale**(N-2).
    assert all(d > 0 for d in deficits)
    assert deficits[1] / deficits[2] == pytest.approx(2.0 ** (N - 2), rel=0.01)


# --------------------------------------------------------------------------
# Expansion fits


def test_prediction_limits():
    tower = expansion_constants(N, 1.0, 0, "tower")
    assert expansion_prediction(tower, 123.0, 1e-300) == pytest.approx(tower.a1, rel=1e-12)
    eps = 1e-3
    expected = tower.a1 + tower.a2 * eps - tower.a3 * eps * math.log(eps) + 123.0 * eps
    assert expansion_prediction(tower, 123.0, eps) == pytest.approx(expected, rel=1e-15)


def test_multipoint_prediction_is_linear_after_the_log_term():
    consts = expansion_constants(N, 1.0, 1, "multipoint")
    eps = np.array([1e-2, 5e-3, 2e-3, 1e-3])
    pred = expansion_prediction(consts, 50.0, eps) - consts.a1 + consts.a4 * eps * np.log(eps)
    slopes = pred / eps
    np.testing.assert_allclose(slopes, slopes[0], rtol=1e-12)


@pytest.mark.parametrize("variant,alpha", [("tower", 1.0), ("multipoint", 1.0), ("multipoint", 1.5)])
def test_synthetic_data_recovers_the_reduced_value(variant, alpha):
    consts = expansion_constants(N, 1.0, 1 if variant == "multipoint" else 0, variant)
    eps = np.array([1e-2, 5e-3, 2e-3, 1e-3, 5e-4])
    values = expansion_prediction(consts, 321.0, eps, alpha)
    fit = coefficient_extraction(list(zip(eps, values)), FitModel(variant, alpha=alpha), consts)
    assert fit.psi_estimate == pytest.approx(321.0, rel=1e-9)
    assert fit.merged_alpha == (variant == "multipoint" and alpha == 1.0)


def test_underdetermined_fits_are_rejected():
    consts = expansion_constants(N, 1.0, 0, "tower")
    with pytest.raises(np.linalg.LinAlgError):
        coefficient_extraction([(1e-2, 1.0), (1e-3, 2.0)], FitModel("tower"), consts)
    with pytest.raises(ValueError):
        coefficient_extraction([(-1e-2, 1.0), (1e-3, 2.0), (1e-4, 3.0)], FitModel("tower"), consts)


def test_leading_coefficient_of_exact_power_data():
    s = np.array([0.1, 0.05, 0.02])
    values = 7.0 * s**5 * (1 + 3.0 * s**2)
    assert fit_leading_coefficient(s, values, 5) == pytest.approx(7.0, rel=1e-12)
