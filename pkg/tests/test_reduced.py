import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bubble_reduce.critical import newton_nd
from bubble_reduce.geometry import BallDomain, axis_point, gamma_tau, placement
from bubble_reduce.integrals import expansion_constants, inverse_quartic_moment
from bubble_reduce.reduced import (
    ReducedPoint,
    SignPattern,
    WindowError,
    alternating_square_newton,
    alternating_square_profile,
    alternating_square_windows,
    axis_bubble_critical_t,
    axis_bubble_profile,
    gi_hessian_at_zero,
    gi_hessian_claimed,
    gi_hessian_fd,
    grad_hess_psi,
    interaction_matrix,
    iota1,
    iota3,
    polygon_profile,
    polygon_window,
    psi_multipoint,
    square_iota2,
    stationarity_newton,
    tower_critical,
    tower_grad_hess,
    tower_psi,
    tower_psi_hat,
)

from conftest import random_rotation

N = 7
BALL = BallDomain(N)
ONE = expansion_constants(N, 1.0, 1, "multipoint")
TWO = expansion_constants(N, 1.0, 2, "multipoint")
THREE = expansion_constants(N, 1.0, 3, "multipoint")
FOUR = expansion_constants(N, 1.0, 4, "multipoint")


def fd_derivative(f, t, h=1e-5):
    return (f(t + h) - f(t - h)) / (2 * h)


# --------------------------------------------------------------------------
# The multi-point function


def test_value_at_unit_scales():
    t = 0.5
    x = axis_point(N, t)
    psi = psi_multipoint(N, SignPattern.hardy_and_bubble(), ReducedPoint(np.ones(2), x[None, :]), ONE)
    expected = ONE.b1 * (1 + BALL.robin(x) + 2 * BALL.green(x, np.zeros(N)))
    assert psi == pytest.approx(expected, rel=1e-14)


def test_sign_patterns():
    assert SignPattern.alternating(4).bubble_signs == (-1, 1, -1, 1)
    assert SignPattern.negative_satellites(3).bubble_signs == (-1, -1, -1)
    tower = SignPattern.tower(3)
    assert tower.bubble_signs == (1, -1, 1) and tower.hardy_sign == -1


def test_tower_pattern_is_rejected_by_the_multipoint_function():
    with pytest.raises(ValueError):
        psi_multipoint(N, SignPattern.tower(1), ReducedPoint(np.ones(2), axis_point(N, 0.5)[None, :]), ONE)


def test_center_count_must_match_the_pattern():
    with pytest.raises(ValueError):
        interaction_matrix(SignPattern.negative_satellites(3), placement(2, 0.5, N).centers, BALL)


@given(seed=st.integers(0, 2**31))
def test_value_is_invariant_under_rotation_and_relabelling(seed):
    rng = np.random.default_rng(seed)
    pattern = SignPattern.alternating(4)
    centers = placement(4, float(rng.uniform(0.2, 0.8)), N).centers
    lam = rng.uniform(0.3, 2.0, size=5)
    base = psi_multipoint(N, pattern, ReducedPoint(lam, centers), FOUR)
    R = random_rotation(rng, N)
    rotated = psi_multipoint(N, pattern, ReducedPoint(lam, centers @ R.T), FOUR)
    assert rotated == pytest.approx(base, rel=1e-12)
    # Relabel bubbles 0 <-> 2 (both negative) and 1 <-> 3 (both positive).
    order = [2, 3, 0, 1]
    relabelled = psi_multipoint(N, pattern, ReducedPoint(np.r_[lam[order], lam[4]], centers[order]), FOUR)
    assert relabelled == pytest.approx(base, rel=1e-12)


@given(seed=st.integers(0, 2**31))
def test_analytic_derivatives_match_differences(seed):
    rng = np.random.default_rng(seed)
    pattern = SignPattern.negative_satellites(3)
    centers = placement(3, float(rng.uniform(0.2, 0.9)), N).centers
    lam = rng.uniform(0.3, 2.0, size=4)
    grad, hess = grad_hess_psi(N, pattern, ReducedPoint(lam, centers), THREE)
    np.testing.assert_array_equal(hess, hess.T)
    for j in range(4):
        h = 1e-5 * lam[j]
        up, down = lam.copy(), lam.copy()
        up[j] += h
        down[j] -= h
        val = lambda x: psi_multipoint(N, pattern, ReducedPoint(x, centers), THREE)  # noqa: E731
        g = lambda x: grad_hess_psi(N, pattern, ReducedPoint(x, centers), THREE)[0]  # noqa: E731
        assert grad[j] == pytest.approx((val(up) - val(down)) / (2 * h), rel=1e-6, abs=1e-6 * np.max(np.abs(grad)))
        np.testing.assert_allclose(hess[:, j], (g(up) - g(down)) / (2 * h), rtol=1e-6, atol=1e-6 * np.max(np.abs(hess)))


# --------------------------------------------------------------------------
# One bubble on the axis


@pytest.mark.parametrize("t", [0.2, 0.5, 0.85])
def test_axis_bubble_closed_form_is_stationary(t):
    p = axis_bubble_profile(N, t, ONE)
    point = ReducedPoint(np.array([p.lambda1, p.lambda_bar]), axis_point(N, t)[None, :])
    grad, _ = grad_hess_psi(N, SignPattern.hardy_and_bubble(), point, ONE)
    scale = ONE.b2 * (N - 2) / 2 / np.array([p.lambda1, p.lambda_bar])
    assert np.max(np.abs(grad) / scale) <= 1e-11
    assert p.nu == pytest.approx(p.nu_formula, rel=1e-11)


@pytest.mark.parametrize("t", [0.2, 0.5, 0.85])
def test_axis_bubble_derivative_matches_differences(t):
    fd = fd_derivative(lambda s: axis_bubble_profile(N, s, ONE).nu, t)
    p = axis_bubble_profile(N, t, ONE)
    assert p.nu_prime == pytest.approx(fd, rel=1e-6)
    assert p.nu_prime_envelope == pytest.approx(p.nu_prime, rel=1e-10)


def test_axis_bubble_hessian_is_positive_across_the_interval():
    for t in np.linspace(0.05, 0.95, 19):
        assert axis_bubble_profile(N, float(t), ONE).classification == "local_min"


def test_axis_bubble_critical_radius_is_the_minimiser_of_phi():
    roots = axis_bubble_critical_t(N, ONE)
    assert roots["nu_prime_root"] == pytest.approx(roots["phi_minimizer"], abs=1e-9)


def test_axis_bubble_newton_recovers_the_closed_form():
    t = 0.4
    p = axis_bubble_profile(N, t, ONE)
    exact = np.array([p.lambda1, p.lambda_bar])
    sol = stationarity_newton(N, SignPattern.hardy_and_bubble(), axis_point(N, t)[None, :], ONE, exact * [1.1, 0.9])
    np.testing.assert_allclose(sol.x, exact, rtol=1e-9)


# --------------------------------------------------------------------------
# Negative satellites on a polygon


def test_polygon_window_edges():
    t3 = polygon_window(N, 3)
    assert 0 < t3 < 0.5
    assert abs(gamma_tau(N, t3).gamma1) <= 1e-12
    with pytest.raises(WindowError):
        polygon_profile(N, 3, t3 - 0.01, THREE)
    with pytest.raises(ValueError):
        polygon_window(N, 4)


@pytest.mark.parametrize("k,t", [(2, 0.5), (2, 0.8), (3, 0.6), (3, 0.9)])
def test_polygon_profile_identities(k, t):
    consts = TWO if k == 2 else THREE
    p = polygon_profile(N, k, t, consts)
    assert p.nu == pytest.approx(p.nu_direct, rel=1e-11)
    fd = fd_derivative(lambda s: polygon_profile(N, k, s, consts).nu, t)
    assert p.nu_prime == pytest.approx(fd, rel=1e-6)
    g = gamma_tau(N, t)
    gamma, linear = (g.gamma1, 2 * g.tau1) if k == 3 else (g.gamma3, g.tau1)
    assert abs(p.alpha**2 + linear * p.alpha - gamma) <= 1e-12 * max(gamma, p.alpha**2)


def test_four_satellite_ratio_solves_its_quadratic():
    t = 0.7
    r = square_iota2(N, t)
    g = gamma_tau(N, t)
    assert abs(r.alpha3_t**2 + 3 * g.tau1 * r.alpha3_t - r.gamma2) <= 1e-12 * r.gamma2


def test_four_satellite_ratio_needs_a_nonnegative_combination():
    with pytest.raises(WindowError):
        square_iota2(N, 0.3)


@pytest.mark.parametrize("k,t", [(2, 0.6), (3, 0.6), (3, 0.8)])
def test_perturbed_newton_returns_equal_bubble_scales(k, t):
    consts = TWO if k == 2 else THREE
    p = polygon_profile(N, k, t, consts)
    exact = np.array([p.lambda1] * k + [p.lambda_bar])
    start = exact * (1 + 0.1 * np.random.default_rng(k).uniform(-1, 1, size=k + 1))
    sol = stationarity_newton(N, SignPattern.negative_satellites(k), placement(k, t, N).centers, consts, start)
    assert np.ptp(sol.x[:k]) <= 1e-10 * sol.x[0]
    np.testing.assert_allclose(sol.x, exact, rtol=1e-9)


def test_two_satellite_hessian_is_positive_definite():
    consts = expansion_constants(10, 1.0, 2, "multipoint")
    assert polygon_profile(10, 2, 0.7, consts).classification == "local_min"


def test_three_satellite_sign_function_stays_positive():
    t_star = polygon_window(N, 3)
    values = iota1(N, np.linspace(t_star + 1e-6, 1 - 1e-6, 10**4))
    assert np.all(values[np.isfinite(values)] > 0)


# --------------------------------------------------------------------------
# Alternating signs on the square


def test_square_windows():
    t1, t2 = alternating_square_windows(N)
    assert 0 < t1 < 0.5 < t2 < 1
    assert gamma_tau(N, 0.5).gamma3 > 0
    with pytest.raises(WindowError):
        alternating_square_profile(N, 0.5 * (t1 + t2), FOUR)


@pytest.mark.parametrize("t", [0.2, 0.35, 0.8, 0.9])
def test_square_profile_identities(t):
    p = alternating_square_profile(N, t, FOUR)
    assert np.max(np.abs(p.residuals)) <= 1e-10
    assert p.nu2 == pytest.approx(p.nu2_direct, rel=1e-11)
    fd = fd_derivative(lambda s: alternating_square_profile(N, s, FOUR).nu2, t, h=1e-6)
    assert p.nu2_prime == pytest.approx(fd, rel=1e-6)
    assert p.hessian_det_sign == int(np.sign(p.gamma3))


@pytest.mark.parametrize("t", [0.25, 0.85])
def test_square_newton_recovers_the_closed_form(t):
    p = alternating_square_profile(N, t, FOUR)
    exact = np.array([p.X, p.Y, p.Z])
    sol = alternating_square_newton(N, t, FOUR, exact * [1.1, 0.92, 1.05])
    np.testing.assert_allclose(sol.x, exact, rtol=1e-9)


def test_square_sign_function_changes_sign_below_the_first_window_edge():
    t1, _ = alternating_square_windows(N)
    assert np.sign(iota3(N, 0.05)) != np.sign(iota3(N, t1 - 1e-6))


# --------------------------------------------------------------------------
# Tower


def test_tower_without_satellites_collapses():
    consts = expansion_constants(N, 1.0, 0, "tower")
    crit = tower_critical(N, 1.0, 0, np.zeros((0, N)), consts)
    assert crit.s_hat[0] == pytest.approx(math.sqrt(consts.b4 / (2 * consts.b1)), rel=1e-15)
    assert crit.reduced_value == pytest.approx(consts.c1, rel=1e-14)
    assert crit.psi_hat == pytest.approx(consts.c1, rel=1e-12)


@given(seed=st.integers(0, 2**31), k=st.integers(1, 3))
def test_tower_gradient_vanishes_at_the_critical_point(seed, k):
    zetas = np.random.default_rng(seed).uniform(-1.5, 1.5, size=(k, N))
    consts = expansion_constants(N, 1.0, k, "tower")
    crit = tower_critical(N, 1.0, k, zetas, consts)
    assert crit.grad_norm <= 1e-13
    assert crit.reduced_value == pytest.approx(crit.psi_hat, rel=1e-12)


def test_tower_critical_point_solves_the_scale_equations():
    k = 2
    zetas = np.random.default_rng(5).uniform(-1, 1, size=(k, N))
    consts = expansion_constants(N, 1.0, k, "tower")
    crit = tower_critical(N, 1.0, k, zetas, consts)
    grad, _ = tower_grad_hess(N, k, crit.lambdas, crit.h1, consts)
    assert np.max(np.abs(grad * crit.lambdas)) <= 1e-10 * consts.b4
    assert tower_psi(N, k, crit.lambdas, zetas, consts) == pytest.approx(crit.psi_hat, rel=1e-12)
    def scaled_gradient(s):
        return tower_psi_hat(s, crit.h1, crit.h2, consts)[1] * s / consts.b4

    def jacobian(s):
        _, grad, hess = tower_psi_hat(s, crit.h1, crit.h2, consts)
        return (np.diag(grad) + s[:, None] * hess) / consts.b4

    sol = newton_nd(scaled_gradient, jacobian, crit.s_hat * [1.1, 0.9, 1.05])
    np.testing.assert_allclose(sol.x, crit.s_hat, rtol=1e-9)


@pytest.mark.parametrize("k", [1, 2])
def test_kernel_hessian_at_zero_matches_differences(k):
    consts = expansion_constants(N, 1.0, k, "tower")
    closed = gi_hessian_at_zero(N, k, consts)
    for i in range(1, k + 1):
        fd = gi_hessian_fd(N, k, i, consts)
        assert fd["diagonal"] == pytest.approx(closed[i - 1], rel=1e-7)
        assert abs(fd["mixed"]) <= 1e-7 * abs(fd["diagonal"])


def test_second_kernel_curvature_term():
    consts = expansion_constants(N, 1.0, 1, "tower")
    assert gi_hessian_claimed(N, consts) == pytest.approx((2 * N - 8) / N * consts.b3 * inverse_quartic_moment(N), rel=1e-15)
    first_kernel_part = gi_hessian_at_zero(N, 1, consts)[0] - gi_hessian_claimed(N, consts)
    assert first_kernel_part == pytest.approx(-(N - 2) * consts.b4, rel=1e-14)


def test_tower_rejects_mismatched_translations():
    consts = expansion_constants(N, 1.0, 2, "tower")
    with pytest.raises(ValueError):
        tower_critical(N, 1.0, 2, np.zeros((1, N)), consts)
    with pytest.raises(ValueError):
        tower_critical(N, 1.0, 2, np.zeros((2, N)), TWO)
