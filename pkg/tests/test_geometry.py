import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bubble_reduce.critical import scan_sign
from bubble_reduce.geometry import (
    BallDomain,
    NegativeDiscriminantError,
    alpha_beta,
    axis_point,
    gamma_tau,
    phi_axis,
    phi_axis_prime,
    phi_point,
    placement,
)

from conftest import random_rotation

N = 7
BALL = BallDomain(N)


def inside_points(rng, n, radius=0.95):
    x = rng.normal(size=(n, N))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x * radius * rng.uniform(size=(n, 1)) ** (1 / N)


def test_reference_values_on_the_axis():
    origin = np.zeros(N)
    x = axis_point(N, 0.5)
    assert BALL.regular_part(origin, origin) == 1.0
    assert BALL.robin(x) == pytest.approx(0.75**-5, rel=1e-15)
    assert BALL.green(x, origin) == pytest.approx(0.5**-5 - 1, rel=1e-15)


def test_phi_reference_value():
    expected = 0.75**-2.5 + 2**5 - 1
    assert phi_axis(N, 0.5) == pytest.approx(expected, rel=1e-15)
    assert phi_point(N, axis_point(N, 0.5)) == pytest.approx(expected, rel=1e-14)
    assert phi_axis(N, -0.3) == phi_axis(N, 0.3)


def test_phi_has_an_interior_minimum():
    t = np.linspace(0.05, 0.95, 2001)
    values = phi_axis(N, t)
    i = int(np.argmin(values))
    assert 0 < i < len(t) - 1
    assert values[i - 1] - 2 * values[i] + values[i + 1] > 0
    assert phi_axis_prime(N, t[i - 1]) < 0 < phi_axis_prime(N, t[i + 1])


def test_phi_derivative_matches_differences():
    t, h = 0.6, 1e-6
    fd = (phi_axis(N, t + h) - phi_axis(N, t - h)) / (2 * h)
    assert phi_axis_prime(N, t) == pytest.approx(fd, rel=1e-7)


def test_points_outside_the_ball_are_rejected():
    with pytest.raises(ValueError):
        BALL.green(axis_point(N, 0.2), np.full(N, 0.9))
    with pytest.raises(ValueError):
        BALL.green(axis_point(N, 0.2), axis_point(N, 0.2))
    with pytest.raises(ValueError):
        phi_axis(N, 0.0)


def test_regular_part_is_harmonic(rng):
    y = inside_points(rng, 1, 0.5)[0]
    x = inside_points(rng, 1, 0.5)[0]
    h = 1e-3
    lap = sum(
        BALL.regular_part(x + h * e, y) - 2 * BALL.regular_part(x, y) + BALL.regular_part(x - h * e, y)
        for e in np.eye(N)
    ) / (h * h)
    assert abs(lap) < 1e-5 * BALL.regular_part(x, y)


def test_green_vanishes_towards_the_boundary():
    y = axis_point(N, 0.3)
    direction = np.eye(N)[1]
    values = [BALL.green(r * direction, y) for r in (0.9, 0.99, 0.999, 0.9999, 1.0)]
    assert np.all(np.diff(values) < 0)
    assert abs(values[-1]) < 1e-12


def test_green_symmetry_and_positivity_on_many_pairs(rng):
    x, y = inside_points(rng, 1000), inside_points(rng, 1000)
    g_xy, g_yx = BALL.green(x, y), BALL.green(y, x)
    np.testing.assert_allclose(g_xy, g_yx, rtol=1e-12)
    np.testing.assert_allclose(BALL.regular_part(x, y), BALL.regular_part(y, x), rtol=1e-12)
    assert np.all(g_xy > 0)


@given(seed=st.integers(0, 2**31))
def test_green_is_rotation_invariant(seed):
    rng = np.random.default_rng(seed)
    x, y = inside_points(rng, 2)
    R = random_rotation(rng, N)
    assert BALL.green(R @ x, R @ y) == pytest.approx(BALL.green(x, y), rel=1e-12)


@pytest.mark.parametrize("t", [0.3, 0.5, 0.8])
def test_closed_forms_match_green_combinations_on_polygons(t):
    g = gamma_tau(N, t)
    tri = placement(3, t, N).centers
    sq = placement(4, t, N).centers
    origin = np.zeros(N)
    H = BALL.robin(tri[0])
    assert g.tau1 == pytest.approx(BALL.green(tri[0], origin), rel=1e-12)
    assert g.gamma1 == pytest.approx(H - 2 * BALL.green(tri[0], tri[1]), rel=1e-12)
    assert g.gamma2 == pytest.approx(H - 2 * BALL.green(sq[0], sq[1]) - BALL.green(sq[0], sq[2]), rel=1e-12)
    assert g.gamma3 == pytest.approx(H - BALL.green(sq[0], sq[2]), rel=1e-12)
    assert g.gamma4 == pytest.approx(BALL.green(sq[0], sq[1]), rel=1e-12)


def test_triangle_combination_reference_value():
    # The three summands at t = 1/2 are about 4.2140, 4.1059 and 1.0134.
    g = gamma_tau(N, 0.5)
    assert g.gamma1 == pytest.approx(0.75**-5 - 2 * 3**-2.5 * 2**5 + 2 * (1 / 16 + 1 / 4 + 1) ** -2.5, rel=1e-14)
    assert g.gamma1 == pytest.approx(1.12179, abs=5e-5)
    assert g.gamma1 > 0


def test_square_combination_is_negative_below_the_window():
    assert gamma_tau(N, (math.sqrt(6) - math.sqrt(2)) / 2).gamma2 < 0


@pytest.mark.parametrize("name", ["tau1", "gamma1", "gamma2", "gamma3", "gamma4"])
def test_derivatives_match_differences(name):
    t, h = 0.55, 1e-6
    fd = (getattr(gamma_tau(N, t + h), name) - getattr(gamma_tau(N, t - h), name)) / (2 * h)
    assert getattr(gamma_tau(N, t), "d_" + name) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("dim", [7, 10, 15])
def test_triangle_and_square_combinations_increase(dim):
    t = np.linspace(0.05, 0.95, 10**4)
    g = gamma_tau(dim, t)
    assert np.all(np.diff(g.gamma1) > 0)
    assert np.all(np.diff(g.gamma3) > 0)


def test_triangle_combination_changes_sign_once():
    report = scan_sign(lambda t: gamma_tau(N, t).gamma1, (0.01, 0.99), 10**6)
    assert report.sign_changes == 1


def test_alpha_vanishes_when_the_constant_term_does():
    x = axis_point(N, 0.5)
    y = -x
    alpha, beta = alpha_beta(1, x, y, domain=_ShiftedGreen(x, y))
    assert alpha == 0.0 and beta == 0.0


class _ShiftedGreen:
    """Ball Green function with G(x, y) forced to equal H(x, x) at one pair."""

    def __init__(self, x, y):
        self.N = N
        self.pair = (tuple(x), tuple(y))

    def regular_part(self, a, b):
        return BALL.regular_part(a, b)

    def green(self, a, b):
        if (tuple(a), tuple(b)) == self.pair:
            return BALL.robin(a)
        return BALL.green(a, b)


@given(seed=st.integers(0, 2**31), which=st.sampled_from([1, 2, 3]))
def test_alpha_solves_its_quadratic(seed, which):
    rng = np.random.default_rng(seed)
    x, y, z = inside_points(rng, 3, 0.9)
    origin = np.zeros(N)
    constant = BALL.robin(x) - (1.0 if which == 1 else 2.0) * BALL.green(x, y)
    if which == 3:
        constant -= BALL.green(x, z)
    try:
        alpha, beta = alpha_beta(which, x, y, z if which == 3 else None)
    except NegativeDiscriminantError:
        g = BALL.green(x, origin)
        assert (which * g) ** 2 + 4 * constant < 0
        return
    g_x0 = BALL.green(x, origin)
    scale = max(abs(constant), g_x0 * abs(alpha), alpha * alpha)
    assert abs(alpha * alpha + which * g_x0 * alpha - constant) <= 1e-12 * scale
    assert beta == pytest.approx(constant + g_x0 * alpha, rel=1e-14, abs=1e-300)


def test_placement_validation():
    with pytest.raises(ValueError):
        placement(5, 0.5, N)
    with pytest.raises(ValueError):
        placement(3, 1.0, N)
    sq = placement(4, 0.5, N).centers
    np.testing.assert_array_equal(sq[2], -sq[0])
