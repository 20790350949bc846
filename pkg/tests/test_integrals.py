import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from bubble_reduce.integrals import (
    expansion_constants,
    hardy_profile_integrals,
    instanton_integrals,
    inverse_quartic_moment,
    radial_power_integral,
    sphere_area,
    tower_h1,
    tower_h2,
)
from bubble_reduce.profiles import critical_exponent, hardy_params, instanton_constant, sobolev_constants
from bubble_reduce.quadrature import DEFAULT_SPEC

N = 7


def test_radial_power_integral_reference_values():
    assert radial_power_integral(0, 1) == pytest.approx(math.pi / 2, rel=1e-15)
    assert radial_power_integral(1, 2) == pytest.approx(0.5, rel=1e-15)
    ref, _ = integrate.quad(lambda r: r**6 * (1 + r * r) ** -4.5, 0, np.inf, epsabs=0, epsrel=1e-13, limit=400)
    assert radial_power_integral(6, 4.5) == pytest.approx(ref, rel=1e-12)


def test_radial_power_integral_rejects_divergent_exponents():
    with pytest.raises(ValueError):
        radial_power_integral(6, 3.0)


def test_sphere_area_low_dimensions():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("dim", [7, 10, 15])
def test_instanton_energy_closed_form_matches_quadrature(dim):
    ints = instanton_integrals(dim)
    assert ints.quadrature["int_U_2star"] == pytest.approx(ints.int_U_2star, rel=1e-10)
    assert ints.max_discrepancy < 1e-10


def test_instanton_energy_is_a_power_of_the_sobolev_constant():
    ints = instanton_integrals(N)
    s0 = sobolev_constants(N, 0.0).s0
    assert ints.int_U_2star == pytest.approx(s0 ** (N / 2), rel=1e-12)
    assert ints.int_standard_kernel == pytest.approx(sphere_area(N) * radial_power_integral(6, 4.5), rel=1e-15)


def test_dirichlet_energy_equals_critical_energy():
    c0 = instanton_constant(N)
    m = (N - 2) / 2
    # |grad U|(r) = c0 (N-2) r (1+r^2)^(-N/2) for the unit bubble.
    grad_sq, _ = integrate.quad(
        lambda r: sphere_area(N) * r ** (N - 1) * (c0 * 2 * m * r * (1 + r * r) ** (-N / 2)) ** 2,
        0,
        np.inf,
        epsabs=0,
        epsrel=1e-13,
        limit=400,
    )
    assert grad_sq == pytest.approx(instanton_integrals(N).int_U_2star, rel=1e-11)


def test_hardy_integrals_at_zero_strength():
    h = hardy_profile_integrals(hardy_params(N, 0.0))
    ints = instanton_integrals(N)
    assert h.int_V_2star == pytest.approx(ints.int_U_2star, rel=1e-9)
    assert h.int_V_lnV == pytest.approx(ints.int_U_lnU, rel=1e-9)


def test_hardy_energy_is_the_power_of_its_best_constant():
    p = hardy_params(N, 1e-3)
    s = sobolev_constants(N, 1e-3)
    assert hardy_profile_integrals(p).int_V_2star == pytest.approx(s.s_mu ** (N / 2), rel=1e-12)


def test_hardy_kernel_tends_to_the_standard_kernel():
    target = instanton_integrals(N).int_standard_kernel
    mus = [1e-3, 1e-5, 1e-7]
    gaps = [hardy_profile_integrals(hardy_params(N, mu)).int_hardy_kernel - target for mu in mus]
    # Linear approach: the gap shrinks by the ratio of the strengths.
    assert abs(gaps[1] / gaps[0] - 1e-2) < 1e-3
    assert abs(gaps[2]) < 1e-5 * target


def test_tower_kernels_at_zero_translation():
    omega = sphere_area(N)
    assert tower_h1(N, 0.0) == pytest.approx(omega * radial_power_integral(1, 4.5), rel=1e-12)
    assert tower_h1(N, 0.0) == pytest.approx(omega / N, rel=1e-12)
    assert tower_h2(N, 0.0) == pytest.approx(omega * radial_power_integral(4, 5), rel=1e-10)
    assert inverse_quartic_moment(N) == pytest.approx(omega * radial_power_integral(2, 5), rel=1e-14)


@pytest.mark.parametrize("dim", [7, 10])
@pytest.mark.parametrize("rho", [0.0, 0.3, 1.0, 3.0])
def test_mean_value_reduction_matches_two_dimensional_quadrature(dim, rho):
    a = tower_h1(dim, rho, method="reduction")
    b = tower_h1(dim, rho, method="axisymmetric")
    assert a == pytest.approx(b, rel=1e-9)


def test_first_tower_kernel_decreases():
    values = [tower_h1(N, rho) for rho in np.linspace(0.0, 5.0, 26)]
    assert np.all(np.diff(values) < 0)


def test_second_tower_kernel_is_stable_under_tighter_tolerance():
    loose = tower_h2(N, 1.0)
    tight = tower_h2(N, 1.0, DEFAULT_SPEC.tightened(2.0))
    assert loose == pytest.approx(tight, rel=10 * DEFAULT_SPEC.rel_tol)


def test_second_tower_kernel_matches_adaptive_quadrature():
    rho = 1.0
    omega_lower = sphere_area(N - 1)

    def inner(theta, r):
        dist2 = r * r + rho * rho + 2 * r * rho * math.cos(theta)
        return omega_lower * math.sin(theta) ** (N - 2) * r ** (N - 1) * (1 + r * r) ** (2 - N) / dist2

    ref, _ = integrate.dblquad(inner, 0, np.inf, 0, math.pi, epsabs=0, epsrel=1e-11)
    assert tower_h2(N, rho) == pytest.approx(ref, rel=1e-8)


def test_tower_kernels_reject_negative_norms():
    with pytest.raises(ValueError):
        tower_h1(N, -1.0)
    with pytest.raises(ValueError):
        tower_h2(N, -1.0)


def test_expansion_constants_reference_values():
    s0 = sobolev_constants(N, 0.0).s0
    multi = expansion_constants(N, 1.0, 1, "multipoint")
    assert multi.a1 == pytest.approx(2 / 7 * s0**3.5, rel=1e-12)
    tower = expansion_constants(N, 1.0, 0, "tower")
    assert tower.a1 == pytest.approx(s0**3.5 / 7, rel=1e-12)
    assert tower.a3 == pytest.approx(instanton_integrals(N).int_U_2star / (2 * critical_exponent(N)), rel=1e-14)
    assert multi.b1 == tower.b1
    assert tower.c1 is not None and multi.c1 is None


def test_expansion_constants_validation():
    with pytest.raises(ValueError):
        expansion_constants(N, 1.0, 0, "multipoint")
    with pytest.raises(ValueError):
        expansion_constants(N, -1.0, 1, "tower")
    with pytest.raises(ValueError):
        expansion_constants(N, 1.0, 1, "ring")


@given(dim=st.integers(5, 30))
def test_beta_forms_match_quadrature_in_every_dimension(dim):
    assert instanton_integrals(dim).max_discrepancy <= DEFAULT_SPEC.rel_tol * 10


@given(dim=st.integers(5, 20), k=st.integers(0, 5), mu0=st.floats(0.01, 10.0), variant=st.sampled_from(["multipoint", "tower"]))
def test_expansion_constants_are_positive_and_linear_in_the_strength(dim, k, mu0, variant):
    if variant == "multipoint":
        k = max(k, 1)
    c = expansion_constants(dim, mu0, k, variant)
    positives = [c.a1, c.a3, c.b1, c.b2] + ([c.a4] if variant == "multipoint" else [c.b4, c.b3])
    assert all(v > 0 for v in positives)
    if variant == "tower":
        assert c.b3 / mu0 == pytest.approx(expansion_constants(dim, 1.0, k, variant).b3, rel=1e-14)
