"""Dimension constants and the two limiting bubble profiles.

The standard bubble is the Aubin-Talenti extremal
``U(x) = c0 * (delta / (delta**2 + |x - xi|**2))**((N-2)/2)`` and the Hardy
bubble is the radial extremal of the Sobolev inequality with an inverse-square
potential of strength ``mu``,
``V(x) = c_mu * (sigma / (sigma**2 |x|**beta1 + |x|**beta2))**((N-2)/2)``.

The Hardy constant is taken to be the optimal one, ``mu_bar = (N-2)**2 / 4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import DEFAULT_SPEC, QuadratureSpec

__all__ = [
    "HardyParams",
    "SobolevConstants",
    "critical_exponent",
    "hardy_constant",
    "instanton_constant",
    "hardy_params",
    "standard_bubble",
    "standard_bubble_radial",
    "hardy_bubble",
    "hardy_bubble_radial",
    "sobolev_constants",
]


def critical_exponent(N: int) -> float:
    """Return the critical Sobolev exponent 2N/(N-2)."""
    return 2.0 * N / (N - 2)


def hardy_constant(N: int) -> float:
    """Return the optimal Hardy constant (N-2)**2/4."""
    return (N - 2) ** 2 / 4.0


def instanton_constant(N: int) -> float:
    """Return c0 = (N(N-2))**((N-2)/4), computed through logarithms."""
    return math.exp((N - 2) / 4.0 * math.log(N * (N - 2)))


def _check_dimension(N: int) -> None:
    if int(N) != N or N < 5:
        raise ValueError(f"dimension-too-small: N={N} (need N >= 5)")


@dataclass(frozen=True)
class HardyParams:
    N: int
    mu: float
    mu_bar: float
    beta1: float
    beta2: float
    c_mu: float
    c0: float

    @property
    def exponent_gap(self) -> float:
        """beta2 - beta1 = 2*sqrt(1 - mu/mu_bar)."""
        return self.beta2 - self.beta1


def hardy_params(N: int, mu: float) -> HardyParams:
    """Exponents and normalising constant of the Hardy bubble for strength ``mu``."""
    _check_dimension(N)
    mu_bar = hardy_constant(N)
    if not (0.0 <= mu < mu_bar):
        raise ValueError(f"mu-out-of-range: mu={mu} must lie in [0, {mu_bar})")
    root_bar = math.sqrt(mu_bar)
    gap = math.sqrt(mu_bar - mu)
    # beta1 = 1 - sqrt(1 - mu/mu_bar) cancels for small mu; use the conjugate form.
    beta1 = (mu / mu_bar) / (1.0 + gap / root_bar)
    beta2 = 2.0 - beta1
    c_mu = math.exp((N - 2) / 4.0 * math.log(4.0 * N * (mu_bar - mu) / (N - 2)))
    return HardyParams(N, float(mu), mu_bar, beta1, beta2, c_mu, instanton_constant(N))


def standard_bubble_radial(N: int, delta: float, r: np.ndarray | float) -> np.ndarray | float:
    """Standard bubble as a function of the distance ``r`` to its center."""
    if delta <= 0:
        raise ValueError("nonpositive delta")
    r = np.asarray(r, dtype=float)
    value = instanton_constant(N) * (delta / (delta * delta + r * r)) ** ((N - 2) / 2.0)
    return float(value) if value.ndim == 0 else value


def standard_bubble(N: int, delta: float, xi, x) -> np.ndarray | float:
    """Evaluate U_{delta, xi} at the point(s) ``x`` (last axis has length N)."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    dist = np.linalg.norm(x - xi, axis=-1)
    return standard_bubble_radial(N, delta, dist)


def hardy_bubble_radial(p: HardyParams, sigma: float, r: np.ndarray | float) -> np.ndarray | float:
    """Hardy bubble V_sigma as a function of ``r = |x|``.

    Written as ``c_mu sigma**m r**(-beta1 m) (sigma**2 + r**(beta2-beta1))**(-m)``
    with ``m = (N-2)/2``, which avoids forming both powers of ``r`` separately.
    """
    if sigma <= 0:
        raise ValueError("nonpositive sigma")
    r = np.asarray(r, dtype=float)
    m = (p.N - 2) / 2.0
    if p.mu > 0 and np.any(r == 0):
        raise ValueError("Hardy bubble is singular at x = 0 when mu > 0")
    with np.errstate(divide="ignore"):
        value = (
            p.c_mu
            * sigma**m
            * np.power(r, -p.beta1 * m)
            * (sigma * sigma + np.power(r, p.exponent_gap)) ** (-m)
        )
    return float(value) if value.ndim == 0 else value


def hardy_bubble(p: HardyParams, sigma: float, x) -> np.ndarray | float:
    """Evaluate V_sigma at the point(s) ``x``."""
    r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
    return hardy_bubble_radial(p, sigma, r)


@dataclass(frozen=True)
class SobolevConstants:
    s0: float
    s_mu: float
    s_bar: float


def _hardy_energy(N: int, mu: float, q: QuadratureSpec) -> float:
    """Integral of V_1**(2*) over R^N by radial quadrature."""
    from .integrals import hardy_profile_integrals

    return hardy_profile_integrals(hardy_params(N, mu), q).int_V_2star


def sobolev_constants(N: int, mu: float, q: QuadratureSpec = DEFAULT_SPEC) -> SobolevConstants:
    """Best constants S0, S_mu and the first-order slope S_bar = -dS_mu/dmu at 0.

    The slope is a Richardson extrapolation of the one-sided differences at
    ``h = 1e-4 * mu_bar`` and ``2h``.
    """
    from .integrals import instanton_integrals

    hardy_params(N, mu)
    exponent = 2.0 / N
    s0 = instanton_integrals(N, q).int_U_2star ** exponent
    s_mu = s0 if mu == 0 else _hardy_energy(N, mu, q) ** exponent
    # Differences use the quadrature value at mu = 0 so both ends share one integrator.
    base = _hardy_energy(N, 0.0, q) ** exponent
    h = 1e-4 * hardy_constant(N)
    slope_h = (base - _hardy_energy(N, h, q) ** exponent) / h
    slope_2h = (base - _hardy_energy(N, 2 * h, q) ** exponent) / (2 * h)
    s_bar = 2.0 * slope_h - slope_2h
    return SobolevConstants(s0=s0, s_mu=s_mu, s_bar=s_bar)
