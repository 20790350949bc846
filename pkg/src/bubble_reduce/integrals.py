"""R^N integrals behind the expansion constants of the reduced energies.

Radial integrals of ``(1 + r**2)**(-p)`` type have Beta closed forms; every
such value is also computed by compactified double-exponential quadrature and
the two are cross-checked.  The Hardy-profile integrals and the tower kernels
``h1``, ``h2`` are computed by quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.special import betaln, digamma, gammaln

from .profiles import (
    HardyParams,
    critical_exponent,
    instanton_constant,
    sobolev_constants,
)
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureError,
    QuadratureSpec,
    integrate_semi_infinite,
    tanh_sinh,
)

__all__ = [
    "ExpansionConstants",
    "InstantonIntegrals",
    "HardyIntegrals",
    "sphere_area",
    "radial_power_integral",
    "instanton_integrals",
    "hardy_profile_integrals",
    "tower_h1",
    "tower_h2",
    "inverse_quartic_moment",
    "power_kernel",
    "tower_c1",
    "expansion_constants",
]

# Mutual cross-checks between closed forms and quadrature must agree this well,
# relative to the requested quadrature tolerance.
_CROSS_CHECK_FACTOR = 1e3


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere in R^N, 2 pi^(N/2) / Gamma(N/2)."""
    return math.exp(math.log(2.0) + 0.5 * N * math.log(math.pi) - gammaln(0.5 * N))


def radial_power_integral(a: float, p: float) -> float:
    """Integral of r**a (1 + r**2)**(-p) over (0, inf), via log-Beta."""
    alpha = 0.5 * (a + 1.0)
    if not (a > -1.0 and p - alpha > 0.0):
        raise ValueError(f"divergent-integral: a={a}, p={p}")
    return 0.5 * math.exp(betaln(alpha, p - alpha))


def _radial_power_log_moment(a: float, p: float) -> float:
    """Integral of r**a (1 + r**2)**(-p) ln(1 + r**2): minus the p-derivative of the Beta form."""
    alpha = 0.5 * (a + 1.0)
    return radial_power_integral(a, p) * (digamma(p) - digamma(p - alpha))


def power_kernel(r: np.ndarray, a: float, p: float) -> np.ndarray:
    """r**a (1 + r**2)**(-p) evaluated in log space so huge or tiny r cannot overflow."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return np.exp(a * np.log(r) - p * np.log1p(r * r))


def _relative_gap(x: float, y: float) -> float:
    return abs(x - y) / max(abs(x), abs(y), 1e-300)


@dataclass(frozen=True)
class InstantonIntegrals:
    N: int
    int_U_2star: float
    int_U_2star_minus1: float
    int_U_lnU: float
    int_standard_kernel: float
    quadrature: dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def max_discrepancy(self) -> float:
        """Largest relative gap between the closed forms and their quadrature values."""
        return max(_relative_gap(getattr(self, key), value) for key, value in self.quadrature.items())


@lru_cache(maxsize=256)
def instanton_integrals(N: int, q: QuadratureSpec = DEFAULT_SPEC) -> InstantonIntegrals:
    """Integrals of the unit bubble U_{1,0}: closed Beta forms checked against quadrature."""
    if N < 5:
        raise ValueError(f"dimension-too-small: N={N}")
    omega = sphere_area(N)
    c0 = instanton_constant(N)
    two_star = critical_exponent(N)
    m = 0.5 * (N - 2)
    kernel_power = 0.5 * (N + 2)

    closed = {
        "int_U_2star": c0**two_star * omega * radial_power_integral(N - 1, N),
        "int_U_2star_minus1": c0 ** (two_star - 1) * omega * radial_power_integral(N - 1, kernel_power),
        "int_standard_kernel": omega * radial_power_integral(N - 1, kernel_power),
    }
    closed["int_U_lnU"] = math.log(c0) * closed["int_U_2star"] - m * c0**two_star * omega * (
        _radial_power_log_moment(N - 1, N)
    )

    def log_unit_bubble(r: np.ndarray) -> np.ndarray:
        return math.log(c0) - m * np.log1p(r * r)

    integrands = {
        "int_U_2star": lambda r: c0**two_star * power_kernel(r, N - 1, N),
        "int_U_2star_minus1": lambda r: c0 ** (two_star - 1) * power_kernel(r, N - 1, kernel_power),
        "int_standard_kernel": lambda r: power_kernel(r, N - 1, kernel_power),
        "int_U_lnU": lambda r: c0**two_star * power_kernel(r, N - 1, N) * log_unit_bubble(r),
    }
    numeric = {
        key: omega * integrate_semi_infinite(f, q=q, label=key) for key, f in integrands.items()
    }
    record = InstantonIntegrals(N=N, quadrature=numeric, **closed)
    if record.max_discrepancy > _CROSS_CHECK_FACTOR * q.rel_tol:
        raise QuadratureError(
            f"instanton integrals disagree with closed forms (gap {record.max_discrepancy:.3e})"
        )
    return record


@dataclass(frozen=True)
class HardyIntegrals:
    int_V_2star: float
    int_V_lnV: float
    int_hardy_kernel: float


def hardy_profile_integrals(p: HardyParams, q: QuadratureSpec = DEFAULT_SPEC) -> HardyIntegrals:
    """Radial quadratures of the unit Hardy bubble and of the Hardy interaction kernel."""
    N = p.N
    omega = sphere_area(N)
    two_star = critical_exponent(N)
    kernel_power = 0.5 * (N + 2)

    m = 0.5 * (N - 2)

    def log_unit_hardy(log_r: np.ndarray) -> np.ndarray:
        return math.log(p.c_mu) - p.beta1 * m * log_r - m * np.logaddexp(0.0, p.exponent_gap * log_r)

    def v_power(r: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            log_r = np.log(r)
        return np.exp(two_star * log_unit_hardy(log_r) + (N - 1) * log_r)

    def v_log(r: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            log_r = np.log(r)
        log_v = log_unit_hardy(log_r)
        return np.exp(two_star * log_v + (N - 1) * log_r) * log_v

    def kernel(r: np.ndarray) -> np.ndarray:
        # (r^b1 + r^b2)^(-p) r^(N-1) = r^(N-1-b1 p) (1 + r^(b2-b1))^(-p)
        with np.errstate(divide="ignore"):
            log_r = np.log(r)
        exponent = (N - 1 - p.beta1 * kernel_power) * log_r
        return np.exp(exponent - kernel_power * np.logaddexp(0.0, p.exponent_gap * log_r))

    return HardyIntegrals(
        int_V_2star=omega * integrate_semi_infinite(v_power, q=q, label="int_V_2star"),
        int_V_lnV=omega * integrate_semi_infinite(v_log, q=q, label="int_V_lnV"),
        int_hardy_kernel=omega * integrate_semi_infinite(kernel, q=q, label="int_hardy_kernel"),
    )


def _axisymmetric_kernel_integral(
    N: int,
    rho: float,
    kernel_exponent: float,
    profile_power: float,
    q: QuadratureSpec,
    label: str,
) -> float:
    """Integral over R^N of |y + zeta|**(-kernel_exponent) (1 + |y|**2)**(-profile_power).

    Polar coordinates about the origin with the axis along -zeta: the inner
    integral runs over the angle ``phi`` between y and -zeta with weight
    ``sin(phi)**(N-2)``, so the pole sits at the endpoint phi = 0 where the
    double-exponential nodes cluster.  The outer radial integral is split at
    ``r = rho``.
    """
    inner_q = q.tightened(10.0)
    area_ratio = sphere_area(N - 1)

    def inner(r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)[:, None]

        def angular(phi: np.ndarray) -> np.ndarray:
            phi = phi[None, :]
            # |y + zeta|^2 = (r - rho)^2 + 2 r rho (1 - cos phi)
            dist_sq = (r - rho) ** 2 + 4.0 * r * rho * np.sin(0.5 * phi) ** 2
            return np.sin(phi) ** (N - 2) * dist_sq ** (-0.5 * kernel_exponent)

        ang = tanh_sinh(angular, 0.0, math.pi, inner_q, label)
        radial = power_kernel(r[:, 0], N - 1, profile_power)
        return area_ratio * radial * np.atleast_1d(ang)

    if rho == 0.0:
        return sphere_area(N) * integrate_semi_infinite(
            lambda r: power_kernel(r, N - 1 - kernel_exponent, profile_power), q=q, label=label
        )
    head = tanh_sinh(inner, 0.0, rho, q, label)
    tail = integrate_semi_infinite(inner, start=rho, scale=max(rho, 1.0), q=q, label=label)
    return math.fsum([head, tail])


def tower_h1(
    N: int,
    rho: float,
    q: QuadratureSpec = DEFAULT_SPEC,
    method: Literal["reduction", "axisymmetric"] = "reduction",
) -> float:
    """Tower kernel h1(zeta) = int |y+zeta|^(2-N) (1+|y|^2)^(-(N+2)/2) dy, with rho = |zeta|.

    ``reduction`` uses the mean-value property: the spherical average of the
    harmonic kernel |y+zeta|^(2-N) over |y| = r equals max(r, rho)^(2-N), which
    leaves a 1-D radial integral.  ``axisymmetric`` integrates in (r, angle).
    """
    if N < 5:
        raise ValueError(f"dimension-too-small: N={N}")
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    power = 0.5 * (N + 2)
    if method == "axisymmetric":
        return _axisymmetric_kernel_integral(N, rho, N - 2, power, q, "tower_h1")
    if method != "reduction":
        raise ValueError(f"unknown method {method!r}")
    omega = sphere_area(N)
    tail = integrate_semi_infinite(
        lambda r: power_kernel(r, 1.0, power), start=rho, scale=max(rho, 1.0), q=q, label="tower_h1"
    )
    if rho == 0.0:
        return omega * tail
    head = tanh_sinh(lambda r: power_kernel(r, N - 1, power), 0.0, rho, q, "tower_h1")
    return omega * math.fsum([rho ** (2 - N) * head, tail])


def tower_h2(N: int, rho: float, q: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Tower kernel h2(zeta) = int |y+zeta|^(-2) (1+|y|^2)^(-(N-2)) dy by axisymmetric quadrature."""
    if N < 5:
        raise ValueError(f"dimension-too-small: N={N}")
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    return _axisymmetric_kernel_integral(N, rho, 2.0, N - 2.0, q, "tower_h2")


def inverse_quartic_moment(N: int) -> float:
    """Integral of |y|^(-4) (1 + |y|^2)^(-(N-2)) over R^N (finite for N >= 5)."""
    return sphere_area(N) * radial_power_integral(N - 5, N - 2)


@dataclass(frozen=True)
class ExpansionConstants:
    """Constants of the energy expansion and of the reduced function.

    For the ``multipoint`` variant ``a3`` multiplies ``eps**alpha`` and ``a4``
    multiplies ``eps ln eps``; ``b3``, ``b4`` and ``c1`` are unused and set to
    ``None``.  For the ``tower`` variant ``a3`` multiplies ``eps ln eps`` and
    ``a4`` is ``None``.
    """

    variant: Literal["multipoint", "tower"]
    N: int
    k: int
    mu0: float
    a1: float
    a2: float
    a3: float
    a4: float | None
    b1: float
    b2: float
    b3: float | None
    b4: float | None
    c1: float | None
    s_bar: float

    def as_dict(self) -> dict[str, object]:
        return {
            "variant": self.variant,
            "N": self.N,
            "k": self.k,
            "mu0": self.mu0,
            "a1": self.a1,
            "a2": self.a2,
            "a3": self.a3,
            "a4": self.a4,
            "b1": self.b1,
            "b2": self.b2,
            "b3": self.b3,
            "b4": self.b4,
            "c1": self.c1,
            "s_bar": self.s_bar,
        }


def tower_c1(k: int, b1: float, b2: float, b4: float) -> float:
    """Value of the s-reduced tower function at its critical point, minus the zeta terms."""
    logs = math.fsum(i * math.log(i * b4 / b2) for i in range(1, k + 1))
    return (k + 1) ** 2 * b4 / 2.0 - b4 * (0.5 * (k + 1) * math.log((k + 1) * b4 / (2.0 * b1)) + logs)


@lru_cache(maxsize=256)
def expansion_constants(
    N: int,
    mu0: float,
    k: int,
    variant: Literal["multipoint", "tower"],
    q: QuadratureSpec = DEFAULT_SPEC,
) -> ExpansionConstants:
    """Assemble a1..a4, b1..b4 and (tower only) c1 for dimension N, Hardy slope mu0, k bubbles."""
    if variant not in ("multipoint", "tower"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "multipoint" and k < 1:
        raise ValueError("multipoint variant needs k >= 1")
    if k < 0:
        raise ValueError("k must be nonnegative")
    if mu0 < 0:
        raise ValueError("mu0 must be nonnegative")
    ints = instanton_integrals(N, q)
    sob = sobolev_constants(N, 0.0, q)
    two_star = critical_exponent(N)
    c0 = instanton_constant(N)
    energy = ints.int_U_2star
    n_atoms = k + 1

    a1 = n_atoms * energy / N
    log_part = n_atoms / two_star * ints.int_U_lnU - n_atoms / two_star**2 * energy
    hardy_shift = 0.5 * sob.s0 ** ((N - 2) / 2.0) * sob.s_bar * mu0
    b1 = 0.5 * c0 * ints.int_U_2star_minus1

    if variant == "multipoint":
        return ExpansionConstants(
            variant="multipoint",
            N=N,
            k=k,
            mu0=float(mu0),
            a1=a1,
            a2=log_part,
            a3=hardy_shift,
            a4=n_atoms / (2.0 * two_star) * energy,
            b1=b1,
            b2=energy / two_star,
            b3=None,
            b4=None,
            c1=None,
            s_bar=sob.s_bar,
        )
    b2 = c0**two_star
    b4 = energy / two_star
    return ExpansionConstants(
        variant="tower",
        N=N,
        k=k,
        mu0=float(mu0),
        a1=a1,
        a2=log_part - hardy_shift,
        a3=n_atoms**2 / (2.0 * two_star) * energy,
        a4=None,
        b1=b1,
        b2=b2,
        b3=0.5 * c0 * c0 * mu0,
        b4=b4,
        c1=tower_c1(k, b1, b2, b4),
        s_bar=sob.s_bar,
    )
