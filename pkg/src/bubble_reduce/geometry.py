"""Green function of the unit ball and the axis/polygon functions built from it.

The Green function is normalised without the dimensional constant,
``G(x, y) = |x - y|**(2-N) - H(x, y)``, with the Kelvin-reflection regular
part ``H(x, y) = (|x|**2 |y|**2 - 2 x.y + 1)**((2-N)/2)``.  In this form
``H(x, 0) = H(0, y) = 1`` holds without a special branch.

Bubble centers of the polygon placements lie in the (x1, x2) plane at radius
``t`` and angles ``2 pi i / k``; the scalar functions ``tau1`` and
``gamma1..gamma4`` are the Green-function combinations that the reduced
energies depend on for those placements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

__all__ = [
    "GreenProvider",
    "BallDomain",
    "PlacementK",
    "GammaTau",
    "NegativeDiscriminantError",
    "placement",
    "axis_point",
    "phi_point",
    "phi_axis",
    "phi_axis_prime",
    "alpha_beta",
    "gamma_tau",
]


class GreenProvider(Protocol):
    """Capability needed by the reduced energies: a Green function and its regular part."""

    N: int

    def green(self, x, y) -> np.ndarray | float: ...

    def regular_part(self, x, y) -> np.ndarray | float: ...


@dataclass(frozen=True)
class BallDomain:
    """Unit ball in R^N centred at the origin."""

    N: int

    def __post_init__(self) -> None:
        if self.N < 3:
            raise ValueError("dimension-too-small")

    def _as_points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.N:
            raise ValueError(f"points must have {self.N} coordinates")
        if np.any(np.sum(x * x, axis=-1) > 1.0 + 1e-14):
            raise ValueError("point outside the closed unit ball")
        return x

    def regular_part(self, x, y) -> np.ndarray | float:
        x, y = self._as_points(x), self._as_points(y)
        xx = np.sum(x * x, axis=-1)
        yy = np.sum(y * y, axis=-1)
        xy = np.sum(x * y, axis=-1)
        value = (xx * yy - 2.0 * xy + 1.0) ** (0.5 * (2 - self.N))
        return float(value) if np.ndim(value) == 0 else value

    def green(self, x, y) -> np.ndarray | float:
        x, y = self._as_points(x), self._as_points(y)
        dist = np.linalg.norm(x - y, axis=-1)
        if np.any(dist == 0.0):
            raise ValueError("coincident points in green")
        value = dist ** (2 - self.N) - self.regular_part(x, y)
        return float(value) if np.ndim(value) == 0 else value

    def robin(self, x) -> np.ndarray | float:
        """H(x, x) = (1 - |x|**2)**(2-N)."""
        return self.regular_part(x, x)


def axis_point(N: int, t: float) -> np.ndarray:
    """The point (t, 0, ..., 0) of R^N."""
    x = np.zeros(N)
    x[0] = t
    return x


@dataclass(frozen=True)
class PlacementK:
    k: int
    t: float
    centers: np.ndarray


def placement(k: int, t: float, N: int) -> PlacementK:
    """k centers at radius t and angles 2 pi i/k in the (x1, x2) plane, the first on the x1 axis."""
    if k not in (1, 2, 3, 4):
        raise ValueError("k must be 1, 2, 3 or 4")
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0, 1)")
    angles = 2.0 * math.pi * np.arange(k) / k
    centers = np.zeros((k, N))
    centers[:, 0] = t * np.cos(angles)
    centers[:, 1] = t * np.sin(angles)
    # Exact zeros at the quarter and half turns keep the square/antipodal cases symmetric.
    centers[np.abs(centers) < 1e-15 * t] = 0.0
    return PlacementK(k=k, t=float(t), centers=centers)


def phi_point(N: int, x) -> float:
    """phi(x) = H(0,0)**(1/2) H(x,x)**(1/2) + G(x, 0)."""
    ball = BallDomain(N)
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x) == 0.0:
        raise ValueError("phi is undefined at the origin")
    origin = np.zeros(N)
    return math.sqrt(ball.regular_part(origin, origin) * ball.robin(x)) + ball.green(x, origin)


def _check_axis(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any((np.abs(t) >= 1.0) | (t == 0.0)):
        raise ValueError("t must lie in (-1, 1) without 0")
    return t


def phi_axis(N: int, t):
    """phi on the axis: (1 - t**2)**(-(N-2)/2) + |t|**(2-N) - 1."""
    t = _check_axis(t)
    value = (1.0 - t * t) ** (-0.5 * (N - 2)) + np.abs(t) ** (2 - N) - 1.0
    return float(value) if value.ndim == 0 else value


def phi_axis_prime(N: int, t):
    """Derivative of :func:`phi_axis` in t."""
    t = _check_axis(t)
    value = (N - 2) * t * (1.0 - t * t) ** (-0.5 * N) + (2 - N) * np.sign(t) * np.abs(t) ** (1 - N)
    return float(value) if value.ndim == 0 else value


class NegativeDiscriminantError(ValueError):
    """The quadratic defining an alpha has no real root; carries the discriminant."""

    def __init__(self, discriminant: float) -> None:
        super().__init__(f"negative discriminant {discriminant:.6e}")
        self.discriminant = discriminant


def _positive_root(leading: float, linear: float, constant: float) -> float:
    """'+sqrt' root of leading*a**2 + linear*a - constant = 0, free of cancellation."""
    disc = linear * linear + 4.0 * leading * constant
    if disc < 0.0:
        raise NegativeDiscriminantError(disc)
    root = math.sqrt(disc)
    if linear > 0.0:
        return 2.0 * constant / (linear + root)
    return (root - linear) / (2.0 * leading)


def alpha_beta(which: int, x, y, z=None, domain: GreenProvider | None = None) -> tuple[float, float]:
    """Scale ratio alpha and effective coefficient beta for the 2-, 3- and 4-bubble polygons.

    ``which = m`` selects the quadratic ``H(0,0) a**2 + m G(x,0) a - c = 0``
    with ``c = H(x,x) - G(x,y)`` (m=1), ``H(x,x) - 2G(x,y)`` (m=2) or
    ``H(x,x) - 2G(x,y) - G(x,z)`` (m=3); beta is ``c + G(x,0) a``.
    """
    if which not in (1, 2, 3):
        raise ValueError("which must be 1, 2 or 3")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    domain = domain or BallDomain(x.shape[-1])
    origin = np.zeros_like(x)
    if np.allclose(x, y) or (z is not None and (np.allclose(x, z) or np.allclose(y, z))):
        raise ValueError("coincident points")
    h00 = domain.regular_part(origin, origin)
    g_x0 = domain.green(x, origin)
    constant = domain.regular_part(x, x) - (1.0 if which == 1 else 2.0) * domain.green(x, y)
    if which == 3:
        if z is None:
            raise ValueError("alpha_3 needs a third point")
        constant -= domain.green(x, np.asarray(z, dtype=float))
    alpha = _positive_root(h00, which * g_x0, constant)
    return alpha, constant + g_x0 * alpha


@dataclass(frozen=True)
class GammaTau:
    """Green-function combinations along the polygon family at radius t, with t-derivatives."""

    t: float
    tau1: float
    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float
    d_tau1: float
    d_gamma1: float
    d_gamma2: float
    d_gamma3: float
    d_gamma4: float


def gamma_tau(N: int, t):
    """Closed forms of tau1 and gamma1..gamma4 (and derivatives) at t in (0, 1).

    tau1 = G(xi1, 0); gamma1 = H(xi1,xi1) - 2G(xi1,xi2) for the triangle;
    gamma2 = H - 2G(xi1,xi2) - G(xi1,xi3), gamma3 = H - G(xi1,xi3) and
    gamma4 = G(xi1,xi2) for the square.  ``t`` may be an array.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any((t_arr <= 0.0) | (t_arr >= 1.0)):
        raise ValueError("t out of range (0, 1)")
    m = 0.5 * (N - 2)
    p = 2 - N
    s2, s3 = math.sqrt(2.0), math.sqrt(3.0)
    tt = t_arr * t_arr
    with np.errstate(over="ignore"):
        robin = (1.0 - tt) ** p
        d_robin = 2.0 * (N - 2) * t_arr * (1.0 - tt) ** (p - 1)
        t_pow = t_arr**p
        d_t_pow = p * t_arr ** (p - 1)
        tri = (tt * tt + tt + 1.0) ** (-m)
        d_tri = -m * (4.0 * tt * t_arr + 2.0 * t_arr) * (tt * tt + tt + 1.0) ** (-m - 1)
        quad = (tt * tt + 1.0) ** (-m)
        d_quad = -m * 4.0 * tt * t_arr * (tt * tt + 1.0) ** (-m - 1)
        anti = (tt + 1.0) ** p
        d_anti = p * 2.0 * t_arr * (tt + 1.0) ** (p - 1)

        tau1 = t_pow - 1.0
        gamma1 = robin - 2.0 * s3**p * t_pow + 2.0 * tri
        gamma2 = robin - 2.0 * s2**p * t_pow + 2.0 * quad - 2.0**p * t_pow + anti
        gamma3 = robin - 2.0**p * t_pow + anti
        gamma4 = s2**p * t_pow - quad
        d_gamma1 = d_robin - 2.0 * s3**p * d_t_pow + 2.0 * d_tri
        d_gamma2 = d_robin - 2.0 * s2**p * d_t_pow + 2.0 * d_quad - 2.0**p * d_t_pow + d_anti
        d_gamma3 = d_robin - 2.0**p * d_t_pow + d_anti
        d_gamma4 = s2**p * d_t_pow - d_quad

    def out(v):
        return float(v) if np.ndim(v) == 0 else v

    return GammaTau(
        t=out(t_arr),
        tau1=out(tau1),
        gamma1=out(gamma1),
        gamma2=out(gamma2),
        gamma3=out(gamma3),
        gamma4=out(gamma4),
        d_tau1=out(d_t_pow),
        d_gamma1=out(d_gamma1),
        d_gamma2=out(d_gamma2),
        d_gamma3=out(d_gamma3),
        d_gamma4=out(d_gamma4),
    )
