"""Energy of projected bubble configurations on the unit ball, by axisymmetric quadrature.

A configuration is a signed sum of projected bubbles whose centers lie on the
x1 axis (Hardy bubbles sit at the origin).  Every integrand then depends only
on ``z = x1`` and the distance ``rp`` to the axis, so integrals over the ball
reduce to two dimensions.  The quadratic part of the energy is assembled from
integration by parts against the profile equations, which avoids gradient
quadrature:

* standard bubble A: ``-Laplace A = A**(2*-1)``
* Hardy bubble V:    ``-Laplace V = V**(2*-1) + mu V/|x|**2``

Projection corrections are harmonic and exact: the Hardy correction is the
constant ``V(1)``, and the standard correction is the Kelvin image
``c0 delta**m (A + B|x|**2 - 2 xi.x)**(-m)`` that matches the boundary trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Literal, Sequence

import numpy as np

from .integrals import ExpansionConstants, hardy_profile_integrals, instanton_integrals, sphere_area
from .profiles import (
    HardyParams,
    critical_exponent,
    hardy_bubble_radial,
    hardy_params,
    instanton_constant,
    standard_bubble_radial,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec, tanh_sinh

__all__ = [
    "ProjectedBubble",
    "BubbleAtom",
    "Configuration",
    "EnergyBreakdown",
    "AxisymmetricGrid",
    "FitModel",
    "FitResult",
    "NonReducibleError",
    "project_hardy_bubble",
    "project_standard_bubble",
    "poisson_extension",
    "energy_functional",
    "single_bubble_deficit",
    "pair_interaction",
    "expansion_prediction",
    "coefficient_extraction",
    "fit_leading_coefficient",
]


class NonReducibleError(ValueError):
    """The configuration is not symmetric about the x1 axis."""


# --------------------------------------------------------------------------
# Projected bubbles


@dataclass(frozen=True)
class ProjectedBubble:
    """A bubble and its harmonic correction on the unit ball.

    ``center`` is the axis coordinate of the bubble (0 for a Hardy bubble).
    For a standard bubble the correction is ``c0 delta**m (A + B|x|^2 - 2 xi.x)**(-m)``
    with ``A = (D + R)/2``, ``B = (D - R)/2``, ``D = 1 + xi^2 + delta^2`` and
    ``R = sqrt(D^2 - 4 xi^2)``; ``AB = xi^2`` makes it the Kelvin image of a
    point outside the ball.  For a Hardy bubble the correction is the constant
    ``V(1)``.
    """

    kind: Literal["standard", "hardy"]
    N: int
    scale: float
    center: float
    hardy: HardyParams | None = None

    @cached_property
    def _kelvin(self) -> tuple[float, float]:
        D = 1.0 + self.center**2 + self.scale**2
        R = math.sqrt((D - 2.0 * self.center) * (D + 2.0 * self.center))
        A = 0.5 * (D + R)
        return A, self.center**2 / A

    @cached_property
    def boundary_constant(self) -> float:
        """V(1) for a Hardy bubble."""
        if self.kind != "hardy":
            raise ValueError("only Hardy bubbles have a constant correction")
        return float(hardy_bubble_radial(self.hardy, self.scale, 1.0))

    def profile(self, z, rp) -> np.ndarray:
        z, rp = np.asarray(z, dtype=float), np.asarray(rp, dtype=float)
        if self.kind == "hardy":
            return hardy_bubble_radial(self.hardy, self.scale, np.hypot(z, rp))
        return standard_bubble_radial(self.N, self.scale, np.hypot(z - self.center, rp))

    def correction(self, z, rp) -> np.ndarray:
        z, rp = np.asarray(z, dtype=float), np.asarray(rp, dtype=float)
        if self.kind == "hardy":
            return np.full(np.broadcast(z, rp).shape, self.boundary_constant)
        A, B = self._kelvin
        m = 0.5 * (self.N - 2)
        base = A + B * (z * z + rp * rp) - 2.0 * self.center * z
        return instanton_constant(self.N) * self.scale**m * base ** (-m)

    def projected(self, z, rp) -> np.ndarray:
        return self.profile(z, rp) - self.correction(z, rp)

    def source(self, z, rp) -> np.ndarray:
        """profile**(2*-1), the critical part of -Laplace(profile)."""
        return self.profile(z, rp) ** (critical_exponent(self.N) - 1.0)

    def at_points(self, x) -> dict[str, np.ndarray]:
        """Profile, correction and projection at full points x (last axis N)."""
        x = np.asarray(x, dtype=float)
        z = x[..., 0]
        rp = np.linalg.norm(x[..., 1:], axis=-1)
        return {"profile": self.profile(z, rp), "correction": self.correction(z, rp), "projected": self.projected(z, rp)}


def project_hardy_bubble(p: HardyParams, sigma: float) -> ProjectedBubble:
    """Projection of the Hardy bubble V_sigma onto the unit ball."""
    if sigma <= 0:
        raise ValueError("nonpositive sigma")
    return ProjectedBubble("hardy", p.N, float(sigma), 0.0, p)


def project_standard_bubble(N: int, delta: float, xi) -> ProjectedBubble:
    """Projection of U_{delta, xi} onto the unit ball; ``xi`` must lie on the x1 axis."""
    if delta <= 0:
        raise ValueError("nonpositive delta")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.size == 1:
        t = float(xi[0])
    else:
        if xi.shape != (N,):
            raise ValueError(f"xi must have {N} coordinates")
        if np.any(xi[1:] != 0.0):
            raise NonReducibleError("the center must lie on the x1 axis")
        t = float(xi[0])
    if not abs(t) < 1.0:
        raise ValueError("xi must lie strictly inside the ball")
    return ProjectedBubble("standard", N, float(delta), t)


def poisson_extension(
    N: int,
    trace: Callable[[np.ndarray], np.ndarray],
    z: float,
    rp: float,
    q: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Harmonic extension into the ball of a boundary trace that depends on y1 only.

    ``trace`` receives ``cos(gamma) = y1`` on the unit sphere.  The Poisson
    integral is written in the polar angle ``gamma`` of y and the angle
    ``beta`` between the off-axis parts of x and y.
    """
    r2 = z * z + rp * rp
    if r2 >= 1.0:
        raise ValueError("evaluation point must lie inside the ball")
    prefactor = (1.0 - r2) / sphere_area(N)
    if rp == 0.0:

        def outer_axis(gamma: np.ndarray) -> np.ndarray:
            dist2 = r2 + 1.0 - 2.0 * z * np.cos(gamma)
            return trace(np.cos(gamma)) * np.sin(gamma) ** (N - 2) * dist2 ** (-0.5 * N)

        return prefactor * sphere_area(N - 1) * tanh_sinh(outer_axis, 0.0, math.pi, q, "poisson")

    inner_q = q.tightened(10.0)

    def outer(gamma: np.ndarray) -> np.ndarray:
        g = gamma[:, None]

        def inner(beta: np.ndarray) -> np.ndarray:
            dist2 = r2 + 1.0 - 2.0 * (z * np.cos(g) + rp * np.sin(g) * np.cos(beta[None, :]))
            return np.sin(beta[None, :]) ** (N - 3) * dist2 ** (-0.5 * N)

        return trace(np.cos(gamma)) * np.sin(gamma) ** (N - 2) * np.atleast_1d(
            tanh_sinh(inner, 0.0, math.pi, inner_q, "poisson")
        )

    return prefactor * sphere_area(N - 2) * tanh_sinh(outer, 0.0, math.pi, q, "poisson")


# --------------------------------------------------------------------------
# Quadrature grids


def _gauss_panels(breaks: np.ndarray, nodes: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    x = (lo + half * (nodes[None, :] + 1.0)).ravel()
    w = (half * weights[None, :]).ravel()
    return x, w


@dataclass
class AxisymmetricGrid:
    """Composite Gauss-Legendre nodes for axisymmetric integrals over the unit ball.

    The ball is covered by polar grids about each center on the x1 axis, glued
    by the partition of unity ``w_c = 1 / sum_c' (|x-c|/|x-c'|)**(2p)``.  In
    each polar grid the radial panels grow geometrically from
    ``scale * 2**-depth`` and are clipped at the sphere.  ``weights`` include
    the measure ``|S^(N-2)| rho^(N-1) sin(theta)^(N-2)``.
    """

    N: int
    centers: Sequence[float]
    scales: Sequence[float]
    order: int = 24
    angular_order: int = 48
    depth: int = 12
    blend_power: int = 4
    z: np.ndarray = field(init=False)
    rp: np.ndarray = field(init=False)
    weights: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        gl_x, gl_w = np.polynomial.legendre.leggauss(self.order)
        th_x, th_w = np.polynomial.legendre.leggauss(self.angular_order)
        # Two angular panels keep the nodes dense near both axis directions.
        theta, theta_w = _gauss_panels(np.array([0.0, 0.5 * math.pi, math.pi]), th_x, th_w)
        centers = np.asarray(self.centers, dtype=float)
        ring = sphere_area(self.N - 1)
        zs, rps, ws = [], [], []
        for c, h in zip(centers, self.scales):
            # Distance from c to the unit sphere along direction theta.
            rho_max = -c * np.cos(theta) + np.sqrt(1.0 - (c * np.sin(theta)) ** 2)
            for th, tw, rmax in zip(theta, theta_w, rho_max):
                geo = h * 2.0 ** np.arange(-self.depth, 64)
                breaks = np.concatenate([[0.0], geo[geo < rmax], [rmax]])
                rho, rw = _gauss_panels(breaks, gl_x, gl_w)
                z = c + rho * math.cos(th)
                rp = rho * math.sin(th)
                w = ring * tw * rw * rho ** (self.N - 1) * math.sin(th) ** (self.N - 2)
                zs.append(z)
                rps.append(rp)
                ws.append(w * self._blend(c, centers, z, rp))
        self.z = np.concatenate(zs)
        self.rp = np.concatenate(rps)
        self.weights = np.concatenate(ws)

    def _blend(self, c: float, centers: np.ndarray, z: np.ndarray, rp: np.ndarray) -> np.ndarray:
        own = (z - c) ** 2 + rp**2
        total = np.zeros_like(z)
        with np.errstate(divide="ignore", over="ignore"):
            for other in centers:
                total += (own / ((z - other) ** 2 + rp**2)) ** self.blend_power
        return np.where(np.isfinite(total), 1.0 / total, 0.0)

    def integrate(self, values: np.ndarray) -> float:
        values = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise FloatingPointError("non-finite integrand on the quadrature grid")
        return math.fsum(values * self.weights)


def _exterior_integral(bubble: ProjectedBubble, power: float, order: int = 24, angular_order: int = 48) -> float:
    """Integral of profile**power over |x| > 1 with r = 1/u and u in graded panels."""
    N = bubble.N
    gl_x, gl_w = np.polynomial.legendre.leggauss(order)
    th_x, th_w = np.polynomial.legendre.leggauss(angular_order)
    theta, theta_w = _gauss_panels(np.array([0.0, 0.5 * math.pi, math.pi]), th_x, th_w)
    gap = max(1.0 - abs(bubble.center), 1e-3)
    breaks = 1.0 - np.concatenate([[1.0], gap * 2.0 ** np.arange(4, -10, -1, dtype=float), [0.0]])
    breaks = np.unique(np.clip(breaks, 0.0, 1.0))
    u, uw = _gauss_panels(breaks, gl_x, gl_w)
    r = 1.0 / u
    U, TH = np.meshgrid(r, theta, indexing="ij")
    W = np.outer(uw * u ** (-N - 1), theta_w * np.sin(theta) ** (N - 2)) * sphere_area(N - 1)
    values = bubble.profile(U * np.cos(TH), U * np.sin(TH)) ** power
    return math.fsum((values * W).ravel())


# --------------------------------------------------------------------------
# Configurations and energy


@dataclass(frozen=True)
class BubbleAtom:
    kind: Literal["standard", "hardy"]
    sign: int
    scale: float
    center: float = 0.0

    def __post_init__(self) -> None:
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        if self.scale <= 0:
            raise ValueError("scales must be positive")
        if self.kind == "hardy" and self.center != 0.0:
            raise NonReducibleError("the Hardy bubble sits at the origin")


@dataclass(frozen=True)
class Configuration:
    """Signed projected bubbles with Hardy strength ``mu`` and subcritical shift ``eps``."""

    N: int
    atoms: tuple[BubbleAtom, ...]
    mu: float = 0.0
    eps: float = 0.0

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ValueError("empty configuration")
        if not 0.0 <= self.eps < 0.5:
            raise ValueError("eps must lie in [0, 0.5)")
        for atom in self.atoms:
            if not abs(atom.center) < 1.0:
                raise ValueError("centers must lie inside the ball")

    @classmethod
    def from_points(cls, N: int, atoms: Sequence[tuple[str, int, float, Sequence[float]]], mu=0.0, eps=0.0):
        """Build from full center points; raises NonReducibleError unless all lie on the x1 axis."""
        built = []
        for kind, sign, scale, point in atoms:
            point = np.asarray(point, dtype=float)
            if point.shape != (N,):
                raise ValueError(f"centers must have {N} coordinates")
            if np.any(point[1:] != 0.0):
                raise NonReducibleError("all centers must lie on one axis")
            built.append(BubbleAtom(kind, sign, scale, float(point[0])))
        return cls(N, tuple(built), mu, eps)

    def bubbles(self) -> list[ProjectedBubble]:
        hardy = hardy_params(self.N, self.mu)
        out = []
        for atom in self.atoms:
            if atom.kind == "hardy":
                out.append(project_hardy_bubble(hardy, atom.scale))
            else:
                out.append(project_standard_bubble(self.N, atom.scale, atom.center))
        return out

    def grid(self, **options) -> AxisymmetricGrid:
        centers: dict[float, float] = {0.0: 0.1}
        for atom in self.atoms:
            centers[atom.center] = min(centers.get(atom.center, atom.scale), atom.scale)
        keys = sorted(centers)
        return AxisymmetricGrid(self.N, keys, [centers[c] for c in keys], **options)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Parts of J_eps for a configuration.

    ``quadratic`` is half the Dirichlet-minus-Hardy form, ``critical`` is
    ``-(1/2*) int |u|^2*``, ``subcritical`` is
    ``(1/2*) int |u|^2* - 1/(2*-eps) int |u|^(2*-eps)``.  ``interactions`` is the
    symmetric matrix of the bilinear form on the unsigned projected bubbles,
    ``deficits`` the diagonal shortfalls against the whole-space energies and
    ``asymmetry`` the largest relative gap between the two by-parts orders of an
    off-diagonal entry (a quadrature accuracy diagnostic).
    """

    quadratic: float
    critical: float
    subcritical: float
    total: float
    interactions: np.ndarray
    deficits: np.ndarray
    asymmetry: float


def _hardy_weight(grid: AxisymmetricGrid) -> np.ndarray:
    return 1.0 / (grid.z**2 + grid.rp**2)


def _deficit(bubble: ProjectedBubble, grid: AxisymmetricGrid, mu: float) -> float:
    """Whole-space energy minus the by-parts quadratic form of the projected bubble."""
    two_star = critical_exponent(bubble.N)
    outside = _exterior_integral(bubble, two_star)
    z, rp = grid.z, grid.rp
    if bubble.kind == "standard":
        return math.fsum([outside, grid.integrate(bubble.source(z, rp) * bubble.correction(z, rp))])
    c = bubble.boundary_constant
    inside = grid.integrate(bubble.source(z, rp))
    coupling = grid.integrate(bubble.projected(z, rp) * _hardy_weight(grid))
    return math.fsum([outside, c * inside, -mu * c * coupling])


def _whole_space_energy(bubble: ProjectedBubble, q: QuadratureSpec) -> float:
    if bubble.kind == "hardy":
        return hardy_profile_integrals(bubble.hardy, q).int_V_2star
    return instanton_integrals(bubble.N, q).int_U_2star


def _by_parts(a: ProjectedBubble, b: ProjectedBubble, grid: AxisymmetricGrid, mu: float) -> float:
    """int grad Pa . grad Pb - mu int Pa Pb/|x|^2 with the Laplacian moved onto a."""
    z, rp = grid.z, grid.rp
    pb = b.projected(z, rp)
    hardy_part = (a.profile(z, rp) if a.kind == "hardy" else 0.0) - a.projected(z, rp)
    return math.fsum([grid.integrate(a.source(z, rp) * pb), mu * grid.integrate(hardy_part * pb * _hardy_weight(grid))])


def energy_functional(
    config: Configuration,
    q: QuadratureSpec = DEFAULT_SPEC,
    grid: AxisymmetricGrid | None = None,
) -> EnergyBreakdown:
    """J_eps of the signed sum of projected bubbles, split into its three parts."""
    grid = grid or config.grid()
    bubbles = config.bubbles()
    signs = np.array([atom.sign for atom in config.atoms], dtype=float)
    n = len(bubbles)
    mu = config.mu
    Q = np.empty((n, n))
    deficits = np.empty(n)
    asymmetry = 0.0
    weight = _hardy_weight(grid)
    for a, bub in enumerate(bubbles):
        deficits[a] = _deficit(bub, grid, mu)
        Q[a, a] = _whole_space_energy(bub, q) - deficits[a]
        if bub.kind == "standard" and mu != 0.0:
            Q[a, a] -= mu * grid.integrate(bub.projected(grid.z, grid.rp) ** 2 * weight)
        for b in range(a):
            forward = _by_parts(bub, bubbles[b], grid, mu)
            backward = _by_parts(bubbles[b], bub, grid, mu)
            Q[a, b] = Q[b, a] = 0.5 * (forward + backward)
            scale = max(abs(forward), abs(backward), 1e-300)
            asymmetry = max(asymmetry, abs(forward - backward) / scale)
    u = sum(s * bub.projected(grid.z, grid.rp) for s, bub in zip(signs, bubbles))
    two_star = critical_exponent(config.N)
    abs_u = np.abs(u)
    norm_crit = grid.integrate(abs_u**two_star)
    norm_sub = grid.integrate(abs_u ** (two_star - config.eps))
    quadratic = 0.5 * float(signs @ Q @ signs)
    critical = -norm_crit / two_star
    subcritical = norm_crit / two_star - norm_sub / (two_star - config.eps)
    return EnergyBreakdown(
        quadratic=quadratic,
        critical=critical,
        subcritical=subcritical,
        total=math.fsum([quadratic, critical, subcritical]),
        interactions=Q,
        deficits=deficits,
        asymmetry=asymmetry,
    )


def single_bubble_deficit(
    N: int,
    kind: Literal["standard", "hardy"],
    scale: float,
    center: float = 0.0,
    mu: float = 0.0,
) -> float:
    """Whole-space energy minus the quadratic form of one projected bubble."""
    config = Configuration(N, (BubbleAtom(kind, 1, scale, center),), mu=mu)
    (bubble,) = config.bubbles()
    return _deficit(bubble, config.grid(), mu)


def pair_interaction(N: int, delta: float, t: float) -> dict[str, float]:
    """int grad PU1 . grad PU2 for equal bubbles at +t and -t on the axis (mu = 0)."""
    config = Configuration(N, (BubbleAtom("standard", 1, delta, t), BubbleAtom("standard", 1, delta, -t)))
    grid = config.grid()
    b1, b2 = config.bubbles()
    forward = _by_parts(b1, b2, grid, 0.0)
    backward = _by_parts(b2, b1, grid, 0.0)
    return {"interaction": 0.5 * (forward + backward), "asymmetry": abs(forward - backward) / abs(forward)}


# --------------------------------------------------------------------------
# Expansion and coefficient fits


def expansion_prediction(consts: ExpansionConstants, psi_value: float, eps, alpha: float = 1.0):
    """Finite part of the energy expansion at ``eps`` for the given reduced value."""
    eps = np.asarray(eps, dtype=float)
    log_term = eps * np.log(eps)
    if consts.variant == "tower":
        value = consts.a1 + consts.a2 * eps - consts.a3 * log_term + psi_value * eps
    else:
        value = consts.a1 + consts.a2 * eps - consts.a3 * eps**alpha - consts.a4 * log_term + psi_value * eps
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class FitModel:
    """Basis for fitting J(eps).

    The default basis is ``{1, eps, eps ln eps, eps**alpha}`` (the last for the
    multipoint variant only; it is merged into ``eps`` when alpha = 1).
    Coefficients named in ``fixed`` (``"a1"``, ``"a3"``, ``"a4"``) are
    subtracted instead of fitted.  ``extra_powers`` adds ``eps**p`` columns for
    higher-order terms.
    """

    variant: Literal["multipoint", "tower"]
    alpha: float = 1.0
    fixed: tuple[str, ...] = ()
    extra_powers: tuple[float, ...] = ()


@dataclass(frozen=True)
class FitResult:
    coefficients: dict[str, float]
    psi_estimate: float
    residual: float
    merged_alpha: bool


def coefficient_extraction(
    pairs: Sequence[tuple[float, float]],
    model: FitModel,
    consts: ExpansionConstants,
) -> FitResult:
    """Least-squares fit of (eps, J) pairs; the reduced value is the eps coefficient minus a2."""
    eps = np.array([p[0] for p in pairs], dtype=float)
    values = np.array([p[1] for p in pairs], dtype=float)
    if np.any(eps <= 0):
        raise ValueError("eps values must be positive")
    log_term = eps * np.log(eps)
    known = {"a1": consts.a1, "a3": consts.a3, "a4": consts.a4}
    target = values.copy()
    columns: dict[str, np.ndarray] = {}
    log_name = "a3" if model.variant == "tower" else "a4"
    if "a1" in model.fixed:
        target -= consts.a1
    else:
        columns["a1"] = np.ones_like(eps)
    columns["eps"] = eps
    if log_name in model.fixed:
        target += known[log_name] * log_term
    else:
        columns[log_name] = -log_term
    merged = False
    if model.variant == "multipoint":
        if model.alpha == 1.0:
            merged = True
        elif "a3" in model.fixed:
            target += consts.a3 * eps**model.alpha
        else:
            columns["a3"] = -(eps**model.alpha)
    for p in model.extra_powers:
        columns[f"eps^{p:g}"] = eps**p
    names = list(columns)
    design = np.column_stack([columns[n] for n in names])
    if len(eps) < len(names):
        raise np.linalg.LinAlgError("rank-deficient design: fewer eps values than basis functions")
    norms = np.linalg.norm(design, axis=0)
    scaled = design / norms
    if np.linalg.matrix_rank(scaled, tol=1e-10) < len(names):
        raise np.linalg.LinAlgError("rank-deficient design: collinear basis for these eps values")
    coef, *_ = np.linalg.lstsq(scaled, target, rcond=None)
    coef = coef / norms
    fitted = dict(zip(names, (float(c) for c in coef)))
    residual = float(np.max(np.abs(design @ coef - target))) if len(eps) > len(names) else 0.0
    psi = fitted["eps"] - consts.a2
    if merged:
        # With alpha = 1 the eps**alpha term shares the eps column: eps coefficient = a2 - a3 + psi.
        psi += consts.a3
    return FitResult(coefficients=fitted, psi_estimate=psi, residual=residual, merged_alpha=merged)


def fit_leading_coefficient(scales: Sequence[float], values: Sequence[float], power: float, corrections=(2.0,)) -> float:
    """Leading coefficient A in values = A s^power (1 + sum_j B_j s^corrections_j)."""
    s = np.asarray(scales, dtype=float)
    y = np.asarray(values, dtype=float) / s**power
    design = np.column_stack([np.ones_like(s)] + [s**c for c in corrections])
    if len(s) < design.shape[1]:
        raise np.linalg.LinAlgError("not enough scales for the requested corrections")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0])
