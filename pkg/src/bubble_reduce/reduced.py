"""Reduced energies of the multi-bubble and tower ansatz, with closed-form critical points.

Multi-point functions depend on the bubble scales ``lambda_1..lambda_k`` and
the Hardy scale ``lambda_bar`` (stored last).  With ``m = (N-2)/2`` and
``u_a = lambda_a**m`` they read

    psi = b1 * u^T M u - b2 * sum(ln u_a),

where ``M`` holds the Robin values on the diagonal and ``-s_a s_b G(a, b)``
off the diagonal (``s`` are the bubble signs, the Hardy atom sits at the
origin).  Tower functions depend on the scales and on the translation
parameters ``zeta_i`` through the kernels ``h1`` and ``h2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np

from .critical import (
    NewtonResult,
    classify_hessian,
    find_roots,
    newton_nd,
    refine_root,
)
from .geometry import (
    BallDomain,
    GreenProvider,
    axis_point,
    gamma_tau,
    phi_axis,
    phi_axis_prime,
    placement,
)
from .integrals import (
    ExpansionConstants,
    inverse_quartic_moment,
    tower_h1,
    tower_h2,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec

__all__ = [
    "SignPattern",
    "ReducedPoint",
    "CriticalPoint",
    "WindowError",
    "interaction_matrix",
    "psi_multipoint",
    "grad_hess_psi",
    "stationarity_newton",
    "axis_bubble_profile",
    "axis_bubble_critical_t",
    "polygon_profile",
    "polygon_window",
    "iota1",
    "minimal_iota1_dimension",
    "square_iota2",
    "gamma2_root",
    "square_t_margin",
    "alternating_square_profile",
    "alternating_square_windows",
    "alternating_square_newton",
    "iota3",
    "iota3_terms",
    "tower_psi",
    "tower_psi_kernels",
    "tower_grad_hess",
    "tower_psi_hat",
    "tower_critical",
    "gi_hessian_at_zero",
    "gi_hessian_claimed",
    "gi_hessian_fd",
]

WINDOW_MARGIN = 1e-9


class WindowError(ValueError):
    """A profile was queried outside the t-window where its scales are real and positive."""


# --------------------------------------------------------------------------
# Sign patterns and points


@dataclass(frozen=True)
class SignPattern:
    regime: Literal["hardy_and_bubble", "negative_satellites", "alternating", "tower"]
    hardy_sign: int
    bubble_signs: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.bubble_signs)

    @classmethod
    def hardy_and_bubble(cls) -> "SignPattern":
        return cls("hardy_and_bubble", 1, (-1,))

    @classmethod
    def negative_satellites(cls, k: int) -> "SignPattern":
        return cls("negative_satellites", 1, (-1,) * k)

    @classmethod
    def alternating(cls, k: int = 4) -> "SignPattern":
        return cls("alternating", 1, tuple((-1) ** i for i in range(1, k + 1)))

    @classmethod
    def tower(cls, k: int) -> "SignPattern":
        return cls("tower", (-1) ** k, tuple((-1) ** (i - 1) for i in range(1, k + 1)))


@dataclass(frozen=True)
class ReducedPoint:
    """Scales (lambda_1..lambda_k, lambda_bar) and the centers or tower translations."""

    lambdas: np.ndarray
    centers: np.ndarray
    regime: str = "multipoint"

    def __post_init__(self) -> None:
        if np.any(np.asarray(self.lambdas) <= 0):
            raise ValueError("all scales must be positive")


@dataclass(frozen=True)
class CriticalPoint:
    point: ReducedPoint
    value: float
    grad_norm: float
    hessian_eigs: np.ndarray
    classification: str


# --------------------------------------------------------------------------
# Multi-point reduced function


def interaction_matrix(pattern: SignPattern, centers, domain: GreenProvider) -> np.ndarray:
    """Symmetric matrix M of the quadratic part; the Hardy atom is the last index."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    k = pattern.k
    if centers.shape[0] != k:
        raise ValueError(f"pattern has {k} bubbles but {centers.shape[0]} centers were given")
    origin = np.zeros(domain.N)
    signs = list(pattern.bubble_signs) + [pattern.hardy_sign]
    points = list(centers) + [origin]
    M = np.empty((k + 1, k + 1))
    for a in range(k + 1):
        M[a, a] = domain.regular_part(points[a], points[a])
        for b in range(a + 1, k + 1):
            M[a, b] = M[b, a] = -signs[a] * signs[b] * domain.green(points[a], points[b])
    return M


def _check_multipoint(pattern: SignPattern, consts: ExpansionConstants) -> None:
    if pattern.regime == "tower":
        raise ValueError("tower pattern passed to a multi-point function")
    if consts.variant != "multipoint":
        raise ValueError("multi-point functions need multipoint constants")


def psi_multipoint(
    N: int,
    pattern: SignPattern,
    point: ReducedPoint,
    consts: ExpansionConstants,
    domain: GreenProvider | None = None,
) -> float:
    """Value of the multi-point reduced function at ``point``."""
    _check_multipoint(pattern, consts)
    domain = domain or BallDomain(N)
    M = interaction_matrix(pattern, point.centers, domain)
    u = np.asarray(point.lambdas, dtype=float) ** (0.5 * (N - 2))
    return float(consts.b1 * u @ M @ u - consts.b2 * np.sum(np.log(u)))


def _grad_hess_from_matrix(N: int, M: np.ndarray, lambdas, b1: float, b2: float):
    m = 0.5 * (N - 2)
    lam = np.asarray(lambdas, dtype=float)
    u = lam**m
    Mu = M @ u
    bracket = 2.0 * b1 * u * Mu
    grad = m / lam * (bracket - b2)
    hess = 2.0 * b1 * m * m * M * np.outer(u / lam, u / lam)
    hess[np.diag_indices_from(hess)] += (m * (m - 1.0) * bracket + m * b2) / lam**2
    return grad, hess


def grad_hess_psi(
    N: int,
    pattern: SignPattern,
    point: ReducedPoint,
    consts: ExpansionConstants,
    domain: GreenProvider | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient and Hessian of the multi-point function in all scales."""
    _check_multipoint(pattern, consts)
    domain = domain or BallDomain(N)
    M = interaction_matrix(pattern, point.centers, domain)
    return _grad_hess_from_matrix(N, M, point.lambdas, consts.b1, consts.b2)


def stationarity_newton(
    N: int,
    pattern: SignPattern,
    centers,
    consts: ExpansionConstants,
    lambda0,
    tol: float = 1e-13,
    domain: GreenProvider | None = None,
) -> NewtonResult:
    """Solve grad psi = 0 in the scales by Newton's method.

    The equations are scaled to ``lambda_a dpsi/dlambda_a / (m b2)``, i.e.
    ``(2 b1/b2) u_a (M u)_a - 1 = 0``, which is dimensionless.
    """
    _check_multipoint(pattern, consts)
    domain = domain or BallDomain(N)
    M = interaction_matrix(pattern, centers, domain)
    m = 0.5 * (N - 2)
    scale = m * consts.b2

    def F(lam: np.ndarray) -> np.ndarray:
        if np.any(lam <= 0):
            return np.full_like(lam, np.inf)
        grad, _ = _grad_hess_from_matrix(N, M, lam, consts.b1, consts.b2)
        return lam * grad / scale

    def J(lam: np.ndarray) -> np.ndarray:
        grad, hess = _grad_hess_from_matrix(N, M, lam, consts.b1, consts.b2)
        return (np.diag(grad) + lam[:, None] * hess) / scale

    return newton_nd(F, J, np.asarray(lambda0, dtype=float), tol=tol)


def _restricted_hessian(hess: np.ndarray, groups: Sequence[Sequence[int]]) -> np.ndarray:
    """Hessian of psi restricted to the subspace where each group of scales is equal."""
    J = np.zeros((hess.shape[0], len(groups)))
    for col, group in enumerate(groups):
        J[list(group), col] = 1.0
    return J.T @ hess @ J


def _scale_from_power(power: float, N: int) -> float:
    """lambda from lambda**(N-2) = power."""
    return power ** (1.0 / (N - 2))


# --------------------------------------------------------------------------
# One bubble plus the Hardy bubble on the axis


@dataclass(frozen=True)
class AxisBubbleProfile:
    t: float
    lambda1: float
    lambda_bar: float
    phi: float
    nu: float
    nu_formula: float
    nu_prime: float
    nu_prime_envelope: float
    hess_eigs: np.ndarray
    classification: str


def axis_bubble_profile(N: int, t: float, consts: ExpansionConstants) -> AxisBubbleProfile:
    """Critical scales of the one-bubble function on the axis point (t, 0, ..., 0) and nu(t).

    ``nu`` is the reduced function evaluated at the critical scales,
    ``nu_formula`` its closed form ``b2 - b2 ln(b2/(2 b1)) + b2 ln phi(t)``;
    ``nu_prime`` is ``b2 phi'/phi`` and ``nu_prime_envelope`` the partial
    t-derivative of the reduced function at the frozen critical scales.
    """
    if not 0.0 < t < 1.0:
        raise WindowError("t must lie in (0, 1)")
    b1, b2 = consts.b1, consts.b2
    c = b2 / (2.0 * b1)
    robin = (1.0 - t * t) ** (2 - N)
    green0 = t ** (2 - N) - 1.0
    root = math.sqrt(robin)
    u2 = c / (robin + green0 * root)
    v2 = c / (1.0 + green0 / root)
    lam1, lam_bar = _scale_from_power(u2, N), _scale_from_power(v2, N)
    pattern = SignPattern.hardy_and_bubble()
    point = ReducedPoint(np.array([lam1, lam_bar]), axis_point(N, t)[None, :])
    nu = psi_multipoint(N, pattern, point, consts)
    phi = phi_axis(N, t)
    nu_formula = b2 - b2 * math.log(c) + b2 * math.log(phi)
    d_robin = 2.0 * (N - 2) * t * (1.0 - t * t) ** (1 - N)
    d_green0 = (2 - N) * t ** (1 - N)
    envelope = b1 * (d_robin * u2 + 2.0 * d_green0 * math.sqrt(u2 * v2))
    _, hess = grad_hess_psi(N, pattern, point, consts)
    cls = classify_hessian(hess)
    return AxisBubbleProfile(
        t=t,
        lambda1=lam1,
        lambda_bar=lam_bar,
        phi=phi,
        nu=nu,
        nu_formula=nu_formula,
        nu_prime=b2 * phi_axis_prime(N, t) / phi,
        nu_prime_envelope=envelope,
        hess_eigs=cls.eigenvalues,
        classification=cls.classification,
    )


def axis_bubble_critical_t(N: int, consts: ExpansionConstants, grid_points: int = 4096) -> dict[str, float]:
    """Root of nu' (from the envelope derivative) and the minimiser of phi (root of phi')."""
    lo, hi = 1e-3, 1.0 - 1e-3
    envelope = find_roots(
        lambda t: np.vectorize(lambda s: axis_bubble_profile(N, s, consts).nu_prime_envelope)(t),
        (lo, hi),
        grid_points=min(grid_points, 512),
        label="nu_prime",
    )
    phi_min = find_roots(lambda t: phi_axis_prime(N, t), (lo, hi), grid_points, label="phi_prime")
    if envelope.sign_changes != 1 or phi_min.sign_changes != 1:
        raise ValueError("expected exactly one critical t on the axis")
    return {"nu_prime_root": envelope.roots[0].root, "phi_minimizer": phi_min.roots[0].root}


# --------------------------------------------------------------------------
# Negative satellites on a regular polygon


def _alpha(linear: np.ndarray | float, constant: np.ndarray | float) -> np.ndarray | float:
    """Positive root of a**2 + linear*a - constant = 0 for linear > 0, constant >= 0 (overflow-safe)."""
    linear = np.asarray(linear, dtype=float)
    constant = np.asarray(constant, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        half = 0.5 * linear
        root = np.where(
            half > 1e100,
            half * np.sqrt(1.0 + constant / (half * half)),
            np.sqrt(half * half + constant),
        )
        alpha = constant / (half + root)
    return float(alpha) if alpha.ndim == 0 else alpha


@lru_cache(maxsize=512)
def polygon_window(N: int, k: int) -> float:
    """Left end of the admissible window: root of gamma1 (k = 3) or gamma3 (k = 2)."""
    key = {3: "gamma1", 2: "gamma3"}.get(k)
    if key is None:
        raise ValueError("k must be 2 or 3")

    def f(t):
        return getattr(gamma_tau(N, t), key)

    return refine_root(f, (1e-3, 1.0 - 1e-3), rel_tol=1e-15).root


def iota1(N: int, t):
    """iota1 = gamma1' + 2 alpha2 tau1' with alpha2 the positive root of a^2 + 2 tau1 a - gamma1."""
    g = gamma_tau(N, t)
    with np.errstate(invalid="ignore", over="ignore"):
        return g.d_gamma1 + 2.0 * _alpha(2.0 * g.tau1, g.gamma1) * g.d_tau1


@dataclass(frozen=True)
class PolygonProfile:
    k: int
    t: float
    t_star: float
    alpha: float
    beta: float
    lambda1: float
    lambda_bar: float
    nu: float
    nu_direct: float
    nu_prime: float
    iota: float
    hess_eigs: np.ndarray
    classification: str


def polygon_profile(N: int, k: int, t: float, consts: ExpansionConstants) -> PolygonProfile:
    """Equal-scale critical point of k negative bubbles on a regular k-gon of radius t.

    For k = 3: ``a = lambda_bar**m / lambda1**m`` is the positive root of
    ``a^2 + 2 tau1 a - gamma1``, ``lambda1**(N-2) = (b2/2b1) / (gamma1 + tau1 a)``
    and ``nu' = 3 b1 iota1 lambda1**(N-2)``.  For k = 2 the same holds with
    ``gamma3``, linear coefficient ``tau1`` and ``nu' = 2 b1 lambda1**(N-2) iota``.
    The Hessian is that of psi restricted to equal bubble scales.
    """
    t_star = polygon_window(N, k)
    if not (t_star + WINDOW_MARGIN <= t < 1.0):
        raise WindowError(f"t={t} outside the admissible window ({t_star}, 1)")
    b1, b2 = consts.b1, consts.b2
    c = b2 / (2.0 * b1)
    g = gamma_tau(N, t)
    if k == 3:
        gamma, d_gamma, linear = g.gamma1, g.d_gamma1, 2.0 * g.tau1
    else:
        gamma, d_gamma, linear = g.gamma3, g.d_gamma3, g.tau1
    alpha = _alpha(linear, gamma)
    beta = gamma + g.tau1 * alpha
    u2 = c / beta
    v2 = alpha * alpha * u2
    lam1, lam_bar = _scale_from_power(u2, N), _scale_from_power(v2, N)
    iota = d_gamma + 2.0 * alpha * g.d_tau1
    nu = (k + 1) / 2.0 * b2 - b2 * math.log(u2 ** (k / 2.0) * math.sqrt(v2))
    pattern = SignPattern.negative_satellites(k)
    point = ReducedPoint(np.array([lam1] * k + [lam_bar]), placement(k, t, N).centers)
    nu_direct = psi_multipoint(N, pattern, point, consts)
    _, hess = grad_hess_psi(N, pattern, point, consts)
    restricted = _restricted_hessian(hess, [list(range(k)), [k]])
    cls = classify_hessian(restricted)
    return PolygonProfile(
        k=k,
        t=t,
        t_star=t_star,
        alpha=alpha,
        beta=beta,
        lambda1=lam1,
        lambda_bar=lam_bar,
        nu=nu,
        nu_direct=nu_direct,
        nu_prime=(3.0 if k == 3 else 2.0) * b1 * iota * u2,
        iota=iota,
        hess_eigs=cls.eigenvalues,
        classification=cls.classification,
    )


def minimal_iota1_dimension(N_max: int = 60, N_min: int = 7) -> int | None:
    """Smallest N0 with iota1(1/2) < 0 for every N in [N0, N_max], or None."""
    negative = [iota1(N, 0.5) < 0.0 for N in range(N_min, N_max + 1)]
    N0 = None
    for N, neg in zip(range(N_max, N_min - 1, -1), reversed(negative)):
        if not neg:
            break
        N0 = N
    return N0


# --------------------------------------------------------------------------
# Four negative satellites on the square


@lru_cache(maxsize=512)
def gamma2_root(N: int) -> float:
    """Root t* of gamma2 in (0, 1)."""
    return refine_root(lambda t: gamma_tau(N, t).gamma2, (1e-3, 1.0 - 1e-3), rel_tol=1e-15).root


def square_t_margin(N: int, t):
    """(T^N + 3T)(1 - t^(N-2))^2 - 1 with T = t^2/(1 - t^2)."""
    t = np.asarray(t, dtype=float)
    T = t * t / (1.0 - t * t)
    value = (T**N + 3.0 * T) * (1.0 - t ** (N - 2)) ** 2 - 1.0
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class SquareIota2:
    t: np.ndarray | float
    gamma2: np.ndarray | float
    alpha3_t: np.ndarray | float
    iota2: np.ndarray | float


def square_iota2(N: int, t) -> SquareIota2:
    """gamma2, alpha3 (positive root of a^2 + 3 tau1 a - gamma2) and iota2 = gamma2' + 2 alpha3 tau1'."""
    g = gamma_tau(N, t)
    if np.any(np.asarray(g.gamma2) < 0):
        raise WindowError("gamma2 < 0: alpha3 would need a negative discriminant branch")
    alpha3 = _alpha(3.0 * g.tau1, g.gamma2)
    return SquareIota2(t=g.t, gamma2=g.gamma2, alpha3_t=alpha3, iota2=g.d_gamma2 + 2.0 * alpha3 * g.d_tau1)


# --------------------------------------------------------------------------
# Alternating signs on the square


@lru_cache(maxsize=512)
def alternating_square_windows(N: int) -> tuple[float, float]:
    """(t1*, t2*): root of gamma3 in (0, 1/2) and root of gamma3 - 2 tau1^2 in (1/2, 1)."""
    t1 = refine_root(lambda t: gamma_tau(N, t).gamma3, (1e-3, 0.5), rel_tol=1e-15).root

    def second(t):
        g = gamma_tau(N, t)
        return g.gamma3 - 2.0 * g.tau1**2

    t2 = refine_root(second, (0.5, 1.0 - 1e-3), rel_tol=1e-15).root
    return t1, t2


def iota3_terms(N: int, t) -> tuple:
    """The three summands of :func:`iota3`; their absolute sum sets the scale of its round-off."""
    g = gamma_tau(N, t)
    g3, g4, tau = g.gamma3, g.gamma4, g.tau1
    return (
        g.d_gamma3 * (2.0 * g3 * (g3 - 2.0 * tau**2) + tau**2 * (g3 + 2.0 * g4)),
        -2.0 * g.d_tau1 * tau * g3 * (g3 + 2.0 * g4),
        4.0 * g.d_gamma4 * g3 * (g3 - 2.0 * tau**2),
    )


def iota3(N: int, t):
    """Factor whose sign is the sign of nu2'(t) in the admissible window."""
    first, second, third = iota3_terms(N, t)
    return first + second + third


@dataclass(frozen=True)
class AlternatingSquareProfile:
    t: float
    t1_star: float
    t2_star: float
    X: float
    Y: float
    Z: float
    lambda1: float
    lambda2: float
    lambda_bar: float
    residuals: np.ndarray
    nu2: float
    nu2_direct: float
    nu2_prime: float
    iota3: float
    printed_matrix: np.ndarray
    det_sign: int
    hessian_det_sign: int
    gamma3: float


def _square_check(N: int, t: float) -> tuple[float, float]:
    t1, t2 = alternating_square_windows(N)
    inside = (0.0 < t <= t1 - WINDOW_MARGIN) or (t2 + WINDOW_MARGIN <= t < 1.0)
    if not inside:
        raise WindowError(f"t={t} lies in the excluded band [{t1}, {t2}]")
    return t1, t2


def _square_residuals(g, c: float, X: float, Y: float, Z: float) -> np.ndarray:
    tau, g3, g4 = g.tau1, g.gamma3, g.gamma4
    return np.array(
        [
            (X * X + 2.0 * tau * (Y - Z) * X) / c - 1.0,
            (g3 * Y * Y + tau * Y * X + 2.0 * g4 * Y * Z) / c - 1.0,
            (g3 * Z * Z - tau * Z * X + 2.0 * g4 * Y * Z) / c - 1.0,
        ]
    )


def alternating_square_profile(N: int, t: float, consts: ExpansionConstants) -> AlternatingSquareProfile:
    """Closed-form critical scales for alternating bubbles on the square at radius t.

    With ``X = lambda_bar**m``, ``Y = lambda1**m``, ``Z = lambda2**m`` and
    ``c = b2/(2 b1)``: ``X^2 = gamma3 c/(gamma3 - 2 tau1^2)``,
    ``Y Z = c/(gamma3 + 2 gamma4)`` and ``Z - Y = (tau1/gamma3) X``.
    ``det_sign`` is the sign of the determinant of the simplified 3x3 matrix
    whose nondegeneracy is equivalent to that of the Hessian;
    ``hessian_det_sign`` is the sign of the true Hessian determinant.
    """
    t1, t2 = _square_check(N, t)
    b1, b2 = consts.b1, consts.b2
    c = b2 / (2.0 * b1)
    g = gamma_tau(N, t)
    tau, g3, g4 = g.tau1, g.gamma3, g.gamma4
    X2 = g3 * c / (g3 - 2.0 * tau * tau)
    P = c / (g3 + 2.0 * g4)
    if X2 <= 0 or P <= 0:
        raise WindowError(f"nonpositive scale recovery at t={t}")
    X = math.sqrt(X2)
    d = tau * X / g3
    Y = 0.5 * (-d + math.sqrt(d * d + 4.0 * P))
    Z = Y + d
    if Y <= 0 or Z <= 0:
        raise WindowError(f"nonpositive scale recovery at t={t}")
    lam1, lam2, lam_bar = (_scale_from_power(s * s, N) for s in (Y, Z, X))
    residuals = _square_residuals(g, c, X, Y, Z)

    nu2 = b1 * (X2 + 2.0 * g3 * (Y * Y + Z * Z) + 4.0 * tau * (Y - Z) * X + 8.0 * g4 * Y * Z) - b2 * (
        2.0 * math.log(Y) + 2.0 * math.log(Z) + math.log(X)
    )
    pattern = SignPattern.alternating(4)
    point = ReducedPoint(np.array([lam1, lam2, lam1, lam2, lam_bar]), placement(4, t, N).centers)
    nu2_direct = psi_multipoint(N, pattern, point, consts)
    nu2_prime = 2.0 * b1 * (
        g.d_gamma3 * (Y * Y + Z * Z) + 2.0 * g.d_tau1 * (Y - Z) * X + 4.0 * g.d_gamma4 * Y * Z
    )

    e_small, e_large = 2.0 / (N - 2), (N - 4.0) / (N - 2)
    printed = np.array(
        [
            [X / 2.0 + c / (2.0 * X), tau * Y**e_small * X**e_large, -tau * Z**e_small * X**e_large],
            [tau * Y**e_large * X**e_small, g3 * Y + c / Y, 2.0 * g4 * Y**e_large * Z**e_small],
            [-tau * Z**e_large * X**e_small, 2.0 * g4 * Y**e_small * Z**e_large, g3 * Z + c / Z],
        ]
    )
    _, hess = grad_hess_psi(N, pattern, point, consts)
    reduced = _restricted_hessian(hess, [[4], [0, 2], [1, 3]])
    return AlternatingSquareProfile(
        t=t,
        t1_star=t1,
        t2_star=t2,
        X=X,
        Y=Y,
        Z=Z,
        lambda1=lam1,
        lambda2=lam2,
        lambda_bar=lam_bar,
        residuals=residuals,
        nu2=nu2,
        nu2_direct=nu2_direct,
        nu2_prime=nu2_prime,
        iota3=float(iota3(N, t)),
        printed_matrix=printed,
        det_sign=int(np.sign(np.linalg.det(printed))),
        hessian_det_sign=int(np.sign(np.linalg.det(reduced))),
        gamma3=g3,
    )


def alternating_square_newton(N: int, t: float, consts: ExpansionConstants, start) -> NewtonResult:
    """Newton solve of the three stationarity equations in (X, Y, Z) from ``start``."""
    _square_check(N, t)
    c = consts.b2 / (2.0 * consts.b1)
    g = gamma_tau(N, t)
    tau, g3, g4 = g.tau1, g.gamma3, g.gamma4

    def F(v: np.ndarray) -> np.ndarray:
        return _square_residuals(g, c, *v)

    def J(v: np.ndarray) -> np.ndarray:
        X, Y, Z = v
        return (
            np.array(
                [
                    [2.0 * X + 2.0 * tau * (Y - Z), 2.0 * tau * X, -2.0 * tau * X],
                    [tau * Y, 2.0 * g3 * Y + tau * X + 2.0 * g4 * Z, 2.0 * g4 * Y],
                    [-tau * Z, 2.0 * g4 * Z, 2.0 * g3 * Z - tau * X + 2.0 * g4 * Y],
                ]
            )
            / c
        )

    return newton_nd(F, J, np.asarray(start, dtype=float), tol=1e-13)


# --------------------------------------------------------------------------
# Bubble tower


def _check_tower(k: int, consts: ExpansionConstants) -> None:
    if k < 0:
        raise ValueError("k must be nonnegative")
    if consts.variant != "tower":
        raise ValueError("tower functions need tower constants")


def _zeta_norms(k: int, zetas) -> np.ndarray:
    if k == 0:
        return np.zeros(0)
    zetas = np.atleast_2d(np.asarray(zetas, dtype=float))
    if zetas.shape[0] != k:
        raise ValueError(f"expected {k} translation vectors")
    return np.linalg.norm(zetas, axis=-1)


def _tower_kernels(N: int, rhos: np.ndarray, q: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    h1 = np.array([tower_h1(N, float(r), q) for r in rhos])
    h2 = np.array([tower_h2(N, float(r), q) for r in rhos])
    return h1, h2


def tower_psi(
    N: int,
    k: int,
    lambdas,
    zetas,
    consts: ExpansionConstants,
    q: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Tower reduced function; ``lambdas`` = (lambda_1, ..., lambda_k, lambda_bar)."""
    _check_tower(k, consts)
    h1, h2 = _tower_kernels(N, _zeta_norms(k, zetas), q)
    return tower_psi_kernels(N, k, lambdas, h1, h2, consts)


def tower_psi_kernels(N: int, k: int, lambdas, h1_values, h2_values, consts: ExpansionConstants) -> float:
    """Tower reduced function at given kernel values h1(zeta_i), h2(zeta_i)."""
    _check_tower(k, consts)
    lam = np.asarray(lambdas, dtype=float)
    if lam.shape != (k + 1,) or np.any(lam <= 0):
        raise ValueError("need k+1 positive scales")
    h1 = np.asarray(h1_values, dtype=float)
    h2 = np.asarray(h2_values, dtype=float)
    m = 0.5 * (N - 2)
    ratios = (lam[1:] / lam[:-1]) ** m
    return float(
        consts.b1 * lam[0] ** (N - 2)
        + consts.b2 * np.sum(ratios * h1)
        - consts.b3 * np.sum(h2)
        - consts.b4 * m * np.sum(np.log(lam))
    )


def tower_grad_hess(
    N: int, k: int, lambdas, h1_values, consts: ExpansionConstants
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient and Hessian of the tower function in the scales at fixed kernels."""
    _check_tower(k, consts)
    lam = np.asarray(lambdas, dtype=float)
    h1 = np.asarray(h1_values, dtype=float)
    m = 0.5 * (N - 2)
    grad = -consts.b4 * m / lam
    hess = np.diag(consts.b4 * m / lam**2)
    grad[0] += 2.0 * m * consts.b1 * lam[0] ** (2.0 * m - 1.0)
    hess[0, 0] += 2.0 * m * (2.0 * m - 1.0) * consts.b1 * lam[0] ** (2.0 * m - 2.0)
    for i in range(k):
        lo, hi = lam[i], lam[i + 1]
        term = consts.b2 * h1[i] * (hi / lo) ** m
        grad[i] -= m * term / lo
        grad[i + 1] += m * term / hi
        hess[i, i] += m * (m + 1.0) * term / lo**2
        hess[i + 1, i + 1] += m * (m - 1.0) * term / hi**2
        hess[i, i + 1] -= m * m * term / (lo * hi)
        hess[i + 1, i] = hess[i, i + 1]
    return grad, hess


def tower_psi_hat(s, h1_values, h2_values, consts: ExpansionConstants):
    """Tower function in the variables s1 = lambda1^m, s_(i+1) = (lambda_(i+1)/lambda_i)^m.

    Returns (value, gradient, Hessian); the Hessian is diagonal.
    """
    s = np.asarray(s, dtype=float)
    k = len(s) - 1
    h1 = np.asarray(h1_values, dtype=float)
    h2 = np.asarray(h2_values, dtype=float)
    weights = np.arange(k + 1, 0, -1, dtype=float)  # exponents k+1, k, ..., 1
    value = (
        consts.b1 * s[0] ** 2
        + consts.b2 * np.sum(s[1:] * h1)
        - consts.b3 * np.sum(h2)
        - consts.b4 * np.sum(weights * np.log(s))
    )
    grad = -consts.b4 * weights / s
    grad[0] += 2.0 * consts.b1 * s[0]
    grad[1:] += consts.b2 * h1
    hess = np.diag(consts.b4 * weights / s**2)
    hess[0, 0] += 2.0 * consts.b1
    return float(value), grad, hess


def gi_hessian_at_zero(N: int, k: int, consts: ExpansionConstants) -> np.ndarray:
    """Diagonal entry of the Hessian of g_i at zeta_i = 0, for i = 1..k.

    g_i = b4 (k+1-i) ln h1 - b3 h2.  Both kernels are radial, so the Hessian is
    a multiple of the identity.  h1 is the Newtonian potential of
    (1+|y|^2)^(-(N+2)/2), hence its Laplacian at 0 is -(N-2) |S^(N-1)| and
    h1(0) = |S^(N-1)|/N, giving (ln h1)'' = -(N-2).  The Laplacian of |y|^(-2)
    is -2(N-4)|y|^(-4), giving h2'' = -(2N-8)/N * int |y|^(-4)(1+|y|^2)^(-(N-2)).
    """
    _check_tower(k, consts)
    h2_curvature = -(2.0 * N - 8.0) / N * inverse_quartic_moment(N)
    return np.array(
        [-(N - 2.0) * consts.b4 * (k + 1 - i) - consts.b3 * h2_curvature for i in range(1, k + 1)]
    )


def gi_hessian_claimed(N: int, consts: ExpansionConstants) -> float:
    """The h2 contribution alone, (2N-8)/N * b3 * int |y|^(-4)(1+|y|^2)^(-(N-2))."""
    return (2.0 * N - 8.0) / N * consts.b3 * inverse_quartic_moment(N)


def _gi_radial(N: int, k: int, i: int, rho: float, consts: ExpansionConstants, q: QuadratureSpec) -> float:
    return consts.b4 * (k + 1 - i) * math.log(tower_h1(N, rho, q)) - consts.b3 * tower_h2(N, rho, q)


def gi_hessian_fd(
    N: int,
    k: int,
    i: int,
    consts: ExpansionConstants,
    step: float = 0.02,
    q: QuadratureSpec = DEFAULT_SPEC,
) -> dict[str, float]:
    """Finite-difference Hessian of g_i at 0 from the quadrature kernels.

    The diagonal uses the symmetric second difference along one axis with one
    Richardson step; the mixed entry uses the four-point stencil in two axes.
    """
    _check_tower(k, consts)
    tight = q.tightened(100.0)
    g0 = _gi_radial(N, k, i, 0.0, consts, tight)

    def second(h: float) -> float:
        return 2.0 * (_gi_radial(N, k, i, h, consts, tight) - g0) / (h * h)

    coarse, fine = second(step), second(0.5 * step)
    diagonal = (4.0 * fine - coarse) / 3.0
    zeta = np.zeros(N)

    def at(x: float, y: float) -> float:
        zeta[0], zeta[1] = x, y
        return _gi_radial(N, k, i, float(np.linalg.norm(zeta)), consts, tight)

    mixed = (at(step, step) - at(step, -step) - at(-step, step) + at(-step, -step)) / (4.0 * step * step)
    return {"diagonal": diagonal, "mixed": mixed}


@dataclass(frozen=True)
class TowerCritical:
    """Critical point of the s-variable tower function.

    ``grad_norm`` is the largest gradient entry relative to the size of the
    two terms that cancel in it.
    """

    k: int
    s_hat: np.ndarray
    lambdas: np.ndarray
    psi_hat: float
    reduced_value: float
    grad_norm: float
    h1: np.ndarray
    h2: np.ndarray
    gi_hessian_at_0: np.ndarray
    gi_hessian_claimed: float
    gi_classification_at_0: list[str] = field(default_factory=list)


def tower_critical(
    N: int,
    mu0: float,
    k: int,
    zetas,
    consts: ExpansionConstants | None = None,
    q: QuadratureSpec = DEFAULT_SPEC,
) -> TowerCritical:
    """Critical point s_hat(zeta) of the s-variable tower function and the reduced value."""
    from .integrals import expansion_constants

    consts = consts or expansion_constants(N, mu0, k, "tower", q)
    _check_tower(k, consts)
    h1, h2 = _tower_kernels(N, _zeta_norms(k, zetas), q)
    s_hat = np.empty(k + 1)
    s_hat[0] = math.sqrt((k + 1) * consts.b4 / (2.0 * consts.b1))
    for i in range(1, k + 1):
        s_hat[i] = (k + 1 - i) * consts.b4 / (consts.b2 * h1[i - 1])
    value, grad, _ = tower_psi_hat(s_hat, h1, h2, consts)
    g_terms = [consts.b4 * (k + 1 - i) * math.log(h1[i - 1]) - consts.b3 * h2[i - 1] for i in range(1, k + 1)]
    # Each gradient entry is a difference of two terms of size b4 w_j / s_j; report it relative to that.
    log_scale = consts.b4 * np.arange(k + 1, 0, -1, dtype=float) / s_hat
    m = 0.5 * (N - 2)
    lambdas = np.cumprod(s_hat) ** (1.0 / m)
    hess0 = gi_hessian_at_zero(N, k, consts)
    kinds = ["local_min" if h > 0 else "local_max" if h < 0 else "degenerate" for h in hess0]
    return TowerCritical(
        k=k,
        s_hat=s_hat,
        lambdas=lambdas,
        psi_hat=value,
        reduced_value=consts.c1 + math.fsum(g_terms),
        grad_norm=float(np.max(np.abs(grad) / log_scale)),
        h1=h1,
        h2=h2,
        gi_hessian_at_0=hess0,
        gi_hessian_claimed=gi_hessian_claimed(N, consts),
        gi_classification_at_0=kinds,
    )
