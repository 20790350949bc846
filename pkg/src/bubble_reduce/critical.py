"""Root scanning and refinement, damped Newton solves and Hessian classification."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "RootReport",
    "RootResult",
    "NewtonResult",
    "HessianClass",
    "ConvergenceError",
    "scan_sign",
    "refine_root",
    "find_roots",
    "newton_nd",
    "jacobi_eigenvalues",
    "classify_hessian",
]

log = logging.getLogger(__name__)

DEFAULT_GRID = 4096
TIKHONOV_DAMPING = 1e-12


class ConvergenceError(RuntimeError):
    """A root finder or Newton iteration failed to meet its tolerance."""


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    iterations: int
    bracket: tuple[float, float]
    residual_history: tuple[float, ...] = ()


@dataclass
class RootReport:
    label: str
    grid_points: int
    brackets: list[tuple[float, float, int]] = field(default_factory=list)
    roots: list[RootResult] = field(default_factory=list)
    skipped: int = 0

    @property
    def sign_changes(self) -> int:
        return len(self.brackets)


def scan_sign(
    f: Callable[[np.ndarray], np.ndarray],
    interval: tuple[float, float],
    grid_points: int = DEFAULT_GRID,
    label: str = "f",
) -> RootReport:
    """Locate every sign change of ``f`` on a uniform grid over the closed interval.

    ``f`` is called once on the whole grid.  Non-finite values are dropped and
    counted in ``skipped``; brackets join consecutive finite grid values.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise ValueError("empty interval")
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    grid = np.linspace(lo, hi, grid_points)
    with np.errstate(all="ignore"):
        values = np.asarray(f(grid), dtype=float)
    finite = np.isfinite(values)
    report = RootReport(label=label, grid_points=grid_points, skipped=int(np.sum(~finite)))
    if report.skipped:
        log.info("%s: skipped %d non-finite grid values", label, report.skipped)
    if not np.any(finite):
        raise ValueError(f"{label}: all evaluations non-finite")
    g, v = grid[finite], values[finite]
    signs = np.sign(v)
    for i in range(len(v) - 1):
        if signs[i] == 0.0:
            report.brackets.append((float(g[i]), float(g[i]), 0))
        elif signs[i] * signs[i + 1] < 0.0:
            report.brackets.append((float(g[i]), float(g[i + 1]), int(signs[i])))
    if signs[-1] == 0.0:
        report.brackets.append((float(g[-1]), float(g[-1]), 0))
    return report


def refine_root(
    f: Callable[[float], float],
    bracket: tuple[float, float],
    rel_tol: float = 1e-12,
) -> RootResult:
    """Refine a sign-change bracket with Brent's bracketed secant/bisection method."""
    a, b = float(bracket[0]), float(bracket[1])
    if a == b:
        return RootResult(a, abs(float(f(a))), 0, (a, b), (abs(float(f(a))),))
    fa, fb = float(f(a)), float(f(b))
    if not (math.isfinite(fa) and math.isfinite(fb)):
        raise ValueError("non-finite value at a bracket end")
    if fa == 0.0:
        return RootResult(a, 0.0, 0, (a, b), (0.0,))
    if fb == 0.0:
        return RootResult(b, 0.0, 0, (a, b), (0.0,))
    if fa * fb > 0.0:
        raise ValueError("same-sign bracket")
    best = [min(abs(fa), abs(fb))]

    def tracked(x: float) -> float:
        value = float(f(x))
        best.append(min(best[-1], abs(value)))
        return value

    rtol = max(rel_tol, 4.0 * np.finfo(float).eps)
    root, info = brentq(tracked, a, b, xtol=1e-300, rtol=rtol, maxiter=500, full_output=True)
    if not info.converged:
        raise ConvergenceError(f"root refinement did not converge in {info.iterations} steps")
    return RootResult(float(root), abs(float(f(root))), info.iterations, (a, b), tuple(best))


def find_roots(
    f: Callable,
    interval: tuple[float, float],
    grid_points: int = DEFAULT_GRID,
    rel_tol: float = 1e-12,
    label: str = "f",
) -> RootReport:
    """:func:`scan_sign` followed by :func:`refine_root` on every bracket."""
    report = scan_sign(f, interval, grid_points, label)
    report.roots = [refine_root(f, (lo, hi), rel_tol) for lo, hi, _ in report.brackets]
    return report


@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    residual: float
    iterations: int
    damped_steps: int


def newton_nd(
    F: Callable[[np.ndarray], np.ndarray],
    J: Callable[[np.ndarray], np.ndarray],
    x0,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> NewtonResult:
    """Newton's method with backtracking; ill-conditioned steps fall back to Tikhonov damping.

    Success means ``max|F(x)| <= tol``; anything else raises.
    """
    x = np.array(x0, dtype=float)
    fx = np.asarray(F(x), dtype=float)
    res = float(np.max(np.abs(fx)))
    damped = 0
    for it in range(max_iter + 1):
        if not math.isfinite(res):
            raise ConvergenceError("Newton iteration diverged (non-finite residual)")
        if res <= tol:
            return NewtonResult(x, res, it, damped)
        if it == max_iter:
            break
        jac = np.asarray(J(x), dtype=float)
        if not np.all(np.isfinite(jac)):
            raise ConvergenceError("non-finite Jacobian")
        if np.linalg.cond(jac) < 1e12:
            step = np.linalg.solve(jac, -fx)
        else:
            damped += 1
            scale = np.linalg.norm(jac, 2) ** 2
            lhs = jac.T @ jac + TIKHONOV_DAMPING * scale * np.eye(len(x))
            try:
                step = np.linalg.solve(lhs, -jac.T @ fx)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceError("singular Jacobian") from exc
        t = 1.0
        for _ in range(40):
            trial = x + t * step
            f_trial = np.asarray(F(trial), dtype=float)
            r_trial = float(np.max(np.abs(f_trial)))
            if math.isfinite(r_trial) and r_trial < res:
                break
            t *= 0.5
        else:
            if res <= 10 * tol:
                return NewtonResult(x, res, it, damped)
            raise ConvergenceError(f"Newton line search stalled at residual {res:.3e}")
        x, fx, res = trial, f_trial, r_trial
    raise ConvergenceError(f"Newton did not converge in {max_iter} iterations (residual {res:.3e})")


def jacobi_eigenvalues(H, max_sweeps: int = 50) -> np.ndarray:
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations, sorted ascending."""
    A = np.array(H, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    scale = max(np.max(np.abs(A)), 1e-300)
    if np.max(np.abs(A - A.T)) > 1e-10 * scale:
        raise ValueError("asymmetric input")
    A = 0.5 * (A + A.T)
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.tril(A, -1) ** 2)))
        if off <= 1e-17 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                A = rot.T @ A @ rot
                A[p, q] = A[q, p] = 0.0
    return np.sort(np.diag(A))


@dataclass(frozen=True)
class HessianClass:
    classification: Literal["local_min", "local_max", "saddle", "degenerate"]
    eigenvalues: np.ndarray


def classify_hessian(H, rel_threshold: float = 1e-8) -> HessianClass:
    """Classify a critical point from the Hessian's eigenvalue signs.

    Eigenvalues within ``rel_threshold`` times the spectral radius of zero
    count as zero and make the point degenerate.
    """
    eig = jacobi_eigenvalues(H)
    radius = float(np.max(np.abs(eig))) if eig.size else 0.0
    cut = rel_threshold * radius
    if radius == 0.0 or np.any(np.abs(eig) <= cut):
        kind = "degenerate"
    elif np.all(eig > 0):
        kind = "local_min"
    elif np.all(eig < 0):
        kind = "local_max"
    else:
        kind = "saddle"
    return HessianClass(kind, eig)
