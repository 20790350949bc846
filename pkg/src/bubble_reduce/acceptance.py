"""Acceptance checks, each returning a pass/fail verdict with the numbers behind it.

Every check is deterministic for a fixed seed.  Wall-clock times are kept out
of the results so that two runs produce identical reports; callers time the
checks themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .critical import find_roots
from .energy import (
    BubbleAtom,
    Configuration,
    FitModel,
    coefficient_extraction,
    energy_functional,
    fit_leading_coefficient,
    pair_interaction,
    single_bubble_deficit,
)
from .geometry import BallDomain, gamma_tau, placement
from .integrals import (
    expansion_constants,
    hardy_profile_integrals,
    instanton_integrals,
    tower_h1,
)
from .jsonable import plain
from .profiles import (
    critical_exponent,
    hardy_constant,
    hardy_params,
    instanton_constant,
    sobolev_constants,
)
from .quadrature import DEFAULT_SPEC
from .reduced import (
    SignPattern,
    ReducedPoint,
    gamma2_root,
    gi_hessian_at_zero,
    gi_hessian_claimed,
    gi_hessian_fd,
    grad_hess_psi,
    iota1,
    iota3,
    iota3_terms,
    square_t_margin,
    minimal_iota1_dimension,
    psi_multipoint,
    square_iota2,
    stationarity_newton,
    axis_bubble_critical_t,
    axis_bubble_profile,
    polygon_profile,
    polygon_window,
    alternating_square_profile,
    alternating_square_windows,
    tower_critical,
    tower_grad_hess,
    tower_psi_kernels,
)

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all"]

DEFAULT_SEED = 42


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.passed, "details": plain(self.details)}


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _rel_to(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference)


# --------------------------------------------------------------------------


def constants_cross_check(seed: int = DEFAULT_SEED) -> CriterionResult:
    rows = {}
    ok = True
    for N in (7, 10, 15):
        ints = instanton_integrals(N)
        numeric = ints.quadrature["int_U_2star"]
        gap = _rel(numeric, ints.int_U_2star)
        rows[str(N)] = {"quadrature": numeric, "beta_form": ints.int_U_2star, "rel_gap": gap}
        ok &= gap <= 1e-10
    return CriterionResult(1, "instanton energy: quadrature vs Beta form", ok, rows)


def hardy_expansions(seed: int = DEFAULT_SEED) -> CriterionResult:
    N = 7
    mu_bar = hardy_constant(N)
    c0 = instanton_constant(N)
    rows = {}
    ok = True
    for mu in (1e-3, 1e-4):
        p = hardy_params(N, mu)
        err = abs(p.c_mu - c0 * (1.0 - mu / (N - 2))) / c0
        bound = 10.0 * (mu / mu_bar) ** 2
        rows[f"c_mu_{mu:g}"] = {"error": err, "bound": bound}
        ok &= err <= bound
    q = DEFAULT_SPEC.tightened(100.0)
    sob = sobolev_constants(N, 0.0, q)
    slopes = {}
    for mu in (1e-3, 1e-4, 1e-5):
        s_mu = hardy_profile_integrals(hardy_params(N, mu), q).int_V_2star ** (2.0 / N)
        slopes[f"{mu:g}"] = (sob.s0 - s_mu) / mu
    spread = max(_rel(v, sob.s_bar) for v in slopes.values())
    rows["s_bar"] = sob.s_bar
    rows["difference_slopes"] = slopes
    rows["max_rel_spread"] = spread
    ok &= sob.s_bar > 0 and spread < 5e-4
    return CriterionResult(2, "Hardy constant and S_mu slope expansions", ok, rows)


def axis_bubble_checks(seed: int = DEFAULT_SEED) -> CriterionResult:
    N = 7
    consts = expansion_constants(N, 1.0, 1, "multipoint")
    grid = np.linspace(1e-3, 1.0 - 1e-3, 1000)
    worst = max(_rel(p.nu, p.nu_formula) for p in (axis_bubble_profile(N, t, consts) for t in grid))
    roots = axis_bubble_critical_t(N, consts)
    gap = abs(roots["nu_prime_root"] - roots["phi_minimizer"])
    at_root = axis_bubble_profile(N, roots["nu_prime_root"], consts)
    ok = worst <= 1e-11 and gap <= 1e-9 and bool(np.all(at_root.hess_eigs > 0))
    return CriterionResult(
        3,
        "one bubble on the axis: nu identity, critical t, Hessian",
        ok,
        {
            "max_rel_nu_gap": worst,
            "nu_prime_root": roots["nu_prime_root"],
            "phi_minimizer": roots["phi_minimizer"],
            "root_gap": gap,
            "hessian_eigenvalues": at_root.hess_eigs,
        },
    )


def polygon_iota1_checks(seed: int = DEFAULT_SEED) -> CriterionResult:
    N = 7
    t_star = polygon_window(N, 3)
    g_at = abs(gamma_tau(N, t_star).gamma1)
    grid = np.linspace(t_star + 1e-6, 1.0 - 1e-6, 10**4)
    values = iota1(N, grid)
    min_iota = float(np.min(values[np.isfinite(values)]))
    N0 = minimal_iota1_dimension(60)
    counts = {}
    for n in range(N0 or 61, 61):
        ts = polygon_window(n, 3)
        report = find_roots(lambda t, n=n: iota1(n, t), (ts + 1e-6, 1.0 - 1e-6), 10**4, label="iota1")
        counts[n] = [r.root for r in report.roots]
    two_roots = bool(counts) and all(len(r) >= 2 and abs(r[0] - r[1]) > 0 for r in counts.values())
    ok = g_at <= 1e-12 and t_star < 0.5 and min_iota > 0 and N0 is not None and two_roots
    return CriterionResult(
        4,
        "three negative satellites: window, sign of iota1, dimension threshold",
        ok,
        {
            "t_star": t_star,
            "gamma1_at_t_star": g_at,
            "min_iota1_N7": min_iota,
            "N0": N0,
            "roots_by_N": {str(n): r for n, r in counts.items()},
        },
    )


def square_iota2_checks(seed: int = DEFAULT_SEED) -> CriterionResult:
    lower = (math.sqrt(6.0) - math.sqrt(2.0)) / 2.0
    rows = {}
    ok = True
    for N in range(7, 31):
        ts = gamma2_root(N)
        grid = np.linspace(ts + 1e-6, 1.0 - 1e-6, 10**4)
        with np.errstate(over="ignore", invalid="ignore"):
            iota2 = square_iota2(N, grid).iota2
            margin = square_t_margin(N, grid)
        finite = np.isfinite(iota2) & np.isfinite(margin)
        row = {
            "t_star": ts,
            "min_iota2": float(np.min(iota2[finite])),
            "min_square_t_margin": float(np.min(margin[finite])),
            "nonfinite_points": int(np.sum(~finite)),
        }
        row["passed"] = ts > lower and row["min_iota2"] > 0 and row["min_square_t_margin"] > 0
        ok &= row["passed"]
        rows[str(N)] = row
    return CriterionResult(5, "four negative satellites: iota2 > 0 and the t-inequality", ok, rows)


def alternating_square_checks(seed: int = DEFAULT_SEED) -> CriterionResult:
    N = 7
    consts = expansion_constants(N, 1.0, 4, "multipoint")
    t1, t2 = alternating_square_windows(N)
    report = find_roots(lambda t: iota3(N, t), (1e-3, t1 - 1e-9), 10**4, rel_tol=1e-15, label="iota3")
    root_rows = []
    for r in report.roots:
        scale = math.fsum(abs(x) for x in iota3_terms(N, r.root))
        root_rows.append({"t0": r.root, "residual": r.residual, "relative_residual": r.residual / scale})
    samples = np.concatenate([np.linspace(0.05, t1 - 1e-3, 25), np.linspace(t2 + 1e-3, 0.95, 25)])
    worst_residual = 0.0
    sign_matches = 0
    printed_matches = 0
    for t in samples:
        prof = alternating_square_profile(N, float(t), consts)
        worst_residual = max(worst_residual, float(np.max(np.abs(prof.residuals))))
        target = int(np.sign(prof.gamma3))
        sign_matches += prof.hessian_det_sign == target
        printed_matches += prof.det_sign == target
    ok = (
        0.0 < t1 < 0.5 < t2 < 1.0
        and len(root_rows) >= 1
        and all(r["relative_residual"] <= 1e-10 for r in root_rows)
        and worst_residual <= 1e-10
        and sign_matches == len(samples)
        and printed_matches == len(samples)
    )
    return CriterionResult(
        6,
        "alternating square: windows, iota3 root, closed-form residuals, determinant sign",
        ok,
        {
            "t1_star": t1,
            "t2_star": t2,
            "iota3_roots": root_rows,
            "max_system_residual": worst_residual,
            "det_sign_matches": sign_matches,
            "printed_det_sign_matches": printed_matches,
            "samples": len(samples),
        },
    )


def tower_hessian(seed: int = DEFAULT_SEED) -> CriterionResult:
    """Stationarity of s_hat and the Hessian of g_i at zeta = 0 against the stated closed form."""
    N, mu0 = 7, 1.0
    rng = np.random.default_rng(seed)
    rows = {}
    ok = True
    for k in range(4):
        consts = expansion_constants(N, mu0, k, "tower")
        worst = 0.0
        for _ in range(20):
            zetas = rng.uniform(-1.5, 1.5, size=(k, N))
            worst = max(worst, tower_critical(N, mu0, k, zetas, consts).grad_norm)
        row = {"max_relative_gradient": worst}
        passed = worst <= 1e-11
        if k >= 1:
            claimed = gi_hessian_claimed(N, consts)
            exact = gi_hessian_at_zero(N, k, consts)
            fd = [gi_hessian_fd(N, k, i, consts) for i in range(1, k + 1)]
            fd_diag = [f["diagonal"] for f in fd]
            row.update(
                {
                    "claimed_diagonal": claimed,
                    "fd_diagonal": fd_diag,
                    "closed_form_diagonal": exact,
                    "fd_vs_claimed": [_rel(d, claimed) for d in fd_diag],
                    "fd_vs_closed_form": [_rel(d, e) for d, e in zip(fd_diag, exact)],
                    "mixed_over_diagonal": [abs(f["mixed"]) / abs(f["diagonal"]) for f in fd],
                }
            )
            passed &= all(r <= 1e-7 for r in row["fd_vs_claimed"])
            passed &= all(r <= 1e-7 for r in row["mixed_over_diagonal"])
        row["passed"] = passed
        ok &= passed
        rows[str(k)] = row
    return CriterionResult(7, "tower: stationarity of s_hat and Hessian of g_i at zero", ok, rows)


def equal_scales_newton(seed: int = DEFAULT_SEED) -> CriterionResult:
    N = 7
    rng = np.random.default_rng(seed)
    rows = {}
    ok = True
    for k, ts in ((2, np.linspace(0.45, 0.9, 10)), (3, np.linspace(0.52, 0.9, 10))):
        consts = expansion_constants(N, 1.0, k, "multipoint")
        spread = closed = 0.0
        for t in ts:
            prof = polygon_profile(N, k, float(t), consts)
            exact = np.array([prof.lambda1] * k + [prof.lambda_bar])
            start = exact * (1.0 + 0.1 * rng.uniform(-1.0, 1.0, size=k + 1))
            sol = stationarity_newton(N, SignPattern.negative_satellites(k), placement(k, float(t), N).centers, consts, start)
            bubbles = sol.x[:k]
            spread = max(spread, float(np.max(bubbles) / np.min(bubbles) - 1.0))
            closed = max(closed, float(np.max(np.abs(sol.x / exact - 1.0))))
        rows[str(k)] = {"max_scale_spread": spread, "max_closed_form_gap": closed}
        ok &= spread <= 1e-10 and closed <= 1e-9
    return CriterionResult(8, "equal bubble scales from perturbed Newton starts", ok, rows)


def _fd_gradient(f: Callable[[np.ndarray], float], x: np.ndarray, rel_step: float = 1e-5) -> np.ndarray:
    out = np.empty_like(x)
    for i in range(len(x)):
        h = rel_step * x[i]
        up, down = x.copy(), x.copy()
        up[i] += h
        down[i] -= h
        out[i] = (f(up) - f(down)) / (2.0 * h)
    return out


def _fd_jacobian(g: Callable[[np.ndarray], np.ndarray], x: np.ndarray, rel_step: float = 1e-5) -> np.ndarray:
    cols = []
    for i in range(len(x)):
        h = rel_step * x[i]
        up, down = x.copy(), x.copy()
        up[i] += h
        down[i] -= h
        cols.append((g(up) - g(down)) / (2.0 * h))
    return np.column_stack(cols)


def _vec_rel(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300))


def derivative_suite(seed: int = DEFAULT_SEED) -> CriterionResult:
    N = 7
    rng = np.random.default_rng(seed)
    patterns = [SignPattern.hardy_and_bubble(), SignPattern.negative_satellites(2), SignPattern.negative_satellites(3), SignPattern.alternating(4)]
    worst_grad = worst_hess = 0.0
    for i in range(50):
        pattern = patterns[i % len(patterns)]
        k = pattern.k
        consts = expansion_constants(N, 1.0, k, "multipoint")
        t = float(rng.uniform(0.2, 0.9))
        centers = placement(k, t, N).centers if k > 1 else placement(1, t, N).centers
        lam = rng.uniform(0.3, 2.0, size=k + 1)

        def value(x: np.ndarray) -> float:
            return psi_multipoint(N, pattern, ReducedPoint(x, centers), consts)

        def gradient(x: np.ndarray) -> np.ndarray:
            return grad_hess_psi(N, pattern, ReducedPoint(x, centers), consts)[0]

        grad, hess = grad_hess_psi(N, pattern, ReducedPoint(lam, centers), consts)
        worst_grad = max(worst_grad, _vec_rel(grad, _fd_gradient(value, lam)))
        worst_hess = max(worst_hess, _vec_rel(hess, _fd_jacobian(gradient, lam)))
    for i in range(50):
        k = 1 + i % 3
        consts = expansion_constants(N, 1.0, k, "tower")
        h1 = rng.uniform(0.5, 2.0, size=k)
        h2 = rng.uniform(0.5, 2.0, size=k)
        lam = np.sort(rng.uniform(0.3, 2.0, size=k + 1))[::-1]
        grad, hess = tower_grad_hess(N, k, lam, h1, consts)
        fd_grad = _fd_gradient(lambda x: tower_psi_kernels(N, k, x, h1, h2, consts), lam)
        fd_hess = _fd_jacobian(lambda x: tower_grad_hess(N, k, x, h1, consts)[0], lam)
        worst_grad = max(worst_grad, _vec_rel(grad, fd_grad))
        worst_hess = max(worst_hess, _vec_rel(hess, fd_hess))
    ok = worst_grad <= 1e-6 and worst_hess <= 1e-6
    return CriterionResult(
        9,
        "analytic gradients and Hessians vs central differences",
        ok,
        {"points": 100, "max_rel_gradient_error": worst_grad, "max_rel_hessian_error": worst_hess},
    )


def h1_oracle(seed: int = DEFAULT_SEED) -> CriterionResult:
    rows = {}
    ok = True
    for N in (7, 10):
        for rho in (0.0, 0.3, 1.0, 3.0):
            a = tower_h1(N, rho, method="reduction")
            b = tower_h1(N, rho, method="axisymmetric")
            rows[f"N{N}_rho{rho:g}"] = {"reduction": a, "axisymmetric": b, "rel_gap": _rel(a, b)}
            ok &= _rel(a, b) <= 1e-9
    return CriterionResult(10, "h1 by mean-value reduction vs 2-D quadrature", ok, rows)


def energy_expansion(seed: int = DEFAULT_SEED) -> CriterionResult:
    N = 7
    two_star = critical_exponent(N)
    c0 = instanton_constant(N)
    kernel = instanton_integrals(N).int_standard_kernel
    scales = [0.05, 0.02, 0.01]
    rows: dict = {}
    ok = True

    for t in (0.0, 0.3):
        deficits = [single_bubble_deficit(N, "standard", d, t) for d in scales]
        fitted = fit_leading_coefficient(scales, deficits, N - 2)
        target = c0**two_star * (1.0 - t * t) ** (2 - N) * kernel
        rows[f"standard_t{t:g}"] = {"fitted": fitted, "predicted": target, "rel_gap": _rel_to(fitted, target)}
        ok &= _rel_to(fitted, target) <= 0.05

    mu = 1e-3
    p = hardy_params(N, mu)
    deficits = [single_bubble_deficit(N, "hardy", s, 0.0, mu) for s in scales]
    fitted = fit_leading_coefficient(scales, deficits, N - 2)
    target = c0 * p.c_mu ** (two_star - 1.0) * hardy_profile_integrals(p).int_hardy_kernel
    rows["hardy_mu1e-3"] = {"fitted": fitted, "predicted": target, "rel_gap": _rel_to(fitted, target)}
    ok &= _rel_to(fitted, target) <= 0.05

    t = 0.5
    values = [pair_interaction(N, d, t)["interaction"] for d in scales]
    fitted = fit_leading_coefficient(scales, values, N - 2)
    green = BallDomain(N).green(np.eye(N)[0] * t, -np.eye(N)[0] * t)
    target = c0**two_star * green * kernel
    rows["pair_t0.5"] = {"fitted": fitted, "predicted": target, "rel_gap": _rel_to(fitted, target)}
    ok &= _rel_to(fitted, target) <= 0.05

    mu0 = 1.0
    consts = expansion_constants(N, mu0, 0, "tower")
    crit = tower_critical(N, mu0, 0, np.zeros((0, N)), consts)
    lam = float(crit.lambdas[0])
    pairs = []
    for eps in (1e-2, 3e-3, 1e-3):
        config = Configuration(N, (BubbleAtom("hardy", 1, lam * eps ** (1.0 / (N - 2))),), mu=mu0 * eps, eps=eps)
        pairs.append((eps, energy_functional(config).total))
    model = FitModel("tower", fixed=("a1", "a3"), extra_powers=(N / (N - 2.0),))
    fit = coefficient_extraction(pairs, model, consts)
    free = coefficient_extraction(pairs, FitModel("tower"), consts)
    rows["tower_k0"] = {
        "energies": [[e, j] for e, j in pairs],
        "psi_reduced": crit.psi_hat,
        "psi_fitted": fit.psi_estimate,
        "rel_gap": _rel_to(fit.psi_estimate, crit.psi_hat),
        "psi_fitted_free_basis": free.psi_estimate,
    }
    ok &= _rel_to(fit.psi_estimate, crit.psi_hat) <= 0.10
    return CriterionResult(11, "energy expansion coefficients by quadrature", ok, rows)


CRITERIA: dict[int, Callable[[int], CriterionResult]] = {
    1: constants_cross_check,
    2: hardy_expansions,
    3: axis_bubble_checks,
    4: polygon_iota1_checks,
    5: square_iota2_checks,
    6: alternating_square_checks,
    7: tower_hessian,
    8: equal_scales_newton,
    9: derivative_suite,
    10: h1_oracle,
    11: energy_expansion,
}


def run_criterion(number: int, seed: int = DEFAULT_SEED) -> CriterionResult:
    if number not in CRITERIA:
        raise KeyError(f"no acceptance check numbered {number}")
    return CRITERIA[number](seed)


def run_all(seed: int = DEFAULT_SEED, numbers=None) -> list[CriterionResult]:
    return [run_criterion(n, seed) for n in (numbers or sorted(CRITERIA))]
