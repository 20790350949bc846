"""Report builders behind the command-line subcommands.

Each builder takes a validated :class:`RunConfig` and returns a
:class:`Report`: a summary block, one or more fixed-schema tables and an
overall verdict.  Column orders are part of the output contract; plotting and
downstream scripts index them by name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .acceptance import run_all
from .critical import find_roots
from .energy import BubbleAtom, Configuration, FitModel, coefficient_extraction, energy_functional, expansion_prediction
from .geometry import BallDomain, axis_point, phi_axis
from .integrals import expansion_constants
from .reduced import (
    WindowError,
    gamma2_root,
    iota1,
    iota3,
    iota3_terms,
    square_t_margin,
    minimal_iota1_dimension,
    square_iota2,
    axis_bubble_critical_t,
    axis_bubble_profile,
    polygon_profile,
    polygon_window,
    alternating_square_profile,
    alternating_square_windows,
    tower_critical,
)

__all__ = ["RunConfig", "Table", "Report", "BUILDERS", "TABLE_COLUMNS", "ConfigError"]

SCAN_POINTS = 10**4
PROP37_DIMENSIONS = range(7, 31)
ENERGY_EPS = (1e-2, 3e-3, 1e-3)


class ConfigError(ValueError):
    """A run configuration that violates a subcommand's preconditions."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    N: int = 7
    mu0: float = 1.0
    alpha: float = 1.0
    k: int | None = None
    variant: str = "multipoint"
    grid: int | None = None
    tol: float = 1e-12
    seed: int = 42
    zeta_radius: float = 0.0
    criteria: tuple[int, ...] = ()

    def rows(self, default: int) -> int:
        return self.grid if self.grid is not None else default


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[list] = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values for {len(self.columns)} columns")
        self.rows.append(list(values))

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows], dtype=float)


@dataclass
class Report:
    command: str
    summary: dict
    tables: dict[str, Table]
    passed: bool = True


TABLE_COLUMNS: dict[str, dict[str, tuple[str, ...]]] = {
    "constants": {"constants": ("name", "value")},
    "green": {"axis": ("t", "robin", "green_antipodal", "regular_antipodal", "phi")},
    "thm11": {
        "profile": ("t", "phi", "nu", "nu_formula", "nu_prime", "lambda1", "lambda_bar", "hess_min", "hess_max"),
    },
    "thm12": {
        "profile": ("t", "alpha", "lambda1", "lambda_bar", "nu", "nu_direct", "nu_prime", "iota"),
        "iota1_by_N": ("N", "t_star", "iota1_half", "roots"),
    },
    "remark36": {"profile": ("t", "gamma2", "alpha3", "iota2")},
    "prop37": {
        "profile": ("t", "gamma2", "iota2", "lhs_357"),
        "verdicts": ("N", "t_star", "min_iota2", "min_square_t_margin", "passed"),
    },
    "thm13": {
        "profile": (
            "t", "X", "Y", "Z", "lambda1", "lambda2", "lambda_bar", "nu2", "nu2_prime",
            "iota3", "max_residual", "gamma3", "det_sign", "hessian_det_sign",
        ),
    },
    "tower": {
        "scales": ("index", "s_hat", "lambda"),
        "kernels": ("i", "zeta_norm", "h1", "h2", "gi_hessian_at_0", "gi_hessian_claimed", "classification"),
    },
    "energy": {
        "breakdown": ("eps", "scale", "quadratic", "critical", "subcritical", "total", "predicted", "asymmetry"),
    },
    "verify-all": {"criteria": ("criterion", "name", "passed")},
}


def _tables(command: str) -> dict[str, Table]:
    return {name: Table(cols) for name, cols in TABLE_COLUMNS[command].items()}


def _interior(lo: float, hi: float, n: int) -> np.ndarray:
    """n points strictly inside (lo, hi), excluding both ends."""
    return np.linspace(lo, hi, n + 2)[1:-1]


def _require_dimension(cfg: RunConfig, lowest: int = 7) -> None:
    if cfg.N < lowest:
        raise ConfigError(f"{cfg.command} needs N >= {lowest}, got N={cfg.N}")


# --------------------------------------------------------------------------


def build_constants(cfg: RunConfig) -> Report:
    _require_dimension(cfg, 5)
    k = cfg.k if cfg.k is not None else (0 if cfg.variant == "tower" else 1)
    if cfg.variant == "multipoint" and k < 1:
        raise ConfigError("the multipoint variant needs k >= 1")
    consts = expansion_constants(cfg.N, cfg.mu0, k, cfg.variant)
    tables = _tables("constants")
    values = consts.as_dict()
    for name, value in values.items():
        if name not in ("variant", "N", "k", "mu0"):
            tables["constants"].add(name, value)
    return Report("constants", values, tables)


def build_green(cfg: RunConfig) -> Report:
    _require_dimension(cfg, 3)
    ball = BallDomain(cfg.N)
    tables = _tables("green")
    for t in _interior(0.0, 1.0, cfg.rows(99)):
        x = axis_point(cfg.N, t)
        tables["axis"].add(
            t, float(ball.robin(x)), float(ball.green(x, -x)), float(ball.regular_part(x, -x)), float(phi_axis(cfg.N, t))
        )
    return Report("green", {"N": cfg.N}, tables)


def build_axis_bubble(cfg: RunConfig) -> Report:
    _require_dimension(cfg)
    consts = expansion_constants(cfg.N, cfg.mu0, 1, "multipoint")
    tables = _tables("thm11")
    for t in _interior(0.0, 1.0, cfg.rows(999)):
        p = axis_bubble_profile(cfg.N, float(t), consts)
        tables["profile"].add(
            p.t, p.phi, p.nu, p.nu_formula, p.nu_prime, p.lambda1, p.lambda_bar, p.hess_eigs.min(), p.hess_eigs.max()
        )
    roots = axis_bubble_critical_t(cfg.N, consts)
    at_root = axis_bubble_profile(cfg.N, roots["nu_prime_root"], consts)
    summary = {
        "nu_prime_root": roots["nu_prime_root"],
        "phi_minimizer": roots["phi_minimizer"],
        "hessian_eigenvalues": at_root.hess_eigs,
        "classification": at_root.classification,
    }
    return Report("thm11", summary, tables, passed=at_root.classification == "local_min")


def build_polygon(cfg: RunConfig) -> Report:
    _require_dimension(cfg)
    k = 3 if cfg.k is None else cfg.k
    if k not in (2, 3):
        raise ConfigError("thm12 needs --k 2 or --k 3")
    consts = expansion_constants(cfg.N, cfg.mu0, k, "multipoint")
    t_star = polygon_window(cfg.N, k)
    tables = _tables("thm12")
    for t in _interior(t_star, 1.0, cfg.rows(999)):
        p = polygon_profile(cfg.N, k, float(t), consts)
        tables["profile"].add(p.t, p.alpha, p.lambda1, p.lambda_bar, p.nu, p.nu_direct, p.nu_prime, p.iota)
    summary: dict = {"k": k, "t_star": t_star}
    if k == 3:
        scan = find_roots(
            lambda t: iota1(cfg.N, t), (t_star + 1e-6, 1.0 - 1e-6), SCAN_POINTS, rel_tol=cfg.tol, label="iota1"
        )
        roots = [r.root for r in scan.roots]
        summary["iota1_roots"] = roots
        summary["verdict"] = "no root of iota1 in (t_star, 1)" if not roots else f"{len(roots)} roots of iota1 in (t_star, 1)"
        N0 = minimal_iota1_dimension(60)
        summary["minimal_N0"] = N0
        for n in range(7, 61):
            ts = polygon_window(n, 3)
            found = find_roots(lambda t, n=n: iota1(n, t), (ts + 1e-6, 1.0 - 1e-6), SCAN_POINTS, rel_tol=cfg.tol)
            tables["iota1_by_N"].add(n, ts, float(iota1(n, 0.5)), " ".join(f"{r.root:.17g}" for r in found.roots))
    else:
        del tables["iota1_by_N"]
        scan = find_roots(
            lambda t: np.vectorize(lambda s: polygon_profile(cfg.N, 2, s, consts).iota)(t),
            (t_star + 1e-6, 1.0 - 1e-6),
            SCAN_POINTS,
            rel_tol=cfg.tol,
            label="iota",
        )
        summary["iota_roots"] = [r.root for r in scan.roots]
    return Report("thm12", summary, tables)


def _iota2_profile(N: int, n: int) -> tuple[float, np.ndarray, object, np.ndarray]:
    ts = gamma2_root(N)
    grid = _interior(ts, 1.0, n)
    with np.errstate(over="ignore", invalid="ignore"):
        prof = square_iota2(N, grid)
        margin = square_t_margin(N, grid)
    return ts, grid, prof, margin


def build_square_iota2(cfg: RunConfig) -> Report:
    _require_dimension(cfg)
    ts, grid, prof, _ = _iota2_profile(cfg.N, cfg.rows(SCAN_POINTS))
    tables = _tables("remark36")
    for row in zip(grid, prof.gamma2, prof.alpha3_t, prof.iota2):
        tables["profile"].add(*row)
    finite = np.isfinite(prof.iota2)
    min_iota2 = float(np.min(prof.iota2[finite]))
    summary = {"t_star": ts, "min_iota2": min_iota2, "nonfinite_points": int(np.sum(~finite))}
    return Report("remark36", summary, tables, passed=min_iota2 > 0)


def build_square_verdicts(cfg: RunConfig) -> Report:
    _require_dimension(cfg)
    lower = (np.sqrt(6.0) - np.sqrt(2.0)) / 2.0
    n = cfg.rows(SCAN_POINTS)
    ts, grid, prof, margin = _iota2_profile(cfg.N, n)
    tables = _tables("prop37")
    for row in zip(grid, prof.gamma2, prof.iota2, margin + 1.0):
        tables["profile"].add(*row)
    all_passed = True
    for N in sorted(set(PROP37_DIMENSIONS) | {cfg.N}):
        t_star, _, p, mg = _iota2_profile(N, n)
        finite = np.isfinite(p.iota2) & np.isfinite(mg)
        mi, mm = float(np.min(p.iota2[finite])), float(np.min(mg[finite]))
        ok = bool(t_star > lower and mi > 0 and mm > 0)
        all_passed &= ok
        tables["verdicts"].add(N, t_star, mi, mm, ok)
    own = np.isfinite(prof.iota2)
    positive = bool(np.all(prof.iota2[own] > 0))
    summary = {
        "t_star": ts,
        "t_star_lower_bound": lower,
        "iota2_positive": positive,
        "t_margin_positive": bool(np.all(margin[np.isfinite(margin)] > 0)),
        "all_dimensions_pass": all_passed,
    }
    return Report("prop37", summary, tables, passed=positive and all_passed)


def build_alternating_square(cfg: RunConfig) -> Report:
    _require_dimension(cfg)
    consts = expansion_constants(cfg.N, cfg.mu0, 4, "multipoint")
    t1, t2 = alternating_square_windows(cfg.N)
    scan = find_roots(lambda t: iota3(cfg.N, t), (1e-3, t1 - 1e-9), SCAN_POINTS, rel_tol=cfg.tol, label="iota3")
    n = cfg.rows(200)
    samples = np.concatenate([_interior(0.0, t1, n // 2), _interior(t2, 1.0, n - n // 2)])
    tables = _tables("thm13")
    mismatches = 0
    for t in samples:
        try:
            p = alternating_square_profile(cfg.N, float(t), consts)
        except WindowError:
            continue
        mismatches += p.hessian_det_sign != int(np.sign(p.gamma3))
        tables["profile"].add(
            p.t, p.X, p.Y, p.Z, p.lambda1, p.lambda2, p.lambda_bar, p.nu2, p.nu2_prime, p.iota3,
            float(np.max(np.abs(p.residuals))), p.gamma3, p.det_sign, p.hessian_det_sign,
        )
    summary = {
        "t1_star": t1,
        "t2_star": t2,
        "iota3_roots": [r.root for r in scan.roots],
        "iota3_root_residuals": [r.residual for r in scan.roots],
        "iota3_root_relative_residuals": [
            r.residual / math.fsum(abs(x) for x in iota3_terms(cfg.N, r.root)) for r in scan.roots
        ],
        "det_sign_mismatches": mismatches,
    }
    return Report("thm13", summary, tables, passed=mismatches == 0 and bool(scan.roots))


def build_tower(cfg: RunConfig) -> Report:
    _require_dimension(cfg)
    k = 0 if cfg.k is None else cfg.k
    if k < 0:
        raise ConfigError("tower needs k >= 0")
    rng = np.random.default_rng(cfg.seed)
    zetas = np.zeros((k, cfg.N))
    if cfg.zeta_radius > 0 and k > 0:
        directions = rng.normal(size=(k, cfg.N))
        radii = cfg.zeta_radius * rng.uniform(size=k)
        zetas = directions / np.linalg.norm(directions, axis=1, keepdims=True) * radii[:, None]
    consts = expansion_constants(cfg.N, cfg.mu0, k, "tower")
    crit = tower_critical(cfg.N, cfg.mu0, k, zetas, consts)
    tables = _tables("tower")
    for i, (s, lam) in enumerate(zip(crit.s_hat, crit.lambdas)):
        tables["scales"].add(i, s, lam)
    norms = np.linalg.norm(zetas, axis=1) if k else np.zeros(0)
    for i in range(k):
        tables["kernels"].add(
            i + 1, norms[i], crit.h1[i], crit.h2[i], crit.gi_hessian_at_0[i], crit.gi_hessian_claimed,
            crit.gi_classification_at_0[i],
        )
    summary = {
        "k": k,
        "psi_hat": crit.psi_hat,
        "reduced_value": crit.reduced_value,
        "relative_gradient": crit.grad_norm,
    }
    return Report("tower", summary, tables, passed=crit.grad_norm <= 1e-11)


def build_energy(cfg: RunConfig) -> Report:
    _require_dimension(cfg)
    k = 0 if cfg.k is None else cfg.k
    if cfg.variant != "tower" or k != 0:
        raise ConfigError("energy reports cover the single Hardy bubble: use --variant tower --k 0")
    N = cfg.N
    consts = expansion_constants(N, cfg.mu0, 0, "tower")
    crit = tower_critical(N, cfg.mu0, 0, np.zeros((0, N)), consts)
    lam = float(crit.lambdas[0])
    tables = _tables("energy")
    pairs = []
    for eps in ENERGY_EPS:
        scale = lam * eps ** (1.0 / (N - 2))
        config = Configuration(N, (BubbleAtom("hardy", 1, scale),), mu=cfg.mu0 * eps, eps=eps)
        br = energy_functional(config)
        pairs.append((eps, br.total))
        predicted = expansion_prediction(consts, crit.psi_hat, eps)
        tables["breakdown"].add(eps, scale, br.quadratic, br.critical, br.subcritical, br.total, predicted, br.asymmetry)
    fit = coefficient_extraction(pairs, FitModel("tower", fixed=("a1", "a3"), extra_powers=(N / (N - 2.0),)), consts)
    rel = abs(fit.psi_estimate - crit.psi_hat) / abs(crit.psi_hat)
    summary = {
        "psi_reduced": crit.psi_hat,
        "psi_fitted": fit.psi_estimate,
        "relative_gap": rel,
        "fitted_coefficients": fit.coefficients,
        "a1": consts.a1,
        "a2": consts.a2,
        "a3": consts.a3,
    }
    return Report("energy", summary, tables, passed=rel <= 0.10)


def build_verify_all(cfg: RunConfig) -> Report:
    results = run_all(cfg.seed, cfg.criteria or None)
    tables = _tables("verify-all")
    for r in results:
        tables["criteria"].add(r.number, r.name, r.passed)
    summary = {
        "all_passed": all(r.passed for r in results),
        "results": [r.as_dict() for r in results],
    }
    return Report("verify-all", summary, tables, passed=summary["all_passed"])


BUILDERS: dict[str, Callable[[RunConfig], Report]] = {
    "constants": build_constants,
    "green": build_green,
    "thm11": build_axis_bubble,
    "thm12": build_polygon,
    "remark36": build_square_iota2,
    "prop37": build_square_verdicts,
    "thm13": build_alternating_square,
    "tower": build_tower,
    "energy": build_energy,
    "verify-all": build_verify_all,
}
