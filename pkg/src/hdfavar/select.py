"""Tuning-parameter selection: PIC over (lambda_gamma, r), BIC over lambda_a."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimate import Stage1Fit, Stage2Fit, build_var_design, stage1_fit, stage2_fit


class SelectionError(RuntimeError):
    """Raised when no lattice point produced a usable fit."""


@dataclass(frozen=True)
class SelectionGrid:
    lambda_gamma_values: tuple[float, ...] = ()
    r_values: tuple[int, ...] = ()
    lambda_a_values: tuple[float, ...] = ()

    def __post_init__(self):
        for name in ("lambda_gamma_values", "r_values", "lambda_a_values"):
            object.__setattr__(self, name, tuple(getattr(self, name)))


def log_grid(max_value: float, num: int = 20, min_ratio: float = 0.01) -> tuple[float, ...]:
    """num log-spaced points from min_ratio * max_value up to max_value, descending."""
    return tuple(np.geomspace(max_value, min_ratio * max_value, num))


def lambda_gamma_max(X: np.ndarray, Y: np.ndarray) -> float:
    """Smallest penalty that zeroes the sparse coefficient at the first iteration."""
    n = X.shape[0]
    return float(np.abs(X.T @ Y / n).max())


def lambda_a_max(f_hat: np.ndarray, X: np.ndarray, d: int) -> float:
    Z = np.hstack([np.asarray(f_hat, dtype=float), np.asarray(X, dtype=float)])
    design, response = build_var_design(Z, d)
    n_eff = design.shape[0]
    return float(np.abs(design.T @ response / n_eff).max())


def default_grid(
    X: np.ndarray,
    Y: np.ndarray,
    f_hat: np.ndarray | None = None,
    d: int = 1,
    num_lambda: int = 20,
    min_ratio: float = 0.01,
    max_r: int = 12,
) -> SelectionGrid:
    n, q = Y.shape
    lam_a = ()
    if f_hat is not None:
        lam_a = log_grid(lambda_a_max(f_hat, X, d), num_lambda, min_ratio)
    return SelectionGrid(
        lambda_gamma_values=log_grid(lambda_gamma_max(X, Y), num_lambda, min_ratio),
        r_values=tuple(range(1, min(max_r, n, q) + 1)),
        lambda_a_values=lam_a,
    )


def pic_score(fit: Stage1Fit, X: np.ndarray, Y: np.ndarray, l0_weight: float = 3.0) -> float:
    """Panel information criterion: scaled residual plus sparsity and rank penalties.

    Both penalties count parameters at the log(nq)/(nq) rate: a rank unit adds
    n+q parameters, a nonzero sparse coefficient adds l0_weight. The default
    weight keeps the false-positive rate of the sparse support low without
    tipping the criterion toward the degenerate null fit.
    """
    n, q = Y.shape
    resid = Y - fit.theta_hat - X @ fit.gamma_hat.T
    sigma2 = float(np.sum(resid**2)) / (n * q)
    gamma_l0 = int(np.count_nonzero(fit.gamma_hat))
    penalty = (l0_weight * gamma_l0 + fit.r * (n + q)) * np.log(n * q) / (n * q)
    return sigma2 + sigma2 * penalty


@dataclass(frozen=True)
class Stage1Selection:
    lambda_gamma: float
    r: int
    fit: Stage1Fit
    scores: tuple[dict, ...] = field(repr=False, default=())


def select_stage1(
    X: np.ndarray,
    Y: np.ndarray,
    grid: SelectionGrid,
    score_tol: float | None = None,
    **fit_kwargs,
) -> Stage1Selection:
    """Fit every (lambda_gamma, r) lattice point and return the PIC argmin.

    Ties break toward smaller r, then larger lambda_gamma. Fits are warm
    started along the decreasing-lambda path within each r.

    When score_tol is given, the lattice sweep runs at that (looser) outer
    tolerance and only the winning point is refit at the caller's tolerance,
    warm started from the sweep fit. The reported scores come from the sweep.
    """
    if not grid.lambda_gamma_values or not grid.r_values:
        raise ValueError("empty stage-1 selection grid")
    sweep_kwargs = dict(fit_kwargs)
    if score_tol is not None:
        sweep_kwargs["tol"] = score_tol
    scores = []
    best = None
    best_key = None
    for r in sorted(set(grid.r_values)):
        gamma_warm = None
        theta_warm = None
        for lam in sorted(set(grid.lambda_gamma_values), reverse=True):
            fit = stage1_fit(
                X, Y, lam, r, gamma_init=gamma_warm, theta_init=theta_warm, **sweep_kwargs
            )
            gamma_warm, theta_warm = fit.gamma_hat, fit.theta_hat
            score = pic_score(fit, X, Y)
            scores.append(
                {"lambda_gamma": lam, "r": r, "pic": score,
                 "converged": fit.converged, "iterations": fit.iterations}
            )
            key = (score, r, -lam)
            if best_key is None or key < best_key:
                best_key = key
                best = fit
    if not any(s["converged"] for s in scores):
        raise SelectionError(f"no lattice point converged; trace: {scores}")
    if score_tol is not None:
        best = stage1_fit(
            X, Y, best.lambda_gamma, best.r,
            gamma_init=best.gamma_hat, theta_init=best.theta_hat, **fit_kwargs,
        )
    return Stage1Selection(
        lambda_gamma=best.lambda_gamma, r=best.r, fit=best, scores=tuple(scores)
    )


def bic_score(fit: Stage2Fit, design: np.ndarray, response: np.ndarray) -> float:
    """Sum over response rows of log residual sums of squares, plus an l0 penalty."""
    n_eff = design.shape[0]
    B = np.hstack(fit.a_hat)
    resid = response - design @ B.T
    rss = np.sum(resid**2, axis=0)
    if np.any(rss <= 0):
        raise ValueError("zero residual sum of squares: BIC undefined, enlarge the penalty grid")
    a_l0 = int(np.count_nonzero(B))
    return float(np.sum(np.log(rss)) + (np.log(n_eff) / n_eff) * a_l0)


@dataclass(frozen=True)
class Stage2Selection:
    lambda_a: float
    fit: Stage2Fit
    scores: tuple[dict, ...] = field(repr=False, default=())


def select_stage2(
    f_hat: np.ndarray, X: np.ndarray, d: int, grid: SelectionGrid, **fit_kwargs
) -> Stage2Selection:
    """BIC argmin over the lambda_a grid; ties break toward larger lambda_a."""
    if not grid.lambda_a_values:
        raise ValueError("empty stage-2 selection grid")
    Z = np.hstack([np.asarray(f_hat, dtype=float), np.asarray(X, dtype=float)])
    design, response = build_var_design(Z, d)
    scores = []
    best = None
    best_key = None
    warm = None
    for lam in sorted(set(grid.lambda_a_values), reverse=True):
        fit = stage2_fit(f_hat, X, d, lam, beta0=warm, **fit_kwargs)
        warm = np.hstack(fit.a_hat)
        score = bic_score(fit, design, response)
        scores.append({"lambda_a": lam, "bic": score,
                       "converged": bool(fit.per_row_convergence.all())})
        key = (score, -lam)
        if best_key is None or key < best_key:
            best_key = key
            best = fit
    if not any(s["converged"] for s in scores):
        raise SelectionError(f"no stage-2 penalty converged; trace: {scores}")
    return Stage2Selection(lambda_a=best.lambda_a, fit=best, scores=tuple(scores))
