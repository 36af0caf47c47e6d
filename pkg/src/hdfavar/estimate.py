"""Two-stage FAVAR estimation: alternating calibration fit, factor extraction, sparse VAR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import IdentificationError, check_centered
from .solvers import kkt_residual, lasso_multi, truncate_rank, truncated_svd


@dataclass(frozen=True)
class Stage1Fit:
    theta_hat: np.ndarray
    gamma_hat: np.ndarray
    objective_trace: np.ndarray
    iterations: int
    converged: bool
    lambda_gamma: float
    r: int


@dataclass(frozen=True)
class FactorExtract:
    f_hat: np.ndarray
    lambda_hat: np.ndarray


@dataclass(frozen=True)
class Stage2Fit:
    a_hat: tuple[np.ndarray, ...]
    per_row_convergence: np.ndarray
    lambda_a: float
    d: int


def stage1_objective(X, Y, theta, gamma, lambda_gamma) -> float:
    n = Y.shape[0]
    resid = Y - theta - X @ gamma.T
    return float(np.sum(resid**2) / (2 * n) + lambda_gamma * np.abs(gamma).sum())


def stage1_fit(
    X: np.ndarray,
    Y: np.ndarray,
    lambda_gamma: float,
    r: int,
    box_bound: float | None = None,
    tol: float = 1e-6,
    max_iter: int = 5000,
    theta_init: np.ndarray | None = None,
    gamma_init: np.ndarray | None = None,
    inner_tol: float = 1e-7,
    inner_max_iter: int = 10000,
) -> Stage1Fit:
    """Alternating minimization of the rank-constrained calibration objective.

    Each iteration updates the sparse coefficient rows by Lasso on Y - Theta,
    then the hyperplane by hard rank-r truncation of Y - X Gamma'; the box
    bound, when given, clips the truncated hyperplane entrywise. Stops when
    the objective change falls below tol.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n, q = Y.shape
    if X.shape[0] != n:
        raise ValueError("X and Y row counts differ")
    if not 0 < r <= min(n, q):
        raise ValueError(f"rank budget {r} out of range for {n}x{q}")
    check_centered(X, "X")
    check_centered(Y, "Y")

    theta = np.zeros((n, q)) if theta_init is None else np.array(theta_init, dtype=float)
    if theta.shape != (n, q):
        raise ValueError(f"theta_init has shape {theta.shape}, expected {(n, q)}")
    gamma = np.zeros((q, X.shape[1])) if gamma_init is None else np.array(gamma_init, dtype=float)

    trace = [stage1_objective(X, Y, theta, gamma, lambda_gamma)]
    converged = False
    iterations = 0
    for m in range(1, max_iter + 1):
        gamma, _, _ = lasso_multi(
            X, Y - theta, lambda_gamma, tol=inner_tol, max_iter=inner_max_iter, beta0=gamma
        )
        theta = truncate_rank(Y - X @ gamma.T, r)
        if box_bound is not None:
            np.clip(theta, -box_bound, box_bound, out=theta)
        trace.append(stage1_objective(X, Y, theta, gamma, lambda_gamma))
        iterations = m
        if abs(trace[-1] - trace[-2]) < tol:
            converged = True
            break
    return Stage1Fit(
        theta_hat=theta,
        gamma_hat=gamma,
        objective_trace=np.array(trace),
        iterations=iterations,
        converged=converged,
        lambda_gamma=float(lambda_gamma),
        r=int(r),
    )


def extract_factors(theta_hat: np.ndarray, p1: int, cond_limit: float = 1e10) -> FactorExtract:
    """Principal-component factor extraction normalized so the top loading block is I.

    From the top-p1 SVD, F_pc = sqrt(n) U and L_pc = V D / sqrt(n); the factors
    and loadings are then rotated by the inverse of the upper p1 x p1 loading
    block so the identification restriction holds exactly.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    n = theta_hat.shape[0]
    U, D, V = truncated_svd(theta_hat, p1)
    f_pc = np.sqrt(n) * U
    l_pc = V * (D / np.sqrt(n))
    l1 = l_pc[:p1, :]
    if np.linalg.cond(l1) > cond_limit:
        raise IdentificationError(
            "upper loading block is numerically singular; factors not identifiable"
        )
    f_hat = f_pc @ l1.T
    lambda_hat = l_pc @ np.linalg.inv(l1)
    # the top block equals I analytically; enforce it bit-exactly
    lambda_hat[:p1, :] = np.eye(p1)
    return FactorExtract(f_hat=f_hat, lambda_hat=lambda_hat)


def build_var_design(Z: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Responses t = d+1..n and the lagged design [Z_{t-1}, ..., Z_{t-d}]."""
    n = Z.shape[0]
    if n <= d:
        raise ValueError("sample too short for the requested lag order")
    response = Z[d:]
    design = np.hstack([Z[d - k : n - k] for k in range(1, d + 1)])
    return design, response


def stage2_fit(
    f_hat: np.ndarray,
    X: np.ndarray,
    d: int,
    lambda_a: float,
    tol: float = 1e-7,
    max_iter: int = 10000,
    beta0: np.ndarray | None = None,
) -> Stage2Fit:
    """Row-wise Lasso VAR(d) on the augmented series Z = [f_hat, X]."""
    Z = np.hstack([np.asarray(f_hat, dtype=float), np.asarray(X, dtype=float)])
    p = Z.shape[1]
    design, response = build_var_design(Z, d)
    B, _, converged = lasso_multi(
        design, response, lambda_a, tol=tol, max_iter=max_iter, beta0=beta0
    )
    a_hat = tuple(B[:, k * p : (k + 1) * p] for k in range(d))
    return Stage2Fit(
        a_hat=a_hat, per_row_convergence=converged, lambda_a=float(lambda_a), d=d
    )


def stage2_kkt_residuals(fit: Stage2Fit, f_hat: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Per-row stationarity residuals of a fitted VAR, for diagnostics."""
    Z = np.hstack([np.asarray(f_hat, dtype=float), np.asarray(X, dtype=float)])
    design, response = build_var_design(Z, fit.d)
    B = np.hstack(fit.a_hat)
    return np.array(
        [kkt_residual(design, response[:, i], B[i], fit.lambda_a) for i in range(B.shape[0])]
    )
