"""Numerical kernels: Lasso coordinate descent and hard-rank SVD truncation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numba import njit


@dataclass(frozen=True)
class LassoSolution:
    beta: np.ndarray
    objective: float
    iterations: int
    converged: bool


@njit(cache=True)
def _cd_sweeps(G, C, B, BG, lam, tol, max_sweeps):  # pragma: no cover - jitted
    """Cyclic coordinate descent on k independent rows sharing Gram matrix G.

    G = X'X/n (p x p), C = Y'X/n (k x p). B (k x p) is updated in place, as is
    BG = B @ G. Each row stops independently once its largest per-sweep
    coefficient change drops below tol, so results are identical to running
    the rows one at a time.
    """
    k, p = B.shape
    active = np.ones(k, np.bool_)
    sweeps = np.zeros(k, np.int64)
    n_active = k
    for _ in range(max_sweeps):
        if n_active == 0:
            break
        row_delta = np.zeros(k)
        for j in range(p):
            gjj = G[j, j]
            if gjj <= 0.0:
                continue
            for i in range(k):
                if not active[i]:
                    continue
                rho = C[i, j] - BG[i, j] + B[i, j] * gjj
                if rho > lam:
                    bnew = (rho - lam) / gjj
                elif rho < -lam:
                    bnew = (rho + lam) / gjj
                else:
                    bnew = 0.0
                delta = bnew - B[i, j]
                if delta != 0.0:
                    B[i, j] = bnew
                    for l in range(p):
                        BG[i, l] += delta * G[j, l]
                    if abs(delta) > row_delta[i]:
                        row_delta[i] = abs(delta)
        for i in range(k):
            if active[i]:
                sweeps[i] += 1
                if row_delta[i] < tol:
                    active[i] = False
                    n_active -= 1
    return sweeps, ~active


def lasso_multi(
    X: np.ndarray,
    Y: np.ndarray,
    lam: float,
    tol: float = 1e-7,
    max_iter: int = 10000,
    beta0: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solve min (1/2n)||y_i - X b_i||^2 + lam ||b_i||_1 for every column y_i of Y.

    Returns (B, sweeps, converged) with one row of B per column of Y.
    """
    X = np.ascontiguousarray(X, dtype=float)
    Y = np.ascontiguousarray(Y, dtype=float)
    n, p = X.shape
    k = Y.shape[1]
    if Y.shape[0] != n:
        raise ValueError("X and Y row counts differ")
    if lam < 0:
        raise ValueError("penalty must be nonnegative")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise ValueError("non-finite inputs")
    G = np.ascontiguousarray(X.T @ X / n)
    # per-row products keep the arithmetic identical whether the rows are
    # solved jointly or one at a time
    C = np.ascontiguousarray(np.stack([Y[:, i] @ X for i in range(k)]) / n)
    if beta0 is None:
        B = np.zeros((k, p))
        BG = np.zeros((k, p))
    else:
        B = np.ascontiguousarray(np.array(beta0, dtype=float))
        if B.shape != (k, p):
            raise ValueError(f"warm start has shape {B.shape}, expected {(k, p)}")
        BG = np.ascontiguousarray(np.stack([B[i] @ G for i in range(k)]))
    sweeps, converged = _cd_sweeps(G, C, B, BG, float(lam), float(tol), int(max_iter))
    return B, sweeps, converged


def lasso_objective(X: np.ndarray, y: np.ndarray, beta: np.ndarray, lam: float) -> float:
    n = X.shape[0]
    resid = y - X @ beta
    return float(resid @ resid / (2 * n) + lam * np.abs(beta).sum())


def kkt_residual(X: np.ndarray, y: np.ndarray, beta: np.ndarray, lam: float) -> float:
    """Worst-case violation of the Lasso stationarity conditions at beta."""
    n = X.shape[0]
    grad = X.T @ (y - X @ beta) / n
    active = beta != 0
    viol_active = np.abs(grad[active] - lam * np.sign(beta[active]))
    viol_inactive = np.maximum(np.abs(grad[~active]) - lam, 0.0)
    parts = np.concatenate([viol_active, viol_inactive])
    return float(parts.max()) if parts.size else 0.0


def lasso_row(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    tol: float = 1e-7,
    max_iter: int = 10000,
    beta0: np.ndarray | None = None,
) -> LassoSolution:
    """Single-response Lasso via cyclic coordinate descent."""
    y = np.asarray(y, dtype=float).reshape(-1)
    warm = None if beta0 is None else np.asarray(beta0, dtype=float).reshape(1, -1)
    B, sweeps, converged = lasso_multi(X, y[:, None], lam, tol=tol, max_iter=max_iter, beta0=warm)
    beta = B[0]
    return LassoSolution(
        beta=beta,
        objective=lasso_objective(X, y, beta, lam),
        iterations=int(sweeps[0]),
        converged=bool(converged[0]),
    )


def truncated_svd(M: np.ndarray, r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-r SVD: returns (U, D, V) with M ~ U @ diag(D) @ V.T.

    For small r the leading subspace comes from a symmetric eigendecomposition
    of the smaller Gram matrix, which is several times faster than a full SVD;
    near-rank-deficient inputs fall back to the full decomposition.
    """
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("SVD input contains non-finite entries")
    if not 0 < r <= min(M.shape):
        raise ValueError(f"rank {r} out of range for shape {M.shape}")
    n, q = M.shape
    m = min(n, q)
    if r <= m // 2:
        G = M.T @ M if q <= n else M @ M.T
        k = G.shape[0]
        w, W = scipy.linalg.eigh(G, subset_by_index=(k - r, k - 1))
        s = np.sqrt(np.maximum(w[::-1], 0.0))
        W = W[:, ::-1]
        if s[-1] > 1e-10 * max(s[0], 1e-300):
            if q <= n:
                return (M @ W) / s, s, W
            return W, s, (M.T @ W) / s
    U, s, Vt = scipy.linalg.svd(M, full_matrices=False, lapack_driver="gesdd")
    return U[:, :r], s[:r], Vt[:r].T


def truncate_rank(M: np.ndarray, r: int) -> np.ndarray:
    """Best rank-r approximation in Frobenius norm (hard singular-value truncation)."""
    M = np.asarray(M, dtype=float)
    if not 0 <= r <= min(M.shape):
        raise ValueError(f"rank {r} out of range for shape {M.shape}")
    if r == 0:
        return np.zeros_like(M)
    U, D, V = truncated_svd(M, r)
    return (U * D) @ V.T
