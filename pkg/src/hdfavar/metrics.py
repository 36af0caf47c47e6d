"""Estimation-quality metrics: support recovery and relative Frobenius errors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SupportMetrics:
    tp: int
    fp: int
    tn: int
    fn: int
    sen: float
    spc: float


def support_metrics(estimate: np.ndarray, truth: np.ndarray, zero_tol: float = 0.0) -> SupportMetrics:
    """Sensitivity and specificity of nonzero-pattern recovery.

    An entry counts as nonzero iff its magnitude exceeds zero_tol. SEN or SPC
    is reported as 1.0 when its denominator is empty.
    """
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise ValueError(f"shape mismatch {estimate.shape} vs {truth.shape}")
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")
    est_nz = np.abs(estimate) > zero_tol
    true_nz = np.abs(truth) > zero_tol
    tp = int(np.sum(est_nz & true_nz))
    fp = int(np.sum(est_nz & ~true_nz))
    tn = int(np.sum(~est_nz & ~true_nz))
    fn = int(np.sum(~est_nz & true_nz))
    sen = tp / (tp + fn) if tp + fn > 0 else 1.0
    spc = tn / (tn + fp) if tn + fp > 0 else 1.0
    return SupportMetrics(tp=tp, fp=fp, tn=tn, fn=fn, sen=sen, spc=spc)


def rel_frob_err(estimate: np.ndarray, truth: np.ndarray) -> float:
    """Frobenius norm of the error over the Frobenius norm of the truth."""
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise ValueError(f"shape mismatch {estimate.shape} vs {truth.shape}")
    denom = np.linalg.norm(truth)
    if denom == 0:
        raise ValueError("zero truth matrix: relative error undefined")
    return float(np.linalg.norm(estimate - truth) / denom)


def factor_errors(
    f_hat: np.ndarray,
    lambda_hat: np.ndarray,
    f_true: np.ndarray,
    lambda_true: np.ndarray,
) -> tuple[float, float]:
    """Relative errors of factors and loadings, compared directly.

    Both sides are assumed normalized with an identity upper loading block,
    which pins the rotation; no alignment is performed.
    """
    return rel_frob_err(f_hat, f_true), rel_frob_err(lambda_hat, lambda_true)
