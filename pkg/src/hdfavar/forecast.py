"""h-step forecasting of the observed block, random-walk benchmark, error measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ForecastResult:
    horizon: int
    x_hat: np.ndarray
    x_bench: np.ndarray
    rel_err: float
    rel_err_ratio: float
    excluded: int = 0


def forecast_favar(
    z_history: np.ndarray,
    a_hat: list[np.ndarray] | tuple[np.ndarray, ...],
    h: int,
    p2: int,
    means: np.ndarray | None = None,
) -> np.ndarray:
    """Iterate the fitted VAR(d) h steps ahead and return the de-centered X sub-block.

    z_history rows are centered (f_hat, x) samples ending at the forecast
    origin; unavailable lags at horizons k > 1 are filled with earlier
    forecasts.
    """
    z_history = np.asarray(z_history, dtype=float)
    d = len(a_hat)
    if h < 1:
        raise ValueError("horizon must be >= 1")
    if z_history.shape[0] < d:
        raise ValueError(f"need at least {d} rows of history")
    p = z_history.shape[1]
    buf = [z_history[-(i + 1)] for i in range(d)]  # buf[0] = most recent
    z_next = None
    for _ in range(h):
        z_next = np.zeros(p)
        for i, a in enumerate(a_hat):
            z_next += a @ buf[i]
        buf = [z_next] + buf[: d - 1]
    x_part = z_next[p - p2 :]
    if means is not None:
        x_part = x_part + np.asarray(means, dtype=float)
    return x_part


def forecast_benchmark(x_history: np.ndarray, h: int) -> np.ndarray:
    """Centered-random-walk point forecast: the last observed row, for any horizon."""
    x_history = np.asarray(x_history, dtype=float)
    if x_history.size == 0:
        raise ValueError("empty history")
    if x_history.ndim == 1:
        return x_history.copy()
    return x_history[-1].copy()


def forecast_metrics(
    x_hat: np.ndarray,
    x_bench: np.ndarray,
    x_true: np.ndarray,
    eps: float = 1e-12,
) -> tuple[float, float, int]:
    """Squared l2 relative error and the benchmark-normalized mean absolute relative error.

    Coordinates with |x_true| < eps are excluded from both means of the ratio;
    the exclusion count is returned.
    """
    x_hat = np.asarray(x_hat, dtype=float)
    x_bench = np.asarray(x_bench, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if not x_hat.shape == x_bench.shape == x_true.shape:
        raise ValueError("forecast vectors must have identical shapes")
    denom = float(x_true @ x_true)
    if denom <= 0:
        raise ValueError("zero true vector: relative error undefined")
    rel_err = float(np.sum((x_hat - x_true) ** 2)) / denom

    keep = np.abs(x_true) >= eps
    excluded = int(np.sum(~keep))
    if not np.any(keep):
        raise ValueError("all true coordinates below eps: ratio undefined")
    num = np.mean(np.abs((x_hat[keep] - x_true[keep]) / x_true[keep]))
    den = np.mean(np.abs((x_bench[keep] - x_true[keep]) / x_true[keep]))
    if den == 0:
        raise ValueError("benchmark mean absolute relative error is zero")
    return rel_err, float(num / den), excluded


def evaluate_forecast(
    z_history: np.ndarray,
    a_hat,
    h: int,
    p2: int,
    x_history_raw: np.ndarray,
    x_true: np.ndarray,
    means: np.ndarray | None = None,
) -> ForecastResult:
    """Produce the model and benchmark forecasts at horizon h and score both."""
    x_hat = forecast_favar(z_history, a_hat, h, p2, means=means)
    x_bench = forecast_benchmark(x_history_raw, h)
    rel_err, ratio, excluded = forecast_metrics(x_hat, x_bench, x_true)
    return ForecastResult(
        horizon=h, x_hat=x_hat, x_bench=x_bench,
        rel_err=rel_err, rel_err_ratio=ratio, excluded=excluded,
    )
