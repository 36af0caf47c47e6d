"""Panel ingestion, stationarity transforms, result bundles, network export."""

from __future__ import annotations

import json
import pathlib
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .core import TimeSeriesPanel
from .estimate import FactorExtract, Stage1Fit, Stage2Fit

VALID_TCODES = frozenset(range(1, 8))


@dataclass(frozen=True)
class TransformSpec:
    """Per-series stationarity transform codes (1..7); default applies to unlisted series."""

    codes: dict = field(default_factory=dict)
    default: int = 1

    def __post_init__(self):
        for name, code in self.codes.items():
            if code not in VALID_TCODES:
                raise ValueError(f"invalid tCode {code} for series {name!r}")
        if self.default not in VALID_TCODES:
            raise ValueError(f"invalid default tCode {self.default}")

    def code_for(self, name: str) -> int:
        return self.codes.get(name, self.default)


def apply_tcode(series: np.ndarray, code: int) -> np.ndarray:
    """Transform one series: levels, differences, logs, log-differences, ratio changes.

    Output lengths for codes 1..7 are n, n-1, n-2, n, n-1, n-2, n-2.
    """
    x = np.asarray(series, dtype=float)
    if code not in VALID_TCODES:
        raise ValueError(f"invalid tCode {code}")
    if code == 1:
        return x.copy()
    if code == 2:
        return np.diff(x)
    if code == 3:
        return np.diff(x, 2)
    if code in (4, 5, 6):
        if np.any(x <= 0):
            raise ValueError(f"tCode {code} needs a strictly positive series")
        lx = np.log(x)
        return lx if code == 4 else np.diff(lx, code - 4)
    # code 7: difference of the gross growth rate minus one
    if np.any(x[:-1] == 0):
        raise ValueError("tCode 7 hit a zero denominator")
    return np.diff(x[1:] / x[:-1] - 1.0)


def _parse_dates(raw: pd.Series) -> pd.DatetimeIndex:
    try:
        return pd.DatetimeIndex(pd.to_datetime(raw, format="mixed"))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"unparseable dates in first column: {exc}") from exc


def load_panel(
    path,
    transform: TransformSpec | None = None,
    window: tuple[str, str] | None = None,
) -> TimeSeriesPanel:
    """Read a dated CSV, slice the window, transform each series, and row-align.

    The first column must hold dates (ISO YYYY-MM or YYYY-MM-DD); remaining
    columns are numeric series. Missing values are a hard error. Series are
    trimmed at the front to the shortest post-transform length.
    """
    frame = pd.read_csv(path)
    if frame.shape[1] < 2:
        raise ValueError("panel CSV needs a date column plus at least one series")
    dates = _parse_dates(frame.iloc[:, 0])
    data = frame.iloc[:, 1:]
    if data.isna().any().any():
        cells = [
            f"({dates[i].date()}, {col})"
            for col in data.columns
            for i in np.nonzero(data[col].isna().to_numpy())[0][:3]
        ]
        raise ValueError(f"missing values at {', '.join(cells[:10])}")
    if window is not None:
        start, end = (pd.to_datetime(w) for w in window)
        keep = (dates >= start) & (dates <= end)
        if not keep.any():
            raise ValueError(f"window {window} contains no observations")
        data = data.loc[np.asarray(keep)]
    transform = transform or TransformSpec()
    series = {
        col: apply_tcode(data[col].to_numpy(dtype=float), transform.code_for(col))
        for col in data.columns
    }
    min_len = min(len(v) for v in series.values())
    aligned = np.column_stack([v[len(v) - min_len :] for v in series.values()])
    return TimeSeriesPanel(values=aligned, labels=list(data.columns))


def panel_to_csv(panel: TimeSeriesPanel, path, dates=None) -> None:
    frame = pd.DataFrame(panel.values, columns=panel.labels)
    if dates is not None:
        frame.insert(0, "date", list(dates))
    frame.to_csv(path, index=False)


def export_network(
    a_hat: np.ndarray, labels: list[str], threshold: float = 0.0
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Edge list of a transition matrix: column j drives row i under z_t = A z_{t-1}.

    Returns (edges, nodes) where edges has source/target/weight/sign and nodes
    carries weighted degrees for sizing.
    """
    a_hat = np.asarray(a_hat, dtype=float)
    if a_hat.ndim != 2 or a_hat.shape[0] != a_hat.shape[1]:
        raise ValueError("transition matrix must be square")
    if len(labels) != a_hat.shape[0]:
        raise ValueError("one label per node required")
    rows = []
    for i in range(a_hat.shape[0]):
        for j in range(a_hat.shape[1]):
            w = a_hat[i, j]
            if abs(w) > threshold:
                rows.append(
                    {"source": labels[j], "target": labels[i],
                     "weight": w, "sign": "positive" if w > 0 else "negative"}
                )
    edges = pd.DataFrame(rows, columns=["source", "target", "weight", "sign"])
    degree = np.abs(a_hat).sum(axis=0) + np.abs(a_hat).sum(axis=1) - np.abs(np.diag(a_hat))
    nodes = pd.DataFrame({"node": labels, "weighted_degree": degree})
    return edges, nodes


# ---------------------------------------------------------------------------
# Fit bundles


def save_fit(
    outdir,
    stage1: Stage1Fit,
    extract: FactorExtract,
    stage2: Stage2Fit,
    x_means: np.ndarray,
    x_labels: list[str],
) -> None:
    """Write a fit as CSV matrices plus a metadata file."""
    out = pathlib.Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "theta_hat.csv", stage1.theta_hat, delimiter=",")
    np.savetxt(out / "gamma_hat.csv", stage1.gamma_hat, delimiter=",")
    np.savetxt(out / "f_hat.csv", extract.f_hat, delimiter=",")
    np.savetxt(out / "lambda_hat.csv", extract.lambda_hat, delimiter=",")
    for k, a in enumerate(stage2.a_hat, start=1):
        np.savetxt(out / f"a_hat_lag{k}.csv", a, delimiter=",")
    np.savetxt(out / "x_means.csv", np.atleast_1d(x_means), delimiter=",")
    meta = {
        "lambda_gamma": stage1.lambda_gamma,
        "r": stage1.r,
        "stage1_converged": stage1.converged,
        "stage1_iterations": stage1.iterations,
        "lambda_a": stage2.lambda_a,
        "d": stage2.d,
        "x_labels": list(x_labels),
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2))


def load_fit(indir) -> dict:
    """Read back a fit bundle written by save_fit."""
    src = pathlib.Path(indir)
    meta = json.loads((src / "meta.json").read_text())
    load = lambda name: np.atleast_2d(np.loadtxt(src / name, delimiter=","))
    bundle = {
        "meta": meta,
        "theta_hat": load("theta_hat.csv"),
        "gamma_hat": load("gamma_hat.csv"),
        "f_hat": load("f_hat.csv"),
        "lambda_hat": load("lambda_hat.csv"),
        "x_means": np.atleast_1d(np.loadtxt(src / "x_means.csv", delimiter=",")),
        "a_hat": [load(f"a_hat_lag{k}.csv") for k in range(1, meta["d"] + 1)],
    }
    return bundle


# ---------------------------------------------------------------------------
# Run configuration


@dataclass(frozen=True)
class RunConfig:
    """End-to-end run description loaded from a JSON config file."""

    x_path: str
    y_path: str
    d: int = 1
    x_tcodes: TransformSpec = field(default_factory=TransformSpec)
    y_tcodes: TransformSpec = field(default_factory=TransformSpec)
    windows: tuple[tuple[str, str], ...] = ()
    num_lambda: int = 12
    lambda_min_ratio: float = 0.01
    max_r: int = 12
    outdir: str = "out"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("lag order must be >= 1")
        windows = tuple(tuple(w) for w in self.windows)
        prev_end = None
        for start, end in windows:
            s, e = pd.to_datetime(start), pd.to_datetime(end)
            if e < s:
                raise ValueError(f"window ({start}, {end}) ends before it starts")
            if prev_end is not None and s <= prev_end:
                raise ValueError("windows must be non-overlapping and chronological")
            prev_end = e
        object.__setattr__(self, "windows", windows)


def load_run_config(path) -> RunConfig:
    raw = json.loads(pathlib.Path(path).read_text())
    for key in ("x_tcodes", "y_tcodes"):
        if key in raw:
            raw[key] = TransformSpec(
                codes=raw[key].get("codes", {}), default=raw[key].get("default", 1)
            )
    if "windows" in raw:
        raw["windows"] = tuple(tuple(w) for w in raw["windows"])
    return RunConfig(**raw)
