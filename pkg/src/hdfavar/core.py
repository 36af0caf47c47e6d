"""Shared data model: time-series panels, FAVAR parameters, companion form."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class IdentificationError(ValueError):
    """Raised when the loading sub-block needed for factor identification is singular."""


@dataclass(frozen=True)
class TimeSeriesPanel:
    """An n x m panel of observations with one label per series."""

    values: np.ndarray
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"panel values must be 2-d, got shape {values.shape}")
        if values.shape[0] < 2:
            raise ValueError("panel needs at least 2 time points")
        if not np.all(np.isfinite(values)):
            raise ValueError("panel contains non-finite entries")
        object.__setattr__(self, "values", values)
        labels = list(self.labels) if self.labels else [f"s{j}" for j in range(values.shape[1])]
        if len(labels) != values.shape[1]:
            raise ValueError(f"{len(labels)} labels for {values.shape[1]} series")
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class FavarParams:
    """Full generative parameter set of the joint VAR(d) plus calibration equation.

    transitions: d square matrices of size (p1+p2); loading: q x p1; coeff: q x p2.
    Noise covariances are diagonal and stored as standard-deviation vectors.
    """

    d: int
    p1: int
    p2: int
    q: int
    transitions: tuple[np.ndarray, ...]
    loading: np.ndarray
    coeff: np.ndarray
    sigma_wF: np.ndarray
    sigma_wX: np.ndarray
    sigma_e: np.ndarray

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("lag order d must be >= 1")
        p = self.p1 + self.p2
        transitions = tuple(np.asarray(a, dtype=float) for a in self.transitions)
        if len(transitions) != self.d:
            raise ValueError(f"expected {self.d} transition matrices, got {len(transitions)}")
        for a in transitions:
            if a.shape != (p, p):
                raise ValueError(f"transition matrix has shape {a.shape}, expected {(p, p)}")
        object.__setattr__(self, "transitions", transitions)
        loading = np.asarray(self.loading, dtype=float)
        coeff = np.asarray(self.coeff, dtype=float)
        if loading.shape != (self.q, self.p1):
            raise ValueError(f"loading has shape {loading.shape}, expected {(self.q, self.p1)}")
        if coeff.shape != (self.q, self.p2):
            raise ValueError(f"coeff has shape {coeff.shape}, expected {(self.q, self.p2)}")
        object.__setattr__(self, "loading", loading)
        object.__setattr__(self, "coeff", coeff)
        for name, size in (("sigma_wF", self.p1), ("sigma_wX", self.p2), ("sigma_e", self.q)):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if v.shape != (size,):
                raise ValueError(f"{name} has shape {v.shape}, expected ({size},)")
            if np.any(v <= 0):
                raise ValueError(f"{name} must be strictly positive")
            object.__setattr__(self, name, v)

    @property
    def p(self) -> int:
        return self.p1 + self.p2

    def companion(self) -> "CompanionForm":
        return build_companion(list(self.transitions))

    def is_stable(self) -> bool:
        return spectral_radius(self.companion().matrix) < 1.0


@dataclass(frozen=True)
class CompanionForm:
    """VAR(1) lifting of a VAR(d): the dp x dp matrix with [A1 ... Ad] on top."""

    matrix: np.ndarray
    d: int
    p: int


def build_companion(transitions: list[np.ndarray]) -> CompanionForm:
    """Stack d square transition matrices into the VAR(1) companion matrix."""
    mats = [np.asarray(a, dtype=float) for a in transitions]
    if not mats:
        raise ValueError("need at least one transition matrix")
    p = mats[0].shape[0]
    for a in mats:
        if a.ndim != 2 or a.shape != (p, p):
            raise ValueError(f"all transition matrices must be {p}x{p}, got {a.shape}")
    d = len(mats)
    comp = np.zeros((d * p, d * p))
    comp[:p, :] = np.hstack(mats)
    if d > 1:
        comp[p:, : (d - 1) * p] = np.eye((d - 1) * p)
    return CompanionForm(matrix=comp, d=d, p=p)


def spectral_radius(mat: np.ndarray) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"matrix must be square, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("matrix contains non-finite entries")
    if mat.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(mat))))


def center_columns(panel: TimeSeriesPanel) -> tuple[TimeSeriesPanel, np.ndarray]:
    """Subtract column means; returns the centered panel and the means."""
    means = panel.values.mean(axis=0)
    centered = panel.values - means
    return TimeSeriesPanel(values=centered, labels=list(panel.labels)), means


def check_centered(mat: np.ndarray, name: str = "input", rtol: float = 1e-8) -> None:
    """Reject matrices whose column means exceed rtol times the column sd."""
    mat = np.asarray(mat, dtype=float)
    means = np.abs(mat.mean(axis=0))
    sds = mat.std(axis=0)
    scale = np.where(sds > 0, sds, 1.0)
    bad = means > rtol * scale
    if np.any(bad):
        raise ValueError(
            f"{name} is not column-centered (columns {np.nonzero(bad)[0][:5].tolist()}...)"
        )
