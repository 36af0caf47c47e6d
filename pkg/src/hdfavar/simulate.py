"""Synthetic FAVAR systems: sparse stable transitions, factor paths, calibrated panels."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .core import FavarParams, TimeSeriesPanel, build_companion, spectral_radius

NOISE_FAMILIES = ("gaussian", "student_t", "sub_exponential")

# block key -> (row block, col block) of the (p1+p2) transition matrix
_BLOCKS = ("11", "12", "21", "22")


@dataclass(frozen=True)
class SimConfig:
    """Generative configuration for one synthetic setting.

    a_densities: one dict per lag mapping block keys '11','12','21','22' to the
    proportion of nonzero entries of that block.
    """

    d: int
    p1: int
    p2: int
    q: int
    a_densities: tuple[dict, ...]
    gamma_density: float
    snr: float
    target_rho: float = 0.75
    noise_family: str = "gaussian"
    t_dof: float = 4.0
    trans_magnitude: tuple[float, float] = (0.6, 1.0)
    coef_magnitude: tuple[float, float] = (1.2, 1.5)
    n: int = 200
    burn_in: int = 500
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.target_rho < 1:
            raise ValueError("target_rho must lie in (0, 1)")
        if self.snr <= 0:
            raise ValueError("snr must be positive")
        if self.noise_family not in NOISE_FAMILIES:
            raise ValueError(f"unknown noise family {self.noise_family!r}")
        dens = tuple(dict(b) for b in self.a_densities)
        if len(dens) != self.d:
            raise ValueError(f"expected {self.d} density specs, got {len(dens)}")
        for b in dens:
            for key in _BLOCKS:
                if not 0 <= b.get(key, 0.0) <= 1:
                    raise ValueError(f"density for block {key} outside [0,1]")
        object.__setattr__(self, "a_densities", dens)
        if not 0 <= self.gamma_density <= 1:
            raise ValueError("gamma_density outside [0,1]")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        raw = json.loads(text)
        raw["a_densities"] = tuple(raw["a_densities"])
        for key in ("trans_magnitude", "coef_magnitude"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)


def uniform_density(d: int, value: float) -> tuple[dict, ...]:
    """Same nonzero proportion for every block of every lag."""
    return tuple({k: value for k in _BLOCKS} for _ in range(d))


def _draw_magnitudes(rng: np.random.Generator, shape, lo: float, hi: float) -> np.ndarray:
    mag = rng.uniform(lo, hi, size=shape)
    sign = rng.choice([-1.0, 1.0], size=shape)
    return mag * sign


def _draw_sparse_block(rng, rows, cols, density, lo, hi) -> np.ndarray:
    mask = rng.random((rows, cols)) < density
    return np.where(mask, _draw_magnitudes(rng, (rows, cols), lo, hi), 0.0)


def gen_params(cfg: SimConfig, rng: np.random.Generator | None = None, max_retries: int = 10) -> FavarParams:
    """Draw FAVAR parameters with the requested sparsity, rescaled to target_rho.

    The raw lag matrices are assembled into a companion matrix, the scale
    factor zeta = target_rho / rho(raw companion) is computed, and lag i is
    scaled by zeta**i, which sets the companion spectral radius exactly.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    p1, p2 = cfg.p1, cfg.p2
    lo, hi = cfg.trans_magnitude
    for _ in range(max_retries):
        transitions = []
        for lag in range(cfg.d):
            dens = cfg.a_densities[lag]
            a = np.zeros((p1 + p2, p1 + p2))
            a[:p1, :p1] = _draw_sparse_block(rng, p1, p1, dens["11"], lo, hi)
            a[:p1, p1:] = _draw_sparse_block(rng, p1, p2, dens["12"], lo, hi)
            a[p1:, :p1] = _draw_sparse_block(rng, p2, p1, dens["21"], lo, hi)
            a[p1:, p1:] = _draw_sparse_block(rng, p2, p2, dens["22"], lo, hi)
            transitions.append(a)
        rho_raw = spectral_radius(build_companion(transitions).matrix)
        if rho_raw > 0:
            break
    else:
        raise RuntimeError(f"degenerate transition draws in {max_retries} attempts")
    zeta = cfg.target_rho / rho_raw
    transitions = [a * zeta ** (i + 1) for i, a in enumerate(transitions)]

    clo, chi = cfg.coef_magnitude
    loading = np.vstack(
        [np.eye(p1), _draw_magnitudes(rng, (cfg.q - p1, p1), clo, chi)]
    )
    coeff = _draw_sparse_block(rng, cfg.q, p2, cfg.gamma_density, clo, chi)
    return FavarParams(
        d=cfg.d,
        p1=p1,
        p2=p2,
        q=cfg.q,
        transitions=tuple(transitions),
        loading=loading,
        coeff=coeff,
        sigma_wF=np.ones(p1),
        sigma_wX=np.ones(p2),
        sigma_e=np.ones(cfg.q),
    )


def draw_innovations(
    rng: np.random.Generator, shape, family: str, t_dof: float = 4.0
) -> np.ndarray:
    """Unit-variance innovations from one of the supported families."""
    if family == "gaussian":
        return rng.standard_normal(shape)
    if family == "student_t":
        if t_dof <= 2:
            raise ValueError("student_t requires dof > 2 for finite variance")
        return rng.standard_t(t_dof, size=shape) * np.sqrt((t_dof - 2) / t_dof)
    if family == "sub_exponential":
        z = rng.standard_normal(shape)
        return (z**2 - 1.0) / np.sqrt(2.0)
    raise ValueError(f"unknown noise family {family!r}")


def gen_var_path(
    params: FavarParams,
    n: int,
    noise_family: str = "gaussian",
    burn_in: int = 500,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
    t_dof: float = 4.0,
) -> tuple[TimeSeriesPanel, TimeSeriesPanel]:
    """Simulate n post-burn-in samples of the joint (F, X) recursion."""
    if rng is None:
        rng = np.random.default_rng(seed)
    if n < params.d + 1:
        raise ValueError("need at least d+1 samples")
    rho = spectral_radius(params.companion().matrix)
    if rho >= 1:
        raise ValueError(f"unstable parameters (spectral radius {rho:.3f})")
    p, d = params.p, params.d
    sigma = np.concatenate([params.sigma_wF, params.sigma_wX])
    total = burn_in + n
    shocks = draw_innovations(rng, (total, p), noise_family, t_dof) * sigma
    z = np.zeros((total + d, p))
    for t in range(total):
        row = shocks[t].copy()
        for i, a in enumerate(params.transitions):
            row += a @ z[d + t - 1 - i]
        z[d + t] = row
    out = z[d + burn_in :]
    f_labels = [f"F{j + 1}" for j in range(params.p1)]
    x_labels = [f"X{j + 1}" for j in range(params.p2)]
    return (
        TimeSeriesPanel(values=out[:, : params.p1], labels=f_labels),
        TimeSeriesPanel(values=out[:, params.p1 :], labels=x_labels),
    )


def gen_calibration(
    F: TimeSeriesPanel,
    X: TimeSeriesPanel,
    loading: np.ndarray,
    coeff: np.ndarray,
    snr: float,
    noise_family: str = "gaussian",
    rng: np.random.Generator | None = None,
    seed: int | None = None,
    t_dof: float = 4.0,
) -> tuple[TimeSeriesPanel, np.ndarray]:
    """Build Y = loading @ F + coeff @ X + e with noise scaled to the target SNR.

    Per coordinate j, sigma_e[j] = sd(signal_j) / snr, so the coordinate
    average of sd(signal_j) / sigma_e[j] equals snr exactly.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    if F.n != X.n:
        raise ValueError("F and X must be row-aligned")
    signal = F.values @ loading.T + X.values @ coeff.T
    sd = signal.std(axis=0, ddof=1)
    if np.any(sd == 0):
        raise ValueError("zero-variance signal coordinate: SNR undefined")
    sigma_e = sd / snr
    e = draw_innovations(rng, signal.shape, noise_family, t_dof) * sigma_e
    labels = [f"Y{j + 1}" for j in range(signal.shape[1])]
    return TimeSeriesPanel(values=signal + e, labels=labels), sigma_e


def simulate_system(
    cfg: SimConfig, n_extra: int = 0, rng: np.random.Generator | None = None
) -> tuple[FavarParams, TimeSeriesPanel, TimeSeriesPanel, TimeSeriesPanel]:
    """One full draw: parameters, (F, X) path of length n + n_extra, and Y on the first n rows.

    The extra rows hold future values used as forecast ground truth; the
    calibration panel Y covers only the estimation sample.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    params = gen_params(cfg, rng=rng)
    F, X = gen_var_path(
        params, cfg.n + n_extra, cfg.noise_family, cfg.burn_in, rng=rng, t_dof=cfg.t_dof
    )
    F_fit = TimeSeriesPanel(values=F.values[: cfg.n], labels=F.labels)
    X_fit = TimeSeriesPanel(values=X.values[: cfg.n], labels=X.labels)
    Y, sigma_e = gen_calibration(
        F_fit, X_fit, params.loading, params.coeff, cfg.snr, rng=rng
    )
    params = FavarParams(
        d=params.d, p1=params.p1, p2=params.p2, q=params.q,
        transitions=params.transitions, loading=params.loading, coeff=params.coeff,
        sigma_wF=params.sigma_wF, sigma_wX=params.sigma_wX, sigma_e=sigma_e,
    )
    return params, F, X, Y
