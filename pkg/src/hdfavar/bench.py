"""Monte-Carlo driver: synthetic-setting benchmarks and the initializer-sensitivity study."""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .core import TimeSeriesPanel, center_columns
from .estimate import extract_factors, stage1_fit
from .forecast import evaluate_forecast
from .metrics import rel_frob_err, support_metrics
from .select import SelectionGrid, default_grid, select_stage1, select_stage2
from .simulate import SimConfig, simulate_system, uniform_density


def _densities(d: int, *rows) -> tuple[dict, ...]:
    out = []
    for row in rows:
        s11, s12, s21, s22 = row
        out.append({"11": s11, "12": s12, "21": s21, "22": s22})
    assert len(out) == d
    return tuple(out)


def setting_config(setting: str, seed: int = 0) -> SimConfig:
    """SimConfig for one of the named synthetic settings A1..C4."""
    def mk(d, q, p1, p2, dens, snr, **kw):
        return SimConfig(
            d=d, q=q, p1=p1, p2=p2, a_densities=dens,
            gamma_density=5 / p2, snr=snr, seed=seed, **kw
        )

    configs = {
        "A1": lambda: mk(1, 100, 5, 50, uniform_density(1, 3 / 55), 1.5),
        "A2": lambda: mk(1, 200, 10, 100, uniform_density(1, 3 / 110), 1.5),
        "A3": lambda: mk(1, 200, 5, 100, _densities(1, (3 / 5, 2 / 100, 2 / 5, 2 / 100)), 1.5),
        "A4": lambda: mk(1, 300, 5, 500, _densities(1, (3 / 5, 2 / 500, 0.8, 2 / 500)), 1.5),
        "B1": lambda: mk(2, 200, 5, 100,
                         uniform_density(1, 3 / 105) + uniform_density(1, 2 / 105), 2.0),
        "B2": lambda: mk(4, 200, 5, 100,
                         _densities(4, (0.5, 3 / 100, 0.5, 3 / 100),
                                    (0.2, 2 / 100, 0.25, 2 / 100),
                                    (2 / 105,) * 4, (2 / 105,) * 4), 2.0),
        "B3": lambda: mk(4, 100, 5, 25,
                         _densities(4, (0.5, 2 / 25, 0.5, 2 / 25),
                                    (0.2, 1.5 / 25, 0.1, 1.5 / 25),
                                    (1 / 30,) * 4, (0.8 / 30,) * 4), 2.0),
    }
    configs["C1"] = lambda: replace(configs["A1"](), noise_family="student_t", t_dof=4.0)
    configs["C2"] = lambda: replace(configs["B1"](), noise_family="student_t", t_dof=8.0)
    configs["C3"] = lambda: replace(configs["B2"](), noise_family="sub_exponential")
    configs["C4"] = lambda: replace(configs["B2"](), noise_family="sub_exponential", n=500)
    if setting not in configs:
        raise KeyError(f"unknown setting {setting!r}; known: {sorted(configs)}")
    return configs[setting]()


def setting_horizons(setting: str) -> tuple[int, ...]:
    return (1,) if setting in ("A1", "A2", "A3", "A4", "C1") else (1, 2)


@dataclass(frozen=True)
class BenchSpec:
    setting: str | SimConfig
    replications: int = 50
    seed: int = 0
    num_lambda: int = 20
    lambda_min_ratio: float = 0.01
    # the stage-2 grid reaches lower: in the underdetermined many-lag settings
    # the BIC argmin sits far below 0.01 * lambda_max and clipping the grid
    # there silently censors the criterion's own preference
    lambda_a_min_ratio: float = 0.001
    max_r: int = 12
    horizons: tuple[int, ...] | None = None
    stage1_tol: float = 1e-6
    stage1_score_tol: float = 1e-3
    # support floor for Gamma only: its true nonzero magnitudes are >= 1.2 by
    # construction, so entries below 0.05 are shrinkage debris, not support
    gamma_support_tol: float = 0.05
    stage1_max_iter: int = 5000
    threads: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if self.horizons is not None:
            object.__setattr__(self, "horizons", tuple(self.horizons))

    def config(self) -> SimConfig:
        if isinstance(self.setting, SimConfig):
            return self.setting
        return setting_config(self.setting, seed=self.seed)

    def effective_horizons(self) -> tuple[int, ...]:
        if self.horizons is not None:
            return self.horizons
        if isinstance(self.setting, str):
            return setting_horizons(self.setting)
        return (1,)


@dataclass(frozen=True)
class BenchReport:
    spec: BenchSpec
    records: pd.DataFrame
    failures: tuple[dict, ...]

    def table_calibration(self) -> pd.DataFrame:
        cols = ["r_selected", "err_theta", "err_f", "err_lambda",
                "sen_gamma", "spc_gamma", "err_gamma"]
        return _mean_sd(self.records, cols)

    def table_var(self) -> pd.DataFrame:
        d = self.spec.config().d
        rows = []
        for k in range(1, d + 1):
            cols = [f"sen_a{k}", f"spc_a{k}", f"err_a{k}",
                    f"sen_a22_{k}", f"spc_a22_{k}", f"err_a22_{k}"]
            tab = _mean_sd(self.records, cols)
            tab.insert(0, "lag", k)
            rows.append(tab)
        return pd.concat(rows, ignore_index=True)

    def table_forecast(self) -> pd.DataFrame:
        rows = []
        for h in self.spec.effective_horizons():
            tab = _mean_sd(self.records, [f"rel_err_h{h}", f"ratio_h{h}"])
            tab.insert(0, "horizon", h)
            rows.append(tab)
        return pd.concat(rows, ignore_index=True)

    def write(self, outdir) -> None:
        import pathlib

        out = pathlib.Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        self.records.to_csv(out / "replications.csv", index=False)
        self.table_calibration().to_csv(out / "table_calibration.csv", index=False)
        self.table_var().to_csv(out / "table_var.csv", index=False)
        self.table_forecast().to_csv(out / "table_forecast.csv", index=False)
        manifest = {
            "setting": self.spec.setting if isinstance(self.spec.setting, str) else "custom",
            "replications": self.spec.replications,
            "seed": self.spec.seed,
            "failures": len(self.failures),
        }
        pd.Series(manifest).to_csv(out / "manifest.csv", header=False)


def _mean_sd(records: pd.DataFrame, cols: list[str]) -> pd.DataFrame:
    data = {}
    for c in cols:
        data[f"{c}_mean"] = [records[c].mean()]
        data[f"{c}_sd"] = [records[c].std(ddof=1) if len(records) > 1 else 0.0]
    return pd.DataFrame(data)


def _pad_factor_block(mat: np.ndarray, p1: int) -> np.ndarray:
    """Pad an n x k factor-style matrix with zero columns up to k = p1."""
    k = mat.shape[1]
    if k >= p1:
        return mat[:, :p1]
    return np.hstack([mat, np.zeros((mat.shape[0], p1 - k))])


def _embed_transition(a: np.ndarray, k: int, p1: int, p2: int) -> np.ndarray:
    """Embed a (k+p2)-dim transition matrix into (p1+p2) dims, zeros for absent factors."""
    if k == p1:
        return a
    out = np.zeros((p1 + p2, p1 + p2))
    keep = min(k, p1)
    idx = np.concatenate([np.arange(keep), p1 + np.arange(p2)])
    src = np.concatenate([np.arange(keep), k + np.arange(p2)])
    out[np.ix_(idx, idx)] = a[np.ix_(src, src)]
    return out


def run_replication(spec: BenchSpec, rep: int) -> dict:
    """Simulate one system, run the full two-stage pipeline, score everything."""
    cfg = spec.config()
    horizons = spec.effective_horizons()
    h_max = max(horizons)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(spec.seed, rep)))
    params, F, X, Y = simulate_system(cfg, n_extra=h_max, rng=rng)
    n, p1, p2 = cfg.n, cfg.p1, cfg.p2

    X_fit = TimeSeriesPanel(values=X.values[:n], labels=X.labels)
    Xc_panel, x_means = center_columns(X_fit)
    Yc_panel, _ = center_columns(Y)
    Xc, Yc = Xc_panel.values, Yc_panel.values
    F_c = F.values[:n] - F.values[:n].mean(axis=0)
    theta_true = F_c @ params.loading.T

    grid = default_grid(
        Xc, Yc, num_lambda=spec.num_lambda,
        min_ratio=spec.lambda_min_ratio, max_r=spec.max_r,
    )
    sel1 = select_stage1(
        Xc, Yc, grid, score_tol=spec.stage1_score_tol,
        tol=spec.stage1_tol, max_iter=spec.stage1_max_iter
    )
    fit1 = sel1.fit
    extract = extract_factors(fit1.theta_hat, fit1.r)
    f_hat, lambda_hat = extract.f_hat, extract.lambda_hat

    rec: dict = {
        "rep": rep,
        "r_selected": fit1.r,
        "lambda_gamma": sel1.lambda_gamma,
        "err_theta": rel_frob_err(fit1.theta_hat, theta_true),
        "err_f": rel_frob_err(_pad_factor_block(f_hat, p1), F_c),
        "err_lambda": rel_frob_err(_pad_factor_block(lambda_hat, p1), params.loading),
    }
    sup_g = support_metrics(fit1.gamma_hat, params.coeff, zero_tol=spec.gamma_support_tol)
    rec.update(
        sen_gamma=sup_g.sen, spc_gamma=sup_g.spc,
        err_gamma=rel_frob_err(fit1.gamma_hat, params.coeff),
    )

    a_grid = default_grid(
        Xc, Yc, f_hat=f_hat, d=cfg.d,
        num_lambda=spec.num_lambda, min_ratio=spec.lambda_a_min_ratio,
    )
    sel2 = select_stage2(f_hat, Xc, cfg.d, a_grid)
    fit2 = sel2.fit
    rec["lambda_a"] = sel2.lambda_a
    k_factors = f_hat.shape[1]
    for lag in range(1, cfg.d + 1):
        a_emb = _embed_transition(fit2.a_hat[lag - 1], k_factors, p1, p2)
        a_true = params.transitions[lag - 1]
        sup = support_metrics(a_emb, a_true)
        rec[f"sen_a{lag}"] = sup.sen
        rec[f"spc_a{lag}"] = sup.spc
        rec[f"err_a{lag}"] = rel_frob_err(a_emb, a_true)
        sup22 = support_metrics(a_emb[p1:, p1:], a_true[p1:, p1:])
        rec[f"sen_a22_{lag}"] = sup22.sen
        rec[f"spc_a22_{lag}"] = sup22.spc
        rec[f"err_a22_{lag}"] = rel_frob_err(a_emb[p1:, p1:], a_true[p1:, p1:])

    z_history = np.hstack([f_hat, Xc])
    for h in horizons:
        result = evaluate_forecast(
            z_history, fit2.a_hat, h, p2,
            x_history_raw=X.values[:n], x_true=X.values[n + h - 1], means=x_means,
        )
        rec[f"rel_err_h{h}"] = result.rel_err
        rec[f"ratio_h{h}"] = result.rel_err_ratio
    return rec


def run_setting(spec: BenchSpec) -> BenchReport:
    """Run all replications of a setting; failed replications are recorded, not dropped silently."""
    records: dict[int, dict] = {}
    failures = []

    def handle(rep, outcome):
        if isinstance(outcome, Exception):
            failures.append({"rep": rep, "error": repr(outcome)})
        else:
            records[rep] = outcome

    reps = range(spec.replications)
    if spec.threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=spec.threads) as pool:
            futures = {rep: pool.submit(run_replication, spec, rep) for rep in reps}
            for rep, fut in futures.items():
                try:
                    handle(rep, fut.result())
                except Exception as exc:  # noqa: BLE001 - per-replication isolation
                    handle(rep, exc)
    else:
        for rep in reps:
            try:
                handle(rep, run_replication(spec, rep))
            except Exception as exc:  # noqa: BLE001
                handle(rep, exc)
    if not records:
        raise RuntimeError(f"every replication failed: {failures}")
    frame = pd.DataFrame([records[rep] for rep in sorted(records)])
    return BenchReport(spec=spec, records=frame, failures=tuple(failures))


# ---------------------------------------------------------------------------
# Initializer-sensitivity study


@dataclass(frozen=True)
class InitStudySpec:
    """i.i.d.-design study of how the Stage-I initializer shapes the optimum."""

    n: int = 200
    p1: int = 5
    p2: int = 50
    q: int = 100
    sigma_e: float = 1.0
    off_diag_corr: float = 0.25
    gamma_density: float | None = None  # None = fully dense
    coef_magnitude: tuple[float, float] = (1.2, 1.5)
    q2_fill: float = 5.0
    # default 0: in the dense regime any positive penalty drags every run along
    # the observational-equivalence directions toward the common minimum-l1
    # model, erasing exactly the initializer dependence the study measures
    lambda_gamma_ratio: float = 0.0
    r: int = 5
    tol: float = 1e-6
    max_iter: int = 5000
    perturb_scale: float = 0.1
    seed: int = 0


def run_init_study(spec: InitStudySpec) -> pd.DataFrame:
    """Fit Stage I from several initializers and report errors to both hyperplanes.

    Columns: initializer, rel_err_true (to the generating hyperplane),
    rel_err_equiv (to the observationally equivalent one), converged, iterations.
    """
    from .select import lambda_gamma_max
    from .simulate import _draw_magnitudes, _draw_sparse_block  # shared draw helpers

    rng = np.random.default_rng(spec.seed)
    p1, p2, q, n = spec.p1, spec.p2, spec.q, spec.n
    dim = p1 + p2
    cov = np.full((dim, dim), spec.off_diag_corr)
    np.fill_diagonal(cov, 1.0)
    joint = rng.multivariate_normal(np.zeros(dim), cov, size=n, method="cholesky")
    Xm, Fm = joint[:, :p2], joint[:, p2:]

    lo, hi = spec.coef_magnitude
    loading = _draw_magnitudes(rng, (q, p1), lo, hi)
    if spec.gamma_density is None:
        gamma = _draw_magnitudes(rng, (q, p2), lo, hi)
    else:
        gamma = _draw_sparse_block(rng, q, p2, spec.gamma_density, lo, hi)
    Ym = Fm @ loading.T + Xm @ gamma.T + spec.sigma_e * rng.standard_normal((n, q))

    Xc = Xm - Xm.mean(axis=0)
    Yc = Ym - Ym.mean(axis=0)
    F_c = Fm - Fm.mean(axis=0)
    theta_true = F_c @ loading.T
    q2 = np.full((p1, p2), spec.q2_fill)
    f_check = F_c - Xc @ q2.T
    theta_check = f_check @ loading.T

    lam = spec.lambda_gamma_ratio * lambda_gamma_max(Xc, Yc)
    inits = {
        "true_theta": theta_true,
        "zero": np.zeros((n, q)),
        "perturbed": theta_true + spec.perturb_scale * rng.standard_normal((n, q)),
        "equivalent_check_theta": theta_check,
    }
    rows = []
    for name, theta0 in inits.items():
        fit = stage1_fit(
            Xc, Yc, lam, spec.r, theta_init=theta0,
            tol=spec.tol, max_iter=spec.max_iter,
        )
        rows.append(
            {
                "initializer": name,
                "rel_err_true": rel_frob_err(fit.theta_hat, theta_true),
                "rel_err_equiv": rel_frob_err(fit.theta_hat, theta_check),
                "converged": fit.converged,
                "iterations": fit.iterations,
            }
        )
    return pd.DataFrame(rows)
