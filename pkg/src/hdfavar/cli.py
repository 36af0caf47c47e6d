"""Command-line interface: simulate, fit, select, forecast, bench, init-study."""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np
import pandas as pd

from . import bench as bench_mod
from .core import TimeSeriesPanel, center_columns
from .dataio import (
    load_fit,
    load_panel,
    load_run_config,
    panel_to_csv,
    save_fit,
    export_network,
)
from .estimate import extract_factors
from .forecast import forecast_favar
from .select import default_grid, select_stage1, select_stage2
from .simulate import SimConfig, simulate_system


def _out_dir(arg: str) -> pathlib.Path:
    out = pathlib.Path(arg)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    if args.config:
        cfg = SimConfig.from_json(pathlib.Path(args.config).read_text())
    else:
        cfg = bench_mod.setting_config(args.setting, seed=args.seed or 0)
    if args.seed is not None:
        from dataclasses import replace

        cfg = replace(cfg, seed=args.seed)
    params, F, X, Y = simulate_system(cfg)
    out = _out_dir(args.out)
    dates = pd.date_range("2000-01-01", periods=cfg.n, freq="MS").strftime("%Y-%m")
    panel_to_csv(F, out / "factors.csv", dates=dates[: F.n])
    panel_to_csv(X, out / "observed.csv", dates=dates[: X.n])
    panel_to_csv(Y, out / "informational.csv", dates=dates[: Y.n])
    (out / "sim_config.json").write_text(cfg.to_json())
    print(f"wrote synthetic panels to {out}")
    return 0


def _load_xy(args):
    if args.config:
        rc = load_run_config(args.config)
        window = rc.windows[args.window] if rc.windows else None
        X = load_panel(rc.x_path, rc.x_tcodes, window)
        Y = load_panel(rc.y_path, rc.y_tcodes, window)
        return X, Y, rc
    X = load_panel(args.x)
    Y = load_panel(args.y)
    return X, Y, None


def _align(X: TimeSeriesPanel, Y: TimeSeriesPanel):
    n = min(X.n, Y.n)
    return (
        TimeSeriesPanel(values=X.values[X.n - n :], labels=X.labels),
        TimeSeriesPanel(values=Y.values[Y.n - n :], labels=Y.labels),
    )


def cmd_fit(args) -> int:
    X, Y, rc = _load_xy(args)
    X, Y = _align(X, Y)
    Xc, x_means = center_columns(X)
    Yc, _ = center_columns(Y)
    num_lambda = rc.num_lambda if rc else args.num_lambda
    min_ratio = rc.lambda_min_ratio if rc else args.lambda_min_ratio
    max_r = rc.max_r if rc else args.max_r
    d = rc.d if rc else args.d
    grid = default_grid(Xc.values, Yc.values, num_lambda=num_lambda,
                        min_ratio=min_ratio, max_r=max_r)
    sel1 = select_stage1(Xc.values, Yc.values, grid)
    extract = extract_factors(sel1.fit.theta_hat, sel1.r)
    a_grid = default_grid(Xc.values, Yc.values, f_hat=extract.f_hat, d=d,
                          num_lambda=num_lambda, min_ratio=min_ratio)
    sel2 = select_stage2(extract.f_hat, Xc.values, d, a_grid)
    out = _out_dir(args.out)
    save_fit(out, sel1.fit, extract, sel2.fit, x_means, X.labels)
    pd.DataFrame(sel1.scores).to_csv(out / "stage1_scores.csv", index=False)
    pd.DataFrame(sel2.scores).to_csv(out / "stage2_scores.csv", index=False)
    labels = [f"F{j + 1}" for j in range(extract.f_hat.shape[1])] + X.labels
    for k, a in enumerate(sel2.fit.a_hat, start=1):
        edges, nodes = export_network(a, labels, threshold=args.edge_threshold)
        edges.to_csv(out / f"network_lag{k}_edges.csv", index=False)
        nodes.to_csv(out / f"network_lag{k}_nodes.csv", index=False)
    print(f"selected r={sel1.r}, lambda_gamma={sel1.lambda_gamma:.4g}, "
          f"lambda_a={sel2.lambda_a:.4g}; results in {out}")
    return 0


def cmd_select(args) -> int:
    X, Y, rc = _load_xy(args)
    X, Y = _align(X, Y)
    Xc, _ = center_columns(X)
    Yc, _ = center_columns(Y)
    num_lambda = rc.num_lambda if rc else args.num_lambda
    grid = default_grid(Xc.values, Yc.values, num_lambda=num_lambda,
                        min_ratio=rc.lambda_min_ratio if rc else args.lambda_min_ratio,
                        max_r=rc.max_r if rc else args.max_r)
    sel1 = select_stage1(Xc.values, Yc.values, grid)
    out = _out_dir(args.out)
    pd.DataFrame(sel1.scores).to_csv(out / "stage1_scores.csv", index=False)
    print(f"selected r={sel1.r}, lambda_gamma={sel1.lambda_gamma:.4g}; "
          f"score table in {out / 'stage1_scores.csv'}")
    return 0


def cmd_forecast(args) -> int:
    bundle = load_fit(args.fit)
    f_hat = bundle["f_hat"]
    x_means = bundle["x_means"]
    p2 = len(x_means)
    # reconstruct centered X history from the bundle means and the raw panel
    X = load_panel(args.x)
    Xc = X.values - X.values.mean(axis=0)
    z_history = np.hstack([f_hat, Xc[: f_hat.shape[0]]])
    rows = []
    for h in range(1, args.horizon + 1):
        x_hat = forecast_favar(z_history, bundle["a_hat"], h, p2, means=x_means)
        rows.append({"horizon": h, **dict(zip(bundle["meta"]["x_labels"], x_hat))})
    frame = pd.DataFrame(rows)
    out = _out_dir(args.out)
    frame.to_csv(out / "forecast.csv", index=False)
    print(frame.to_string(index=False))
    return 0


def cmd_bench(args) -> int:
    reps = 10 if args.fast and args.reps is None else (args.reps or 50)
    spec = bench_mod.BenchSpec(
        setting=args.setting, replications=reps,
        seed=0 if args.seed is None else args.seed, threads=args.threads,
    )
    report = bench_mod.run_setting(spec)
    out = _out_dir(args.out)
    report.write(out)
    print(report.table_calibration().to_string(index=False))
    print(report.table_var().to_string(index=False))
    print(report.table_forecast().to_string(index=False))
    if report.failures:
        print(f"{len(report.failures)} replication(s) failed", file=sys.stderr)
    return 0


def cmd_init_study(args) -> int:
    spec = bench_mod.InitStudySpec(
        seed=0 if args.seed is None else args.seed,
        gamma_density=None if args.regime == "dense" else 5 / 50,
        lambda_gamma_ratio=0.0 if args.regime == "dense" else 0.05,
    )
    table = bench_mod.run_init_study(spec)
    out = _out_dir(args.out)
    table.to_csv(out / f"init_study_{args.regime}.csv", index=False)
    print(table.to_string(index=False))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdfavar",
        description="High-dimensional FAVAR estimation, simulation and benchmarking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", default="out")

    p = sub.add_parser("simulate", help="emit synthetic panels")
    p.add_argument("--setting", default="A1")
    p.add_argument("--config", help="SimConfig JSON file")
    common(p)
    p.set_defaults(func=cmd_simulate)

    def fit_args(p):
        p.add_argument("--x", help="observed-block panel CSV")
        p.add_argument("--y", help="informational panel CSV")
        p.add_argument("--config", help="run-config JSON file")
        p.add_argument("--window", type=int, default=0, help="window index from the config")
        p.add_argument("--d", type=int, default=1)
        p.add_argument("--num-lambda", type=int, default=20)
        p.add_argument("--lambda-min-ratio", type=float, default=0.01)
        p.add_argument("--max-r", type=int, default=12)
        common(p)

    p = sub.add_parser("fit", help="end-to-end two-stage fit")
    fit_args(p)
    p.add_argument("--edge-threshold", type=float, default=0.0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select", help="grid search only, emit score tables")
    fit_args(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("forecast", help="h-step forecast from a saved fit")
    p.add_argument("--fit", required=True, help="fit bundle directory")
    p.add_argument("--x", required=True, help="observed-block panel CSV")
    p.add_argument("--horizon", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("bench", help="Monte-Carlo benchmark for a named setting")
    p.add_argument("--setting", default="A1")
    p.add_argument("--reps", type=int)
    p.add_argument("--fast", action="store_true", help="10 replications instead of 50")
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("init-study", help="Stage-I initializer sensitivity study")
    p.add_argument("--regime", choices=["dense", "sparse"], default="dense")
    common(p)
    p.set_defaults(func=cmd_init_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
