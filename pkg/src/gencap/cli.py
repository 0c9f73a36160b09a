"""Command-line harness: ``gencap run <config>`` and ``gencap validate <config>``.

Writes ``<name>.csv`` and ``<name>.manifest.txt`` into the output directory
(``--out``, else ``$GENCAP_OUT_DIR``, else the config's ``output``, else
``./results``).
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path

import numpy as np

from gencap import kernels
from gencap.config import ConfigError, ExperimentConfig, load_config, validate_config
from gencap.correlated import YhApproximator, estimate_elogz_correlated
from gencap.costs import ModelParams
from gencap.errors import CapacityError, DomainError
from gencap.gc import (
    EstimatorSpec,
    componentwise_gibbs,
    estimate_gc,
    noise_draw,
    truth_gibbs_probability,
)

log = logging.getLogger("gencap")

HEADER = ["experiment", "d", "k", "sigma", "n", "method", "r", "m", "crn", "beta", "value", "stderr"]
COMPONENT_HEADER = ["experiment", "d", "k", "sigma", "beta", "component", "mu0", "marginal"]
OUT_ENV = "GENCAP_OUT_DIR"

EXIT_CONFIG = 2
EXIT_CAPACITY = 3


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _params(cfg: ExperimentConfig, d, k, sigma):
    cov = None
    if cfg.experiment == "correlated_elogz" and cfg.correlation != 0.0:
        cov = np.full((d, d), cfg.correlation)
        np.fill_diagonal(cov, 1.0)
    return ModelParams.standard(d, k, sigma, n=cfg.n, covariance=cov)


def _method_label(method, cost):
    return method if cost == "sq" else f"{method}:{cost}"


def run_point(cfg: ExperimentConfig, point, seed: int):
    """Rows for one sweep point: ``(main_rows, component_rows)``."""
    d, k, sigma, method, r, crn, cost = point
    params = _params(cfg, d, k, sigma)
    base = [cfg.experiment, d, k, sigma, cfg.n]
    r_col = None if method == "exhaustive" else r
    if cfg.experiment == "correlated_elogz":
        approx = YhApproximator(cfg.yh)
        rows = []
        for beta in cfg.grid.betas:
            est = estimate_elogz_correlated(params, beta, cfg.m, cfg.p, approx, seed)
            rows.append(base + ["stratified", cfg.p, cfg.m, "", beta, est.value, est.stderr])
        return rows, []

    spec = EstimatorSpec(method=method, r=r, m=cfg.m, crn=crn, master_seed=seed)
    res = estimate_gc(params, cfg.grid, spec, cost)
    label = _method_label(method, cost)
    head = base + [label, r_col, cfg.m, crn]
    if cfg.experiment == "ic_vs_beta":
        se = np.sqrt(res.per_beta_variance / res.n_repetitions)
        return [head + [b, v, s] for b, v, s in zip(res.betas, res.per_beta_mean, se)], []
    if cfg.experiment == "gibbs_marginals":
        xi = noise_draw(params, seed, 0)
        prob = truth_gibbs_probability(res.beta_star, xi, params, cost)
        marg = componentwise_gibbs(res.beta_star, xi, params, cost)
        comps = [[cfg.experiment, d, k, sigma, res.beta_star, j + 1, int(params.mu0[j]), marg[j]]
                 for j in range(d)]
        return [head + [res.beta_star, prob, None]], comps
    return [head + [res.beta_star, res.gc_estimate, res.stderr]], []


def _run_point_task(args):
    return run_point(*args)


def run_experiment(cfg: ExperimentConfig, out_dir: Path, seed: int | None = None,
                   workers: int | None = None, config_path: str = "<memory>"):
    """Run every sweep point, write CSV(s) and a manifest; return the CSV path."""
    seed = cfg.seed if seed is None else seed
    workers = cfg.workers if workers is None else workers
    points = cfg.sweep()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.time()
    # every sweep point shares the master seed: common random numbers across the sweep
    tasks = [(cfg, pt, seed) for pt in points]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_point_task, tasks))
    else:
        results = [_run_point_task(t) for t in tasks]
    wall = time.time() - start

    csv_path = out_dir / f"{cfg.stem}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for rows, _ in results:
            w.writerows([fmt(x) if not isinstance(x, str) else x for x in row] for row in rows)
    if cfg.experiment == "gibbs_marginals":
        with open(out_dir / f"{cfg.stem}.components.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COMPONENT_HEADER)
            for _, comps in results:
                w.writerows([fmt(x) if not isinstance(x, str) else x for x in row] for row in comps)

    with open(out_dir / f"{cfg.stem}.manifest.txt", "w", encoding="utf-8") as fh:
        fh.write("gencap run manifest\n")
        fh.write(f"version: {_version()}\n")
        fh.write(f"kernel_backend: {kernels.BACKEND}\n")
        fh.write(f"config_path: {config_path}\n")
        fh.write(f"master_seed: {seed}\n")
        fh.write(f"workers: {workers}\n")
        fh.write(f"wall_time_seconds: {wall:.3f}\n")
        fh.write("substreams: noise draw j uses SeedSequence(seed, spawn_key=(0, j)); "
                 "hypothesis sample of repetition i uses SeedSequence(seed, spawn_key=(1, i))\n")
        fh.write("[config]\n")
        for line in cfg.source:
            fh.write(f"  {line}\n")
        fh.write("[tasks]\n")
        fh.write("index d k sigma method r crn cost seed\n")
        for i, (d, k, sigma, method, r, crn, cost) in enumerate(points):
            fh.write(f"{i} {d} {'' if k is None else k} {fmt(sigma)} {method} {r} {crn} {cost} {seed}\n")
    log.info("wrote %s (%d sweep points, %.1fs)", csv_path, len(points), wall)
    return csv_path


def _out_dir(args, cfg):
    if args.out:
        return Path(args.out)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    return Path(cfg.output or "results")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gencap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--seed", type=int, help="override the config's master seed (u64)")
    run.add_argument("--workers", type=int, help="worker processes for sweep points")
    run.add_argument("--out", help="output directory")
    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")

    if args.command == "validate":
        try:
            diags = validate_config(args.config)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        for line in diags:
            print(f"{args.config}: {line}")
        return EXIT_CONFIG if diags else 0

    try:
        cfg = load_config(args.config)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        for line in exc.diagnostics:
            print(f"{args.config}: {line}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        path = run_experiment(cfg, _out_dir(args, cfg), seed=args.seed, workers=args.workers,
                              config_path=args.config)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
