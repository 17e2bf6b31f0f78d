"""Command-line interface.

Subcommands: ``fit`` (config-driven model fit), ``simulate`` (replication
studies), ``study`` (marginal density/score tables) and ``energy``
(per-day load-curve fits). Exit codes: 0 success, 2 configuration error,
3 runtime failure.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import build_estimator, load_table_csv, parse_config
from .exceptions import ConfigError, SmoothShrinkError
from .results import write_json, write_results, write_table_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothshrink",
        description="Bayesian penalized splines with shrinkage toward parametric subspaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a model described by a config file")
    p_fit.add_argument("--config", required=True, help="path to the config file")
    p_fit.add_argument("--output", default=None, help="override the output directory")

    p_sim = sub.add_parser("simulate", help="run a replication study")
    p_sim.add_argument("--scenario", required=True, choices=["1", "2", "3"])
    p_sim.add_argument("--paper-scale", action="store_true",
                       help="paper-scale replication counts and chain lengths")
    p_sim.add_argument("--replications", type=int, default=None)
    p_sim.add_argument("--iterations", type=int, default=None)
    p_sim.add_argument("--warmup", type=int, default=None)
    p_sim.add_argument("--sigma", type=float, default=None)
    p_sim.add_argument("--n", type=int, default=100)
    p_sim.add_argument("--jobs", type=int, default=1)
    p_sim.add_argument("--output", default="results")

    p_study = sub.add_parser("study", help="emit marginal density/score tables")
    p_study.add_argument("--rank", default="10,20", help="comma-separated ranks")
    p_study.add_argument("--xi-tilde", default="0.1,1,10", help="comma-separated scales")
    p_study.add_argument("--output", default="results")

    p_energy = sub.add_parser("energy", help="fit daily energy consumption curves")
    p_energy.add_argument("--data", required=True, help="consumption CSV")
    p_energy.add_argument("--iterations", type=int, default=None)
    p_energy.add_argument("--warmup", type=int, default=None)
    p_energy.add_argument("--seed", type=int, default=0)
    p_energy.add_argument("--output", default="results")
    return parser


def _cmd_fit(args) -> int:
    cfg = parse_config(args.config, command="fit")
    if args.output:
        cfg.output = args.output
    table = load_table_csv(cfg.data)
    if cfg.response not in table:
        raise ConfigError(f"response column {cfg.response!r} not in {cfg.data}")
    names = [n for n in table if n != cfg.response]
    x = np.column_stack([table[n] for n in names])
    estimator = build_estimator(cfg, names)
    estimator.fit(x, table[cfg.response])
    manifest = write_results(estimator.result_, cfg.output)
    print(f"fit complete: {len(manifest['files'])} file(s) in {cfg.output}")
    for entry in manifest["files"]:
        print(f"  {entry['name']}  {entry['sha256'][:12]}")
    return EXIT_OK


def _aggregate(rows: list[dict]) -> dict:
    """Median/mean summaries per (null_space, prior) group."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        if "error" in row and row.get("error"):
            continue
        groups.setdefault((row["null_space"], row["prior"]), []).append(row)
    summary = {}
    for (null_space, prior), members in groups.items():
        numeric_keys = [
            k for k in members[0]
            if isinstance(members[0][k], (int, float)) and members[0][k] is not None
            and k not in ("replication",)
        ]
        entry = {}
        for key in numeric_keys:
            values = [m[key] for m in members if m.get(key) is not None]
            if values:
                entry[f"median_{key}"] = float(np.median(values))
                entry[f"mean_{key}"] = float(np.mean(values))
        entry["replications"] = len(members)
        summary[f"{null_space}/{prior}"] = entry
    return summary


def _cmd_simulate(args) -> int:
    from .simulate import PAPER_SCALE, PAPER_SCALE_ADDITIVE, make_scenario, run_scenario

    scenario_id = {"1": "I", "2": "II", "3": "III"}[args.scenario]
    replications = args.replications
    n_iter, warmup = args.iterations, args.warmup
    if args.paper_scale:
        scale = PAPER_SCALE_ADDITIVE if scenario_id == "III" else PAPER_SCALE
        replications = replications or scale["replications"]
        n_iter = n_iter or scale["n_iter"]
        warmup = warmup or scale["warmup"]
    spec = make_scenario(
        scenario_id, sigma=args.sigma, replications=replications, n=args.n
    )
    rows = run_scenario(spec, n_iter=n_iter, warmup=warmup, n_jobs=args.jobs)
    os.makedirs(args.output, exist_ok=True)
    table_path = os.path.join(args.output, f"scenario{args.scenario}.csv")
    write_table_csv(rows, table_path)
    summary = {"scenario": scenario_id, "sigma": spec.sigma, "groups": _aggregate(rows)}
    write_json(summary, os.path.join(args.output, f"scenario{args.scenario}_summary.json"))
    failures = sum(1 for r in rows if r.get("error"))
    print(f"scenario {scenario_id}: {len(rows)} rows ({failures} failed) -> {table_path}")
    return EXIT_OK


def _cmd_study(args) -> int:
    from .study import StudyConfig, emit_study

    try:
        ranks = tuple(int(r) for r in args.rank.split(","))
        scales = tuple(float(s) for s in args.xi_tilde.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad study grid: {exc}") from None
    cfg = StudyConfig(ranks=ranks, xi_tilde=scales)
    rows = emit_study(cfg)
    os.makedirs(args.output, exist_ok=True)
    path = os.path.join(args.output, "shrinkage_study.csv")
    write_table_csv(rows, path)
    print(f"study: {len(rows)} rows -> {path}")
    return EXIT_OK


def _cmd_energy(args) -> int:
    from .energy import DEFAULT_N_ITER, DEFAULT_WARMUP, energy_fit, ingest_energy_csv

    if not os.path.isfile(args.data):
        raise ConfigError(f"data file not found: {args.data}")
    days = ingest_energy_csv(args.data)
    if not days:
        raise ConfigError(f"no complete days found in {args.data}")
    fits = energy_fit(
        days,
        n_iter=args.iterations or DEFAULT_N_ITER,
        warmup=args.warmup or DEFAULT_WARMUP,
        seed=args.seed,
    )
    os.makedirs(args.output, exist_ok=True)
    rows = [
        {
            "day": str(f.day_id),
            "is_weekend": f.is_weekend,
            "kappa_mean": f.kappa_mean,
            "c_used": f.c_used,
        }
        for f in fits
    ]
    table_path = os.path.join(args.output, "energy_kappa.csv")
    write_table_csv(rows, table_path)
    for f in fits:
        write_results(f.result, args.output, prefix=f"day_{f.day_id}_")
    print(f"energy: {len(fits)} day(s) -> {table_path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "fit": _cmd_fit,
        "simulate": _cmd_simulate,
        "study": _cmd_study,
        "energy": _cmd_energy,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SmoothShrinkError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
