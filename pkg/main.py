"""Command-line entry point: generate, interpolate, lebesgue, report"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from diagnostics import (
    best_seed,
    empirical_measure_test,
    ensemble_stats,
    geometric_rate,
    histogram_only,
    loglog_slope,
    reference_density,
)
from ensemble import EnsembleRunner
from errors import ConfigError, DegenerateDomainError, LejaError, ReferenceUnavailableError
from generators import generate, step_count
from interp import error_trace, lebesgue_series, resolve_function
from polyeval import NodeSequence
from result_store import ResultStore, load_points
from run_tracker import RunTracker
from settings import RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def load_config(args: argparse.Namespace) -> RunConfig:
    """Read the JSON config and apply command-line overrides"""
    with open(args.config, "r", encoding="utf-8") as f:
        data = json.load(f)
    if args.seed is not None:
        data["seed"] = args.seed
        data.pop("seeds", None)
    if args.out is not None:
        data["output_dir"] = args.out
    if args.threads is not None:
        data["threads"] = args.threads
    return RunConfig.model_validate(data)


def _points(config: RunConfig, points_file: Optional[str]) -> NodeSequence:
    path = Path(points_file) if points_file else Path(config.output_dir) / "points.csv"
    if not path.exists():
        raise FileNotFoundError(f"points file not found: {path}")
    try:
        return load_points(path)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _fit_range(config: RunConfig, count: int):
    return max(config.n_range[0], 1), min(config.n_range[1], count)


def cmd_generate(config: RunConfig) -> int:
    domain = config.domain.build()
    generator_config = config.generator_config()
    alpha = generator_config.effective_alpha(domain.exponents)
    store = ResultStore(config.output_dir)
    tracker = RunTracker(config.n_target)
    sequence = generate(domain, generator_config, progress_sink=tracker)

    points_file = store.save_points(sequence)
    meta: Dict[str, Any] = {
        "config": config.model_dump(mode="json"),
        "method": config.method,
        "seed": config.seed,
        "domain": domain.domain_id,
        "exponents": domain.exponents.as_dict(),
        "alpha": alpha,
        "tracking": tracker.get_stats(),
    }
    if config.method in ("mh", "rm"):
        meta["step_schedule"] = [{"n": n, "N_n": step_count(n, alpha)} for n in range(1, config.n_target + 1)]
    meta_file = store.save_meta(meta)

    print(f"Generated {len(sequence)} {config.method} nodes on {domain.domain_id}")
    print(f"  alpha={alpha:.4g}, {tracker.get_stats()['seconds']:.2f}s")
    print(f"Saved nodes to {points_file}")
    print(f"Saved metadata to {meta_file}")
    return EXIT_OK


def cmd_interpolate(config: RunConfig, points_file: Optional[str]) -> int:
    domain = config.domain.build()
    f = resolve_function(config.function, domain)
    sequence = _points(config, points_file)
    sequence.validate(domain)
    store = ResultStore(config.output_dir)

    trace = error_trace(domain, sequence, f, config.grids.eval_grid)
    trace_file = store.save_series(trace, "error_trace.csv", "error")

    print(f"Interpolated {config.function} at {len(sequence)} nodes on {domain.domain_id}")
    print(f"  final error: {trace[-1][1]:.3e}")
    try:
        print(f"  geometric rate: {geometric_rate(trace):.4f}")
    except ValueError as exc:
        print(f"  geometric rate unavailable: {exc}")
    print(f"Saved error trace to {trace_file}")
    return EXIT_OK


def cmd_lebesgue(config: RunConfig, points_file: Optional[str]) -> int:
    domain = config.domain.build()
    sequence = _points(config, points_file)
    sequence.validate(domain)
    store = ResultStore(config.output_dir)

    grid = domain.eval_grid(config.grids.lebesgue_grid)
    estimates = lebesgue_series(domain, sequence, grid, threads=config.threads)
    series = [(e.n, e.value) for e in estimates]
    series_file = store.save_series(series, "lebesgue.csv", "lebesgue")

    lo, hi = _fit_range(config, len(sequence))
    print(f"Estimated Lebesgue constants for n=1..{len(sequence)} on {domain.domain_id}")
    print(f"  Lambda_{series[-1][0]} ~ {series[-1][1]:.4g}")
    try:
        slope, _, r_squared = loglog_slope(series, lo, hi)
        print(f"  log-log slope over n={lo}..{hi}: {slope:.3f} (r^2={r_squared:.3f})")
    except ValueError as exc:
        print(f"  log-log slope unavailable: {exc}")
    print(f"Saved Lebesgue series to {series_file}")
    return EXIT_OK


def cmd_report(config: RunConfig) -> int:
    domain = config.domain.build()
    store = ResultStore(config.output_dir)
    outcomes = EnsembleRunner(config).run()
    succeeded = [o for o in outcomes if o.ok]

    seeds: List[Dict[str, Any]] = []
    for outcome in outcomes:
        block: Dict[str, Any] = {"seed": outcome.seed, "status": "ok" if outcome.ok else "failed"}
        if outcome.ok:
            block["report"] = outcome.report.to_dict()
            block["timing"] = outcome.timing
        else:
            block["error"] = outcome.error
        seeds.append(block)

    reports = [o.report for o in succeeded]
    ensemble = None
    if len(reports) >= 2:
        lo, hi = _fit_range(config, min(len(r.n) for r in reports))
        try:
            stats = ensemble_stats(reports, (lo, hi))
            ensemble = {
                "mean_lebesgue_slope": stats["mean_lebesgue_slope"],
                "sd_lebesgue_slope": None if np.isnan(stats["sd_lebesgue_slope"]) else stats["sd_lebesgue_slope"],
                "per_n_mean": [[n, v] for n, v in stats["per_n_mean"]],
                "per_n_sd": [[n, v] for n, v in stats["per_n_sd"]],
            }
        except ValueError as exc:
            logger.warning("ensemble statistics skipped: %s", exc)

    payload = {
        "config": config.model_dump(mode="json"),
        "domain": domain.domain_id,
        "seeds": seeds,
        "ensemble": ensemble,
        "best_seed": best_seed(reports, config.n_range) if reports else None,
    }
    report_file = store.save_json(payload, "report.json")

    print(f"Report for {len(outcomes)} seed(s) of {config.method} on {domain.domain_id}")
    print(f"  {len(succeeded)} succeeded, {len(outcomes) - len(succeeded)} failed")
    if not succeeded:
        print(f"Saved report to {report_file}")
        return EXIT_RUNTIME

    pooled = np.concatenate([o.sequence.nodes for o in succeeded])
    try:
        ks, histogram = empirical_measure_test(pooled, reference_density(domain), config.histogram_bins)
        print(f"  pooled KS distance to the equilibrium measure: {ks:.4f}")
    except ReferenceUnavailableError:
        histogram = histogram_only(pooled, domain, config.histogram_bins)
    histogram_file = store.save_histogram(histogram)

    if ensemble:
        print(f"  mean Lebesgue slope: {ensemble['mean_lebesgue_slope']:.3f}")
        if ensemble["sd_lebesgue_slope"] is not None:
            print(f"  sd Lebesgue slope: {ensemble['sd_lebesgue_slope']:.3f}")
    elif reports[0].fitted.get("lebesgue_slope") is not None:
        print(f"  Lebesgue slope: {reports[0].fitted['lebesgue_slope']:.3f}")
    print(f"Saved report to {report_file}")
    print(f"Saved histogram to {histogram_file}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Random Leja node generation and quality diagnostics")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="run configuration (JSON)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, help="worker threads for grid and candidate evaluation")
    common.add_argument("--verbose", "-v", action="count", default=0, help="-v for info, -vv for debug logs")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="generate a node sequence")
    for name, text in (("interpolate", "interpolation error trace"), ("lebesgue", "Lebesgue constant series")):
        command = sub.add_parser(name, parents=[common], help=text)
        command.add_argument("--points", help="points CSV (default: <out>/points.csv)")
    sub.add_parser("report", parents=[common], help="ensemble quality report")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        config = load_config(args)
        if args.command == "generate":
            return cmd_generate(config)
        if args.command == "interpolate":
            return cmd_interpolate(config, args.points)
        if args.command == "lebesgue":
            return cmd_lebesgue(config, args.points)
        return cmd_report(config)
    except (ConfigError, DegenerateDomainError, ValidationError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LejaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
