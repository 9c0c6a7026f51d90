"""Command-line entry point: ``eeihv run|report|benchmark|oracle``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import benchmarks
from .acquisition import eihv_exact, eihv_monte_carlo
from .config import ConfigError, RunConfig, parse_config
from .external import ExternalObjective
from .loop import initial_dataset, run
from .numerics import rng_stream
from .pareto import hypervolume2d, hypervolume_error_bound, hypervolume_oracle
from .rundir import SNAPSHOT, RunDirectoryError, export_run, load_history, save_state, write_csv

logger = logging.getLogger("eeihv")


def build_objective(cfg: RunConfig):
    if cfg.command is not None:
        return ExternalObjective(cfg.command, cfg.dim, cfg.n_objectives, cfg.timeout, cfg.bounds, cfg.signs).start()
    base = benchmarks.make_objective(cfg.objective, cfg.noise)
    signs = np.asarray(cfg.signs, dtype=float)
    if np.all(signs == 1.0):
        return base
    return benchmarks.StochasticObjective(
        base.name, base.dim, base.n_objectives, lambda x, rng: base.batch(x, rng) * signs, base.params
    )


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    run_dir = Path(args.out or cfg.output_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / SNAPSHOT).write_text(cfg.dump(), encoding="utf-8")
    objective = build_objective(cfg)
    try:
        resume = None
        if args.resume:
            resume = load_history(run_dir)[-1]
            if resume.stop_reason is not None:
                print(f"run already finished ({resume.stop_reason})")
                return 0
            initial = None
        else:
            initial = initial_dataset(objective, cfg.n_init, cfg.seed)
        final, history = run(
            objective, initial, cfg.loop_config(), on_state=lambda s: save_state(run_dir, s), resume=resume
        )
    finally:
        if isinstance(objective, ExternalObjective):
            objective.close()
    history = load_history(run_dir) if args.resume else history
    export_run(run_dir, history)
    print(f"{final.stop_reason}: {final.n} observations, {len(final.front_indices)} Pareto designs -> {run_dir}")
    if final.stop_reason == "evaluation-failure":
        print(f"error: {final.failure}", file=sys.stderr)
        return 3
    return 0


def cmd_report(args) -> int:
    history = load_history(args.run_dir)
    out = export_run(args.run_dir, history)
    print(f"exports written to {out}")
    return 0


def cmd_benchmark(args) -> int:
    objective = benchmarks.make_objective(args.objective, args.noise)
    if args.ground_truth:
        gt = benchmarks.ground_truth(objective, args.n_designs, args.mc_reps, args.seed)
        rows = np.hstack([gt.front_designs, gt.front])
        header = [f"x_{i + 1}" for i in range(objective.dim)] + ["o_1", "o_2"]
        if args.out:
            write_csv(Path(args.out), header, rows.tolist())
        else:
            print(",".join(header))
            for row in rows:
                print(",".join(repr(float(v)) for v in row))
        return 0
    x = np.asarray(args.x, dtype=float)
    if x.size != objective.dim:
        raise ValueError(f"{args.objective} expects {objective.dim} coordinates")
    values = benchmarks.sample_average(objective, x, args.mc_reps, args.seed)[0]
    print(" ".join(repr(float(v)) for v in values))
    return 0


def _load_points(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def cmd_oracle(args) -> int:
    r = np.asarray(args.ref, dtype=float)
    front = _load_points(args.points)
    if args.kind == "hypervolume":
        exact = hypervolume2d(front, r, clip=True)
        grid = hypervolume_oracle(front, r, args.resolution)
        bound = hypervolume_error_bound(front, r, args.resolution)
        print(f"exact {float(exact)!r}\ngrid {float(grid)!r}\nbound {float(bound)!r}")
        return 0
    mu = np.asarray(args.mu, dtype=float)
    sigma = np.asarray(args.sigma, dtype=float)
    closed = eihv_exact(front, r, mu, sigma)
    mean, se = eihv_monte_carlo(front, r, mu, sigma, args.draws, rng_stream(args.seed, 0))
    print(f"closed_form {float(closed)!r}\nmonte_carlo {float(mean)!r}\nstd_error {float(se)!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eeihv", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the acquisition loop from a configuration file")
    p.add_argument("config")
    p.add_argument("--out", help="run directory (overrides output_dir)")
    p.add_argument("--resume", action="store_true", help="continue from the last saved state")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="regenerate exports from saved states")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("benchmark", help="evaluate a built-in objective or its ground truth")
    p.add_argument("objective", choices=benchmarks.BUILTIN_OBJECTIVES)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--x", type=float, nargs="+")
    p.add_argument("--mc-reps", type=int, default=1)
    p.add_argument("--ground-truth", action="store_true")
    p.add_argument("--n-designs", type=int, default=10000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("oracle", help="hypervolume / EIHV reference computations")
    p.add_argument("kind", choices=["hypervolume", "eihv"])
    p.add_argument("points", help="CSV file of objective vectors, one per row")
    p.add_argument("--ref", type=float, nargs=2, required=True)
    p.add_argument("--resolution", type=int, default=1000)
    p.add_argument("--mu", type=float, nargs=2)
    p.add_argument("--sigma", type=float, nargs=2)
    p.add_argument("--draws", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "benchmark" and not args.ground_truth and args.x is None:
        parser.error("benchmark needs --x or --ground-truth")
    if args.command == "oracle" and args.kind == "eihv" and (args.mu is None or args.sigma is None):
        parser.error("oracle eihv needs --mu and --sigma")
    try:
        return args.func(args)
    except RunDirectoryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
