"""Command-line entry point.

Subcommands:

* ``bench satellite --config FILE --out DIR`` runs the attitude-tracking
  benchmark and writes trajectory.csv, summary.csv, failures.csv and
  manifest.json into DIR.
* ``bench scalar --steps N --out DIR`` runs the scalar stress case and
  writes estimates.csv, failures.csv and manifest.json.
* ``simulate --config FILE`` samples one noisy trajectory of the satellite
  model and prints it as CSV (or writes simulation.csv with ``--out``).

Exit status is 0 on success and 2 when a filter breaks its numerical
contract outside the expected noise-blind collapses, or when the
configuration itself is invalid.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .bench import (
    SatelliteConfig,
    load_config,
    make_attitude_system,
    run_satellite,
    run_scalar,
    write_satellite_report,
    write_scalar_report,
)
from .errors import ManifoldUKFError
from .manifolds import ManifoldPoint, Sphere
from .systems import simulate


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="manifold-ukf",
        description="Benchmarks for unscented filtering on Riemannian manifolds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run a benchmark and write CSV reports")
    bench_sub = bench.add_subparsers(dest="benchmark", required=True)

    sat = bench_sub.add_parser("satellite", help="satellite attitude tracking")
    sat.add_argument("--config", type=Path, help="key=value config file")
    sat.add_argument("--out", type=Path, required=True, help="output directory")

    scalar = bench_sub.add_parser("scalar", help="scalar stress case")
    scalar.add_argument("--steps", type=int, default=20, help="number of steps")
    scalar.add_argument("--out", type=Path, required=True, help="output directory")

    sim = sub.add_parser("simulate", help="sample one noisy satellite trajectory")
    sim.add_argument("--config", type=Path, required=True, help="key=value config file")
    sim.add_argument("--out", type=Path, help="write simulation.csv here instead of stdout")
    return parser


def _cmd_bench_satellite(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else SatelliteConfig()
    started = time.perf_counter()
    report = run_satellite(config)
    write_satellite_report(report, args.out, wall_time_s=time.perf_counter() - started)
    unexpected = [f for f in report.failures if f[1] != "noise-blind"]
    if unexpected:
        run_id, name, step = unexpected[0]
        print(
            f"filter contract violation: {name} failed at step {step} of run "
            f"{run_id} ({len(unexpected)} total); see failures.csv",
            file=sys.stderr,
        )
        return 2
    return 0


def _cmd_bench_scalar(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    report = run_scalar(args.steps)
    write_scalar_report(report, args.out, wall_time_s=time.perf_counter() - started)
    unexpected = [f for f in report.failures if f[0] != "noise-blind"]
    if unexpected:
        name, step = unexpected[0]
        print(
            f"filter contract violation: {name} failed at step {step}",
            file=sys.stderr,
        )
        return 2
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    system = make_attitude_system(config)
    x0 = ManifoldPoint(Sphere(3), config.q0())
    result = simulate(system, x0, config.steps, seed=config.seed)
    lines = ["step,state,measurement"]
    for k in range(1, result.steps + 1):
        state = ";".join(repr(float(c)) for c in result.truth[k].coords)
        meas = ";".join(repr(float(c)) for c in result.measurements[k - 1].coords)
        lines.append(f"{k},{state},{meas}")
    text = "\n".join(lines) + "\n"
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "simulation.csv").write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "bench" and args.benchmark == "satellite":
            return _cmd_bench_satellite(args)
        if args.command == "bench" and args.benchmark == "scalar":
            return _cmd_bench_scalar(args)
        return _cmd_simulate(args)
    except ManifoldUKFError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
