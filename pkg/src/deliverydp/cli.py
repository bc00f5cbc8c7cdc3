"""Command-line front end: ``deliverydp {solve,analyze,verify} CONFIG``.

Exit codes: 0 success, 1 invalid configuration or arguments, 2 a property
check failed, 3 input/output error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import ImproperPolicyError, analyze
from .dp import solve_horizon
from .grid import StateGrid
from .model import ConfigError, parse_config
from .verify import run_all

log = logging.getLogger("deliverydp")

EXIT_OK, EXIT_INVALID, EXIT_PROPERTY, EXIT_IO = 0, 1, 2, 3

TOLERANCES = {
    "pricing_newton_step": 1e-15,
    "auxiliary_newton_step": 1e-15,
    "hull_feasibility": 1e-10,
    "simplex_pivot": 1e-12,
}


def fmt(x) -> str:
    """Lossless decimal rendering of a float."""
    return format(float(x), ".17g")


class Run:
    """Collects what a command wrote, for the run manifest."""

    def __init__(self, command: str, config: Path, text: str, out: Path):
        self.command = command
        self.config = config
        self.out = out
        self.hash = hashlib.sha256(text.encode()).hexdigest()
        self.started = datetime.now(timezone.utc).isoformat()
        self.files: list[dict] = []

    def write_csv(self, name: str, header: list[str], rows) -> Path:
        path = self.out / name
        count = 0
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow(row)
                count += 1
        self.files.append({"file": name, "rows": count, "columns": len(header)})
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self.out / name
        path.write_text(text)
        self.files.append({"file": name, "lines": text.count("\n")})
        return path

    def finish(self):
        manifest = {
            "tool": f"deliverydp {__version__}",
            "command": self.command,
            "config": str(self.config),
            "instance_sha256": self.hash,
            "output_dir": str(self.out),
            "tolerances": TOLERANCES,
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "outputs": self.files,
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _state_header(inst):
    return [f"x_{a + 1}_{s + 1}" for a in range(inst.num_areas) for s in range(inst.num_slots)]


def default_snapshots(horizon: int) -> list[int]:
    return [horizon + 1, horizon - 10, 1]


def cmd_solve(inst, run: Run, snapshots=None):
    grid = StateGrid.for_instance(inst)
    T = inst.horizon
    wanted = default_snapshots(T) if not snapshots else list(snapshots)
    wanted = sorted({t for t in wanted if 1 <= t <= T + 1}, reverse=True)
    trajectory = solve_horizon(inst, grid, keep=wanted, record_prices=True)
    chosen = [V for V in trajectory if V.t in wanted]

    def value_rows():
        for V in chosen:
            for i, x in enumerate(grid.states):
                yield [V.t, i, *x.tolist(), fmt(V.values[i])]

    def price_rows():
        for V in chosen:
            if V.prices is None:
                continue
            for i in range(grid.size):
                for a in range(inst.num_areas):
                    for s in range(inst.num_slots):
                        d = V.prices[i, a, s]
                        yield [V.t, i, a + 1, s + 1, "CLOSED" if np.isinf(d) else fmt(d)]

    run.write_csv("values.csv", ["t", "state", *_state_header(inst), "V"], value_rows())
    run.write_csv("prices.csv", ["t", "state", "a", "s", "d"], price_rows())
    return EXIT_OK


def format_report(inst, report) -> str:
    a = report.assumptions
    lines = [
        f"states: {report.certificate.v_star.size}",
        f"horizon: {inst.horizon}",
        f"rho: {fmt(report.rho)}",
        f"max rho_t: {fmt(report.rho_series.max()) if report.rho_series.size else 'n/a'}",
        f"fixed point residual: {fmt(report.fixed_point_residual)}",
        f"weighted distance to fixed point at t=1: {fmt(report.weighted_distance[-1])}",
        f"sup distance to fixed point at t=1: {fmt(report.sup_distance[-1])}",
        f"min epsilon_t: {fmt(report.epsilon.min())}",
        f"assumption concave cost: {a.concave_cost} (epsilon {fmt(a.cost_epsilon)})",
        f"assumption marginal cost: {a.marginal_cost} "
        f"(max {fmt(a.max_marginal_cost)} <= {fmt(a.marginal_cost_bound)})",
        f"assumption arrival rate: {a.arrival_status} (lambda {fmt(inst.lam)})",
        "",
        "t,epsilon_t,w_t,W_t,lambda_bound,status",
    ]
    for c in a.arrival:
        lines.append(",".join([str(c.t), fmt(c.epsilon), fmt(c.w), fmt(c.W),
                               "inf" if np.isinf(c.bound) else fmt(c.bound), c.status]))
    return "\n".join(lines) + "\n"


def cmd_analyze(inst, run: Run):
    report = analyze(inst)
    run.write_csv(
        "rho.csv", ["t", "rho_t", "rho"],
        ([t, fmt(r), fmt(report.rho)] for t, r in zip(report.rho_times, report.rho_series)),
    )
    run.write_csv("epsilon.csv", ["t", "epsilon_t"],
                  ([t, fmt(e)] for t, e in zip(report.times, report.epsilon)))
    run.write_csv(
        "distance.csv", ["t", "weighted", "sup"],
        ([t, fmt(w), fmt(s)] for t, w, s in
         zip(report.times, report.weighted_distance, report.sup_distance)),
    )
    run.write_text("report.txt", format_report(inst, report))
    return EXIT_OK


def cmd_verify(inst, seed: int, trials: int, out=None):
    out = out or sys.stdout
    results = run_all(inst, seed, trials)
    status = EXIT_OK
    for r in results:
        print(f"{r.name}: {r.trials - r.failures}/{r.trials} passed", file=out)
        if not r.passed:
            status = EXIT_PROPERTY
            print(f"  counterexample: {json.dumps(r.counterexample)}", file=out)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deliverydp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve the DP and write value and price tables")
    solve.add_argument("config", type=Path)
    solve.add_argument("--out", type=Path, default=Path("."))
    solve.add_argument("--snapshot", type=int, nargs="+", metavar="t",
                       help="time steps to persist (default: horizon+1, horizon-10, 1)")

    an = sub.add_parser("analyze", help="contraction ratios, concavity measure, assumption checks")
    an.add_argument("config", type=Path)
    an.add_argument("--out", type=Path, default=Path("."))

    ver = sub.add_parser("verify", help="run the randomized property suites")
    ver.add_argument("config", type=Path)
    ver.add_argument("--seed", type=int, default=42)
    ver.add_argument("--trials", type=int, default=100)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")

    if args.command == "verify" and args.trials < 1:
        print("error: --trials must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        text = args.config.read_text()
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        inst = parse_config(text, source=str(args.config))
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID

    start = time.perf_counter()
    try:
        if args.command == "verify":
            status = cmd_verify(inst, args.seed, args.trials)
        else:
            args.out.mkdir(parents=True, exist_ok=True)
            run = Run(args.command, args.config, text, args.out)
            if args.command == "solve":
                status = cmd_solve(inst, run, args.snapshot)
            else:
                status = cmd_analyze(inst, run)
            run.finish()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ImproperPolicyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    log.info("%s finished in %.2f s", args.command, time.perf_counter() - start)
    return status


if __name__ == "__main__":
    sys.exit(main())
