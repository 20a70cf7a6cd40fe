"""Command-line runner comparing OSB, Jacobi and Gauss-Seidel on one problem.

Exit status: 0 success, 2 usage, 3 numerical divergence, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import run_baseline
from .bench import METRICS, export_csv
from .core import PAPER_X0, Problem, StopRule, example3_problem, run
from .errors import DivergenceError, DomainError, MatrixMarketError, UsageError
from .operators import Example3Operator, load_matrix_market
from .strategies import KINDS, make_schedule

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED, EXIT_IO = 0, 2, 3, 4
METHODS = ("osb", "jacobi", "gauss-seidel")


@dataclass
class RunConfig:
    problem: str = "example3"
    matrix: str | None = None
    x0: str | None = None
    methods: tuple[str, ...] = METHODS
    strategy: str = "greedy"
    seed: int = 42
    tol: float = 1e-12
    max_iters: float = 50.0
    metric: str = "auto"
    out: str = "-"


class _Once(argparse.Action):
    """Store a value, rejecting a second occurrence of the flag."""

    def __call__(self, parser, namespace, values, option_string=None):
        seen = namespace.__dict__.setdefault("_seen", set())
        if self.dest in seen:
            parser.error(f"duplicate flag {option_string}")
        seen.add(self.dest)
        setattr(namespace, self.dest, values)


def _methods(text):
    items = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in items if m not in METHODS]
    if not items or bad:
        raise argparse.ArgumentTypeError(f"expected a comma list of {', '.join(METHODS)}")
    return items


def _positive(kind):
    def parse(text):
        value = kind(text)
        if not (value > 0 and math.isfinite(value)):
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value

    return parse


def _seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser():
    p = argparse.ArgumentParser(
        prog="osb-bench",
        description="Compare One Step Back, Jacobi and Gauss-Seidel iterations and write CSV traces.",
    )
    p.add_argument("--problem", action=_Once, choices=["example3"], help="builtin problem (default example3)")
    p.add_argument("--matrix", action=_Once, metavar="PATH", help="Matrix Market file for a linear problem X = P X")
    p.add_argument(
        "--x0",
        action=_Once,
        help="initial vector: 'zeros', 'fixed-point' (example3 only), 'paper' (example3 only), "
        "an inline comma list, or a one-column text file",
    )
    p.add_argument("--methods", action=_Once, type=_methods, default=METHODS, help="comma list (default: all three)")
    p.add_argument("--strategy", action=_Once, choices=KINDS, default="greedy", help="OSB coordinate schedule")
    p.add_argument("--seed", action=_Once, type=_seed, default=42, help="seed for the random schedule")
    p.add_argument("--tol", action=_Once, type=_positive(float), default=1e-12, help="stop when max|F| <= tol")
    p.add_argument(
        "--max-iters", action=_Once, type=_positive(float), default=50.0, help="budget in normalized iterations"
    )
    p.add_argument("--metric", action=_Once, choices=("auto",) + METRICS, default="auto")
    p.add_argument("--out", action=_Once, default="-", help="CSV destination, '-' for stdout")
    return p


def parse_args(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.problem is not None and ns.matrix is not None:
        parser.error("conflicting problem sources: --problem and --matrix")
    if ns.matrix is not None and ns.x0 is None:
        parser.error("--matrix requires --x0")
    return RunConfig(
        problem="matrix" if ns.matrix is not None else "example3",
        matrix=ns.matrix,
        x0=ns.x0,
        methods=ns.methods,
        strategy=ns.strategy,
        seed=ns.seed,
        tol=ns.tol,
        max_iters=ns.max_iters,
        metric=ns.metric,
        out=ns.out,
    )


def _parse_x0(spec, n, fixed_point=None):
    if spec == "zeros":
        return np.zeros(n)
    if spec in ("fixed-point", "paper"):
        if fixed_point is None:
            raise UsageError(f"--x0 {spec} is only available for example3")
        return fixed_point if spec == "fixed-point" else np.array(PAPER_X0)
    try:
        values = [float(t) for t in spec.split(",")]
    except ValueError:
        path = Path(spec)
        if not path.exists():
            raise UsageError(f"--x0 '{spec}' is neither a keyword, a number list nor an existing file") from None
        try:
            values = [float(line) for line in path.read_text(encoding="utf-8").split() if line]
        except ValueError as exc:
            raise UsageError(f"--x0 file {spec}: {exc}") from None
    if len(values) != n:
        raise UsageError(f"--x0 has {len(values)} entries, problem dimension is {n}")
    return np.array(values)


def build_problem(config):
    if config.problem == "matrix":
        op = load_matrix_market(config.matrix)
        return Problem(op, _parse_x0(config.x0, op.dim))
    if config.x0 is None:
        return example3_problem()
    return example3_problem(_parse_x0(config.x0, 3, Example3Operator.fixed_point()))


def run_comparison(config, stdout=None, stderr=None):
    """Run every requested method on one shared problem, write the CSV, print summaries."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        problem = build_problem(config)
        metric = None if config.metric == "auto" else config.metric
        if metric == "distance" and problem.known_fixed_point is None:
            raise UsageError("--metric distance needs a problem with a known fixed point")
        stop = StopRule(tol=config.tol, max_updates=int(config.max_iters * problem.dimension + 1e-9))
    except (UsageError, MatrixMarketError) as exc:
        print(f"osb-bench: error: {exc}", file=stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"osb-bench: operator undefined at x0: {exc}", file=stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"osb-bench: {exc}", file=stderr)
        return EXIT_IO

    traces, summaries, diverged = [], [], False
    for method in config.methods:
        try:
            if method == "osb":
                schedule = make_schedule(config.strategy, problem.dimension, problem.operator, config.seed)
                _, trace = run(problem, schedule, stop, metric=metric)
            else:
                _, trace = run_baseline(problem, method, stop, metric=metric)
            status = "ok"
        except DivergenceError as exc:
            diverged = True
            trace = exc.trace
            status = "DIVERGED"
            print(f"osb-bench: {method}: {exc}", file=stderr)
        traces.append(trace)
        it, err = trace.last
        summaries.append(f"{method:<12} {trace.strategy:<7} iter={it:.6g} error={err:.6e} {status}")

    try:
        export_csv(traces, config.out)
    except OSError as exc:
        print(f"osb-bench: cannot write {config.out}: {exc}", file=stderr)
        return EXIT_IO

    # keep stdout pure CSV when the traces go there
    summary_stream = stderr if config.out == "-" else stdout
    for line in summaries:
        print(line, file=summary_stream)
    return EXIT_DIVERGED if diverged else EXIT_OK


def main(argv=None):
    config = parse_args(argv)
    sys.exit(run_comparison(config))


if __name__ == "__main__":
    main()
