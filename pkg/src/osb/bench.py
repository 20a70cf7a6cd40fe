"""Convergence traces, error metrics and CSV export."""

from __future__ import annotations

import contextlib
import csv
import io
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

CSV_HEADER = ("method", "strategy", "seed", "normalized_iteration", "error")
METRICS = ("distance", "residual")


@dataclass
class Trace:
    """Sampled ``(normalized_iteration, error)`` pairs of one run."""

    method: str
    strategy: str
    metric: str
    seed: int | None = None
    samples: list[tuple[float, float]] = field(default_factory=list)

    def add(self, iteration, error):
        iteration, error = float(iteration), float(error)
        if self.samples and iteration <= self.samples[-1][0]:
            raise ValueError(f"iteration {iteration} not after {self.samples[-1][0]}")
        if not (math.isfinite(error) and error >= 0.0):
            raise ValueError(f"error must be finite and non-negative, got {error}")
        self.samples.append((iteration, error))

    @property
    def last(self):
        return self.samples[-1]

    def error_at(self, iteration):
        """Error of the sample taken at exactly ``iteration``."""
        for it, err in self.samples:
            if it == iteration:
                return err
        raise KeyError(iteration)


def normalized_iteration(coordinate_updates, n):
    """Count ``n`` coordinate updates as one iteration."""
    if n < 1 or coordinate_updates < 0:
        raise UsageError(f"bad accounting input updates={coordinate_updates}, N={n}")
    return coordinate_updates / n


def default_metric(problem):
    return "distance" if problem.known_fixed_point is not None else "residual"


def error_metric(estimate, problem, kind):
    """Sup-norm distance to the known fixed point, or sup-norm residual ``|H(x) - x|``."""
    estimate = np.asarray(estimate, dtype=float)
    if estimate.shape != (problem.dimension,):
        raise UsageError(f"estimate has shape {estimate.shape}, expected ({problem.dimension},)")
    if kind == "distance":
        if problem.known_fixed_point is None:
            raise UsageError("distance metric needs a known fixed point")
        return float(np.max(np.abs(estimate - problem.known_fixed_point)))
    if kind == "residual":
        return float(np.max(np.abs(problem.operator.eval(estimate) - estimate)))
    raise UsageError(f"unknown metric '{kind}', expected one of {METRICS}")


def _fmt(x):
    return format(x, ".17g")


@contextlib.contextmanager
def _open_out(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    elif isinstance(path, io.TextIOBase):
        yield path
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def export_csv(traces, path):
    """Write every trace, in order, to ``path`` (``"-"`` or None for stdout)."""
    metrics = {t.metric for t in traces}
    if len(metrics) > 1:
        raise UsageError(f"traces mix metrics {sorted(metrics)}")
    with _open_out(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for t in traces:
            seed = "" if t.seed is None else str(t.seed)
            for it, err in t.samples:
                writer.writerow((t.method, t.strategy, seed, _fmt(it), _fmt(err)))


def read_csv(path):
    """Parse an exported CSV back into traces (metric label is not stored, set to '')."""
    traces = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        for method, strategy, seed, it, err in reader:
            key = (method, strategy, seed)
            if not traces or (traces[-1].method, traces[-1].strategy, _seed_str(traces[-1].seed)) != key:
                traces.append(Trace(method, strategy, "", seed=int(seed) if seed else None))
            traces[-1].samples.append((float(it), float(err)))
    return traces


def _seed_str(seed):
    return "" if seed is None else str(seed)
