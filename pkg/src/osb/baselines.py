"""Jacobi and Gauss-Seidel sweeps for the same problems the OSB solver takes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bench import Trace, default_metric, error_metric
from .errors import DivergenceError, DomainError, UsageError

__all__ = ["BaselineState", "jacobi_sweep", "gauss_seidel_sweep", "run_baseline"]

COORDINATE_TOL = 1e-12


@dataclass
class BaselineState:
    X: np.ndarray
    sweep_count: int = 0


def jacobi_sweep(state, op):
    """X <- H(X), every coordinate computed from the previous vector."""
    state.X = np.asarray(op.eval(state.X), dtype=float)
    state.sweep_count += 1
    return state


def gauss_seidel_sweep(state, op, debug=False):
    """In-place sweep in natural order; coordinate i sees the updates of 0..i-1.

    ``debug=True`` cross-checks each ``eval_coordinate`` against a full
    evaluation of the partially updated vector.
    """
    X = state.X
    for i in range(X.shape[0]):
        try:
            value = op.eval_coordinate(X, i)
            if debug:
                full = float(op.eval(X)[i])
                if abs(value - full) > COORDINATE_TOL * (1.0 + abs(full)):
                    raise AssertionError(f"coordinate {i}: {value!r} != {full!r}")
        except DomainError as exc:
            raise DivergenceError(
                f"operator left its domain in sweep {state.sweep_count + 1} at coordinate {i}: {exc}",
                step=state.sweep_count + 1,
                coordinate=i,
                point=X.copy(),
            ) from exc
        X[i] = value
    state.sweep_count += 1
    return state


def run_baseline(problem, method, stop, metric=None):
    """Run ``method`` ("jacobi" or "gauss-seidel") until ``stop`` fires.

    ``stop.max_updates`` is in coordinate updates; a sweep counts as N of
    them. The tolerance is compared with the sup-norm change of X over a
    sweep, and with ``|H(x0) - x0|`` before the first one.
    """
    metric = metric or default_metric(problem)
    n = problem.dimension
    op = problem.operator
    if method not in ("jacobi", "gauss-seidel"):
        raise UsageError(f"unknown baseline '{method}'")
    sweep = jacobi_sweep if method == "jacobi" else gauss_seidel_sweep

    state = BaselineState(problem.x0.copy())
    trace = Trace(method, "sweep", metric)
    trace.add(0.0, error_metric(state.X, problem, metric))
    max_sweeps = None if stop.max_updates is None else stop.max_updates // n

    try:
        change = float(np.max(np.abs(op.eval(state.X) - state.X)))
        while not ((max_sweeps is not None and state.sweep_count >= max_sweeps) or change <= stop.tol):
            before = state.X.copy()
            sweep(state, op)
            if not np.all(np.isfinite(state.X)):
                raise DivergenceError(
                    f"non-finite iterate after sweep {state.sweep_count}",
                    step=state.sweep_count,
                    point=state.X.copy(),
                )
            change = float(np.max(np.abs(state.X - before)))
            err = error_metric(state.X, problem, metric)
            if not (np.isfinite(err) and np.isfinite(change)):
                raise DivergenceError(f"error overflowed after sweep {state.sweep_count}", step=state.sweep_count)
            trace.add(state.sweep_count, err)
    except DivergenceError as exc:
        exc.trace = trace
        raise
    except DomainError as exc:
        err = DivergenceError(str(exc), step=state.sweep_count, coordinate=exc.coordinate, point=state.X.copy())
        err.trace = trace
        raise err from exc
    return state, trace
