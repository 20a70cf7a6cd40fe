"""One Step Back iteration: the (H, F) state, the single-coordinate step and run loop.

For a map H and initial vector x0 the solver keeps a history vector ``H``
and a residual fluid vector ``F``::

    H_0 = x0,                 F_0 = H(x0) - x0
    H_n = H_{n-1} + F_{n-1}[i] e_i
    F_n = F_{n-1} - F_{n-1}[i] e_i + H(H_n) - H(H_{n-1})

so ``H_n + F_n == H(H_n)`` holds after every step and ``H + F`` is the
estimate reported to callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bench import Trace, default_metric, error_metric, normalized_iteration
from .errors import DivergenceError, DomainError, UsageError
from .operators import Example3Operator, check_increment

__all__ = [
    "PAPER_X0",
    "Problem",
    "SolverState",
    "StopRule",
    "conservation_gap",
    "estimator",
    "example3_problem",
    "init_state",
    "osb_step",
    "residual_norm",
    "run",
]

PAPER_X0 = (4.2, 1.0, 1.5)
INCREMENT_TOL = 1e-10
FIXED_POINT_TOL = 1e-9


@dataclass
class SolverState:
    H: np.ndarray
    F: np.ndarray
    step_count: int = 0

    def copy(self):
        return SolverState(self.H.copy(), self.F.copy(), self.step_count)


@dataclass
class Problem:
    """Operator, initial vector and, when known, the exact fixed point."""

    operator: object
    x0: np.ndarray
    known_fixed_point: np.ndarray | None = None

    def __post_init__(self):
        n = self.operator.dim
        self.x0 = np.array(self.x0, dtype=float)
        if self.x0.shape != (n,):
            raise UsageError(f"x0 has shape {self.x0.shape}, expected ({n},)")
        if self.known_fixed_point is not None:
            xs = np.array(self.known_fixed_point, dtype=float)
            if xs.shape != (n,):
                raise UsageError(f"fixed point has shape {xs.shape}, expected ({n},)")
            gap = float(np.max(np.abs(self.operator.eval(xs) - xs)))
            if gap > FIXED_POINT_TOL:
                raise UsageError(f"known_fixed_point is not fixed: |H(X*) - X*| = {gap:.3e}")
            self.known_fixed_point = xs

    @property
    def dimension(self):
        return self.operator.dim


def example3_problem(x0=PAPER_X0):
    """The 3-D nonlinear example with its closed-form fixed point."""
    op = Example3Operator()
    return Problem(op, x0, known_fixed_point=op.fixed_point())


@dataclass(frozen=True)
class StopRule:
    """Stop when ``max|F| <= tol`` or after ``max_updates`` coordinate updates."""

    tol: float = 0.0
    max_updates: int | None = None

    def __post_init__(self):
        if self.tol < 0 or (self.max_updates is not None and self.max_updates < 0):
            raise UsageError("tolerance and budget must be non-negative")
        if self.tol == 0 and not self.max_updates:
            raise UsageError("stop rule needs a positive tolerance or a positive budget")

    def done(self, updates, residual):
        if self.max_updates is not None and updates >= self.max_updates:
            return True
        return residual <= self.tol


def init_state(problem):
    """Build ``(H_0, F_0) = (x0, H(x0) - x0)``.

    Raises :class:`DomainError` when the operator is undefined at x0.
    """
    H = problem.x0.copy()
    F = problem.operator.eval(H) - H
    if not np.all(np.isfinite(F)):
        bad = int(np.flatnonzero(~np.isfinite(F))[0])
        raise DomainError(f"H(x0) is not finite at coordinate {bad}", coordinate=bad, values=tuple(H))
    return SolverState(H, F, 0)


def osb_step(state, i, operator, debug=False):
    """Apply one coordinate update at ``i``, in place, and return ``state``.

    The change of ``H(H)`` comes from ``operator.increment``; with
    ``debug=True`` it is also recomputed from two full evaluations and the
    two must agree to 1e-10.
    """
    n = state.H.shape[0]
    if not 0 <= i < n:
        raise UsageError(f"coordinate {i} out of range for dimension {n}")
    f = state.F[i]
    if f == 0.0:
        state.step_count += 1
        return state

    try:
        rows, delta = operator.increment(state.H, i, f)
        if debug:
            gap = check_increment(operator, state.H, i, f)
            if gap > INCREMENT_TOL:
                raise AssertionError(f"increment form off by {gap:.3e} at coordinate {i}")
    except DomainError as exc:
        moved = state.H.copy()
        moved[i] += f
        raise DivergenceError(
            f"operator left its domain at step {state.step_count + 1}, coordinate {i}: {exc}",
            step=state.step_count + 1,
            coordinate=i,
            point=moved,
        ) from exc

    state.H[i] += f
    state.F[i] = 0.0
    state.F[rows] += delta
    state.step_count += 1
    if not (math.isfinite(state.H[i]) and np.all(np.isfinite(state.F[rows]))):
        raise DivergenceError(
            f"non-finite state after step {state.step_count} at coordinate {i}",
            step=state.step_count,
            coordinate=i,
            point=state.H.copy(),
        )
    return state


def estimator(state):
    return state.H + state.F


def residual_norm(state):
    return float(np.max(np.abs(state.F)))


def conservation_gap(state, operator):
    """Max of ``|H + F - H(H)| / (1 + |H(H)|)``; zero up to rounding for every reachable state."""
    image = operator.eval(state.H)
    return float(np.max(np.abs(state.H + state.F - image) / (1.0 + np.abs(image))))


def run(problem, schedule, stop, metric=None, debug=False):
    """Iterate until ``stop`` fires; return the final state and the trace.

    A sample is recorded at every whole normalized iteration (``N``
    coordinate updates) and at termination. On divergence the partial trace
    is attached to the raised :class:`DivergenceError`.
    """
    metric = metric or default_metric(problem)
    n = problem.dimension
    op = problem.operator
    state = init_state(problem)
    trace = Trace("osb", schedule.kind, metric, seed=getattr(schedule, "seed", None))
    trace.add(0.0, error_metric(estimator(state), problem, metric))

    while not stop.done(state.step_count, residual_norm(state)):
        i = schedule.next_coordinate(state)
        try:
            osb_step(state, i, op, debug=debug)
            if state.step_count % n == 0:
                _sample(trace, state, problem, metric)
        except DivergenceError as exc:
            exc.trace = trace
            raise
        except DomainError as exc:
            # residual metric evaluated H at an estimate outside the domain
            err = DivergenceError(str(exc), step=state.step_count, coordinate=i, point=estimator(state))
            err.trace = trace
            raise err from exc

    if trace.last[0] != normalized_iteration(state.step_count, n):
        try:
            _sample(trace, state, problem, metric)
        except DivergenceError as exc:
            exc.trace = trace
            raise
    return state, trace


def _sample(trace, state, problem, metric):
    err = error_metric(estimator(state), problem, metric)
    if not math.isfinite(err):
        raise DivergenceError(
            f"error metric overflowed after {state.step_count} updates", step=state.step_count, point=state.H.copy()
        )
    trace.add(normalized_iteration(state.step_count, problem.dimension), err)
