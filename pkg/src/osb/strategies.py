"""Coordinate selection: cyclic, greedy max-|F| and seeded random schedules.

A schedule is stateful and belongs to one run. ``next_coordinate`` is
called with the current solver state before each step.
"""

from __future__ import annotations

import heapq

import numpy as np

from .errors import UsageError

__all__ = ["KINDS", "CyclicSchedule", "GreedySchedule", "RandomSchedule", "make_schedule"]

KINDS = ("cyclic", "greedy", "random")


class CyclicSchedule:
    kind = "cyclic"
    seed = None

    def __init__(self, n):
        self.n = n
        self._cursor = 0

    def next_coordinate(self, state):
        i = self._cursor
        self._cursor = (i + 1) % self.n
        return i


class RandomSchedule:
    """Uniform draws from numpy's PCG64 seeded with a 64-bit integer."""

    kind = "random"

    def __init__(self, n, seed):
        if not 0 <= seed < 2**64:
            raise UsageError(f"seed must fit in 64 unsigned bits, got {seed}")
        self.n = n
        self.seed = int(seed)
        self._rng = np.random.Generator(np.random.PCG64(self.seed))

    def next_coordinate(self, state):
        return int(self._rng.integers(self.n))


def argmax_abs(F):
    """Index of the largest |F[i]|, lowest index on ties."""
    return int(np.argmax(np.abs(F)))


class GreedySchedule:
    """Pick ``argmax |F[i]|``, ties to the lowest index.

    With an operator that reports ``dep(i)`` the choice comes from a lazy
    max-heap: after a step at ``i`` only ``i`` and ``dep(i)`` are re-keyed.
    Without dependency information, or if the caller did not step exactly
    once since the last query, it falls back to a linear scan / rebuild.
    Both paths return identical indices.
    """

    kind = "greedy"
    seed = None

    def __init__(self, n, operator=None):
        self.n = n
        self._op = operator
        self._use_heap = operator is not None and operator.dep(0) is not None
        self._heap = []
        self._version = np.zeros(n, dtype=np.int64)
        self._last = None  # (coordinate, step_count) of the previous query

    def _rebuild(self, F):
        self._version += 1
        self._heap = [(-abs(F[j]), j, self._version[j]) for j in range(self.n)]
        heapq.heapify(self._heap)

    def _refresh(self, F, coords):
        for j in coords:
            j = int(j)
            self._version[j] += 1
            heapq.heappush(self._heap, (-abs(F[j]), j, self._version[j]))

    def next_coordinate(self, state):
        F = state.F
        if not self._use_heap:
            return argmax_abs(F)

        if self._last is None or state.step_count != self._last[1] + 1:
            self._rebuild(F)
        else:
            i = self._last[0]
            self._refresh(F, np.union1d([i], self._op.dep(i)))
            # stale entries pile up; compact once the heap is much larger than n
            if len(self._heap) > 4 * self.n + 64:
                self._rebuild(F)

        heap = self._heap
        while heap[0][2] != self._version[heap[0][1]]:
            heapq.heappop(heap)
        i = heap[0][1]
        self._last = (i, state.step_count)
        return i


def make_schedule(kind, n, operator=None, seed=42):
    if kind == "cyclic":
        return CyclicSchedule(n)
    if kind == "greedy":
        return GreedySchedule(n, operator)
    if kind == "random":
        return RandomSchedule(n, seed)
    raise UsageError(f"unknown strategy '{kind}', expected one of {KINDS}")
