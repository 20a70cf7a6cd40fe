"""Fixed-point maps X -> H(X) with per-coordinate increment evaluation.

Coordinates are 0-based everywhere in the library. Matrix Market files
and the CLI use 1-based indices and are converted at the boundary.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DivergenceError, DomainError, MatrixMarketError, UsageError

__all__ = [
    "Operator",
    "FunctionOperator",
    "SparseLinearOperator",
    "Example3Operator",
    "check_increment",
    "d_iteration_step",
    "load_matrix_market",
]


class Operator:
    """Base fixed-point map on R^dim.

    Subclasses must implement :meth:`eval`. Those that can compute
    ``H(x + delta e_i) - H(x)`` cheaply override :meth:`increment`, set
    ``has_increment_form = True`` and, ideally, report the affected output
    rows through :meth:`dep`.
    """

    has_increment_form = False

    def __init__(self, dim):
        if dim < 1:
            raise UsageError(f"operator dimension must be positive, got {dim}")
        self.dim = int(dim)

    def eval(self, x):
        raise NotImplementedError

    def eval_coordinate(self, x, i):
        """Return ``H(x)[i]``."""
        return float(self.eval(x)[i])

    def increment(self, x, i, delta):
        """Return ``(rows, values)`` with ``H(x + delta e_i) - H(x)`` on ``rows``.

        The default uses two full evaluations.
        """
        x = np.asarray(x, dtype=float)
        moved = x.copy()
        moved[i] += delta
        return np.arange(self.dim), self.eval(moved) - self.eval(x)

    def dep(self, i):
        """Output rows that can change when input coordinate ``i`` moves, or None if unknown."""
        return None

    def _check_index(self, i):
        if not 0 <= i < self.dim:
            raise UsageError(f"coordinate {i} out of range for dimension {self.dim}")


class FunctionOperator(Operator):
    """Wrap a user callable. Increment and dependency hooks are optional."""

    def __init__(self, func, dim, increment=None, dep=None):
        super().__init__(dim)
        self._func = func
        self._increment = increment
        self._dep = dep
        self.has_increment_form = increment is not None

    def eval(self, x):
        out = np.asarray(self._func(np.asarray(x, dtype=float)), dtype=float)
        if out.shape != (self.dim,):
            raise UsageError(f"operator returned shape {out.shape}, expected ({self.dim},)")
        return out

    def increment(self, x, i, delta):
        if self._increment is None:
            return super().increment(x, i, delta)
        rows, values = self._increment(np.asarray(x, dtype=float), i, delta)
        return np.asarray(rows, dtype=np.intp), np.asarray(values, dtype=float)

    def dep(self, i):
        if self._dep is None:
            return None
        return self._dep(i)


class SparseLinearOperator(Operator):
    """``H(x) = P x (+ offset)`` with P stored column-wise.

    The increment of a linear map does not depend on ``x``: moving
    coordinate ``i`` by ``delta`` changes the image by ``delta * P[:, i]``.
    A constant ``offset`` b turns the map into the affine ``P x + b``; it
    only enters through the initial residual.
    """

    has_increment_form = True

    def __init__(self, matrix, offset=None):
        matrix = sp.csc_matrix(matrix, dtype=float)
        n, m = matrix.shape
        if n != m:
            raise UsageError(f"fixed-point operator needs a square matrix, got {n}x{m}")
        super().__init__(n)
        if not np.all(np.isfinite(matrix.data)):
            raise UsageError("matrix contains non-finite entries")
        matrix.sort_indices()
        self._csc = matrix
        self._csr = matrix.tocsr()
        if offset is None:
            self.offset = None
        else:
            offset = np.asarray(offset, dtype=float)
            if offset.shape != (n,):
                raise UsageError(f"offset has shape {offset.shape}, expected ({n},)")
            self.offset = offset

    @classmethod
    def from_entries(cls, n, entries, offset=None):
        """Build from 0-based ``(row, col, value)`` triples; duplicates are rejected."""
        seen = set()
        rows, cols, vals = [], [], []
        for r, c, v in entries:
            if not (0 <= r < n and 0 <= c < n):
                raise UsageError(f"entry ({r}, {c}) outside {n}x{n}")
            if (r, c) in seen:
                raise UsageError(f"duplicate entry ({r}, {c})")
            seen.add((r, c))
            rows.append(r)
            cols.append(c)
            vals.append(v)
        matrix = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
        return cls(matrix, offset=offset)

    @property
    def matrix(self):
        return self._csc

    def column(self, i):
        """Return ``(rows, values)`` of column ``i``."""
        self._check_index(i)
        lo, hi = self._csc.indptr[i], self._csc.indptr[i + 1]
        return self._csc.indices[lo:hi], self._csc.data[lo:hi]

    def eval(self, x):
        out = self._csc @ np.asarray(x, dtype=float)
        if self.offset is not None:
            out = out + self.offset
        return out

    def eval_coordinate(self, x, i):
        lo, hi = self._csr.indptr[i], self._csr.indptr[i + 1]
        val = float(np.dot(self._csr.data[lo:hi], np.asarray(x, dtype=float)[self._csr.indices[lo:hi]]))
        if self.offset is not None:
            val += self.offset[i]
        return val

    def increment(self, x, i, delta):
        rows, values = self.column(i)
        return rows, delta * values

    def dep(self, i):
        return self.column(i)[0]


def _sqrt_gap(new, old):
    """sqrt(|new|) - sqrt(|old|) without cancellation."""
    denom = math.sqrt(abs(new)) + math.sqrt(abs(old))
    if denom == 0.0:
        return 0.0
    return (abs(new) - abs(old)) / denom


class Example3Operator(Operator):
    """The 3-D map H(x, y, z) = (sqrt(xy) + 1, (x + z)/4 + 1, (x + y)/4).

    Defined only where ``x * y >= 0`` (checked exactly, no slack).
    """

    has_increment_form = True
    _DEP = (np.array([0, 1, 2]), np.array([0, 2]), np.array([1]))

    def __init__(self):
        super().__init__(3)

    @staticmethod
    def fixed_point():
        root = math.sqrt(379.0)
        return np.array([(23 + root) / 10, (23 + root) / 30 + 16 / 15, (23 + root) / 30 + 4 / 15])

    @staticmethod
    def _check_domain(x, y):
        if not x * y >= 0.0:
            raise DomainError(f"sqrt(x*y) undefined at x={x!r}, y={y!r}", coordinate=0, values=(x, y))

    def eval(self, v):
        x, y, z = (float(t) for t in v)
        self._check_domain(x, y)
        return np.array([math.sqrt(x * y) + 1.0, (x + z) / 4.0 + 1.0, (x + y) / 4.0])

    def eval_coordinate(self, v, i):
        x, y, z = (float(t) for t in v)
        if i == 0:
            self._check_domain(x, y)
            return math.sqrt(x * y) + 1.0
        if i == 1:
            return (x + z) / 4.0 + 1.0
        return (x + y) / 4.0

    def increment(self, v, i, delta):
        self._check_index(i)
        x, y, _ = (float(t) for t in v)
        self._check_domain(x, y)
        quarter = delta / 4.0
        if i == 0:
            moved = x + delta
            self._check_domain(moved, y)
            return self._DEP[0], np.array([math.sqrt(abs(y)) * _sqrt_gap(moved, x), quarter, quarter])
        if i == 1:
            moved = y + delta
            self._check_domain(x, moved)
            return self._DEP[1], np.array([math.sqrt(abs(x)) * _sqrt_gap(moved, y), quarter])
        return self._DEP[2], np.array([quarter])

    def dep(self, i):
        return self._DEP[i]


def check_increment(op, x, i, delta):
    """Max |increment - (eval(x + delta e_i) - eval(x))|, scaled by 1 + |eval(x + delta e_i)|."""
    x = np.asarray(x, dtype=float)
    moved = x.copy()
    moved[i] += delta
    after = op.eval(moved)
    brute = after - op.eval(x)
    rows, values = op.increment(x, i, delta)
    fast = np.zeros(op.dim)
    fast[rows] = values
    return float(np.max(np.abs(fast - brute) / (1.0 + np.abs(after))))


def d_iteration_step(state, i, op):
    """One D-iteration diffusion step, in place.

    Moves the fluid ``f = F[i]`` into ``H[i]``, clears ``F[i]`` and spreads
    ``f * P[:, i]`` over the nonzeros of column ``i``.
    """
    op._check_index(i)
    f = state.F[i]
    rows, values = op.column(i)
    state.H[i] += f
    state.F[i] = 0.0
    state.F[rows] += f * values
    state.step_count += 1
    if not (math.isfinite(state.H[i]) and np.all(np.isfinite(state.F[rows]))):
        raise DivergenceError(
            f"non-finite state after step {state.step_count} at coordinate {i}",
            step=state.step_count,
            coordinate=i,
            point=state.H.copy(),
        )
    return state


_SUPPORTED_FIELDS = {"real", "integer"}


def load_matrix_market(path):
    """Read a square ``coordinate real general`` Matrix Market file.

    Indices in the file are 1-based. Comment lines start with ``%``.
    """
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError("empty file", line=1)

    banner = lines[0].split()
    if len(banner) != 5 or banner[0].lower() != "%%matrixmarket":
        raise MatrixMarketError("missing %%MatrixMarket banner", line=1)
    obj, fmt, field, symmetry = (t.lower() for t in banner[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(f"unsupported layout '{obj} {fmt}', need 'matrix coordinate'", line=1)
    if field not in _SUPPORTED_FIELDS:
        raise MatrixMarketError(f"unsupported field '{field}', need real", line=1)
    if symmetry != "general":
        raise MatrixMarketError(f"unsupported symmetry '{symmetry}', need general", line=1)

    size = None
    seen = set()
    rows, cols, vals = [], [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        text = raw.strip()
        if not text or text.startswith("%"):
            continue
        parts = text.split()
        if size is None:
            if len(parts) != 3:
                raise MatrixMarketError("size line must be 'rows cols nnz'", line=lineno)
            try:
                size = tuple(int(p) for p in parts)
            except ValueError:
                raise MatrixMarketError(f"bad size line '{text}'", line=lineno) from None
            n, m, _ = size
            if n != m or n < 1:
                raise MatrixMarketError(f"need a non-empty square matrix, got {n}x{m}", line=lineno)
            continue
        if len(parts) != 3:
            raise MatrixMarketError(f"entry must be 'row col value', got '{text}'", line=lineno)
        try:
            r, c, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise MatrixMarketError(f"bad entry '{text}'", line=lineno) from None
        n = size[0]
        if not (1 <= r <= n and 1 <= c <= n):
            raise MatrixMarketError(f"index ({r}, {c}) outside {n}x{n}", line=lineno)
        if not math.isfinite(v):
            raise MatrixMarketError(f"non-finite value {parts[2]}", line=lineno)
        if (r, c) in seen:
            raise MatrixMarketError(f"duplicate entry ({r}, {c})", line=lineno)
        seen.add((r, c))
        rows.append(r - 1)
        cols.append(c - 1)
        vals.append(v)

    if size is None:
        raise MatrixMarketError("missing size line", line=len(lines))
    n, _, nnz = size
    if len(vals) != nnz:
        raise MatrixMarketError(f"header declares {nnz} entries, found {len(vals)}", line=len(lines))
    return SparseLinearOperator(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))
