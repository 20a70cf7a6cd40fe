import json
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

from osb import FunctionOperator, Problem, SparseLinearOperator

FIXTURES = Path(__file__).parent / "fixtures"


def substochastic(n, rng, density=0.2):
    """Random nonnegative sparse matrix with column sums in [0.5, 0.95]."""
    m = sp.random(n, n, density=density, random_state=rng, format="csc")
    m.data = np.abs(m.data) + 0.01
    sums = np.asarray(m.sum(axis=0)).ravel()
    scale = rng.uniform(0.5, 0.95, size=n) / np.where(sums > 0, sums, 1.0)
    return (m @ sp.diags(scale)).tocsc()


def linear_problem(n, rng, density=0.2):
    P = substochastic(n, rng, density)
    b = rng.uniform(0, 1, size=n)
    return Problem(SparseLinearOperator(P, offset=b), rng.uniform(-1, 1, size=n))


def dense_operator(matrix, offset=None):
    """Full-evaluation-only operator: no increment form, no dependency info."""
    A = np.asarray(matrix.todense() if sp.issparse(matrix) else matrix)
    c = np.zeros(A.shape[0]) if offset is None else offset
    return FunctionOperator(lambda x: A @ x + c, A.shape[0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture(scope="session")
def curves():
    return json.loads((FIXTURES / "example3_curves.json").read_text())
