import numpy as np
import pytest
import scipy.sparse as sp

from osb import (
    BaselineState,
    DivergenceError,
    Example3Operator,
    Problem,
    SparseLinearOperator,
    StopRule,
    example3_problem,
    gauss_seidel_sweep,
    jacobi_sweep,
    run_baseline,
)

from conftest import linear_problem

E3 = Example3Operator()


@pytest.mark.parametrize("sweep", [jacobi_sweep, gauss_seidel_sweep])
def test_fixed_point_absorbed(sweep):
    xs = E3.fixed_point()
    s = sweep(BaselineState(xs.copy()), E3)
    np.testing.assert_allclose(s.X, xs, atol=1e-14)
    assert s.sweep_count == 1


def test_jacobi_paper_x0():
    s = jacobi_sweep(BaselineState(np.array([4.2, 1, 1.5])), E3)
    np.testing.assert_allclose(s.X, [3.04939015319192, 2.425, 1.3], rtol=1e-14)


def test_jacobi_zero_operator():
    op = SparseLinearOperator(sp.csc_matrix((3, 3)))
    s = jacobi_sweep(BaselineState(np.array([1.0, 2.0, 3.0])), op)
    np.testing.assert_array_equal(s.X, 0.0)


def test_jacobi_equals_eval(rng):
    problem = linear_problem(20, rng)
    x = rng.normal(size=20)
    np.testing.assert_array_equal(jacobi_sweep(BaselineState(x.copy()), problem.operator).X, problem.operator.eval(x))


def test_gauss_seidel_paper_x0():
    s = gauss_seidel_sweep(BaselineState(np.array([4.2, 1, 1.5])), E3, debug=True)
    np.testing.assert_allclose(s.X, [3.04939015319192, 2.13734753829798, 1.296684422872475], rtol=1e-14)


def test_gauss_seidel_identity():
    op = SparseLinearOperator(sp.identity(3))
    s = gauss_seidel_sweep(BaselineState(np.array([1.0, -2.0, 3.0])), op)
    np.testing.assert_array_equal(s.X, [1.0, -2.0, 3.0])


def test_gauss_seidel_debug_on_linear(rng):
    problem = linear_problem(30, rng)
    s = BaselineState(problem.x0.copy())
    for _ in range(5):
        gauss_seidel_sweep(s, problem.operator, debug=True)


def test_gauss_seidel_domain_violation_reports_coordinate():
    with pytest.raises(DivergenceError) as info:
        gauss_seidel_sweep(BaselineState(np.array([-1.0, 1.0, 0.0])), E3)
    assert info.value.coordinate == 0


@pytest.mark.parametrize("method", ["jacobi", "gauss-seidel"])
def test_run_baseline_trace_shape(method):
    _, trace = run_baseline(example3_problem(), method, StopRule(max_updates=30))
    assert [it for it, _ in trace.samples] == list(range(11))
    assert trace.strategy == "sweep" and trace.metric == "distance"


@pytest.mark.parametrize("method", ["jacobi", "gauss-seidel"])
def test_run_baseline_from_fixed_point(method):
    state, trace = run_baseline(example3_problem(E3.fixed_point()), method, StopRule(tol=1e-12, max_updates=150))
    assert state.sweep_count == 0
    assert len(trace.samples) == 1 and trace.samples[0][1] <= 1e-12


def test_run_baseline_divergence():
    op = SparseLinearOperator(sp.csc_matrix(np.array([[3.0]])))
    with pytest.raises(DivergenceError) as info:
        run_baseline(Problem(op, [1e300]), "jacobi", StopRule(max_updates=100))
    assert info.value.trace.samples[0] == (0.0, pytest.approx(2e300))
