"""One Step Back (OSB) coordinate-wise fixed-point iteration."""

from .baselines import BaselineState, gauss_seidel_sweep, jacobi_sweep, run_baseline
from .bench import Trace, error_metric, export_csv, normalized_iteration, read_csv
from .core import (
    PAPER_X0,
    Problem,
    SolverState,
    StopRule,
    conservation_gap,
    estimator,
    example3_problem,
    init_state,
    osb_step,
    residual_norm,
    run,
)
from .errors import DivergenceError, DomainError, MatrixMarketError, OSBError, UsageError
from .operators import (
    Example3Operator,
    FunctionOperator,
    Operator,
    SparseLinearOperator,
    check_increment,
    d_iteration_step,
    load_matrix_market,
)
from .strategies import CyclicSchedule, GreedySchedule, RandomSchedule, make_schedule

__version__ = "0.1.0"
