import io
import subprocess
import sys

import numpy as np
import pytest

from osb.bench import read_csv
from osb.cli import EXIT_DIVERGED, EXIT_IO, EXIT_OK, EXIT_USAGE, RunConfig, parse_args, run_comparison

MTX_IDENTITY = "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n"


def test_defaults():
    cfg = parse_args([])
    assert cfg == RunConfig()
    assert cfg.methods == ("osb", "jacobi", "gauss-seidel")
    assert (cfg.strategy, cfg.seed, cfg.tol, cfg.max_iters, cfg.metric, cfg.out) == ("greedy", 42, 1e-12, 50.0, "auto", "-")


def test_budget_flag():
    cfg = parse_args(["--problem", "example3", "--max-iters", "10"])
    assert cfg.max_iters == 10 and cfg.problem == "example3"


def test_matrix_with_zeros():
    cfg = parse_args(["--matrix", "p.mtx", "--x0", "zeros"])
    assert cfg.problem == "matrix" and cfg.matrix == "p.mtx" and cfg.x0 == "zeros"


@pytest.mark.parametrize(
    "argv,flag",
    [
        (["--strategy", "greedy", "--strategy", "cyclic"], "--strategy"),
        (["--bogus"], "--bogus"),
        (["--tol"], "--tol"),
        (["--problem", "example3", "--matrix", "p.mtx", "--x0", "zeros"], "--matrix"),
        (["--matrix", "p.mtx"], "--x0"),
        (["--methods", "osb,newton"], "--methods"),
        (["--tol", "-1"], "--tol"),
        (["--seed", "-3"], "--seed"),
    ],
)
def test_usage_errors(argv, flag, capsys):
    with pytest.raises(SystemExit) as info:
        parse_args(argv)
    assert info.value.code == EXIT_USAGE
    assert flag in capsys.readouterr().err


def run_cfg(**kw):
    out, err = io.StringIO(), io.StringIO()
    code = run_comparison(RunConfig(**kw), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_default_comparison(tmp_path):
    path = tmp_path / "out.csv"
    code, out, _ = run_cfg(out=str(path))
    assert code == EXIT_OK
    traces = {t.method: t for t in read_csv(path)}
    assert list(traces) == ["osb", "jacobi", "gauss-seidel"]
    osb10 = dict(traces["osb"].samples)[10.0]
    jac10 = dict(traces["jacobi"].samples)[10.0]
    assert jac10 / osb10 >= 100
    assert len(out.strip().splitlines()) == 3


def test_fixed_point_alias(tmp_path):
    path = tmp_path / "out.csv"
    code, _, _ = run_cfg(x0="fixed-point", out=str(path))
    assert code == EXIT_OK
    for t in read_csv(path):
        assert len(t.samples) == 1
        assert t.samples[0][0] == 0.0 and t.samples[0][1] <= 1e-12


def test_identity_matrix_terminates_at_zero(tmp_path):
    mtx = tmp_path / "i.mtx"
    mtx.write_text(MTX_IDENTITY)
    path = tmp_path / "out.csv"
    code, _, _ = run_cfg(problem="matrix", matrix=str(mtx), x0="1,1,1", methods=("osb",), out=str(path))
    assert code == EXIT_OK
    (t,) = read_csv(path)
    assert t.samples == [(0.0, 0.0)]


def test_x0_from_file(tmp_path):
    mtx = tmp_path / "m.mtx"
    mtx.write_text("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 0.5\n2 1 0.25\n")
    x0 = tmp_path / "x0.txt"
    x0.write_text("1.0\n2.0\n")
    path = tmp_path / "out.csv"
    code, out, _ = run_cfg(problem="matrix", matrix=str(mtx), x0=str(x0), out=str(path))
    assert code == EXIT_OK
    for t in read_csv(path):
        assert t.samples[-1][1] <= 1e-11


@pytest.mark.parametrize(
    "kw",
    [
        dict(x0="1,2"),
        dict(x0="nonexistent-file.txt"),
        dict(problem="matrix", matrix="MTX", x0="fixed-point"),
        dict(problem="matrix", matrix="MTX", x0="zeros", metric="distance"),
    ],
)
def test_run_usage_errors(kw, tmp_path):
    mtx = tmp_path / "i.mtx"
    mtx.write_text(MTX_IDENTITY)
    if kw.get("matrix") == "MTX":
        kw["matrix"] = str(mtx)
    code, _, err = run_cfg(out=str(tmp_path / "o.csv"), **kw)
    assert code == EXIT_USAGE and "error" in err


def test_missing_matrix_is_io_error(tmp_path):
    code, _, _ = run_cfg(problem="matrix", matrix=str(tmp_path / "missing.mtx"), x0="zeros")
    assert code == EXIT_IO


def test_unwritable_output_is_io_error(tmp_path):
    code, _, _ = run_cfg(out=str(tmp_path / "no" / "such" / "dir.csv"))
    assert code == EXIT_IO


def test_divergence_does_not_abort_other_methods(tmp_path):
    mtx = tmp_path / "d.mtx"
    mtx.write_text("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 3\n")
    path = tmp_path / "out.csv"
    code, out, err = run_cfg(problem="matrix", matrix=str(mtx), x0="1e300", out=str(path), max_iters=100)
    assert code == EXIT_DIVERGED
    assert [t.method for t in read_csv(path)] == ["osb", "jacobi", "gauss-seidel"]
    assert out.count("DIVERGED") == 3


def test_stdout_csv_is_clean(capsys):
    code = run_comparison(RunConfig(max_iters=2))
    captured = capsys.readouterr()
    assert code == EXIT_OK
    assert captured.out.splitlines()[0] == "method,strategy,seed,normalized_iteration,error"
    assert "osb" in captured.err


def test_module_entry_point(tmp_path):
    path = tmp_path / "o.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "osb", "--strategy", "random", "--seed", "7", "--out", str(path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    (osb, *_) = read_csv(path)
    assert osb.strategy == "random" and osb.seed == 7
    bad = subprocess.run([sys.executable, "-m", "osb", "--nope"], capture_output=True, text=True)
    assert bad.returncode == 2
