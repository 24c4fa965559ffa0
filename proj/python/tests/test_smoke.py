import math
import os

import numpy as np
import pytest

import quasilog

CONFIGS = os.environ.get(
    "QUASILOG_CONFIGS", os.path.join(os.path.dirname(__file__), "..", "..", "configs")
)


def test_transform_maps_vectorize():
    t = np.array([0.0, 0.5, 2.0, 10.0])
    u = quasilog.f(1.0, t)
    assert u.shape == t.shape
    assert u[0] == 0.0
    np.testing.assert_allclose(quasilog.inverse_transform(1.0, u), t, rtol=1e-12)
    assert quasilog.f(0.0, 7.0) == 7.0
    assert quasilog.h(1.0, 0.0) == 1.0
    fp = quasilog.f_prime(1.0, 2.0)
    assert fp == pytest.approx(1.0 / math.sqrt(1.0 + 2.0 * quasilog.f(1.0, 2.0) ** 2), rel=1e-14)


def test_domain_errors_are_python_exceptions():
    with pytest.raises(quasilog.DomainError):
        quasilog.h_inverse(1.0, 1.5)
    assert issubclass(quasilog.ParseError, quasilog.Error)


def test_run_verify_f():
    result = quasilog.run("verify-f", overrides={"samples": 50})
    assert result["passed"]
    assert "transform.csv" in result["artifacts"]
    for line in result["verdict"].splitlines():
        assert len(line.split()) == 4


def test_run_rejects_bad_values():
    with pytest.raises(quasilog.ParseError, match="kappa"):
        quasilog.run("solve", overrides={"kappa": -1})
    with pytest.raises(quasilog.ParseError):
        quasilog.run("solve", overrides={"not_a_key": 1})


def test_run_from_config_file_with_override(tmp_path):
    result = quasilog.run(
        config=os.path.join(CONFIGS, "branch_1d.ini"),
        overrides={"n": 31, "steps": 6},
        out=str(tmp_path),
    )
    assert result["kind"] == "branch"
    assert result["passed"]
    assert (tmp_path / "verdict.txt").read_text() == result["verdict"]
    assert (tmp_path / "branch.csv").exists()


def test_solve_returns_fields():
    out = quasilog.solve({"n": 31, "lambda": 2.0, "kappa": 1.0})
    assert out["theta"].shape == (31,)
    assert out["lambda"] == pytest.approx(2.0 * out["lambda1"])
    assert out["theta"].min() > 0.0
    np.testing.assert_allclose(out["psi"], quasilog.f(1.0, out["theta"]), rtol=1e-14)


def test_large_solution_and_keller_osserman():
    large = quasilog.minimal_large_solution(2, 0.3, 99.3, 1000.0, 4.0, mesh_n=200)
    assert large["monotone"]
    assert large["interior_differences"][-1] <= 1e-6
    ko = quasilog.keller_osserman(4.0, 1e4)
    assert ko["tail_exponent"] == 1.25
    with pytest.raises(quasilog.PreconditionError):
        quasilog.keller_osserman(3.0, 1e4)
