"""Tests for run reports, metrics and output files."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pyarrow.csv as pacsv
import pytest

from structured_pursuit import __version__
from structured_pursuit.atomset import AtomSpec, as_atom
from structured_pursuit.objective import FactorModel, RankOneTerm, TargetProblem
from structured_pursuit.pursuit import PursuitConfig, PursuitTrace, StopReason, TraceRecord, gmp_fit
from structured_pursuit.tools.modes import ModeSpec
from structured_pursuit.tools.report import (
    FACTOR_FILE,
    REPORT_FILE,
    TRACE_COLUMNS,
    TRACE_FILE,
    PhaseTimer,
    RunReport,
    atomic_write_text,
    fit_metrics,
    load_factor_file,
    rmse,
    write_factor_file,
    write_run_outputs,
    write_trace_csv,
)


def _trace() -> PursuitTrace:
    trace = PursuitTrace(initial_cost=10.0, stop_reason=StopReason.OPTIMAL)
    trace.records.append(TraceRecord(1, 4.0, np.sqrt(8.0), 3.0, 1e-9, 0, [2.0]))
    trace.records.append(TraceRecord(2, 1.0, np.sqrt(2.0), 2.0, 0.0, 1, [2.0, 1.0], rank_deficient=True))
    return trace


def _rank_one_model() -> FactorModel:
    spec = AtomSpec.unit_sphere(2)
    term = RankOneTerm(as_atom(np.array([1.0, 0.0]), spec), as_atom(np.array([0.0, 1.0]), spec))
    return FactorModel([term], np.array([2.0]), (2, 2))


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


class TestMetrics:
    def test_fit_metrics_full(self) -> None:
        problem = TargetProblem.full(np.array([[0.0, 2.0], [0.0, 1.0]]))
        metrics = fit_metrics(problem, _rank_one_model())
        assert metrics["cost"] == pytest.approx(0.5)
        assert metrics["reconstruction_error"] == pytest.approx(1.0)
        assert metrics["explained_variance_ratio"] == pytest.approx(1.0 - 1.0 / 5.0)
        assert metrics["rmse"] == pytest.approx(np.sqrt(1.0 / 4.0))

    def test_rmse_masked(self) -> None:
        problem = TargetProblem.masked(np.array([[1.0, 2.0], [3.0, 4.0]]), [(0, 1), (1, 0)])
        assert rmse(problem, _rank_one_model()) == pytest.approx(np.sqrt(9.0 / 2.0))

    def test_zero_target(self) -> None:
        problem = TargetProblem.full(np.zeros((2, 2)))
        metrics = fit_metrics(problem, FactorModel.empty((2, 2)))
        assert metrics["explained_variance_ratio"] == 0.0
        assert metrics["cost"] == 0.0


class TestPhaseTimer:
    def test_accumulates(self) -> None:
        timer = PhaseTimer()
        with timer.phase("fit"):
            pass
        with timer.phase("fit"):
            pass
        with timer.phase("load"):
            pass
        assert set(timer.timings) == {"fit", "load"}
        assert all(v >= 0.0 for v in timer.timings.values())

    def test_records_on_error(self) -> None:
        timer = PhaseTimer()
        with pytest.raises(RuntimeError):
            with timer.phase("boom"):
                raise RuntimeError("x")
        assert "boom" in timer.timings


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


class TestRunReport:
    def test_to_dict(self) -> None:
        report = RunReport("factorize", {"rank": 2}, seed=3, trace=_trace(), timings={"fit": 0.1234567})
        data = report.to_dict()
        assert data["version"] == __version__
        assert data["stop_reason"] == "optimal"
        assert data["lmo_failed"] is False
        assert data["rank_deficient_iterations"] == [2]
        assert [row["iteration"] for row in data["trace"]] == [1, 2]
        assert data["timings"] == {"fit": 0.123457}
        assert "details" not in data

    def test_without_timings(self) -> None:
        report = RunReport("coherence", {}, seed=0, details={"mu": [0.1]})
        data = report.to_dict(include_timings=False)
        assert "timings" not in data
        assert "trace" not in data
        assert data["details"] == {"mu": [0.1]}

    def test_json_is_sorted(self) -> None:
        text = RunReport("complete", {"b": 1, "a": 2}, seed=0).to_json()
        assert text.endswith("\n")
        assert json.loads(text)["config"] == {"a": 2, "b": 1}
        assert text.index('"command"') < text.index('"seed"')


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


class TestFiles:
    def test_atomic_write_leaves_no_temporaries(self, tmp_path: Path) -> None:
        target = tmp_path / "nested" / "out.txt"
        atomic_write_text(target, "first")
        atomic_write_text(target, "second")
        assert target.read_text(encoding="utf-8") == "second"
        assert [p.name for p in target.parent.iterdir()] == ["out.txt"]

    def test_trace_csv(self, tmp_path: Path) -> None:
        path = write_trace_csv(_trace(), tmp_path / "trace.csv")
        table = pacsv.read_csv(str(path))
        assert table.column_names == TRACE_COLUMNS
        assert table.column("iteration").to_pylist() == [1, 2]
        assert table.column("cost").to_pylist() == [4.0, 1.0]
        assert table.column("corrections").to_pylist() == [0, 1]

    def test_factor_round_trip(self, tmp_path: Path) -> None:
        Y = np.random.default_rng(0).standard_normal((5, 4))
        spec_u, spec_v = AtomSpec.sparse(5, 2), AtomSpec.unit_sphere(4)
        model, _ = gmp_fit(TargetProblem.full(Y), spec_u, spec_v, PursuitConfig(max_rank=3))
        mode = ModeSpec(spec_u, spec_v, False)
        path = write_factor_file(tmp_path / "factors.json", model, mode)

        loaded, loaded_mode = load_factor_file(path)
        assert loaded_mode == mode
        np.testing.assert_array_equal(loaded.weights, model.weights)
        np.testing.assert_array_equal(loaded.U, model.U)
        np.testing.assert_array_equal(loaded.V, model.V)

    def test_symmetric_factor_round_trip(self, tmp_path: Path) -> None:
        spec = AtomSpec.unit_sphere(2)
        atom = as_atom(np.array([0.6, 0.8]), spec)
        model = FactorModel([RankOneTerm(atom, atom)], np.array([1.5]), (2, 2))
        path = write_factor_file(tmp_path / "f.json", model, ModeSpec(spec, None, True))
        loaded, mode = load_factor_file(path)
        assert mode.symmetric
        assert mode.spec_v is None
        np.testing.assert_array_equal(loaded.reconstruct(), model.reconstruct())

    def test_rejects_other_json(self, tmp_path: Path) -> None:
        path = tmp_path / "other.json"
        path.write_text('{"format": "something-else"}', encoding="utf-8")
        with pytest.raises(ValueError, match="not a factor file"):
            load_factor_file(path)

    def test_run_outputs(self, tmp_path: Path) -> None:
        spec = AtomSpec.unit_sphere(2)
        report = RunReport("factorize", {}, seed=0, trace=_trace())
        written = write_run_outputs(tmp_path, report, _rank_one_model(), ModeSpec(spec, spec, False))
        assert set(written) == {"factors", "trace", "report"}
        assert Path(written["report"]).name == REPORT_FILE
        assert Path(written["factors"]).name == FACTOR_FILE
        assert Path(written["trace"]).name == TRACE_FILE
        assert json.loads(Path(written["report"]).read_text(encoding="utf-8"))["command"] == "factorize"

    def test_report_only(self, tmp_path: Path) -> None:
        written = write_run_outputs(tmp_path, RunReport("coherence", {}, seed=0))
        assert set(written) == {"report"}
