"""
Run reports, metrics and output files.

A run writes up to three files: the report (JSON), the factor file (JSON, floats written
with round-trip precision) and the per-iteration trace (CSV via ``pyarrow.csv``). Every file
is written to a temporary sibling first and moved into place with ``os.replace``.
"""

from __future__ import annotations

import json
import os
import tempfile
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

import numpy as np
import pyarrow as pa
import pyarrow.csv as pacsv

from structured_pursuit import __version__
from structured_pursuit.atomset import AtomSpec
from structured_pursuit.objective import FactorModel, TargetProblem, cost
from structured_pursuit.pursuit import PursuitTrace
from structured_pursuit.tools.modes import ModeSpec

TRACE_COLUMNS = ["iteration", "cost", "residual_norm", "lmo_value", "lmo_gap", "corrections"]
FACTOR_FILE_FORMAT = "structured-pursuit-factors"
REPORT_FILE = "report.json"
FACTOR_FILE = "factors.json"
TRACE_FILE = "trace.csv"


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def rmse(problem: TargetProblem, model: FactorModel) -> float:
    """Root mean squared error over the observed entries (no ½ factor)."""
    return float(np.sqrt(2.0 * cost(problem, model) / problem.n_observed))


def fit_metrics(problem: TargetProblem, model: FactorModel) -> dict[str, float]:
    """Cost, unscaled reconstruction error, explained-variance ratio and RMSE on ``problem``.

    The explained-variance ratio is ``1 − ‖Y − X‖²_Ω / ‖Y‖²_Ω``.
    """
    value = cost(problem, model)
    target_sq = problem.target_norm**2
    return {
        "cost": value,
        "reconstruction_error": float(np.sqrt(2.0 * value)),
        "explained_variance_ratio": 1.0 - 2.0 * value / target_sq if target_sq > 0 else 0.0,
        "rmse": float(np.sqrt(2.0 * value / problem.n_observed)),
    }


class PhaseTimer:
    """Wall-clock seconds per named phase."""

    def __init__(self) -> None:
        self.timings: dict[str, float] = {}

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - start


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


def trace_rows(trace: PursuitTrace) -> list[dict[str, Any]]:
    return [
        {
            "iteration": r.iteration,
            "cost": r.cost,
            "residual_norm": r.residual_norm,
            "lmo_value": r.lmo_value,
            "lmo_gap": r.lmo_gap,
            "corrections": r.corrections,
        }
        for r in trace.records
    ]


@dataclass
class RunReport:
    command: str
    config: dict[str, Any]
    seed: int
    dataset: dict[str, Any] = field(default_factory=dict)
    trace: PursuitTrace | None = None
    metrics: dict[str, Any] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self, include_timings: bool = True) -> dict[str, Any]:
        data: dict[str, Any] = {
            "command": self.command,
            "version": __version__,
            "seed": self.seed,
            "config": self.config,
            "dataset": self.dataset,
            "metrics": self.metrics,
        }
        if self.trace is not None:
            data["trace"] = trace_rows(self.trace)
            data["stop_reason"] = self.trace.stop_reason.value
            data["lmo_failed"] = self.trace.lmo_failed
            data["rank_deficient_iterations"] = [
                r.iteration for r in self.trace.records if r.rank_deficient
            ]
        if self.details:
            data["details"] = self.details
        if include_timings:
            data["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return data

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


@contextmanager
def _atomic_target(path: Path) -> Iterator[Path]:
    """Yield a temporary path next to ``path``; move it into place on success."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    os.close(fd)
    tmp = Path(tmp_name)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def atomic_write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    with _atomic_target(path) as tmp:
        tmp.write_text(text, encoding="utf-8")
    return path


def write_csv_table(table: pa.Table, path: str | Path) -> Path:
    path = Path(path)
    with _atomic_target(path) as tmp:
        pacsv.write_csv(table, str(tmp), write_options=pacsv.WriteOptions(quoting_style="none"))
    return path


def trace_table(trace: PursuitTrace) -> pa.Table:
    rows = trace_rows(trace)
    return pa.table(
        {
            "iteration": pa.array([r["iteration"] for r in rows], type=pa.int64()),
            "cost": pa.array([r["cost"] for r in rows], type=pa.float64()),
            "residual_norm": pa.array([r["residual_norm"] for r in rows], type=pa.float64()),
            "lmo_value": pa.array([r["lmo_value"] for r in rows], type=pa.float64()),
            "lmo_gap": pa.array([r["lmo_gap"] for r in rows], type=pa.float64()),
            "corrections": pa.array([r["corrections"] for r in rows], type=pa.int64()),
        }
    )


def write_trace_csv(trace: PursuitTrace, path: str | Path) -> Path:
    return write_csv_table(trace_table(trace), path)


def factor_document(model: FactorModel, mode: ModeSpec) -> dict[str, Any]:
    document = model.to_dict()
    document.update({"format": FACTOR_FILE_FORMAT, "version": 1, **mode.to_dict()})
    return document


def write_factor_file(path: str | Path, model: FactorModel, mode: ModeSpec) -> Path:
    return atomic_write_text(path, json.dumps(factor_document(model, mode), indent=2) + "\n")


def load_factor_file(path: str | Path) -> tuple[FactorModel, ModeSpec]:
    """Reload a factor file written by :func:`write_factor_file`."""
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    if document.get("format") != FACTOR_FILE_FORMAT:
        raise ValueError(f"{path} is not a factor file.")
    spec_u = AtomSpec.from_dict(document["spec_u"])
    spec_v = None if document["spec_v"] is None else AtomSpec.from_dict(document["spec_v"])
    mode = ModeSpec(spec_u, spec_v, bool(document["symmetric"]))
    model = FactorModel.from_dict(document, spec_u, spec_v or spec_u)
    return model, mode


def write_run_outputs(
    out_dir: str | Path,
    report: RunReport,
    model: FactorModel | None = None,
    mode: ModeSpec | None = None,
) -> dict[str, str]:
    """Write report, factor file and trace CSV into ``out_dir``; returns the paths."""
    out = Path(out_dir)
    written: dict[str, str] = {}
    if model is not None and mode is not None:
        written["factors"] = str(write_factor_file(out / FACTOR_FILE, model, mode))
    if report.trace is not None:
        written["trace"] = str(write_trace_csv(report.trace, out / TRACE_FILE))
    written["report"] = str(atomic_write_text(out / REPORT_FILE, report.to_json()))
    return written
