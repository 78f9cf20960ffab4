"""Factorization command — structured low-rank approximation of a full or partial matrix."""

from __future__ import annotations

import logging
from typing import Any

import numpy as np

from structured_pursuit.errors import NumericalFailureError, UsageError
from structured_pursuit.objective import TargetProblem
from structured_pursuit.power import PowerConfig
from structured_pursuit.pursuit import CorrectionMethod, PursuitConfig, gmp_fit
from structured_pursuit.sources.loader import DatasetLoader, SourceFormat
from structured_pursuit.tools.modes import FactorMode, factor_mode_spec
from structured_pursuit.tools.report import PhaseTimer, RunReport, fit_metrics, write_run_outputs

logger = logging.getLogger(__name__)

_NONNEGATIVE_MODES = (FactorMode.NMF, FactorMode.SPARSE_NMF, FactorMode.SNN_PCA)


def build_pursuit_config(
    rank: int,
    corrections: int = 0,
    restarts: int = 5,
    power_iters: int = 250,
    gap_tol: float = 1e-8,
    delta: float = 1.0,
    seed: int = 0,
    workers: int = 1,
    keep_snapshots: bool = False,
    correction_method: CorrectionMethod | str = CorrectionMethod.AUTO,
) -> PursuitConfig:
    """Translate command options into a pursuit configuration.

    Raises:
        UsageError: If any option is out of range.
    """
    if rank < 1:
        raise UsageError(f"--rank must be >= 1, got {rank}.")
    try:
        power = PowerConfig(
            max_iterations=power_iters,
            gap_tolerance=gap_tol,
            restarts=restarts,
            seed=seed,
            workers=workers,
        )
        return PursuitConfig(
            max_rank=rank,
            power=power,
            correction_passes=corrections,
            correction_method=correction_method,
            seed=seed,
            delta=delta,
            keep_snapshots=keep_snapshots,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def sample_covariance(data: np.ndarray) -> np.ndarray:
    """Covariance of a samples × features matrix (columns centered, divided by N − 1)."""
    if data.shape[0] < 2:
        raise UsageError("Covariance needs at least two samples (rows).")
    centered = data - data.mean(axis=0)
    covariance = centered.T @ centered / (data.shape[0] - 1)
    return 0.5 * (covariance + covariance.T)


def cmd_factorize(
    input_path: str,
    source_format: SourceFormat | str = SourceFormat.DENSE_CSV,
    mode: FactorMode | str = FactorMode.SVD,
    rank: int = 5,
    sparsity_u: int | None = None,
    sparsity_v: int | None = None,
    nonneg_u: bool = False,
    nonneg_v: bool = False,
    symmetric: bool = False,
    corrections: int = 0,
    restarts: int = 5,
    power_iters: int = 250,
    gap_tol: float = 1e-8,
    delta: float = 1.0,
    seed: int = 0,
    out_dir: str | None = None,
    covariance: bool = False,
    workers: int = 1,
    correction_method: CorrectionMethod | str = CorrectionMethod.AUTO,
) -> RunReport:
    """Fit a structured factorization of the input matrix.

    Args:
        input_path: Dense CSV, MatrixMarket or rating-triple file.
        mode: Application mode selecting the atom sets (svd, sparse-pca, snn-pca, nmf,
            sparse-nmf).
        rank: Number of rank-one terms.
        covariance: Factorize the sample covariance of the input instead of the input.
        out_dir: If given, write report, factor file and trace CSV there.

    Returns:
        The run report.

    Raises:
        UsageError: Inconsistent options.
        InputParseError: Unreadable input.
        NumericalFailureError: No atom could be selected at the first iteration.
    """
    mode = FactorMode(mode)
    source_format = SourceFormat(source_format)
    config = build_pursuit_config(
        rank, corrections, restarts, power_iters, gap_tol, delta, seed, workers,
        correction_method=correction_method,
    )
    timer = PhaseTimer()

    with timer.phase("load"):
        loader = DatasetLoader()
        try:
            dataset = loader.load(input_path, source_format)
        finally:
            loader.close()
        if covariance:
            if dataset.dense is None:
                raise UsageError("--covariance needs a fully observed input matrix.")
            target = sample_covariance(dataset.dense)
            shape = target.shape
        else:
            shape = dataset.shape

    mode_spec = factor_mode_spec(
        mode, shape, sparsity_u, sparsity_v, nonneg_u, nonneg_v, symmetric,
    )
    if covariance:
        problem = TargetProblem.full(target, symmetric=mode_spec.symmetric)
    else:
        problem = dataset.to_problem(symmetric=mode_spec.symmetric)
    if mode in _NONNEGATIVE_MODES and np.any(problem.observed < 0):
        logger.warning("Target has negative entries; non-negative factors cannot fit them exactly")

    with timer.phase("fit"):
        model, trace = gmp_fit(problem, mode_spec.spec_u, mode_spec.spec_v, config)
    if trace.lmo_failed:
        raise NumericalFailureError("LMO failed at the first iteration; the target is numerically zero.")

    target_sq = problem.target_norm**2
    report = RunReport(
        command="factorize",
        seed=seed,
        config={
            "mode": mode.value,
            "rank": rank,
            "covariance": covariance,
            "atoms": mode_spec.to_dict(),
            "pursuit": config.to_dict(),
        },
        dataset=dataset.describe(),
        trace=trace,
        metrics={**fit_metrics(problem, model), "rank": model.rank},
        details={
            "explained_variance_by_rank": [
                1.0 - 2.0 * c / target_sq if target_sq > 0 else 0.0 for c in trace.costs
            ],
        },
        timings=timer.timings,
    )
    if out_dir is not None:
        with timer.phase("write"):
            report.details["outputs"] = write_run_outputs(out_dir, report, model, mode_spec)
    return report


def summarize(report: RunReport) -> dict[str, Any]:
    """Compact view of a report for tool responses."""
    return {
        "command": report.command,
        "metrics": report.metrics,
        "iterations": 0 if report.trace is None else len(report.trace),
        "outputs": report.details.get("outputs", {}),
    }
