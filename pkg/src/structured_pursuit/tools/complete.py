"""Completion command — fit on a training split, pick the rank on validation, report test RMSE."""

from __future__ import annotations

import logging

from structured_pursuit.errors import NumericalFailureError, UsageError
from structured_pursuit.pursuit import CorrectionMethod, correct_atoms, gmp_fit
from structured_pursuit.randomness import derive_seed
from structured_pursuit.sources.loader import DatasetLoader, SourceFormat, SplitLabel
from structured_pursuit.tools.factorize import build_pursuit_config
from structured_pursuit.tools.modes import CompletionMode, completion_mode_spec
from structured_pursuit.tools.report import PhaseTimer, RunReport, rmse, write_run_outputs
from structured_pursuit.validation import parse_split

logger = logging.getLogger(__name__)

DEFAULT_SPLIT = "0.5,0.2,0.3"

# Seed stream for the final correction pass.
_FINAL_CORRECTION_STREAM = 7


def cmd_complete(
    input_path: str,
    source_format: SourceFormat | str = SourceFormat.RATING_TRIPLES,
    split: str | tuple[float, float, float] = DEFAULT_SPLIT,
    rank: int = 10,
    mode: CompletionMode | str = CompletionMode.PLAIN,
    sparsity_u: int | None = None,
    sparsity_v: int | None = None,
    nonneg_u: bool = False,
    nonneg_v: bool = False,
    corrections: int = 0,
    restarts: int = 5,
    power_iters: int = 250,
    gap_tol: float = 1e-8,
    delta: float = 1.0,
    seed: int = 0,
    out_dir: str | None = None,
    skip_test: bool = False,
    workers: int = 1,
    correction_method: CorrectionMethod | str = CorrectionMethod.AUTO,
) -> RunReport:
    """Matrix completion with rank selection.

    Fits ranks ``1 … rank`` on the training entries, selects the rank with the lowest
    validation RMSE (the full budget when the validation split is empty), optionally runs a
    final correction pass and reports RMSE on every split.

    Raises:
        UsageError: Malformed split, empty training split, or an empty test split while test
            evaluation is requested.
        InputParseError: Unreadable input.
        NumericalFailureError: No atom could be selected at the first iteration.
    """
    fractions = parse_split(split) if isinstance(split, str) else tuple(split)
    mode = CompletionMode(mode)
    config = build_pursuit_config(
        rank, corrections, restarts, power_iters, gap_tol, delta, seed, workers,
        keep_snapshots=True, correction_method=correction_method,
    )
    timer = PhaseTimer()

    with timer.phase("load"):
        loader = DatasetLoader()
        try:
            dataset = loader.load(input_path, source_format)
        finally:
            loader.close()
        dataset = dataset.with_split(fractions, seed)

    if dataset.count(SplitLabel.TRAIN) == 0:
        raise UsageError("Training split is empty; increase the first --split fraction.")
    evaluate_test = not skip_test
    if evaluate_test and dataset.count(SplitLabel.TEST) == 0:
        raise UsageError("Test split is empty but test evaluation was requested (use --skip-test).")
    has_validation = dataset.count(SplitLabel.VALIDATION) > 0
    if not has_validation:
        logger.warning("Validation split is empty; using the full rank budget")

    mode_spec = completion_mode_spec(
        mode, dataset.shape, sparsity_u, sparsity_v, nonneg_u, nonneg_v,
    )
    train = dataset.to_problem(SplitLabel.TRAIN)
    validation = dataset.to_problem(SplitLabel.VALIDATION) if has_validation else None
    test = dataset.to_problem(SplitLabel.TEST) if evaluate_test else None

    with timer.phase("fit"):
        _, trace = gmp_fit(train, mode_spec.spec_u, mode_spec.spec_v, config)
    if trace.lmo_failed or not trace.snapshots:
        raise NumericalFailureError("LMO failed at the first iteration; the training data is numerically zero.")

    with timer.phase("select"):
        curve = []
        for snapshot in trace.snapshots:
            point = {"rank": snapshot.rank, "train_rmse": rmse(train, snapshot)}
            if validation is not None:
                point["validation_rmse"] = rmse(validation, snapshot)
            curve.append(point)
        if validation is not None:
            best = min(range(len(curve)), key=lambda i: (curve[i]["validation_rmse"], i))
        else:
            best = len(curve) - 1
        model = trace.snapshots[best]

    if corrections:
        with timer.phase("correct"):
            model = correct_atoms(
                train, model, mode_spec.spec_u, mode_spec.spec_v, config.power, corrections,
                seed=derive_seed(seed, _FINAL_CORRECTION_STREAM),
                method=config.correction_method,
            )

    metrics = {
        "selected_rank": model.rank,
        "train_rmse": rmse(train, model),
    }
    if validation is not None:
        metrics["validation_rmse"] = rmse(validation, model)
    if test is not None:
        metrics["test_rmse"] = rmse(test, model)

    report = RunReport(
        command="complete",
        seed=seed,
        config={
            "mode": mode.value,
            "rank": rank,
            "split": list(fractions),
            "skip_test": skip_test,
            "atoms": mode_spec.to_dict(),
            "pursuit": config.to_dict(),
        },
        dataset=dataset.describe(),
        trace=trace,
        metrics=metrics,
        details={"rank_curve": curve},
        timings=timer.timings,
    )
    if out_dir is not None:
        with timer.phase("write"):
            report.details["outputs"] = write_run_outputs(out_dir, report, model, mode_spec)
    return report
