"""
Greedy pursuit loops.

- :func:`gmp_fit` — generalized matrix pursuit: pick a rank-one atom with the power-method
  LMO, refit the weights, optionally correct earlier atoms, repeat.
- :func:`gp_fit_finite` — pursuit over a finite vector dictionary (OMP with a full refit,
  MP with a single new weight).
- :func:`cumulative_coherence` / :func:`coherence_profile` — the dictionary quantities that
  bound the finite-dictionary convergence rate.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any

import numpy as np
import scipy.linalg

from structured_pursuit import (
    ATOM_NORM_TOLERANCE,
    CORRECTION_MARGIN,
    GRAM_CONDITION_LIMIT,
    OPTIMALITY_THRESHOLD,
)
from structured_pursuit.atomset import AtomSpec, as_atom, cone_projection
from structured_pursuit.errors import LmoFailureError
from structured_pursuit.objective import (
    FactorModel,
    RankOneTerm,
    TargetProblem,
    cost,
    gram_system,
    residual_entries,
    residual_operator,
    term_norm_sq,
    term_values,
)
from structured_pursuit.power import Operator, PowerConfig, PowerResult, degrade_lmo, lmo
from structured_pursuit.randomness import derive_seed

logger = logging.getLogger(__name__)

# Alternating least-squares corrections stop after this many sweeps, or earlier once a sweep
# lowers the fit by less than this relative amount.
ALTERNATING_STEPS = 50
ALTERNATING_TOLERANCE = 1e-12


class WeightMode(str, Enum):
    FULL_REFIT = "full-refit"
    NEW_WEIGHT_ONLY = "new-weight-only"


class CorrectionMethod(str, Enum):
    """How atom corrections propose replacement atoms.

    ``LMO`` re-solves the LMO for one term on the residual of the others. ``ALTERNATING``
    runs alternating least squares over all factors at once, projecting each factor back
    into its atom set. ``AUTO`` uses ``ALTERNATING`` for masked non-symmetric problems fitted
    with full refits and ``LMO`` otherwise.
    """

    AUTO = "auto"
    LMO = "lmo"
    ALTERNATING = "alternating"


class LmoMode(str, Enum):
    SIGNED = "signed"
    MAX = "max"


class StopReason(str, Enum):
    MAX_RANK = "max-rank"
    TOLERANCE = "tolerance"
    OPTIMAL = "optimal"
    LMO_FAILURE = "lmo-failure"


@dataclass
class PursuitConfig:
    """Outer-loop settings.

    Attributes:
        max_rank: Number of greedy iterations (the rank budget).
        power: LMO settings; each iteration derives its own seed from ``seed``.
        weight_mode: ``FULL_REFIT`` re-solves all weights, ``NEW_WEIGHT_ONLY`` sets only the
            newest one.
        correction_passes: Cyclic atom-correction passes after each iteration (0 disables).
        correction_method: Proposal rule for atom corrections.
        stop_tolerance: Stop once ``cost <= stop_tolerance * initial_cost``.
        seed: Root seed.
        delta: LMO accuracy; values below 1 wrap every LMO call in ``degrade_lmo``.
        keep_snapshots: Store the model after every iteration in the trace.
    """

    max_rank: int = 10
    power: PowerConfig = field(default_factory=PowerConfig)
    weight_mode: WeightMode = WeightMode.FULL_REFIT
    correction_passes: int = 0
    correction_method: CorrectionMethod = CorrectionMethod.AUTO
    stop_tolerance: float = 0.0
    seed: int = 0
    delta: float = 1.0
    keep_snapshots: bool = False

    def __post_init__(self) -> None:
        self.weight_mode = WeightMode(self.weight_mode)
        self.correction_method = CorrectionMethod(self.correction_method)
        if (
            self.correction_method is CorrectionMethod.ALTERNATING
            and self.weight_mode is WeightMode.NEW_WEIGHT_ONLY
        ):
            raise ValueError("Alternating corrections refit every weight; use full-refit weights.")
        if self.max_rank < 1:
            raise ValueError(f"max_rank must be >= 1, got {self.max_rank}.")
        if self.correction_passes < 0:
            raise ValueError(f"correction_passes must be >= 0, got {self.correction_passes}.")
        if self.stop_tolerance < 0:
            raise ValueError(f"stop_tolerance must be >= 0, got {self.stop_tolerance}.")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}.")

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["power"] = self.power.to_dict()
        data["weight_mode"] = self.weight_mode.value
        data["correction_method"] = self.correction_method.value
        return data


@dataclass
class TraceRecord:
    iteration: int
    cost: float
    residual_norm: float
    lmo_value: float
    lmo_gap: float
    corrections: int
    weights: list[float]
    rank_deficient: bool = False
    selected: int | None = None


@dataclass
class PursuitTrace:
    initial_cost: float
    records: list[TraceRecord] = field(default_factory=list)
    stop_reason: StopReason = StopReason.MAX_RANK
    lmo_failed: bool = False
    snapshots: list[FactorModel] = field(default_factory=list)

    @property
    def costs(self) -> list[float]:
        return [r.cost for r in self.records]

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class FiniteDictionary:
    """A finite set of vectors ``s₁ … sₙ``, stored as the rows of ``atoms``."""

    atoms: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        self.atoms = np.array(self.atoms, dtype=float)
        if self.atoms.ndim != 2 or self.atoms.shape[0] == 0:
            raise ValueError("Dictionary must be a non-empty (n atoms × d) matrix.")
        if self.normalized and not self.has_unit_atoms():
            raise ValueError("Dictionary marked normalized but some atoms are not unit vectors.")

    @classmethod
    def normalize(cls, atoms: np.ndarray) -> FiniteDictionary:
        atoms = np.asarray(atoms, dtype=float)
        norms = np.linalg.norm(atoms, axis=1)
        if np.any(norms == 0):
            raise ValueError("Cannot normalize a dictionary containing a zero atom.")
        return cls(atoms / norms[:, None], normalized=True)

    @property
    def size(self) -> int:
        return self.atoms.shape[0]

    @property
    def dimension(self) -> int:
        return self.atoms.shape[1]

    def has_unit_atoms(self) -> bool:
        norms = np.linalg.norm(self.atoms, axis=1)
        return bool(np.all(np.abs(norms - 1.0) <= ATOM_NORM_TOLERANCE))


@dataclass
class CoherenceProfile:
    """``mu[m - 1] = μ(m)`` for ``m = 1 … n − 1``."""

    mu: np.ndarray

    def at(self, m: int) -> float:
        if m == 0:
            return 0.0
        if not 1 <= m <= len(self.mu):
            raise ValueError(f"m must lie in [0, {len(self.mu)}], got {m}.")
        return float(self.mu[m - 1])

    def rate_bound(self, m: int) -> float:
        """Per-step squared-residual ratio bound ``1 − (1 − μ(m−1))/m``."""
        if m < 1:
            raise ValueError(f"m must be >= 1, got {m}.")
        return 1.0 - (1.0 - self.at(m - 1)) / m


# ---------------------------------------------------------------------------
# Weight refits
# ---------------------------------------------------------------------------


def solve_gram(G: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, bool]:
    """Solve ``G α = b``; returns ``(α, rank_deficient)``.

    Well-conditioned systems use a Cholesky solve plus one refinement step; systems with a
    condition number above ``GRAM_CONDITION_LIMIT`` get the minimum-norm least-squares
    solution.
    """
    if G.shape[0] == 0:
        return np.zeros(0), False
    condition = np.linalg.cond(G)
    if np.isfinite(condition) and condition <= GRAM_CONDITION_LIMIT:
        try:
            factor = scipy.linalg.cho_factor(G)
            alpha = scipy.linalg.cho_solve(factor, b)
            alpha = alpha + scipy.linalg.cho_solve(factor, b - G @ alpha)
            return alpha, False
        except np.linalg.LinAlgError:
            pass
    alpha = np.linalg.lstsq(G, b, rcond=1e-12)[0]
    return alpha, True


def refit_system(problem: TargetProblem, terms: list[RankOneTerm]) -> tuple[np.ndarray, bool]:
    G, b = gram_system(problem, terms)
    alpha, deficient = solve_gram(G, b)
    if deficient:
        logger.warning("Rank-deficient Gram matrix for %d terms; using least-squares weights", len(terms))
    return alpha, deficient


def refit_weights(problem: TargetProblem, terms: list[RankOneTerm]) -> np.ndarray:
    """Fully-corrective weights ``argmin_α ½‖Y − Σ αᵢ uᵢ⊗vᵢ‖²_Ω``."""
    if not terms:
        raise ValueError("refit_weights needs at least one term.")
    return refit_system(problem, terms)[0]


# ---------------------------------------------------------------------------
# Matrix pursuit
# ---------------------------------------------------------------------------


def _lmo_operator(problem: TargetProblem, model: FactorModel) -> Operator:
    R = residual_operator(problem, model)
    if problem.symmetric:
        # Same quadratic form uᵀRu, and symmetric even when Ω is not.
        R = (R + R.T) * 0.5
    return R


def _check_specs(problem: TargetProblem, spec_u: AtomSpec, spec_v: AtomSpec | None) -> None:
    n, m = problem.shape
    if spec_u.dimension != n:
        raise ValueError(f"Left atom set has dimension {spec_u.dimension}, target has {n} rows.")
    if spec_v is not None and spec_v.dimension != m:
        raise ValueError(f"Right atom set has dimension {spec_v.dimension}, target has {m} columns.")


def _select(
    R: Operator,
    spec_u: AtomSpec,
    spec_v: AtomSpec | None,
    power: PowerConfig,
    seed: int,
    delta: float = 1.0,
) -> PowerResult:
    result = lmo(R, spec_u, spec_v, replace(power, seed=seed))
    if delta < 1.0 and result.value > 0.0:
        result = degrade_lmo(result, delta, R, spec_u, spec_v, seed=derive_seed(seed, 1))
    return result


def resolve_correction_method(
    method: CorrectionMethod | str,
    problem: TargetProblem,
    weight_mode: WeightMode | str = WeightMode.FULL_REFIT,
) -> CorrectionMethod:
    """Pick the concrete correction rule for ``problem``.

    Raises:
        ValueError: If alternating corrections are requested for a symmetric problem or
            together with new-weight-only refits.
    """
    method = CorrectionMethod(method)
    weight_mode = WeightMode(weight_mode)
    if method is CorrectionMethod.AUTO:
        if problem.is_masked and not problem.symmetric and weight_mode is WeightMode.FULL_REFIT:
            return CorrectionMethod.ALTERNATING
        return CorrectionMethod.LMO
    if method is CorrectionMethod.ALTERNATING:
        if problem.symmetric:
            raise ValueError("Alternating corrections need a non-symmetric problem.")
        if weight_mode is WeightMode.NEW_WEIGHT_ONLY:
            raise ValueError("Alternating corrections refit every weight; use full-refit weights.")
    return method


def _single_weight(
    problem: TargetProblem, model: FactorModel, index: int, partial: FactorModel,
) -> FactorModel | None:
    """Re-weight term ``index`` against the residual of the other terms; other weights stay."""
    z = term_values(problem, model.terms[index])
    norm_sq = float(np.dot(z, z))
    if norm_sq == 0.0:
        return None
    weights = model.weights.copy()
    weights[index] = float(np.dot(z, residual_entries(problem, partial))) / norm_sq
    return model.with_weights(weights)


def _lmo_pass(
    problem: TargetProblem,
    model: FactorModel,
    current: float,
    spec_u: AtomSpec,
    spec_v: AtomSpec | None,
    power: PowerConfig,
    weight_mode: WeightMode,
    seed: int,
) -> tuple[FactorModel, float, int]:
    accepted = 0
    for i in range(model.rank):
        partial = model.without(i)
        try:
            result = _select(
                _lmo_operator(problem, partial), spec_u, spec_v, power, derive_seed(seed, i),
            )
        except LmoFailureError:
            continue
        candidate = model.replace(i, RankOneTerm(result.atom_u, result.atom_v))
        if weight_mode is WeightMode.NEW_WEIGHT_ONLY:
            candidate = _single_weight(problem, candidate, i, partial)
            if candidate is None:
                continue
        else:
            alpha, _ = refit_system(problem, candidate.terms)
            candidate = candidate.with_weights(alpha)
        candidate_cost = cost(problem, candidate)
        if candidate_cost <= current - CORRECTION_MARGIN:
            model, current = candidate, candidate_cost
            accepted += 1
    return model, current, accepted


def _row_least_squares(
    index: np.ndarray, size: int, design: np.ndarray, values: np.ndarray,
) -> np.ndarray:
    """Minimum-norm solutions of the per-row problems ``min ‖values_k − design_k x‖``.

    Entry ``e`` belongs to row ``index[e]``; rows without entries get zero.
    """
    r = design.shape[1]
    G = np.zeros((size, r, r))
    for a in range(r):
        for b in range(a, r):
            G[:, a, b] = np.bincount(index, weights=design[:, a] * design[:, b], minlength=size)
            G[:, b, a] = G[:, a, b]
    rhs = np.column_stack(
        [np.bincount(index, weights=design[:, a] * values, minlength=size) for a in range(r)]
    )
    return (np.linalg.pinv(G, rcond=1e-12) @ rhs[:, :, None])[:, :, 0]


def _project_columns(spec: AtomSpec, factor: np.ndarray) -> np.ndarray:
    return np.column_stack([cone_projection(spec, factor[:, i]) for i in range(factor.shape[1])])


def _alternating_candidate(
    problem: TargetProblem, model: FactorModel, spec_u: AtomSpec, spec_v: AtomSpec,
) -> FactorModel | None:
    """Alternating least squares on ``Y ≈ A Bᵀ`` over Ω, started from ``B = V diag(α)``."""
    rows, cols, values = problem.rows, problem.cols, problem.observed
    n, m = problem.shape
    B = model.V * model.weights
    previous = np.inf
    for _ in range(ALTERNATING_STEPS):
        A = _project_columns(spec_u, _row_least_squares(rows, n, B[cols], values))
        B = _project_columns(spec_v, _row_least_squares(cols, m, A[rows], values))
        fitted = np.sum(A[rows] * B[cols], axis=1)
        current = 0.5 * float(np.sum((values - fitted) ** 2))
        if np.isfinite(previous) and previous - current <= ALTERNATING_TOLERANCE * previous:
            break
        previous = current
    norms_u = np.linalg.norm(A, axis=0)
    norms_v = np.linalg.norm(B, axis=0)
    if np.any(norms_u == 0.0) or np.any(norms_v == 0.0):
        return None
    terms = [
        RankOneTerm(as_atom(A[:, i] / norms_u[i], spec_u), as_atom(B[:, i] / norms_v[i], spec_v))
        for i in range(model.rank)
    ]
    return FactorModel(terms, norms_u * norms_v, model.shape)


def _alternating_pass(
    problem: TargetProblem,
    model: FactorModel,
    current: float,
    spec_u: AtomSpec,
    spec_v: AtomSpec,
) -> tuple[FactorModel, float, int]:
    try:
        candidate = _alternating_candidate(problem, model, spec_u, spec_v)
    except ValueError:
        return model, current, 0
    if candidate is None:
        return model, current, 0
    alpha, _ = refit_system(problem, candidate.terms)
    candidate = candidate.with_weights(alpha)
    candidate_cost = cost(problem, candidate)
    if candidate_cost <= current - CORRECTION_MARGIN:
        return candidate, candidate_cost, candidate.rank
    return model, current, 0


def _correct(
    problem: TargetProblem,
    model: FactorModel,
    spec_u: AtomSpec,
    spec_v: AtomSpec | None,
    power: PowerConfig,
    passes: int,
    seed: int,
    method: CorrectionMethod = CorrectionMethod.LMO,
    weight_mode: WeightMode = WeightMode.FULL_REFIT,
) -> tuple[FactorModel, int]:
    current = cost(problem, model)
    accepted = 0
    for p in range(passes):
        if method is CorrectionMethod.ALTERNATING:
            model, current, changed = _alternating_pass(problem, model, current, spec_u, spec_v)
        else:
            model, current, changed = _lmo_pass(
                problem, model, current, spec_u, spec_v, power, weight_mode, derive_seed(seed, p),
            )
        accepted += changed
    return model, accepted


def correct_atoms(
    problem: TargetProblem,
    model: FactorModel,
    spec_u: AtomSpec,
    spec_v: AtomSpec | None,
    power_config: PowerConfig,
    passes: int,
    seed: int = 0,
    method: CorrectionMethod | str = CorrectionMethod.LMO,
    weight_mode: WeightMode | str = WeightMode.FULL_REFIT,
) -> FactorModel:
    """Atom corrections.

    With ``LMO`` each pass visits the terms in selection order, re-solves the LMO on the
    partial residual ``Y − Σ_{j≠i} αⱼZⱼ`` and keeps the proposal only if the cost drops by at
    least ``CORRECTION_MARGIN``. Full refits re-solve every weight for the proposal;
    new-weight-only refits set just the replaced term's weight.

    With ``ALTERNATING`` each pass runs alternating least squares over all factors and keeps
    the projected, refit result under the same acceptance rule.

    ``spec_v`` is ignored for symmetric problems.
    """
    if passes < 0:
        raise ValueError(f"passes must be >= 0, got {passes}.")
    if model.rank == 0:
        raise ValueError("correct_atoms needs a non-empty model.")
    weight_mode = WeightMode(weight_mode)
    method = resolve_correction_method(method, problem, weight_mode)
    spec_v = None if problem.symmetric else spec_v
    return _correct(
        problem, model, spec_u, spec_v, power_config, passes, seed, method, weight_mode,
    )[0]


def _append_term(
    problem: TargetProblem,
    model: FactorModel,
    term: RankOneTerm,
    lmo_value: float,
    weight_mode: WeightMode,
) -> tuple[FactorModel, bool]:
    if weight_mode is WeightMode.NEW_WEIGHT_ONLY:
        return model.with_term(term, lmo_value / term_norm_sq(problem, term)), False
    grown = model.with_term(term)
    alpha, deficient = refit_system(problem, grown.terms)
    return grown.with_weights(alpha), deficient


def gmp_fit(
    problem: TargetProblem,
    spec_u: AtomSpec,
    spec_v: AtomSpec | None,
    config: PursuitConfig,
) -> tuple[FactorModel, PursuitTrace]:
    """Generalized matrix pursuit.

    For ``r = 1 … max_rank``: select ``(u_r, v_r)`` with the LMO on the current residual,
    refit weights, optionally correct atoms, record the iteration. Stops early on the
    relative cost tolerance, on a numerically zero LMO value, or when the LMO fails.

    Symmetric problems ignore ``spec_v`` and use ``v = u``.
    """
    spec_v = None if problem.symmetric else spec_v
    if spec_v is None and not problem.symmetric:
        raise ValueError("A right atom set is required for non-symmetric problems.")
    _check_specs(problem, spec_u, spec_v)
    method = resolve_correction_method(config.correction_method, problem, config.weight_mode)

    model = FactorModel.empty(problem.shape)
    trace = PursuitTrace(initial_cost=cost(problem, model))
    threshold = OPTIMALITY_THRESHOLD * (1.0 + problem.target_norm)

    for r in range(1, config.max_rank + 1):
        R = _lmo_operator(problem, model)
        try:
            result = _select(
                R, spec_u, spec_v, config.power, derive_seed(config.seed, r),
                config.delta,
            )
        except LmoFailureError as exc:
            if r == 1:
                trace.lmo_failed = True
                logger.warning("LMO failed at the first iteration: %s", exc)
            trace.stop_reason = StopReason.LMO_FAILURE
            break
        if result.value <= threshold:
            trace.stop_reason = StopReason.OPTIMAL
            break

        term = RankOneTerm(result.atom_u, result.atom_v)
        model, deficient = _append_term(problem, model, term, result.value, config.weight_mode)
        corrections = 0
        if config.correction_passes:
            model, corrections = _correct(
                problem, model, spec_u, spec_v, config.power, config.correction_passes,
                derive_seed(config.seed, r, 2), method, config.weight_mode,
            )

        current = cost(problem, model)
        trace.records.append(
            TraceRecord(
                iteration=r,
                cost=current,
                residual_norm=float(np.sqrt(2.0 * current)),
                lmo_value=result.value,
                lmo_gap=result.final_gap,
                corrections=corrections,
                weights=[float(a) for a in model.weights],
                rank_deficient=deficient,
            )
        )
        if config.keep_snapshots:
            trace.snapshots.append(model)
        logger.debug("rank %d: cost=%.6g lmo=%.6g", r, current, result.value)
        if current <= config.stop_tolerance * trace.initial_cost:
            trace.stop_reason = StopReason.TOLERANCE
            break

    return model, trace


# ---------------------------------------------------------------------------
# Finite dictionaries
# ---------------------------------------------------------------------------


def gp_fit_finite(
    y: np.ndarray,
    dictionary: FiniteDictionary,
    config: PursuitConfig,
    lmo_mode: LmoMode = LmoMode.SIGNED,
) -> tuple[np.ndarray, PursuitTrace]:
    """Pursuit of ``y`` over a finite dictionary.

    ``SIGNED`` selects ``argmax |⟨s, r⟩|`` and absorbs the sign into the coefficient;
    ``MAX`` selects ``argmax ⟨s, r⟩``. ``FULL_REFIT`` is orthogonal matching pursuit,
    ``NEW_WEIGHT_ONLY`` is matching pursuit.

    Returns:
        Coefficients over all ``n`` atoms (zero for atoms never selected) and the trace.
    """
    y = np.asarray(y, dtype=float).ravel()
    S = dictionary.atoms
    if y.shape[0] != dictionary.dimension:
        raise ValueError(
            f"Signal has length {y.shape[0]} but dictionary atoms have dimension {dictionary.dimension}."
        )
    lmo_mode = LmoMode(lmo_mode)
    coefficients = np.zeros(dictionary.size)
    selected: list[int] = []
    r = y.copy()
    trace = PursuitTrace(initial_cost=0.5 * float(r @ r))
    threshold = OPTIMALITY_THRESHOLD * (1.0 + float(np.linalg.norm(y)))

    for it in range(1, config.max_rank + 1):
        scores = S @ r
        k = int(np.argmax(np.abs(scores) if lmo_mode is LmoMode.SIGNED else scores))
        value = abs(float(scores[k])) if lmo_mode is LmoMode.SIGNED else float(scores[k])
        if value <= threshold:
            trace.stop_reason = StopReason.OPTIMAL
            break

        deficient = False
        if config.weight_mode is WeightMode.FULL_REFIT:
            if k not in selected:
                selected.append(k)
            A = S[selected]
            alpha, deficient = solve_gram(A @ A.T, A @ y)
            coefficients[:] = 0.0
            coefficients[selected] = alpha
            r = y - A.T @ alpha
        else:
            step = float(scores[k]) / float(S[k] @ S[k])
            coefficients[k] += step
            if k not in selected:
                selected.append(k)
            r = r - step * S[k]

        current = 0.5 * float(r @ r)
        trace.records.append(
            TraceRecord(
                iteration=it,
                cost=current,
                residual_norm=float(np.sqrt(2.0 * current)),
                lmo_value=value,
                lmo_gap=0.0,
                corrections=0,
                weights=[float(coefficients[i]) for i in selected],
                rank_deficient=deficient,
                selected=k,
            )
        )
        if current <= config.stop_tolerance * trace.initial_cost:
            trace.stop_reason = StopReason.TOLERANCE
            break

    return coefficients, trace


def _sorted_coherences(dictionary: FiniteDictionary) -> np.ndarray:
    """Rows of ``|⟨s_k, s_i⟩|`` over ``i ≠ k``, each sorted in decreasing order."""
    if not dictionary.has_unit_atoms():
        raise ValueError("Cumulative coherence requires a normalized dictionary.")
    n = dictionary.size
    gram = np.abs(dictionary.atoms @ dictionary.atoms.T)
    off_diagonal = gram[~np.eye(n, dtype=bool)].reshape(n, n - 1)
    return -np.sort(-off_diagonal, axis=1)


def cumulative_coherence(dictionary: FiniteDictionary, m: int) -> float:
    """``μ(m) = max_k max_{|I|=m, k∉I} Σ_{i∈I} |⟨s_k, s_i⟩|`` via the top ``m`` entries per row."""
    if not 1 <= m <= dictionary.size - 1:
        raise ValueError(f"m must lie in [1, {dictionary.size - 1}], got {m}.")
    rows = _sorted_coherences(dictionary)
    return float(np.max(np.sum(rows[:, :m], axis=1)))


def coherence_profile(dictionary: FiniteDictionary) -> CoherenceProfile:
    """μ(m) for every ``m = 1 … n − 1``."""
    if dictionary.size < 2:
        raise ValueError("Coherence needs a dictionary with at least two atoms.")
    rows = _sorted_coherences(dictionary)
    return CoherenceProfile(np.max(np.cumsum(rows, axis=1), axis=0))
