"""
Approximate linear maximization oracle for rank-one matrix atoms.

Finds ``argmax ⟨R, u ⊗ v⟩`` over ``u ∈ 𝒜₁, v ∈ 𝒜₂`` with:

- the atomic power method for symmetric problems (``v = u``), run on ``R + κI`` so that the
  quadratic form is convex on the atom hull and every step is monotone;
- an alternating power method, or a symmetric embedding ``T = [0 R; Rᵀ 0]`` over the product
  atom set, for non-symmetric problems;
- a multi-restart driver (:func:`lmo`) and a δ-accuracy degradation wrapper
  (:func:`degrade_lmo`) used for inexact-oracle experiments.

``R`` may be a dense ``numpy`` array or a ``scipy.sparse`` matrix; only matrix-vector products
are used.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Callable

import numpy as np
import scipy.sparse as sp

from structured_pursuit import LMO_ZERO_NORM, SYMMETRY_TOLERANCE
from structured_pursuit.atomset import AtomSpec, VectorAtom, linear_argmax, random_atom
from structured_pursuit.errors import DegenerateDirectionError, LmoFailureError
from structured_pursuit.randomness import make_rng

logger = logging.getLogger(__name__)

Operator = np.ndarray | sp.spmatrix

# degrade_lmo blends a random atom into the exact one. The first blend gives the random atom
# DEGRADE_RANDOM_SHARE * (1 - delta) of the weight; DEGRADE_STEPS blends move that share
# linearly down to zero.
DEGRADE_RANDOM_SHARE = 0.125
DEGRADE_STEPS = 32


class KappaPolicy(str, Enum):
    NONE = "none"
    AUTO = "auto"


class NonSymmetricStrategy(str, Enum):
    ALTERNATING = "alternating"
    SYMMETRIC_EMBEDDING = "symmetric-embedding"


@dataclass
class PowerConfig:
    """Settings for one LMO call.

    Attributes:
        max_iterations: Power iterations per restart.
        gap_tolerance: Stop once the Frank-Wolfe gap is at most ``gap_tolerance`` times the
            (shifted) objective value.
        kappa_policy: ``AUTO`` shifts by ``‖R‖_F + 1e-6·(1 + ‖R‖_F)``; ``NONE`` runs unshifted.
        restarts: Independent runs; the first starts from the best row of ``R``.
        seed: Root seed for the random restarts.
        strategy: Non-symmetric solver.
        workers: Thread pool size for restarts (1 runs serially).
    """

    max_iterations: int = 250
    gap_tolerance: float = 1e-8
    kappa_policy: KappaPolicy = KappaPolicy.AUTO
    restarts: int = 5
    seed: int = 0
    strategy: NonSymmetricStrategy = NonSymmetricStrategy.ALTERNATING
    workers: int = 1

    def __post_init__(self) -> None:
        self.kappa_policy = KappaPolicy(self.kappa_policy)
        self.strategy = NonSymmetricStrategy(self.strategy)
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}.")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}.")
        if self.gap_tolerance < 0:
            raise ValueError(f"gap_tolerance must be >= 0, got {self.gap_tolerance}.")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}.")

    @classmethod
    def exact(cls, seed: int = 0, restarts: int = 10) -> PowerConfig:
        """Settings tight enough to treat the LMO as exact on well-separated problems."""
        return cls(max_iterations=2000, gap_tolerance=1e-13, restarts=restarts, seed=seed)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["kappa_policy"] = self.kappa_policy.value
        data["strategy"] = self.strategy.value
        return data


@dataclass
class PowerResult:
    atom_u: VectorAtom
    atom_v: VectorAtom
    value: float
    iterations_used: int
    final_gap: float
    value_trace: list[float] = field(default_factory=list)
    converged: bool = False
    restart: int = 0


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def frobenius_norm(R: Operator) -> float:
    if sp.issparse(R):
        return float(np.sqrt(R.multiply(R).sum()))
    return float(np.linalg.norm(R))


def kappa_for(R: Operator, policy: KappaPolicy) -> float:
    """Shift making ``R + κI`` positive semidefinite, using ``−‖R‖_F`` as eigenvalue bound."""
    if KappaPolicy(policy) is KappaPolicy.NONE:
        return 0.0
    norm = frobenius_norm(R)
    return norm + 1e-6 * (1.0 + norm)


def _check_symmetric(R: Operator) -> None:
    if R.shape[0] != R.shape[1]:
        raise ValueError(f"Symmetric power method needs a square matrix, got shape {R.shape}.")
    if sp.issparse(R):
        asym = abs(R - R.T).max() if R.nnz else 0.0
        scale = abs(R).max() if R.nnz else 0.0
    else:
        asym = float(np.max(np.abs(R - R.T))) if R.size else 0.0
        scale = float(np.max(np.abs(R))) if R.size else 0.0
    if asym > SYMMETRY_TOLERANCE * max(1.0, float(scale)):
        raise ValueError(f"Matrix is not symmetric (max asymmetry {float(asym):.3g}).")


def _check_dimension(spec: AtomSpec, size: int, label: str) -> None:
    if spec.dimension != size:
        raise ValueError(
            f"{label} atom set has dimension {spec.dimension} but the matrix side has size {size}."
        )


def _shifted_power(
    matvec: Callable[[np.ndarray], np.ndarray],
    argmax: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    kappa: float,
    config: PowerConfig,
    scale: float = 1.0,
) -> tuple[np.ndarray, list[float], int, float, bool]:
    """Frank-Wolfe ascent with unit step on ``x ↦ ⟨x, (M + κI) x⟩``.

    ``scale`` converts the unshifted quadratic form into the reported value.
    Returns ``(x, value_trace, iterations, final_gap, converged)``.
    """
    x = x0
    trace: list[float] = []
    gap = 0.0
    converged = False
    t = 0
    for t in range(config.max_iterations + 1):
        w = matvec(x) + kappa * x
        shifted = float(x @ w)
        trace.append((shifted - kappa * float(x @ x)) * scale)
        candidate = argmax(w)
        gap = max(float(candidate @ w) - shifted, 0.0)
        converged = gap <= config.gap_tolerance * abs(shifted)
        if converged or t == config.max_iterations:
            break
        x = candidate
    return x, trace, t, gap, converged


# ---------------------------------------------------------------------------
# Power methods
# ---------------------------------------------------------------------------


def atomic_power_symmetric(
    R: Operator, spec: AtomSpec, init: VectorAtom, config: PowerConfig,
) -> PowerResult:
    """Atomic power iteration ``u ← argmax_{u∈𝒜} ⟨u, (R + κI) u⁽ᵗ⁾⟩``.

    The reported value and ``value_trace`` are unshifted, ``g(u) = uᵀRu``.

    Raises:
        DegenerateDirectionError: If a step produces a zero direction.
        ValueError: On a non-symmetric ``R`` or a dimension mismatch.
    """
    _check_symmetric(R)
    _check_dimension(spec, R.shape[0], "Symmetric")
    kappa = kappa_for(R, config.kappa_policy)
    x, trace, iterations, gap, converged = _shifted_power(
        lambda x: R @ x,
        lambda w: linear_argmax(spec, w).values,
        np.array(init.values, dtype=float),
        kappa,
        config,
    )
    atom = VectorAtom(x, spec)
    value = float(x @ (R @ x))
    return PowerResult(atom, atom, value, iterations, gap, trace, converged)


def _alternating(
    R: Operator, spec_u: AtomSpec, spec_v: AtomSpec, init: tuple[VectorAtom, VectorAtom],
    config: PowerConfig,
) -> PowerResult:
    u = np.array(init[0].values, dtype=float)
    v = np.array(init[1].values, dtype=float)
    Rtu = R.T @ u
    value = float(v @ Rtu)
    # Block gap in v at the initial pair; after the first sweep v is always optimal for u.
    gap_v = max(float(linear_argmax(spec_v, Rtu).values @ Rtu) - value, 0.0)
    trace: list[float] = []
    gap = 0.0
    converged = False
    t = 0
    for t in range(config.max_iterations + 1):
        trace.append(value)
        Rv = R @ v
        u_candidate = linear_argmax(spec_u, Rv).values
        gap = max(float(u_candidate @ Rv) - value, 0.0) + gap_v
        converged = gap <= config.gap_tolerance * abs(value)
        if converged or t == config.max_iterations:
            break
        u = u_candidate
        Rtu = R.T @ u
        v = linear_argmax(spec_v, Rtu).values
        value = float(v @ Rtu)
        gap_v = 0.0
    return PowerResult(
        VectorAtom(u, spec_u), VectorAtom(v, spec_v), value, t, gap, trace, converged,
    )


def _embedded(
    R: Operator, spec_u: AtomSpec, spec_v: AtomSpec, init: tuple[VectorAtom, VectorAtom],
    config: PowerConfig,
) -> PowerResult:
    n = R.shape[0]
    # T = [0 R; Rᵀ 0] has spectral norm ‖R‖₂ ≤ ‖R‖_F, so the same shift applies.
    kappa = kappa_for(R, config.kappa_policy)

    def matvec(x: np.ndarray) -> np.ndarray:
        return np.concatenate([R @ x[n:], R.T @ x[:n]])

    def argmax(w: np.ndarray) -> np.ndarray:
        return np.concatenate(
            [linear_argmax(spec_u, w[:n]).values, linear_argmax(spec_v, w[n:]).values]
        )

    x0 = np.concatenate([init[0].values, init[1].values])
    x, trace, iterations, gap, converged = _shifted_power(
        matvec, argmax, x0, kappa, config, scale=0.5,
    )
    u = x[:n] / np.linalg.norm(x[:n])
    v = x[n:] / np.linalg.norm(x[n:])
    value = float(u @ (R @ v))
    return PowerResult(
        VectorAtom(u, spec_u), VectorAtom(v, spec_v), value, iterations, gap, trace, converged,
    )


def atomic_power_nonsymmetric(
    R: Operator,
    spec_u: AtomSpec,
    spec_v: AtomSpec,
    init: tuple[VectorAtom, VectorAtom],
    config: PowerConfig,
    strategy: NonSymmetricStrategy | None = None,
) -> PowerResult:
    """Maximize ``uᵀRv`` over ``𝒜₁ × 𝒜₂``.

    ``ALTERNATING`` updates ``u`` then ``v`` by exact linear maximization and stops on the
    block Frank-Wolfe gap. ``SYMMETRIC_EMBEDDING`` runs the shifted power method on
    ``[0 R; Rᵀ 0]`` over stacked vectors ``[u; v]``, each block kept a unit atom of its set.
    Defaults to ``config.strategy``.
    """
    _check_dimension(spec_u, R.shape[0], "Left")
    _check_dimension(spec_v, R.shape[1], "Right")
    strategy = NonSymmetricStrategy(strategy or config.strategy)
    if strategy is NonSymmetricStrategy.SYMMETRIC_EMBEDDING:
        return _embedded(R, spec_u, spec_v, init, config)
    return _alternating(R, spec_u, spec_v, init, config)


# ---------------------------------------------------------------------------
# Multi-restart driver
# ---------------------------------------------------------------------------


def _best_row(R: Operator) -> np.ndarray:
    if sp.issparse(R):
        R = sp.csr_matrix(R)
        norms = np.asarray(R.multiply(R).sum(axis=1)).ravel()
        return R.getrow(int(np.argmax(norms))).toarray().ravel()
    norms = np.einsum("ij,ij->i", R, R)
    return np.array(R[int(np.argmax(norms))], dtype=float)


def _initial_atoms(
    R: Operator, spec_u: AtomSpec, spec_v: AtomSpec | None, config: PowerConfig, restart: int,
) -> tuple[VectorAtom, VectorAtom | None]:
    if restart == 0:
        row = _best_row(R)
        if spec_v is None:
            return linear_argmax(spec_u, row), None
        v0 = linear_argmax(spec_v, row)
        return linear_argmax(spec_u, R @ v0.values), v0
    rng = make_rng(config.seed, restart)
    u0 = random_atom(spec_u, rng)
    return u0, (None if spec_v is None else random_atom(spec_v, rng))


def _run_restart(
    R: Operator, spec_u: AtomSpec, spec_v: AtomSpec | None, config: PowerConfig, restart: int,
) -> PowerResult | None:
    try:
        u0, v0 = _initial_atoms(R, spec_u, spec_v, config, restart)
        if spec_v is None:
            result = atomic_power_symmetric(R, spec_u, u0, config)
        else:
            result = atomic_power_nonsymmetric(R, spec_u, spec_v, (u0, v0), config)
    except DegenerateDirectionError as exc:
        logger.debug("LMO restart %d degenerated: %s", restart, exc)
        return None
    result.restart = restart
    return result


def lmo(
    R: Operator,
    spec_u: AtomSpec,
    spec_v: AtomSpec | None = None,
    config: PowerConfig | None = None,
) -> PowerResult:
    """Multi-restart approximate LMO; ``spec_v=None`` selects the symmetric problem ``v = u``.

    Restart 0 starts from the largest-norm row of ``R`` projected onto the atom set; the
    others from seeded random atoms. The result with the largest value wins, ties going to
    the lowest restart index, so serial and threaded runs agree.

    Raises:
        LmoFailureError: If ``‖R‖_F`` is below ``LMO_ZERO_NORM`` or every restart degenerates.
    """
    config = config or PowerConfig()
    if frobenius_norm(R) < LMO_ZERO_NORM:
        raise LmoFailureError("Residual is numerically zero; no atom can be selected.")

    def run(restart: int) -> PowerResult | None:
        return _run_restart(R, spec_u, spec_v, config, restart)

    if config.workers > 1 and config.restarts > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run, range(config.restarts)))
    else:
        results = [run(i) for i in range(config.restarts)]

    completed = [r for r in results if r is not None]
    if not completed:
        raise LmoFailureError(f"All {config.restarts} LMO restarts degenerated.")
    if len(completed) < len(results):
        logger.warning("%d of %d LMO restarts degenerated", len(results) - len(completed), len(results))
    best = completed[0]
    for result in completed[1:]:
        if result.value > best.value:
            best = result
    return best


# ---------------------------------------------------------------------------
# Inexact oracle
# ---------------------------------------------------------------------------


def degrade_lmo(
    exact_result: PowerResult,
    delta: float,
    R: Operator,
    spec_u: AtomSpec,
    spec_v: AtomSpec | None = None,
    seed: int = 0,
) -> PowerResult:
    """Return an atom pair whose value lies in ``[δ·exact, exact]``.

    Blends a random atom with the exact one, ``s·random + (1 − s)·exact``, re-projects each
    blend through ``linear_argmax`` and returns the first pair inside the interval. The
    random share ``s`` starts at ``DEGRADE_RANDOM_SHARE·(1 − δ)`` and moves toward the exact
    atom in ``DEGRADE_STEPS`` steps; the exact result closes the scan. ``spec_v=None`` treats
    the problem as symmetric.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}.")
    if delta == 1.0:
        return exact_result
    if exact_result.value <= 0.0:
        raise ValueError("degrade_lmo needs an exact result with a positive value.")
    rng = make_rng(seed)
    random_u = random_atom(spec_u, rng).values
    random_v = random_u if spec_v is None else random_atom(spec_v, rng).values
    exact_u = exact_result.atom_u.values
    exact_v = exact_result.atom_v.values
    floor = delta * exact_result.value
    first_share = DEGRADE_RANDOM_SHARE * (1.0 - delta)
    for j in range(DEGRADE_STEPS):
        share = first_share * (1.0 - j / DEGRADE_STEPS)
        try:
            u = linear_argmax(spec_u, share * random_u + (1.0 - share) * exact_u)
            v = u if spec_v is None else linear_argmax(
                spec_v, share * random_v + (1.0 - share) * exact_v
            )
        except DegenerateDirectionError:
            continue
        value = float(u.values @ (R @ v.values))
        if floor <= value <= exact_result.value:
            return PowerResult(
                u, v, value, 0, exact_result.value - value, [value], False, exact_result.restart,
            )
    return exact_result
