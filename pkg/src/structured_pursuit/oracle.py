"""
Brute-force reference solutions for small problems.

Used by the test suite to certify the power-method LMO and the pursuit loop; nothing in the
fitting path calls into this module.

- Sphere and sparse atom sets are solved exactly: a dense eigen- or singular-value
  decomposition per candidate support.
- Non-negative atom sets are solved by grid search over hyperspherical angles in
  ``[0, π/2]``, refined coarse-to-fine; the achieved angular step is reported.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
import scipy.linalg

from structured_pursuit.atomset import AtomSpec, Constraint, VectorAtom, linear_argmax
from structured_pursuit.pursuit import FiniteDictionary

# Largest dimension for which supports are enumerated.
SUPPORT_LIMIT = 12
# Largest support searched on an angular grid.
GRID_SUPPORT_LIMIT = 5
GRID_RESOLUTION = 0.01

_COARSE_STEP = 0.1
_REFINE_FACTOR = 5


class OracleMethod(str, Enum):
    SUPPORT_ENUMERATION = "support-enumeration"
    GRID_SEARCH = "grid-search"
    DENSE_SVD = "dense-svd"


@dataclass
class OracleResult:
    value: float
    atom_u: VectorAtom
    atom_v: VectorAtom
    method: OracleMethod
    resolution: float = 0.0


def _supports(spec: AtomSpec) -> list[tuple[int, ...]]:
    size = spec.k if spec.constraint.is_sparse else spec.dimension
    if spec.constraint.is_sparse and spec.dimension > SUPPORT_LIMIT:
        raise ValueError(
            f"Support enumeration is limited to dimension {SUPPORT_LIMIT}, got {spec.dimension}."
        )
    return list(itertools.combinations(range(spec.dimension), size))


def _embed(spec: AtomSpec, support: tuple[int, ...], values: np.ndarray) -> VectorAtom:
    out = np.zeros(spec.dimension)
    out[list(support)] = values
    return VectorAtom(out / np.linalg.norm(out), spec)


# ---------------------------------------------------------------------------
# Angular grids over the non-negative unit sphere
# ---------------------------------------------------------------------------


def _angles_to_vectors(angles: np.ndarray) -> np.ndarray:
    """Map ``(N, s − 1)`` angles in ``[0, π/2]`` to ``(N, s)`` non-negative unit vectors."""
    count, free = angles.shape
    X = np.ones((count, free + 1))
    for j in range(free):
        X[:, j] *= np.cos(angles[:, j])
        X[:, j + 1:] *= np.sin(angles[:, j])[:, None]
    return X


def _angle_grid(center: np.ndarray, half_width: float, step: float) -> np.ndarray:
    if center.shape[0] == 0:
        return np.zeros((1, 0))
    axes = []
    for c in center:
        lo = max(0.0, c - half_width)
        hi = min(math.pi / 2, c + half_width)
        points = max(2, int(math.ceil((hi - lo) / step)) + 1)
        axes.append(np.linspace(lo, hi, points))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def _grid_maximize(
    score: Callable[[np.ndarray], np.ndarray], free: int, resolution: float,
) -> tuple[np.ndarray, float, float]:
    """Maximize ``score(X)`` (one value per row of unit vectors) over the angle grid.

    Returns ``(best_vector, best_value, achieved_step)``.
    """
    step = _COARSE_STEP
    angles = _angle_grid(np.full(free, math.pi / 4), math.pi / 4, step)
    X = _angles_to_vectors(angles)
    values = score(X)
    best = int(np.argmax(values))
    best_angles, best_value, best_x = angles[best], float(values[best]), X[best]
    while free and step > resolution:
        half_width = 2.0 * step
        step /= _REFINE_FACTOR
        angles = _angle_grid(best_angles, half_width, step)
        X = _angles_to_vectors(angles)
        values = score(X)
        i = int(np.argmax(values))
        if values[i] > best_value:
            best_angles, best_value, best_x = angles[i], float(values[i]), X[i]
    return best_x, best_value, (step if free else 0.0)


def _check_grid_support(size: int) -> None:
    if size > GRID_SUPPORT_LIMIT:
        raise ValueError(
            f"Grid search is limited to supports of size {GRID_SUPPORT_LIMIT}, got {size}."
        )


# ---------------------------------------------------------------------------
# Symmetric oracle
# ---------------------------------------------------------------------------


def brute_lmo_symmetric(
    R: np.ndarray, spec: AtomSpec, resolution: float = GRID_RESOLUTION,
) -> OracleResult:
    """``max_{u∈𝒜} uᵀRu`` by support enumeration (sphere, sparse) or grid search."""
    R = np.asarray(R, dtype=float)
    if R.shape != (spec.dimension, spec.dimension):
        raise ValueError(f"Matrix shape {R.shape} does not match dimension {spec.dimension}.")
    R = 0.5 * (R + R.T)

    if not spec.constraint.is_non_negative:
        best: tuple[float, tuple[int, ...], np.ndarray] | None = None
        for support in _supports(spec):
            idx = list(support)
            eigenvalues, eigenvectors = scipy.linalg.eigh(R[np.ix_(idx, idx)])
            if best is None or eigenvalues[-1] > best[0]:
                best = (float(eigenvalues[-1]), support, eigenvectors[:, -1])
        value, support, vector = best
        atom = _embed(spec, support, vector)
        return OracleResult(value, atom, atom, OracleMethod.SUPPORT_ENUMERATION)

    best_value, best_atom, achieved = -math.inf, None, 0.0
    for support in _supports(spec):
        _check_grid_support(len(support))
        sub = R[np.ix_(support, support)]
        x, value, step = _grid_maximize(
            lambda X, sub=sub: np.einsum("ij,jk,ik->i", X, sub, X), len(support) - 1, resolution,
        )
        achieved = max(achieved, step)
        if value > best_value:
            best_value, best_atom = value, _embed(spec, support, x)
    return OracleResult(best_value, best_atom, best_atom, OracleMethod.GRID_SEARCH, achieved)


# ---------------------------------------------------------------------------
# Non-symmetric oracle
# ---------------------------------------------------------------------------


def _closed_form_values(spec: AtomSpec, W: np.ndarray) -> np.ndarray:
    """``max_{v∈𝒜} ⟨v, w⟩`` for every row ``w`` of ``W``."""
    constraint = spec.constraint
    if constraint.is_non_negative:
        positive = np.maximum(W, 0.0)
        squares = positive**2
        if constraint.is_sparse:
            squares = -np.sort(-squares, axis=1)[:, : spec.k]
        values = np.sqrt(np.sum(squares, axis=1))
        return np.where(np.any(W > 0, axis=1), values, np.max(W, axis=1))
    squares = W**2
    if constraint is Constraint.SPARSE:
        squares = -np.sort(-squares, axis=1)[:, : spec.k]
    return np.sqrt(np.sum(squares, axis=1))


def brute_lmo_nonsymmetric(
    R: np.ndarray, spec_u: AtomSpec, spec_v: AtomSpec, resolution: float = GRID_RESOLUTION,
) -> OracleResult:
    """``max uᵀRv`` over ``𝒜₁ × 𝒜₂``.

    Without sign constraints: the top singular pair of every restricted block ``R[Su, Sv]``.
    With a non-negative side: grid search over that side, the other side in closed form.
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (spec_u.dimension, spec_v.dimension):
        raise ValueError(
            f"Matrix shape {R.shape} does not match atom dimensions "
            f"({spec_u.dimension}, {spec_v.dimension})."
        )

    if not spec_u.constraint.is_non_negative and not spec_v.constraint.is_non_negative:
        best: tuple[float, tuple[int, ...], tuple[int, ...], np.ndarray, np.ndarray] | None = None
        for su in _supports(spec_u):
            for sv in _supports(spec_v):
                U, s, Vt = scipy.linalg.svd(R[np.ix_(su, sv)])
                if best is None or s[0] > best[0]:
                    best = (float(s[0]), su, sv, U[:, 0], Vt[0])
        value, su, sv, u, v = best
        return OracleResult(
            value, _embed(spec_u, su, u), _embed(spec_v, sv, v), OracleMethod.SUPPORT_ENUMERATION,
        )

    # Grid over a non-negative side; transpose so that side is u.
    transpose = not spec_u.constraint.is_non_negative
    if transpose:
        result = brute_lmo_nonsymmetric(R.T, spec_v, spec_u, resolution)
        return OracleResult(
            result.value, result.atom_v, result.atom_u, result.method, result.resolution,
        )

    best_value, best_u, achieved = -math.inf, None, 0.0
    for support in _supports(spec_u):
        _check_grid_support(len(support))
        block = R[list(support)]
        x, value, step = _grid_maximize(
            lambda X, block=block: _closed_form_values(spec_v, X @ block),
            len(support) - 1,
            resolution,
        )
        achieved = max(achieved, step)
        if value > best_value:
            best_value, best_u = value, _embed(spec_u, support, x)
    atom_v = linear_argmax(spec_v, R.T @ best_u.values)
    return OracleResult(best_value, best_u, atom_v, OracleMethod.GRID_SEARCH, achieved)


def grid_lmo(
    R: np.ndarray,
    spec_u: AtomSpec,
    spec_v: AtomSpec | None = None,
    resolution: float = GRID_RESOLUTION,
) -> OracleResult:
    """Grid-search reference for atom sets with a non-negative side.

    ``spec_v=None`` selects the symmetric problem. The achieved angular step is reported in
    ``OracleResult.resolution``.
    """
    sides = [spec_u] if spec_v is None else [spec_u, spec_v]
    if not any(spec.constraint.is_non_negative for spec in sides):
        raise ValueError("grid_lmo needs at least one non-negative atom set.")
    if spec_v is None:
        return brute_lmo_symmetric(R, spec_u, resolution)
    return brute_lmo_nonsymmetric(R, spec_u, spec_v, resolution)


# ---------------------------------------------------------------------------
# Unstructured and dictionary references
# ---------------------------------------------------------------------------


def svd_reference(Y: np.ndarray, rank: int) -> np.ndarray:
    """Eckart–Young costs ``½ Σ_{i>r} σᵢ²`` for ``r = 1 … rank``."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise ValueError("svd_reference expects a matrix.")
    if not 1 <= rank <= min(Y.shape):
        raise ValueError(f"rank must lie in [1, {min(Y.shape)}], got {rank}.")
    sigma_sq = scipy.linalg.svdvals(Y) ** 2
    tails = np.cumsum(sigma_sq[::-1])[::-1]
    costs = np.zeros(rank)
    for r in range(1, rank + 1):
        costs[r - 1] = 0.5 * tails[r] if r < len(tails) else 0.0
    return costs


def exhaustive_coherence(dictionary: FiniteDictionary, m: int) -> float:
    """μ(m) by enumerating every subset of size ``m``; small dictionaries only."""
    n = dictionary.size
    if n > SUPPORT_LIMIT:
        raise ValueError(f"Exhaustive coherence is limited to {SUPPORT_LIMIT} atoms, got {n}.")
    if not 1 <= m <= n - 1:
        raise ValueError(f"m must lie in [1, {n - 1}], got {m}.")
    gram = np.abs(dictionary.atoms @ dictionary.atoms.T)
    best = 0.0
    for subset in itertools.combinations(range(n), m):
        members = list(subset)
        for k in range(n):
            if k in subset:
                continue
            best = max(best, float(np.sum(gram[k, members])))
    return best
