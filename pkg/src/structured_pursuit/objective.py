"""
Least-squares objectives over fully or partially observed matrices.

The cost follows the half-scaled convention ``f(X) = ½‖Y − X‖²_Ω`` so that the negative
gradient is exactly the (masked) residual.

Two storage backends share one API:

- dense: ``Y`` is materialized (unobserved entries stored as 0) and the mask is kept both as a
  sorted coordinate list and as a cached 0/1 weight matrix;
- coordinate: only the observed entries are stored, residuals are built as
  ``scipy.sparse.csr_matrix`` operators. Selected automatically for problems with more than
  ``DENSE_ENTRY_LIMIT`` entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from structured_pursuit import DENSE_ENTRY_LIMIT, SYMMETRY_TOLERANCE
from structured_pursuit.atomset import AtomSpec, VectorAtom, as_atom

MaskLike = np.ndarray | Sequence[tuple[int, int]]


# ---------------------------------------------------------------------------
# Factor model
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RankOneTerm:
    """The rank-one matrix ``u ⊗ v`` built from two vector atoms."""

    u: VectorAtom
    v: VectorAtom

    def matrix(self) -> np.ndarray:
        return np.outer(self.u.values, self.v.values)


@dataclass(eq=False)
class FactorModel:
    """The iterate ``X = Σ αᵢ uᵢ ⊗ vᵢ`` as an ordered list of terms plus weights."""

    terms: list[RankOneTerm]
    weights: np.ndarray
    shape: tuple[int, int]

    def __post_init__(self) -> None:
        self.terms = list(self.terms)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        self.shape = (int(self.shape[0]), int(self.shape[1]))
        if len(self.terms) != self.weights.shape[0]:
            raise ValueError(
                f"Model has {len(self.terms)} terms but {self.weights.shape[0]} weights."
            )
        n, m = self.shape
        for i, term in enumerate(self.terms):
            if len(term.u) != n or len(term.v) != m:
                raise ValueError(
                    f"Term {i} has shape ({len(term.u)}, {len(term.v)}); model shape is {self.shape}."
                )

    @classmethod
    def empty(cls, shape: tuple[int, int]) -> FactorModel:
        return cls([], np.zeros(0), shape)

    @property
    def rank(self) -> int:
        return len(self.terms)

    @property
    def U(self) -> np.ndarray:
        if not self.terms:
            return np.zeros((self.shape[0], 0))
        return np.column_stack([t.u.values for t in self.terms])

    @property
    def V(self) -> np.ndarray:
        if not self.terms:
            return np.zeros((self.shape[1], 0))
        return np.column_stack([t.v.values for t in self.terms])

    def reconstruct(self) -> np.ndarray:
        """Dense ``X = U diag(α) Vᵀ``."""
        return (self.U * self.weights) @ self.V.T

    def predict(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Entries of ``X`` at the given coordinates without forming ``X``."""
        if not self.terms:
            return np.zeros(len(rows))
        return np.sum(self.U[rows] * self.weights * self.V[cols], axis=1)

    def with_term(self, term: RankOneTerm, weight: float = 0.0) -> FactorModel:
        return FactorModel([*self.terms, term], np.append(self.weights, weight), self.shape)

    def without(self, index: int) -> FactorModel:
        keep = [i for i in range(self.rank) if i != index]
        return FactorModel([self.terms[i] for i in keep], self.weights[keep], self.shape)

    def replace(self, index: int, term: RankOneTerm) -> FactorModel:
        terms = list(self.terms)
        terms[index] = term
        return FactorModel(terms, self.weights.copy(), self.shape)

    def with_weights(self, weights: np.ndarray) -> FactorModel:
        return FactorModel(self.terms, weights, self.shape)

    def truncated(self, rank: int) -> FactorModel:
        return FactorModel(self.terms[:rank], self.weights[:rank], self.shape)

    def to_dict(self) -> dict[str, Any]:
        return {
            "shape": list(self.shape),
            "terms": [
                {
                    "alpha": float(alpha),
                    "u": [float(x) for x in term.u.values],
                    "v": [float(x) for x in term.v.values],
                }
                for alpha, term in zip(self.weights, self.terms)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], spec_u: AtomSpec, spec_v: AtomSpec) -> FactorModel:
        terms = [
            RankOneTerm(as_atom(np.array(t["u"]), spec_u), as_atom(np.array(t["v"]), spec_v))
            for t in data["terms"]
        ]
        weights = np.array([float(t["alpha"]) for t in data["terms"]])
        return cls(terms, weights, (int(data["shape"][0]), int(data["shape"][1])))


# ---------------------------------------------------------------------------
# Target problem
# ---------------------------------------------------------------------------


def _coordinates(mask: MaskLike, shape: tuple[int, int]) -> np.ndarray:
    """Validate a mask and return it as a row-major sorted ``(k, 2)`` integer array."""
    coords = np.asarray(mask, dtype=np.int64)
    if coords.size == 0:
        raise ValueError("Observation mask is empty; the objective would be identically zero.")
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise ValueError(f"Mask must be a list of (row, col) pairs, got shape {coords.shape}.")
    n, m = shape
    if np.any(coords[:, 0] < 0) or np.any(coords[:, 0] >= n) or np.any(coords[:, 1] < 0) or np.any(
        coords[:, 1] >= m
    ):
        raise ValueError(f"Mask indices fall outside the matrix shape {shape}.")
    keys = coords[:, 0] * m + coords[:, 1]
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    if np.any(keys[1:] == keys[:-1]):
        raise ValueError("Mask contains duplicate (row, col) pairs.")
    return coords[order]


@dataclass(eq=False)
class TargetProblem:
    """Target matrix ``Y`` with an optional set ``Ω`` of observed entries.

    Build instances with :meth:`full`, :meth:`masked` or :meth:`from_entries`.
    """

    shape: tuple[int, int]
    Y: np.ndarray | None
    mask: np.ndarray | None
    observed: np.ndarray
    symmetric: bool = False
    _weight_matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.shape = (int(self.shape[0]), int(self.shape[1]))
        if self.symmetric and self.shape[0] != self.shape[1]:
            raise ValueError(f"Symmetric mode requires a square target, got shape {self.shape}.")
        if not np.all(np.isfinite(self.observed)):
            raise ValueError("Target contains non-finite values.")
        if self.symmetric:
            self._check_symmetry()

    # -- constructors -------------------------------------------------------

    @classmethod
    def full(cls, Y: np.ndarray, symmetric: bool = False) -> TargetProblem:
        Y = np.array(Y, dtype=float)
        if Y.ndim != 2:
            raise ValueError(f"Target must be a matrix, got {Y.ndim} dimensions.")
        return cls(Y.shape, Y, None, Y.ravel(), symmetric)

    @classmethod
    def masked(cls, Y: np.ndarray, mask: MaskLike, symmetric: bool = False) -> TargetProblem:
        Y = np.asarray(Y, dtype=float)
        if Y.ndim != 2:
            raise ValueError(f"Target must be a matrix, got {Y.ndim} dimensions.")
        coords = _coordinates(mask, Y.shape)
        rows, cols = coords[:, 0], coords[:, 1]
        dense = np.zeros(Y.shape)
        dense[rows, cols] = Y[rows, cols]
        return cls(Y.shape, dense, coords, dense[rows, cols], symmetric)

    @classmethod
    def from_entries(
        cls,
        rows: Iterable[int],
        cols: Iterable[int],
        values: Iterable[float],
        shape: tuple[int, int],
        symmetric: bool = False,
        dense: bool | None = None,
    ) -> TargetProblem:
        """Build a masked problem from observed coordinates.

        ``dense=None`` picks the dense backend when the matrix has at most
        ``DENSE_ENTRY_LIMIT`` entries.
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=float)
        if not rows.shape == cols.shape == values.shape:
            raise ValueError("rows, cols and values must have the same length.")
        shape = (int(shape[0]), int(shape[1]))
        keys = rows * shape[1] + cols if rows.size else rows
        coords = _coordinates(np.column_stack([rows, cols]) if rows.size else [], shape)
        sorted_values = values[np.argsort(keys, kind="stable")]
        if dense is None:
            dense = shape[0] * shape[1] <= DENSE_ENTRY_LIMIT
        if dense:
            Y = np.zeros(shape)
            Y[coords[:, 0], coords[:, 1]] = sorted_values
            return cls(shape, Y, coords, sorted_values, symmetric)
        return cls(shape, None, coords, sorted_values, symmetric)

    # -- properties -----------------------------------------------------------

    @property
    def is_masked(self) -> bool:
        return self.mask is not None

    @property
    def is_dense(self) -> bool:
        return self.Y is not None

    @property
    def rows(self) -> np.ndarray:
        if self.mask is None:
            return np.repeat(np.arange(self.shape[0]), self.shape[1])
        return self.mask[:, 0]

    @property
    def cols(self) -> np.ndarray:
        if self.mask is None:
            return np.tile(np.arange(self.shape[1]), self.shape[0])
        return self.mask[:, 1]

    @property
    def n_observed(self) -> int:
        return int(self.observed.shape[0])

    @property
    def weight_matrix(self) -> np.ndarray | None:
        """0/1 matrix of observed entries (dense masked backend only)."""
        if self.mask is None or self.Y is None:
            return None
        if self._weight_matrix is None:
            self._weight_matrix = _weights_from_coords(self.mask, self.shape)
        return self._weight_matrix

    @property
    def target_norm(self) -> float:
        """``‖Y‖_Ω``."""
        return float(np.sqrt(np.dot(self.observed, self.observed)))

    def dense_target(self) -> np.ndarray:
        if self.Y is not None:
            return self.Y
        Y = np.zeros(self.shape)
        Y[self.mask[:, 0], self.mask[:, 1]] = self.observed
        return Y

    def _check_symmetry(self) -> None:
        if self.mask is None:
            asym = float(np.max(np.abs(self.Y - self.Y.T))) if self.Y.size else 0.0
        else:
            m = self.shape[1]
            keys = self.mask[:, 0] * m + self.mask[:, 1]
            mirrored = self.mask[:, 1] * m + self.mask[:, 0]
            pos = np.minimum(np.searchsorted(keys, mirrored), keys.shape[0] - 1)
            both = keys[pos] == mirrored
            diffs = np.abs(self.observed[both] - self.observed[pos[both]])
            asym = float(np.max(diffs)) if diffs.size else 0.0
        if asym > SYMMETRY_TOLERANCE:
            raise ValueError(f"Symmetric mode requires a symmetric target (max asymmetry {asym:.3g}).")


def _weights_from_coords(coords: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    W = np.zeros(shape)
    W[coords[:, 0], coords[:, 1]] = 1.0
    return W


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def _check_shape(problem: TargetProblem, model: FactorModel) -> None:
    if problem.shape != model.shape:
        raise ValueError(f"Model shape {model.shape} does not match target shape {problem.shape}.")


def inner_omega(A: np.ndarray, B: np.ndarray, mask: MaskLike | None = None) -> float:
    """``⟨A, B⟩_Ω = tr(A_Ωᵀ B_Ω)``; the Frobenius inner product when ``mask`` is None."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"Shape mismatch: {A.shape} vs {B.shape}.")
    if mask is None:
        return float(np.sum(A * B))
    W = _weights_from_coords(_coordinates(mask, A.shape), A.shape)
    return float(np.sum(A * B * W))


def _problem_inner(problem: TargetProblem, A: np.ndarray, B: np.ndarray) -> float:
    W = problem.weight_matrix
    if W is None:
        return float(np.sum(A * B))
    return float(np.sum(A * B * W))


def residual_entries(problem: TargetProblem, model: FactorModel) -> np.ndarray:
    """Residual values at the observed coordinates, in mask order."""
    _check_shape(problem, model)
    if problem.mask is None:
        return (problem.Y - model.reconstruct()).ravel()
    return problem.observed - model.predict(problem.rows, problem.cols)


def residual(problem: TargetProblem, model: FactorModel) -> np.ndarray:
    """Dense ``Y − X`` with unobserved entries zeroed; equals ``−∇f(X)``."""
    _check_shape(problem, model)
    if problem.Y is None:
        R = np.zeros(problem.shape)
        R[problem.rows, problem.cols] = residual_entries(problem, model)
        return R
    R = problem.Y - model.reconstruct()
    W = problem.weight_matrix
    if W is not None:
        R = R * W
    return R


def residual_operator(problem: TargetProblem, model: FactorModel) -> np.ndarray | sp.csr_matrix:
    """The residual in the problem's backend: dense array or sparse CSR operator."""
    if problem.Y is not None:
        return residual(problem, model)
    _check_shape(problem, model)
    return sp.csr_matrix(
        (residual_entries(problem, model), (problem.rows, problem.cols)), shape=problem.shape
    )


def gradient(problem: TargetProblem, model: FactorModel) -> np.ndarray:
    return -residual(problem, model)


def cost(problem: TargetProblem, model: FactorModel) -> float:
    """``½ Σ_Ω (Y − X)²``."""
    if problem.Y is None:
        r = residual_entries(problem, model)
        return 0.5 * float(np.dot(r, r))
    R = residual(problem, model)
    return 0.5 * _problem_inner(problem, R, R)


def term_values(problem: TargetProblem, term: RankOneTerm) -> np.ndarray:
    """Entries of ``u ⊗ v`` at the observed coordinates."""
    return term.u.values[problem.rows] * term.v.values[problem.cols]


def term_norm_sq(problem: TargetProblem, term: RankOneTerm) -> float:
    """``‖u ⊗ v‖²_Ω``."""
    if problem.mask is None:
        return float(np.dot(term.u.values, term.u.values) * np.dot(term.v.values, term.v.values))
    z = term_values(problem, term)
    return float(np.dot(z, z))


def gram_system(problem: TargetProblem, terms: Sequence[RankOneTerm]) -> tuple[np.ndarray, np.ndarray]:
    """Normal equations ``G α = b`` with ``G_ij = ⟨Zᵢ, Zⱼ⟩_Ω`` and ``bᵢ = ⟨Zᵢ, Y⟩_Ω``."""
    if not terms:
        return np.zeros((0, 0)), np.zeros(0)
    U = np.column_stack([t.u.values for t in terms])
    V = np.column_stack([t.v.values for t in terms])
    if problem.mask is None:
        G = (U.T @ U) * (V.T @ V)
        b = np.sum(U * (problem.Y @ V), axis=0)
        return G, b
    P = U[problem.rows] * V[problem.cols]
    return P.T @ P, P.T @ problem.observed
