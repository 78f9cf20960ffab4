"""
Structured vector atom sets.

An atom set is the compact set of unit vectors a factor may take: the whole sphere, k-sparse
unit vectors, non-negative unit vectors, or k-sparse non-negative unit vectors. Every
atomic power step reduces to one exact linear maximization over such a set, implemented
here in closed form.

New structures plug in by adding a ``Constraint`` member and registering its maximizer in
``_MAXIMIZERS``; ``power`` and ``pursuit`` only ever call :func:`linear_argmax` and
:func:`random_atom`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable

import numpy as np

from structured_pursuit import VALIDATION_TOLERANCE
from structured_pursuit.errors import DegenerateDirectionError


class Constraint(str, Enum):
    UNIT_SPHERE = "unit-sphere"
    SPARSE = "sparse"
    NON_NEGATIVE = "non-negative"
    SPARSE_NON_NEGATIVE = "sparse-non-negative"

    @property
    def is_sparse(self) -> bool:
        return self in (Constraint.SPARSE, Constraint.SPARSE_NON_NEGATIVE)

    @property
    def is_non_negative(self) -> bool:
        return self in (Constraint.NON_NEGATIVE, Constraint.SPARSE_NON_NEGATIVE)


@dataclass(frozen=True)
class AtomSpec:
    """Declarative description of an atom set in ``dimension`` coordinates.

    ``k`` is the sparsity level and is required exactly for the sparse constraints.
    """

    dimension: int
    constraint: Constraint = Constraint.UNIT_SPHERE
    k: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "constraint", Constraint(self.constraint))
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValueError(f"Atom dimension must be a positive integer, got {self.dimension!r}.")
        if self.constraint.is_sparse:
            if self.k is None:
                raise ValueError(f"Constraint '{self.constraint.value}' requires a sparsity level k.")
            if int(self.k) != self.k or not 1 <= self.k <= self.dimension:
                raise ValueError(
                    f"Sparsity k={self.k} must satisfy 1 <= k <= dimension ({self.dimension})."
                )
        elif self.k is not None:
            raise ValueError(f"Constraint '{self.constraint.value}' does not take a sparsity level.")

    @classmethod
    def unit_sphere(cls, dimension: int) -> AtomSpec:
        return cls(dimension, Constraint.UNIT_SPHERE)

    @classmethod
    def sparse(cls, dimension: int, k: int) -> AtomSpec:
        return cls(dimension, Constraint.SPARSE, k)

    @classmethod
    def non_negative(cls, dimension: int) -> AtomSpec:
        return cls(dimension, Constraint.NON_NEGATIVE)

    @classmethod
    def sparse_non_negative(cls, dimension: int, k: int) -> AtomSpec:
        return cls(dimension, Constraint.SPARSE_NON_NEGATIVE, k)

    @classmethod
    def build(
        cls, dimension: int, k: int | None = None, non_negative: bool = False,
    ) -> AtomSpec:
        """Combine the sparsity and sign structures into a single spec."""
        if k is None:
            constraint = Constraint.NON_NEGATIVE if non_negative else Constraint.UNIT_SPHERE
        else:
            constraint = Constraint.SPARSE_NON_NEGATIVE if non_negative else Constraint.SPARSE
        return cls(dimension, constraint, k)

    def to_dict(self) -> dict[str, Any]:
        return {"dimension": self.dimension, "constraint": self.constraint.value, "k": self.k}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AtomSpec:
        return cls(int(data["dimension"]), Constraint(data["constraint"]), data.get("k"))

    def describe(self) -> str:
        if self.k is None:
            return f"{self.constraint.value}({self.dimension})"
        return f"{self.constraint.value}({self.dimension}, k={self.k})"


@dataclass(frozen=True, eq=False)
class VectorAtom:
    """A unit vector belonging to the atom set described by ``spec``."""

    values: np.ndarray
    spec: AtomSpec

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)

    def negated(self) -> VectorAtom:
        return VectorAtom(-self.values, self.spec)


# ---------------------------------------------------------------------------
# Closed-form maximizers of <u, w> over each atom set
# ---------------------------------------------------------------------------


def _normalized(values: np.ndarray) -> np.ndarray:
    return values / np.linalg.norm(values)


def _top_k(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest scores; ties go to the lowest index."""
    return np.argsort(-scores, kind="stable")[:k]


def _basis_vector(dimension: int, index: int) -> np.ndarray:
    out = np.zeros(dimension)
    out[index] = 1.0
    return out


def _argmax_sphere(spec: AtomSpec, w: np.ndarray) -> np.ndarray:
    return _normalized(w)


def _argmax_sparse(spec: AtomSpec, w: np.ndarray) -> np.ndarray:
    keep = _top_k(np.abs(w), spec.k)
    out = np.zeros(spec.dimension)
    out[keep] = w[keep]
    if not np.any(out):
        raise DegenerateDirectionError("All candidate entries of the direction are zero.")
    return _normalized(out)


def _argmax_non_negative(spec: AtomSpec, w: np.ndarray) -> np.ndarray:
    positive = np.maximum(w, 0.0)
    if not np.any(positive > 0.0):
        return _basis_vector(spec.dimension, int(np.argmax(w)))
    return _normalized(positive)


def _argmax_sparse_non_negative(spec: AtomSpec, w: np.ndarray) -> np.ndarray:
    positive = np.maximum(w, 0.0)
    if not np.any(positive > 0.0):
        return _basis_vector(spec.dimension, int(np.argmax(w)))
    keep = _top_k(positive, spec.k)
    out = np.zeros(spec.dimension)
    out[keep] = positive[keep]
    return _normalized(out)


_MAXIMIZERS: dict[Constraint, Callable[[AtomSpec, np.ndarray], np.ndarray]] = {
    Constraint.UNIT_SPHERE: _argmax_sphere,
    Constraint.SPARSE: _argmax_sparse,
    Constraint.NON_NEGATIVE: _argmax_non_negative,
    Constraint.SPARSE_NON_NEGATIVE: _argmax_sparse_non_negative,
}


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def linear_argmax(spec: AtomSpec, w: np.ndarray) -> VectorAtom:
    """Return an exact maximizer of ``<u, w>`` over the atom set ``spec``.

    Args:
        spec: The atom set.
        w: Direction of length ``spec.dimension``; must be finite.

    Returns:
        The maximizing atom. Under non-negativity, an all-nonpositive direction yields the
        basis vector at ``argmax(w)``.

    Raises:
        DegenerateDirectionError: If ``w`` is zero (or, for sparse sets, every candidate
            entry is zero).
        ValueError: On a length mismatch or non-finite entries.
    """
    w = np.asarray(w, dtype=float).ravel()
    if w.shape[0] != spec.dimension:
        raise ValueError(
            f"Direction has length {w.shape[0]} but the atom set has dimension {spec.dimension}."
        )
    if not np.all(np.isfinite(w)):
        raise ValueError("Direction contains non-finite entries.")
    if not np.any(w):
        raise DegenerateDirectionError("Cannot maximize over a zero direction.")
    return VectorAtom(_MAXIMIZERS[spec.constraint](spec, w), spec)


def validate_atom(atom: VectorAtom, tolerance: float = VALIDATION_TOLERANCE) -> bool:
    """True iff ``atom`` is a unit vector satisfying its spec's sparsity and sign structure."""
    values = atom.values
    spec = atom.spec
    if values.ndim != 1 or values.shape[0] != spec.dimension:
        return False
    if not np.all(np.isfinite(values)):
        return False
    if abs(float(np.linalg.norm(values)) - 1.0) > tolerance:
        return False
    if spec.constraint.is_sparse and int(np.count_nonzero(np.abs(values) > tolerance)) > spec.k:
        return False
    if spec.constraint.is_non_negative and np.any(values < -tolerance):
        return False
    return True


def random_atom(spec: AtomSpec, rng: np.random.Generator) -> VectorAtom:
    """Draw a standard normal direction and map it into the atom set."""
    while True:
        try:
            return linear_argmax(spec, rng.standard_normal(spec.dimension))
        except DegenerateDirectionError:  # pragma: no cover - probability zero
            continue


def as_atom(values: np.ndarray, spec: AtomSpec) -> VectorAtom:
    """Wrap ``values`` as an atom of ``spec``, rejecting vectors outside the set."""
    atom = VectorAtom(values, spec)
    if not validate_atom(atom):
        raise ValueError(f"Vector is not a valid atom of {spec.describe()}.")
    return atom


def cone_projection(spec: AtomSpec, x: np.ndarray) -> np.ndarray:
    """Closest point to ``x`` in the cone ``{t·u : u in the atom set, t >= 0}``.

    Clips negative entries under non-negativity and keeps the ``k`` entries of largest
    magnitude under sparsity. The result may be zero and is not normalized.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != spec.dimension:
        raise ValueError(
            f"Vector has length {x.shape[0]} but the atom set has dimension {spec.dimension}."
        )
    out = np.maximum(x, 0.0) if spec.constraint.is_non_negative else x.copy()
    if spec.constraint.is_sparse:
        keep = _top_k(np.abs(out), spec.k)
        kept = np.zeros(spec.dimension)
        kept[keep] = out[keep]
        out = kept
    return out
