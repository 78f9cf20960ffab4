"""Application modes — which atom sets a factorization or completion run uses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

from structured_pursuit.atomset import AtomSpec
from structured_pursuit.errors import UsageError
from structured_pursuit.validation import validate_sparsity

# Right-factor sparsity fraction used for sparse completion when no level is given.
DEFAULT_SPARSE_FRACTION = 0.6


class FactorMode(str, Enum):
    SVD = "svd"
    SPARSE_PCA = "sparse-pca"
    SNN_PCA = "snn-pca"
    NMF = "nmf"
    SPARSE_NMF = "sparse-nmf"


class CompletionMode(str, Enum):
    PLAIN = "plain"
    SPARSE = "sparse"


_PCA_MODES = (FactorMode.SPARSE_PCA, FactorMode.SNN_PCA)


@dataclass(frozen=True)
class ModeSpec:
    """Resolved atom sets; ``spec_v`` is None for symmetric runs (``v = u``)."""

    spec_u: AtomSpec
    spec_v: AtomSpec | None
    symmetric: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "symmetric": self.symmetric,
            "spec_u": self.spec_u.to_dict(),
            "spec_v": None if self.spec_v is None else self.spec_v.to_dict(),
        }


def _build(
    shape: tuple[int, int],
    symmetric: bool,
    sparsity_u: int | None,
    sparsity_v: int | None,
    nonneg_u: bool,
    nonneg_v: bool,
) -> ModeSpec:
    n, m = shape
    if symmetric and n != m:
        raise UsageError(f"Symmetric factorization needs a square matrix, got {n}x{m}.")
    k = validate_sparsity(sparsity_u, n, "--sparsity-u")
    spec_u = AtomSpec.build(n, k, nonneg_u)
    if symmetric:
        return ModeSpec(spec_u, None, True)
    q = validate_sparsity(sparsity_v, m, "--sparsity-v")
    return ModeSpec(spec_u, AtomSpec.build(m, q, nonneg_v), False)


def factor_mode_spec(
    mode: FactorMode | str,
    shape: tuple[int, int],
    sparsity_u: int | None = None,
    sparsity_v: int | None = None,
    nonneg_u: bool = False,
    nonneg_v: bool = False,
    symmetric: bool = False,
) -> ModeSpec:
    """Map a factorization mode plus structure flags to atom sets.

    ``sparse-pca`` and ``snn-pca`` are symmetric and need ``sparsity_u``; ``sparse-nmf``
    needs both sparsity levels. The structure flags add to what the mode implies.

    Raises:
        UsageError: On missing sparsity levels, levels above the dimension, or a
            symmetric mode on a non-square matrix.
    """
    mode = FactorMode(mode)
    if mode in _PCA_MODES:
        if sparsity_u is None:
            raise UsageError(f"Mode '{mode.value}' requires --sparsity-u.")
        symmetric = True
    if mode is FactorMode.SPARSE_NMF and (sparsity_u is None or (sparsity_v is None and not symmetric)):
        raise UsageError("Mode 'sparse-nmf' requires --sparsity-u and --sparsity-v.")
    nonnegative = mode in (FactorMode.SNN_PCA, FactorMode.NMF, FactorMode.SPARSE_NMF)
    return _build(
        shape, symmetric, sparsity_u, sparsity_v, nonneg_u or nonnegative, nonneg_v or nonnegative,
    )


def completion_mode_spec(
    mode: CompletionMode | str,
    shape: tuple[int, int],
    sparsity_u: int | None = None,
    sparsity_v: int | None = None,
    nonneg_u: bool = False,
    nonneg_v: bool = False,
) -> ModeSpec:
    """``plain``: sphere atoms on both sides. ``sparse``: dense left factor, right factor with
    ``sparsity_v`` nonzeros (default ``⌈0.6·m⌉``)."""
    mode = CompletionMode(mode)
    if mode is CompletionMode.SPARSE and sparsity_v is None:
        sparsity_v = math.ceil(DEFAULT_SPARSE_FRACTION * shape[1])
    return _build(shape, False, sparsity_u, sparsity_v, nonneg_u, nonneg_v)
