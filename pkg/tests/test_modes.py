"""Tests for mapping application modes to atom sets."""

from __future__ import annotations

import pytest

from structured_pursuit.atomset import AtomSpec, Constraint
from structured_pursuit.errors import UsageError
from structured_pursuit.tools.modes import (
    CompletionMode,
    FactorMode,
    completion_mode_spec,
    factor_mode_spec,
)


class TestFactorModes:
    def test_svd(self) -> None:
        mode = factor_mode_spec("svd", (3, 2))
        assert mode.spec_u == AtomSpec.unit_sphere(3)
        assert mode.spec_v == AtomSpec.unit_sphere(2)
        assert not mode.symmetric

    def test_svd_with_structure_flags(self) -> None:
        mode = factor_mode_spec(FactorMode.SVD, (3, 4), sparsity_v=2, nonneg_u=True)
        assert mode.spec_u.constraint is Constraint.NON_NEGATIVE
        assert mode.spec_v == AtomSpec.sparse(4, 2)

    def test_sparse_pca_is_symmetric(self) -> None:
        mode = factor_mode_spec("sparse-pca", (4, 4), sparsity_u=2)
        assert mode.symmetric
        assert mode.spec_v is None
        assert mode.spec_u == AtomSpec.sparse(4, 2)

    def test_snn_pca(self) -> None:
        mode = factor_mode_spec("snn-pca", (4, 4), sparsity_u=3)
        assert mode.spec_u == AtomSpec.sparse_non_negative(4, 3)

    def test_pca_requires_sparsity(self) -> None:
        with pytest.raises(UsageError, match="requires --sparsity-u"):
            factor_mode_spec("sparse-pca", (4, 4))

    def test_pca_requires_square(self) -> None:
        with pytest.raises(UsageError, match="square"):
            factor_mode_spec("sparse-pca", (4, 3), sparsity_u=2)

    def test_nmf(self) -> None:
        mode = factor_mode_spec("nmf", (3, 5))
        assert mode.spec_u == AtomSpec.non_negative(3)
        assert mode.spec_v == AtomSpec.non_negative(5)

    def test_sparse_nmf(self) -> None:
        mode = factor_mode_spec("sparse-nmf", (6, 5), sparsity_u=2, sparsity_v=3)
        assert mode.spec_u == AtomSpec.sparse_non_negative(6, 2)
        assert mode.spec_v == AtomSpec.sparse_non_negative(5, 3)

    def test_sparse_nmf_requires_both_levels(self) -> None:
        with pytest.raises(UsageError, match="sparse-nmf"):
            factor_mode_spec("sparse-nmf", (6, 5), sparsity_u=2)

    def test_sparsity_above_dimension(self) -> None:
        with pytest.raises(UsageError, match="exceeds"):
            factor_mode_spec("svd", (3, 2), sparsity_u=4)

    def test_unknown_mode(self) -> None:
        with pytest.raises(ValueError):
            factor_mode_spec("ica", (3, 3))

    def test_to_dict(self) -> None:
        data = factor_mode_spec("sparse-pca", (4, 4), sparsity_u=2).to_dict()
        assert data == {
            "symmetric": True,
            "spec_u": {"dimension": 4, "constraint": "sparse", "k": 2},
            "spec_v": None,
        }


class TestCompletionModes:
    def test_plain(self) -> None:
        mode = completion_mode_spec("plain", (5, 7))
        assert mode.spec_u == AtomSpec.unit_sphere(5)
        assert mode.spec_v == AtomSpec.unit_sphere(7)

    def test_sparse_default_level(self) -> None:
        mode = completion_mode_spec(CompletionMode.SPARSE, (5, 7))
        assert mode.spec_u == AtomSpec.unit_sphere(5)
        assert mode.spec_v == AtomSpec.sparse(7, 5)

    def test_sparse_explicit_level(self) -> None:
        assert completion_mode_spec("sparse", (5, 7), sparsity_v=2).spec_v == AtomSpec.sparse(7, 2)
