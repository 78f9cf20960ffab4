"""Tests for the brute-force reference solvers."""

from __future__ import annotations

import numpy as np
import pytest

from structured_pursuit.atomset import AtomSpec, validate_atom
from structured_pursuit.oracle import (
    GRID_RESOLUTION,
    OracleMethod,
    brute_lmo_nonsymmetric,
    brute_lmo_symmetric,
    exhaustive_coherence,
    grid_lmo,
    svd_reference,
)
from structured_pursuit.pursuit import FiniteDictionary
from structured_pursuit.randomness import make_rng


# ---------------------------------------------------------------------------
# Symmetric
# ---------------------------------------------------------------------------


class TestBruteLmoSymmetric:
    def test_diagonal_sphere(self) -> None:
        result = brute_lmo_symmetric(np.diag([3.0, 1.0]), AtomSpec.unit_sphere(2))
        assert result.value == pytest.approx(3.0)
        assert result.method is OracleMethod.SUPPORT_ENUMERATION

    def test_diagonal_sparse_support(self) -> None:
        result = brute_lmo_symmetric(np.diag([3.0, 1.0, 2.0]), AtomSpec.sparse(3, 2))
        assert result.value == pytest.approx(3.0)
        assert 0 in result.atom_u.support
        assert abs(result.atom_u.values[0]) == pytest.approx(1.0)

    def test_sparse_matches_dense_eigenvalue_for_full_support(self) -> None:
        A = make_rng(1).standard_normal((5, 5))
        R = 0.5 * (A + A.T)
        result = brute_lmo_symmetric(R, AtomSpec.sparse(5, 5))
        assert result.value == pytest.approx(np.linalg.eigvalsh(R)[-1])

    def test_non_negative_grid(self) -> None:
        R = np.array([[1.0, 2.0], [2.0, 1.0]])
        result = brute_lmo_symmetric(R, AtomSpec.non_negative(2))
        assert result.method is OracleMethod.GRID_SEARCH
        assert 0.0 < result.resolution <= GRID_RESOLUTION
        assert result.value == pytest.approx(3.0, abs=1e-4)
        assert validate_atom(result.atom_u)

    def test_sparse_non_negative_grid_valid_atom(self) -> None:
        A = make_rng(2).standard_normal((5, 5))
        result = brute_lmo_symmetric(0.5 * (A + A.T), AtomSpec.sparse_non_negative(5, 2))
        assert validate_atom(result.atom_u)
        assert result.value == pytest.approx(
            float(result.atom_u.values @ (0.5 * (A + A.T)) @ result.atom_u.values)
        )

    def test_shape_mismatch(self) -> None:
        with pytest.raises(ValueError, match="does not match"):
            brute_lmo_symmetric(np.eye(3), AtomSpec.unit_sphere(2))

    def test_dimension_limit(self) -> None:
        with pytest.raises(ValueError, match="limited to dimension"):
            brute_lmo_symmetric(np.eye(13), AtomSpec.sparse(13, 2))

    def test_grid_support_limit(self) -> None:
        with pytest.raises(ValueError, match="Grid search is limited"):
            brute_lmo_symmetric(np.eye(6), AtomSpec.non_negative(6))


# ---------------------------------------------------------------------------
# Non-symmetric
# ---------------------------------------------------------------------------


class TestBruteLmoNonsymmetric:
    def test_diagonal(self) -> None:
        spec = AtomSpec.unit_sphere(2)
        assert brute_lmo_nonsymmetric(np.diag([2.0, 1.0]), spec, spec).value == pytest.approx(2.0)

    def test_rank_one_full_sparsity(self) -> None:
        rng = make_rng(3)
        a = rng.standard_normal(3)
        a /= np.linalg.norm(a)
        b = rng.standard_normal(4)
        b /= np.linalg.norm(b)
        result = brute_lmo_nonsymmetric(3.0 * np.outer(a, b), AtomSpec.sparse(3, 3), AtomSpec.sparse(4, 4))
        assert result.value == pytest.approx(3.0)

    def test_matches_exhaustive_value_over_supports(self) -> None:
        R = make_rng(4).standard_normal((4, 5))
        spec_u, spec_v = AtomSpec.sparse(4, 2), AtomSpec.sparse(5, 2)
        result = brute_lmo_nonsymmetric(R, spec_u, spec_v)
        assert result.value == pytest.approx(
            float(result.atom_u.values @ R @ result.atom_v.values)
        )
        assert len(result.atom_u.support) <= 2
        assert len(result.atom_v.support) <= 2

    def test_non_negative_right_side_uses_transpose(self) -> None:
        R = np.array([[1.0, -2.0], [0.5, 3.0], [-1.0, 0.0]])
        result = brute_lmo_nonsymmetric(R, AtomSpec.unit_sphere(3), AtomSpec.non_negative(2))
        assert result.method is OracleMethod.GRID_SEARCH
        assert validate_atom(result.atom_u)
        assert validate_atom(result.atom_v)
        assert np.all(result.atom_v.values >= 0)
        assert result.value == pytest.approx(
            float(result.atom_u.values @ R @ result.atom_v.values), abs=1e-9
        )

    def test_non_negative_closed_form_on_diagonal(self) -> None:
        R = np.diag([2.0, 1.0])
        result = brute_lmo_nonsymmetric(R, AtomSpec.non_negative(2), AtomSpec.non_negative(2))
        assert result.value == pytest.approx(2.0, abs=1e-4)


# ---------------------------------------------------------------------------
# Grid reference
# ---------------------------------------------------------------------------


class TestGridLmo:
    def test_symmetric(self) -> None:
        R = np.array([[1.0, 2.0], [2.0, 1.0]])
        assert grid_lmo(R, AtomSpec.non_negative(2)).value == pytest.approx(3.0, abs=1e-4)

    def test_nonsymmetric(self) -> None:
        R = np.diag([2.0, 1.0])
        result = grid_lmo(R, AtomSpec.unit_sphere(2), AtomSpec.non_negative(2))
        assert result.value == pytest.approx(2.0, abs=1e-4)

    def test_requires_non_negative_side(self) -> None:
        with pytest.raises(ValueError, match="non-negative"):
            grid_lmo(np.eye(2), AtomSpec.unit_sphere(2))


# ---------------------------------------------------------------------------
# SVD and coherence references
# ---------------------------------------------------------------------------


class TestSvdReference:
    def test_diagonal(self) -> None:
        np.testing.assert_allclose(svd_reference(np.diag([3.0, 2.0, 1.0]), 2), [2.5, 0.5])

    def test_rank_one(self) -> None:
        Y = np.outer([1.0, 2.0], [3.0, 1.0, 1.0])
        assert svd_reference(Y, 1)[0] == pytest.approx(0.0, abs=1e-20)

    def test_full_rank_is_zero(self) -> None:
        assert svd_reference(np.eye(3), 3)[-1] == 0.0

    def test_nonincreasing(self) -> None:
        costs = svd_reference(make_rng(5).standard_normal((20, 15)), 15)
        assert np.all(np.diff(costs) <= 0)

    def test_rank_out_of_range(self) -> None:
        with pytest.raises(ValueError, match="rank must lie"):
            svd_reference(np.eye(2), 3)


class TestExhaustiveCoherence:
    def test_orthonormal(self) -> None:
        assert exhaustive_coherence(FiniteDictionary(np.eye(4)), 2) == 0.0

    def test_two_atoms(self) -> None:
        dictionary = FiniteDictionary(np.array([[1.0, 0.0], [0.6, 0.8]]))
        assert exhaustive_coherence(dictionary, 1) == pytest.approx(0.6)

    def test_size_limit(self) -> None:
        with pytest.raises(ValueError, match="limited to"):
            exhaustive_coherence(FiniteDictionary(np.eye(13)), 1)
