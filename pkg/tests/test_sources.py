"""Tests for the dataset loader."""

from __future__ import annotations

from collections.abc import Iterator
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

from structured_pursuit.errors import InputParseError
from structured_pursuit.seed.generator import write_dense_csv, write_matrix_market
from structured_pursuit.sources.loader import (
    DatasetLoader,
    SourceFormat,
    SplitLabel,
)


@pytest.fixture
def loader() -> Iterator[DatasetLoader]:
    instance = DatasetLoader()
    yield instance
    instance.close()


def _write(path: Path, text: str) -> str:
    path.write_text(text, encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------------------
# Dense CSV
# ---------------------------------------------------------------------------


class TestDenseCsv:
    def test_without_header(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "m.csv", "1,2,3\n4,5,6\n")
        dataset = loader.load(path, "csv")
        assert dataset.shape == (2, 3)
        np.testing.assert_array_equal(dataset.dense, [[1, 2, 3], [4, 5, 6]])
        assert dataset.is_complete
        np.testing.assert_array_equal(dataset.rows, [0, 0, 0, 1, 1, 1])
        np.testing.assert_array_equal(dataset.cols, [0, 1, 2, 0, 1, 2])

    def test_with_header(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "m.csv", "a,b\n1.5,2\n3,-4\n")
        dataset = loader.load(path, SourceFormat.DENSE_CSV)
        np.testing.assert_array_equal(dataset.dense, [[1.5, 2.0], [3.0, -4.0]])

    def test_generator_output(self, loader: DatasetLoader, tmp_path: Path) -> None:
        matrix = np.arange(12, dtype=float).reshape(3, 4) / 7.0
        path = write_dense_csv(matrix, tmp_path / "gen.csv")
        np.testing.assert_allclose(loader.load(str(path), "csv").dense, matrix)

    def test_full_problem(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "m.csv", "1,2\n2,1\n")
        problem = loader.load(path, "csv").to_problem(symmetric=True)
        assert not problem.is_masked
        assert problem.symmetric

    def test_load_matrix(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "d.csv", "1,0\n0,1\n")
        np.testing.assert_array_equal(loader.load_matrix(path), np.eye(2))

    def test_empty_file(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "empty.csv", "")
        with pytest.raises(InputParseError, match="empty"):
            loader.load(path, "csv")

    def test_non_numeric(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "bad.csv", "1,2\n3,x\n")
        with pytest.raises(InputParseError):
            loader.load(path, "csv")

    def test_missing_value(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "gap.csv", "1,2\n3,\n")
        with pytest.raises(InputParseError):
            loader.load(path, "csv")

    def test_byte_order_mark_keeps_first_row(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = tmp_path / "bom.csv"
        path.write_bytes(b"\xef\xbb\xbf1,2\n3,4\n")
        dataset = loader.load(str(path), "csv")
        assert dataset.shape == (2, 2)
        np.testing.assert_array_equal(dataset.dense, [[1.0, 2.0], [3.0, 4.0]])

    def test_byte_order_mark_before_header(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = tmp_path / "bom_header.csv"
        path.write_bytes(b"\xef\xbb\xbfa,b\n1,2\n")
        np.testing.assert_array_equal(loader.load(str(path), "csv").dense, [[1.0, 2.0]])

    def test_invalid_utf8(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = tmp_path / "latin1.csv"
        path.write_bytes(b"1,2\n3,\xff\n")
        with pytest.raises(InputParseError, match="UTF-8"):
            loader.load(str(path), "csv")


# ---------------------------------------------------------------------------
# MatrixMarket
# ---------------------------------------------------------------------------


class TestMatrixMarket:
    def test_coordinate(self, loader: DatasetLoader, tmp_path: Path) -> None:
        matrix = sp.coo_matrix(([1.0, 2.5], ([0, 2], [1, 0])), shape=(3, 2))
        path = write_matrix_market(matrix, tmp_path / "m.mtx")
        dataset = loader.load(str(path), "mtx")
        assert dataset.shape == (3, 2)
        assert dataset.n_entries == 2
        assert not dataset.is_complete
        got = {(int(r), int(c)): float(v) for r, c, v in zip(dataset.rows, dataset.cols, dataset.values)}
        assert got == {(0, 1): 1.0, (2, 0): 2.5}

    def test_coordinate_problem_is_masked(self, loader: DatasetLoader, tmp_path: Path) -> None:
        matrix = sp.coo_matrix(([1.0, 2.0], ([0, 1], [0, 1])), shape=(2, 2))
        path = write_matrix_market(matrix, tmp_path / "m.mtx")
        problem = loader.load(str(path), "mtx").to_problem()
        assert problem.is_masked
        assert problem.n_observed == 2

    def test_dense_array(self, loader: DatasetLoader, tmp_path: Path) -> None:
        matrix = np.array([[1.0, 2.0], [3.0, 4.0]])
        path = write_matrix_market(matrix, tmp_path / "dense.mtx")
        dataset = loader.load(str(path), "mtx")
        assert dataset.is_complete
        np.testing.assert_allclose(dataset.dense, matrix)


# ---------------------------------------------------------------------------
# Rating triples
# ---------------------------------------------------------------------------


class TestRatings:
    def test_separators_and_indexing(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "r.dat", "1::1::5\n2 3 4.5 978300760\n\n2\t1\t1\n")
        dataset = loader.load(path, "ratings")
        assert dataset.shape == (2, 3)
        np.testing.assert_array_equal(dataset.rows, [0, 1, 1])
        np.testing.assert_array_equal(dataset.cols, [0, 2, 0])
        np.testing.assert_array_equal(dataset.values, [5.0, 4.5, 1.0])

    def test_crlf_lines(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = tmp_path / "r.dat"
        path.write_bytes(b"1 1 3\r\n1 2 4\r\n")
        assert loader.load(str(path), "ratings").n_entries == 2

    def test_duplicates_keep_last(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "r.dat", "1 1 3\n2 2 1\n1 1 4\n")
        dataset = loader.load(path, "ratings")
        assert dataset.n_entries == 2
        got = {(int(r), int(c)): float(v) for r, c, v in zip(dataset.rows, dataset.cols, dataset.values)}
        assert got == {(0, 0): 4.0, (1, 1): 1.0}

    def test_short_line(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "r.dat", "1 1 3\n1 2\n")
        with pytest.raises(InputParseError, match="line 2"):
            loader.load(path, "ratings")

    def test_zero_index(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "r.dat", "0 1 3\n")
        with pytest.raises(InputParseError, match="1-indexed"):
            loader.load(path, "ratings")

    def test_non_numeric_rating(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "r.dat", "1 1 good\n")
        with pytest.raises(InputParseError, match="line 1"):
            loader.load(path, "ratings")

    def test_no_lines(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "r.dat", "\n\n")
        with pytest.raises(InputParseError):
            loader.load(path, "ratings")


# ---------------------------------------------------------------------------
# Paths and splits
# ---------------------------------------------------------------------------


class TestPaths:
    def test_missing_file(self, loader: DatasetLoader, tmp_path: Path) -> None:
        with pytest.raises(InputParseError, match="not found"):
            loader.load(str(tmp_path / "nope.csv"), "csv")

    def test_unsafe_path(self, loader: DatasetLoader, tmp_path: Path) -> None:
        with pytest.raises(InputParseError, match="disallowed"):
            loader.load(str(tmp_path / "it's.csv"), "csv")

    def test_unknown_format(self, loader: DatasetLoader, tmp_path: Path) -> None:
        path = _write(tmp_path / "m.csv", "1\n")
        with pytest.raises(ValueError):
            loader.load(path, "parquet")


class TestSplit:
    @pytest.fixture
    def dataset(self, loader: DatasetLoader, tmp_path: Path):
        lines = "".join(f"{i // 10 + 1} {i % 10 + 1} {1 + i % 5}\n" for i in range(100))
        return loader.load(_write(tmp_path / "r.dat", lines), "ratings")

    def test_counts(self, dataset) -> None:
        split = dataset.with_split((0.6, 0.2, 0.2), seed=1)
        assert split.count(SplitLabel.TRAIN) == 60
        assert split.count(SplitLabel.VALIDATION) == 20
        assert split.count(SplitLabel.TEST) == 20
        assert split.count() == 100

    def test_deterministic(self, dataset) -> None:
        a = dataset.with_split((0.5, 0.25, 0.25), seed=7)
        b = dataset.with_split((0.5, 0.25, 0.25), seed=7)
        np.testing.assert_array_equal(a.split, b.split)

    def test_seed_changes_assignment(self, dataset) -> None:
        a = dataset.with_split((0.5, 0.25, 0.25), seed=7)
        b = dataset.with_split((0.5, 0.25, 0.25), seed=8)
        assert not np.array_equal(a.split, b.split)

    def test_all_train(self, dataset) -> None:
        split = dataset.with_split((1.0, 0.0, 0.0), seed=0)
        assert split.count(SplitLabel.TRAIN) == 100
        assert split.count(SplitLabel.VALIDATION) == 0

    def test_original_untouched(self, dataset) -> None:
        dataset.with_split((0.8, 0.1, 0.1), seed=0)
        assert dataset.split is None
        with pytest.raises(ValueError, match="no split"):
            dataset.indices(SplitLabel.TRAIN)

    def test_problem_per_split(self, dataset) -> None:
        split = dataset.with_split((0.6, 0.2, 0.2), seed=3)
        problem = split.to_problem(SplitLabel.VALIDATION)
        assert problem.is_masked
        assert problem.n_observed == 20
        assert problem.shape == (10, 10)

    def test_describe(self, dataset) -> None:
        info = dataset.with_split((0.6, 0.2, 0.2), seed=3).describe()
        assert info["format"] == "ratings"
        assert info["shape"] == [10, 10]
        assert info["split_counts"] == {"train": 60, "validation": 20, "test": 20}
