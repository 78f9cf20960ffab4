"""
Dataset loader — reads dense CSV matrices, MatrixMarket coordinate files and rating triples.

Text inputs are parsed through an in-memory DuckDB connection so that CSV dialect handling
and line splitting stay in SQL; MatrixMarket files go through ``scipy.io.mmread``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any

import duckdb
import numpy as np
import scipy.io
import scipy.sparse as sp

from structured_pursuit.errors import InputParseError
from structured_pursuit.objective import TargetProblem
from structured_pursuit.randomness import make_rng
from structured_pursuit.validation import validate_path

logger = logging.getLogger(__name__)

# Stream key for split permutations, kept apart from the pursuit streams.
_SPLIT_STREAM = 0x5F117


class SourceFormat(str, Enum):
    DENSE_CSV = "csv"
    MATRIX_MARKET = "mtx"
    RATING_TRIPLES = "ratings"


class SplitLabel(int, Enum):
    TRAIN = 0
    VALIDATION = 1
    TEST = 2


@dataclass
class Dataset:
    """Observed entries of a matrix plus an optional train/validation/test assignment.

    ``dense`` holds the full matrix for dense CSV inputs; entries are then listed in
    row-major order.
    """

    source_format: SourceFormat
    shape: tuple[int, int]
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    path: str = ""
    dense: np.ndarray | None = None
    split: np.ndarray | None = None

    @property
    def n_entries(self) -> int:
        return int(self.values.shape[0])

    @property
    def is_complete(self) -> bool:
        return self.n_entries == self.shape[0] * self.shape[1]

    def with_split(self, fractions: tuple[float, float, float], seed: int) -> Dataset:
        """Assign every entry to train/validation/test.

        The assignment depends only on the entry order and ``seed``: a seeded permutation is
        cut into consecutive blocks of ``round(a·N)`` and ``round(b·N)`` entries, the test set
        taking the remainder.
        """
        n = self.n_entries
        order = make_rng(seed, _SPLIT_STREAM).permutation(n)
        n_train = int(round(fractions[0] * n))
        n_validation = min(int(round(fractions[1] * n)), n - n_train)
        labels = np.full(n, SplitLabel.TEST.value, dtype=np.int8)
        labels[order[:n_train]] = SplitLabel.TRAIN.value
        labels[order[n_train : n_train + n_validation]] = SplitLabel.VALIDATION.value
        return replace(self, split=labels)

    def indices(self, label: SplitLabel | None = None) -> np.ndarray:
        if label is None:
            return np.arange(self.n_entries)
        if self.split is None:
            raise ValueError("Dataset has no split assignment.")
        return np.flatnonzero(self.split == SplitLabel(label).value)

    def count(self, label: SplitLabel | None = None) -> int:
        return int(self.indices(label).shape[0])

    def to_problem(
        self, label: SplitLabel | None = None, symmetric: bool = False,
    ) -> TargetProblem:
        """The fitting problem over all entries, or over one split."""
        if label is None and self.dense is not None:
            return TargetProblem.full(self.dense, symmetric=symmetric)
        idx = self.indices(label)
        return TargetProblem.from_entries(
            self.rows[idx], self.cols[idx], self.values[idx], self.shape, symmetric=symmetric,
        )

    def describe(self) -> dict[str, Any]:
        info: dict[str, Any] = {
            "format": self.source_format.value,
            "path": self.path,
            "shape": list(self.shape),
            "entries": self.n_entries,
        }
        if self.split is not None:
            info["split_counts"] = {label.name.lower(): self.count(label) for label in SplitLabel}
        return info


def _dense_dataset(matrix: np.ndarray, fmt: SourceFormat, path: str) -> Dataset:
    n, m = matrix.shape
    rows = np.repeat(np.arange(n, dtype=np.int64), m)
    cols = np.tile(np.arange(m, dtype=np.int64), n)
    return Dataset(fmt, (n, m), rows, cols, matrix.ravel().copy(), path, dense=matrix)


def _keep_last(rows: np.ndarray, cols: np.ndarray, values: np.ndarray, m: int, path: str):
    keys = rows * m + cols
    _, first_in_reversed = np.unique(keys[::-1], return_index=True)
    keep = np.sort(keys.shape[0] - 1 - first_in_reversed)
    dropped = keys.shape[0] - keep.shape[0]
    if dropped:
        logger.warning("%s: %d duplicate entries; keeping the last occurrence", path, dropped)
    return rows[keep], cols[keep], values[keep]


def _looks_like_header(line: str) -> bool:
    for field in line.split(","):
        try:
            float(field.strip())
        except ValueError:
            return True
    return False


class DatasetLoader:
    """Reads matrix datasets through a private DuckDB connection."""

    def __init__(self) -> None:
        self._conn = duckdb.connect(":memory:")

    def close(self) -> None:
        self._conn.close()

    def load(self, path: str, source_format: SourceFormat | str) -> Dataset:
        """Load ``path`` in the given format.

        Raises:
            InputParseError: If the file is missing or malformed.
        """
        fmt = SourceFormat(source_format)
        resolved = str(Path(path).resolve())
        try:
            validate_path(resolved, "input path")
        except ValueError as exc:
            raise InputParseError(str(exc)) from exc
        if not Path(resolved).is_file():
            raise InputParseError(f"Input file not found: {resolved}")
        if fmt is SourceFormat.DENSE_CSV:
            return self._load_dense_csv(resolved)
        if fmt is SourceFormat.MATRIX_MARKET:
            return self._load_matrix_market(resolved)
        return self._load_ratings(resolved)

    def load_matrix(self, path: str) -> np.ndarray:
        """Dense matrix from a CSV file (used for dictionaries)."""
        dataset = self.load(path, SourceFormat.DENSE_CSV)
        return dataset.dense

    # -- formats --------------------------------------------------------------

    def _load_dense_csv(self, path: str) -> Dataset:
        try:
            with open(path, encoding="utf-8-sig") as fh:
                first = fh.readline().strip()
        except UnicodeDecodeError as exc:
            raise InputParseError(f"{path}: not valid UTF-8 text ({exc.reason}).") from exc
        if not first:
            raise InputParseError(f"{path}: file is empty.")
        header = _looks_like_header(first)
        try:
            records = self._conn.execute(
                f"SELECT * FROM read_csv('{path}', header = {str(header).lower()}, "
                f"delim = ',', auto_detect = true)"
            ).fetchall()
        except duckdb.Error as exc:
            raise InputParseError(f"{path}: {exc}") from exc
        if not records:
            raise InputParseError(f"{path}: no data rows.")
        try:
            matrix = np.array(records, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InputParseError(f"{path}: non-numeric or missing values ({exc}).") from exc
        if not np.all(np.isfinite(matrix)):
            raise InputParseError(f"{path}: non-finite values.")
        return _dense_dataset(matrix, SourceFormat.DENSE_CSV, path)

    def _load_matrix_market(self, path: str) -> Dataset:
        try:
            loaded = scipy.io.mmread(path)
        except (ValueError, OSError, IndexError) as exc:
            raise InputParseError(f"{path}: not a readable MatrixMarket file ({exc}).") from exc
        if not sp.issparse(loaded):
            return _dense_dataset(np.asarray(loaded, dtype=float), SourceFormat.MATRIX_MARKET, path)
        coo = sp.coo_matrix(loaded)
        if np.iscomplexobj(coo.data):
            raise InputParseError(f"{path}: complex MatrixMarket data is not supported.")
        rows = coo.row.astype(np.int64)
        cols = coo.col.astype(np.int64)
        values = coo.data.astype(float)
        rows, cols, values = _keep_last(rows, cols, values, coo.shape[1], path)
        return Dataset(SourceFormat.MATRIX_MARKET, coo.shape, rows, cols, values, path)

    def _load_ratings(self, path: str) -> Dataset:
        """``user item rating [timestamp]`` lines separated by whitespace or ``::``; 1-indexed."""
        sql = rf"""
            WITH lines AS (
                SELECT string_split(replace(content, chr(13), ''), chr(10)) AS items
                FROM read_text('{path}')
            ),
            numbered AS (
                SELECT generate_subscripts(items, 1) AS line_no, trim(unnest(items)) AS line
                FROM lines
            ),
            fields AS (
                SELECT line_no, regexp_split_to_array(line, '\s+|::') AS parts
                FROM numbered
                WHERE line <> ''
            )
            SELECT
                line_no,
                len(parts) AS n_parts,
                TRY_CAST(parts[1] AS BIGINT) AS user_id,
                TRY_CAST(parts[2] AS BIGINT) AS item_id,
                TRY_CAST(parts[3] AS DOUBLE) AS rating
            FROM fields
            ORDER BY line_no
        """
        try:
            records = self._conn.execute(sql).fetchall()
        except duckdb.Error as exc:
            raise InputParseError(f"{path}: {exc}") from exc
        if not records:
            raise InputParseError(f"{path}: no rating lines.")
        for line_no, n_parts, user, item, rating in records:
            if n_parts < 3 or user is None or item is None or rating is None:
                raise InputParseError(f"{path}: line {line_no}: expected 'user item rating'.")
            if user < 1 or item < 1:
                raise InputParseError(f"{path}: line {line_no}: ids are 1-indexed.")
            if not np.isfinite(rating):
                raise InputParseError(f"{path}: line {line_no}: non-finite rating.")
        table = np.array([(r[2], r[3]) for r in records], dtype=np.int64)
        values = np.array([r[4] for r in records], dtype=float)
        rows = table[:, 0] - 1
        cols = table[:, 1] - 1
        shape = (int(rows.max()) + 1, int(cols.max()) + 1)
        rows, cols, values = _keep_last(rows, cols, values, shape[1], path)
        return Dataset(SourceFormat.RATING_TRIPLES, shape, rows, cols, values, path)
