"""Coherence command — cumulative coherence profile of a finite dictionary."""

from __future__ import annotations

import logging
from typing import Any

import pyarrow as pa
import pyarrow.csv as pacsv

from structured_pursuit.pursuit import CoherenceProfile, FiniteDictionary, coherence_profile
from structured_pursuit.sources.loader import DatasetLoader
from structured_pursuit.tools.report import write_csv_table
from structured_pursuit.validation import parse_m_range

logger = logging.getLogger(__name__)


def load_dictionary(path: str) -> FiniteDictionary:
    """Read a dictionary CSV (one atom per row), normalizing atoms that are not unit vectors."""
    loader = DatasetLoader()
    try:
        atoms = loader.load_matrix(path)
    finally:
        loader.close()
    dictionary = FiniteDictionary(atoms)
    if not dictionary.has_unit_atoms():
        logger.warning("Dictionary atoms are not unit vectors; normalizing")
        dictionary = FiniteDictionary.normalize(atoms)
    return dictionary


def profile_table(profile: CoherenceProfile, ms: range) -> pa.Table:
    return pa.table(
        {
            "m": pa.array(list(ms), type=pa.int64()),
            "mu": pa.array([profile.at(m) for m in ms], type=pa.float64()),
            "rate_bound": pa.array([profile.rate_bound(m) for m in ms], type=pa.float64()),
        }
    )


def csv_text(table: pa.Table) -> str:
    sink = pa.BufferOutputStream()
    pacsv.write_csv(table, sink, write_options=pacsv.WriteOptions(quoting_style="none"))
    return sink.getvalue().to_pybytes().decode("utf-8")


def cmd_coherence(
    dictionary_path: str,
    m_range: str | None = None,
    out_path: str | None = None,
) -> dict[str, Any]:
    """Compute μ(m) and the rate bound ``1 − (1 − μ(m−1))/m`` for the requested ``m``.

    Args:
        dictionary_path: CSV with one atom per row.
        m_range: ``"m"``, ``"a:b"`` or ``"a-b"``; defaults to ``1 … n − 1``.
        out_path: Optional CSV destination; the CSV text is returned either way.

    Returns:
        ``{"atoms", "dimension", "rows", "csv", "path"}``.
    """
    dictionary = load_dictionary(dictionary_path)
    upper = dictionary.size - 1
    ms = parse_m_range(m_range, upper) if m_range else range(1, upper + 1)
    profile = coherence_profile(dictionary)
    table = profile_table(profile, ms)
    result: dict[str, Any] = {
        "atoms": dictionary.size,
        "dimension": dictionary.dimension,
        "rows": table.to_pylist(),
        "csv": csv_text(table),
        "path": None,
    }
    if out_path is not None:
        result["path"] = str(write_csv_table(table, out_path))
    return result
