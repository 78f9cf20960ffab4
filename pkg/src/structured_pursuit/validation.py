"""Validation helpers for file paths and command options."""

from __future__ import annotations

import re

from structured_pursuit.errors import UsageError

# Paths are interpolated into single-quoted DuckDB string literals.
_DANGEROUS_PATH_CHARS_RE = re.compile(r"--")

_RANGE_RE = re.compile(r"^\s*(\d+)\s*(?:[:-]\s*(\d+)\s*)?$")

SPLIT_TOLERANCE = 1e-9


def validate_path(value: str, label: str = "path") -> str:
    """Validate that a file path is safe to interpolate into a SQL string literal.

    Args:
        value: The path string to validate.
        label: A human-readable label for error messages.

    Returns:
        The validated path string.

    Raises:
        ValueError: If the path is empty or contains quotes, semicolons or ``--``.
    """
    if not value.strip():
        raise ValueError(f"Invalid {label}: must not be empty.")
    if "'" in value or '"' in value or ";" in value:
        raise ValueError(
            f"Invalid {label}: '{value}' contains disallowed characters (quotes or semicolons)."
        )
    if _DANGEROUS_PATH_CHARS_RE.search(value):
        raise ValueError(f"Invalid {label}: '{value}' contains disallowed character sequences.")
    return value


def parse_split(value: str) -> tuple[float, float, float]:
    """Parse ``"a,b,c"`` train/validation/test fractions that sum to 1.

    Raises:
        UsageError: On malformed input, negative fractions, or a sum other than 1.
    """
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 3:
        raise UsageError(f"Invalid split '{value}': expected three comma-separated fractions.")
    try:
        fractions = tuple(float(p) for p in parts)
    except ValueError:
        raise UsageError(f"Invalid split '{value}': fractions must be numbers.") from None
    if any(f < 0 for f in fractions):
        raise UsageError(f"Invalid split '{value}': fractions must be non-negative.")
    if abs(sum(fractions) - 1.0) > SPLIT_TOLERANCE:
        raise UsageError(f"Invalid split '{value}': fractions must sum to 1.")
    return fractions  # type: ignore[return-value]


def parse_m_range(value: str, upper: int) -> range:
    """Parse ``"m"``, ``"a:b"`` or ``"a-b"`` (inclusive) and check ``1 <= a <= b <= upper``."""
    match = _RANGE_RE.match(value)
    if not match:
        raise UsageError(f"Invalid m range '{value}': expected 'm', 'a:b' or 'a-b'.")
    lo = int(match.group(1))
    hi = int(match.group(2)) if match.group(2) else lo
    if not 1 <= lo <= hi <= upper:
        raise UsageError(f"m range {lo}..{hi} must lie within 1..{upper}.")
    return range(lo, hi + 1)


def validate_sparsity(k: int | None, dimension: int, label: str) -> int | None:
    """Check an optional sparsity level against the factor dimension."""
    if k is None:
        return None
    if k < 1:
        raise UsageError(f"{label} must be >= 1, got {k}.")
    if k > dimension:
        raise UsageError(f"{label}={k} exceeds the factor dimension {dimension}.")
    return k
