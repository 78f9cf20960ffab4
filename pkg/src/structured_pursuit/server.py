"""
Structured pursuit — MCP tool server.

Exposes the factorize, complete and coherence commands as tools so an assistant can run fits
and read back metrics.
"""

from __future__ import annotations

import functools
import json
import logging
import os
from typing import Any, Callable

from mcp.server.fastmcp import FastMCP

from structured_pursuit.tools.coherence import cmd_coherence
from structured_pursuit.tools.complete import DEFAULT_SPLIT, cmd_complete
from structured_pursuit.tools.factorize import cmd_factorize, summarize

logging.basicConfig(level=os.environ.get("LOG_LEVEL", "INFO").upper())
logger = logging.getLogger("structured-pursuit")


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _json(result: Any) -> str:
    """Serialize a tool result to JSON."""
    return json.dumps(result, indent=2, default=str)


def _error(exc: Exception) -> str:
    """Return a clean JSON error payload instead of a raw traceback."""
    return json.dumps({"error": type(exc).__name__, "message": str(exc)}, indent=2)


def _tool_handler(fn: Callable[..., Any]) -> Callable[..., str]:
    """Decorator that wraps a tool function with JSON serialization and error handling."""
    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> str:
        try:
            return _json(fn(*args, **kwargs))
        except Exception as exc:
            logger.exception("%s failed", fn.__name__)
            return _error(exc)
    return wrapper


mcp = FastMCP(
    "structured-pursuit",
    instructions=(
        "Greedy structured low-rank matrix factorization and completion: sparse PCA, "
        "non-negative factorizations and matrix completion with atom corrections."
    ),
)


# ---------------------------------------------------------------------------
# Tools
# ---------------------------------------------------------------------------


@mcp.tool()
@_tool_handler
def factorize(
    input_path: str,
    format: str = "csv",
    mode: str = "svd",
    rank: int = 5,
    sparsity_u: int | None = None,
    sparsity_v: int | None = None,
    symmetric: bool = False,
    covariance: bool = False,
    corrections: int = 0,
    seed: int = 0,
    out_dir: str | None = None,
) -> dict[str, Any]:
    """Fit a structured low-rank factorization.

    Args:
        input_path: Dense CSV, MatrixMarket ('mtx') or rating-triple file.
        format: One of 'csv', 'mtx', 'ratings'.
        mode: One of 'svd', 'sparse-pca', 'snn-pca', 'nmf', 'sparse-nmf'.
        rank: Number of rank-one terms.
        sparsity_u: Nonzeros per left factor (required for sparse modes).
        sparsity_v: Nonzeros per right factor.
        symmetric: Fit v = u.
        covariance: Factorize the sample covariance of the input.
        corrections: Atom-correction passes per iteration.
        seed: Random seed.
        out_dir: Optional directory for report, factors and trace files.
    """
    report = cmd_factorize(
        input_path, format, mode, rank, sparsity_u, sparsity_v,
        symmetric=symmetric, covariance=covariance, corrections=corrections, seed=seed,
        out_dir=out_dir,
    )
    return {**summarize(report), "explained_variance_by_rank": report.details["explained_variance_by_rank"]}


@mcp.tool()
@_tool_handler
def complete(
    input_path: str,
    format: str = "ratings",
    split: str = DEFAULT_SPLIT,
    rank: int = 10,
    mode: str = "plain",
    sparsity_v: int | None = None,
    corrections: int = 0,
    correction_method: str = "auto",
    seed: int = 0,
    out_dir: str | None = None,
) -> dict[str, Any]:
    """Complete a partially observed matrix, choosing the rank on the validation split.

    Args:
        input_path: Rating triples or MatrixMarket coordinate file.
        format: One of 'ratings', 'mtx', 'csv'.
        split: Train,validation,test fractions, e.g. '0.5,0.2,0.3'.
        rank: Largest rank to try.
        mode: 'plain' or 'sparse' (sparse right factors).
        sparsity_v: Right-factor nonzeros for sparse mode (default 60% of columns).
        corrections: Atom-correction passes.
        correction_method: 'auto', 'lmo' or 'alternating'.
        seed: Random seed for the split and the fit.
        out_dir: Optional directory for report, factors and trace files.
    """
    report = cmd_complete(
        input_path, format, split, rank, mode, sparsity_v=sparsity_v,
        corrections=corrections, seed=seed, out_dir=out_dir,
        correction_method=correction_method,
    )
    return {**summarize(report), "rank_curve": report.details["rank_curve"]}


@mcp.tool()
@_tool_handler
def coherence(dictionary_path: str, m_range: str | None = None) -> dict[str, Any]:
    """Cumulative coherence μ(m) of a dictionary and the matching pursuit rate bound.

    Args:
        dictionary_path: CSV with one atom per row.
        m_range: 'm', 'a:b' or 'a-b' (default: every m).
    """
    result = cmd_coherence(dictionary_path, m_range)
    return {k: v for k, v in result.items() if k != "csv"}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def main() -> None:
    """Run the structured pursuit tool server."""
    logger.info("Starting structured pursuit server...")
    mcp.run()


if __name__ == "__main__":
    main()
