"""
Synthetic problem generator.

Writes small reproducible inputs for every command:
- A low-rank matrix with a geometric spectrum plus noise (dense CSV and MatrixMarket)
- Samples from a covariance with a planted sparse leading direction (sparse PCA)
- A non-negative matrix built from sparse non-negative factors (NMF)
- Rating triples sampled from a low-rank matrix (completion)
- A near-orthogonal dictionary with low cumulative coherence

Usage:
    structured-pursuit-seed                          # Default: outputs to ./data/
    structured-pursuit-seed --output ./my-data       # Custom output directory
    structured-pursuit-seed --rows 200 --cols 80     # Matrix size
    structured-pursuit-seed --kind ratings           # Only one kind of problem
    structured-pursuit-seed --noiseless              # Exact low-rank targets
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np
import pyarrow as pa
import scipy.io
import scipy.sparse as sp

from structured_pursuit.randomness import make_rng
from structured_pursuit.tools.report import atomic_write_text, write_csv_table

KINDS = ("lowrank", "covariance", "nmf", "ratings", "dictionary")

# Independent random streams per problem kind.
_STREAMS = {kind: index for index, kind in enumerate(KINDS)}

# ---------------------------------------------------------------------------
# Generation config
# ---------------------------------------------------------------------------


@dataclass
class GeneratorConfig:
    """Sizes, spectra and noise levels for the synthetic problems.

    Use :meth:`noiseless` for exact low-rank targets.
    """

    rows: int = 100
    cols: int = 60
    rank: int = 5
    decay: float = 0.8               # singular value ratio between consecutive terms
    noise: float = 0.01              # entry-wise Gaussian noise standard deviation

    samples: int = 200               # rows of the covariance sample matrix
    spike_support: int = 10          # nonzeros of the planted covariance direction
    spike_strength: float = 5.0

    factor_sparsity: float = 0.3     # fraction of nonzero entries in NMF factors

    observed_fraction: float = 0.3   # fraction of entries kept as ratings
    rating_min: float = 1.0
    rating_max: float = 5.0

    dictionary_atoms: int = 40
    dictionary_perturbation: float = 0.05

    seed: int = 42

    @classmethod
    def noiseless(cls, **overrides: Any) -> GeneratorConfig:
        return replace(cls(noise=0.0), **overrides)


# ---------------------------------------------------------------------------
# Problem generators
# ---------------------------------------------------------------------------


def _orthonormal(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return q


def low_rank_matrix(cfg: GeneratorConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``Y = U diag(s) Vᵀ + noise`` with ``s_i = decay**i``; returns ``(Y, s)``."""
    cfg = cfg or GeneratorConfig()
    rng = make_rng(cfg.seed, _STREAMS["lowrank"])
    rank = min(cfg.rank, cfg.rows, cfg.cols)
    spectrum = cfg.decay ** np.arange(rank, dtype=float)
    u = _orthonormal(rng, cfg.rows, rank)
    v = _orthonormal(rng, cfg.cols, rank)
    y = (u * spectrum) @ v.T
    if cfg.noise > 0:
        y = y + cfg.noise * rng.standard_normal(y.shape)
    return y, spectrum


def planted_sparse_direction(cfg: GeneratorConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Samples from ``N(0, I + strength · z zᵀ)`` with a sparse unit ``z``; returns ``(X, z)``.

    ``z`` has equal-magnitude entries of random sign on ``spike_support`` coordinates.
    """
    cfg = cfg or GeneratorConfig()
    rng = make_rng(cfg.seed, _STREAMS["covariance"])
    p = cfg.cols
    k = min(cfg.spike_support, p)
    support = np.sort(rng.choice(p, size=k, replace=False))
    z = np.zeros(p)
    z[support] = rng.choice([-1.0, 1.0], size=k) / np.sqrt(k)
    loadings = rng.standard_normal(cfg.samples) * np.sqrt(cfg.spike_strength)
    x = rng.standard_normal((cfg.samples, p)) + np.outer(loadings, z)
    return x, z


def non_negative_matrix(cfg: GeneratorConfig | None = None) -> np.ndarray:
    """``W Hᵀ`` with sparse non-negative ``W``, ``H`` plus clipped noise."""
    cfg = cfg or GeneratorConfig()
    rng = make_rng(cfg.seed, _STREAMS["nmf"])

    def factor(n: int) -> np.ndarray:
        values = rng.exponential(1.0, size=(n, cfg.rank))
        keep = rng.random((n, cfg.rank)) < cfg.factor_sparsity
        # every term needs at least one nonzero entry
        keep[rng.integers(0, n, size=cfg.rank), np.arange(cfg.rank)] = True
        return values * keep

    y = factor(cfg.rows) @ factor(cfg.cols).T
    if cfg.noise > 0:
        y = np.maximum(y + cfg.noise * rng.standard_normal(y.shape), 0.0)
    return y


def rating_triples(cfg: GeneratorConfig | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Observed entries of a low-rank matrix rescaled to the rating range.

    Returns 0-indexed ``(rows, cols, ratings)`` sorted row-major. The last row and column are
    always observed so the file determines the full matrix shape.
    """
    cfg = cfg or GeneratorConfig()
    rng = make_rng(cfg.seed, _STREAMS["ratings"])
    y, _ = low_rank_matrix(replace(cfg, noise=0.0))
    low, high = float(y.min()), float(y.max())
    scale = (high - low) or 1.0
    scaled = cfg.rating_min + (y - low) / scale * (cfg.rating_max - cfg.rating_min)
    if cfg.noise > 0:
        scaled = scaled + cfg.noise * rng.standard_normal(scaled.shape)
    ratings = np.clip(np.round(scaled * 2.0) / 2.0, cfg.rating_min, cfg.rating_max)

    observed = rng.random(y.shape) < cfg.observed_fraction
    observed[-1, -1] = True
    rows, cols = np.nonzero(observed)
    return rows.astype(np.int64), cols.astype(np.int64), ratings[rows, cols]


def incoherent_dictionary(cfg: GeneratorConfig | None = None) -> np.ndarray:
    """Unit-norm atoms (rows): an orthonormal basis perturbed by ``dictionary_perturbation``.

    Atoms beyond the ambient dimension ``cols`` are random unit vectors.
    """
    cfg = cfg or GeneratorConfig()
    rng = make_rng(cfg.seed, _STREAMS["dictionary"])
    d = cfg.cols
    n = cfg.dictionary_atoms
    base = _orthonormal(rng, d, min(n, d)).T
    if n > d:
        extra = rng.standard_normal((n - d, d))
        base = np.vstack([base, extra / np.linalg.norm(extra, axis=1, keepdims=True)])
    atoms = base + cfg.dictionary_perturbation * rng.standard_normal(base.shape)
    return atoms / np.linalg.norm(atoms, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------


def write_dense_csv(matrix: np.ndarray, path: Path) -> Path:
    """Dense CSV with a ``c0,c1,…`` header row."""
    table = pa.table({f"c{j}": pa.array(matrix[:, j], type=pa.float64()) for j in range(matrix.shape[1])})
    return write_csv_table(table, path)


def write_matrix_market(matrix: np.ndarray | sp.spmatrix, path: Path) -> Path:
    """MatrixMarket file; sparse inputs are written in coordinate format."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        scipy.io.mmwrite(fh, matrix)
    return path


def write_ratings(rows: np.ndarray, cols: np.ndarray, ratings: np.ndarray, path: Path) -> Path:
    """``user::item::rating`` lines with 1-indexed ids."""
    lines = [f"{r + 1}::{c + 1}::{v:g}" for r, c, v in zip(rows, cols, ratings)]
    return atomic_write_text(path, "\n".join(lines) + "\n")


def generate(kinds: tuple[str, ...], cfg: GeneratorConfig, output_dir: Path) -> dict[str, list[Path]]:
    """Write the requested problem kinds into ``output_dir``; returns paths per kind."""
    written: dict[str, list[Path]] = {}
    if "lowrank" in kinds:
        y, _ = low_rank_matrix(cfg)
        written["lowrank"] = [
            write_dense_csv(y, output_dir / "lowrank.csv"),
            write_matrix_market(y, output_dir / "lowrank.mtx"),
        ]
    if "covariance" in kinds:
        x, _ = planted_sparse_direction(cfg)
        written["covariance"] = [write_dense_csv(x, output_dir / "spiked_samples.csv")]
    if "nmf" in kinds:
        written["nmf"] = [write_dense_csv(non_negative_matrix(cfg), output_dir / "nonnegative.csv")]
    if "ratings" in kinds:
        rows, cols, ratings = rating_triples(cfg)
        coo = sp.coo_matrix((ratings, (rows, cols)), shape=(cfg.rows, cfg.cols))
        written["ratings"] = [
            write_ratings(rows, cols, ratings, output_dir / "ratings.dat"),
            write_matrix_market(coo, output_dir / "ratings.mtx"),
        ]
    if "dictionary" in kinds:
        written["dictionary"] = [
            write_dense_csv(incoherent_dictionary(cfg), output_dir / "dictionary.csv"),
        ]
    return written


# ---------------------------------------------------------------------------
# CLI entry point
# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> None:
    _defaults = GeneratorConfig()

    parser = argparse.ArgumentParser(description="Generate synthetic structured pursuit problems.")
    parser.add_argument("--output", "-o", default="./data", help="Output directory (default: ./data)")
    parser.add_argument("--kind", "-k", choices=[*KINDS, "all"], default="all",
                        help="Problem kind to generate (default: all)")
    parser.add_argument("--rows", type=int, default=_defaults.rows,
                        help=f"Matrix rows (default: {_defaults.rows})")
    parser.add_argument("--cols", type=int, default=_defaults.cols,
                        help=f"Matrix columns / covariance dimension (default: {_defaults.cols})")
    parser.add_argument("--rank", type=int, default=_defaults.rank,
                        help=f"Planted rank (default: {_defaults.rank})")
    parser.add_argument("--decay", type=float, default=_defaults.decay,
                        help=f"Spectrum ratio (default: {_defaults.decay})")
    parser.add_argument("--noise", type=float, default=_defaults.noise,
                        help=f"Noise standard deviation (default: {_defaults.noise})")
    parser.add_argument("--observed", type=float, default=_defaults.observed_fraction,
                        help=f"Observed fraction for ratings (default: {_defaults.observed_fraction})")
    parser.add_argument("--atoms", type=int, default=_defaults.dictionary_atoms,
                        help=f"Dictionary size (default: {_defaults.dictionary_atoms})")
    parser.add_argument("--seed", type=int, default=_defaults.seed,
                        help=f"Random seed (default: {_defaults.seed})")
    parser.add_argument("--noiseless", action="store_true", help="Exact low-rank targets")
    args = parser.parse_args(argv)

    if args.rows < 1 or args.cols < 1 or args.rank < 1:
        parser.error("--rows, --cols and --rank must be positive")
    if not 0.0 < args.observed <= 1.0:
        parser.error("--observed must be in (0, 1]")

    cfg = replace(
        _defaults,
        rows=args.rows,
        cols=args.cols,
        rank=args.rank,
        decay=args.decay,
        noise=0.0 if args.noiseless else args.noise,
        observed_fraction=args.observed,
        dictionary_atoms=args.atoms,
        seed=args.seed,
    )
    kinds = KINDS if args.kind == "all" else (args.kind,)
    output_dir = Path(args.output)

    print("Generating synthetic problems...")
    print(f"  Matrix:  {cfg.rows} x {cfg.cols}, rank {cfg.rank}, decay {cfg.decay}")
    print(f"  Noise:   {cfg.noise}")
    print()
    written = generate(kinds, cfg, output_dir)
    print(f"Wrote files to {output_dir}/")
    for kind, paths in written.items():
        for path in paths:
            print(f"  {path.name} ({kind})")
    print()
    print("Done!")


if __name__ == "__main__":
    main()
