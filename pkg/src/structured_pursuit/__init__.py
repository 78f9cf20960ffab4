"""Structured pursuit — greedy structured low-rank matrix factorization and completion."""

__version__ = "0.1.0"

# Atoms are unit vectors; construction and validation use these tolerances.
ATOM_NORM_TOLERANCE = 1e-12
VALIDATION_TOLERANCE = 1e-10

# Gram matrices with a condition number above this are solved in the minimum-norm
# least-squares sense and the iteration is flagged as rank deficient.
GRAM_CONDITION_LIMIT = 1e12

# A corrected atom is kept only if it lowers the refit cost by at least this much.
CORRECTION_MARGIN = 1e-12

# Selection values at or below this (relative to 1 + ||Y||) mean the residual is optimal.
OPTIMALITY_THRESHOLD = 1e-14

# Residual matrices with a Frobenius norm below this cannot produce an atom.
LMO_ZERO_NORM = 1e-14

# Problems with more entries than this keep only the observed coordinates in memory.
DENSE_ENTRY_LIMIT = 4096 * 4096

# Relative asymmetry tolerated by the symmetric power method.
SYMMETRY_TOLERANCE = 1e-10
