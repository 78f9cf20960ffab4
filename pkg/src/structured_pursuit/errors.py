"""Exception types raised by the pursuit library and its command surfaces."""

from __future__ import annotations


class PursuitError(Exception):
    """Base class for all library errors."""


class DegenerateDirectionError(PursuitError, ValueError):
    """A linear maximization was asked for a direction with no usable entries."""


class LmoFailureError(PursuitError, RuntimeError):
    """Every restart of the linear maximization oracle degenerated.

    Signals that the residual is numerically zero relative to the atom set.
    """


class UsageError(PursuitError, ValueError):
    """Inconsistent or out-of-range command options."""


class InputParseError(PursuitError, ValueError):
    """An input file could not be read or parsed."""


class NumericalFailureError(PursuitError, RuntimeError):
    """A command could not produce a single atom (LMO failure at the first iteration)."""
