"""Shared enums and exception classes."""

from __future__ import annotations

import enum


class Field(str, enum.Enum):
    REAL = "real"
    COMPLEX = "complex"


class Measure(str, enum.Enum):
    """How l_p sums are weighted.

    ``COUNTING`` is the plain sum, ``NORMALIZED`` divides the sum by N
    before taking the 1/p power (uniform probability on the coordinates).
    """

    COUNTING = "counting"
    NORMALIZED = "normalized"


class Kind(str, enum.Enum):
    """Certification status of a computed norm-type value."""

    EXACT = "exact"
    LOWER_BOUND = "heuristic_lower_bound"
    UPPER_BOUND = "heuristic_upper_bound"


class DomainError(ValueError):
    """Argument outside the domain of a formula."""


class CapExceededError(RuntimeError):
    """Exact enumeration refused because the instance is larger than the cap."""


class RankDeficiencyError(ValueError):
    pass


class TheoremViolation(AssertionError):
    """A proven inequality failed on an exactly computed quantity.

    This can only mean a bug in the implementation.
    """


def as_field(value) -> Field:
    return value if isinstance(value, Field) else Field(str(value).lower())


def as_measure(value) -> Measure:
    return value if isinstance(value, Measure) else Measure(str(value).lower())
