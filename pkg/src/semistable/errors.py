"""Exception types shared across the package."""


class SemistableError(Exception):
    """Base class for all errors raised by this package."""


class NegativeValuation(SemistableError):
    """A rational outside the valuation ring was fed to a ring-level map."""


class EnumerationTooLarge(SemistableError):
    """A brute-force enumeration would exceed the configured cap."""


class UniquenessViolation(SemistableError):
    """Two distinct subspaces attain the maximal (slope, dimension) pair.

    This would falsify the uniqueness assumption behind the destabilizer
    search; the offending instance is included in the message so it can be
    reported.
    """


class NotContained(SemistableError):
    """A subspace argument is not contained in the ambient space."""


class ZeroDimensional(SemistableError):
    """Slope of the zero space was requested."""


class RankDeficient(SemistableError):
    """Generators do not define a free direct summand (flat quotient fails)."""


class NotSaturated(SemistableError):
    """A submodule required to be saturated has torsion quotient."""


class GenericUnstable(SemistableError):
    """The lift order is unbounded, which signals an unstable generic fiber."""


class IterationCapExceeded(SemistableError):
    """The modification loop did not terminate within the iteration cap."""


class ParseError(SemistableError):
    """An input file failed to parse; the message names the offending token."""
