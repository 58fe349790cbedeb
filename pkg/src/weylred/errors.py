"""Exception hierarchy shared by all weylred modules."""


class WeylredError(Exception):
    """Base class for every error raised by this package."""


class ParseError(WeylredError):
    def __init__(self, message, line=1, column=0, expected=()):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.expected = tuple(expected)


class ZeroOperator(WeylredError):
    """An operation that requires a nonzero operator received zero."""


class CollapsedToFunction(WeylredError):
    """A transform produced an operator of order 0 (a plain function)."""


class NonSemiSimple(WeylredError):
    """Logarithm-bearing local solutions: the exponent chains fail the
    semi-simplicity conditions."""


class NonSplitting(WeylredError):
    """A characteristic or edge polynomial has roots outside Q(parameters)
    (ramified or irrational exponential part)."""


class NotRegularPoint(WeylredError):
    """The operator is not of regular type at the requested point."""


class SlopeOutOfRange(WeylredError):
    """The Newton polygon has an edge of slope greater than 2."""


class ResonantRecurrence(WeylredError):
    """The Frobenius recurrence divides by zero at a resonant index."""


class BlockCollision(WeylredError):
    """Two exponent blocks at one point became integer-separated."""


class Degenerate(WeylredError):
    """A block-targeted Euler transform is not well-defined (both order
    margins vanish); the terminal collapse must be used instead."""


class NoZeroClass(WeylredError):
    """The table has no exponential class with alpha = 0."""


class IndexMismatch(WeylredError):
    """Two lattice vectors live over different index sets."""


class NotRigid(WeylredError):
    """The rigidity index is non-positive; carries the imaginary-root
    certificate produced by the lattice descent."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class CrossValidationFailure(WeylredError):
    """A symbolic result disagrees with the combinatorial prediction."""


class RoundTripFailure(WeylredError):
    """An inverted script failed to reproduce the original operator."""


class ParameterClash(WeylredError):
    """A versal addition requested parameter names already in use."""


class PoleAtLimit(WeylredError):
    """A coefficient denominator vanishes at the substitution point."""
