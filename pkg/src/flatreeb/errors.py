"""Exception hierarchy.

Every failure mode the toolkit reports is a subclass of :class:`FlatReebError`
so that the command line front end can serialize it uniformly.
"""

from __future__ import annotations


class FlatReebError(Exception):
    """Base class for all toolkit errors."""

    code = "error"


# circle maps
class AmbiguousLift(FlatReebError):
    code = "ambiguous_lift"


class DegreeMismatch(FlatReebError):
    code = "degree_mismatch"


class DegenerateCritical(FlatReebError):
    code = "degenerate_critical"


# criterion
class ZeroDegree(FlatReebError):
    code = "zero_degree"


class Borderline(FlatReebError):
    """The drawdown is within tolerance of pi; the verdict cannot be certified."""

    code = "borderline"

    def __init__(self, message: str, decision=None):
        super().__init__(message)
        self.decision = decision


# synthesis
class InfeasibleIntervals(FlatReebError):
    code = "infeasible_intervals"


class TubeViolation(FlatReebError):
    code = "tube_violation"


class MaxBias(FlatReebError):
    code = "max_bias"


class NotEquivariant(FlatReebError):
    code = "not_equivariant"


# solver
class TanOverflow(FlatReebError):
    code = "tan_overflow"


class QuadratureMismatch(FlatReebError):
    code = "quadrature_mismatch"


class BadBracket(FlatReebError):
    code = "bad_bracket"


class NoConvergence(FlatReebError):
    code = "no_convergence"


class CriterionFailed(FlatReebError):
    code = "criterion_failed"

    def __init__(self, message: str, decision=None):
        super().__init__(message)
        self.decision = decision


# forms
class PreconditionFailed(FlatReebError):
    code = "precondition_failed"


# diffeomorphisms
class ZeroFrequency(FlatReebError):
    code = "zero_frequency"


# open models
class EpsilonTooLarge(FlatReebError):
    code = "epsilon_too_large"


class AnchorViolation(FlatReebError):
    code = "anchor_violation"


# expression parser
class ParseError(FlatReebError):
    code = "parse_error"

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class NonIntegerDegree(ParseError):
    code = "non_integer_degree"


class NonPeriodic(ParseError):
    code = "non_periodic"
