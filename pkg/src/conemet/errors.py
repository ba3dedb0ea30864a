"""Exception hierarchy shared by all conemet modules."""


class ConemetError(Exception):
    """Base class for all errors raised by this package."""


# --- exact arithmetic / bundle layer ---

class AngleOutOfRange(ConemetError):
    """A cone-angle parameter lies outside the open interval (0, 1)."""


class InvalidConfiguration(ConemetError):
    """Marked-point configuration violates its invariants."""


class FlagDegenerate(ConemetError):
    """A flag line meets the degree n-1 summand, so it cannot be normalized."""

    def __init__(self, index, msg=None):
        self.index = index
        super().__init__(msg or f"flag line {index} lies in the O(n-1) summand")


class FlagContainedInLine(ConemetError):
    """All flag lines lie on a single degree-1 subbundle."""


class InvalidSubbundle(ConemetError):
    """The defining sections of a line subbundle have a common zero."""


class InconsistentDegree(ConemetError):
    """Subbundle data incompatible with the claimed degree."""


class ParityMismatch(ConemetError):
    """Degree and section self-intersection have incompatible parity."""


# --- ODE transport layer ---

class SingularConstraintSystem(ConemetError):
    """The linear system for the accessory parameters is singular."""


class EvaluationAtPole(ConemetError):
    """Attempted to evaluate the coefficient Q at one of its poles."""


class PathTooClose(ConemetError):
    """A transport path runs below the minimum pole clearance."""


class ToleranceNotMet(ConemetError):
    """Adaptive step control underflowed before reaching the target accuracy."""


# --- unitarization / metric layer ---

class NoConvergence(ConemetError):
    """Hermitian-form descent hit its iteration cap with a large gradient."""


class NotUnitarizable(ConemetError):
    """No accessory parameters reached the acceptance defect."""


class StencilTooCloseToPole(ConemetError):
    """A curvature stencil point violates its pole clearance."""


class QuadratureNotConverged(ConemetError):
    """Area quadrature failed its refinement tolerance."""


class ParseError(ConemetError):
    """Malformed job configuration input."""
