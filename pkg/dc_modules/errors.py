"""
Exception hierarchy for dcforge.

Every failure a dc operation can report is a DcForgeError subclass so the CLI
can turn it into a report entry instead of a traceback.
"""


class DcForgeError(Exception):
    """Base class for all dcforge errors."""


class InputFormatError(DcForgeError):
    """A problem file or spec string could not be parsed."""


class DomainError(DcForgeError):
    """Point outside a domain, mismatched domains, or a singular log argument."""


class UnboundedAuxiliary(DcForgeError):
    """An envelope scan found the auxiliary objective unbounded (supremum not attained)."""


class UnboundedDomainError(DcForgeError):
    """An operation needing finite infima was given an unbounded domain."""


class ArgumentError(DcForgeError):
    """Invalid argument value (alpha out of range, empty list, negative lambda...)."""


class CertificationError(DcForgeError):
    """A sampled convexity or monotonicity certificate failed."""


class ScaleError(DcForgeError):
    """Problem exceeds the enumeration caps."""


class EmptyPolyhedron(DcForgeError):
    """The polyhedron has no feasible point."""


class NotInDomain(DcForgeError):
    """(q, b) lies outside dom(Q, D)."""


class NotPositiveDefinite(DcForgeError):
    """Q is not positive definite."""


class RegionNotInDomain(DcForgeError):
    """A sampled point of the requested region lies outside dom(Q, D)."""


class PieceNotQuadratic(DcForgeError):
    """The value function is not a quadratic selection on the region."""


class FailedCopositivity(DcForgeError):
    """Q is not copositive on the recession cone of D."""


class EmptyRegion(DcForgeError):
    """A piece region is empty."""


class NonConvexUnion(DcForgeError):
    """The union of the piece regions failed the sampled convexity test."""


class NotDcError(DcForgeError):
    """The folded function has an infinite right derivative at zero."""
