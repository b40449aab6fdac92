"""Exception types shared across the package.

Every error that certifies a mathematical failure (as opposed to malformed
input) carries enough indices to localize the offending identity.
"""


class TropglueError(Exception):
    """Base class for all package errors."""


class TorsionQuotient(TropglueError):
    """The quotient lattice has torsion, so no integral projection/section pair exists."""


class DimensionMismatch(TropglueError):
    """Vectors or matrices with incompatible shapes were combined."""


class NotFullDimensional(TropglueError):
    """The vertex set does not affinely span the ambient space."""


class OriginNotInterior(TropglueError):
    """The origin is not an interior point of the polytope."""


class IndexMismatch(TropglueError):
    """Index sets of combinatorial data disagree with the base poset."""


class MissingSlope(TropglueError):
    """A required (lift, maximal lift) slope entry is absent."""


class NotACone(TropglueError):
    """The referenced cone is not part of the complex."""


class ExponentClash(TropglueError):
    """A monomial-matrix product left two distinct exponents in one entry."""


class NotACocycle(TropglueError):
    """A multiplicative chain table violates its cocycle condition."""


class WellDefinednessFailure(TropglueError):
    """Two admissible evaluation choices for the same flag disagree."""


class NotClosed(TropglueError):
    """The cochain handed to the coboundary solver is not closed."""


class SingularFrame(TropglueError):
    """A change-of-frame matrix is not invertible."""


class CocycleFailure(TropglueError):
    """A triple-overlap transition identity failed after all upstream checks passed."""


class NotEquivariant(TropglueError):
    """No character shift makes the summand embedding weight-compatible."""


class NoAdmissiblePreimage(TropglueError):
    """No preimage choice satisfies the slope-matching constraints."""


class SearchBudgetExceeded(TropglueError):
    """The bounded equivalence search ran out of budget."""

    def __init__(self, message: str, budget: int):
        super().__init__(message)
        self.budget = budget


class SchemaError(TropglueError):
    """A scenario or descriptor file violates the schema."""


class DanglingReference(TropglueError):
    """A scenario field references an undeclared name."""
