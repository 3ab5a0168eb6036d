"""Exception types shared across the package.

Every error that a public operation can raise lives here so that the CLI can
map them onto stable exit codes (config errors -> 2, budget errors -> 3,
everything else that signals a failed check -> 1).
"""


class PrimcensusError(Exception):
    """Base class for all package errors."""


class ConfigInvalid(PrimcensusError):
    """Configuration file failed schema or consistency validation."""


# -- number field loading / arithmetic ---------------------------------------

class ReducedPolynomial(ConfigInvalid):
    """Declared minimal polynomial is reducible (or not squarefree/monic)."""


class SignatureMismatch(ConfigInvalid):
    """Configured signature disagrees with the isolated roots."""


class DiscriminantMismatch(ConfigInvalid):
    """Discriminant of the integral basis differs from the configured value."""


class UnitLatticeMismatch(ConfigInvalid):
    """Fundamental units fail the rank or covolume validation."""


class UnitRankMismatch(ConfigInvalid):
    """Number of fundamental units differs from r + s - 1."""


class NotASubfield(PrimcensusError):
    """Named base field is not configured as a subfield."""


class ZeroVector(PrimcensusError):
    """Operation requires at least one nonzero coordinate."""


class PrecisionUnreachable(PrimcensusError):
    """Root refinement stalled before reaching the requested radius."""


class PrecisionStall(PrimcensusError):
    """Interval refinement could not separate a value from a threshold."""


# -- lattices -----------------------------------------------------------------

class DimensionTooLarge(PrimcensusError):
    """Rank exceeds the exact-enumeration cap."""


class EnumerationBudgetExceeded(PrimcensusError):
    """Sphere enumeration visited more vectors than the configured budget."""


class WitnessNotInLattice(PrimcensusError):
    """A claimed minima witness is not a lattice member."""


class NotLatticeMember(PrimcensusError):
    """Vector is not in the lattice."""


# -- charts / counting --------------------------------------------------------

class BadParams(PrimcensusError):
    """Chart parameters are dimensionally inconsistent."""


class DomainMismatch(PrimcensusError):
    """Chart combinator arguments have incompatible domains."""


class BadQ(PrimcensusError):
    """Subdivision count Q must be a positive integer."""


class NotANorm(PrimcensusError):
    """Sampled triangle inequality failed for a claimed norm."""


class UndecidableMembership(PrimcensusError):
    """Membership oracle could not resolve a point (interval straddle)."""


class BudgetExceeded(PrimcensusError):
    """Generic work budget exceeded."""


class ChartsUnavailable(PrimcensusError):
    """Distance function carries no boundary charts."""


class BadIndex(PrimcensusError):
    """Partition index out of range."""


# -- heights / census ----------------------------------------------------------

class UnsupportedSpec(PrimcensusError):
    """Unknown adelic system kind."""


class QuotientTooLarge(PrimcensusError):
    """Sandwich quotient has too many cosets to enumerate."""


class NonIntegralExponent(PrimcensusError):
    """Finite-place lower constant is not in the value group."""


class ZetaUnavailable(PrimcensusError):
    """No zeta value available for this field/argument."""


class GridTooSmall(PrimcensusError):
    """Asymptotic fit requires more grid points."""


class TruncationInsufficient(PrimcensusError):
    """Divisor-sum truncation dropped a provably nonzero term."""


class NothingFound(PrimcensusError):
    """Search region contained no admissible element."""


class ConsistencyError(PrimcensusError):
    """An internal cross-check failed (signals an enumeration bug)."""
