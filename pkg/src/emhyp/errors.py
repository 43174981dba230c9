"""Exception hierarchy shared by all emhyp modules."""


class EmhypError(Exception):
    """Base class for all errors raised by this package."""


# --- numeric core ---------------------------------------------------------

class PoleAtNonpositiveInteger(EmhypError):
    """Gamma evaluated at (or too close to) a nonpositive integer."""


class BranchCutHit(EmhypError):
    """log-gamma requested on the branch cut (-inf, 0]."""


class RankDeficient(EmhypError):
    """Matrix does not have full expected rank."""


class DegenerateConfiguration(EmhypError):
    """Point configuration spans a lower-dimensional space than required."""


class IntegerOverflow(EmhypError):
    """An entry could not be represented exactly as an integer."""


# --- laurent --------------------------------------------------------------

class NotAFaceOffset(EmhypError):
    """The supplied offset is not the minimum of <mu, alpha> over the support."""


class ZeroOnPath(EmhypError):
    """A factor vanished (within tolerance) along a branch-tracking path."""


class TermBlowup(EmhypError):
    """A polynomial product exceeded the term-count guard."""


# --- polytope -------------------------------------------------------------

class EmptySupport(EmhypError):
    """Operation requires a nonempty support set."""


# --- coamoeba -------------------------------------------------------------

class NumericallyCoincidentRoots(EmhypError):
    """Two root arguments are too close to separate reliably."""


class ResolutionTooCoarse(EmhypError):
    """A raster component is thinner than the reliability threshold."""


class Inconclusive(EmhypError):
    """A membership decision fell within the boundary tolerance."""


class OnBoundary(EmhypError):
    """A principal-argument input was within tolerance of +/- pi."""


# --- emquad ---------------------------------------------------------------

class NotInConvergenceDomain(EmhypError):
    """(s, t) violates the convergence conditions for direct quadrature."""


class BranchTrackingFailed(EmhypError):
    """Could not maintain a continuous logarithm branch on the grid."""


class ToleranceNotReached(EmhypError):
    """Adaptive refinement exhausted its budget before reaching tolerance."""


class SingularT(EmhypError):
    """The simplex exponent matrix is singular."""


class GammaPole(EmhypError):
    """A closed-form gamma factor sits on a pole."""


class ConvergenceConditionViolated(EmhypError):
    """Mellin-Barnes convergence condition fails (point not in the zonotope)."""


class PoleOnContour(EmhypError):
    """A gamma factor of the Mellin-Barnes integrand has a pole on the contour."""


# --- continuation ---------------------------------------------------------

class NotFullDimensional(EmhypError):
    """Continuation requires a full-dimensional Newton polytope."""


class TermBudgetExceeded(EmhypError):
    """Continuation expression grew past the term budget."""


class PoleHit(EmhypError):
    """A denominator of the continuation expression vanished at (s, t)."""


class TermIntegralDiverged(EmhypError):
    """A shifted integral was requested outside its convergence domain."""


class LimitUnstable(EmhypError):
    """Richardson extrapolation of a pole limit did not stabilize."""


# --- gkz ------------------------------------------------------------------

class DerivativeUnstable(EmhypError):
    """Cauchy-integral differentiation produced unstable values."""


class NoNonsingularBlock(EmhypError):
    """The Cayley matrix cannot be permuted into the dual-construction form."""


class LopsidedMembership(EmhypError):
    """theta lies inside the closure of the lopsided coamoeba."""


# --- cli ------------------------------------------------------------------

class SchemaError(EmhypError):
    """A problem file failed schema validation."""
