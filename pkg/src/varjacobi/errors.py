"""Exception types shared across the package."""


class VarJacobiError(Exception):
    """Base class for all package errors."""


class ParameterError(VarJacobiError):
    """Limit parameters violate the admissible open region."""


class CutAmbiguity(VarJacobiError):
    """Point is too close to the central branch cut to pick a side."""


class NotOnCut(VarJacobiError):
    """Boundary value requested at a point that is not on the cut."""


class NotOnArc(VarJacobiError):
    """Density requested at a point that is not on a traced arc."""


class TraceDiverged(VarJacobiError):
    """Arc tracing left the bounding box or exceeded the step budget."""


class DegenerateLevel(VarJacobiError):
    """Level value too close to critical; contour would graze a branch point."""


class QuadNoConverge(VarJacobiError):
    """Adaptive quadrature could not reach the requested tolerance."""


class PathIntersectsCut(VarJacobiError):
    """An integration path crosses a forbidden cut."""


class OnCut(VarJacobiError):
    """Evaluation point lies on a cut of the requested function."""


class DegreeReduction(VarJacobiError):
    """Polynomial degree drops because alpha+beta = -n-k-1 for some k < n.

    Carries ``k`` and the exact relation to the lower-degree polynomial:
    ``p_n = factor * p_k`` with ``factor`` a rational number.
    """

    def __init__(self, k, factor, reduced):
        self.k = k
        self.factor = factor
        self.reduced = reduced
        super().__init__(f"degree reduction to k={k}")


class NoConverge(VarJacobiError):
    """Root finder stagnated after exhausting the precision ladder."""


class ConditionViolated(VarJacobiError):
    """Orthogonality characterization requires -n-a-b, n+a, n+b not in N."""


class IdentityViolated(VarJacobiError):
    """An exact polynomial identity failed; indicates an implementation bug."""


class IntegerResonance(VarJacobiError):
    """(A+B)n is within 1e-12 of an integer; monic normalization fails."""


class NearBranchPoint(VarJacobiError):
    """Outer formula requested inside the branch-point exclusion disk."""


class OutsideConformalRadius(VarJacobiError):
    """Local Airy formula requested outside the validated disk."""


class PrecisionUnreachable(VarJacobiError):
    """Special-function backend could not deliver the requested precision."""


class ExactInteger(VarJacobiError):
    """A rate exponent is infinite because the distance to Z is exactly 0."""


class InconsistentExponents(VarJacobiError):
    """Rate exponents violate the two-smallest-equal structure."""
