"""Limit parameters and branch points of the varying-parameter problem."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from mpmath import mp, mpc, mpf

from .errors import ParameterError

# parameters closer than this to the boundary of the admissible region are
# accepted but numerically delicate (our choice; the boundary itself is
# excluded)
DEGENERACY_MARGIN = 1e-6


@dataclass(frozen=True)
class ParameterPair:
    """The limits (A, B) with -1 < A < 0, -1 < B < 0, -2 < A+B < -1.

    Values are stored as mpf at the precision active at construction time.
    Construction rejects anything outside the open region and warns when the
    pair sits within ``DEGENERACY_MARGIN`` of its boundary.
    """

    A: mpf
    B: mpf

    def __post_init__(self):
        A = mpf(self.A)
        B = mpf(self.B)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        if not (-1 < A < 0 and -1 < B < 0 and -2 < A + B < -1):
            raise ParameterError(
                f"(A, B) = ({A}, {B}) outside -1<A<0, -1<B<0, -2<A+B<-1"
            )
        margin = min(A + 1, -A, B + 1, -B, A + B + 2, -1 - (A + B))
        if margin < DEGENERACY_MARGIN:
            warnings.warn(
                "parameters within %.1e of the admissible boundary; "
                "results may be ill-conditioned" % DEGENERACY_MARGIN,
                stacklevel=2,
            )

    @property
    def total(self) -> mpf:
        return self.A + self.B

    @property
    def mass_scale(self) -> mpf:
        """A + B + 2, the prefactor of every contour integral here."""
        return self.A + self.B + 2


@dataclass(frozen=True)
class BranchPoints:
    """Conjugate pair of simple branch points, upper one first."""

    zeta_plus: mpc
    zeta_minus: mpc

    def __post_init__(self):
        if not self.zeta_plus.imag > 0:
            raise ParameterError("upper branch point must have Im > 0")

    @property
    def center(self) -> mpf:
        """Common real part of the branch points."""
        return self.zeta_plus.real

    @property
    def height(self) -> mpf:
        """Imaginary part of the upper branch point."""
        return self.zeta_plus.imag

    @property
    def scale(self) -> mpf:
        """Distance between the branch points; the geometric length unit."""
        return abs(self.zeta_plus - self.zeta_minus)


def branch_points(params: ParameterPair) -> BranchPoints:
    """Branch points (B^2-A^2 +- 4i sqrt((A+1)(B+1)(-A-B-1))) / (A+B+2)^2.

    All three factors under the root are positive on the admissible region,
    so the pair is a genuine complex-conjugate pair off the real axis.
    """
    A, B = params.A, params.B
    denom = (A + B + 2) ** 2
    re = (B * B - A * A) / denom
    im = 4 * mp.sqrt((A + 1) * (B + 1) * (-A - B - 1)) / denom
    return BranchPoints(mpc(re, im), mpc(re, -im))
