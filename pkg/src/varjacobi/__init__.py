"""Asymptotic machinery for Jacobi polynomials with varying negative
parameters: trajectory geometry, phase function, exact reference oracle,
outer/Airy asymptotics, and the limiting zero distribution."""

from .asymptotics import (
    AiryValue,
    LocalFrame,
    OuterTerms,
    airy_base,
    airy_combination,
    fractional_prefactor,
    local_eval,
    local_eval_upper,
    model_entries,
    model_entries_alt,
    outer_eval,
    quarter_ratio,
    sine_ratios,
)
from .geometry import (
    Arc,
    ArcKind,
    Domain,
    Geometry,
    LevelComponent,
    Omega,
    RegionLabel,
    trace_critical_trajectories,
    trace_orthogonal_trajectories,
)
from .params import BranchPoints, ParameterPair, branch_points
from .phase import Phase, PhasePlan, PhaseValue, constant_c, quad_contour
from .reference import (
    OrthogonalityResult,
    RationalPoly,
    ZeroSet,
    build_jacobi,
    eval_poly,
    find_zeros,
    identity_suite,
    orthogonality_check,
)
from .zerodist import (
    ArcMasses,
    AttractorCase,
    AttractorPrediction,
    RateExponents,
    ZeroComparison,
    arc_masses,
    compare_zeros,
    mu_density,
    predict_attractor,
    rate_exponents,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
