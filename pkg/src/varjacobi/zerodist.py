"""Limiting zero-counting measure: density, masses, attractor prediction.

The density against arclength is |A+B+2|/(2 pi) |R(z)/(z^2-1)| on every arc
that carries zeros.  Which arcs those are is decided by the rate exponents
measuring how fast the parameters approach integers: all equal selects the
full critical set with the equilibrium density; otherwise part of the mass
migrates to one displaced level contour.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np
from gmpy2 import mpq
from mpmath import mp, mpf

from .errors import (
    CutAmbiguity,
    ExactInteger,
    InconsistentExponents,
    NotOnArc,
    NotOnCut,
)
from .geometry import Arc, ArcKind, Geometry, LevelComponent
from .numutil import point_polyline_distance, project_to_polyline, to_float, to_mpc
from .params import ParameterPair
from .reference import ZeroSet, _as_mpq


def mu_density(z, geom: Geometry) -> mpf:
    """Arclength density of the limit measure at a point of a critical arc."""
    zf = to_float(z)
    hit = None
    for kind in (ArcKind.LEFT, ArcKind.CENTER, ArcKind.RIGHT):
        if point_polyline_distance(zf, geom.arcs[kind].floats) < 0.05 * float(geom.step):
            hit = kind
            break
    if hit is None:
        raise NotOnArc(f"{zf} is not on a traced critical arc")
    return _density_value(z, geom)


def _density_value(z, geom: Geometry) -> mpf:
    z = to_mpc(z)
    try:
        r = geom.cut_root(z)
    except CutAmbiguity:
        r = geom.cut_root_boundary(z, "+")
    return abs(geom.params.mass_scale / (2 * mp.pi) * r / (z * z - 1))


@dataclass(frozen=True)
class ArcMasses:
    closed: tuple  # (left, center, right) closed forms
    quadrature: tuple  # same, integrated along the traced arcs


def arc_masses(params: ParameterPair, geom: Geometry | None = None) -> ArcMasses:
    """(1+A, -1-A-B, 1+B) plus the independently integrated values."""
    if geom is None:
        geom = Geometry(params)
    closed = (1 + params.A, -1 - params.A - params.B, 1 + params.B)
    with mp.workprec(geom.prec):
        quad = tuple(
            (params.mass_scale / (2j * mp.pi) * geom.arcs[k].raw_integral).real
            for k in (ArcKind.LEFT, ArcKind.CENTER, ArcKind.RIGHT)
        )
    return ArcMasses(closed, quad)


# ---------------------------------------------------------------------------
# rate exponents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateExponents:
    r_alpha: mpf
    r_beta: mpf
    r_alphabeta: mpf
    mode: str  # 'finite' or 'limit'
    n: int | None = None

    def tolerance(self) -> float:
        if self.mode == "limit":
            return 1e-12
        return max(0.02, 5.0 / self.n)


def _dist_to_int_exact(q: mpq) -> mpq:
    fl = q.numerator // q.denominator
    frac = q - fl
    return min(frac, 1 - frac)


def rate_exponents(alpha, beta, n: int) -> RateExponents:
    """Finite-n exponents -(1/n) log dist(., Z), exact rational distances."""
    if n < 1:
        raise ValueError("n must be positive")
    alpha = _as_mpq(alpha)
    beta = _as_mpq(beta)
    rs = []
    for q, name in ((alpha, "alpha"), (beta, "beta"), (alpha + beta, "alpha+beta")):
        d = _dist_to_int_exact(q)
        if d == 0:
            raise ExactInteger(f"{name} is exactly an integer; the exponent is infinite")
        with mp.workprec(96):
            rs.append(-(mp.log(mpf(d.numerator)) - mp.log(mpf(d.denominator))) / n)
    return RateExponents(rs[0], rs[1], rs[2], "finite", n)


class AttractorCase(Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"


@dataclass
class AttractorPrediction:
    case: AttractorCase
    arcs: list
    density: object  # callable z -> density against arclength
    r: float
    masses: list  # expected measure per arc, same order as arcs

    @property
    def total_mass(self) -> float:
        return float(sum(self.masses))


def predict_attractor(
    exponents: RateExponents,
    params: ParameterPair,
    geom: Geometry,
    mass_tol: float = 1e-6,
) -> AttractorPrediction:
    """Arc family and density predicted by the exponent pattern.

    The displaced level contours are traced on demand; their quadrature mass
    must reproduce the residue closed form to ``mass_tol`` or the prediction
    fails loudly (a silent renormalization would mask tracing bugs).
    """
    ra, rb, rab = exponents.r_alpha, exponents.r_beta, exponents.r_alphabeta
    band = exponents.tolerance()
    A, B = params.A, params.B

    def eq(x, y):
        return abs(x - y) <= band

    if eq(ra, rb) and eq(ra, rab) and eq(rb, rab):
        case = AttractorCase.A
        arcs = [geom.arcs[k] for k in (ArcKind.LEFT, ArcKind.CENTER, ArcKind.RIGHT)]
        masses = [1 + A, -1 - A - B, 1 + B]
        r = 0.0
    elif eq(ra, rb) and rab > max(ra, rb):
        case = AttractorCase.B
        r = float((rab - ra) / 2)
        level = geom.trace_level_set(r)
        arcs = [geom.arcs[ArcKind.CENTER]] + level
        masses = [-1 - A - B, 2 + A + B]
    elif eq(ra, rab) and rb > max(ra, rab):
        case = AttractorCase.C
        r = float((ra - rb) / 2)
        level = [a for a in geom.trace_level_set(r) if a.component is LevelComponent.NEAR_MINUS_ONE]
        arcs = [geom.arcs[ArcKind.RIGHT]] + level
        masses = [1 + B, -B]
    elif eq(rb, rab) and ra > max(rb, rab):
        case = AttractorCase.D
        r = float((rb - ra) / 2)
        level = [a for a in geom.trace_level_set(r) if a.component is LevelComponent.NEAR_PLUS_ONE]
        arcs = [geom.arcs[ArcKind.LEFT]] + level
        masses = [1 + A, -A]
    else:
        raise InconsistentExponents(
            f"no two smallest exponents agree within {band}: "
            f"{float(ra)}, {float(rb)}, {float(rab)}"
        )

    with mp.workprec(geom.prec):
        for arc, m in zip(arcs, masses):
            quad = (params.mass_scale / (2j * mp.pi) * arc.raw_integral).real
            if abs(quad - m) > mass_tol * (1 + abs(m)):
                raise ArithmeticError(
                    f"arc {arc.label()} mass {float(quad)} != closed form {float(m)}"
                )

    def density(z):
        return _density_value(z, geom)

    return AttractorPrediction(case, arcs, density, float(r), [float(m) for m in masses])


# ---------------------------------------------------------------------------
# comparison of empirical zeros against a prediction
# ---------------------------------------------------------------------------


@dataclass
class ZeroComparison:
    max_dist: float
    per_arc_counts: list
    per_arc_expected: list
    cdf_sup_dev: float
    distances: list
    assignments: list

    def to_json(self) -> str:
        return json.dumps(
            {
                "max_dist": self.max_dist,
                "per_arc_counts": self.per_arc_counts,
                "per_arc_expected": self.per_arc_expected,
                "cdf_sup_dev": self.cdf_sup_dev,
            },
            indent=1,
        )

    def to_table(self) -> str:
        lines = [
            f"{'arc':>6} {'count':>7} {'expected':>10}",
        ]
        for i, (c, e) in enumerate(zip(self.per_arc_counts, self.per_arc_expected)):
            lines.append(f"{i:>6} {c:>7} {e:>10.2f}")
        lines.append(f"max distance to attractor: {self.max_dist:.4f}")
        lines.append(f"sup CDF deviation: {self.cdf_sup_dev:.4f}")
        return "\n".join(lines)


def compare_zeros(zeros: ZeroSet, prediction: AttractorPrediction) -> ZeroComparison:
    """Quantitative comparison: distances, per-arc counts, CDF deviation."""
    pts = np.array([to_float(z) for z in zeros.zeros], dtype=np.complex128)
    n = len(pts)
    arcs = prediction.arcs
    polys = [a.floats for a in arcs]
    counts = [0] * len(arcs)
    dists = []
    assigns = []
    positions = []  # (arc index, arclength position)
    for z in pts:
        best_i, best_d, best_s = -1, float("inf"), 0.0
        for i, poly in enumerate(polys):
            d, s = project_to_polyline(z, poly)
            if d < best_d:
                best_i, best_d, best_s = i, d, s
        counts[best_i] += 1
        dists.append(best_d)
        assigns.append(best_i)
        positions.append((best_i, best_s))

    # predicted CDF along the concatenated arcs (trapezoid on the polylines)
    seg_cdfs = []
    total = 0.0
    for arc in arcs:
        poly = arc.floats
        dens = np.array(
            [float(_density_from(prediction, q)) for q in poly], dtype=float
        )
        seg = np.abs(np.diff(poly))
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * seg)])
        seg_cdfs.append(cum)
        total += cum[-1]
    offsets = np.cumsum([0.0] + [c[-1] for c in seg_cdfs[:-1]])

    pred_vals = []
    for i, s in positions:
        poly = arcs[i].floats
        arclen = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(poly)))])
        val = float(np.interp(s, arclen, seg_cdfs[i]))
        pred_vals.append((offsets[i] + val) / total)
    pred_vals = np.sort(np.array(pred_vals))
    emp = np.arange(1, n + 1) / n
    sup = float(np.max(np.maximum(np.abs(emp - pred_vals), np.abs(emp - 1.0 / n - pred_vals))))

    expected = [n * m / prediction.total_mass for m in prediction.masses]
    return ZeroComparison(
        max_dist=float(max(dists)) if dists else 0.0,
        per_arc_counts=counts,
        per_arc_expected=[float(e) for e in expected],
        cdf_sup_dev=sup,
        distances=[float(d) for d in dists],
        assignments=assigns,
    )


def _density_from(prediction: AttractorPrediction, q):
    # arc endpoints sit on the cut closure where the root side is ambiguous;
    # the density vanishes there anyway
    try:
        return prediction.density(q)
    except (CutAmbiguity, NotOnCut):
        return 0.0
