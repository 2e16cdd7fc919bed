"""Phase function of the trajectory field via routed contour quadrature.

The phase is (A+B+2)/2 times the integral of R(t)/(t^2-1) from the lower
branch point, single-valued once the plane is cut along the central arc and
the three orthogonal arcs attached to the upper branch point.  Integration
paths are polylines built by a deterministic router: step off the lower
branch point into the lower half plane, travel underneath everything, and
come up through one of the real-axis gates between the cut feet.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from mpmath import mp, mpc, mpf

from .errors import OnCut, PathIntersectsCut, QuadNoConverge
from .geometry import ArcKind, Geometry
from .numutil import (
    adaptive_segment,
    as_float_array,
    bits_for_tol,
    point_polyline_distance,
    segment_crossings,
    to_float,
    to_mpc,
)
from .params import ParameterPair


@dataclass
class PhasePlan:
    """A piecewise-linear integration path avoiding a set of cut polylines."""

    target: mpc
    waypoints: list
    avoided_cuts: list = field(default_factory=list, repr=False)
    sqrt_start: bool = True  # first leg leaves a square-root branch point
    sqrt_end: bool = False  # last leg lands on a square-root branch point
    hint_leg: bool = False  # last leg approaches a cut from a chosen side

    def legs(self):
        return list(zip(self.waypoints[:-1], self.waypoints[1:]))


@dataclass(frozen=True)
class PhaseValue:
    phi: mpc
    quad_error_bound: mpf


def validate_plan(plan: PhasePlan):
    """Check that no leg crosses an avoided cut (the hint leg is exempt)."""
    pts = as_float_array(plan.waypoints)
    n_legs = len(pts) - 1
    for i in range(n_legs):
        if plan.hint_leg and i == n_legs - 1:
            continue
        a, b = pts[i], pts[i + 1]
        if i == 0 and plan.sqrt_start:
            a = a + 1e-6 * (b - a)  # the start sits on a cut endpoint
        for cut in plan.avoided_cuts:
            if segment_crossings(a, b, cut):
                raise PathIntersectsCut(
                    f"leg {i} of plan to {to_float(plan.target)} crosses a cut"
                )


def quad_contour(integrand, plan: PhasePlan, tol, max_depth: int = 40):
    """Adaptive Gauss-Legendre panels along a validated polyline path.

    ``integrand`` is either a plain callable or an object with a
    ``for_leg(i, a, b)`` method returning the callable to use on leg i (used
    to pin branch choices per leg).  A square-root integrable singularity at
    the start point is handled by the substitution t = a + (b-a) u^2.
    Returns (value, error_bound).
    """
    validate_plan(plan)
    tol = mpf(tol)
    legs = plan.legs()
    leg_tol = tol / (len(legs) + 1)
    total = mpc(0)
    bound = mpf(0)
    for i, (a, b) in enumerate(legs):
        a = to_mpc(a)
        b = to_mpc(b)
        f = integrand.for_leg(i, a, b) if hasattr(integrand, "for_leg") else integrand
        try:
            if i == 0 and plan.sqrt_start:
                d = b - a

                def g(u, _f=f, _a=a, _d=d):
                    return _f(_a + _d * u * u) * 2 * u * _d

                val, err = adaptive_segment(g, mpf(0), mpf(1), leg_tol, max_depth)
            elif i == len(legs) - 1 and plan.sqrt_end:
                d = a - b

                def g(u, _f=f, _b=b, _d=d):
                    return _f(_b + _d * u * u) * 2 * u * _d

                val, err = adaptive_segment(g, mpf(0), mpf(1), leg_tol, max_depth)
                val = -val
            else:
                val, err = adaptive_segment(f, a, b, leg_tol, max_depth)
        except RuntimeError as exc:
            raise QuadNoConverge(str(exc)) from exc
        total += val
        bound += err
    return total, bound


class _RootIntegrand:
    """R(t)/(t^2-1) with the branch pinned per sign-constant subleg.

    A leg of a valid plan crosses no cut, so the only places the principal
    square root of the quadratic disagrees with the cut root are the two
    vertical rays through the branch points; the leg is split there and one
    parity test per piece fixes the sign.
    """

    def __init__(self, geom: Geometry, fixed_side: int | None = None):
        self.geom = geom
        self.zp = geom.bp.zeta_plus
        self.zm = geom.bp.zeta_minus
        self.x0 = float(geom.bp.center)
        self.y0 = float(geom.bp.height)
        self.fixed_side = fixed_side

    def _sides_for(self, a, b):
        af, bf = to_float(a), to_float(b)
        breaks = [mpf(0), mpf(1)]
        if (af.real - self.x0) * (bf.real - self.x0) < 0:
            t = (self.x0 - af.real) / (bf.real - af.real)
            y = af.imag + t * (bf.imag - af.imag)
            if abs(y) >= self.y0:
                breaks.insert(1, mpf(t))
        sides = []
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            mid = af + float((lo + hi) / 2) * (bf - af)
            sides.append(self.geom.root.side(mid))
        return breaks, sides

    def for_leg(self, i, a, b):
        if self.fixed_side is not None:
            s = self.fixed_side

            def f_fixed(t):
                return s * mp.sqrt((t - self.zp) * (t - self.zm)) / (t * t - 1)

            return f_fixed
        breaks, sides = self._sides_for(a, b)
        d = b - a
        L2 = d.real * d.real + d.imag * d.imag

        def f(t):
            u = ((t - a) * d.conjugate()).real / L2
            s = sides[-1]
            for k in range(len(sides)):
                if u <= breaks[k + 1]:
                    s = sides[k]
                    break
            return s * mp.sqrt((t - self.zp) * (t - self.zm)) / (t * t - 1)

        return f


class Phase:
    """Phase evaluations over a traced geometry, with routing and caching."""

    def __init__(self, geom: Geometry, tol=1e-24, prec: int | None = None):
        self.geom = geom
        self.params = geom.params
        self.tol = mpf(tol)
        self.prec = prec or bits_for_tol(float(tol)) + 40
        self.cuts = geom.phase_cut_polylines()
        self._cache: dict = {}
        self._c_cache: dict = {}
        tail = geom.arc_floats(ArcKind.PERP_INF_UPPER)
        self._theta_cut = float(np.angle(tail[-1]))
        self._gate_cache: dict = {}

    # -- routing -------------------------------------------------------------
    def _clearance(self, zf) -> float:
        return min(point_polyline_distance(zf, cut) for cut in self.cuts)

    def _candidate_routes(self, zf):
        g = self.geom
        x0 = float(g.bp.center)
        zm = to_float(g.bp.zeta_minus)
        s = float(g.scale)
        cen = g.arcs[ArcKind.CENTER].floats
        deep = min(float(np.min(cen.imag)), zm.imag) - 0.35 * s
        tilt = 0.2 if zf.real >= x0 else -0.2
        d1 = zm + 0.35 * s * complex(np.sin(np.pi * tilt), -np.cos(np.pi * tilt))
        if zf.imag <= 0:
            yield [zf]  # direct leg
            yield [d1, complex(zf.real, min(deep, zf.imag - 0.1 * s)), zf]
            for dx in (0.25 * s, -0.25 * s, 0.6 * s, -0.6 * s):
                x = zf.real + dx
                yield [d1, complex(x, deep), complex(x, zf.imag), zf]
        else:
            xiC, xiR = float(g.xi_center), float(g.xi_right)
            gates = []
            for lo, hi in ((xiC, 1.0), (1.0, max(2.0, xiR + 0.5)),
                           (-1.0, xiC), (-max(6.0, -zf.real + 2), -1.0)):
                for f in (0.5, 0.25, 0.75, 0.1, 0.9):
                    gates.append(lo + f * (hi - lo))
            for gx in gates:
                yield [d1, complex(gx, deep), complex(gx, 0.0), zf]
                yield [d1, complex(gx, deep), complex(gx, 0.0), complex(gx, zf.imag), zf]

    def plan(self, z, approach=None) -> PhasePlan:
        """Deterministic route from the lower branch point to z."""
        z = to_mpc(z)
        zf = to_float(z)
        anchor = None
        if approach is not None:
            a = to_mpc(approach)
            a = a / abs(a)
            # shrink the offset until the anchor sits inside the local sector
            # (clear of every cut other than the one being approached)
            for frac in ("0.05", "0.02", "0.008", "0.003"):
                cand = z + a * (mpf(frac) * self.geom.scale)
                cf = to_float(cand)
                off = float(mpf(frac) * self.geom.scale)
                tail_end = zf + 0.02 * (cf - zf)  # stop short of the cut itself
                if self._clearance(cf) > 0.55 * off and not any(
                    segment_crossings(cf, tail_end, cut) for cut in self.cuts
                ):
                    anchor = cand
                    break
            if anchor is None:
                raise PathIntersectsCut(
                    f"no clean side anchor near {zf} along {to_float(a)}"
                )
            route_target = to_float(anchor)
        else:
            if self._clearance(zf) < 2 * self.geom.root.resolution:
                raise OnCut(f"{zf} lies on a cut of the phase function")
            route_target = zf
        zeta = self.geom.bp.zeta_minus
        for mids in self._candidate_routes(route_target):
            wps = [zeta] + [to_mpc(w) for w in mids[:-1]]
            wps.append(anchor if anchor is not None else z)
            if anchor is not None:
                wps.append(z)
            cand = PhasePlan(
                target=z, waypoints=wps, avoided_cuts=self.cuts,
                sqrt_start=True, hint_leg=anchor is not None,
            )
            try:
                validate_plan(cand)
                return cand
            except PathIntersectsCut:
                continue
        raise PathIntersectsCut(f"no cut-avoiding route to {zf} found")

    # -- evaluations -----------------------------------------------------------
    def phi(self, z, approach=None, tol=None) -> PhaseValue:
        """Single-valued phase at z; approach picks a side on the cuts.

        ``approach`` is a complex direction: the value returned is the limit
        of the phase from the side the direction points away from, i.e. the
        side containing z + eps*approach.
        """
        z = to_mpc(z)
        if z == self.geom.bp.zeta_minus:
            return PhaseValue(mpc(0), mpf(0))  # empty path
        tol = mpf(tol) if tol is not None else self.tol
        key = (repr(z), repr(approach) if approach is not None else None, repr(tol))
        if key in self._cache:
            return self._cache[key]
        with mp.workprec(self.prec):
            raw_tol = 2 * tol / self.params.mass_scale
            plan = self.plan(z, approach=approach)
            if plan.hint_leg:
                main = PhasePlan(
                    target=plan.waypoints[-2],
                    waypoints=plan.waypoints[:-1],
                    avoided_cuts=self.cuts,
                    sqrt_start=True,
                )
                val, err = quad_contour(_RootIntegrand(self.geom), main, raw_tol)
                anchor = plan.waypoints[-2]
                side = self.geom.root.side(anchor)
                tail = _RootIntegrand(self.geom, fixed_side=side)
                tval, terr = adaptive_segment(
                    tail.for_leg(0, anchor, z), anchor, z, raw_tol
                )
                val += tval
                err += terr
            else:
                val, err = quad_contour(_RootIntegrand(self.geom), plan, raw_tol)
            half = self.params.mass_scale / 2
            out = PhaseValue(half * val, abs(half) * err)
        self._cache[key] = out
        return out

    def phi_tilde(self, z, approach=None, tol=None) -> PhaseValue:
        """Mirror phase: conjugate of the phase at the conjugate point."""
        z = to_mpc(z)
        ap = to_mpc(approach).conjugate() if approach is not None else None
        v = self.phi(z.conjugate(), approach=ap, tol=tol)
        return PhaseValue(v.phi.conjugate(), v.quad_error_bound)

    def phi_along(self, z, mids, tol=None) -> PhaseValue:
        """Phase through caller-chosen waypoints (for path-independence checks).

        ``mids`` are intermediate waypoints between the lower branch point and
        z; the resulting plan is validated against the cuts like any other.
        """
        z = to_mpc(z)
        tol = mpf(tol) if tol is not None else self.tol
        with mp.workprec(self.prec):
            raw_tol = 2 * tol / self.params.mass_scale
            plan = PhasePlan(
                target=z,
                waypoints=[self.geom.bp.zeta_minus] + [to_mpc(m) for m in mids] + [z],
                avoided_cuts=self.cuts,
                sqrt_start=True,
            )
            val, err = quad_contour(_RootIntegrand(self.geom), plan, raw_tol)
            half = self.params.mass_scale / 2
            return PhaseValue(half * val, abs(half) * err)

    # -- the logarithmic constant ------------------------------------------------
    def log_cut(self, z) -> mpc:
        """log z with the branch cut along the asymptote of the upper cut."""
        z = to_mpc(z)
        a = mp.arg(z)
        theta = mpf(self._theta_cut)
        while a >= theta:
            a -= 2 * mp.pi
        while a < theta - 2 * mp.pi:
            a += 2 * mp.pi
        return mpc(mp.log(abs(z)), a)

    def log_constant(self, tol=1e-12):
        """c = lim (phase - (A+B+2)/2 log z), by a radius ladder.

        Evaluated straight below the origin; Richardson extrapolation in 1/r
        across the ladder, extending the ladder until the requested tolerance
        is met.  Returns (c, error_bound).
        """
        tol = mpf(tol)
        key = repr(tol)
        if key in self._c_cache:
            return self._c_cache[key]
        with mp.workprec(self.prec):
            half = self.params.mass_scale / 2
            radii = [mpf(100), mpf(1000), mpf(10000)]
            ests = []
            # down-west tilt keeps the far ray off the vertical branch ray
            fardir = mp.expjpi(mpf("-0.65"))

            def est(rho):
                z = rho * fardir
                v = self.phi(z, tol=min(tol / 10, self.tol))
                return v.phi - half * self.log_cut(z), v.quad_error_bound

            for rho in radii:
                ests.append(est(rho))

            def quad_extrap(k):
                # quadratic extrapolation in x = 1/rho through ests[k-2:k+1]
                xs = [1 / r for r in radii[k - 2 : k + 1]]
                cs = [e[0] for e in ests[k - 2 : k + 1]]
                c01 = (xs[0] * cs[1] - xs[1] * cs[0]) / (xs[0] - xs[1])
                c12 = (xs[1] * cs[2] - xs[2] * cs[1]) / (xs[1] - xs[2])
                return (xs[0] * c12 - xs[2] * c01) / (xs[0] - xs[2])

            c_prev = quad_extrap(2)
            while True:
                radii.append(radii[-1] * 10)
                ests.append(est(radii[-1]))
                c = quad_extrap(len(ests) - 1)
                spread = abs(c - c_prev) + ests[-1][1]
                if spread <= tol:
                    break
                if radii[-1] >= mpf(10) ** 10:
                    raise QuadNoConverge(
                        f"log-constant ladder stalled at spread {float(spread)}"
                    )
                c_prev = c
            out = (c, spread)
        self._c_cache[key] = out
        return out


def constant_c(params: ParameterPair, tol=1e-12):
    """Convenience wrapper building the geometry for a one-off evaluation."""
    geom = Geometry(params)
    return Phase(geom).log_constant(tol)
