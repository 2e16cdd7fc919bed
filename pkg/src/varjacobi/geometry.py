"""Branch-cut geometry: critical and orthogonal trajectories, level sets.

Everything here derives from the field (z^2-1)/R(z) where R is the square
root of (z-zeta+)(z-zeta-) cut along the central arc and normalized to z at
infinity.  Arcs are traced by unit-speed RK4 on that field with a Newton
projection after every step that pins the traced level, while the defining
line integral is accumulated alongside (so arc masses come out of the trace
for free, and per-chord contributions are exact by contour deformation).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from mpmath import mp, mpc, mpf

from .errors import (
    CutAmbiguity,
    DegenerateLevel,
    NotOnCut,
    TraceDiverged,
)
from .numutil import (
    adaptive_segment,
    as_float_array,
    bits_for_tol,
    gauss_legendre,
    point_polyline_distance,
    segment_crossings,
    to_float,
    to_mpc,
)
from .params import BranchPoints, ParameterPair, branch_points

# ---------------------------------------------------------------------------
# arc bookkeeping
# ---------------------------------------------------------------------------


class ArcKind(Enum):
    LEFT = "left"  # crosses (-inf, -1); stored from upper to lower branch point
    CENTER = "center"  # crosses (-1, 1); stored upper to lower; the branch cut
    RIGHT = "right"  # crosses (1, inf); stored lower to upper
    PERP_ONE_UPPER = "perp_one_upper"  # upper branch point -> 1
    PERP_ONE_LOWER = "perp_one_lower"  # lower branch point -> 1
    PERP_MINUS_ONE_UPPER = "perp_minus_one_upper"
    PERP_MINUS_ONE_LOWER = "perp_minus_one_lower"
    PERP_INF_UPPER = "perp_inf_upper"
    PERP_INF_LOWER = "perp_inf_lower"
    LEVEL = "level"


class LevelComponent(Enum):
    OUTER = "outer"
    NEAR_PLUS_ONE = "near_plus_one"
    NEAR_MINUS_ONE = "near_minus_one"


CRITICAL_KINDS = (ArcKind.LEFT, ArcKind.CENTER, ArcKind.RIGHT)
PERP_UPPER_KINDS = (
    ArcKind.PERP_ONE_UPPER,
    ArcKind.PERP_MINUS_ONE_UPPER,
    ArcKind.PERP_INF_UPPER,
)
PERP_LOWER_KINDS = (
    ArcKind.PERP_ONE_LOWER,
    ArcKind.PERP_MINUS_ONE_LOWER,
    ArcKind.PERP_INF_LOWER,
)


@dataclass
class Arc:
    """A traced analytic arc as an ordered point list.

    ``raw_integral`` accumulates R(t)/(t^2-1) dt along the stored orientation
    with the root branch normalized so the induced measure is positive.  For
    arcs ending at a pole (+-1) it is truncated at the capture radius and
    kept for diagnostics only.
    """

    kind: ArcKind
    points: list
    endpoints: tuple
    level: float = 0.0
    component: LevelComponent | None = None
    xi: mpf | None = None  # real-axis crossing, critical arcs only
    raw_integral: mpc | None = None
    side_values: list | None = None  # plus-side root values (CENTER only)
    max_residual: float = 0.0
    closed: bool = False

    _floats: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def floats(self) -> np.ndarray:
        if self._floats is None:
            self._floats = as_float_array(self.points)
        return self._floats

    @property
    def length(self) -> float:
        return float(np.sum(np.abs(np.diff(self.floats))))

    def distance(self, z) -> float:
        return point_polyline_distance(to_float(z), self.floats)

    def label(self) -> str:
        if self.kind is ArcKind.LEVEL:
            return f"level[{self.level!r}][{self.component.value}]"
        return self.kind.value


class Omega(Enum):
    MINUS_ONE = "omega_minus_one"
    PLUS_ONE = "omega_plus_one"
    INFINITY = "omega_infinity"


class Domain(Enum):
    I = 1
    II = 2
    III = 3
    IV = 4
    V = 5
    VI = 6


_DOMAIN_OMEGA = {
    Domain.I: Omega.INFINITY,
    Domain.II: Omega.MINUS_ONE,
    Domain.III: Omega.MINUS_ONE,
    Domain.IV: Omega.PLUS_ONE,
    Domain.V: Omega.PLUS_ONE,
    Domain.VI: Omega.INFINITY,
}


@dataclass(frozen=True)
class RegionLabel:
    omega: Omega
    domain: Domain
    on_boundary: bool = False
    boundary_name: str | None = None

    def __post_init__(self):
        if _DOMAIN_OMEGA[self.domain] is not self.omega:
            raise ValueError("domain/omega mismatch")


# ---------------------------------------------------------------------------
# the cut square root
# ---------------------------------------------------------------------------

_RAY_LEN = 1e7  # vertical ray extent used in parity tests (absolute units)


class CutRoot:
    """sqrt((z-zeta+)(z-zeta-)) cut along the central arc, ~ z at infinity.

    The principal square root of the quadratic jumps on the two vertical rays
    above/below the branch points; a parity sign relative to the infinite
    curve (down-ray + central arc + up-ray) moves the cut onto the central
    arc.  The central arc is supplied as a traced polyline; before tracing, a
    straight segment between the branch points is a usable stand-in outside
    the lens between the two curves.
    """

    def __init__(self, bp: BranchPoints, cut_polyline=None, prox_tol=None):
        self.bp = bp
        self.prox_tol = float(prox_tol) if prox_tol is not None else 1e-8 * float(bp.scale)
        if cut_polyline is None:
            cut_polyline = [to_float(bp.zeta_minus), to_float(bp.zeta_plus)]
        self.cut = as_float_array(cut_polyline)
        x0, y0 = float(bp.center), float(bp.height)
        self._x0 = x0
        self._ray_up = np.array([complex(x0, y0), complex(x0, _RAY_LEN)])
        self._ray_dn = np.array([complex(x0, -y0), complex(x0, -_RAY_LEN)])
        self._y_env = max(y0, float(np.max(np.abs(self.cut.imag)))) * (1 + 1e-12)
        # side tests cannot resolve closer than the polyline's chord deviation
        gap = float(np.max(np.abs(np.diff(self.cut)))) if len(self.cut) > 1 else 0.0
        self.resolution = max(self.prox_tol, gap * gap / (4 * float(bp.scale)))

    def side(self, z, hint: int | None = None) -> int:
        """Parity side relative to (down-ray + cut + up-ray); +1 = east."""
        if hint is not None:
            return 1 if hint > 0 else -1
        zf = to_float(z)
        if abs(zf.imag) > self._y_env:
            # beyond all cut structure only the vertical rays matter
            return 1 if zf.real >= self._x0 else -1
        if point_polyline_distance(zf, self.cut) < self.resolution:
            raise CutAmbiguity(f"point {zf} within cut proximity tolerance")
        ref = zf + 4.0 * _RAY_LEN * complex(1.0, 1e-9)  # tilt dodges vertices
        n = segment_crossings(zf, ref, self.cut)
        n += segment_crossings(zf, ref, self._ray_up)
        n += segment_crossings(zf, ref, self._ray_dn)
        return 1 if n % 2 == 0 else -1

    def __call__(self, z, side: int | None = None) -> mpc:
        z = to_mpc(z)
        s = self.side(z, hint=side)
        return s * mp.sqrt((z - self.bp.zeta_plus) * (z - self.bp.zeta_minus))


# ---------------------------------------------------------------------------
# tracer core
# ---------------------------------------------------------------------------

SEED_OFFSET_FACTOR = 1e-6  # step-off from a branch point before ODE stepping
CAPTURE_FACTOR = 1e-6  # endpoint capture radius, relative to the scale
MAX_STEPS = 40000


def seed_angles(bp: BranchPoints, at_upper: bool):
    """Directions of the six rays at a branch point.

    Returns (trajectory_angles, orthogonal_angles).  With C the local
    linearization coefficient of the quadratic differential, trajectory rays
    satisfy arg C + 3 theta = 0 (mod 2 pi) and orthogonal rays are offset by
    60 degrees.
    """
    z = bp.zeta_plus if at_upper else bp.zeta_minus
    other = bp.zeta_minus if at_upper else bp.zeta_plus
    C = -(z - other) / (z * z - 1) ** 2
    argC = mp.arg(C)
    traj = [float((-argC + 2 * mp.pi * k) / 3) for k in range(3)]
    orth = [float((mp.pi - argC + 2 * mp.pi * k) / 3) for k in range(3)]
    return traj, orth


class _Tracer:
    """Stepping core shared by trajectory, orthogonal and level tracing."""

    def __init__(self, bp: BranchPoints, mode: str, step, tol, box):
        self.bp = bp
        self.mode = mode  # 'traj' traces Re-levels, 'orth' Im-levels
        self.step = mpf(step)
        self.tol = mpf(tol)
        self.box = mpf(box)
        self.zp = bp.zeta_plus
        self.zm = bp.zeta_minus
        self.scale = bp.scale
        self.rot = mpc(0, 1) if mode == "traj" else mpc(1, 0)
        self.gl8 = gauss_legendre(8, mp.prec)
        self.gl16 = gauss_legendre(16, mp.prec)

    def root_near(self, t, ref):
        r = mp.sqrt((t - self.zp) * (t - self.zm))
        return r if abs(r - ref) <= abs(r + ref) else -r

    def velocity(self, z, r_ref, direction):
        """Unit tangent with branch-continued root; returns (v, root)."""
        r = self.root_near(z, r_ref)
        v = self.rot * (z * z - 1) / r
        v = v / abs(v)
        if direction is not None and (
            v.real * direction.real + v.imag * direction.imag
        ) < 0:
            v = -v
        return v, r

    def seg_integral(self, a, b, ra, rb):
        """GL8 integral of R/(t^2-1) along the chord [a, b]."""
        xs, ws = self.gl8
        mid = (a + b) / 2
        half = (b - a) / 2
        total = mpc(0)
        for x, w in zip(xs, ws):
            t = mid + half * x
            ref = ra + (rb - ra) * (x + 1) / 2
            r = self.root_near(t, ref)
            total += w * r / (t * t - 1)
        return total * half

    def sqrt_leg(self, zeta, b, rb):
        """Integral of R/(t^2-1) from a branch point zeta to b.

        The substitution t = zeta + u^2 e^{i theta} removes the square-root
        vanishing of R at the branch point.
        """
        other = self.zm if zeta == self.zp else self.zp
        d = b - zeta
        theta = mp.arg(d)
        U = mp.sqrt(abs(d))
        e_th = mp.expjpi(theta / mp.pi)
        e_h = mp.expjpi(theta / (2 * mp.pi))
        probe = U * e_h * mp.sqrt(b - other)
        s1 = 1 if abs(probe - rb) <= abs(probe + rb) else -1
        xs, ws = self.gl16
        total = mpc(0)
        for x, w in zip(xs, ws):
            u = U * (x + 1) / 2
            t = zeta + u * u * e_th
            rt = s1 * u * e_h * mp.sqrt(t - other)
            total += w * rt * 2 * u * e_th / (t * t - 1)
        return total * U / 2

    def level_of(self, value):
        return value.real if self.mode == "traj" else value.imag

    def project(self, z, r, raw_prev, prev_pt, prev_root, target):
        """Newton correction along the normal pinning the traced level."""
        seg = self.seg_integral(prev_pt, z, prev_root, r)
        for _ in range(5):
            resid = target - self.level_of(raw_prev + seg)
            if abs(resid) < 0.05 * self.tol:
                return z, r, seg, abs(resid)
            v, r = self.velocity(z, r, None)
            nrm = mpc(0, 1) * v
            deriv_c = (r / (z * z - 1)) * nrm
            deriv = self.level_of(deriv_c)
            if deriv == 0:
                break
            z = z + (resid / deriv) * nrm
            r = self.root_near(z, r)
            seg = self.seg_integral(prev_pt, z, prev_root, r)
        return z, r, seg, abs(target - self.level_of(raw_prev + seg))


def _refine_axis_crossing(tr: _Tracer, z_prev, r_prev, raw_prev, z_next, target):
    """Real-axis crossing of the traced arc between two stored points.

    Bisects the chord parameter, projecting each trial point back onto the
    level set, so the returned abscissa lies on the arc itself.
    """
    lo, hi = mpf(0), mpf(1)

    def im_at(t):
        zt = z_prev + (z_next - z_prev) * t
        rt = tr.root_near(zt, r_prev)
        zt, _, _, _ = tr.project(zt, rt, raw_prev, z_prev, r_prev, target)
        return zt

    z_lo = im_at(lo)
    for _ in range(72):
        mid = (lo + hi) / 2
        z_mid = im_at(mid)
        if z_lo.imag * z_mid.imag <= 0:
            hi = mid
        else:
            lo, z_lo = mid, z_mid
        if hi - lo < mpf(10) ** (-22):
            break
    return im_at((lo + hi) / 2).real


def _run_trace(
    tr: _Tracer,
    z0,
    r0,
    v0,
    raw0,
    target_level,
    capture_points,
    allow_box_exit,
    close_at=None,
):
    """Advance until capture, box exit, or loop closure.

    Returns (points, roots, raw, max_residual, events); events records the
    termination tag and refined real-axis crossings.
    """
    z, r, v, raw = z0, r0, v0, raw0
    pts = [z0]
    roots = [r0]
    crossings = []
    max_res = mpf(0)
    tag = None
    armed = False
    travelled = mpf(0)
    # capture well before the level projection degenerates at the branch
    # point; the closing square-root leg integrates the remainder exactly
    cap_rad = max(CAPTURE_FACTOR * tr.scale, min(mpf("0.02") * tr.scale, 2 * tr.step))

    steps_since_crossing = 10**9
    for _ in range(MAX_STEPS):
        d_near = min(abs(z - tr.zp), abs(z - tr.zm), abs(z - 1), abs(z + 1))
        h = min(tr.step, mpf("0.4") * d_near)
        for c in capture_points:
            dc = abs(z - c)
            if dc < 5 * h:
                h = max(min(h, dc / 6), cap_rad / 4)
        # step with rejection: halve when the projection has to move far or
        # the tangent turns sharply (both flag an under-resolved stretch)
        for _shrink in range(12):
            k1, r1 = tr.velocity(z, r, v)
            k2, r2 = tr.velocity(z + h / 2 * k1, r1, k1)
            k3, r3 = tr.velocity(z + h / 2 * k2, r2, k2)
            k4, _ = tr.velocity(z + h * k3, r3, k3)
            z_pred = z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            r_new = tr.root_near(z_pred, r)
            z_new, r_new, seg, resid = tr.project(z_pred, r_new, raw, z, r, target_level)
            v_new, r_new = tr.velocity(z_new, r_new, v)
            turn = v_new.real * v.real + v_new.imag * v.imag
            if (
                abs(z_new - z_pred) <= mpf("0.25") * h
                and turn > mpf("0.5")
                and resid <= tr.tol
            ):
                break
            h /= 2
        else:
            raise TraceDiverged("step control failed to stabilize the trace")
        max_res = max(max_res, resid)

        if z.imag * z_new.imag < 0 and steps_since_crossing > 4:
            crossings.append(_refine_axis_crossing(tr, z, r, raw, z_new, target_level))
            steps_since_crossing = 0
        else:
            steps_since_crossing += 1

        raw = raw + seg
        pts.append(z_new)
        roots.append(r_new)
        travelled += abs(z_new - z)
        z, r, v = z_new, r_new, v_new

        captured = None
        for c in capture_points:
            if abs(z - c) < cap_rad:
                captured = c
                break
        if captured is not None:
            if captured == tr.zp or captured == tr.zm:
                raw -= tr.sqrt_leg(captured, z, r)
                roots.append(mpc(0))
            else:
                roots.append(r)
            pts.append(captured)
            tag = captured
            break
        if close_at is not None:
            if not armed and travelled > 6 * tr.step:
                armed = True
            if armed and abs(z - close_at) < mpf("1.5") * tr.step:
                rc = tr.root_near(close_at, r)
                raw += tr.seg_integral(z, close_at, r, rc)
                pts.append(close_at)
                roots.append(rc)
                tag = "closed"
                break
        if abs(z) > tr.box:
            if allow_box_exit:
                tag = "inf"
                break
            raise TraceDiverged(f"trace left the bounding box near {to_float(z)}")
        if travelled > mpf("0.1") * tr.scale and d_near < cap_rad / 4:
            raise TraceDiverged(f"trace collapsed into a singular point near {to_float(z)}")
    else:
        raise TraceDiverged("step budget exhausted")

    return pts, roots, raw, max_res, {"tag": tag, "crossings": crossings}


def _trace_from_branch(bp, at_upper, angle, mode, step, tol, box, captures, allow_exit):
    tr = _Tracer(bp, mode, step, tol, box)
    zeta = bp.zeta_plus if at_upper else bp.zeta_minus
    off = SEED_OFFSET_FACTOR * bp.scale
    direction = mp.expjpi(mpf(angle) / mp.pi)
    z0 = zeta + off * direction
    r0 = mp.sqrt((z0 - tr.zp) * (z0 - tr.zm))
    v0, r0 = tr.velocity(z0, r0, direction)
    raw0 = tr.sqrt_leg(zeta, z0, r0)
    pts, roots, raw, max_res, ev = _run_trace(
        tr, z0, r0, v0, raw0, mpf(0), captures, allow_exit
    )
    pts.insert(0, zeta)
    roots.insert(0, mpc(0))
    return pts, roots, raw, max_res, ev


# ---------------------------------------------------------------------------
# public tracing operations
# ---------------------------------------------------------------------------


def _default_prec(tol) -> int:
    return bits_for_tol(float(tol)) + 24


def trace_critical_trajectories(params: ParameterPair, step=None, tol=1e-9, prec=None):
    """The three arcs joining the branch points, labelled by real crossing.

    Arcs come back in reference orientation (LEFT and CENTER from the upper
    to the lower branch point, RIGHT the other way) with the accumulated
    integral of R/(t^2-1) normalized so the induced measure is positive.
    """
    prec = prec or _default_prec(tol)
    with mp.workprec(prec):
        bp = branch_points(params)
        step = mpf(step) if step is not None else mpf("0.035") * bp.scale
        box = 10 * (1 + abs(bp.zeta_plus))
        traj_angles, _ = seed_angles(bp, at_upper=False)
        traced = []
        for ang in traj_angles:
            pts, roots, raw, res, ev = _trace_from_branch(
                bp, False, ang, "traj", step, tol, box,
                captures=[bp.zeta_plus], allow_exit=False,
            )
            if len(ev["crossings"]) != 1:
                raise TraceDiverged(
                    f"critical arc crossed the real axis {len(ev['crossings'])} times"
                )
            traced.append([ev["crossings"][0], pts, roots, raw, res])
        traced.sort(key=lambda t: t[0])
        xi_l, xi_c, xi_r = (t[0] for t in traced)
        if not (xi_l < -1 < xi_c < 1 < xi_r):
            raise TraceDiverged(
                "crossing ordering violated: "
                f"{float(xi_l)}, {float(xi_c)}, {float(xi_r)}"
            )
        arcs = []
        for kind, (xi, pts, roots, raw, res) in zip(CRITICAL_KINDS, traced):
            if kind in (ArcKind.LEFT, ArcKind.CENTER):
                pts = pts[::-1]
                roots = roots[::-1]
                raw = -raw
                ends = ("zeta+", "zeta-")
            else:
                ends = ("zeta-", "zeta+")
            mass = (params.mass_scale / (2j * mp.pi)) * raw
            if mass.real < 0:  # pin the branch that makes the measure positive
                raw = -raw
                roots = [-r for r in roots]
            arcs.append(
                Arc(
                    kind=kind, points=pts, endpoints=ends, xi=xi,
                    raw_integral=raw, max_residual=float(res),
                    side_values=roots if kind is ArcKind.CENTER else None,
                )
            )
        return arcs


def trace_orthogonal_trajectories(params: ParameterPair, step=None, tol=1e-9, prec=None):
    """Six arcs from the branch points to +1, -1 and infinity.

    Upper and lower families are traced independently; their mirror symmetry
    is a property to verify, not an input.
    """
    prec = prec or _default_prec(tol)
    with mp.workprec(prec):
        bp = branch_points(params)
        step = mpf(step) if step is not None else mpf("0.035") * bp.scale
        box = 10 * (1 + abs(bp.zeta_plus))
        out = {}
        for at_upper in (False, True):
            _, orth_angles = seed_angles(bp, at_upper=at_upper)
            for ang in orth_angles:
                pts, roots, raw, res, ev = _trace_from_branch(
                    bp, at_upper, ang, "orth", step, tol, box,
                    captures=[mpc(1), mpc(-1)], allow_exit=True,
                )
                tag = ev["tag"]
                if tag == "inf":
                    kind = ArcKind.PERP_INF_UPPER if at_upper else ArcKind.PERP_INF_LOWER
                    end = "inf"
                elif tag is not None and abs(tag - 1) < 1:
                    kind = ArcKind.PERP_ONE_UPPER if at_upper else ArcKind.PERP_ONE_LOWER
                    end = "+1"
                elif tag is not None:
                    kind = (
                        ArcKind.PERP_MINUS_ONE_UPPER
                        if at_upper
                        else ArcKind.PERP_MINUS_ONE_LOWER
                    )
                    end = "-1"
                else:
                    raise TraceDiverged("orthogonal arc terminated without a tag")
                start = "zeta+" if at_upper else "zeta-"
                out[kind] = Arc(
                    kind=kind, points=pts, endpoints=(start, end),
                    raw_integral=raw, max_residual=float(res),
                )
        missing = [k for k in PERP_UPPER_KINDS + PERP_LOWER_KINDS if k not in out]
        if missing:
            raise TraceDiverged(f"orthogonal arcs not identified: {missing}")
        return [out[k] for k in PERP_LOWER_KINDS + PERP_UPPER_KINDS]


# ---------------------------------------------------------------------------
# geometry cache
# ---------------------------------------------------------------------------


class Geometry:
    """Immutable traced-geometry snapshot shared by the other modules."""

    def __init__(self, params: ParameterPair, step=None, tol=1e-9, prec=None):
        self.params = params
        self.tol = mpf(tol)
        self.prec = prec or _default_prec(tol)
        with mp.workprec(self.prec):
            self.bp = branch_points(params)
            self.scale = self.bp.scale
            self.box = 10 * (1 + abs(self.bp.zeta_plus))
            self.step = mpf(step) if step is not None else mpf("0.035") * self.scale
            crit = trace_critical_trajectories(params, self.step, tol, self.prec)
            orth = trace_orthogonal_trajectories(params, self.step, tol, self.prec)
        self.arcs = {a.kind: a for a in crit + orth}
        self.xi_left = self.arcs[ArcKind.LEFT].xi
        self.xi_center = self.arcs[ArcKind.CENTER].xi
        self.xi_right = self.arcs[ArcKind.RIGHT].xi
        self.root = CutRoot(
            self.bp,
            self.arcs[ArcKind.CENTER].floats,
            prox_tol=1e-8 * float(self.scale),
        )
        self._extended: dict = {}

    # -- cut square root ----------------------------------------------------
    def cut_root(self, z, side=None) -> mpc:
        """R(z): branch cut on the central arc, R(z)/z -> 1 at infinity.

        Evaluates at the ambient working precision.
        """
        return self.root(z, side=side)

    def _root_on_axis(self, t) -> mpf:
        """R restricted to the real axis: sign flips at the central crossing."""
        t = mpf(t)
        s = 1 if t > self.xi_center else -1
        return s * mp.sqrt((t - self.bp.zeta_plus) * (t - self.bp.zeta_minus)).real

    def cut_root_boundary(self, z, side) -> mpc:
        """One-sided limit of R on the central arc; the plus side faces east."""
        arc = self.arcs[ArcKind.CENTER]
        zf = to_float(z)
        if point_polyline_distance(zf, arc.floats) > 0.05 * float(self.step):
            raise NotOnCut(f"{zf} is not on the central arc")
        if isinstance(side, str):
            s = 1 if side.lower() in ("plus", "+", "p") else -1
        else:
            s = 1 if side > 0 else -1
        with mp.workprec(self.prec):
            order = np.argsort(np.abs(arc.floats - zf))
            r0 = None
            for i in order[:8]:
                cand = arc.side_values[int(i)]
                if abs(cand) > 1e-6 * float(self.scale):
                    r0 = cand
                    break
            if r0 is None:
                raise NotOnCut("no usable reference branch near this point")
            z = to_mpc(z)
            r = mp.sqrt((z - self.bp.zeta_plus) * (z - self.bp.zeta_minus))
            if abs(r - r0) > abs(r + r0):
                r = -r
            return s * r

    # -- arc access -----------------------------------------------------------
    def arc_floats(self, kind: ArcKind) -> np.ndarray:
        """Float polyline of an arc; infinite arcs get a far extension."""
        if kind not in self._extended:
            arr = self.arcs[kind].floats
            if kind in (ArcKind.PERP_INF_UPPER, ArcKind.PERP_INF_LOWER):
                d = arr[-1] - arr[-2]
                d /= abs(d)
                arr = np.append(arr, arr[-1] + d * _RAY_LEN)
            self._extended[kind] = arr
        return self._extended[kind]

    def phase_cut_polylines(self):
        """Cuts of the phase function: central arc plus the three upper arcs."""
        return [
            self.arc_floats(ArcKind.CENTER),
            self.arc_floats(ArcKind.PERP_ONE_UPPER),
            self.arc_floats(ArcKind.PERP_MINUS_ONE_UPPER),
            self.arc_floats(ArcKind.PERP_INF_UPPER),
        ]

    # -- level sets -------------------------------------------------------------
    def _axis_level_value(self, x) -> mpf:
        """Integral of R/(t^2-1) along the real axis from the nearest crossing.

        This is the (raw) level function restricted to the real axis; it is
        real there and vanishes at the arc crossings.
        """
        x = mpf(x)
        if x > 1:
            anchor = self.xi_right
        elif x > -1:
            anchor = self.xi_center
        else:
            anchor = self.xi_left
        if x == anchor:
            return mpf(0)

        def f(t):
            return self._root_on_axis(t.real) / (t * t - 1)

        with mp.workprec(self.prec):
            # the level anchor only feeds a bisection; 1e-26 is ample
            tol = max(mpf(10) ** (-mp.dps + 10), mpf(10) ** (-26))
            val, _ = adaptive_segment(f, anchor, x, tol)
        return val.real

    def _bisect_level_anchor(self, r_raw, lo, hi) -> mpf:
        lo, hi = mpf(lo), mpf(hi)
        flo = self._axis_level_value(lo) - r_raw
        fhi = self._axis_level_value(hi) - r_raw
        if flo * fhi > 0:
            raise TraceDiverged(
                f"level {float(r_raw)} not bracketed on ({float(lo)}, {float(hi)})"
            )
        for _ in range(90):
            mid = (lo + hi) / 2
            fm = self._axis_level_value(mid) - r_raw
            if fm * flo <= 0:
                hi = mid
            else:
                lo, flo = mid, fm
            if hi - lo < mpf(10) ** (-24) * (1 + abs(mid)):
                break
        return (lo + hi) / 2

    def trace_level_set(self, r, step=None, tol=None, degenerate_tol=1e-8):
        """Closed contours where the phase has constant real part r != 0.

        One counterclockwise contour in the unbounded region for r > 0; two
        contours (around -1 and around +1) for r < 0.
        """
        if r == 0:
            raise DegenerateLevel("r = 0 is the critical level; trace arcs instead")
        if abs(r) < degenerate_tol:
            raise DegenerateLevel(f"|r| = {abs(r)} below the degeneracy threshold")
        tol = mpf(tol) if tol is not None else self.tol
        with mp.workprec(self.prec):
            step = mpf(step) if step is not None else self.step
            r_raw = 2 * mpf(r) / self.params.mass_scale
            eps = mpf("1e-5") * self.scale
            if r > 0:
                seeds = [(LevelComponent.OUTER, self.xi_right + eps, self.box * mpf("0.97"))]
            else:
                seeds = [
                    (LevelComponent.NEAR_MINUS_ONE, -1 + eps, self.xi_center - eps),
                    (LevelComponent.NEAR_PLUS_ONE, self.xi_center + eps, 1 - eps),
                ]
            arcs = []
            for comp, lo, hi in seeds:
                x_seed = self._bisect_level_anchor(r_raw, lo, hi)
                tr = _Tracer(self.bp, "traj", step, tol, self.box)
                z0 = mpc(x_seed)
                r0 = mpc(self._root_on_axis(x_seed))
                v0, r0 = tr.velocity(z0, r0, mpc(0, 1))
                raw0 = mpc(r_raw)
                pts, roots, raw, res, ev = _run_trace(
                    tr, z0, r0, v0, raw0, r_raw,
                    capture_points=[], allow_box_exit=False, close_at=z0,
                )
                if ev["tag"] != "closed":
                    raise TraceDiverged("level contour failed to close")
                loop_int = raw - raw0
                arr = as_float_array(pts)
                area = 0.5 * np.sum(
                    np.real(arr[:-1]) * np.imag(arr[1:])
                    - np.real(arr[1:]) * np.imag(arr[:-1])
                )
                if area < 0:
                    pts = pts[::-1]
                    loop_int = -loop_int
                mass = (self.params.mass_scale / (2j * mp.pi)) * loop_int
                if mass.real < 0:
                    loop_int = -loop_int
                arcs.append(
                    Arc(
                        kind=ArcKind.LEVEL, points=pts, endpoints=("closed", "closed"),
                        level=float(r), component=comp, raw_integral=loop_int,
                        max_residual=float(res), closed=True,
                    )
                )
            return arcs

    # -- classification -----------------------------------------------------------
    def _parity(self, zf, kinds, far=None) -> bool:
        ref = zf + (far if far is not None else complex(4.0 * _RAY_LEN, 4.0 * _RAY_LEN * 1e-9))
        n = 0
        for k in kinds:
            n += segment_crossings(zf, ref, self.arc_floats(k))
        return n % 2 == 1

    def classify_point(self, z, margin=None) -> RegionLabel:
        """Region and domain of a point, from the traced arcs alone."""
        zf = to_float(z)
        margin = float(margin) if margin is not None else max(
            10 * float(self.tol), 1e-3 * float(self.step)
        )
        on_b, name = False, None
        for kind, arc in self.arcs.items():
            if point_polyline_distance(zf, arc.floats) < margin:
                on_b, name = True, kind.value
                break
        in_m1 = self._parity(zf, (ArcKind.LEFT, ArcKind.CENTER))
        in_p1 = self._parity(zf, (ArcKind.CENTER, ArcKind.RIGHT))
        if in_m1 and in_p1:  # numerically on the central arc; break the tie
            in_p1 = abs(zf - 1) < abs(zf + 1)
            in_m1 = not in_p1
        if in_m1:
            # the eastern part is enclosed by the -1 chain plus the cut arc
            east = self._parity(
                zf,
                (ArcKind.PERP_MINUS_ONE_UPPER, ArcKind.CENTER,
                 ArcKind.PERP_MINUS_ONE_LOWER),
            )
            return RegionLabel(Omega.MINUS_ONE, Domain.III if east else Domain.II, on_b, name)
        if in_p1:
            east = self._parity(
                zf,
                (ArcKind.PERP_ONE_UPPER, ArcKind.RIGHT, ArcKind.PERP_ONE_LOWER),
            )
            return RegionLabel(Omega.PLUS_ONE, Domain.V if east else Domain.IV, on_b, name)
        west = self._parity(
            zf,
            (
                ArcKind.PERP_INF_LOWER, ArcKind.PERP_INF_UPPER,
                ArcKind.LEFT, ArcKind.CENTER, ArcKind.RIGHT,
            ),
        )
        return RegionLabel(Omega.INFINITY, Domain.I if west else Domain.VI, on_b, name)

    # -- exports ---------------------------------------------------------------------
    def export_csv(self, arcs=None) -> str:
        """CSV with columns kind, index, re, im at full working precision."""
        arcs = arcs if arcs is not None else [self.arcs[k] for k in self.arcs]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "index", "re", "im"])
        with mp.workprec(self.prec):
            digits = mp.dps
            for arc in arcs:
                label = arc.label()
                for i, p in enumerate(arc.points):
                    p = to_mpc(p)
                    w.writerow(
                        [label, i, mp.nstr(p.real, digits), mp.nstr(p.imag, digits)]
                    )
        return buf.getvalue()

    def export_json(self, arcs=None) -> str:
        arcs = arcs if arcs is not None else [self.arcs[k] for k in self.arcs]
        with mp.workprec(self.prec):
            digits = mp.dps
            bundle = {
                "A": mp.nstr(self.params.A, digits),
                "B": mp.nstr(self.params.B, digits),
                "step": mp.nstr(self.step, digits),
                "tol": mp.nstr(self.tol, digits),
                "precision_bits": self.prec,
                "arcs": [
                    {
                        "kind": arc.label(),
                        "endpoints": list(arc.endpoints),
                        "points": [
                            [
                                mp.nstr(to_mpc(p).real, digits),
                                mp.nstr(to_mpc(p).imag, digits),
                            ]
                            for p in arc.points
                        ],
                    }
                    for arc in arcs
                ],
            }
        return json.dumps(bundle, indent=1)
