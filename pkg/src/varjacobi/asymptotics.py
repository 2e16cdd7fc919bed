"""Outer and Airy-local asymptotic formulas for the monic polynomials.

The outer approximation multiplies a branch-tracked prefactor
exp(-n(c + (A/2) log(z-1) + (B/2) log(z+1))) by a two-term bracket whose
coefficients switch between the six domains.  Near the lower branch point
the bracket is replaced by the Airy combination evaluated through the local
conformal variable; the upper branch point is handled by conjugation
symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpc, mpf

from .errors import (
    CutAmbiguity,
    IntegerResonance,
    NearBranchPoint,
    OnCut,
    OutsideConformalRadius,
    PrecisionUnreachable,
)
from .geometry import ArcKind, Domain, Geometry, RegionLabel
from .numutil import to_float, to_mpc
from .params import ParameterPair
from .phase import Phase

RESONANCE_TOL = 1e-12


def _dist_to_int(x: mpf) -> mpf:
    return abs(x - mp.nint(x))


def check_resonance(params: ParameterPair, n: int):
    d = _dist_to_int(params.total * n)
    if d < RESONANCE_TOL:
        raise IntegerResonance(
            f"(A+B)n is within {float(d):.2e} of an integer; "
            "the monic normalization degenerates"
        )


def sine_ratios(params: ParameterPair, n: int):
    """sin(An pi)/sin((A+B)n pi) and sin(Bn pi)/sin((A+B)n pi), reduced
    stably modulo integers (mp.sinpi does the exact range reduction)."""
    check_resonance(params, n)
    den = mp.sinpi(params.total * n)
    return mp.sinpi(params.A * n) / den, mp.sinpi(params.B * n) / den


# ---------------------------------------------------------------------------
# model-matrix entries
# ---------------------------------------------------------------------------


def quarter_ratio(z, geom: Geometry) -> mpc:
    """a(z) = ((z-zeta-)/(z-zeta+))^(1/4), cut on the central arc, -> 1.

    Realized as the principal square root of R(z)/(z-zeta+): that quotient
    never touches the negative real axis off the central arc, so the
    composition is analytic exactly where it must be.
    """
    z = to_mpc(z)
    r = geom.cut_root(z)
    return mp.sqrt(r / (z - geom.bp.zeta_plus))


def model_entries(z, geom: Geometry):
    """(N11, N12) of the outer model matrix."""
    a = quarter_ratio(z, geom)
    return (a + 1 / a) / 2, (a - 1 / a) / (2j)


def model_entries_alt(z, geom: Geometry):
    """The derivative-based alternative expressions for (N11, N12).

    N11 = sqrt((1+R')/2) with R' = (2z - zeta+ - zeta-)/(2R); the N12 root
    needs the east/west parity sign because (1-R')/2 crosses the negative
    real axis on the vertical rays.
    """
    z = to_mpc(z)
    r = geom.cut_root(z)
    rp = (2 * z - geom.bp.zeta_plus - geom.bp.zeta_minus) / (2 * r)
    n11 = mp.sqrt((1 + rp) / 2)
    sigma = geom.root.side(z)
    n12 = sigma * mp.sqrt((1 - rp) / 2)
    return n11, n12


# ---------------------------------------------------------------------------
# branch-tracked logarithms and the prefactor
# ---------------------------------------------------------------------------


def _log_shifted(z, geom: Geometry, foot: int) -> mpc:
    """log(z - foot) cut along the chain foot -> upper branch point -> inf,
    real on (foot, +inf) and continuous across the rest of the real axis."""
    z = to_mpc(z)
    val = mp.log(z - foot)
    zf = to_float(z)
    if zf.imag > 0:
        kinds = (
            (ArcKind.PERP_ONE_UPPER, ArcKind.PERP_INF_UPPER)
            if foot == 1
            else (ArcKind.PERP_MINUS_ONE_UPPER, ArcKind.PERP_INF_UPPER)
        )
        if geom._parity(zf, kinds):
            val -= 2j * mp.pi
    elif zf.imag == 0 and zf.real < foot:
        val -= 2j * mp.pi
    return val


def log_plus(z, geom: Geometry) -> mpc:
    return _log_shifted(z, geom, 1)


def log_minus(z, geom: Geometry) -> mpc:
    return _log_shifted(z, geom, -1)


def fractional_prefactor(z, n: int, params: ParameterPair, c, geom: Geometry) -> mpc:
    """e^{-nc} (z-1)^{-An/2} (z+1)^{-Bn/2} with the tracked branches."""
    expo = -n * (c + params.A / 2 * log_plus(z, geom) + params.B / 2 * log_minus(z, geom))
    return mp.exp(expo)


# ---------------------------------------------------------------------------
# outer evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OuterTerms:
    n11: mpc
    n12: mpc
    prefactor: mpc
    exp_plus: mpc
    exp_minus: mpc
    sin_ratio_a: mpc
    sin_ratio_b: mpc
    phase_a: mpc
    phase_b: mpc
    domain: Domain


def outer_eval(
    z,
    n: int,
    params: ParameterPair,
    geom: Geometry,
    phase: Phase,
    c=None,
    exclusion=None,
    approach=None,
):
    """Two-term outer approximation of the monic polynomial at z.

    Returns (value, RegionLabel, OuterTerms).  The bracket follows the
    domain found by classification; O(1/n) factors are set to 1.
    """
    with mp.workprec(phase.prec):
        z = to_mpc(z)
        check_resonance(params, n)
        excl = mpf(exclusion) if exclusion is not None else mpf("0.25") * geom.scale
        if min(abs(z - geom.bp.zeta_plus), abs(z - geom.bp.zeta_minus)) < excl:
            raise NearBranchPoint(
                "point inside the branch-point exclusion disk; use the local formula"
            )
        label = geom.classify_point(z)
        if c is None:
            c, _ = phase.log_constant()
        sA, sB = sine_ratios(params, n)
        phiv = phase.phi(z, approach=approach).phi
        n11, n12 = model_entries(z, geom)
        pref = fractional_prefactor(z, n, params, c, geom)
        ep = mp.exp(n * phiv)
        em = mp.exp(-n * phiv)
        eA = mp.expjpi(-params.A * n)
        eB = mp.expjpi(params.B * n)
        dom = label.domain
        if dom in (Domain.I, Domain.II):
            bracket = ep * n11 - eA * sB * em * n12
        elif dom is Domain.III:
            bracket = eB * sA * ep * n11 - eA * sB * em * n12
        elif dom is Domain.IV:
            bracket = eA * sB * ep * n11 + eB * sA * em * n12
        else:  # V and VI
            bracket = ep * n11 + eB * sA * em * n12
        terms = OuterTerms(
            n11=n11, n12=n12, prefactor=pref, exp_plus=ep, exp_minus=em,
            sin_ratio_a=sA, sin_ratio_b=sB, phase_a=eA, phase_b=eB, domain=dom,
        )
        return +(pref * bracket), label, terms


# ---------------------------------------------------------------------------
# Airy machinery
# ---------------------------------------------------------------------------


def airy_base(s, prec: int = 128):
    """(Ai, Ai', Bi, Bi') at a complex point, at ``prec`` bits."""
    with mp.workprec(prec + 20):
        s = to_mpc(s)
        try:
            out = (
                mp.airyai(s), mp.airyai(s, 1), mp.airybi(s), mp.airybi(s, 1),
            )
        except mp.NoConvergence as exc:  # pragma: no cover
            raise PrecisionUnreachable(str(exc)) from exc
        return tuple(+v for v in out)


@dataclass(frozen=True)
class AiryValue:
    a_val: mpc
    a_deriv: mpc
    s: mpc


def airy_combination(s, params: ParameterPair, n: int, prec: int = 128) -> AiryValue:
    """The parameter-weighted Airy combination and its derivative.

    Built from the rotated-Airy form; cross-checked internally against the
    equivalent Ai/Bi form, which must agree to working precision.
    """
    check_resonance(params, n)
    with mp.workprec(prec + 30):
        s = to_mpc(s)
        sA, sB = sine_ratios(params, n)
        om = mp.expjpi(mpf(2) / 3)
        om2 = om * om
        eA = mp.expjpi(-params.A * n)
        eB = mp.expjpi(params.B * n)
        t1 = -eB * sA * om * mp.airyai(om * s)
        t2 = eA * sB * om2 * mp.airyai(om2 * s)
        val = t1 + t2
        d1 = -eB * sA * om2 * mp.airyai(om * s, 1)
        d2 = eA * sB * om * mp.airyai(om2 * s, 1)
        deriv = d1 + d2
        # equivalent form through Ai and Bi
        coef = (mp.cospi(params.total * n) - mp.expjpi((params.B - params.A) * n)) / (
            2j * mp.sinpi(params.total * n)
        )
        alt = coef * mp.airyai(s) + mp.airybi(s) / 2j
        alt_d = coef * mp.airyai(s, 1) + mp.airybi(s, 1) / 2j
        scale = max(abs(t1), abs(t2), abs(alt), mpf(1))
        if abs(val - alt) > scale * mpf(2) ** (-(prec - 10)):
            raise ArithmeticError("Airy combination forms disagree; internal bug")
        if abs(deriv - alt_d) > max(abs(alt_d), scale) * mpf(2) ** (-(prec - 10)):
            raise ArithmeticError("Airy derivative forms disagree; internal bug")
        return AiryValue(+val, +deriv, s)


# ---------------------------------------------------------------------------
# local frame at the lower branch point
# ---------------------------------------------------------------------------


class LocalFrame:
    """Conformal chart w -> (1.5 phase)^(2/3) on a validated disk.

    The chart sends the downward orthogonal arc to the positive reals, the
    central arc to the negative reals, and the other four local arcs to the
    remaining multiples of 60 degrees.  The argument of the phase is
    continued along a small circular arc plus a radial walk, flipping sheets
    across the central cut by nearest-candidate matching.
    """

    def __init__(self, geom: Geometry, phase: Phase, delta_target=None, f_tol=1e-20):
        self.geom = geom
        self.phase = phase
        self.zeta = geom.bp.zeta_minus
        self.f_tol = f_tol
        arc = geom.arcs[ArcKind.PERP_INF_LOWER]
        with mp.workprec(phase.prec):
            probe = arc.points[2] - self.zeta
            self.theta_inf = mp.arg(probe)
        self._f_cache: dict = {}
        self._delta = None
        self._delta_target = (
            mpf(delta_target) if delta_target is not None else mpf("0.25") * geom.scale
        )

    # -- tracked conformal variable -----------------------------------------
    def _w_at(self, rho, theta):
        """1.5 * phase at zeta- + rho e^{i theta}, nudging off the cut."""
        for bump in (0, 1, -1, 2, -2, 3, -3, 4, -4):
            th = theta + bump * mpf("0.04")
            p = self.zeta + rho * mp.expj(th)
            try:
                return mpf("1.5") * self.phase.phi(p, tol=self.f_tol).phi, th
            except (OnCut, CutAmbiguity):
                continue
        raise OnCut("could not nudge the chart sample off the cut")

    def conformal_map(self, z) -> mpc:
        """f(z) with the 2/3 root positive on the downward orthogonal arc."""
        z = to_mpc(z)
        key = repr(z)
        if key in self._f_cache:
            return self._f_cache[key]
        with mp.workprec(self.phase.prec):
            rho_t = abs(z - self.zeta)
            if rho_t == 0:
                return mpc(0)
            theta_t = mp.arg(z - self.zeta)
            rho0 = min(mpf("0.02") * self.geom.scale, rho_t)
            dtheta = theta_t - self.theta_inf
            while dtheta > mp.pi:
                dtheta -= 2 * mp.pi
            while dtheta <= -mp.pi:
                dtheta += 2 * mp.pi
            n_ang = max(1, int(abs(dtheta) / (mp.pi / 4)) + 1)
            samples = [
                (rho0, self.theta_inf + dtheta * k / n_ang) for k in range(n_ang + 1)
            ]
            rho = rho0
            while rho < rho_t:
                rho = min(rho * mpf("1.6"), rho_t)
                samples.append((rho, theta_t))
            arg_acc = None
            w_prev = None
            w_last = None
            for rho_s, th_s in samples[:-1]:
                w, _ = self._w_at(rho_s, th_s)
                arg_acc, w_prev = self._advance(arg_acc, w_prev, w)
            # final sample is z itself; the chart is continuous across the
            # central cut, so on it any approach side works (the sheet sign
            # is repaired by candidate matching)
            try:
                w = mpf("1.5") * self.phase.phi(z, tol=self.f_tol).phi
            except (OnCut, CutAmbiguity):
                side = mp.expj(mp.arg(z - self.zeta) + mp.pi / 2)
                w = mpf("1.5") * self.phase.phi(z, approach=side, tol=self.f_tol).phi
            arg_acc, w_prev = self._advance(arg_acc, w_prev, w)
            w_last = w_prev
            f = mp.cbrt(abs(w_last)) ** 2 * mp.expj(2 * arg_acc / 3)
            out = +f
        self._f_cache[key] = out
        return out

    def _advance(self, arg_acc, w_prev, w):
        if arg_acc is None:
            a0 = mp.arg(w)
            if abs(a0) > 2.2:  # must start near the positive-real image ray
                raise ArithmeticError("chart seed is not near the outgoing arc")
            return a0, w
        best = None
        for sgn in (1, -1):
            d = mp.arg((sgn * w) / w_prev)
            if best is None or abs(d) < abs(best[0]):
                best = (d, sgn)
        return arg_acc + best[0], best[1] * w

    # -- validated radius ----------------------------------------------------
    @property
    def delta(self) -> mpf:
        """Chart radius validated by a boundary winding/Jordan test."""
        if self._delta is None:
            self._delta = self._validate_radius()
        return self._delta

    def _validate_radius(self):
        with mp.workprec(self.phase.prec):
            cand = self._delta_target
            for _ in range(5):
                if self._boundary_ok(cand):
                    return cand
                cand = cand * mpf("0.75")
            raise OutsideConformalRadius("no conformal radius validated")

    def _boundary_ok(self, rho) -> bool:
        m = 36
        arg_acc = None
        w_prev = None
        args = []
        mags = []
        for k in range(m + 1):
            th = self.theta_inf + 2 * mp.pi * k / m
            try:
                w, _ = self._w_at(rho, th)
            except OnCut:
                return False
            arg_acc, w_prev = self._advance(arg_acc, w_prev, w)
            args.append(arg_acc)
            mags.append(abs(w_prev))
        total = args[-1] - args[0]
        if abs(total - 3 * mp.pi) > mpf("0.3"):
            return False
        # image polygon of f must not self-intersect (Jordan boundary)
        pts = [
            to_float(mp.cbrt(mags[k]) ** 2 * mp.expj(2 * args[k] / 3))
            for k in range(m + 1)
        ]
        for i in range(m):
            for j in range(i + 2, m):
                if i == 0 and j == m - 1:
                    continue
                if _segs_cross(pts[i], pts[i + 1], pts[j], pts[j + 1]):
                    return False
        return True


def _segs_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        v = (q - p).real * (r - p).imag - (q - p).imag * (r - p).real
        return (v > 0) - (v < 0)

    return (
        orient(a, b, c) * orient(a, b, d) < 0
        and orient(c, d, a) * orient(c, d, b) < 0
    )


def local_eval(
    z,
    n: int,
    params: ParameterPair,
    geom: Geometry,
    phase: Phase,
    frame: LocalFrame,
    c=None,
):
    """Airy-local approximation of the monic polynomial near the lower
    branch point, with O(1/n) factors set to 1."""
    with mp.workprec(phase.prec):
        z = to_mpc(z)
        check_resonance(params, n)
        if abs(z - frame.zeta) >= frame.delta:
            raise OutsideConformalRadius(
                f"|z - zeta-| = {float(abs(z - frame.zeta)):.4f} >= delta"
            )
        if c is None:
            c, _ = phase.log_constant()
        f = frame.conformal_map(z)
        s = mpf(n) ** (mpf(2) / 3) * f
        # quarter power of s via the tracked argument of f
        s_quarter = abs(s) ** mpf("0.25") * mp.expj(mp.arg(f) / 4)
        a = quarter_ratio(z, geom)
        av = airy_combination(s, params, n, prec=phase.prec)
        pref = fractional_prefactor(z, n, params, c, geom)
        bracket = (s_quarter / a) * av.a_val + (a / s_quarter) * av.a_deriv
        return +(pref * mp.sqrt(mp.pi) * 1j * bracket)


def local_eval_upper(z, n, params, geom, phase, frame, c=None):
    """Near the upper branch point, by conjugation symmetry (real A, B)."""
    val = local_eval(to_mpc(z).conjugate(), n, params, geom, phase, frame, c=c)
    return val.conjugate()
