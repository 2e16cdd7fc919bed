"""Exact reference oracle: rational Jacobi polynomials, zeros, orthogonality.

Coefficients are exact rationals (gmpy2.mpq) built from the double-binomial
sum, so every later evaluation starts from a loss-free representation no
matter how violently the coefficients swing.  Zeros come from simultaneous
Aberth-Ehrlich iteration on a precision ladder with certified residuals; the
non-Hermitian orthogonality is checked by quadrature over a concrete
double-loop contour against the closed gamma-function form.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field

from gmpy2 import mpq
from mpmath import mp, mpc, mpf

from .errors import (
    ConditionViolated,
    DegreeReduction,
    IdentityViolated,
    NoConverge,
    ParameterError,
    QuadNoConverge,
)
from .numutil import adaptive_segment, to_mpc
from .params import ParameterPair, branch_points


def _as_mpq(x) -> mpq:
    if isinstance(x, mpq):
        return x
    if isinstance(x, str):
        return mpq(x)
    if isinstance(x, float):
        return mpq(*x.as_integer_ratio())
    if isinstance(x, int):
        return mpq(x)
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return mpq(x.numerator, x.denominator)
    raise TypeError(f"cannot convert {type(x)} to an exact rational")


def _is_nonneg_int(q: mpq) -> bool:
    return q.denominator == 1 and q >= 0


@dataclass
class RationalPoly:
    """Exact-coefficient Jacobi polynomial, ascending degree order."""

    coeffs: list
    n: int
    alpha: mpq
    beta: mpq
    monic: bool = False
    reduced_k: int | None = None

    _mpf_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d > 0 and self.coeffs[d] == 0:
            d -= 1
        return d

    def to_monic(self) -> "RationalPoly":
        lc = self.coeffs[self.degree]
        if lc == 0:
            raise ZeroDivisionError("zero polynomial cannot be made monic")
        return RationalPoly(
            [c / lc for c in self.coeffs[: self.degree + 1]],
            self.n, self.alpha, self.beta, monic=True, reduced_k=self.reduced_k,
        )

    def eval_exact(self, x) -> mpq:
        x = _as_mpq(x)
        acc = mpq(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def coeffs_mpf(self, prec: int):
        """Coefficients rounded once per precision level."""
        if prec not in self._mpf_cache:
            with mp.workprec(prec):
                self._mpf_cache[prec] = [
                    mpf(c.numerator) / mpf(c.denominator) for c in self.coeffs
                ]
        return self._mpf_cache[prec]

    def coeff_strings(self) -> list:
        return [f"{c.numerator}/{c.denominator}" for c in self.coeffs]


def _binom_row(x: mpq, n: int):
    """Generalized binomials C(x, j) for j = 0..n, exact."""
    row = [mpq(1)]
    for j in range(1, n + 1):
        row.append(row[-1] * (x - (j - 1)) / j)
    return row


def build_jacobi(n: int, alpha, beta, allow_reduction: bool = False) -> RationalPoly:
    """Jacobi polynomial with exact rational coefficients.

    Uses the double-binomial sum over (z-1)^s (z+1)^(n-s), evaluated by a
    Horner scheme in s so the cost stays quadratic in n.  When
    alpha + beta = -n-k-1 for some k in 0..n-1 the degree drops; that case
    raises DegreeReduction unless ``allow_reduction`` is set.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    alpha = _as_mpq(alpha)
    beta = _as_mpq(beta)
    if n == 0:
        return RationalPoly([mpq(1)], 0, alpha, beta)
    ba = _binom_row(alpha + n, n)
    bb = _binom_row(beta + n, n)
    a_coef = [ba[n - s] * bb[s] for s in range(n + 1)]
    # Pascal rows for (z+1)^k
    pascal = [[1]]
    for k in range(1, n + 1):
        prev = pascal[-1]
        pascal.append(
            [1] + [prev[i - 1] + prev[i] for i in range(1, k)] + [1]
        )
    acc = [a_coef[n]]
    for s in range(n - 1, -1, -1):
        shifted = [mpq(0)] + acc
        acc = [shifted[i] - (acc[i] if i < len(acc) else 0) for i in range(len(acc) + 1)]
        row = pascal[n - s]
        for i, b in enumerate(row):
            acc[i] += a_coef[s] * b
    two_n = mpq(2) ** n
    coeffs = [c / two_n for c in acc]
    poly = RationalPoly(coeffs, n, alpha, beta)
    if coeffs[n] == 0:
        k_q = -(alpha + beta) - n - 1
        if not (k_q.denominator == 1 and 0 <= k_q <= n - 1):
            raise ArithmeticError("leading coefficient vanished unexpectedly")
        k = int(k_q)
        factor = mpq(1)
        for j in range(k + 1, n + 1):
            factor *= alpha + j
        fact_ratio = mpq(1)
        for j in range(k + 1, n + 1):
            fact_ratio /= j
        factor *= fact_ratio
        reduced = build_jacobi(k, alpha, beta, allow_reduction=True)
        if allow_reduction:
            poly.reduced_k = k
            return poly
        raise DegreeReduction(k, factor, reduced)
    return poly


def eval_poly(p: RationalPoly, z, prec: int = 128):
    """Horner evaluation at ``prec`` bits (plus guard), with an error bound.

    The bound is the usual running condition-number estimate
    eps * sum |c_i| |z|^i * 2i.
    """
    work = prec + 30
    with mp.workprec(work):
        z = to_mpc(z)
        cs = p.coeffs_mpf(work)
        acc = mpc(0)
        cond = mpf(0)
        az = abs(z)
        for c in reversed(cs):
            acc = acc * z + c
            cond = cond * az + abs(c)
        bound = cond * mpf(2) ** (-prec) * 2 * max(1, p.degree)
    return +acc, +bound


def _eval_pair(coeffs, z):
    """Value and derivative by a single Horner sweep."""
    acc = mpc(0)
    dacc = mpc(0)
    for c in reversed(coeffs):
        dacc = dacc * z + acc
        acc = acc * z + c
    return acc, dacc


@dataclass
class ZeroSet:
    """All zeros of a monic polynomial with a certified residual bound."""

    zeros: list
    residuals: list
    residual_bound: mpf
    precision_bits: int
    meta: dict = field(default_factory=dict)

    def export_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "residual"])
        with mp.workprec(self.precision_bits):
            digits = mp.dps
            for z, r in zip(self.zeros, self.residuals):
                w.writerow(
                    [mp.nstr(z.real, digits), mp.nstr(z.imag, digits), mp.nstr(r, 8)]
                )
        return buf.getvalue()

    def export_json(self) -> str:
        with mp.workprec(self.precision_bits):
            digits = mp.dps
            payload = dict(self.meta)
            payload.update(
                {
                    "precision_bits": self.precision_bits,
                    "residual_bound": mp.nstr(self.residual_bound, 8),
                    "zeros": [
                        [mp.nstr(z.real, digits), mp.nstr(z.imag, digits)]
                        for z in self.zeros
                    ],
                }
            )
        return json.dumps(payload, indent=1)


def _initial_radius(p: RationalPoly) -> float:
    """Circle radius for the initial guesses: 1 + |upper branch point| when
    the scaled parameters fall in the admissible region, otherwise a
    Fujiwara-style coefficient bound."""
    n = p.degree
    try:
        with mp.workprec(64):
            lim = ParameterPair(
                mpf(p.alpha.numerator) / mpf(p.alpha.denominator) / n,
                mpf(p.beta.numerator) / mpf(p.beta.denominator) / n,
            )
            return 1 + float(abs(branch_points(lim).zeta_plus))
    except (ParameterError, ZeroDivisionError):
        pass
    cs = p.coeffs_mpf(64)
    lead = abs(cs[-1])
    bound = 0.0
    for j in range(n):
        if cs[j] != 0:
            bound = max(bound, float(abs(cs[j]) / lead) ** (1.0 / (n - j)))
    return 2.0 * bound + 1.0


def find_zeros(p: RationalPoly, prec: int = 512, seed: int = 0) -> ZeroSet:
    """All zeros by Aberth-Ehrlich iteration on a precision ladder.

    Starts at max(prec, 512) bits for large degrees, doubles on stagnation
    (at most six times), and certifies the result through the relative
    residual |p(z)| / sum |c_i||z|^i evaluated from the exact coefficients.
    """
    mono = p if p.monic else p.to_monic()
    n = mono.degree
    if n == 0:
        return ZeroSet([], [], mpf(0), prec, {})
    r0 = _initial_radius(mono)
    rng = random.Random(seed)
    jit = [rng.uniform(0.0, 0.25 / n) for _ in range(n)]

    work = max(prec, 512 if n >= 40 else 256)
    zs = None
    for _ in range(7):
        with mp.workprec(work + 64):
            cs = mono.coeffs_mpf(work + 64)
            if zs is None:
                zs = [
                    r0 * mp.expjpi(2 * (mpf(i) + mpf("0.31") + jit[i]) / n)
                    for i in range(n)
                ]
            else:
                zs = [mpc(z) for z in zs]
            target = mpf(2) ** (-int(work * 3 / 4))
            step_floor = mpf(2) ** (-(work + 16))
            coarse = mpf(2) ** (-(work // 3))
            max_it = 120 + work // 3
            best_w = mp.inf
            stall = 0
            for _it in range(max_it):
                max_w = mpf(0)
                for i in range(n):
                    pv, dv = _eval_pair(cs, zs[i])
                    if pv == 0:
                        continue
                    if dv == 0:
                        zs[i] += mpf(2) ** (-work // 2)
                        continue
                    nr = pv / dv
                    s = mpc(0)
                    for j in range(n):
                        if j != i:
                            s += 1 / (zs[i] - zs[j])
                    denom = 1 - nr * s
                    w = nr if denom == 0 else nr / denom
                    zs[i] -= w
                    aw = abs(w)
                    if aw > max_w:
                        max_w = aw
                if max_w < step_floor:
                    break
                if max_w < best_w / 2:
                    best_w = max_w
                    stall = 0
                elif max_w < coarse:
                    stall += 1
                    if stall >= 4:
                        break
            # certify from the exact coefficients
            residuals = []
            worst = mpf(0)
            for z in zs:
                acc = mpc(0)
                cond = mpf(0)
                az = abs(z)
                for c in reversed(cs):
                    acc = acc * z + c
                    cond = cond * az + abs(c)
                rres = abs(acc) / cond
                residuals.append(rres)
                if rres > worst:
                    worst = rres
            if worst <= target:
                order = sorted(
                    range(n),
                    key=lambda i: (float(mp.arg(zs[i])), float(abs(zs[i]))),
                )
                zeros = [+zs[i] for i in order]
                residuals = [+residuals[i] for i in order]
                return ZeroSet(
                    zeros, residuals, +worst, work,
                    {"n": mono.n, "alpha": str(mono.alpha), "beta": str(mono.beta),
                     "seed": seed},
                )
        work *= 2
    raise NoConverge(f"residual bound {float(worst)} above target after ladder")


# ---------------------------------------------------------------------------
# non-Hermitian orthogonality on the double-loop contour
# ---------------------------------------------------------------------------


class _Piece:
    """Smooth contour piece with continuous weight-argument bookkeeping.

    theta1/theta2 are the accumulated arguments of (1-t) and (1+t) at the
    piece start; inside a piece the increment is principal (each piece
    subtends less than a half turn around either singularity).
    """

    def __init__(self, kind, a, b, center=None):
        self.kind = kind  # 'seg' or 'arc'
        self.a = a
        self.b = b
        self.center = center
        self.theta1 = None
        self.theta2 = None

    def point(self, u):
        if self.kind == "seg":
            return self.a + (self.b - self.a) * u, (self.b - self.a)
        phi0 = mp.arg(self.a - self.center)
        dphi = self.ang_span
        rad = abs(self.a - self.center)
        t = self.center + rad * mp.expj(phi0 + dphi * u)
        return t, rad * 1j * dphi * mp.expj(phi0 + dphi * u)

    def args_at(self, t):
        d1 = mp.arg((1 - t) / self.w1_start)
        d2 = mp.arg((1 + t) / self.w2_start)
        return self.theta1 + d1, self.theta2 + d2


def _contour_pieces(xi, rho):
    """Double-loop contour: both poles circled positively, then negatively."""
    pieces = []

    def seg(a, b):
        pieces.append(_Piece("seg", mpc(a), mpc(b)))

    def circle(center, start_ang, turn):
        # eight arcs per full turn keep each piece under a half turn
        steps = 8
        for i in range(steps):
            a0 = start_ang + turn * i / steps
            a1 = start_ang + turn * (i + 1) / steps
            p = _Piece(
                "arc",
                center + rho * mp.expj(a0),
                center + rho * mp.expj(a1),
                center=mpc(center),
            )
            p.ang_span = a1 - a0
            pieces.append(p)

    p1 = 1 - rho
    q1 = -1 + rho
    seg(xi, p1)
    circle(1, mp.pi, 2 * mp.pi)
    seg(p1, xi)
    seg(xi, q1)
    circle(-1, 0, 2 * mp.pi)
    seg(q1, xi)
    seg(xi, p1)
    circle(1, mp.pi, -2 * mp.pi)
    seg(p1, xi)
    seg(xi, q1)
    circle(-1, 0, -2 * mp.pi)
    seg(q1, xi)
    return pieces


@dataclass(frozen=True)
class OrthogonalityResult:
    lhs: mpc
    rhs: mpc
    scale: mpf  # contour length times max |integrand|
    quad_error: mpf


def orthogonality_check(n, alpha, beta, k, tol=1e-30, prec=None, xi=0) -> OrthogonalityResult:
    """Moment of t^k against the Jacobi weight over the double-loop contour.

    The left side is quadrature with the weight branch continued along the
    path from a positive value at the junction xi in (-1, 1); the right side
    is the closed gamma-function form (zero for k < n).
    """
    alpha = _as_mpq(alpha)
    beta = _as_mpq(beta)
    for bad, name in (
        (-n - alpha - beta, "-n-alpha-beta"),
        (n + alpha, "n+alpha"),
        (n + beta, "n+beta"),
    ):
        if _is_nonneg_int(bad):
            raise ConditionViolated(f"{name} is a nonnegative integer")
    if not 0 <= k <= n:
        raise ValueError("k out of range")
    p = build_jacobi(n, alpha, beta)
    prec = prec or max(192, int(-mp.log(mpf(tol), 2)) + 120)
    with mp.workprec(prec):
        af = mpf(alpha.numerator) / mpf(alpha.denominator)
        bf = mpf(beta.numerator) / mpf(beta.denominator)
        cs = p.coeffs_mpf(prec)
        pieces = _contour_pieces(mpf(xi), mpf("0.5"))
        th1, th2 = mpf(0), mpf(0)
        total = mpc(0)
        err = mpf(0)
        max_f = mpf(0)
        length = mpf(0)
        for pc in pieces:
            pc.theta1, pc.theta2 = th1, th2
            pc.w1_start = 1 - pc.a
            pc.w2_start = 1 + pc.a

            def f(u, _pc=pc):
                t, dt = _pc.point(u)
                a1, a2 = _pc.args_at(t)
                w = mp.exp(
                    af * (mp.log(abs(1 - t)) + 1j * a1)
                    + bf * (mp.log(abs(1 + t)) + 1j * a2)
                )
                val = t**k * _eval_pair(cs, t)[0] * w
                nonlocal_max[0] = max(nonlocal_max[0], abs(val))
                return val * dt

            nonlocal_max = [mpf(0)]
            try:
                v, e = adaptive_segment(f, mpf(0), mpf(1), mpf(tol) / len(pieces))
            except RuntimeError as exc:
                raise QuadNoConverge(str(exc)) from exc
            total += v
            err += e
            max_f = max(max_f, nonlocal_max[0])
            endpt, _ = pc.point(mpf(1))
            d1 = mp.arg((1 - endpt) / pc.w1_start)
            d2 = mp.arg((1 + endpt) / pc.w2_start)
            th1, th2 = pc.theta1 + d1, pc.theta2 + d2
            length += abs(pc.b - pc.a) if pc.kind == "seg" else abs(pc.ang_span) * mpf("0.5")
        # closed branch sanity: the weight must return to its start sheet
        if abs(th1) > mpf("1e-20") or abs(th2) > mpf("1e-20"):
            raise QuadNoConverge("weight branch failed to close along the contour")
        if k < n:
            rhs = mpc(0)
        else:
            s = af + bf
            rhs = (
                -mp.pi**2
                * mpf(2) ** (n + s + 3)
                * mp.expjpi(s)
                / (mp.gamma(2 * n + s + 2) * mp.gamma(-n - af) * mp.gamma(-n - bf))
            )
        return OrthogonalityResult(+total, +rhs, +(length * max_f), +err)


# ---------------------------------------------------------------------------
# exact identities
# ---------------------------------------------------------------------------


def _poly_mul(a, b):
    out = [mpq(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def identity_suite(n: int, alpha, beta) -> dict:
    """Exact verification of the classical transformation and integer cases.

    Every applicable identity is checked in rational arithmetic (pointwise at
    ten rational abscissas for the transformations, coefficient-wise for the
    integer-parameter factorizations).  Raises IdentityViolated on any
    mismatch; inapplicable identities are reported as skipped.
    """
    alpha = _as_mpq(alpha)
    beta = _as_mpq(beta)
    report = {}
    points = [mpq(j) for j in range(3, 23, 2)]

    if alpha + beta < -2 * n and beta > -1:
        p = build_jacobi(n, alpha, beta, allow_reduction=True)
        q = build_jacobi(n, -2 * n - alpha - beta - 1, beta, allow_reduction=True)
        for x in points:
            lhs = p.eval_exact(x)
            rhs = ((1 - x) / 2) ** n * q.eval_exact((x + 3) / (x - 1))
            if lhs != rhs:
                raise IdentityViolated(f"argument transformation (1-x) at x={x}")
        report["transformation_minus"] = "verified"
    else:
        report["transformation_minus"] = "skipped (needs alpha+beta < -2n, beta > -1)"

    if alpha + beta < -2 * n and alpha > -1:
        p = build_jacobi(n, alpha, beta, allow_reduction=True)
        q = build_jacobi(n, alpha, -2 * n - alpha - beta - 1, allow_reduction=True)
        for x in points:
            lhs = p.eval_exact(x)
            rhs = ((1 + x) / 2) ** n * q.eval_exact((3 - x) / (x + 1))
            if lhs != rhs:
                raise IdentityViolated(f"argument transformation (1+x) at x={x}")
        report["transformation_plus"] = "verified"
    else:
        report["transformation_plus"] = "skipped (needs alpha+beta < -2n, alpha > -1)"

    if alpha.denominator == 1 and -n <= alpha <= -1:
        k = int(-alpha)
        p = build_jacobi(n, alpha, beta, allow_reduction=True)
        q = build_jacobi(n - k, mpq(k), beta, allow_reduction=True)
        factor = mpq(1)
        for j in range(k):
            factor *= n + beta - j
        for j in range(n - k + 1, n + 1):
            factor /= j
        # ((z-1)/2)^k coefficients
        shifted = [
            mpq((-1) ** (k - i)) * _binom_int(k, i) / mpq(2) ** k
            for i in range(k + 1)
        ]
        rhs = _poly_mul(shifted, q.coeffs)
        rhs = [factor * c for c in rhs]
        lhs = list(p.coeffs) + [mpq(0)] * (len(rhs) - len(p.coeffs))
        rhs = rhs + [mpq(0)] * (len(lhs) - len(rhs))
        if lhs != rhs:
            raise IdentityViolated("integer negative alpha factorization")
        report["integer_alpha"] = "verified"
    else:
        report["integer_alpha"] = "skipped (needs alpha a negative integer <= n)"

    ks = -(alpha + beta) - n - 1
    if ks.denominator == 1 and 0 <= ks <= n - 1:
        k = int(ks)
        p = build_jacobi(n, alpha, beta, allow_reduction=True)
        q = build_jacobi(k, alpha, beta, allow_reduction=True)
        factor = mpq(1)
        for j in range(k + 1, n + 1):
            factor *= (alpha + j) / j
        rhs = [factor * c for c in q.coeffs]
        lhs = list(p.coeffs[: k + 1])
        if any(c != 0 for c in p.coeffs[k + 1 :]) or lhs != rhs:
            raise IdentityViolated("degree-reduction factorization")
        report["degree_reduction"] = "verified"
    else:
        report["degree_reduction"] = "skipped (needs alpha+beta = -n-k-1)"

    return report


def _binom_int(n: int, k: int) -> mpq:
    out = mpq(1)
    for j in range(k):
        out = out * (n - j) / (j + 1)
    return out
