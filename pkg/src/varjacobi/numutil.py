"""Numeric plumbing: precision handling, Gauss-Legendre panels, polyline tests.

All heavy arithmetic runs on mpmath ``mpf``/``mpc`` under an explicit working
precision in bits.  Plain ``complex``/numpy floats appear only in topological
side tests and plotting, never in reported values.
"""

from __future__ import annotations

import numpy as np
from mpmath import mp, mpc, mpf

# extra bits carried by internal computations on top of the caller's request
GUARD_BITS = 30


def to_mpc(z) -> mpc:
    if isinstance(z, mpc):
        return z
    if isinstance(z, (tuple, list)) and len(z) == 2:
        return mpc(z[0], z[1])
    return mpc(z)


def to_float(z) -> complex:
    """Lossy view of an mp number for geometric/topological tests only."""
    z = to_mpc(z)
    return complex(float(z.real), float(z.imag))


def bits_for_tol(tol: float, extra: int = GUARD_BITS) -> int:
    """Working precision that resolves ``tol`` with guard bits to spare."""
    t = mpf(tol)
    if t <= 0:
        raise ValueError("tolerance must be positive")
    return max(64, int(-mp.log(t, 2)) + extra + 24)


# ---------------------------------------------------------------------------
# Gauss-Legendre panels
# ---------------------------------------------------------------------------

_GL_CACHE: dict = {}


def gauss_legendre(m: int, prec: int):
    """Nodes and weights of m-point Gauss-Legendre on [-1, 1] at ``prec`` bits.

    Computed once per (m, precision bucket) by Newton iteration on the
    Legendre recurrence and cached.
    """
    bucket = ((prec + 63) // 64) * 64
    key = (m, bucket)
    if key in _GL_CACHE:
        return _GL_CACHE[key]
    with mp.workprec(bucket + 40):
        xs, ws = [], []
        for i in range(1, m + 1):
            # Chebyshev-like initial guess
            x = mp.cos(mp.pi * (i - mpf(1) / 4) / (m + mpf(1) / 2))
            for _ in range(60):
                p0, p1 = mpf(1), x
                for k in range(2, m + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = m * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mpf(2) ** (-(bucket + 20)):
                    break
            p0, p1 = mpf(1), x
            for k in range(2, m + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = m * (x * p1 - p0) / (x * x - 1)
            xs.append(x)
            ws.append(2 / ((1 - x * x) * dp * dp))
    _GL_CACHE[key] = (xs, ws)
    return xs, ws


def gl_segment(f, a, b, m: int, with_abs: bool = False):
    """Single m-point Gauss-Legendre pass of ``f`` along the segment [a, b].

    With ``with_abs`` also returns the absolute-value sum, which bounds the
    rounding floor of the panel.
    """
    xs, ws = gauss_legendre(m, mp.prec)
    a = to_mpc(a)
    b = to_mpc(b)
    mid = (a + b) / 2
    half = (b - a) / 2
    total = mpc(0)
    abs_total = mpf(0)
    for x, w in zip(xs, ws):
        v = w * f(mid + half * x)
        total += v
        if with_abs:
            abs_total += abs(v)
    if with_abs:
        return total * half, abs_total * abs(half)
    return total * half


def adaptive_segment(f, a, b, tol, max_depth: int = 40, _lo=24, _hi=48):
    """Adaptive bisection with a GL(24)/GL(48) embedded error estimate.

    Panel budgets halve with depth (sum of accepted budgets <= tol); a panel
    is also accepted once its error estimate reaches the rounding floor of
    its absolute-value sum.  Returns (value, error_bound).  Raises
    RuntimeError at depth exhaustion; callers wrap it into the
    domain-specific error type.
    """
    stack = [(to_mpc(a), to_mpc(b), 0)]
    total = mpc(0)
    errsum = mpf(0)
    while stack:
        x0, x1, depth = stack.pop()
        coarse = gl_segment(f, x0, x1, _lo)
        fine, abs_fine = gl_segment(f, x0, x1, _hi, with_abs=True)
        err = abs(fine - coarse)
        if err <= tol * mpf(0.5) ** depth or err <= mp.eps * abs_fine * 16:
            total += fine
            errsum += err
            continue
        if depth >= max_depth:
            raise RuntimeError("quadrature depth exhausted")
        xm = (x0 + x1) / 2
        stack.append((x0, xm, depth + 1))
        stack.append((xm, x1, depth + 1))
    return total, errsum


# ---------------------------------------------------------------------------
# Float polyline helpers (topology only)
# ---------------------------------------------------------------------------


def as_float_array(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        return points.astype(np.complex128, copy=False)
    return np.array([to_float(p) for p in points], dtype=np.complex128)


def segment_crossings(p: complex, q: complex, poly: np.ndarray) -> int:
    """Number of proper crossings of segment pq with a polyline.

    Uses the standard orientation test; endpoint grazes count as crossings,
    which is acceptable because callers keep clearance from the curves.
    """
    if len(poly) < 2:
        return 0
    a = poly[:-1]
    b = poly[1:]
    d1 = q - p
    d2 = b - a

    def cross(u, v):
        return np.real(u) * np.imag(v) - np.imag(u) * np.real(v)

    denom = cross(d1, d2)
    t_num = cross(a - p, d2)
    s_num = cross(a - p, d1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = t_num / denom
        s = s_num / denom
    hit = (denom != 0) & (t >= 0.0) & (t <= 1.0) & (s >= 0.0) & (s <= 1.0)
    return int(np.count_nonzero(hit))


def point_polyline_distance(z: complex, poly: np.ndarray) -> float:
    """Euclidean distance from a point to a polyline."""
    if len(poly) == 0:
        return float("inf")
    if len(poly) == 1:
        return abs(z - poly[0])
    a = poly[:-1]
    b = poly[1:]
    d = b - a
    L2 = (d * d.conjugate()).real
    L2 = np.where(L2 == 0, 1.0, L2)
    t = ((z - a) * d.conjugate()).real / L2
    t = np.clip(t, 0.0, 1.0)
    proj = a + t * d
    return float(np.min(np.abs(z - proj)))


def polyline_arclength(poly: np.ndarray) -> np.ndarray:
    """Cumulative arclength at each vertex (float)."""
    if len(poly) == 0:
        return np.zeros(0)
    seg = np.abs(np.diff(poly))
    return np.concatenate([[0.0], np.cumsum(seg)])


def project_to_polyline(z: complex, poly: np.ndarray):
    """(distance, arclength position) of the closest point on a polyline."""
    a = poly[:-1]
    b = poly[1:]
    d = b - a
    L = np.abs(d)
    L2 = np.where(L == 0, 1.0, L * L)
    t = ((z - a) * d.conjugate()).real / L2
    t = np.clip(t, 0.0, 1.0)
    proj = a + t * d
    dist = np.abs(z - proj)
    i = int(np.argmin(dist))
    s = polyline_arclength(poly)
    return float(dist[i]), float(s[i] + t[i] * L[i])
