"""Branch points, cut root, tracing, level sets, classification."""

import random

import numpy as np
import pytest
from mpmath import mp, mpc, mpf

from varjacobi import (
    ArcKind,
    Domain,
    Geometry,
    LevelComponent,
    Omega,
    ParameterPair,
    branch_points,
    trace_critical_trajectories,
    trace_orthogonal_trajectories,
)
from varjacobi.errors import (
    CutAmbiguity,
    DegenerateLevel,
    NotOnCut,
    ParameterError,
)
from varjacobi.numutil import point_polyline_distance, to_float


def test_parameter_validation():
    for A, B in [(0.5, -0.8), (-0.7, 0.2), (-0.2, -0.3), (-1.2, -0.3), (-0.5, -0.5)]:
        with pytest.raises(ParameterError):
            ParameterPair(mpf(A), mpf(B))
    with pytest.warns(UserWarning):
        ParameterPair(mpf("-0.9999999"), mpf("-0.3"))


def test_branch_points_reference_values():
    with mp.workprec(200):
        bp = branch_points(ParameterPair(mpf("-0.7"), mpf("-0.8")))
        # recomputed independently at high precision from the closed form
        assert abs(bp.zeta_plus.real - mpf("0.6")) < mpf("1e-40")
        assert abs(bp.zeta_plus.imag - mpf("2.7712812921102036696439141464")) < mpf("1e-25")
        bp2 = branch_points(ParameterPair(mpf("-0.75"), mpf("-0.75")))
        assert abs(bp2.zeta_plus.real) == 0
        assert abs(bp2.zeta_plus.imag - 2 * mp.sqrt(2)) < mpf("1e-50")


def test_branch_points_conjugate_invariant():
    rng = random.Random(7)
    with mp.workprec(80):
        for _ in range(25):
            A = mpf(rng.uniform(-0.999, -0.001))
            B = mpf(rng.uniform(max(-0.999, -1.999 - float(A)),
                                min(-0.001, -1.001 - float(A))))
            try:
                p = ParameterPair(A, B)
            except ParameterError:
                continue
            bp = branch_points(p)
            assert bp.zeta_minus == bp.zeta_plus.conjugate()
            assert bp.zeta_plus.imag > 0


def test_cut_root_values(geo78):
    with mp.workprec(geo78.prec):
        assert abs(geo78.cut_root(mpc(1)) - mpf("2.8")) < mpf("1e-25")
        assert abs(geo78.cut_root(mpc(-1)) - mpf("-3.2")) < mpf("1e-25")
        big = geo78.cut_root(mpc(10) ** 6) / mpf(10) ** 6
        assert abs(big - 1) < mpf("2e-6")


def test_cut_root_boundary(geo78):
    with mp.workprec(geo78.prec):
        xi = geo78.xi_center
        rp = geo78.cut_root_boundary(mpc(xi), "+")
        rm = geo78.cut_root_boundary(mpc(xi), "-")
        assert abs(rp + rm) < mpf("1e-20")
        # modulus is side-independent
        w = abs((xi - geo78.bp.zeta_plus) * (xi - geo78.bp.zeta_minus))
        assert abs(abs(rp) ** 2 - w) < mpf("1e-20")
        # the plus-side limit at the real crossing is real and positive
        # (forced by positivity of the induced measure with a downward dz)
        assert abs(rp.imag) < mpf("1e-18")
        assert rp.real > 0
        with pytest.raises(NotOnCut):
            geo78.cut_root_boundary(mpc(3, 3), "+")


def test_cut_root_ambiguity(geo78):
    xi = geo78.xi_center
    probe = mpc(xi) + mpc(0, 1) * geo78.root.resolution / 4
    with pytest.raises(CutAmbiguity):
        geo78.cut_root(probe)
    # a side hint resolves it
    v = geo78.cut_root(probe, side=+1)
    assert v.real > 0


def test_critical_trajectories_structure(geo78, pp78):
    xs = (geo78.xi_left, geo78.xi_center, geo78.xi_right)
    assert xs[0] < -1 < xs[1] < 1 < xs[2]
    # masses from the accumulated integrals match the closed forms
    with mp.workprec(geo78.prec):
        for kind, expect in [
            (ArcKind.LEFT, 1 + pp78.A),
            (ArcKind.CENTER, -1 - pp78.A - pp78.B),
            (ArcKind.RIGHT, 1 + pp78.B),
        ]:
            m = (pp78.mass_scale / (2j * mp.pi)) * geo78.arcs[kind].raw_integral
            assert abs(m - expect) < mpf("1e-12")
    # point spacing below the step bound, trace residual below tolerance
    for arc in (geo78.arcs[ArcKind.LEFT], geo78.arcs[ArcKind.CENTER]):
        gaps = np.abs(np.diff(arc.floats))
        assert gaps.max() <= float(geo78.step) * 1.0001
        assert arc.max_residual < float(geo78.tol)


def _chord_resolution(pts, scale):
    # a polyline can only witness symmetry down to its chord deviation
    gap = np.max(np.abs(np.diff(pts)))
    return gap * gap / (4 * scale)


def test_critical_conjugation_symmetry(geo78):
    for kind in (ArcKind.LEFT, ArcKind.CENTER, ArcKind.RIGHT):
        pts = geo78.arcs[kind].floats
        dev = max(point_polyline_distance(z, pts) for z in np.conj(pts[::5]))
        res = _chord_resolution(pts, float(geo78.scale))
        assert dev < 2 * res + 10 * float(geo78.tol)


def test_symmetric_case_center_crossing():
    p = ParameterPair(mpf("-0.75"), mpf("-0.75"))
    arcs = trace_critical_trajectories(p, tol=1e-9)
    xi_c = [a.xi for a in arcs if a.kind is ArcKind.CENTER][0]
    assert abs(xi_c) < 1e-8


def test_crossing_ordering_random_pairs():
    from varjacobi.errors import TraceDiverged

    rng = random.Random(123)
    done = 0
    while done < 100:
        A = rng.uniform(-0.95, -0.05)
        B = rng.uniform(-0.95, -0.05)
        if not (-1.95 < A + B < -1.05):
            continue
        p = ParameterPair(mpf(A), mpf(B))
        try:
            arcs = trace_critical_trajectories(
                p, step=mpf("0.06") * branch_points(p).scale, tol=1e-6
            )
        except TraceDiverged:
            # extreme corners of the region need the production step control
            arcs = trace_critical_trajectories(p, tol=1e-8)
        xs = sorted(float(a.xi) for a in arcs)
        assert xs[0] < -1 < xs[1] < 1 < xs[2]
        done += 1


def test_seed_directions_equal_angles(geo78):
    zeta = to_float(geo78.bp.zeta_minus)
    angles = []
    for kind in (ArcKind.LEFT, ArcKind.CENTER, ArcKind.RIGHT):
        arc = geo78.arcs[kind]
        pts = arc.floats if arc.endpoints[0] == "zeta-" else arc.floats[::-1]
        probe = pts[3] - zeta
        angles.append(np.angle(probe))
    angles = sorted(a % (2 * np.pi) for a in angles)
    gaps = [angles[1] - angles[0], angles[2] - angles[1],
            2 * np.pi - angles[2] + angles[0]]
    for g in gaps:
        assert abs(g - 2 * np.pi / 3) < np.pi / 180


def test_orthogonal_trajectories(geo78, pp78):
    arcs = geo78.arcs
    assert arcs[ArcKind.PERP_ONE_LOWER].endpoints == ("zeta-", "+1")
    assert abs(arcs[ArcKind.PERP_ONE_LOWER].floats[-1] - 1) < 1e-9
    assert abs(arcs[ArcKind.PERP_MINUS_ONE_UPPER].floats[-1] + 1) < 1e-9
    tail = arcs[ArcKind.PERP_INF_LOWER].floats
    assert np.all(np.diff(np.abs(tail[-20:])) > 0)  # leaves monotonically
    assert np.abs(tail[-1]) > 0.99 * 10 * (1 + abs(to_float(geo78.bp.zeta_plus)))
    # mirror symmetry between upper and lower families
    for lo, hi in [
        (ArcKind.PERP_ONE_LOWER, ArcKind.PERP_ONE_UPPER),
        (ArcKind.PERP_MINUS_ONE_LOWER, ArcKind.PERP_MINUS_ONE_UPPER),
        (ArcKind.PERP_INF_LOWER, ArcKind.PERP_INF_UPPER),
    ]:
        a, b = arcs[lo].floats, arcs[hi].floats
        dev = max(point_polyline_distance(z, b) for z in np.conj(a[:: max(1, len(a) // 40)]))
        res = _chord_resolution(np.concatenate([a, b]), float(geo78.scale))
        assert dev < 2 * res + 10 * float(geo78.tol)


def test_level_sets_structure(geo78, pp78):
    with mp.workprec(geo78.prec):
        outer = geo78.trace_level_set(mpf("0.1"))
        assert len(outer) == 1 and outer[0].component is LevelComponent.OUTER
        arr = outer[0].floats
        # counterclockwise and enclosing both poles
        area = 0.5 * np.sum(arr[:-1].real * arr[1:].imag - arr[1:].real * arr[:-1].imag)
        assert area > 0
        from varjacobi.numutil import segment_crossings

        for target in (1.0, -1.0):
            n = segment_crossings(complex(target, 0.0), complex(target, 1e6), arr)
            assert n % 2 == 1
        # the enclosed measure equals the residue at infinity
        m = (pp78.mass_scale / (2j * mp.pi)) * outer[0].raw_integral
        assert abs(m - pp78.mass_scale) < mpf("1e-8")

        inner = geo78.trace_level_set(mpf("-0.05"))
        comps = {a.component for a in inner}
        assert comps == {LevelComponent.NEAR_MINUS_ONE, LevelComponent.NEAR_PLUS_ONE}
        for a in inner:
            m = (pp78.mass_scale / (2j * mp.pi)) * a.raw_integral
            expect = -pp78.B if a.component is LevelComponent.NEAR_MINUS_ONE else -pp78.A
            assert abs(m - expect) < mpf("1e-8")
            inside = 1 if a.component is LevelComponent.NEAR_PLUS_ONE else -1
            n = segment_crossings(complex(inside, 0.0), complex(inside, 1e6), a.floats)
            assert n % 2 == 1

    with pytest.raises(DegenerateLevel):
        geo78.trace_level_set(0)
    with pytest.raises(DegenerateLevel):
        geo78.trace_level_set(1e-10)


def test_classification(geo78):
    cases = [
        (mpc(-8), Omega.INFINITY, Domain.I),
        (mpc(6), Omega.INFINITY, Domain.VI),
        (mpc(-1), Omega.MINUS_ONE, None),
        (mpc(1), Omega.PLUS_ONE, None),
        (mpc(-1, "0.01"), Omega.MINUS_ONE, None),
        (mpc("0.6", "3.5"), Omega.INFINITY, None),
    ]
    for z, omega, dom in cases:
        lab = geo78.classify_point(z)
        assert lab.omega is omega
        if dom is not None:
            assert lab.domain is dom
    lab = geo78.classify_point(mpc(-1, "0.01"))
    assert lab.domain in (Domain.II, Domain.III)


def test_classification_constant_on_components(geo78):
    rng = random.Random(5)
    arcs = [a.floats for a in geo78.arcs.values()]
    from varjacobi.numutil import segment_crossings

    checked = 0
    while checked < 40:
        z1 = complex(rng.uniform(-7, 6), rng.uniform(-4, 4))
        z2 = z1 + complex(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8))
        if any(segment_crossings(z1, z2, a) for a in arcs):
            continue
        if any(point_polyline_distance(q, a) < 0.05 for q in (z1, z2) for a in arcs):
            continue
        l1 = geo78.classify_point(z1)
        l2 = geo78.classify_point(z2)
        assert (l1.omega, l1.domain) == (l2.omega, l2.domain)
        checked += 1


def test_exports_deterministic(geo78):
    a = geo78.export_csv()
    b = geo78.export_csv()
    assert a == b
    assert a.splitlines()[0] == "kind,index,re,im"
    j1 = geo78.export_json()
    assert j1 == geo78.export_json()
    import json

    bundle = json.loads(j1)
    assert bundle["precision_bits"] == geo78.prec
    assert {arc["kind"] for arc in bundle["arcs"]} >= {"left", "center", "right"}
