"""Shared traced geometry/phase fixtures (session-scoped; tracing is the
expensive part and every module reuses the same parameter pairs)."""

import pytest
from mpmath import mp, mpf

from varjacobi import Geometry, LocalFrame, ParameterPair, Phase


def _pair(a, b):
    with mp.workprec(250):
        return ParameterPair(mpf(a), mpf(b))


@pytest.fixture(scope="session")
def pp78():
    return _pair("-0.7", "-0.8")


@pytest.fixture(scope="session")
def geo78(pp78):
    return Geometry(pp78)


@pytest.fixture(scope="session")
def phase78(geo78):
    return Phase(geo78)


# parameters for the convergence checks: no An, Bn or (A+B)n integer at the
# ladder n in {20, 40, 60, 80, 120, 160}
@pytest.fixture(scope="session")
def pp_conv():
    return _pair("-0.72", "-0.77")


@pytest.fixture(scope="session")
def geo_conv(pp_conv):
    return Geometry(pp_conv)


@pytest.fixture(scope="session")
def phase_conv(geo_conv):
    return Phase(geo_conv)


# parameters for the Airy-local checks: non-resonant at n in {80, 100, 160}
@pytest.fixture(scope="session")
def pp_loc():
    return _pair("-0.715", "-0.7752")


@pytest.fixture(scope="session")
def geo_loc(pp_loc):
    return Geometry(pp_loc)


@pytest.fixture(scope="session")
def phase_loc(geo_loc):
    return Phase(geo_loc)


@pytest.fixture(scope="session")
def frame_loc(geo_loc, phase_loc):
    return LocalFrame(geo_loc, phase_loc)
