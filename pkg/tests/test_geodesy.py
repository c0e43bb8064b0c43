import math

import numpy as np
import pytest

from leoloc.geodesy import (EARTH, EcefVector, GeodeticPosition,
                            ecef_to_eci, ecef_to_geodetic, eci_to_ecef,
                            enu_basis, geodetic_to_ecef,
                            slant_range_from_height)

RE = EARTH.radius


def test_ecef_axis_alignment():
    v = geodetic_to_ecef(GeodeticPosition(0.0, 0.0, 0.0))
    assert v.to_array() == pytest.approx([RE, 0.0, 0.0], abs=1e-6)


def test_ecef_pole():
    v = geodetic_to_ecef(GeodeticPosition(math.pi / 2, 0.3, 0.0))
    assert v.to_array() == pytest.approx([0.0, 0.0, RE], abs=1e-6)


def test_ecef_norm_is_radius_plus_alt():
    p = GeodeticPosition(math.radians(40.1), math.radians(-88.2), 200.0)
    assert geodetic_to_ecef(p).norm() == pytest.approx(RE + 200.0, rel=1e-12)


def test_geodetic_round_trip_value():
    p = GeodeticPosition(math.radians(40.1), math.radians(-88.2), 200.0)
    q = ecef_to_geodetic(geodetic_to_ecef(p))
    assert q.lat == pytest.approx(p.lat, abs=1e-9)
    assert q.lon == pytest.approx(p.lon, abs=1e-9)
    assert q.alt == pytest.approx(p.alt, abs=1e-3)


def test_geodetic_round_trip_random(rng):
    for _ in range(200):
        p = GeodeticPosition(rng.uniform(-math.pi / 2 + 1e-3, math.pi / 2 - 1e-3),
                             rng.uniform(-math.pi + 1e-6, math.pi),
                             rng.uniform(0.0, 3000.0))
        q = ecef_to_geodetic(geodetic_to_ecef(p))
        assert q.lat == pytest.approx(p.lat, abs=1e-9)
        assert q.lon == pytest.approx(p.lon, abs=1e-9)


def test_enu_basis_equator_prime_meridian():
    e, n, u = enu_basis(GeodeticPosition(0.0, 0.0, 0.0))
    assert u == pytest.approx([1.0, 0.0, 0.0], abs=1e-12)
    assert e == pytest.approx([0.0, 1.0, 0.0], abs=1e-12)
    assert n == pytest.approx([0.0, 0.0, 1.0], abs=1e-12)


def test_enu_up_vector_45_90():
    s = math.sqrt(2.0) / 2.0
    _, _, u = enu_basis(GeodeticPosition(math.radians(45.0), math.radians(90.0), 0.0))
    assert u == pytest.approx([0.0, s, s], abs=1e-12)


def test_enu_orthonormal_right_handed(rng):
    for _ in range(1000):
        p = GeodeticPosition(rng.uniform(-math.pi / 2, math.pi / 2),
                             rng.uniform(-math.pi, math.pi), 0.0)
        e, n, u = enu_basis(p)
        for v in (e, n, u):
            assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
        assert abs(np.dot(e, n)) < 1e-12
        assert abs(np.dot(e, u)) < 1e-12
        assert abs(np.dot(n, u)) < 1e-12
        # (e, n, u) ordering: e x n = u
        assert np.cross(e, n) == pytest.approx(u, abs=1e-12)


def test_eci_zero_rotation_identity():
    v = EcefVector(1234.5, -6789.0, 2468.0)
    w = ecef_to_eci(v, 0.0)
    assert w.to_array() == pytest.approx(v.to_array(), rel=1e-15)


def test_eci_preserves_norm_and_round_trips(rng):
    for _ in range(200):
        v = EcefVector(*rng.uniform(-7e6, 7e6, size=3))
        t = rng.uniform(-1e4, 1e4)
        w = ecef_to_eci(v, t)
        assert w.norm() == pytest.approx(v.norm(), rel=1e-12)
        back = eci_to_ecef(w, t)
        assert back.to_array() == pytest.approx(v.to_array(), rel=1e-9)


def test_slant_range_zenith_collapses_to_height():
    assert slant_range_from_height(math.pi / 2, 550e3) == pytest.approx(550e3, rel=1e-12)


def test_slant_range_horizon_value():
    # the sin term vanishes at theta = 0: r = sqrt(2 Re h + h^2)
    r = slant_range_from_height(0.0, 550e3)
    expected = math.sqrt(2 * RE * 550e3 + 550e3 ** 2)
    assert r == pytest.approx(expected, rel=1e-12)
    assert r == pytest.approx(2703.8e3, rel=1e-3)


def test_slant_range_quadratic_identity(rng):
    theta = rng.uniform(0.0, math.pi / 2, size=1000)
    h = rng.uniform(200e3, 2000e3, size=1000)
    r = slant_range_from_height(theta, h)
    resid = np.abs(r ** 2 + 2 * RE * np.sin(theta) * r - 2 * RE * h - h ** 2)
    assert np.all(resid < 1e-6 * r)


def test_slant_range_monotone():
    theta = np.linspace(0.0, math.pi / 2, 200)
    r = slant_range_from_height(theta, 550e3)
    assert np.all(np.diff(r) < 0)
    h = np.linspace(200e3, 2000e3, 200)
    r = slant_range_from_height(math.radians(40.0), h)
    assert np.all(np.diff(r) > 0)
