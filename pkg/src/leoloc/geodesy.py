"""Spherical-Earth coordinate frames and slant-range geometry.

Conventions used everywhere in this package:

* ECEF: right-handed, x through (lat=0, lon=0), z through the north pole.
* ECI: ECEF rotated about z by the Earth rotation angle theta(t) =
  omega * t + theta0, i.e. eci = Rz(+theta) @ ecef.
* ENU: local tangent basis at a station, component order (east, north, up),
  with east x north = up.
* Azimuth is measured clockwise from north, elevation up from the horizon.

A spherical Earth is used deliberately: the downstream height search is
insensitive to the oblateness term at the accuracy this system targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_EARTH_RADIUS = 6371.0e3        # mean radius [m]
_EARTH_GM = 3.986004418e14      # gravitational parameter [m^3/s^2]
_EARTH_OMEGA = 7.2921159e-5     # rotation rate [rad/s]

SPEED_OF_LIGHT = 299792458.0    # [m/s]


@dataclass(frozen=True)
class EarthModel:
    """Spherical Earth constants. Defaults are the values used throughout."""

    radius: float = _EARTH_RADIUS
    gm: float = _EARTH_GM
    omega: float = _EARTH_OMEGA


EARTH = EarthModel()


@dataclass(frozen=True)
class GeodeticPosition:
    """Spherical geodetic coordinates: latitude/longitude [rad], altitude [m]."""

    lat: float
    lon: float
    alt: float = 0.0


class _FrameVector:
    """Common behaviour for frame-tagged 3-vectors.

    Arithmetic is only defined between vectors of the same frame; mixing
    frames raises TypeError instead of silently producing garbage.
    """

    __slots__ = ("x", "y", "z")

    def __init__(self, x: float, y: float, z: float):
        object.__setattr__(self, "x", float(x))
        object.__setattr__(self, "y", float(y))
        object.__setattr__(self, "z", float(z))

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __repr__(self):
        return f"{type(self).__name__}({self.x!r}, {self.y!r}, {self.z!r})"

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and (self.x, self.y, self.z) == (other.x, other.y, other.z)
        )

    def __hash__(self):
        return hash((type(self).__name__, self.x, self.y, self.z))

    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(
                f"frame mismatch: {type(self).__name__} and {type(other).__name__}"
            )

    def __add__(self, other):
        self._check(other)
        return type(self)(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other):
        self._check(other)
        return type(self)(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, scalar: float):
        return type(self)(self.x * scalar, self.y * scalar, self.z * scalar)

    __rmul__ = __mul__

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(a[0], a[1], a[2])

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


class EcefVector(_FrameVector):
    """Earth-centred Earth-fixed position [m]."""


class EciVector(_FrameVector):
    """Earth-centred inertial position [m]."""


class EnuVector(_FrameVector):
    """Local east/north/up offset [m], components ordered (e, n, u)."""


def geodetic_to_ecef(pos: GeodeticPosition, earth: EarthModel = EARTH) -> EcefVector:
    """Map spherical geodetic coordinates to an ECEF position.

    Parameters
    ----------
    pos : GeodeticPosition
        Latitude/longitude in radians, altitude in meters above the sphere.
    earth : EarthModel
        Sphere constants.

    Returns
    -------
    EcefVector
    """
    r = earth.radius + pos.alt
    clat = math.cos(pos.lat)
    return EcefVector(
        r * clat * math.cos(pos.lon),
        r * clat * math.sin(pos.lon),
        r * math.sin(pos.lat),
    )


def ecef_to_geodetic(vec: EcefVector, earth: EarthModel = EARTH) -> GeodeticPosition:
    """Inverse of :func:`geodetic_to_ecef` on the sphere."""
    rho = vec.norm()
    if rho == 0.0:
        raise ValueError("zero-length ECEF vector has no geodetic image")
    return GeodeticPosition(
        lat=math.asin(vec.z / rho),
        lon=math.atan2(vec.y, vec.x),
        alt=rho - earth.radius,
    )


def enu_basis(pos: GeodeticPosition) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit east/north/up vectors at `pos`, expressed in ECEF components.

    Right-handed with the (e, n, u) ordering: e x n = u.
    """
    slat, clat = math.sin(pos.lat), math.cos(pos.lat)
    slon, clon = math.sin(pos.lon), math.cos(pos.lon)
    e = np.array([-slon, clon, 0.0])
    n = np.array([-slat * clon, -slat * slon, clat])
    u = np.array([clat * clon, clat * slon, slat])
    return e, n, u


def earth_rotation_angle(t, earth: EarthModel = EARTH, theta0: float = 0.0):
    """Rotation angle of ECEF relative to ECI at time ``t`` [rad]."""
    return earth.omega * np.asarray(t, dtype=float) + theta0


def _rotate_z(xyz: np.ndarray, angle) -> np.ndarray:
    """Rotate (..., 3) vectors about z by ``angle`` (broadcastable)."""
    xyz = np.asarray(xyz, dtype=float)
    c = np.cos(angle)
    s = np.sin(angle)
    out = np.empty(np.broadcast(xyz[..., 0], c).shape + (3,), dtype=float)
    out[..., 0] = c * xyz[..., 0] - s * xyz[..., 1]
    out[..., 1] = s * xyz[..., 0] + c * xyz[..., 1]
    out[..., 2] = np.broadcast_to(xyz[..., 2], out[..., 2].shape)
    return out


def ecef_to_eci(vec: EcefVector, t: float, earth: EarthModel = EARTH,
                theta0: float = 0.0) -> EciVector:
    """Rotate an ECEF position into ECI at time ``t``."""
    a = _rotate_z(vec.to_array(), earth_rotation_angle(t, earth, theta0))
    return EciVector.from_array(a)


def eci_to_ecef(vec: EciVector, t: float, earth: EarthModel = EARTH,
                theta0: float = 0.0) -> EcefVector:
    """Rotate an ECI position into ECEF at time ``t``."""
    a = _rotate_z(vec.to_array(), -earth_rotation_angle(t, earth, theta0))
    return EcefVector.from_array(a)


def ecef_to_eci_array(xyz: np.ndarray, t, earth: EarthModel = EARTH,
                      theta0: float = 0.0) -> np.ndarray:
    """Vectorized frame rotation for (..., 3) stacks of ECEF positions."""
    return _rotate_z(xyz, earth_rotation_angle(t, earth, theta0))


def eci_to_ecef_array(xyz: np.ndarray, t, earth: EarthModel = EARTH,
                      theta0: float = 0.0) -> np.ndarray:
    """Vectorized inverse of :func:`ecef_to_eci_array`."""
    return _rotate_z(xyz, -earth_rotation_angle(t, earth, theta0))


def slant_range_from_height(elevation, height, earth: EarthModel = EARTH):
    """Slant range from a station on the sphere to a transmitter at `height`.

    Law of cosines on the spherical Earth: with Re the Earth radius, theta the
    elevation and h the orbit height, the range r is the positive root of

        r^2 + 2 Re sin(theta) r - 2 Re h - h^2 = 0

    i.e.  r = -Re sin(theta) + sqrt(Re^2 sin^2(theta) + 2 Re h + h^2).

    Parameters
    ----------
    elevation : float or ndarray
        Elevation angle(s) [rad], in [0, pi/2].
    height : float or ndarray
        Orbit height(s) above the sphere [m]. Broadcasts against elevation.

    Returns
    -------
    float or ndarray
        Slant range [m].
    """
    re = earth.radius
    s = np.sin(elevation)
    r = -re * s + np.sqrt((re * s) ** 2 + 2.0 * re * height + np.asarray(height) ** 2)
    if np.ndim(r) == 0:
        return float(r)
    return r


def azel_to_enu_unit(azimuth, elevation) -> np.ndarray:
    """Line-of-sight unit vector(s) in (e, n, u) components.

    e = cos(el) sin(az), n = cos(el) cos(az), u = sin(el); azimuth clockwise
    from north.
    """
    az = np.asarray(azimuth, dtype=float)
    el = np.asarray(elevation, dtype=float)
    ce = np.cos(el)
    out = np.stack([ce * np.sin(az), ce * np.cos(az), np.sin(el)], axis=-1)
    return out


def enu_to_azel(enu: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Azimuth/elevation [rad] of (..., 3) ENU offsets. Azimuth in [0, 2pi)."""
    enu = np.asarray(enu, dtype=float)
    e, n, u = enu[..., 0], enu[..., 1], enu[..., 2]
    az = np.mod(np.arctan2(e, n), 2.0 * np.pi)
    el = np.arctan2(u, np.hypot(e, n))
    return az, el
