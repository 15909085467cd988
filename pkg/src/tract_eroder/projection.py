"""WGS84 <-> UTM conversion and great-circle distance.

The transverse Mercator mapping uses the Krüger series in the third
flattening ``n`` carried to sixth order, which is accurate to well under a
millimeter inside a zone. Functions accept scalars through the point types
and numpy arrays through the ``*_array`` variants used by the pipeline.
"""

from __future__ import annotations

import math
from typing import Iterable, Literal, NamedTuple

import numpy as np

WGS84_A = 6378137.0
WGS84_F = 1 / 298.257223563
UTM_K0 = 0.9996
FALSE_EASTING = 500000.0
FALSE_NORTHING_SOUTH = 10000000.0
MEAN_EARTH_RADIUS_M = 6371008.8
UTM_MAX_ABS_LAT = 84.0
# zone half-width (3 deg) plus the allowed overlap
MAX_ZONE_OFFSET_DEG = 9.0

Hemisphere = Literal["north", "south"]


class GeodeticPoint(NamedTuple):
    lat_deg: float
    lon_deg: float


class UtmPoint(NamedTuple):
    easting_m: float
    northing_m: float
    zone: int
    hemisphere: Hemisphere


class ProjectionError(ValueError):
    pass


def _series_coefficients():
    f = WGS84_F
    n = f / (2 - f)
    n2, n3, n4, n5, n6 = n**2, n**3, n**4, n**5, n**6
    rectifying_radius = WGS84_A / (1 + n) * (1 + n2 / 4 + n4 / 64 + n6 / 256)
    alpha = (
        n / 2 - 2 * n2 / 3 + 5 * n3 / 16 + 41 * n4 / 180 - 127 * n5 / 288 + 7891 * n6 / 37800,
        13 * n2 / 48 - 3 * n3 / 5 + 557 * n4 / 1440 + 281 * n5 / 630 - 1983433 * n6 / 1935360,
        61 * n3 / 240 - 103 * n4 / 140 + 15061 * n5 / 26880 + 167603 * n6 / 181440,
        49561 * n4 / 161280 - 179 * n5 / 168 + 6601661 * n6 / 7257600,
        34729 * n5 / 80640 - 3418889 * n6 / 1995840,
        212378941 * n6 / 319334400,
    )
    beta = (
        n / 2 - 2 * n2 / 3 + 37 * n3 / 96 - n4 / 360 - 81 * n5 / 512 + 96199 * n6 / 604800,
        n2 / 48 + n3 / 15 - 437 * n4 / 1440 + 46 * n5 / 105 - 1118711 * n6 / 3870720,
        17 * n3 / 480 - 37 * n4 / 840 - 209 * n5 / 4480 + 5569 * n6 / 90720,
        4397 * n4 / 161280 - 11 * n5 / 504 - 830251 * n6 / 7257600,
        4583 * n5 / 161280 - 108847 * n6 / 3991680,
        20648693 * n6 / 638668800,
    )
    return rectifying_radius, np.array(alpha), np.array(beta)


_RECT_RADIUS, _ALPHA, _BETA = _series_coefficients()
_E = math.sqrt(WGS84_F * (2 - WGS84_F))
_J2 = 2.0 * np.arange(1, 7)


def central_meridian(zone: int) -> float:
    return -183.0 + 6.0 * zone


def zone_for_lon(lon_deg: float) -> int:
    return min(max(int(math.floor((lon_deg + 180.0) / 6.0)) + 1, 1), 60)


def select_utm_zone(points: Iterable[GeodeticPoint]) -> tuple[int, Hemisphere]:
    """Zone and hemisphere from the centroid of ``points``.

    All points of a dataset should be projected into the returned zone so
    that planar distances between them stay consistent.
    """
    pts = list(points)
    if not pts:
        raise ProjectionError("cannot select a UTM zone for an empty point set")
    lat = sum(p.lat_deg for p in pts) / len(pts)
    lon = sum(p.lon_deg for p in pts) / len(pts)
    return zone_for_lon(lon), ("north" if lat >= 0 else "south")


def _check_domain(lat, lon, zone):
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    if not 1 <= zone <= 60:
        raise ProjectionError(f"UTM zone must be in 1..60, got {zone}")
    if np.any(np.abs(lat) > UTM_MAX_ABS_LAT):
        raise ProjectionError(f"latitude beyond +/-{UTM_MAX_ABS_LAT} deg is outside the UTM domain")
    dlon = (lon - central_meridian(zone) + 180.0) % 360.0 - 180.0
    if np.any(np.abs(dlon) > MAX_ZONE_OFFSET_DEG):
        raise ProjectionError(f"longitude too far from the central meridian of zone {zone}")
    return lat, dlon


def geodetic_to_utm_array(lat_deg, lon_deg, zone: int, hemisphere: Hemisphere = "north"):
    """Vectorized forward projection; returns ``(easting, northing)`` arrays."""
    lat, dlon = _check_domain(lat_deg, lon_deg, zone)
    phi = np.radians(lat)
    lam = np.radians(dlon)
    # conformal latitude via its tangent
    sin_phi = np.sin(phi)
    tau = np.tan(phi)
    sigma = np.sinh(_E * np.arctanh(_E * sin_phi))
    tau_c = tau * np.sqrt(1 + sigma**2) - sigma * np.sqrt(1 + tau**2)
    xi_p = np.arctan2(tau_c, np.cos(lam))
    eta_p = np.arcsinh(np.sin(lam) / np.hypot(tau_c, np.cos(lam)))

    xi = xi_p + np.sum(
        _ALPHA * np.sin(np.multiply.outer(xi_p, _J2)) * np.cosh(np.multiply.outer(eta_p, _J2)), axis=-1
    )
    eta = eta_p + np.sum(
        _ALPHA * np.cos(np.multiply.outer(xi_p, _J2)) * np.sinh(np.multiply.outer(eta_p, _J2)), axis=-1
    )
    easting = FALSE_EASTING + UTM_K0 * _RECT_RADIUS * eta
    northing = UTM_K0 * _RECT_RADIUS * xi
    if hemisphere == "south":
        northing = northing + FALSE_NORTHING_SOUTH
    return easting, northing


def utm_to_geodetic_array(easting, northing, zone: int, hemisphere: Hemisphere = "north"):
    """Vectorized inverse projection; returns ``(lat_deg, lon_deg)`` arrays."""
    easting = np.asarray(easting, dtype=float)
    northing = np.asarray(northing, dtype=float)
    if hemisphere == "south":
        northing = northing - FALSE_NORTHING_SOUTH
    xi = northing / (UTM_K0 * _RECT_RADIUS)
    eta = (easting - FALSE_EASTING) / (UTM_K0 * _RECT_RADIUS)

    xi_p = xi - np.sum(
        _BETA * np.sin(np.multiply.outer(xi, _J2)) * np.cosh(np.multiply.outer(eta, _J2)), axis=-1
    )
    eta_p = eta - np.sum(
        _BETA * np.cos(np.multiply.outer(xi, _J2)) * np.sinh(np.multiply.outer(eta, _J2)), axis=-1
    )
    tau_c = np.sin(xi_p) / np.hypot(np.sinh(eta_p), np.cos(xi_p))
    lam = np.arctan2(np.sinh(eta_p), np.cos(xi_p))

    # Newton iteration for the geodetic latitude tangent
    e2 = _E**2
    tau = tau_c.copy()
    for _ in range(6):
        sigma = np.sinh(_E * np.arctanh(_E * tau / np.sqrt(1 + tau**2)))
        tau_i = tau * np.sqrt(1 + sigma**2) - sigma * np.sqrt(1 + tau**2)
        dtau = (
            (tau_c - tau_i)
            / np.sqrt(1 + tau_i**2)
            * (1 + (1 - e2) * tau**2)
            / ((1 - e2) * np.sqrt(1 + tau**2))
        )
        tau = tau + dtau
        if np.all(np.abs(dtau) < 1e-14):
            break
    lat = np.degrees(np.arctan(tau))
    lon = central_meridian(zone) + np.degrees(lam)
    lon = (lon + 180.0) % 360.0 - 180.0
    return lat, lon


def geodetic_to_utm(p: GeodeticPoint, zone: int, hemisphere: Hemisphere) -> UtmPoint:
    e, n = geodetic_to_utm_array(p.lat_deg, p.lon_deg, zone, hemisphere)
    return UtmPoint(float(e), float(n), zone, hemisphere)


def utm_to_geodetic(p: UtmPoint) -> GeodeticPoint:
    lat, lon = utm_to_geodetic_array(p.easting_m, p.northing_m, p.zone, p.hemisphere)
    return GeodeticPoint(float(lat), float(lon))


def haversine_distance(a: GeodeticPoint, b: GeodeticPoint) -> float:
    """Great-circle distance in meters on the mean-radius sphere."""
    phi1, phi2 = math.radians(a.lat_deg), math.radians(b.lat_deg)
    dphi = phi2 - phi1
    dlam = math.radians(b.lon_deg - a.lon_deg)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * MEAN_EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))
