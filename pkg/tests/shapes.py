"""Polygon and tract builders shared by the test modules."""

from __future__ import annotations

import numpy as np

from tract_eroder.erosion import PlanarPolygon
from tract_eroder.geo_ingest import TractGeometry, TractPart
from tract_eroder.projection import GeodeticPoint, utm_to_geodetic_array

# planar origin inside UTM 18N, near Washington DC
DC_EASTING = 323000.0
DC_NORTHING = 4306000.0


def square(side, x0=0.0, y0=0.0):
    return PlanarPolygon(np.array([[x0, y0], [x0 + side, y0], [x0 + side, y0 + side], [x0, y0 + side]]))


def rectangle(w, h, x0=0.0, y0=0.0):
    return PlanarPolygon(np.array([[x0, y0], [x0 + w, y0], [x0 + w, y0 + h], [x0, y0 + h]]))


def regular_ngon(n, radius, cx=0.0, cy=0.0):
    th = 2 * np.pi * np.arange(n) / n
    return PlanarPolygon(np.column_stack([cx + radius * np.cos(th), cy + radius * np.sin(th)]))


def l_shape():
    """Union of a 1000x1000 square and a 1000x400 strip attached to its right side."""
    return PlanarPolygon(np.array([[0, 0], [2000, 0], [2000, 400], [1000, 400], [1000, 1000], [0, 1000]], float))


def random_convex(rng, offset=1e5):
    """Convex polygon with 8-32 vertices on an ellipse, diameter 1-5 km."""
    n = int(rng.integers(8, 33))
    a = rng.uniform(1000.0, 5000.0) / 2
    b = a * rng.uniform(0.3, 1.0)
    th = np.sort(rng.uniform(0, 2 * np.pi, n))
    rot = rng.uniform(0, np.pi)
    x, y = a * np.cos(th), b * np.sin(th)
    c, s = np.cos(rot), np.sin(rot)
    pts = np.column_stack([c * x - s * y, s * x + c * y]) + rng.uniform(0, offset, 2)
    return PlanarPolygon(pts)


def random_star(rng, amplitude=0.3):
    """Star-shaped polygon: radial perturbation of a circle, 8-32 vertices."""
    n = int(rng.integers(8, 33))
    radius = rng.uniform(500.0, 2500.0)
    th = np.sort(rng.uniform(0, 2 * np.pi, n))
    r = radius * (1 + rng.uniform(-amplitude, amplitude, n))
    return PlanarPolygon(np.column_stack([r * np.cos(th), r * np.sin(th)]))


def geodetic_ring(xy, easting=DC_EASTING, northing=DC_NORTHING, zone=18):
    xy = np.asarray(xy, dtype=float)
    lat, lon = utm_to_geodetic_array(xy[:, 0] + easting, xy[:, 1] + northing, zone, "north")
    return tuple(GeodeticPoint(float(a), float(o)) for a, o in zip(lat, lon))


def planar_tract(geoid, polygon: PlanarPolygon, population=None, dx=0.0, dy=0.0):
    """Tract whose UTM-18N image is ``polygon`` shifted by (dx, dy) from the DC origin."""
    shift = np.array([dx, dy])
    part = TractPart(
        geodetic_ring(polygon.outer + shift),
        tuple(geodetic_ring(h + shift) for h in polygon.holes),
    )
    return TractGeometry(geoid, f"Tract {geoid[-6:]}", (part,), population)


def three_squares():
    """Synthetic city of three squares (1000, 2000, 400 m) spaced 5 km apart."""
    return [
        planar_tract("11001000100", square(1000), 3360, dx=0),
        planar_tract("11001000200", square(2000), 4000, dx=5000),
        planar_tract("11001000300", square(400), 2500, dx=10000),
    ]
