"""Planar polygon primitives in projected meters.

Rings are ``(n, 2)`` float arrays stored unclosed (the last vertex is not a
repeat of the first) and treated as cyclic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

_CHUNK = 1 << 20


class GeometryError(ValueError):
    pass


def as_ring(points) -> np.ndarray:
    """Float ``(n, 2)`` array with the closing duplicate and repeats removed."""
    ring = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(ring) > 1:
        keep = np.ones(len(ring), dtype=bool)
        keep[1:] = np.any(ring[1:] != ring[:-1], axis=1)
        ring = ring[keep]
    if len(ring) > 1 and np.array_equal(ring[0], ring[-1]):
        ring = ring[:-1]
    return ring


def signed_area(ring: np.ndarray) -> float:
    """Shoelace area; positive for counter-clockwise rings."""
    x, y = ring[:, 0], ring[:, 1]
    # shift to the first vertex to limit cancellation on UTM-sized values
    x = x - x[0]
    y = y - y[0]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True, eq=False)
class PlanarPolygon:
    """One polygon part: an outer ring plus optional holes."""

    outer: np.ndarray
    holes: tuple[np.ndarray, ...] = field(default=())

    def __post_init__(self):
        outer = as_ring(self.outer)
        holes = tuple(as_ring(h) for h in self.holes)
        for ring in (outer, *holes):
            if len(ring) < 3:
                raise GeometryError("ring needs at least 3 distinct points")
            if signed_area(ring) == 0.0:
                raise GeometryError("ring has zero area")
        for hole in holes:
            if not points_in_rings(hole[:1], (outer,))[0]:
                raise GeometryError("hole lies outside the outer ring")
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "holes", holes)

    @property
    def rings(self) -> tuple[np.ndarray, ...]:
        return (self.outer, *self.holes)

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        """Start and end points of every boundary segment, outer and holes."""
        return _ring_segments(self.rings)

    def bounds(self) -> tuple[float, float, float, float]:
        lo = self.outer.min(axis=0)
        hi = self.outer.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def diameter_bound(self) -> float:
        x0, y0, x1, y1 = self.bounds()
        return math.hypot(x1 - x0, y1 - y0)

    def transformed(self, fn) -> "PlanarPolygon":
        return PlanarPolygon(fn(self.outer), tuple(fn(h) for h in self.holes))


def polygon_area(polygon: PlanarPolygon) -> float:
    """Area of the outer ring minus the holes, independent of orientation."""
    return abs(signed_area(polygon.outer)) - sum(abs(signed_area(h)) for h in polygon.holes)


def densify_ring(ring: np.ndarray, max_spacing: float) -> np.ndarray:
    if max_spacing <= 0:
        raise GeometryError("densification spacing must be positive")
    nxt = np.roll(ring, -1, axis=0)
    lengths = np.hypot(*(nxt - ring).T)
    pieces = np.maximum(np.ceil(lengths / max_spacing).astype(int), 1)
    out = []
    for start, end, k in zip(ring, nxt, pieces):
        t = np.arange(k)[:, None] / k
        out.append(start + t * (end - start))
    return np.concatenate(out)


def densify(polygon: PlanarPolygon, max_spacing: float) -> PlanarPolygon:
    """Insert evenly spaced points so no segment exceeds ``max_spacing``.

    Original vertices are kept in order; inserted points lie on the
    original segments.
    """
    return PlanarPolygon(
        densify_ring(polygon.outer, max_spacing),
        tuple(densify_ring(h, max_spacing) for h in polygon.holes),
    )


def point_segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest of the segments ``a[k]-b[k]``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    best = np.full(len(points), np.inf)
    ab = b - a
    ab2 = np.einsum("ij,ij->i", ab, ab)
    ab2 = np.where(ab2 == 0, 1.0, ab2)
    step = max(1, _CHUNK // max(len(a), 1))
    for lo in range(0, len(points), step):
        p = points[lo : lo + step, None, :]
        ap = p - a[None]
        t = np.clip(np.einsum("mkj,kj->mk", ap, ab) / ab2, 0.0, 1.0)
        d = ap - t[..., None] * ab[None]
        best[lo : lo + step] = np.sqrt(np.min(np.einsum("mkj,mkj->mk", d, d), axis=1))
    return best


def distance_to_boundary(p, polygon: PlanarPolygon):
    """Euclidean distance from ``p`` to the nearest boundary segment.

    ``p`` may be a single point (returns a float) or an ``(m, 2)`` array.
    """
    arr = np.asarray(p, dtype=float)
    d = point_segment_distances(arr.reshape(-1, 2), *polygon.segments())
    return float(d[0]) if arr.ndim == 1 else d


def _ring_segments(rings):
    starts = np.concatenate(rings)
    ends = np.concatenate([np.roll(r, -1, axis=0) for r in rings])
    return starts, ends


def points_in_polygon(points: np.ndarray, polygon: PlanarPolygon, boundary_tol: float = 1e-9) -> np.ndarray:
    """Even-odd containment for many points; boundary points count as inside."""
    return points_in_rings(points, polygon.rings, boundary_tol)


def points_in_rings(points: np.ndarray, rings: Sequence[np.ndarray], boundary_tol: float = 1e-9) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    a, b = _ring_segments(rings)
    inside = np.zeros(len(points), dtype=bool)
    step = max(1, _CHUNK // max(len(a), 1))
    for lo in range(0, len(points), step):
        px = points[lo : lo + step, 0:1]
        py = points[lo : lo + step, 1:2]
        ay, by = a[None, :, 1], b[None, :, 1]
        crosses = (ay > py) != (by > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = a[None, :, 0] + (py - ay) * (b[None, :, 0] - a[None, :, 0]) / (by - ay)
        hits = crosses & (px < xint)
        inside[lo : lo + step] = (np.count_nonzero(hits, axis=1) % 2) == 1
    if boundary_tol >= 0:
        outside = np.flatnonzero(~inside)
        if len(outside):
            on_edge = point_segment_distances(points[outside], a, b) <= boundary_tol
            inside[outside[on_edge]] = True
    return inside


def point_in_polygon(p, polygon: PlanarPolygon) -> bool:
    return bool(points_in_polygon(np.asarray(p, dtype=float).reshape(1, 2), polygon)[0])


def _orient(a, b, c):
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def segments_cross(a1, a2, b1, b2) -> np.ndarray:
    """Proper or touching intersection test between paired segments (broadcasting)."""
    o1 = _orient(a1, a2, b1)
    o2 = _orient(a1, a2, b2)
    o3 = _orient(b1, b2, a1)
    o4 = _orient(b1, b2, a2)
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)

    def on_seg(p, q, r, o):
        return (
            (o == 0)
            & (np.minimum(p[..., 0], q[..., 0]) <= r[..., 0])
            & (r[..., 0] <= np.maximum(p[..., 0], q[..., 0]))
            & (np.minimum(p[..., 1], q[..., 1]) <= r[..., 1])
            & (r[..., 1] <= np.maximum(p[..., 1], q[..., 1]))
        )

    touching = on_seg(a1, a2, b1, o1) | on_seg(a1, a2, b2, o2) | on_seg(b1, b2, a1, o3) | on_seg(b1, b2, a2, o4)
    return proper | touching


def ring_intersections(rings: Sequence[np.ndarray]) -> list[tuple[int, int]]:
    """Pairs of segment indices that intersect, excluding ring neighbours.

    Segments are numbered consecutively across ``rings``. Used to flag
    self-intersecting boundaries and rings crossing one another.
    """
    starts, ends = _ring_segments(rings)
    ring_id = np.concatenate([np.full(len(r), k) for k, r in enumerate(rings)])
    local = np.concatenate([np.arange(len(r)) for r in rings])
    sizes = np.array([len(r) for r in rings])[ring_id]
    n = len(starts)
    lo_x = np.minimum(starts[:, 0], ends[:, 0])
    hi_x = np.maximum(starts[:, 0], ends[:, 0])
    lo_y = np.minimum(starts[:, 1], ends[:, 1])
    hi_y = np.maximum(starts[:, 1], ends[:, 1])
    found: list[tuple[int, int]] = []
    step = max(1, _CHUNK // max(n, 1))
    for lo in range(0, n, step):
        i = np.arange(lo, min(lo + step, n))[:, None]
        j = np.arange(n)[None, :]
        cand = (j > i) & (lo_x[i] <= hi_x[j]) & (lo_x[j] <= hi_x[i]) & (lo_y[i] <= hi_y[j]) & (lo_y[j] <= hi_y[i])
        same = ring_id[i] == ring_id[j]
        gap = np.abs(local[i] - local[j])
        adjacent = same & ((gap == 1) | (gap == sizes[i] - 1))
        ii, jj = np.nonzero(cand & ~adjacent)
        if len(ii) == 0:
            continue
        ii = ii + lo
        hit = segments_cross(starts[ii], ends[ii], starts[jj], ends[jj])
        found.extend(zip(ii[hit].tolist(), jj[hit].tolist()))
    return found


def segment_segment_distance(a1, a2, b1, b2) -> np.ndarray:
    """Minimum distance between paired segments (zero when they cross)."""
    a1, a2, b1, b2 = (np.atleast_2d(np.asarray(v, dtype=float)) for v in (a1, a2, b1, b2))

    def pt_seg(p, s, e):
        se = e - s
        den = np.einsum("...j,...j->...", se, se)
        den = np.where(den == 0, 1.0, den)
        t = np.clip(np.einsum("...j,...j->...", p - s, se) / den, 0.0, 1.0)
        return np.hypot(*np.moveaxis(p - s - t[..., None] * se, -1, 0))

    d = np.minimum.reduce([pt_seg(a1, b1, b2), pt_seg(a2, b1, b2), pt_seg(b1, a1, a2), pt_seg(b2, a1, a2)])
    return np.where(segments_cross(a1, a2, b1, b2), 0.0, d)
