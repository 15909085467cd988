"""Inward set-back of a tract polygon by per-vertex nearest admissible points.

For every boundary vertex ``p`` we look for the point ``q`` closest to ``p``
that keeps at least the set-back distance ``d`` from every densified
boundary point and lies inside the polygon. The admissible set is the
polygon minus a union of disks, so its boundary is made of circle arcs:
the optimum is either the projection of ``p`` onto one circle or a point
where two circles meet. Both candidate families are enumerated exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .geometry import (
    GeometryError,
    PlanarPolygon,
    densify,
    point_segment_distances,
    points_in_polygon,
    polygon_area,
    ring_intersections,
    signed_area,
)
from .grid import UniformGrid
from .raster import raster_allowed_area

log = logging.getLogger(__name__)

Validity = Literal["clean", "self_intersecting_repaired", "raster_fallback"]
Method = Literal["vertex_qp", "raster"]

# candidates are generated this much outside the circles so that the
# returned points satisfy the distance constraint exactly in floating point
_GEN_INFLATE = 1e-9
_TIE_SLACK = 1e-9
# assembled edges must stay within this band of boundary clearance, in units of d:
# below it an edge cuts into the set-back strip, above it an edge crosses
# admissible ground and leaves area outside the assembled polygon
EDGE_CLEARANCE_BAND = (0.75, 1.05)
# admissible circle corners may sit this far (in d) outside the assembled polygon
CORNER_SLACK = 0.05
DEFAULT_RASTER_DIVISOR = 20.0

_VALIDITY_RANK = {"clean": 0, "self_intersecting_repaired": 1, "raster_fallback": 2}


@dataclass
class ErosionResult:
    allowed: list[PlanarPolygon]
    area_ct_m2: float
    area_cbrs_m2: float
    setback_m: float
    method: Method = "vertex_qp"
    validity: Validity = "clean"
    is_empty: bool = field(init=False)

    def __post_init__(self):
        self.is_empty = self.area_cbrs_m2 == 0.0


def segment_clearance_bound(setback: float, spacing: float) -> float:
    """Guaranteed distance from boundary segments for points clearing all samples."""
    return math.sqrt(max(setback * setback - (spacing / 2) ** 2, 0.0))


def _check_spacing(setback: float, spacing: float | None) -> float:
    if setback <= 0:
        raise ValueError(f"set-back distance must be positive, got {setback}")
    spacing = setback / 2 if spacing is None else float(spacing)
    if not 0 < spacing <= setback:
        raise ValueError(f"densification spacing must be in (0, d]; got {spacing} for d={setback}")
    return spacing


def _circle_intersections(c1: np.ndarray, c2: np.ndarray, r: float) -> np.ndarray:
    delta = c2 - c1
    dist = np.hypot(delta[:, 0], delta[:, 1])
    ok = (dist > 0) & (dist < 2 * r)
    c1, delta, dist = c1[ok], delta[ok], dist[ok]
    mid = c1 + delta / 2
    h = np.sqrt(np.maximum(r * r - (dist / 2) ** 2, 0.0))
    perp = np.stack([-delta[:, 1], delta[:, 0]], axis=1) / dist[:, None]
    return np.concatenate([mid + h[:, None] * perp, mid - h[:, None] * perp])


def _ring_neighbours(ring: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.roll(ring, 1, axis=0), np.roll(ring, -1, axis=0)


def _bisector(p, prev, nxt) -> np.ndarray:
    u = prev - p
    v = nxt - p
    u = u / np.hypot(*u)
    v = v / np.hypot(*v)
    w = u + v
    norm = np.hypot(*w)
    if norm < 1e-12:
        w = np.array([-u[1], u[0]])
        norm = 1.0
    return w / norm


class VertexEroder:
    """Solves the nearest-admissible-point problem for one polygon part.

    The constraint set defaults to the boundary densified at ``spacing``
    (``d/2`` unless given). Circle intersections that are admissible are
    computed once per part; they double as the emptiness test, since any
    non-empty admissible region has arc corners.
    """

    def __init__(
        self,
        polygon: PlanarPolygon,
        setback: float,
        spacing: float | None = None,
        constraints: np.ndarray | None = None,
    ):
        self.spacing = _check_spacing(setback, spacing)
        self.polygon = polygon
        self.setback = float(setback)
        if constraints is None:
            self.dense = densify(polygon, self.spacing)
            constraints = np.concatenate(self.dense.rings)
        else:
            self.dense = None
        self.constraints = np.asarray(constraints, dtype=float).reshape(-1, 2)
        self.grid = UniformGrid(self.constraints, self.setback)
        self._radius = self.setback * (1 + _GEN_INFLATE)
        self.corners = self._admissible_corners()

    def admissible(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        ok = self.grid.nearest_distance(pts, self.setback) >= self.setback
        if ok.any():
            idx = np.flatnonzero(ok)
            ok[idx] = points_in_polygon(pts[idx], self.polygon, boundary_tol=-1.0)
        return ok

    def _admissible_corners(self) -> np.ndarray:
        i, j = self.grid.pairs_within(2 * self._radius)
        pts = _circle_intersections(self.constraints[i], self.constraints[j], self._radius)
        if len(pts) == 0:
            return pts.reshape(0, 2)
        return pts[self.admissible(pts)]

    @property
    def region_empty(self) -> bool:
        return len(self.corners) == 0

    def erode(self, p, prev=None, nxt=None) -> np.ndarray | None:
        """Nearest admissible point to ``p``; None when nothing is admissible.

        ``prev`` and ``nxt`` are the ring neighbours of ``p``; when given, the
        two points at distance ``d`` along the vertex bisector join the
        candidate set.
        """
        if self.region_empty:
            return None
        p = np.asarray(p, dtype=float)
        gaps = np.hypot(*(self.corners - p).T)
        k = int(np.argmin(gaps))
        best, bound = self.corners[k], gaps[k]

        # only circles whose centers lie within bound + d can beat the best corner
        near = self.constraints[self.grid.query_radius(p, bound + self._radius)]
        off = p - near
        dist = np.hypot(off[:, 0], off[:, 1])
        away = dist > 1e-9 * self.setback
        cands = [near[away] + self._radius * off[away] / dist[away][:, None]]
        if prev is not None and nxt is not None:
            w = _bisector(p, np.asarray(prev, float), np.asarray(nxt, float))
            cands.append(np.stack([p + self._radius * w, p - self._radius * w]))
        cands = np.concatenate(cands)
        cgap = np.hypot(*(cands - p).T)
        if prev is not None and nxt is not None:
            # on a straight edge the normal offset ties with the arc corners; prefer the normal
            cgap[-2:] -= _TIE_SLACK * self.setback
        closer = cgap < bound
        if closer.any():
            cands, cgap = cands[closer], cgap[closer]
            order = np.argsort(cgap, kind="stable")
            ok = self.admissible(cands[order])
            if ok.any():
                best = cands[order][np.argmax(ok)]
        return best.copy()


def _locate_neighbours(p: np.ndarray, polygon: PlanarPolygon):
    for ring in polygon.rings:
        hit = np.flatnonzero(np.all(ring == p, axis=1))
        if len(hit):
            k = hit[0]
            return ring[k - 1], ring[(k + 1) % len(ring)]
    # p lies on a segment: use the segment ends, whose bisector is the normal
    a, b = polygon.segments()
    k = int(np.argmin([point_segment_distances(p[None], a[m : m + 1], b[m : m + 1])[0] for m in range(len(a))]))
    return a[k], b[k]


def erode_vertex(p, boundary, d: float, original: PlanarPolygon) -> np.ndarray | None:
    """Nearest point to ``p`` at distance >= d from every ``boundary`` point and inside ``original``."""
    p = np.asarray(p, dtype=float)
    boundary = np.asarray(boundary, dtype=float).reshape(-1, 2)
    if not np.any(np.all(boundary == p, axis=1)):
        raise ValueError("vertex must be one of the boundary points")
    eroder = VertexEroder(original, d, spacing=d, constraints=boundary)
    prev, nxt = _locate_neighbours(p, original)
    return eroder.erode(p, prev, nxt)


def _clean_ring(ring: np.ndarray, tol: float) -> tuple[np.ndarray, bool]:
    """Drop repeated points, then zero-width spikes; flag whether spikes were removed."""
    repaired = False
    pts = list(ring)
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        out = []
        for q in pts:
            if not out or np.hypot(*(q - out[-1])) > tol:
                out.append(q)
        while len(out) > 1 and np.hypot(*(out[0] - out[-1])) <= tol:
            out.pop()
        if len(out) != len(pts):
            changed = True
        pts = out
        n = len(pts)
        if n < 3:
            break
        for k in range(n):
            a, b, c = pts[k - 1], pts[k], pts[(k + 1) % n]
            u, v = a - b, c - b
            cross = u[0] * v[1] - u[1] * v[0]
            nu, nv = np.hypot(*u), np.hypot(*v)
            # b is the tip of a fold-back spike: the ring doubles back on itself
            if abs(cross) <= 1e-9 * nu * nv and np.dot(u, v) > 0:
                del pts[k]
                repaired = changed = True
                break
    return np.array(pts).reshape(-1, 2), repaired


def _edge_samples(ring: np.ndarray, step: float) -> np.ndarray:
    nxt = np.roll(ring, -1, axis=0)
    out = []
    for a, b in zip(ring, nxt):
        k = max(1, math.ceil(np.hypot(*(b - a)) / step))
        t = np.arange(k + 1)[:, None] / k
        out.append(a + t * (b - a))
    return np.concatenate(out)


def _validate(rings: list[np.ndarray], original_rings, polygon: PlanarPolygon, eroder: VertexEroder):
    """Return the assembled polygon if it passes every check, else None."""
    d = eroder.setback
    if ring_intersections(rings):
        return None
    for new, old in zip(rings, original_rings):
        if np.sign(signed_area(new)) != np.sign(signed_area(old)):
            return None
    try:
        allowed = PlanarPolygon(rings[0], tuple(rings[1:]))
    except GeometryError:
        return None
    verts = np.concatenate(rings)
    if np.any(eroder.grid.nearest_distance(verts, d) < d):
        return None
    if np.any(points_in_polygon(np.concatenate(polygon.rings), allowed)):
        return None
    samples = np.concatenate([_edge_samples(r, d / 8) for r in rings])
    a, b = polygon.segments()
    clearance = point_segment_distances(samples, a, b)
    lo, hi = EDGE_CLEARANCE_BAND
    if clearance.min() < lo * d or clearance.max() > hi * d:
        return None
    outside = eroder.corners[~points_in_polygon(eroder.corners, allowed)]
    if len(outside):
        na, nb = allowed.segments()
        if point_segment_distances(outside, na, nb).max() > CORNER_SLACK * d:
            return None
    return allowed


def erode_polygon(
    part: PlanarPolygon,
    d: float,
    spacing: float | None = None,
    raster_resolution_m: float | None = None,
    solve_all_points: bool = False,
) -> ErosionResult:
    """Set-back region of one polygon part.

    Original vertices are moved to their nearest admissible points and
    reassembled in ring order; densified points only act as constraints
    unless ``solve_all_points`` is set. When the assembled polygon fails
    validation the area is taken from the raster oracle instead.
    """
    area_ct = polygon_area(part)
    if area_ct <= 0:
        raise GeometryError("polygon has no positive area")
    eroder = VertexEroder(part, d, spacing)
    if eroder.region_empty:
        return ErosionResult([], area_ct, 0.0, d)

    source = eroder.dense if solve_all_points else part
    tol = 1e-6 * d
    rings, repaired = [], False
    for ring in source.rings:
        prev, nxt = _ring_neighbours(ring)
        moved = [eroder.erode(p, a, b) for p, a, b in zip(ring, prev, nxt)]
        moved = [q for q in moved if q is not None]
        cleaned, spiked = _clean_ring(np.array(moved), tol)
        repaired |= spiked
        rings.append(cleaned)

    allowed = None
    if all(len(r) >= 3 for r in rings):
        allowed = _validate(rings, source.rings, part, eroder)
    if allowed is not None:
        area = min(polygon_area(allowed), area_ct)
        validity = "self_intersecting_repaired" if repaired else "clean"
        return ErosionResult([allowed], area_ct, area, d, "vertex_qp", validity)

    res = raster_resolution_m or d / DEFAULT_RASTER_DIVISOR
    area = min(raster_allowed_area(part, d, res), area_ct)
    shown = []
    if area > 0 and len(rings[0]) >= 3:
        try:
            shown = [PlanarPolygon(rings[0])]
        except GeometryError:
            shown = []
    return ErosionResult(shown, area_ct, area, d, "raster", "raster_fallback")


def erode_tract(
    parts: list[PlanarPolygon],
    d: float,
    spacing: float | None = None,
    raster_resolution_m: float | None = None,
    solve_all_points: bool = False,
) -> ErosionResult:
    """Erode every part independently and sum the areas."""
    results = [erode_polygon(p, d, spacing, raster_resolution_m, solve_all_points) for p in parts]
    allowed = [poly for r in results for poly in r.allowed]
    validity = max((r.validity for r in results), key=_VALIDITY_RANK.__getitem__, default="clean")
    method = "raster" if any(r.method == "raster" for r in results) else "vertex_qp"
    return ErosionResult(
        allowed,
        sum(r.area_ct_m2 for r in results),
        sum(r.area_cbrs_m2 for r in results),
        d,
        method,
        validity,
    )
