"""Brute-force raster estimate of the set-back region.

Independent of the vertex solver: it never looks at densified points, only
at exact point-to-segment distances from cell centers to the original
boundary.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .geometry import PlanarPolygon

log = logging.getLogger(__name__)

MAX_RASTER_CELLS = 4_000_000


def raster_grid(polygon: PlanarPolygon, resolution_m: float, max_cells: int = MAX_RASTER_CELLS):
    """Cell-center axes over the polygon's bounding box, coarsened to fit ``max_cells``."""
    if resolution_m <= 0:
        raise ValueError("raster resolution must be positive")
    x0, y0, x1, y1 = polygon.bounds()
    res = float(resolution_m)
    ncells = math.ceil((x1 - x0) / res) * math.ceil((y1 - y0) / res)
    if ncells > max_cells:
        res = math.sqrt((x1 - x0) * (y1 - y0) / max_cells)
        while math.ceil((x1 - x0) / res) * math.ceil((y1 - y0) / res) > max_cells:
            res *= 1.001
        log.warning(
            "raster resolution %.3f m would need %d cells; using %.3f m instead", resolution_m, ncells, res
        )
    nx = max(1, math.ceil((x1 - x0) / res))
    ny = max(1, math.ceil((y1 - y0) / res))
    xs = x0 + (np.arange(nx) + 0.5) * res
    ys = y0 + (np.arange(ny) + 0.5) * res
    return xs, ys, res


def _inside_mask(polygon: PlanarPolygon, xs: np.ndarray, ys: np.ndarray, res: float) -> np.ndarray:
    # scanline even-odd fill: toggle at the first cell center right of each crossing
    a, b = polygon.segments()
    y_lo = np.minimum(a[:, 1], b[:, 1])
    y_hi = np.maximum(a[:, 1], b[:, 1])
    row_first = np.ceil((y_lo - ys[0]) / res).astype(np.int64)
    row_stop = np.ceil((y_hi - ys[0]) / res).astype(np.int64)
    row_first = np.clip(row_first, 0, len(ys))
    row_stop = np.clip(row_stop, 0, len(ys))
    counts = np.maximum(row_stop - row_first, 0)
    toggles = np.zeros((len(ys), len(xs) + 1), dtype=np.int32)
    if counts.sum() == 0:
        return toggles[:, :-1].astype(bool)
    edge = np.repeat(np.arange(len(a)), counts)
    rows = np.repeat(row_first - np.cumsum(counts) + counts, counts) + np.arange(counts.sum())
    yc = ys[rows]
    ea, eb = a[edge], b[edge]
    x_cross = ea[:, 0] + (yc - ea[:, 1]) * (eb[:, 0] - ea[:, 0]) / (eb[:, 1] - ea[:, 1])
    cols = np.clip(np.floor((x_cross - xs[0]) / res).astype(np.int64) + 1, 0, len(xs))
    np.add.at(toggles, (rows, cols), 1)
    return (np.cumsum(toggles[:, :-1], axis=1) % 2).astype(bool)


def _near_boundary_mask(polygon: PlanarPolygon, d: float, xs, ys, res) -> np.ndarray:
    near = np.zeros((len(ys), len(xs)), dtype=bool)
    a, b = polygon.segments()
    for p, q in zip(a, b):
        c0 = max(0, math.ceil((min(p[0], q[0]) - d - xs[0]) / res))
        c1 = min(len(xs), math.floor((max(p[0], q[0]) + d - xs[0]) / res) + 1)
        r0 = max(0, math.ceil((min(p[1], q[1]) - d - ys[0]) / res))
        r1 = min(len(ys), math.floor((max(p[1], q[1]) + d - ys[0]) / res) + 1)
        if c0 >= c1 or r0 >= r1:
            continue
        gx = xs[c0:c1][None, :] - p[0]
        gy = ys[r0:r1][:, None] - p[1]
        sx, sy = q[0] - p[0], q[1] - p[1]
        seg2 = sx * sx + sy * sy
        t = np.clip((gx * sx + gy * sy) / seg2, 0.0, 1.0) if seg2 > 0 else 0.0
        dist2 = (gx - t * sx) ** 2 + (gy - t * sy) ** 2
        near[r0:r1, c0:c1] |= dist2 < d * d
    return near


def raster_allowed_mask(polygon: PlanarPolygon, d: float, resolution_m: float, max_cells: int = MAX_RASTER_CELLS):
    """Boolean cell mask of the set-back region plus its axes and pitch."""
    xs, ys, res = raster_grid(polygon, resolution_m, max_cells)
    mask = _inside_mask(polygon, xs, ys, res)
    if d > 0:
        mask &= ~_near_boundary_mask(polygon, d, xs, ys, res)
    return mask, xs, ys, res


def raster_allowed_area(polygon: PlanarPolygon, d: float, resolution_m: float, max_cells: int = MAX_RASTER_CELLS) -> float:
    """Area in m^2 of cells inside the polygon and at least ``d`` from its boundary."""
    mask, _, _, res = raster_allowed_mask(polygon, d, resolution_m, max_cells)
    return int(np.count_nonzero(mask)) * res * res
