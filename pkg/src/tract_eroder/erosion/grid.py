"""Uniform bucket grid over a fixed point set.

Points are sorted by cell key so every cell is a contiguous slice; batch
queries gather neighbouring slices with ragged index arithmetic instead of
per-point Python loops.
"""

from __future__ import annotations

import math

import numpy as np


class UniformGrid:
    def __init__(self, points: np.ndarray, cell_size: float):
        if cell_size <= 0:
            raise ValueError("cell size must be positive")
        self.points = np.asarray(points, dtype=float)
        self.cell = float(cell_size)
        self.origin = self.points.min(axis=0)
        cells = self._cells(self.points)
        self.nx = int(cells[:, 0].max()) + 1
        self.ny = int(cells[:, 1].max()) + 1
        keys = cells[:, 0] * self.ny + cells[:, 1]
        self.order = np.argsort(keys, kind="stable")
        self.keys = keys[self.order]

    def _cells(self, q: np.ndarray) -> np.ndarray:
        return np.floor((q - self.origin) / self.cell).astype(np.int64)

    def _gather(self, q: np.ndarray, reach: int):
        """(query index, point index) pairs for points within ``reach`` cells."""
        cells = self._cells(q)
        owners, members = [], []
        for dx in range(-reach, reach + 1):
            cx = cells[:, 0] + dx
            for dy in range(-reach, reach + 1):
                cy = cells[:, 1] + dy
                ok = (cx >= 0) & (cx < self.nx) & (cy >= 0) & (cy < self.ny)
                if not ok.any():
                    continue
                qi = np.flatnonzero(ok)
                key = cx[qi] * self.ny + cy[qi]
                lo = np.searchsorted(self.keys, key, "left")
                hi = np.searchsorted(self.keys, key, "right")
                counts = hi - lo
                nz = counts > 0
                if not nz.any():
                    continue
                qi, lo, counts = qi[nz], lo[nz], counts[nz]
                starts = np.repeat(lo - np.cumsum(counts) + counts, counts)
                slot = np.arange(counts.sum()) + starts
                owners.append(np.repeat(qi, counts))
                members.append(self.order[slot])
        if not owners:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty
        return np.concatenate(owners), np.concatenate(members)

    def nearest_distance(self, q: np.ndarray, radius: float) -> np.ndarray:
        """Distance to the nearest point, or ``inf`` if none lies within ``radius``."""
        q = np.atleast_2d(np.asarray(q, dtype=float))
        out = np.full(len(q), np.inf)
        if len(q) == 0:
            return out
        owner, member = self._gather(q, max(1, math.ceil(radius / self.cell)))
        if len(owner):
            dist = np.hypot(*(self.points[member] - q[owner]).T)
            np.minimum.at(out, owner, dist)
        out[out > radius] = np.inf
        return out

    def query_radius(self, p, radius: float) -> np.ndarray:
        """Indices of points within ``radius`` of the single point ``p``."""
        p = np.asarray(p, dtype=float)
        lo = np.maximum(np.floor((p - radius - self.origin) / self.cell).astype(np.int64), 0)
        hi = np.minimum(
            np.floor((p + radius - self.origin) / self.cell).astype(np.int64),
            [self.nx - 1, self.ny - 1],
        )
        if np.any(hi < lo):
            return np.empty(0, dtype=np.int64)
        if (hi[0] - lo[0] + 1) * (hi[1] - lo[1] + 1) > len(self.points):
            idx = np.arange(len(self.points))
        else:
            ranges = []
            for cx in range(lo[0], hi[0] + 1):
                a = np.searchsorted(self.keys, cx * self.ny + lo[1], "left")
                b = np.searchsorted(self.keys, cx * self.ny + hi[1], "right")
                ranges.append(self.order[a:b])
            idx = np.concatenate(ranges) if ranges else np.empty(0, dtype=np.int64)
        dist = np.hypot(*(self.points[idx] - p).T)
        return np.sort(idx[dist <= radius])

    def pairs_within(self, radius: float) -> tuple[np.ndarray, np.ndarray]:
        """Index pairs ``i < j`` whose points are closer than ``radius``."""
        owner, member = self._gather(self.points, max(1, math.ceil(radius / self.cell)))
        keep = owner < member
        owner, member = owner[keep], member[keep]
        dist = np.hypot(*(self.points[member] - self.points[owner]).T)
        close = dist < radius
        return owner[close], member[close]
