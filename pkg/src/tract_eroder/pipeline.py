"""City-level run: project, erode each tract, report, and serialize."""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .erosion import ErosionResult, GeometryError, PlanarPolygon, erode_tract
from .erosion.solver import DEFAULT_RASTER_DIVISOR
from .geo_ingest import RecordError, TractGeometry
from .metrics import CityReport, build_city_report
from .projection import (
    Hemisphere,
    ProjectionError,
    geodetic_to_utm_array,
    select_utm_zone,
    utm_to_geodetic_array,
)
from .propagation import FSPL_CONSTANT_DB

log = logging.getLogger(__name__)

ALLOWED_FILL = "#2ca02c"
OFF_LIMITS_FILL = "#d62728"


def project_tract(tract: TractGeometry, zone: int, hemisphere: Hemisphere) -> list[PlanarPolygon]:
    """Planar parts of ``tract`` in the given UTM zone."""

    def ring_xy(ring):
        lat = np.array([p.lat_deg for p in ring])
        lon = np.array([p.lon_deg for p in ring])
        e, n = geodetic_to_utm_array(lat, lon, zone, hemisphere)
        return np.column_stack([e, n])

    parts = []
    for part in tract.parts:
        try:
            parts.append(PlanarPolygon(ring_xy(part.outer), tuple(ring_xy(h) for h in part.holes)))
        except (GeometryError, ProjectionError) as exc:
            raise RecordError(str(exc), tract.geoid) from None
    return parts


@dataclass(frozen=True)
class ErosionSettings:
    setback_m: float
    spacing_m: float | None = None
    raster_res_m: float | None = None
    solve_all_points: bool = False

    @property
    def effective_spacing(self) -> float:
        return self.spacing_m if self.spacing_m is not None else self.setback_m / 2

    @property
    def effective_raster_res(self) -> float:
        return self.raster_res_m if self.raster_res_m is not None else self.setback_m / DEFAULT_RASTER_DIVISOR


def _erode_job(args) -> ErosionResult:
    parts, s = args
    return erode_tract(parts, s.setback_m, s.spacing_m, s.raster_res_m, s.solve_all_points)


@dataclass
class CityAnalysis:
    report: CityReport
    tracts: list[TractGeometry]
    erosions: list[ErosionResult]
    zone: int
    hemisphere: Hemisphere
    skipped: list[RecordError] = field(default_factory=list)


def analyze_city(
    city: str,
    tracts: list[TractGeometry],
    settings: ErosionSettings,
    jobs: int = 1,
    lenient: bool = False,
) -> CityAnalysis:
    """Erode every tract of one city in a single shared UTM zone.

    Results are ordered by GEOID, so the output does not depend on ``jobs``.
    """
    if not tracts:
        raise RecordError("no tracts to analyze")
    tracts = sorted(tracts, key=lambda t: t.geoid)
    zone, hemisphere = select_utm_zone(p for t in tracts for p in t.points())

    kept, planar, skipped = [], [], []
    for t in tracts:
        try:
            planar.append(project_tract(t, zone, hemisphere))
            kept.append(t)
        except RecordError as exc:
            if not lenient:
                raise
            log.warning("skipping tract: %s", exc)
            skipped.append(exc)
    if not kept:
        raise RecordError("no tract survived projection")

    work = [(parts, settings) for parts in planar]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            erosions = list(pool.map(_erode_job, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        erosions = [_erode_job(w) for w in work]

    report = build_city_report(city, kept, erosions, settings.setback_m)
    report.metadata.update({"utm_zone": f"{zone}{'N' if hemisphere == 'north' else 'S'}"})
    return CityAnalysis(report, kept, erosions, zone, hemisphere, skipped)


def _ring_lonlat(ring: np.ndarray, zone, hemisphere) -> list[list[float]]:
    closed = np.vstack([ring, ring[:1]])
    lat, lon = utm_to_geodetic_array(closed[:, 0], closed[:, 1], zone, hemisphere)
    return [[float(x), float(y)] for x, y in zip(lon, lat)]


def _tract_lonlat(tract: TractGeometry) -> list:
    def ring(r):
        return [[p.lon_deg, p.lat_deg] for p in (*r, r[0])]

    return [[ring(p.outer), *[ring(h) for h in p.holes]] for p in tract.parts]


def city_geojson(analysis: CityAnalysis) -> dict:
    """FeatureCollection with a ``tract`` and an ``allowed`` layer per GEOID."""
    by_geoid = {r.geoid: r for r in analysis.report.records}
    features = []
    pairs = sorted(zip(analysis.tracts, analysis.erosions), key=lambda te: te[0].geoid)
    for tract, erosion in pairs:
        rec = by_geoid[tract.geoid]
        common = {"geoid": tract.geoid, "alp": rec.alp, "pctas": rec.pctas, "validity": rec.validity}
        features.append({
            "type": "Feature",
            "properties": {**common, "layer": "tract", "classification": "off_limits", "fill": OFF_LIMITS_FILL},
            "geometry": {"type": "MultiPolygon", "coordinates": _tract_lonlat(tract)},
        })
        if erosion.allowed and not erosion.is_empty:
            polys = [
                [_ring_lonlat(r, analysis.zone, analysis.hemisphere) for r in poly.rings]
                for poly in erosion.allowed
            ]
            features.append({
                "type": "Feature",
                "properties": {**common, "layer": "allowed", "classification": "cbrs_allowed", "fill": ALLOWED_FILL},
                "geometry": {"type": "MultiPolygon", "coordinates": polys},
            })
    return {"type": "FeatureCollection", "name": analysis.report.city, "features": features}


def manifest(analysis: CityAnalysis, settings: ErosionSettings, config: dict) -> dict:
    return {
        "tool": "tract-eroder",
        "version": __version__,
        "city": analysis.report.city,
        "config": config,
        "utm_zone": analysis.zone,
        "utm_hemisphere": analysis.hemisphere,
        "fspl_constant_db": FSPL_CONSTANT_DB,
        "setback_m": settings.setback_m,
        "spacing_m": settings.effective_spacing,
        "raster_resolution_m": settings.effective_raster_res,
        "solve_all_points": settings.solve_all_points,
        "tracts_analyzed": analysis.report.tract_count,
        "tracts_skipped": [str(e) for e in analysis.skipped],
    }


def write_json(path: str | os.PathLike, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=1, sort_keys=False)
        fh.write("\n")
