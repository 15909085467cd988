"""Census tract boundaries (KML) and population tables (CSV).

Rings are stored unclosed, with consecutive duplicate vertices collapsed,
as tuples of :class:`GeodeticPoint`. The toolkit's own GeoJSON dump can be
read back with :func:`load_geojson`.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple
from xml.sax.saxutils import escape

import numpy as np

from .erosion.geometry import ring_intersections, signed_area
from .projection import GeodeticPoint

log = logging.getLogger(__name__)

KML_NS = "http://www.opengis.net/kml/2.2"

Ring = tuple[GeodeticPoint, ...]


class IngestError(ValueError):
    """Fatal problem with an input document."""


class RecordError(IngestError):
    """Problem confined to one placemark or table row."""

    def __init__(self, message: str, record: str | None = None):
        super().__init__(f"{record}: {message}" if record else message)
        self.record = record


class TractPart(NamedTuple):
    outer: Ring
    holes: tuple[Ring, ...] = ()


@dataclass(frozen=True)
class TractGeometry:
    geoid: str
    name: str
    parts: tuple[TractPart, ...]
    population: int | None = None
    self_intersecting: bool = False

    def points(self) -> Iterable[GeodeticPoint]:
        for part in self.parts:
            yield from part.outer
            for hole in part.holes:
                yield from hole


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _children(elem, name):
    return [c for c in elem if _local(c.tag) == name]


def _descendants(elem, name):
    return [c for c in elem.iter() if _local(c.tag) == name]


def normalize_ring(points: Iterable[GeodeticPoint], record: str | None = None) -> Ring:
    """Drop repeated consecutive points and the closing duplicate."""
    out: list[GeodeticPoint] = []
    for p in points:
        if not out or p != out[-1]:
            out.append(p)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    if len(out) < 3:
        raise RecordError(f"ring has {len(out)} distinct points, need at least 3", record)
    xy = np.array([(p.lon_deg, p.lat_deg) for p in out])
    if signed_area(xy) == 0.0:
        raise RecordError("ring has zero area", record)
    return tuple(out)


def parse_coordinates(text: str, record: str | None = None) -> list[GeodeticPoint]:
    pts = []
    for token in (text or "").split():
        fields = token.split(",")
        if len(fields) not in (2, 3):
            raise RecordError(f"bad coordinate tuple {token!r}", record)
        try:
            lon, lat = float(fields[0]), float(fields[1])
        except ValueError:
            raise RecordError(f"bad coordinate tuple {token!r}", record) from None
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0) or not (math.isfinite(lat) and math.isfinite(lon)):
            raise RecordError(f"coordinate out of range {token!r}", record)
        pts.append(GeodeticPoint(lat, lon))
    return pts


def _ring_from(boundary, record) -> Ring:
    coords = _descendants(boundary, "coordinates")
    if not coords:
        raise RecordError("boundary without coordinates", record)
    return normalize_ring(parse_coordinates(coords[0].text, record), record)


def _extended_value(placemark, field_name: str) -> str | None:
    for elem in placemark.iter():
        tag = _local(elem.tag)
        if tag == "SimpleData" and elem.get("name") == field_name:
            return (elem.text or "").strip()
        if tag == "Data" and elem.get("name") == field_name:
            value = _children(elem, "value")
            return (value[0].text or "").strip() if value else None
    return None


def has_self_intersection(parts: Iterable[TractPart]) -> bool:
    for part in parts:
        rings = [np.array([(p.lon_deg, p.lat_deg) for p in r]) for r in (part.outer, *part.holes)]
        if ring_intersections(rings):
            return True
    return False


def _parse_placemark(pm, id_field: str, index: int) -> TractGeometry:
    geoid = _extended_value(pm, id_field) or (pm.get("id") or "").strip()
    if not geoid:
        raise RecordError(f"placemark has no {id_field!r} identifier", f"placemark #{index}")
    names = _children(pm, "name")
    name = (names[0].text or "").strip() if names else ""
    name = name or _extended_value(pm, "NAMELSAD") or _extended_value(pm, "NAME") or geoid

    parts = []
    for poly in _descendants(pm, "Polygon"):
        outer = _children(poly, "outerBoundaryIs")
        if not outer:
            raise RecordError("polygon without outer boundary", geoid)
        holes = tuple(_ring_from(b, geoid) for b in _children(poly, "innerBoundaryIs"))
        parts.append(TractPart(_ring_from(outer[0], geoid), holes))
    if not parts:
        raise RecordError("placemark has no polygon geometry", geoid)
    if len(geoid) != 11:
        log.warning("tract identifier %r is not an 11-character GEOID", geoid)
    crossing = has_self_intersection(parts)
    if crossing:
        log.warning("tract %s has self-intersecting rings; areas use the shoelace value as-is", geoid)
    return TractGeometry(geoid, name, tuple(parts), None, crossing)


def parse_tract_boundaries(
    document: str | bytes,
    id_field: str = "GEOID",
    lenient: bool = False,
    errors: list[RecordError] | None = None,
) -> list[TractGeometry]:
    """One :class:`TractGeometry` per placemark, population unset.

    Record-level problems raise :class:`RecordError` unless ``lenient`` is
    set, in which case the placemark is skipped and the error appended to
    ``errors``.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        line, col = exc.position
        raise IngestError(f"malformed KML at line {line}, column {col}: {exc}") from None

    tracts: list[TractGeometry] = []
    seen: set[str] = set()
    for index, pm in enumerate(_descendants(root, "Placemark")):
        try:
            tract = _parse_placemark(pm, id_field, index)
            if tract.geoid in seen:
                raise RecordError("duplicate tract identifier", tract.geoid)
        except RecordError as exc:
            if not lenient:
                raise
            log.warning("skipping placemark: %s", exc)
            if errors is not None:
                errors.append(exc)
            continue
        seen.add(tract.geoid)
        tracts.append(tract)
    return tracts


def _coord_text(ring: Ring) -> str:
    closed = (*ring, ring[0])
    return " ".join(f"{p.lon_deg!r},{p.lat_deg!r}" for p in closed)


def dump_kml(tracts: Iterable[TractGeometry], id_field: str = "GEOID") -> str:
    """Serialize tracts to KML with full float precision."""
    out = ['<?xml version="1.0" encoding="UTF-8"?>', f'<kml xmlns="{KML_NS}">', "<Document>"]
    for t in tracts:
        out.append("<Placemark>")
        out.append(f"<name>{escape(t.name)}</name>")
        out.append(f'<ExtendedData><SchemaData><SimpleData name="{id_field}">{escape(t.geoid)}</SimpleData></SchemaData></ExtendedData>')
        if len(t.parts) > 1:
            out.append("<MultiGeometry>")
        for part in t.parts:
            out.append("<Polygon><outerBoundaryIs><LinearRing><coordinates>")
            out.append(_coord_text(part.outer))
            out.append("</coordinates></LinearRing></outerBoundaryIs>")
            for hole in part.holes:
                out.append(f"<innerBoundaryIs><LinearRing><coordinates>{_coord_text(hole)}</coordinates></LinearRing></innerBoundaryIs>")
            out.append("</Polygon>")
        if len(t.parts) > 1:
            out.append("</MultiGeometry>")
        out.append("</Placemark>")
    out.append("</Document>")
    out.append("</kml>")
    return "\n".join(out)


def _ring_coords(ring: Ring) -> list[list[float]]:
    return [[p.lon_deg, p.lat_deg] for p in (*ring, ring[0])]


def tract_geometry_json(parts: Iterable[TractPart]) -> dict:
    polys = [[_ring_coords(p.outer), *[_ring_coords(h) for h in p.holes]] for p in parts]
    return {"type": "MultiPolygon", "coordinates": polys}


def dump_geojson(tracts: Iterable[TractGeometry]) -> dict:
    """Normalized GeoJSON FeatureCollection (WGS84, lon-lat order)."""
    features = []
    for t in tracts:
        props = {"geoid": t.geoid, "name": t.name}
        if t.population is not None:
            props["population"] = t.population
        features.append({"type": "Feature", "properties": props, "geometry": tract_geometry_json(t.parts)})
    return {"type": "FeatureCollection", "features": features}


def load_geojson(doc: dict) -> list[TractGeometry]:
    """Read tracts back from :func:`dump_geojson` output."""
    tracts = []
    for feature in doc.get("features", []):
        props = feature.get("properties") or {}
        geoid = str(props.get("geoid", "")).strip()
        if not geoid:
            raise RecordError("feature has no geoid")
        geom = feature.get("geometry") or {}
        polys = geom.get("coordinates", [])
        if geom.get("type") == "Polygon":
            polys = [polys]
        elif geom.get("type") != "MultiPolygon":
            raise RecordError(f"unsupported geometry type {geom.get('type')!r}", geoid)
        parts = []
        for rings in polys:
            pts = [normalize_ring((GeodeticPoint(lat, lon) for lon, lat, *_ in r), geoid) for r in rings]
            parts.append(TractPart(pts[0], tuple(pts[1:])))
        pop = props.get("population")
        tracts.append(
            TractGeometry(
                geoid, props.get("name", geoid), tuple(parts),
                None if pop is None else int(pop), has_self_intersection(parts),
            )
        )
    return tracts


def parse_population_table(
    table: str,
    geoid_column: str = "GEOID",
    population_column: str = "POPULATION",
    lenient: bool = False,
    errors: list[RecordError] | None = None,
) -> dict[str, int]:
    """Map GEOID to population count from a CSV with a header row."""
    reader = csv.DictReader(io.StringIO(table.lstrip("\ufeff")))
    header = reader.fieldnames or []
    for col in (geoid_column, population_column):
        if col not in header:
            raise IngestError(f"population table has no column {col!r} (found {', '.join(header)})")
    popmap: dict[str, int] = {}
    for line_no, row in enumerate(reader, start=2):
        geoid = (row[geoid_column] or "").strip()
        raw = (row[population_column] or "").strip()
        try:
            if not geoid:
                raise RecordError("empty GEOID", f"row {line_no}")
            try:
                value = int(raw)
            except ValueError:
                raise RecordError(f"population {raw!r} is not an integer", f"row {line_no}") from None
            if value < 0:
                raise RecordError(f"population {value} is negative", f"row {line_no}")
        except RecordError as exc:
            if not lenient:
                raise
            log.warning("skipping population row: %s", exc)
            if errors is not None:
                errors.append(exc)
            continue
        if geoid in popmap:
            raise IngestError(f"duplicate GEOID {geoid} in population table (row {line_no})")
        popmap[geoid] = value
    return popmap


@dataclass
class JoinResult:
    tracts: list[TractGeometry]
    missing: list[str] = field(default_factory=list)
    unmatched: list[str] = field(default_factory=list)

    @property
    def warnings(self) -> list[str]:
        msgs = [f"tract {g} has no population entry; using 0" for g in self.missing]
        msgs += [f"population entry {g} has no tract geometry" for g in self.unmatched]
        return msgs


def join_population(tracts: Iterable[TractGeometry], popmap: dict[str, int], strict: bool = False) -> JoinResult:
    """Attach populations by GEOID; absent tracts get 0 and a warning."""
    joined, missing = [], []
    geoids = set()
    for t in tracts:
        geoids.add(t.geoid)
        if t.geoid in popmap:
            joined.append(replace(t, population=popmap[t.geoid]))
        else:
            missing.append(t.geoid)
            joined.append(replace(t, population=0))
    result = JoinResult(joined, missing, sorted(set(popmap) - geoids))
    for msg in result.warnings:
        log.warning(msg)
    if strict and result.warnings:
        raise IngestError("; ".join(result.warnings))
    return result
