"""Planar erosion of tract polygons by the set-back distance."""

from .geometry import (
    GeometryError,
    PlanarPolygon,
    densify,
    distance_to_boundary,
    point_in_polygon,
    points_in_polygon,
    polygon_area,
    ring_intersections,
    signed_area,
)
from .grid import UniformGrid
from .raster import MAX_RASTER_CELLS, raster_allowed_area, raster_allowed_mask
from .solver import (
    ErosionResult,
    VertexEroder,
    erode_polygon,
    erode_tract,
    erode_vertex,
    segment_clearance_bound,
)

__all__ = [
    "ErosionResult",
    "GeometryError",
    "MAX_RASTER_CELLS",
    "PlanarPolygon",
    "UniformGrid",
    "VertexEroder",
    "densify",
    "distance_to_boundary",
    "erode_polygon",
    "erode_tract",
    "erode_vertex",
    "point_in_polygon",
    "points_in_polygon",
    "polygon_area",
    "raster_allowed_area",
    "raster_allowed_mask",
    "ring_intersections",
    "segment_clearance_bound",
    "signed_area",
]
