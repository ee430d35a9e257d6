"""Carve a city into parcels: faces left over when buffered roads are removed.

Each road segment is buffered to its hierarchy-class width, the buffers are
unioned, and the union is subtracted from the city boundary. Every connected
face of the remainder becomes one candidate parcel.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import shapely
from shapely.geometry import Polygon
from shapely.geometry.base import BaseGeometry
from shapely.ops import unary_union

from .errors import ConfigError
from .road_ingest import RoadNetwork

DEFAULT_SLIVER_FLOOR_M2 = 100.0

# 16 segments per quarter circle keeps buffer area error well under 0.5%
BUFFER_QUAD_SEGS = 16


class ParcelState(enum.Enum):
    NON_URBAN = "non_urban"
    URBAN = "urban"


@dataclass
class AttributeVector:
    """Per-parcel covariates feeding the local development potential.

    poi_density_norm stays None until densities are normalized per city.
    """

    ln_size: float = 0.0
    compactness: float = 0.0
    accessibility_km: float = 0.0
    poi_density_norm: float | None = None


@dataclass
class Parcel:
    """One face of the road arrangement, the atomic unit of urban area."""

    parcel_id: int
    geometry: Polygon
    area_m2: float
    perimeter_m: float
    attributes: AttributeVector = field(default_factory=AttributeVector)
    state: ParcelState = ParcelState.NON_URBAN
    forbidden: bool = False  # development forbidden regardless of model scores

    @classmethod
    def from_geometry(cls, parcel_id: int, geometry: Polygon, **kwargs) -> "Parcel":
        if geometry.is_empty or not geometry.is_valid or geometry.area <= 0:
            raise ValueError(f"parcel {parcel_id}: invalid or zero-area geometry")
        return cls(
            parcel_id=parcel_id,
            geometry=geometry,
            area_m2=geometry.area,
            perimeter_m=geometry.length,
            **kwargs,
        )


def buffer_roads(net: RoadNetwork, class_table: dict[int, float]) -> BaseGeometry:
    """Union of per-segment buffers, each half the class width per side."""
    for seg in net.segments:
        if seg.hierarchy_class not in class_table:
            raise ConfigError(f"segment {seg.seg_id}: class {seg.hierarchy_class} not in table")
        if class_table[seg.hierarchy_class] <= 0:
            raise ConfigError(f"class {seg.hierarchy_class}: non-positive width")
    buffers = [
        seg.to_line().buffer(class_table[seg.hierarchy_class] / 2.0, quad_segs=BUFFER_QUAD_SEGS)
        for seg in net.segments
    ]
    if not buffers:
        return Polygon()
    return unary_union(buffers)


def extract_parcels(
    boundary: Polygon | BaseGeometry,
    road_buffer: BaseGeometry,
    sliver_floor_m2: float = DEFAULT_SLIVER_FLOOR_M2,
) -> list[Parcel]:
    """Faces of (boundary minus road buffer), sliver-filtered, deterministically ordered.

    Ids follow (descending area, then lexicographic centroid), so identical
    inputs always produce identical parcel ids.
    """
    remainder = boundary.difference(road_buffer)
    faces = [g for g in shapely.get_parts(remainder) if g.geom_type == "Polygon" and g.area > 0]
    kept = [g for g in faces if g.area >= sliver_floor_m2]
    if not kept:
        return []

    areas = shapely.area(np.array(kept, dtype=object)).astype(float)
    cents = shapely.centroid(np.array(kept, dtype=object))
    cx = shapely.get_x(cents)
    cy = shapely.get_y(cents)
    order = sorted(range(len(kept)), key=lambda i: (-areas[i], cx[i], cy[i]))
    return [
        Parcel.from_geometry(parcel_id=new_id, geometry=kept[i])
        for new_id, i in enumerate(order)
    ]


def count_faces(boundary: Polygon | BaseGeometry, road_buffer: BaseGeometry) -> int:
    """Face count of the subtraction before any sliver filtering."""
    remainder = boundary.difference(road_buffer)
    return sum(1 for g in shapely.get_parts(remainder) if g.geom_type == "Polygon" and g.area > 0)
