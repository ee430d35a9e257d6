"""Per-parcel covariates: log size, compactness, center accessibility, POI density.

POI density is counted over each parcel plus a small capture radius around its
boundary (street-front points are usually geocoded on road centerlines, just
outside the parcel), converted to points per hectare, then normalized to [0, 1]
against the city maximum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely
from shapely.geometry import Point, Polygon
from shapely.geometry.base import BaseGeometry
from shapely.strtree import STRtree

from .errors import ConfigError
from .parcelizer import AttributeVector, Parcel
from .road_ingest import PointOfInterest

DEFAULT_CAPTURE_RADIUS_M = 50.0

M2_PER_HECTARE = 10_000.0


@dataclass
class CityContext:
    """Everything city-level the pipeline needs besides the parcels themselves."""

    city_id: str
    boundary: Polygon | BaseGeometry
    center: tuple[float, float]
    total_budget_m2: float
    constraint_polygons: list[BaseGeometry] = field(default_factory=list)

    def __post_init__(self):
        if self.total_budget_m2 <= 0:
            raise ConfigError(f"{self.city_id}: budget must be positive")
        if self.total_budget_m2 > self.boundary.area:
            raise ConfigError(
                f"{self.city_id}: budget {self.total_budget_m2:.0f} m2 exceeds "
                f"boundary area {self.boundary.area:.0f} m2"
            )
        if not self.boundary.covers(Point(self.center)):
            raise ConfigError(f"{self.city_id}: center lies outside the boundary")


def compute_geometry_attrs(parcel: Parcel, ctx: CityContext) -> AttributeVector:
    """Fill the geometric covariates; POI density is left for the density pass."""
    if parcel.area_m2 <= 0:
        raise ValueError(f"parcel {parcel.parcel_id}: zero area should have been sliver-filtered")
    centroid = parcel.geometry.centroid
    dist_m = math.hypot(centroid.x - ctx.center[0], centroid.y - ctx.center[1])
    return AttributeVector(
        ln_size=math.log(parcel.area_m2),
        compactness=parcel.perimeter_m**2 / parcel.area_m2,
        accessibility_km=dist_m / 1000.0,
        poi_density_norm=parcel.attributes.poi_density_norm,
    )


def compute_poi_density(
    parcels: list[Parcel],
    pois: list[PointOfInterest],
    capture_radius_m: float = DEFAULT_CAPTURE_RADIUS_M,
) -> np.ndarray:
    """Raw POI density per parcel, in points per hectare.

    A point counts for a parcel when it lies inside it or within
    `capture_radius_m` of its boundary; a point near several parcels counts for
    each of them. With radius 0 this reduces to point-in-polygon counting.
    """
    if capture_radius_m < 0:
        raise ConfigError(f"capture radius must be >= 0, got {capture_radius_m}")
    counts = np.zeros(len(parcels), dtype=float)
    if parcels and pois:
        tree = STRtree([p.to_point() for p in pois])
        geoms = np.array([p.geometry for p in parcels], dtype=object)
        parcel_idx, _ = tree.query(geoms, predicate="dwithin", distance=capture_radius_m)
        np.add.at(counts, parcel_idx, 1.0)
    areas_ha = np.array([p.area_m2 for p in parcels], dtype=float) / M2_PER_HECTARE
    return counts / areas_ha if len(parcels) else counts


def normalize_density(raw: np.ndarray | list[float]) -> np.ndarray:
    """Scale densities by the city maximum; an all-zero city stays all zero."""
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        return raw
    if np.any(raw < 0):
        raise ValueError("densities must be non-negative")
    peak = raw.max()
    return raw / peak if peak > 0 else np.zeros_like(raw)


def compute_attributes(
    parcels: list[Parcel],
    ctx: CityContext,
    pois: list[PointOfInterest],
    capture_radius_m: float = DEFAULT_CAPTURE_RADIUS_M,
) -> None:
    """Attach a complete AttributeVector to every parcel, in place."""
    norm = normalize_density(compute_poi_density(parcels, pois, capture_radius_m))
    for parcel, density in zip(parcels, norm):
        attrs = compute_geometry_attrs(parcel, ctx)
        attrs.poi_density_norm = float(density)
        parcel.attributes = attrs
