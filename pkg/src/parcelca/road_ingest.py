"""Road network and POI ingestion plus topology cleaning.

Cleaning makes the raw line layer usable for parcelization: endpoints within a
snap tolerance are merged into shared nodes (20 m default) and short dead-end
stubs are trimmed away (below 200 m by default) so cul-de-sacs do not carve
spurious faces out of the block structure.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree
from shapely.geometry import LineString, Point
from shapely.geometry.base import BaseGeometry
from shapely.geometry.polygon import Polygon

from . import featureio
from .errors import ConfigError, EmptyNetworkError, InputError

DEFAULT_SNAP_TOLERANCE_M = 20.0
DEFAULT_DANGLE_MIN_M = 200.0

# class -> full road width in meters; class 0 is the highest hierarchy level
DEFAULT_CLASS_TABLE: dict[int, float] = {0: 40.0, 1: 30.0, 2: 20.0, 3: 10.0}

HIERARCHY_PROPERTY = "hierarchy"


@dataclass(frozen=True)
class RoadSegment:
    """One polyline of the road network with its hierarchy class."""

    seg_id: int
    polyline: np.ndarray  # shape (k, 2), projected meters
    hierarchy_class: int

    def __post_init__(self):
        pts = np.asarray(self.polyline, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise InputError(f"segment {self.seg_id}: polyline needs >= 2 points")
        if np.any(np.all(np.diff(pts, axis=0) == 0.0, axis=1)):
            raise InputError(f"segment {self.seg_id}: consecutive duplicate points")
        object.__setattr__(self, "polyline", pts)

    @property
    def start(self) -> tuple[float, float]:
        return (float(self.polyline[0, 0]), float(self.polyline[0, 1]))

    @property
    def end(self) -> tuple[float, float]:
        return (float(self.polyline[-1, 0]), float(self.polyline[-1, 1]))

    @property
    def length(self) -> float:
        return float(np.sum(np.hypot(*np.diff(self.polyline, axis=0).T)))

    def to_line(self) -> LineString:
        return LineString(self.polyline)


@dataclass
class RoadNetwork:
    """A collection of road segments plus the implied endpoint-node topology."""

    segments: list[RoadSegment]
    warnings: int = 0

    def node_index(self) -> dict[tuple[float, float], list[int]]:
        """Map each endpoint coordinate to the ids of its incident segments.

        A closed loop contributes its single endpoint twice, so its node has
        degree 2 and the loop is never mistaken for a dangle.
        """
        index: dict[tuple[float, float], list[int]] = {}
        for seg in self.segments:
            for node in (seg.start, seg.end):
                index.setdefault(node, []).append(seg.seg_id)
        return index

    def node_count(self) -> int:
        return len(self.node_index())

    def total_length(self) -> float:
        return sum(seg.length for seg in self.segments)


@dataclass(frozen=True)
class PointOfInterest:
    poi_id: int
    location: tuple[float, float]
    category: str = ""

    def to_point(self) -> Point:
        return Point(self.location)


def load_class_table(path: str | Path) -> dict[int, float]:
    """Read a 'class,width_m' CSV into a class table."""
    table: dict[int, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            try:
                cls = int(row["class"])
                width = float(row["width_m"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad class table row {row!r} in {path}") from exc
            if width <= 0:
                raise ConfigError(f"class {cls}: width must be positive, got {width}")
            table[cls] = width
    if not table:
        raise ConfigError(f"class table {path} is empty")
    return table


def load_network(path: str | Path, class_table: dict[int, float] | None = None) -> RoadNetwork:
    """Load line features into a raw (uncleaned) road network.

    Features with an unknown or missing hierarchy attribute fall back to the
    lowest class in the table; each fallback increments the network's warning
    counter. Non-line geometries are treated as parse failures.
    """
    class_table = class_table or DEFAULT_CLASS_TABLE
    fallback_class = max(class_table)
    features = featureio.read_features(path)
    if not features:
        raise EmptyNetworkError(f"{path}: no features found")

    segments: list[RoadSegment] = []
    warnings = 0
    seg_id = 0
    for i, (geom, props) in enumerate(features):
        if geom.geom_type == "LineString":
            parts = [geom]
        elif geom.geom_type == "MultiLineString":
            parts = list(geom.geoms)
        else:
            raise InputError(
                f"{path}: feature {i} is {geom.geom_type}, expected line geometry"
            )
        raw_cls = props.get(HIERARCHY_PROPERTY)
        try:
            cls = int(raw_cls)
        except (TypeError, ValueError):
            cls = fallback_class
            warnings += 1
        else:
            if cls not in class_table:
                cls = fallback_class
                warnings += 1
        for part in parts:
            segments.append(
                RoadSegment(seg_id=seg_id, polyline=np.asarray(part.coords, dtype=float),
                            hierarchy_class=cls)
            )
            seg_id += 1

    if not segments:
        raise EmptyNetworkError(f"{path}: no line segments found")
    return RoadNetwork(segments=segments, warnings=warnings)


def snap_network(net: RoadNetwork, tolerance: float = DEFAULT_SNAP_TOLERANCE_M) -> RoadNetwork:
    """Merge endpoint clusters within `tolerance` into shared nodes.

    Clustering is transitive: connected components of the pairwise
    within-tolerance graph over segment endpoints merge into one node whose
    coordinate is the centroid of the member endpoints. The pass repeats until
    no two distinct nodes are within tolerance, which also makes the operation
    idempotent. Segments that collapse to a point are dropped.
    """
    if tolerance <= 0:
        raise ConfigError(f"snap tolerance must be positive, got {tolerance}")

    segments = net.segments
    for _ in range(64):  # fixed point is reached almost always on pass one
        segments, merged = _snap_pass(segments, tolerance)
        if not merged:
            break
    return RoadNetwork(segments=segments, warnings=net.warnings)


def _snap_pass(segments: list[RoadSegment], tolerance: float) -> tuple[list[RoadSegment], bool]:
    if not segments:
        return segments, False

    endpoints = np.array(
        [c for seg in segments for c in (seg.start, seg.end)], dtype=float
    )  # (2n, 2); row 2i is start of segment i, row 2i+1 its end

    # Weighted union-find over unique coordinates; weights count endpoint instances
    # so the representative is the centroid of member endpoints, not member nodes.
    coords, inverse, counts = np.unique(
        endpoints, axis=0, return_inverse=True, return_counts=True
    )
    tree = cKDTree(coords)
    pairs = tree.query_pairs(tolerance, output_type="ndarray")
    if pairs.size == 0:
        return segments, False

    parent = np.arange(len(coords))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in pairs:
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[rb] = ra

    roots = np.array([find(i) for i in range(len(coords))])
    weighted = coords * counts[:, None]
    sum_x = np.bincount(roots, weights=weighted[:, 0], minlength=len(coords))
    sum_y = np.bincount(roots, weights=weighted[:, 1], minlength=len(coords))
    total = np.bincount(roots, weights=counts.astype(float), minlength=len(coords))
    centroids = np.full_like(coords, np.nan)
    nonzero = total > 0
    centroids[nonzero, 0] = sum_x[nonzero] / total[nonzero]
    centroids[nonzero, 1] = sum_y[nonzero] / total[nonzero]
    snapped = centroids[roots[inverse]]  # new coordinate per endpoint instance

    out: list[RoadSegment] = []
    for i, seg in enumerate(segments):
        pts = seg.polyline.copy()
        pts[0] = snapped[2 * i]
        pts[-1] = snapped[2 * i + 1]
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = np.any(np.diff(pts, axis=0) != 0.0, axis=1)
        pts = pts[keep]
        if len(pts) < 2:
            continue  # segment collapsed into its node
        out.append(replace(seg, polyline=pts))
    return out, True


def trim_dangles(net: RoadNetwork, min_length: float = DEFAULT_DANGLE_MIN_M) -> RoadNetwork:
    """Iteratively remove dead-end segments shorter than `min_length`.

    A segment is removed when one of its endpoints has degree 1 and its length
    is below the threshold. Passes repeat until stable so that stubs exposed
    by a previous removal are trimmed too. Loops and through-segments survive.
    """
    segments = list(net.segments)
    while True:
        degree: dict[tuple[float, float], int] = {}
        for seg in segments:
            degree[seg.start] = degree.get(seg.start, 0) + 1
            degree[seg.end] = degree.get(seg.end, 0) + 1
        doomed = {
            seg.seg_id
            for seg in segments
            if (degree[seg.start] == 1 or degree[seg.end] == 1) and seg.length < min_length
        }
        if not doomed:
            break
        segments = [seg for seg in segments if seg.seg_id not in doomed]
    return RoadNetwork(segments=segments, warnings=net.warnings)


def load_pois(path: str | Path, boundary: Polygon | BaseGeometry) -> tuple[list[PointOfInterest], int]:
    """Load point features and clip them to the city boundary.

    Returns (retained POIs, dropped count). Duplicate coordinates are kept;
    density later counts points, it does not deduplicate them.
    """
    features = featureio.read_features(path)
    pois: list[PointOfInterest] = []
    dropped = 0
    poi_id = 0
    for i, (geom, props) in enumerate(features):
        if geom.geom_type == "Point":
            points = [geom]
        elif geom.geom_type == "MultiPoint":
            points = list(geom.geoms)
        else:
            raise InputError(f"{path}: feature {i} is {geom.geom_type}, expected Point")
        category = str(props.get("category", ""))
        for pt in points:
            if boundary.covers(pt):
                pois.append(
                    PointOfInterest(poi_id=poi_id, location=(pt.x, pt.y), category=category)
                )
                poi_id += 1
            else:
                dropped += 1
    return pois, dropped
