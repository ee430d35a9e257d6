"""Reading and writing GeoJSON-style feature files in projected meter coordinates.

Every distance threshold in the pipeline (snap tolerance, dangle length,
neighborhood radius, aggregation distance) is metric, so inputs must be in a
projected planar CRS in meters. Files whose coordinates all fit inside the
geographic ranges (|x| <= 180, |y| <= 90), or that declare a WGS84 CRS, are
rejected rather than silently misinterpreted.
"""
from __future__ import annotations

import json
from pathlib import Path

from shapely.geometry import mapping, shape
from shapely.geometry.base import BaseGeometry

from .errors import InputError

_GEOGRAPHIC_CRS_TOKENS = ("4326", "CRS84", "WGS84", "WGS 84")


def read_features(path: str | Path) -> list[tuple[BaseGeometry, dict]]:
    """Read a GeoJSON FeatureCollection and return (geometry, properties) pairs.

    Raises InputError on unparseable files or geographic (lat/lon) coordinates.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"feature file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot parse {path}: {exc}") from exc

    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise InputError(f"{path}: expected a FeatureCollection document")
    _reject_geographic_crs(doc, path)

    features = doc.get("features", [])
    out: list[tuple[BaseGeometry, dict]] = []
    for i, feat in enumerate(features):
        geom_obj = feat.get("geometry") if isinstance(feat, dict) else None
        if geom_obj is None:
            raise InputError(f"{path}: feature {i} has no geometry")
        try:
            geom = shape(geom_obj)
        except Exception as exc:
            raise InputError(f"{path}: feature {i} has invalid geometry: {exc}") from exc
        props = feat.get("properties") or {}
        out.append((geom, dict(props)))

    if out:
        _reject_geographic_coords(out, path)
    return out


def write_features(
    path: str | Path,
    features: list[tuple[BaseGeometry, dict]],
    metadata: dict | None = None,
) -> None:
    """Write (geometry, properties) pairs as a GeoJSON FeatureCollection.

    Output is byte-deterministic for identical inputs (sorted keys, repr floats).
    """
    path = Path(path)
    doc: dict = {
        "type": "FeatureCollection",
        "features": [
            {"type": "Feature", "geometry": mapping(geom), "properties": props}
            for geom, props in features
        ],
    }
    if metadata:
        doc["metadata"] = metadata
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")


def _reject_geographic_crs(doc: dict, path: Path) -> None:
    crs = doc.get("crs")
    if crs is None:
        return
    name = ""
    if isinstance(crs, dict):
        name = str(crs.get("properties", {}).get("name", ""))
    else:
        name = str(crs)
    if any(tok in name for tok in _GEOGRAPHIC_CRS_TOKENS):
        raise InputError(
            f"{path}: geographic CRS {name!r} detected; reproject to planar meters first"
        )


def _reject_geographic_coords(features: list[tuple[BaseGeometry, dict]], path: Path) -> None:
    # Bounds check only: projected city data in meters sits far outside lat/lon ranges.
    xmin = min(g.bounds[0] for g, _ in features if not g.is_empty)
    ymin = min(g.bounds[1] for g, _ in features if not g.is_empty)
    xmax = max(g.bounds[2] for g, _ in features if not g.is_empty)
    ymax = max(g.bounds[3] for g, _ in features if not g.is_empty)
    if -180.0 <= xmin <= xmax <= 180.0 and -90.0 <= ymin <= ymax <= 90.0:
        raise InputError(
            f"{path}: coordinates fall inside lat/lon ranges; "
            "inputs must be projected planar meters"
        )
