"""Batch orchestration: run the whole delineation chain over one or many cities.

Per city: ingest roads and POIs, clean the network, parcelize, compute
covariates, select urban parcels with the automaton, merge them into urban
areas, and fit the rank-size statistics. Cities are fully independent: one
city's failure is recorded in the manifest and never aborts the batch, and a
city's outputs depend only on its own inputs plus the global configuration.
"""
from __future__ import annotations

import csv
import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import yaml
from shapely.ops import unary_union

from . import __version__, featureio
from .aggregator import UrbanArea, aggregate, write_urban_area
from .ca_engine import CAParams, CAResult, apply_states, run_ca
from .calibrator import PRESETS, LogisticModel
from .errors import ConfigError, InsufficientDataError, ParcelCAError, PipelineStageError
from .parcel_attrs import CityContext, compute_attributes
from .parcelizer import Parcel, ParcelState, buffer_roads, extract_parcels
from .road_ingest import (
    DEFAULT_CLASS_TABLE,
    load_class_table,
    load_network,
    load_pois,
    snap_network,
    trim_dangles,
)
from .validator import rank_size_fit

_GLOBAL_DEFAULTS = {
    "seed": 0,
    "snap_tolerance_m": 20.0,
    "dangle_min_m": 200.0,
    "sliver_floor_m2": 100.0,
    "capture_radius_m": 50.0,
    "beta": 1.0,
    "p_thd": 0.8,
    "neighborhood_radius_m": 500.0,
    "max_rounds": 50,
    "aggregation_dist_m": 500.0,
    "min_urban_area_m2": 10000.0,
    "model_preset": "beijing2010",
    "model": None,
    "class_table": None,
}


@dataclass
class CityEntry:
    city_id: str
    roads: Path
    pois: Path
    boundary: Path
    budget_m2: float
    center: tuple[float, float] | None = None
    constraints: list[Path] = field(default_factory=list)


@dataclass
class PipelineConfig:
    globals: dict
    cities: list[CityEntry]
    digest: str = ""


def load_config(path: str | Path) -> PipelineConfig:
    """Parse and validate the YAML pipeline configuration."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return parse_config(raw, base_dir=path.parent)


def parse_config(raw: dict, base_dir: str | Path = ".") -> PipelineConfig:
    base_dir = Path(base_dir)
    globals_cfg = dict(_GLOBAL_DEFAULTS)
    for key, value in (raw.get("global") or {}).items():
        if key not in _GLOBAL_DEFAULTS:
            raise ConfigError(f"unknown global option {key!r}")
        globals_cfg[key] = value

    cities_raw = raw.get("cities")
    if not cities_raw:
        raise ConfigError("config lists no cities")

    cities: list[CityEntry] = []
    seen_ids: set[str] = set()
    for i, entry in enumerate(cities_raw):
        try:
            city_id = str(entry["city_id"])
            budget = float(entry["budget_m2"])
            paths = {
                "roads": base_dir / entry["roads"],
                "pois": base_dir / entry["pois"],
                "boundary": base_dir / entry["boundary"],
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"city entry {i}: missing or malformed field: {exc}") from exc
        if city_id in seen_ids:
            raise ConfigError(f"duplicate city_id {city_id!r}")
        seen_ids.add(city_id)
        if budget <= 0:
            raise ConfigError(f"{city_id}: budget_m2 must be positive")
        if len({str(p) for p in paths.values()}) != len(paths):
            raise ConfigError(f"{city_id}: roads/pois/boundary paths must be distinct")
        for name, p in paths.items():
            if not p.exists():
                raise ConfigError(f"{city_id}: {name} path does not exist: {p}")
        center = entry.get("center")
        if center is not None:
            center = (float(center[0]), float(center[1]))
        constraints = [base_dir / c for c in entry.get("constraints", [])]
        for c in constraints:
            if not c.exists():
                raise ConfigError(f"{city_id}: constraint path does not exist: {c}")
        cities.append(
            CityEntry(
                city_id=city_id,
                roads=paths["roads"],
                pois=paths["pois"],
                boundary=paths["boundary"],
                budget_m2=budget,
                center=center,
                constraints=constraints,
            )
        )

    digest = hashlib.sha256(
        json.dumps(raw, sort_keys=True, default=str).encode("utf-8")
    ).hexdigest()
    return PipelineConfig(globals=globals_cfg, cities=cities, digest=digest)


def derive_city_seed(global_seed: int, city_id: str) -> int:
    """Stable per-city seed: adding or removing cities never perturbs others."""
    mix = hashlib.sha256(f"{global_seed}:{city_id}".encode("utf-8")).digest()
    return int.from_bytes(mix[:8], "little")


def _resolve_model(globals_cfg: dict) -> LogisticModel:
    if globals_cfg.get("model"):
        return LogisticModel.from_json(globals_cfg["model"])
    preset = globals_cfg.get("model_preset", "beijing2010")
    if preset not in PRESETS:
        raise ConfigError(f"unknown model preset {preset!r}")
    return PRESETS[preset]


def _resolve_class_table(globals_cfg: dict) -> dict[int, float]:
    table = globals_cfg.get("class_table")
    if table is None:
        return dict(DEFAULT_CLASS_TABLE)
    if isinstance(table, (str, Path)):
        return load_class_table(table)
    return {int(k): float(v) for k, v in table.items()}


def run_city(entry: CityEntry, globals_cfg: dict, out_dir: str | Path) -> dict:
    """Execute every stage for one city and write its output files.

    Returns the manifest record. Raises PipelineStageError naming the failed
    stage; the caller decides whether that aborts anything else.
    """
    out_dir = Path(out_dir) / entry.city_id
    started = time.perf_counter()

    def stage(name: str, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PipelineStageError:
            raise
        except Exception as exc:
            raise PipelineStageError(entry.city_id, name, exc) from exc

    class_table = stage("config", _resolve_class_table, globals_cfg)
    model = stage("config", _resolve_model, globals_cfg)

    net = stage("ingest", load_network, entry.roads, class_table)
    net = stage("clean", snap_network, net, globals_cfg["snap_tolerance_m"])
    net = stage("clean", trim_dangles, net, globals_cfg["dangle_min_m"])

    def _load_boundary():
        features = featureio.read_features(entry.boundary)
        polys = [g for g, _ in features if g.geom_type in ("Polygon", "MultiPolygon")]
        if not polys:
            raise ConfigError(f"{entry.boundary}: no polygon features")
        return unary_union(polys)

    boundary = stage("ingest", _load_boundary)

    def _load_constraints():
        out = []
        for path in entry.constraints:
            out.extend(g for g, _ in featureio.read_features(path))
        return out

    constraints = stage("ingest", _load_constraints)
    center = entry.center or (boundary.centroid.x, boundary.centroid.y)
    ctx = stage(
        "ingest",
        CityContext,
        city_id=entry.city_id,
        boundary=boundary,
        center=center,
        total_budget_m2=entry.budget_m2,
        constraint_polygons=constraints,
    )
    pois, poi_dropped = stage("ingest", load_pois, entry.pois, boundary)

    road_buffer = stage("parcelize", buffer_roads, net, class_table)
    parcels = stage(
        "parcelize", extract_parcels, boundary, road_buffer, globals_cfg["sliver_floor_m2"]
    )
    if not parcels:
        raise PipelineStageError(
            entry.city_id, "parcelize", ParcelCAError("no parcels after sliver filtering")
        )

    stage("attributes", compute_attributes, parcels, ctx, pois, globals_cfg["capture_radius_m"])

    params = stage(
        "simulate",
        CAParams,
        beta=globals_cfg["beta"],
        p_thd=globals_cfg["p_thd"],
        neighborhood_radius_m=globals_cfg["neighborhood_radius_m"],
        rng_seed=derive_city_seed(int(globals_cfg["seed"]), entry.city_id),
        max_rounds=int(globals_cfg["max_rounds"]),
    )
    result: CAResult = stage("simulate", run_ca, parcels, ctx, model, params)
    apply_states(parcels, result)
    urban_parcels = [p for p in parcels if p.state is ParcelState.URBAN]

    ua: UrbanArea = stage(
        "aggregate",
        aggregate,
        urban_parcels,
        entry.city_id,
        globals_cfg["aggregation_dist_m"],
        globals_cfg["min_urban_area_m2"],
    )

    def _write_outputs():
        out_dir.mkdir(parents=True, exist_ok=True)
        featureio.write_features(out_dir / "parcels.geojson", _parcel_features(parcels))
        featureio.write_features(out_dir / "urban_parcels.geojson", _parcel_features(urban_parcels))
        write_urban_area(ua, out_dir / "urban_area.geojson")
        with open(out_dir / "rounds.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["round", "conversions", "converted_area_m2", "urban_area_m2", "seeded"])
            for rec in result.rounds:
                writer.writerow(
                    [rec.round_index, rec.conversions, repr(rec.converted_area_m2),
                     repr(rec.urban_area_m2), int(rec.seeded)]
                )
        _write_ranksize(out_dir / "ranksize.csv", entry.city_id, urban_parcels)

    stage("write", _write_outputs)

    urban_parcel_area = float(sum(p.area_m2 for p in urban_parcels))
    return {
        "city_id": entry.city_id,
        "status": "ok",
        "parcel_count": len(parcels),
        "urban_parcel_count": len(urban_parcels),
        "urban_parcel_area_m2": urban_parcel_area,
        "aggregated_area_m2": ua.total_area_m2,
        "rounds": len(result.rounds),
        "budget_m2": entry.budget_m2,
        "budget_warning": result.budget_warning,
        "ingest_warnings": net.warnings,
        "poi_dropped": poi_dropped,
        "wall_time_s": time.perf_counter() - started,
    }


def _parcel_features(parcels: list[Parcel]):
    features = []
    for p in parcels:
        a = p.attributes
        features.append(
            (
                p.geometry,
                {
                    "parcel_id": p.parcel_id,
                    "area_m2": p.area_m2,
                    "perimeter_m": p.perimeter_m,
                    "state": p.state.value,
                    "ln_size": a.ln_size,
                    "compactness": a.compactness,
                    "accessibility_km": a.accessibility_km,
                    "poi_density_norm": a.poi_density_norm,
                },
            )
        )
    return features


def _write_ranksize(path: Path, city_id: str, urban_parcels: list[Parcel]) -> None:
    sizes = [p.area_m2 for p in urban_parcels]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["city_id", "n_used", "alpha", "r_squared", "degenerate"])
        try:
            fit = rank_size_fit(sizes)
            writer.writerow([city_id, fit.n_used, repr(fit.alpha), repr(fit.r_squared),
                             int(fit.degenerate)])
        except InsufficientDataError:
            writer.writerow([city_id, len(sizes), "", "", ""])


@dataclass
class RunManifest:
    artifact_version: str
    config_digest: str
    cities: list[dict] = field(default_factory=list)

    @property
    def failed(self) -> list[dict]:
        return [c for c in self.cities if c.get("status") != "ok"]

    def write_json(self, path: str | Path) -> None:
        doc = {
            "artifact_version": self.artifact_version,
            "config_digest": self.config_digest,
            "cities": self.cities,
        }
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")


def run_batch(cfg: PipelineConfig, out_dir: str | Path, jobs: int = 1) -> RunManifest:
    """Run every configured city, isolating failures per city.

    The manifest is also written to <out_dir>/manifest.json.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(entry: CityEntry) -> dict:
        try:
            return run_city(entry, cfg.globals, out_dir)
        except PipelineStageError as exc:
            return {
                "city_id": exc.city_id,
                "status": "failed",
                "stage": exc.stage,
                "error": str(exc.cause),
            }

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(one, cfg.cities))
    else:
        records = [one(entry) for entry in cfg.cities]

    manifest = RunManifest(
        artifact_version=__version__, config_digest=cfg.digest, cities=records
    )
    manifest.write_json(out_dir / "manifest.json")
    return manifest
