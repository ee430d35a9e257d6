"""Synthetic grid cities for tests, demos, and benchmarks.

A grid city is an (n+1) x (n+1) lattice of full-span roads over a square
boundary, which parcelizes into exactly n*n faces. POIs cluster around the
center so the local potential has a real gradient, a small water body in one
corner exercises the constraint mask, and a few short stub roads exercise
snapping and dangle trimming without changing the face count.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml
from shapely.geometry import LineString, Point, Polygon, box

from . import featureio

DEFAULT_CELL_M = 400.0
DEFAULT_ORIGIN = (500_000.0, 3_000_000.0)


def grid_city_files(
    out_dir: str | Path,
    city_id: str,
    n: int = 10,
    cell_m: float = DEFAULT_CELL_M,
    origin: tuple[float, float] = DEFAULT_ORIGIN,
    seed: int = 7,
    pois_per_cell: float = 5.0,
    budget_fraction: float = 0.25,
    with_constraint: bool = True,
    decoration_stubs: int = 2,
) -> dict:
    """Write one synthetic city's input files and return its config entry.

    Paths in the returned entry are relative to `out_dir`.
    """
    out_dir = Path(out_dir)
    city_dir = out_dir / city_id
    city_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    x0, y0 = origin
    length = n * cell_m

    roads = []
    for i in range(n + 1):
        # every fifth line gets a higher class so widths vary across the grid
        cls = 1 if i % 5 == 0 else 2
        offset = i * cell_m
        roads.append((LineString([(x0, y0 + offset), (x0 + length, y0 + offset)]), {"hierarchy": cls}))
        roads.append((LineString([(x0 + offset, y0), (x0 + offset, y0 + length)]), {"hierarchy": cls}))

    stub_cells = rng.choice(n * n, size=min(decoration_stubs, n * n), replace=False)
    for cell in stub_cells:
        # split short stub inside a distinct cell: a 10 m gap for the snapper,
        # then two 75 m dangles for the trimmer; no face is created or split
        cx = x0 + (int(cell) % n + 0.5) * cell_m
        cy = y0 + (int(cell) // n + 0.5) * cell_m
        roads.append((LineString([(cx, cy), (cx + 75.0, cy)]), {"hierarchy": 3}))
        roads.append((LineString([(cx + 85.0, cy), (cx + 160.0, cy)]), {"hierarchy": 3}))

    featureio.write_features(city_dir / "roads.geojson", roads)

    boundary = box(x0, y0, x0 + length, y0 + length)
    featureio.write_features(city_dir / "boundary.geojson", [(boundary, {"city_id": city_id})])

    center = (x0 + length / 2.0, y0 + length / 2.0)
    n_pois = int(round(pois_per_cell * n * n))
    points = []
    while len(points) < n_pois:
        if rng.random() < 0.7:
            px = rng.normal(center[0], length / 6.0)
            py = rng.normal(center[1], length / 6.0)
        else:
            px = x0 + rng.random() * length
            py = y0 + rng.random() * length
        if x0 < px < x0 + length and y0 < py < y0 + length:
            points.append((Point(px, py), {"category": "generic"}))
    featureio.write_features(city_dir / "pois.geojson", points)

    entry = {
        "city_id": city_id,
        "roads": f"{city_id}/roads.geojson",
        "pois": f"{city_id}/pois.geojson",
        "boundary": f"{city_id}/boundary.geojson",
        "center": [center[0], center[1]],
        "budget_m2": float(budget_fraction * boundary.area),
        "constraints": [],
    }

    if with_constraint:
        water = Polygon(
            [
                (x0 + 0.05 * length, y0 + 0.05 * length),
                (x0 + 0.20 * length, y0 + 0.05 * length),
                (x0 + 0.20 * length, y0 + 0.20 * length),
                (x0 + 0.05 * length, y0 + 0.20 * length),
            ]
        )
        featureio.write_features(city_dir / "water.geojson", [(water, {"kind": "water"})])
        entry["constraints"] = [f"{city_id}/water.geojson"]

    return entry


def write_grid_fixture(
    out_dir: str | Path,
    n: int = 10,
    cities: int = 1,
    seed: int = 7,
    cell_m: float = DEFAULT_CELL_M,
    pois_per_cell: float = 5.0,
    p_thd: float = 0.15,
    beta: float = 1.0,
) -> Path:
    """Generate one or more grid cities plus a ready-to-run pipeline config.

    Returns the path of the written config file.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(cities):
        city_id = f"grid_{chr(ord('a') + i)}"
        origin = (DEFAULT_ORIGIN[0] + i * (n * cell_m + 10_000.0), DEFAULT_ORIGIN[1])
        entries.append(
            grid_city_files(
                out_dir,
                city_id,
                n=n,
                cell_m=cell_m,
                origin=origin,
                seed=seed + i,
                pois_per_cell=pois_per_cell,
            )
        )

    config = {
        "global": {
            "seed": seed,
            "snap_tolerance_m": 20.0,
            "dangle_min_m": 200.0,
            "sliver_floor_m2": 100.0,
            "capture_radius_m": 50.0,
            "beta": beta,
            "p_thd": p_thd,
            "neighborhood_radius_m": 500.0,
            "max_rounds": 50,
            "aggregation_dist_m": 500.0,
            "min_urban_area_m2": 10000.0,
            "model_preset": "beijing2010",
            "class_table": {0: 40.0, 1: 30.0, 2: 20.0, 3: 10.0},
        },
        "cities": entries,
    }
    config_path = out_dir / "pipeline.yaml"
    config_path.write_text(yaml.safe_dump(config, sort_keys=True), encoding="utf-8")
    return config_path
