"""Shared builders and independent oracles for the test suite."""
from __future__ import annotations

import math

import numpy as np
from shapely.geometry import LineString, box

from parcelca.calibrator import LogisticModel, predict_many
from parcelca.parcelizer import AttributeVector, Parcel
from parcelca.road_ingest import RoadNetwork, RoadSegment

# file-based fixtures sit far from the origin so the lat/lon rejection
# heuristic never mistakes them for geographic coordinates
ORIGIN = (500_000.0, 3_000_000.0)


def seg(seg_id: int, coords, cls: int = 2) -> RoadSegment:
    return RoadSegment(seg_id=seg_id, polyline=np.asarray(coords, dtype=float),
                       hierarchy_class=cls)


def net(*segments: RoadSegment) -> RoadNetwork:
    return RoadNetwork(segments=list(segments))


def rect_parcel(parcel_id: int, x: float, y: float, w: float, h: float, **kwargs) -> Parcel:
    return Parcel.from_geometry(parcel_id=parcel_id, geometry=box(x, y, x + w, y + h), **kwargs)


def attrs_for(p_local_target: float) -> AttributeVector:
    """Covariates that make the single-covariate rig model emit p_local_target."""
    return AttributeVector(ln_size=math.log(p_local_target / (1.0 - p_local_target)),
                           compactness=16.0, accessibility_km=0.0, poi_density_norm=0.0)


RIG_MODEL = LogisticModel(covariates=("ln_size",), intercept=0.0, coefficients=(1.0,))


def union_find_clusters(points: np.ndarray, tolerance: float) -> list[set[int]]:
    """Oracle: transitive clustering over the pairwise within-tolerance graph."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if math.dist(points[i], points[j]) <= tolerance:
                parent[find(j)] = find(i)
    clusters: dict[int, set[int]] = {}
    for i in range(n):
        clusters.setdefault(find(i), set()).add(i)
    return list(clusters.values())


def gen_logistic_samples(model: LogisticModel, n: int, seed: int):
    """Covariate rows spanning the model's active range, labels ~ Bernoulli(p)."""
    rng = np.random.default_rng(seed)
    X = np.column_stack(
        [rng.uniform(6.0, 14.0, n), rng.uniform(0.0, 50.0, n), rng.uniform(0.0, 1.0, n)]
    )
    p = predict_many(model, X)
    y = (rng.random(n) < p).astype(float)
    return X, y


def random_chord_arrangement(seed: int, max_chords: int = 12, side: float = 10_000.0):
    """Random full-span chords across a square, in guarded general position.

    Guards keep every face far wider than the 2 m test road width so that the
    buffer-difference face count must match the Euler-formula count:
    arrangement vertices are pairwise >= 40 m apart, crossing chords meet at
    >= ~11 degrees, and non-crossing chords stay >= 40 m from each other.
    Returns (boundary, chords, crossing_count).
    """
    rng = np.random.default_rng(seed)
    x0, y0 = ORIGIN
    boundary = box(x0, y0, x0 + side, y0 + side)

    def sample_chord():
        sides = rng.choice(4, size=2, replace=False)
        pts = []
        for s in sides:
            t = rng.uniform(0.05, 0.95) * side
            pts.append({
                0: (x0 + t, y0),
                1: (x0 + side, y0 + t),
                2: (x0 + t, y0 + side),
                3: (x0, y0 + t),
            }[int(s)])
        return LineString(pts)

    for _ in range(400):
        n_chords = int(rng.integers(5, max_chords + 1))
        chords = [sample_chord() for _ in range(n_chords)]
        vertices = [c for ch in chords for c in ch.coords]
        vertices += list(boundary.exterior.coords)[:4]
        crossings = 0
        ok = True
        for i in range(n_chords):
            for j in range(i + 1, n_chords):
                inter = chords[i].intersection(chords[j])
                if inter.is_empty:
                    if chords[i].distance(chords[j]) < 40.0:
                        ok = False
                        break
                elif inter.geom_type == "Point":
                    crossings += 1
                    vertices.append((inter.x, inter.y))
                    vi = np.diff(np.asarray(chords[i].coords), axis=0)[0]
                    vj = np.diff(np.asarray(chords[j].coords), axis=0)[0]
                    cross = vi[0] * vj[1] - vi[1] * vj[0]
                    sin_angle = abs(cross) / (np.linalg.norm(vi) * np.linalg.norm(vj))
                    if sin_angle < 0.2:
                        ok = False
                        break
                else:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            arr = np.asarray(vertices)
            d2 = np.sum((arr[:, None, :] - arr[None, :, :]) ** 2, axis=-1)
            np.fill_diagonal(d2, np.inf)
            if d2.min() >= 40.0**2:
                return boundary, chords, crossings
    raise AssertionError(f"no valid arrangement found for seed {seed}")


def euler_face_count(n_chords: int, crossings: int) -> int:
    """Internal faces of the arrangement via Euler's formula V - E + F = 2.

    V = 4 corners + 2 endpoints per chord + crossings, the boundary ring has
    as many edges as vertices on it, and each chord splits into one piece per
    crossing plus one. The arrangement is connected (every chord meets the
    ring), so F = E - V + 2 and the outer face is excluded.
    """
    v = 4 + 2 * n_chords + crossings
    e = (4 + 2 * n_chords) + (n_chords + 2 * crossings)
    f = e - v + 2
    return f - 1


def random_ca_city(seed: int, max_side: int = 22):
    """A random small city for automaton invariant tests.

    Disjoint jittered grid cells with random sizes, random POI densities,
    ~10% forbidden parcels, and a budget well below the total parcel area.
    Returns (parcels, ctx, params).
    """
    from parcelca.ca_engine import CAParams
    from parcelca.parcel_attrs import CityContext, compute_geometry_attrs

    rng = np.random.default_rng(seed)
    rows = int(rng.integers(3, max_side + 1))
    cols = int(rng.integers(3, max_side + 1))
    cell = float(rng.uniform(150.0, 500.0))
    margin = cell * 0.12
    x0, y0 = ORIGIN

    parcels = []
    pid = 0
    for r in range(rows):
        for c in range(cols):
            if rng.random() < 0.08:
                continue  # leave random holes in the fabric
            w = cell - margin * (1.0 + rng.random())
            h = cell - margin * (1.0 + rng.random())
            x = x0 + c * cell + margin * rng.random()
            y = y0 + r * cell + margin * rng.random()
            parcels.append(
                rect_parcel(pid, x, y, w, h, forbidden=bool(rng.random() < 0.1))
            )
            pid += 1
    if len(parcels) < 4:
        return random_ca_city(seed + 10_000, max_side)

    boundary = box(x0, y0, x0 + cols * cell, y0 + rows * cell)
    total_area = sum(p.area_m2 for p in parcels)
    ctx = CityContext(
        city_id=f"rand{seed}",
        boundary=boundary,
        center=(boundary.centroid.x, boundary.centroid.y),
        total_budget_m2=float(rng.uniform(0.1, 0.5)) * total_area,
    )
    for p in parcels:
        a = compute_geometry_attrs(p, ctx)
        a.poi_density_norm = float(rng.random())
        p.attributes = a
    params = CAParams(
        beta=float(rng.uniform(0.0, 2.0)),
        p_thd=float(rng.uniform(0.05, 0.3)),
        neighborhood_radius_m=cell * 1.6,
        rng_seed=int(rng.integers(0, 2**63)),
        max_rounds=30,
    )
    return parcels, ctx, params
