"""Command-line interface.

Subcommands:
  run          execute the full pipeline for every city in a config
  gen-fixture  emit synthetic grid cities plus a ready-to-run config
  parcelize    ingest + clean + parcelize + attributes for one city
  calibrate    fit logistic coefficients from a labeled CSV
  simulate     run the cellular automaton on a parcels file
  aggregate    merge urban parcels into urban-area polygons
  validate     rank-size fit or overlap rate

Exit codes for `run`: 0 success, 1 partial failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np
from shapely.geometry import box
from shapely.ops import unary_union

from . import __version__, featureio
from .aggregator import aggregate as aggregate_parcels
from .aggregator import write_urban_area
from .ca_engine import CAParams, apply_states, run_ca
from .calibrator import PRESETS, LogisticModel, fit_logistic
from .errors import ConfigError, ParcelCAError
from .fixtures import write_grid_fixture
from .parcel_attrs import CityContext, compute_attributes
from .parcelizer import AttributeVector, Parcel, ParcelState, buffer_roads, extract_parcels
from .pipeline import load_config, run_batch
from .road_ingest import (
    DEFAULT_CLASS_TABLE,
    load_class_table,
    load_network,
    load_pois,
    snap_network,
    trim_dangles,
)
from .validator import overlap_rate, rank_size_fit


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ParcelCAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parcelca", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"parcelca {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gen-fixture", help="generate synthetic test cities")
    fixture_sub = p.add_subparsers(dest="fixture_kind", required=True)
    g = fixture_sub.add_parser("grid", help="square grid city")
    g.add_argument("--n", type=int, default=10, help="cells per side")
    g.add_argument("--cities", type=int, default=1)
    g.add_argument("--seed", type=int, default=7)
    g.add_argument("--cell", type=float, default=400.0, help="cell size in meters")
    g.add_argument("--pois-per-cell", type=float, default=5.0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_fixture_grid)

    p = sub.add_parser("parcelize", help="ingest, clean, parcelize, compute attributes")
    p.add_argument("--roads", required=True)
    p.add_argument("--pois", required=True)
    p.add_argument("--boundary", required=True)
    p.add_argument("--class-table", help="CSV with class,width_m columns")
    p.add_argument("--snap-tolerance", type=float, default=20.0)
    p.add_argument("--dangle-min", type=float, default=200.0)
    p.add_argument("--sliver-floor", type=float, default=100.0)
    p.add_argument("--capture-radius", type=float, default=50.0)
    p.add_argument("--city-center", help='"x,y" in meters; defaults to boundary centroid')
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_parcelize)

    p = sub.add_parser("calibrate", help="fit logistic coefficients from labeled rows")
    p.add_argument("--samples", required=True, help="CSV with covariate columns and a label column")
    p.add_argument(
        "--covariates", default="ln_size,accessibility_km,poi_density_norm",
        help="comma-separated covariate column names",
    )
    p.add_argument("--label-column", default="label")
    p.add_argument("--l2", type=float, default=1e-6)
    p.add_argument("--out", help="write the fitted model JSON here")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("simulate", help="run the CA on a parcels file with attributes")
    p.add_argument("--parcels", required=True, help="parcels.geojson from parcelize/run")
    p.add_argument("--budget", type=float, required=True, help="urban area budget in m2")
    p.add_argument("--model", help="model JSON path or preset name", default="beijing2010")
    p.add_argument("--p-thd", type=float, default=0.8)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--radius", type=float, default=500.0)
    p.add_argument("--max-rounds", type=int, default=50)
    p.add_argument("--constraints", nargs="*", default=[])
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("aggregate", help="merge urban parcels into urban areas")
    p.add_argument("--input", required=True, help="urban parcels feature file")
    p.add_argument("--dist", type=float, default=500.0)
    p.add_argument("--min-area", type=float, default=10000.0)
    p.add_argument("--city-id", default="")
    p.add_argument("--out", required=True, help="output feature file")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("validate", help="validation statistics")
    validate_sub = p.add_subparsers(dest="validate_kind", required=True)
    r = validate_sub.add_parser("ranksize", help="power-law fit of a size column")
    r.add_argument("--input", required=True, help="CSV with a 'size' column")
    r.add_argument("--head-only", action="store_true")
    r.set_defaults(func=cmd_validate_ranksize)
    o = validate_sub.add_parser("overlap", help="overlap rate of two polygon files")
    o.add_argument("--ours", required=True)
    o.add_argument("--ref", required=True)
    o.set_defaults(func=cmd_validate_overlap)

    return parser


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    manifest = run_batch(cfg, args.out, jobs=args.jobs)
    for record in manifest.cities:
        if record["status"] == "ok":
            print(
                f"{record['city_id']}: ok, {record['parcel_count']} parcels, "
                f"{record['urban_parcel_count']} urban, "
                f"{record['aggregated_area_m2']:.0f} m2 urban area, "
                f"{record['rounds']} rounds"
            )
        else:
            print(
                f"{record['city_id']}: FAILED in {record['stage']}: {record['error']}",
                file=sys.stderr,
            )
    return 1 if manifest.failed else 0


def cmd_gen_fixture_grid(args) -> int:
    config_path = write_grid_fixture(
        args.out,
        n=args.n,
        cities=args.cities,
        seed=args.seed,
        cell_m=args.cell,
        pois_per_cell=args.pois_per_cell,
    )
    print(config_path)
    return 0


def _parse_center(text: str | None, boundary) -> tuple[float, float]:
    if text is None:
        c = boundary.centroid
        return (c.x, c.y)
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f'--city-center must be "x,y", got {text!r}') from exc
    return (x, y)


def cmd_parcelize(args) -> int:
    class_table = load_class_table(args.class_table) if args.class_table else DEFAULT_CLASS_TABLE
    net = load_network(args.roads, class_table)
    net = snap_network(net, args.snap_tolerance)
    net = trim_dangles(net, args.dangle_min)

    boundary = unary_union(
        [g for g, _ in featureio.read_features(args.boundary)
         if g.geom_type in ("Polygon", "MultiPolygon")]
    )
    if boundary.is_empty:
        raise ConfigError(f"{args.boundary}: no polygon features")
    center = _parse_center(args.city_center, boundary)
    ctx = CityContext(
        city_id="cli",
        boundary=boundary,
        center=center,
        total_budget_m2=boundary.area,
    )
    pois, dropped = load_pois(args.pois, boundary)

    parcels = extract_parcels(boundary, buffer_roads(net, class_table), args.sliver_floor)
    compute_attributes(parcels, ctx, pois, args.capture_radius)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    from .pipeline import _parcel_features

    featureio.write_features(out_dir / "parcels.geojson", _parcel_features(parcels))
    with open(out_dir / "attributes.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parcel_id", "ln_size", "compactness", "accessibility_km",
                         "poi_density_norm"])
        for p in parcels:
            a = p.attributes
            writer.writerow([p.parcel_id, repr(a.ln_size), repr(a.compactness),
                             repr(a.accessibility_km), repr(a.poi_density_norm)])
    print(f"{len(parcels)} parcels, {len(pois)} POIs kept ({dropped} outside boundary), "
          f"{net.warnings} ingest warnings")
    return 0


def cmd_calibrate(args) -> int:
    covariates = [c.strip() for c in args.covariates.split(",") if c.strip()]
    rows = []
    labels = []
    with open(args.samples, newline="", encoding="utf-8") as fh:
        for record in csv.DictReader(fh):
            try:
                rows.append([float(record[c]) for c in covariates])
                labels.append(float(record[args.label_column]))
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"bad sample row {record!r}: {exc}") from exc
    model, report = fit_logistic(np.array(rows), np.array(labels), covariates, l2=args.l2)
    print(f"converged={report.converged} iterations={report.n_iter} "
          f"accuracy={report.accuracy:.4f}")
    print(f"intercept={model.intercept:.6g} (se {report.std_errors[0]:.3g})")
    for name, coef, se in zip(covariates, model.coefficients, report.std_errors[1:]):
        print(f"{name}={coef:.6g} (se {se:.3g})")
    if args.out:
        model.to_json(args.out)
        print(f"model written to {args.out}")
    return 0


def _load_model(spec: str) -> LogisticModel:
    if spec in PRESETS:
        return PRESETS[spec]
    return LogisticModel.from_json(spec)


def read_parcels_file(path: str | Path) -> list[Parcel]:
    """Rebuild Parcel objects (with attributes) from a parcels feature file."""
    parcels = []
    for geom, props in featureio.read_features(path):
        attrs = AttributeVector(
            ln_size=float(props.get("ln_size", 0.0)),
            compactness=float(props.get("compactness", 0.0)),
            accessibility_km=float(props.get("accessibility_km", 0.0)),
            poi_density_norm=(
                None if props.get("poi_density_norm") is None
                else float(props["poi_density_norm"])
            ),
        )
        state = ParcelState(props.get("state", "non_urban"))
        parcels.append(
            Parcel.from_geometry(
                parcel_id=int(props["parcel_id"]),
                geometry=geom,
                attributes=attrs,
                state=state,
            )
        )
    return parcels


def cmd_simulate(args) -> int:
    parcels = read_parcels_file(args.parcels)
    if not parcels:
        raise ConfigError(f"{args.parcels}: no parcels")
    constraints = []
    for path in args.constraints:
        constraints.extend(g for g, _ in featureio.read_features(path))

    hull = box(*unary_union([p.geometry for p in parcels]).bounds)
    ctx = CityContext(
        city_id="cli",
        boundary=hull,
        center=(hull.centroid.x, hull.centroid.y),
        total_budget_m2=args.budget,
        constraint_polygons=constraints,
    )
    params = CAParams(
        beta=args.beta,
        p_thd=args.p_thd,
        neighborhood_radius_m=args.radius,
        rng_seed=args.seed,
        max_rounds=args.max_rounds,
    )
    result = run_ca(parcels, ctx, _load_model(args.model), params)
    apply_states(parcels, result)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    from .pipeline import _parcel_features

    featureio.write_features(out_dir / "simulated_parcels.geojson", _parcel_features(parcels))
    with open(out_dir / "rounds.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "conversions", "converted_area_m2", "urban_area_m2", "seeded"])
        for rec in result.rounds:
            writer.writerow([rec.round_index, rec.conversions, repr(rec.converted_area_m2),
                             repr(rec.urban_area_m2), int(rec.seeded)])
    urban = sum(1 for p in parcels if p.state is ParcelState.URBAN)
    print(f"{urban}/{len(parcels)} parcels urban after {len(result.rounds)} rounds")
    return 0


def cmd_aggregate(args) -> int:
    parcels = read_parcels_file(args.input)
    urban = [p for p in parcels if p.state is ParcelState.URBAN] or parcels
    ua = aggregate_parcels(urban, args.city_id, args.dist, args.min_area)
    write_urban_area(ua, args.out)
    print(f"{len(ua.polygons)} urban-area polygons, {ua.total_area_m2:.0f} m2 total")
    return 0


def cmd_validate_ranksize(args) -> int:
    sizes = []
    with open(args.input, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        column = "size" if reader.fieldnames and "size" in reader.fieldnames else (
            reader.fieldnames[0] if reader.fieldnames else None
        )
        if column is None:
            raise ConfigError(f"{args.input}: no columns found")
        for record in reader:
            sizes.append(float(record[column]))
    fit = rank_size_fit(sizes, head_only=args.head_only)
    print("n_used,alpha,r_squared,degenerate")
    print(f"{fit.n_used},{fit.alpha!r},{fit.r_squared!r},{int(fit.degenerate)}")
    return 0


def cmd_validate_overlap(args) -> int:
    ours = [g for g, _ in featureio.read_features(args.ours)]
    ref = [g for g, _ in featureio.read_features(args.ref)]
    rate = overlap_rate(ours, ref)
    print("overlap_rate")
    print(repr(rate))
    return 0


if __name__ == "__main__":
    sys.exit(main())
