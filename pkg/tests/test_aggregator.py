from __future__ import annotations

import pytest
from shapely.geometry import box

from conftest import ORIGIN, rect_parcel
from parcelca.aggregator import UrbanArea, aggregate, read_urban_area, write_urban_area
from parcelca.parcelizer import Parcel

X0, Y0 = ORIGIN


def hectare(parcel_id, x, y):
    return rect_parcel(parcel_id, x, y, 100.0, 100.0)


class TestAggregate:
    def test_squares_within_distance_merge(self):
        # closing oracle: facing edges 100 m apart < 500, so half-buffers overlap
        ua = aggregate([hectare(0, 0, 0), hectare(1, 200, 0)], dist_m=500.0)
        assert len(ua.polygons) == 1
        assert ua.polygons[0].covers(box(0, 0, 100, 100))
        assert ua.polygons[0].covers(box(200, 0, 300, 100))

    def test_squares_beyond_distance_stay_apart(self):
        # 600 m gap: 250 m half-buffers cannot bridge it
        ua = aggregate([hectare(0, 0, 0), hectare(1, 700, 0)], dist_m=500.0)
        assert len(ua.polygons) == 2

    def test_small_isolated_parcel_dropped(self):
        half_hectare = rect_parcel(0, 0, 0, 100.0, 50.0)
        ua = aggregate([half_hectare], dist_m=500.0, min_area_m2=10_000.0)
        assert ua.polygons == []
        assert ua.total_area_m2 == 0.0

    def test_empty_input_empty_output(self):
        ua = aggregate([], city_id="e")
        assert ua.polygons == [] and ua.total_area_m2 == 0.0

    def test_extensive_every_parcel_contained(self):
        parcels = [hectare(0, 0, 0), hectare(1, 350, 120), hectare(2, 100, 420)]
        merged = aggregate(parcels, dist_m=500.0).geometry()
        for p in parcels:
            outside = p.geometry.difference(merged).area
            assert outside == pytest.approx(0.0, abs=1e-6)

    def test_total_area_at_least_parcel_sum(self):
        parcels = [hectare(0, 0, 0), hectare(1, 350, 120)]
        ua = aggregate(parcels, dist_m=500.0)
        assert ua.total_area_m2 >= sum(p.area_m2 for p in parcels)

    def test_near_idempotent(self):
        parcels = [hectare(0, 0, 0), hectare(1, 300, 0), hectare(2, 0, 300)]
        once = aggregate(parcels, dist_m=400.0)
        again_inputs = [
            Parcel.from_geometry(parcel_id=i, geometry=g) for i, g in enumerate(once.polygons)
        ]
        twice = aggregate(again_inputs, dist_m=400.0)
        assert twice.total_area_m2 == pytest.approx(once.total_area_m2, rel=1e-3)

    def test_small_holes_filled_large_holes_kept(self):
        # a frame of four parcels around a 90 x 90 courtyard, 1 m gaps
        frame = [
            rect_parcel(0, 0, 0, 300, 100),
            rect_parcel(1, 0, 201, 300, 100),
            rect_parcel(2, 0, 101, 100, 99),
            rect_parcel(3, 201, 101, 99, 99),
        ]
        filled = aggregate(frame, dist_m=50.0, min_area_m2=10_000.0)
        assert len(filled.polygons) == 1
        assert len(filled.polygons[0].interiors) == 0  # courtyard < 1 ha got filled

        kept = aggregate(frame, dist_m=50.0, min_area_m2=5_000.0)
        assert len(kept.polygons) == 1
        assert len(kept.polygons[0].interiors) == 1  # courtyard >= 0.5 ha survives


class TestUrbanAreaIO:
    def test_round_trip_preserves_areas(self, tmp_path):
        parcels = [hectare(0, X0, Y0), hectare(1, X0 + 700, Y0)]
        ua = aggregate(parcels, city_id="rt", dist_m=500.0)
        path = tmp_path / "ua.geojson"
        write_urban_area(ua, path)
        loaded = read_urban_area(path)
        assert loaded.city_id == "rt"
        assert len(loaded.polygons) == len(ua.polygons)
        for a, b in zip(loaded.polygons, ua.polygons):
            assert a.area == pytest.approx(b.area, rel=1e-6)
        assert loaded.total_area_m2 == pytest.approx(ua.total_area_m2, rel=1e-6)

    def test_two_polygon_area_writes_two_features(self, tmp_path):
        parcels = [hectare(0, X0, Y0), hectare(1, X0 + 700, Y0)]
        ua = aggregate(parcels, city_id="two", dist_m=500.0)
        path = tmp_path / "ua.geojson"
        write_urban_area(ua, path)
        import json

        doc = json.loads(path.read_text())
        assert len(doc["features"]) == 2
        assert doc["metadata"]["min_area_rule"] == "applied after hole filling"

    def test_empty_area_writes_valid_empty_file(self, tmp_path):
        path = tmp_path / "empty.geojson"
        write_urban_area(UrbanArea(city_id="none"), path)
        loaded = read_urban_area(path)
        assert loaded.polygons == []
