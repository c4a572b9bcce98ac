"""Map geometry: loading, validation, phase-line bracketing."""

import pytest

from sforge.errors import AmbiguousGeometry, SchemaError
from sforge.mapmodel import (load_map, locate_between_phase_lines,
                             point_in_polygon, polygon_centroid,
                             point_polyline_distance)

SQUARE = [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]


class TestGeometryHelpers:
    def test_point_in_polygon_interior(self):
        assert point_in_polygon((5, 5), SQUARE)

    def test_point_in_polygon_exterior(self):
        assert not point_in_polygon((15, 5), SQUARE)

    def test_boundary_counts_unless_strict(self):
        assert point_in_polygon((10, 5), SQUARE)
        assert not point_in_polygon((10, 5), SQUARE, strict=True)

    def test_centroid_of_square(self):
        assert polygon_centroid(SQUARE) == (5.0, 5.0)

    def test_polyline_distance(self):
        assert point_polyline_distance((5, 3), [(0, 0), (10, 0)]) == 3.0


class TestLoadMap:
    def test_missing_bounds_rejected(self):
        with pytest.raises(SchemaError):
            load_map({})

    def test_geometry_outside_bounds_rejected(self):
        with pytest.raises(SchemaError):
            load_map({"bounds": [0, 0, 10, 10],
                      "areas": [{"name": "X", "polygon": [[0, 0], [5, 5], [20, 0]]}]})

    def test_duplicate_phase_line_order_rejected(self):
        with pytest.raises(SchemaError):
            load_map({"bounds": [0, 0, 10, 10], "phase_lines": [
                {"name": "A", "order": 1, "points": [[1, 0], [1, 10]]},
                {"name": "B", "order": 1, "points": [[2, 0], [2, 10]]},
            ]})

    def test_corridor_multiplier_must_not_penalize(self):
        with pytest.raises(SchemaError):
            load_map({"bounds": [0, 0, 10, 10], "corridors": [
                {"name": "C", "points": [[0, 5], [10, 5]], "width": 2, "cost": 1.5},
            ]})

    def test_obstacle_multiplier_must_be_at_least_one(self):
        with pytest.raises(SchemaError):
            load_map({"bounds": [0, 0, 10, 10], "obstacles": [
                {"polygon": [[1, 1], [2, 1], [2, 2]], "kind": {"cost": 0.5}},
            ]})

    def test_fixture_loads(self, mini_map):
        assert len(mini_map.phase_lines) == 6
        assert {u.id for u in mini_map.units} == {"25ID", "3DIV", "IAD",
                                                  "165BCG", "164BCG"}


class TestLocateBetweenPhaseLines:
    def test_fixture_point_between_apple_and_banana(self, mini_map):
        # independent oracle: interpolate each (x-monotone) polyline's x at
        # the query latitude and compare plain x ordering
        p = (30.0, 50.0)

        def x_at(points, y):
            for (x1, y1), (x2, y2) in zip(points, points[1:]):
                if min(y1, y2) <= y <= max(y1, y2) and y1 != y2:
                    return x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            raise AssertionError("latitude outside polyline span")

        west_oracle, east_oracle = None, None
        for pl in sorted(mini_map.phase_lines, key=lambda l: l.order):
            if x_at(pl.points, p[1]) < p[0]:
                west_oracle = pl.name
            elif east_oracle is None:
                east_oracle = pl.name
        assert (west_oracle, east_oracle) == ("PL APPLE", "PL BANANA")
        assert locate_between_phase_lines(mini_map, p) == (west_oracle, east_oracle)

    def test_west_of_everything_hits_map_edge(self, mini_map):
        assert locate_between_phase_lines(mini_map, (5.0, 50.0)) == (
            "WestEdge", "PL APPLE")

    def test_east_of_everything_hits_map_edge(self, mini_map):
        assert locate_between_phase_lines(mini_map, (190.0, 50.0)) == (
            "PL GRAPE", "EastEdge")

    def test_point_on_phase_line_is_ambiguous(self, mini_map):
        with pytest.raises(AmbiguousGeometry):
            locate_between_phase_lines(mini_map, (105.0, 60.0))  # on PL DATE
