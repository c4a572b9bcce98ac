"""Focused overlay rendering: selection, ids, determinism, well-formedness."""

import random
import xml.etree.ElementTree as ET

import pytest

from sforge.errors import UnknownElement
from sforge.overlay import ElementSelector, RouteMarkers, render_overlay
from sforge.routing import straight_route


def all_ids(svg: str) -> set[str]:
    root = ET.fromstring(svg)  # also proves well-formed XML
    return {el.get("id") for el in root.iter() if el.get("id")}


class TestFocusSelection:
    def test_focus_shows_only_requested_unit(self, mini_map):
        svg = render_overlay(mini_map, ElementSelector.of(
            units=["3DIV"], areas=["OBJ JAGUARS"]))
        ids = all_ids(svg)
        assert "unit-3DIV" in ids
        assert "obj-OBJ_JAGUARS" in ids
        assert {i for i in ids if i.startswith("unit-")} == {"unit-3DIV"}

    def test_empty_selector_gives_base_layer_only(self, mini_map):
        svg = render_overlay(mini_map, ElementSelector())
        ids = all_ids(svg)
        assert "frame" in ids
        assert {i for i in ids if i.startswith("pl-")} == {
            "pl-PL_APPLE", "pl-PL_BANANA", "pl-PL_CHERRY", "pl-PL_DATE",
            "pl-PL_FIG", "pl-PL_GRAPE"}
        assert not any(i.startswith(("unit-", "obj-", "route-", "corridor-",
                                     "obstacle-", "lane-", "wp-")) for i in ids)

    def test_route_markers_emit_one_wp_per_fraction(self, mini_map):
        route = straight_route([(30, 90), (110, 90)])
        svg = render_overlay(mini_map, ElementSelector(),
                             RouteMarkers("R1", route, (0.25, 0.5, 0.75)))
        ids = all_ids(svg)
        assert {i for i in ids if i.startswith("wp-")} == {"wp-0", "wp-1", "wp-2"}
        assert "route-R1" in ids

    def test_unknown_unit_rejected(self, mini_map):
        with pytest.raises(UnknownElement):
            render_overlay(mini_map, ElementSelector.of(units=["99XX"]))

    def test_unknown_area_rejected(self, mini_map):
        with pytest.raises(UnknownElement):
            render_overlay(mini_map, ElementSelector.of(areas=["OBJ NOWHERE"]))

    def test_lane_selectable_through_routes(self, mini_map):
        svg = render_overlay(mini_map, ElementSelector.of(routes=["LANE DENVER"]))
        assert "lane-LANE_DENVER" in all_ids(svg)

    def test_obstacles_selected_by_index(self, mini_map):
        svg = render_overlay(mini_map, ElementSelector.of(obstacles=[0]))
        assert "obstacle-0" in all_ids(svg)
        with pytest.raises(UnknownElement):
            render_overlay(mini_map, ElementSelector.of(obstacles=[9]))


class TestDeterminism:
    def test_identical_input_yields_byte_identical_svg(self, mini_map):
        selector = ElementSelector.of(units=["25ID", "IAD"],
                                      areas=["OBJ BRONCOS"],
                                      routes=["ROUTE COLORADO"])
        assert render_overlay(mini_map, selector) == render_overlay(mini_map, selector)

    def test_random_selectors_contain_exactly_selected_ids(self, mini_map):
        rng = random.Random(808)
        unit_ids = [u.id for u in mini_map.units]
        area_names = [a.name for a in mini_map.areas]
        route_names = [r.name for r in mini_map.routes_named]
        for _ in range(25):
            units = rng.sample(unit_ids, rng.randint(0, len(unit_ids)))
            areas = rng.sample(area_names, rng.randint(0, len(area_names)))
            routes = rng.sample(route_names, rng.randint(0, len(route_names)))
            selector = ElementSelector.of(units=units, areas=areas, routes=routes)
            svg = render_overlay(mini_map, selector)
            ids = all_ids(svg)
            assert {i for i in ids if i.startswith("unit-")} == {
                f"unit-{u}" for u in units}
            assert {i for i in ids if i.startswith("obj-")} == {
                f"obj-{a.replace(' ', '_')}" for a in areas}
            assert {i for i in ids if i.startswith("route-")} == {
                f"route-{r.replace(' ', '_')}" for r in routes}
            assert svg == render_overlay(mini_map, selector)

    def test_viewbox_is_bounds_scaled_by_ten(self, mini_map):
        svg = render_overlay(mini_map, ElementSelector())
        assert 'viewBox="0 0 2000 1500"' in svg

    def test_style_classes_present(self, mini_map):
        svg = render_overlay(mini_map, ElementSelector.of(
            units=["25ID", "165BCG"], corridors=["CORRIDOR NORTH"], obstacles=[0]))
        for css in ("friendly", "enemy", "obstacle", "corridor", "phase-line"):
            assert css in svg
