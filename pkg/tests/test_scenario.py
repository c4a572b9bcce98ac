"""Scenario package loading, validation, and canonical round-trip."""

import json

import pytest

from sforge.blocks import Phase
from sforge.errors import DanglingReference, SchemaError, TimelineInvalid
from sforge.scenario import (UnitPositionTimeline, assemble_package,
                             load_scenario, load_scenario_dir,
                             serialize_scenario)

from conftest import FIXTURE_DIR


@pytest.fixture()
def package() -> dict:
    return json.loads(assemble_package(FIXTURE_DIR))


def as_bytes(package: dict) -> bytes:
    from sforge.scenario import canonical_json
    return canonical_json(package).encode("utf-8")


class TestLoadScenario:
    def test_fixture_loads_nine_pending_blocks(self, package, mini_map_doc):
        scenario = load_scenario(as_bytes(package), map_document=mini_map_doc)
        assert len(scenario.blocks) == 9
        assert all(b.state.phase is Phase.PENDING for b in scenario.blocks.values())

    def test_round_trip_is_byte_identical(self, mini_map_doc):
        document = assemble_package(FIXTURE_DIR)
        scenario = load_scenario(document, map_document=mini_map_doc)
        assert serialize_scenario(scenario) == document

    def test_missing_map_ref_is_schema_error(self, package):
        del package["scenario"]["map_ref"]
        with pytest.raises(SchemaError):
            load_scenario(as_bytes(package))

    def test_missing_package_file_is_schema_error(self, package):
        del package["dsm"]
        with pytest.raises(SchemaError):
            load_scenario(as_bytes(package))

    def test_trigger_with_unknown_unit_is_dangling(self, package):
        package["dsm"]["triggers"][0]["unit"] = "99XX"
        with pytest.raises(DanglingReference):
            load_scenario(as_bytes(package))

    def test_trigger_reference_point_must_resolve(self, package, mini_map_doc):
        package["dsm"]["triggers"][0]["reference_point"] = "PL NOWHERE"
        with pytest.raises(DanglingReference):
            load_scenario(as_bytes(package), map_document=mini_map_doc)
        # without a map document the reference cannot be checked, so it loads
        load_scenario(as_bytes(package))

    def test_duplicate_opord_section_names_rejected(self, package):
        package["scenario"]["blocks"] += ["OpordSection:Fires", "OpordSection:Fires"]
        with pytest.raises(SchemaError):
            load_scenario(as_bytes(package))

    def test_graph_node_without_block_is_dangling(self, package):
        package["scenario"]["blocks"].remove("Backstory")
        with pytest.raises(DanglingReference):
            load_scenario(as_bytes(package))

    def test_graph_override_is_honored(self, package):
        package["scenario"]["graph"] = {
            "nodes": ["Backstory", "RedBlueObjectives"],
            "edges": [["Backstory", "RedBlueObjectives"]]}
        scenario = load_scenario(as_bytes(package))
        assert len(scenario.graph.nodes) == 2

    def test_load_dir_resolves_map(self):
        scenario, model = load_scenario_dir(FIXTURE_DIR)
        assert scenario.map_ref == "map.json"
        assert model.in_bounds((30, 90))

    def test_not_json_is_schema_error(self):
        with pytest.raises(SchemaError):
            load_scenario(b"not json at all")


class TestTimeline:
    def test_round_trip(self):
        raw = {"unit": "25ID", "samples": [
            {"day": 1, "position": [30, 90], "context": ["PL APPLE", "PL BANANA"]}]}
        timeline = UnitPositionTimeline.from_json(raw)
        assert timeline.to_json() == {
            "unit": "25ID", "samples": [
                {"day": 1, "position": [30.0, 90.0],
                 "context": ["PL APPLE", "PL BANANA"]}]}

    def test_malformed_payload_rejected(self):
        with pytest.raises(TimelineInvalid):
            UnitPositionTimeline.from_json({"unit": "25ID"})
        with pytest.raises(TimelineInvalid):
            UnitPositionTimeline.from_json(
                {"unit": "x", "samples": [{"day": "one", "position": [0, 0]}]})

    def test_validation_enforces_bounds_and_order(self, mini_map):
        ok = UnitPositionTimeline.from_json({"unit": "25ID", "samples": [
            {"day": 1, "position": [30, 90], "context": ["a", "b"]},
            {"day": 2, "position": [40, 90], "context": ["a", "b"]}]})
        ok.validate(mini_map)
        bad_order = UnitPositionTimeline.from_json({"unit": "25ID", "samples": [
            {"day": 2, "position": [30, 90], "context": ["a", "b"]},
            {"day": 1, "position": [40, 90], "context": ["a", "b"]}]})
        with pytest.raises(TimelineInvalid):
            bad_order.validate(mini_map)
        out_of_bounds = UnitPositionTimeline.from_json({"unit": "25ID", "samples": [
            {"day": 1, "position": [999, 90], "context": ["a", "b"]}]})
        with pytest.raises(TimelineInvalid):
            out_of_bounds.validate(mini_map)
