"""Pipeline runner: seeding, pausing, auto-approvals, failure handling."""

import pytest

from sforge.blocks import Actor, BlockKind, EventType, Phase, ReviewEvent
from sforge.gateway import LlmGateway
from sforge.pipeline import (build_registry, generation_targets, run_pipeline,
                             seed_package_blocks)
from sforge.store import LogicalClock, ScenarioStore

from conftest import CASSETTE


def k(name: str) -> BlockKind:
    return BlockKind.parse(name)


@pytest.fixture()
def setup(tmp_path, mini_pacific, mini_map_doc):
    scenario, model = mini_pacific
    store = ScenarioStore.create(tmp_path / "store", scenario,
                                 clock=LogicalClock())
    return scenario, model, mini_map_doc, store


def replay_gateway() -> LlmGateway:
    return LlmGateway("replay", cassette_path=CASSETTE)


class TestSeeding:
    def test_seeds_the_seven_package_blocks(self, setup):
        scenario, model, map_doc, store = setup
        seeded = seed_package_blocks(scenario, map_doc, store)
        assert {s.name for s in seeded} == {
            "Backstory", "LearningObjectives", "MapMcoo", "ForceGroupings",
            "RedBlueObjectives", "HighLevelUnitPurpose", "DecisionSupportMatrix"}
        for kind in seeded:
            assert store.block(kind).state.phase is Phase.APPROVED
        assert store.block(k("UnitPositionsTimeBased")).state.phase is Phase.PENDING

    def test_seeding_is_idempotent(self, setup):
        scenario, model, map_doc, store = setup
        seed_package_blocks(scenario, map_doc, store)
        assert seed_package_blocks(scenario, map_doc, store) == []

    def test_generation_targets_are_the_two_poc_blocks(self, setup):
        scenario, *_ = setup
        assert {t.name for t in generation_targets(scenario)} == {
            "UnitPositionsTimeBased", "OpordSchemeOfManeuver"}


class TestRegistry:
    def test_registry_only_serves_approved_content(self, setup, tmp_path):
        scenario, model, map_doc, store = setup
        seed_package_blocks(scenario, map_doc, store)
        store.apply_event(k("HighLevelUnitPurpose"), ReviewEvent(
            type=EventType.UPSTREAM_EDITED, actor=Actor.SYSTEM))
        from sforge.agents import ArtifactStore
        registry = build_registry(scenario, model, store,
                                  ArtifactStore(tmp_path / "a"))
        assert "DecisionSupportMatrix" in registry.helpers
        assert "HighLevelUnitPurpose" not in registry.helpers  # stale: excluded
        assert registry.map_agent is not None


class TestRunPipeline:
    def test_default_pause_stops_at_orange_review(self, setup):
        scenario, model, map_doc, store = setup
        report = run_pipeline(scenario, model, map_doc, store, replay_gateway())
        assert report.paused_on == "UnitPositionsTimeBased"
        state = store.block(k("UnitPositionsTimeBased")).state
        assert state.phase is Phase.AWAITING_REVIEW

    def test_green_gate_requires_flag(self, setup):
        scenario, model, map_doc, store = setup
        report = run_pipeline(scenario, model, map_doc, store, replay_gateway(),
                              auto_approve_green=False, pause_on=("purple",))
        assert report.completed == ["UnitPositionsTimeBased"]
        assert report.paused_on == "OpordSchemeOfManeuver"
        assert store.block(k("OpordSchemeOfManeuver")).state.phase is Phase.PENDING

    def test_unattended_run_completes_both_blocks(self, setup):
        scenario, model, map_doc, store = setup
        report = run_pipeline(scenario, model, map_doc, store, replay_gateway(),
                              auto_approve_green=True, pause_on=("purple",))
        assert report.ok
        assert report.completed == ["UnitPositionsTimeBased",
                                    "OpordSchemeOfManeuver"]
        assert (store.outputs_dir / "UnitPositionsTimeBased.json").exists()
        assert (store.outputs_dir / "OpordSchemeOfManeuver.md").exists()

    def test_resume_after_human_approval(self, setup):
        scenario, model, map_doc, store = setup
        run_pipeline(scenario, model, map_doc, store, replay_gateway())
        store.apply_event(k("UnitPositionsTimeBased"),
                          ReviewEvent(type=EventType.APPROVE, actor=Actor.HUMAN))
        report = run_pipeline(scenario, model, map_doc, store, replay_gateway(),
                              auto_approve_green=True, pause_on=("purple",))
        assert report.completed == ["OpordSchemeOfManeuver"]
        assert report.ok

    def test_gateway_failure_restores_state_and_reports(self, setup):
        scenario, model, map_doc, store = setup
        # empty script: the first orchestrator call exhausts it
        gateway = LlmGateway("scripted", script=[])
        report = run_pipeline(scenario, model, map_doc, store, gateway,
                              auto_approve_green=True, pause_on=("purple",))
        assert "UnitPositionsTimeBased" in report.failures
        assert store.block(k("UnitPositionsTimeBased")).state.phase is Phase.PENDING
        events = store.read_events()
        assert events[-1]["type"] == "GenerationFailed"

    def test_regen_limit_blocks_further_attempts(self, setup):
        scenario, model, map_doc, store = setup
        seed_package_blocks(scenario, map_doc, store)
        kind = k("UnitPositionsTimeBased")
        for i in range(3):
            store.apply_event(kind, ReviewEvent(
                type=EventType.GENERATION_STARTED, actor=Actor.SYSTEM))
            store.apply_event(kind, ReviewEvent(
                type=EventType.GENERATION_FINISHED, actor=Actor.SYSTEM,
                payload=f"draft {i}"))
            store.apply_event(kind, ReviewEvent(
                type=EventType.REJECT, actor=Actor.HUMAN, feedback=f"no {i}"))
        report = run_pipeline(scenario, model, map_doc, store, replay_gateway(),
                              auto_approve_green=True, pause_on=("purple",))
        assert "UnitPositionsTimeBased" in report.failures
        assert "edit required" in report.failures["UnitPositionsTimeBased"]
