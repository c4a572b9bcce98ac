"""Event-sourced persistence: fold equality, atomicity, failure recovery."""

import json
import os

import pytest

from sforge.blocks import Actor, BlockKind, EventType, Phase, ReviewEvent
from sforge.errors import IllegalTransition, StorageError
from sforge.store import (LogicalClock, ScenarioStore, fold_records)


def k(name: str) -> BlockKind:
    return BlockKind.parse(name)


def human(event_type, **kw) -> ReviewEvent:
    return ReviewEvent(type=event_type, actor=Actor.HUMAN, **kw)


def system(event_type, **kw) -> ReviewEvent:
    return ReviewEvent(type=event_type, actor=Actor.SYSTEM, **kw)


@pytest.fixture()
def store(tmp_path, mini_pacific):
    scenario, _ = mini_pacific
    return ScenarioStore.create(tmp_path / "s", scenario, clock=LogicalClock())


def assert_fold_matches_snapshot(store: ScenarioStore):
    folded = fold_records(store.read_events()).snapshot()
    on_disk = json.loads(store.state_path.read_text())
    assert folded == on_disk
    assert folded == store.snapshot()


class TestLifecycle:
    def test_create_writes_all_pending_snapshot(self, store):
        snap = store.snapshot()
        assert snap["scenario_id"] == "mini-pacific"
        assert len(snap["blocks"]) == 9
        assert all(b["state"]["phase"] == "Pending" for b in snap["blocks"].values())
        assert_fold_matches_snapshot(store)

    def test_create_refuses_existing_store(self, tmp_path, mini_pacific):
        scenario, _ = mini_pacific
        ScenarioStore.create(tmp_path / "s", scenario)
        with pytest.raises(StorageError):
            ScenarioStore.create(tmp_path / "s", scenario)

    def test_reopen_reproduces_state(self, store, mini_pacific):
        store.apply_event(k("Backstory"), human(EventType.EDIT, payload="story"))
        reopened = ScenarioStore.open(store.dir)
        assert reopened.snapshot() == store.snapshot()


class TestEventLog:
    def test_every_mutation_appends_and_folds(self, store):
        before = len(store.read_events())
        store.apply_event(k("ForceGroupings"), human(EventType.EDIT, payload="fg"))
        assert_fold_matches_snapshot(store)
        store.apply_event(k("HighLevelUnitPurpose"),
                          human(EventType.EDIT, payload="hlup"))
        assert_fold_matches_snapshot(store)
        assert len(store.read_events()) == before + 2

    def test_illegal_transition_writes_nothing(self, store):
        before = store.read_events()
        with pytest.raises(IllegalTransition):
            store.apply_event(k("Backstory"), human(EventType.APPROVE))
        assert store.read_events() == before
        assert_fold_matches_snapshot(store)

    def test_generation_cycle_round_trips(self, store):
        kind = k("UnitPositionsTimeBased")
        store.apply_event(kind, system(EventType.GENERATION_STARTED))
        store.apply_event(kind, system(EventType.GENERATION_FINISHED,
                                       payload="timeline"))
        assert store.block(kind).state.phase is Phase.AWAITING_REVIEW
        store.apply_event(kind, human(EventType.APPROVE))
        assert store.block(kind).state.content == "timeline"
        assert_fold_matches_snapshot(store)

    def test_failure_restores_pre_generation_state(self, store):
        kind = k("UnitPositionsTimeBased")
        store.apply_event(kind, system(EventType.GENERATION_STARTED))
        assert store.block(kind).state.phase is Phase.GENERATING
        store.record_failure(kind, "TimelineInvalid: out of bounds")
        assert store.block(kind).state.phase is Phase.PENDING
        assert_fold_matches_snapshot(store)

    def test_failure_after_rejection_restores_rejected(self, store):
        kind = k("UnitPositionsTimeBased")
        store.apply_event(kind, system(EventType.GENERATION_STARTED))
        store.apply_event(kind, system(EventType.GENERATION_FINISHED, payload="x"))
        store.apply_event(kind, human(EventType.REJECT, feedback="wrong route"))
        store.apply_event(kind, system(EventType.GENERATION_STARTED))
        store.record_failure(kind, "gateway")
        state = store.block(kind).state
        assert state.phase is Phase.REJECTED
        assert state.feedback == "wrong route"
        assert_fold_matches_snapshot(store)

    def test_regen_attempts_count_rejections_and_reset_on_approval(self, store):
        kind = k("UnitPositionsTimeBased")
        for i in range(2):
            store.apply_event(kind, system(EventType.GENERATION_STARTED))
            store.apply_event(kind, system(EventType.GENERATION_FINISHED,
                                           payload=f"v{i}"))
            store.apply_event(kind, human(EventType.REJECT, feedback=f"no {i}"))
        assert store.block(kind).regen_attempts == 2
        store.apply_event(kind, human(EventType.EDIT, payload="final"))
        assert store.block(kind).regen_attempts == 0
        assert_fold_matches_snapshot(store)


class TestInvalidation:
    def test_upstream_edit_stales_approved_descendants(self, store, mini_pacific):
        scenario, _ = mini_pacific
        for name in ("HighLevelUnitPurpose", "DecisionSupportMatrix", "MapMcoo",
                     "UnitPositionsTimeBased", "OpordSchemeOfManeuver"):
            store.apply_event(k(name), human(EventType.EDIT, payload="content"))
        touched = store.invalidate_downstream(scenario.graph,
                                              k("HighLevelUnitPurpose"))
        names = {t.name for t in touched}
        assert names == {"UnitPositionsTimeBased", "OpordSchemeOfManeuver"}
        assert store.block(k("UnitPositionsTimeBased")).state.phase is Phase.STALE
        assert store.block(k("DecisionSupportMatrix")).state.phase is Phase.APPROVED
        assert_fold_matches_snapshot(store)


class TestAtomicity:
    def test_crash_between_temp_write_and_rename_keeps_prior_snapshot(
            self, store, monkeypatch):
        good_snapshot = store.state_path.read_text()
        real_replace = os.replace

        def exploding_replace(src, dst):
            if str(dst).endswith("state.json"):
                raise OSError("simulated crash")
            return real_replace(src, dst)

        monkeypatch.setattr(os, "replace", exploding_replace)
        with pytest.raises(StorageError):
            store.apply_event(k("Backstory"), human(EventType.EDIT, payload="x"))
        monkeypatch.undo()
        assert store.state_path.read_text() == good_snapshot
        # the event log is the source of truth: reopening folds the appended
        # event and heals the snapshot
        reopened = ScenarioStore.open(store.dir)
        assert reopened.block(k("Backstory")).state.phase is Phase.APPROVED
