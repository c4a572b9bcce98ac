"""File-backed scenario state: JSON snapshot plus append-only event log.

The snapshot is always the fold of the event log; both live mutation and
recovery run through the same fold step, so replaying ``events.jsonl`` from
scratch reproduces ``state.json`` exactly. Snapshot writes are atomic
(temp file + rename).
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .blocks import (Actor, AutomationLevel, BlockKind, BlockState, EventType,
                     Phase, ReviewEvent, apply_review_event)
from .depgraph import DependencyGraph, descendants
from .errors import StorageError
from .scenario import Scenario, canonical_json

MAX_REGEN_ATTEMPTS = 3

SCENARIO_LOADED = "ScenarioLoaded"
GENERATION_FAILED = "GenerationFailed"


def utc_clock() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


class LogicalClock:
    """Deterministic counter clock for replayable runs."""

    def __init__(self):
        self._n = 0
        self._lock = threading.Lock()

    def __call__(self) -> str:
        with self._lock:
            self._n += 1
            return f"T{self._n:06d}"


@dataclass
class BlockRecord:
    level: AutomationLevel
    state: BlockState
    regen_attempts: int = 0

    def to_json(self) -> dict:
        return {"level": self.level.value, "state": self.state.to_json(),
                "regen_attempts": self.regen_attempts}


@dataclass
class FoldState:
    """Everything the event fold tracks."""

    scenario_id: str = ""
    blocks: dict[str, BlockRecord] = field(default_factory=dict)
    pre_generation: dict[str, BlockState] = field(default_factory=dict)

    def snapshot(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "blocks": {name: rec.to_json()
                       for name, rec in sorted(self.blocks.items())},
        }


def fold_step(state: FoldState, record: dict) -> FoldState:
    """Apply one event-log record. Mutates and returns ``state``."""
    rtype = record["type"]
    if rtype == SCENARIO_LOADED:
        state.scenario_id = record["scenario_id"]
        state.blocks = {
            entry["kind"]: BlockRecord(level=AutomationLevel(entry["level"]),
                                       state=BlockState.pending())
            for entry in record["blocks"]
        }
        return state
    kind = record["kind"]
    block = state.blocks[kind]
    if rtype == GENERATION_FAILED:
        block.state = state.pre_generation.pop(kind, block.state)
        return state
    event = ReviewEvent.from_json(record)
    if event.type is EventType.GENERATION_STARTED:
        state.pre_generation[kind] = block.state
    block.state = apply_review_event(block.state, block.level, event)
    if event.type is EventType.REJECT:
        block.regen_attempts += 1
    elif event.type in (EventType.APPROVE, EventType.EDIT, EventType.SELECT_OPTION):
        block.regen_attempts = 0
    return state


def fold_records(records: list[dict]) -> FoldState:
    state = FoldState()
    for record in records:
        fold_step(state, record)
    return state


class ScenarioStore:
    """Owns one scenario's persisted state; writes are serialized."""

    def __init__(self, directory: str | Path, clock=utc_clock):
        self.dir = Path(directory)
        self.clock = clock
        self._lock = threading.RLock()
        self._fold = FoldState()

    # --- paths ---

    @property
    def state_path(self) -> Path:
        return self.dir / "state.json"

    @property
    def events_path(self) -> Path:
        return self.dir / "events.jsonl"

    @property
    def traces_dir(self) -> Path:
        return self.dir / "traces"

    @property
    def artifacts_dir(self) -> Path:
        return self.dir / "artifacts"

    @property
    def outputs_dir(self) -> Path:
        return self.dir / "outputs"

    # --- lifecycle ---

    @classmethod
    def create(cls, directory: str | Path, scenario: Scenario,
               clock=utc_clock) -> "ScenarioStore":
        store = cls(directory, clock=clock)
        store.dir.mkdir(parents=True, exist_ok=True)
        if store.events_path.exists():
            raise StorageError(f"store already exists at {store.dir}")
        record = {
            "type": SCENARIO_LOADED,
            "scenario_id": scenario.id,
            "timestamp": store.clock(),
            "blocks": [{"kind": block.kind.name, "level": block.level.value}
                       for block in scenario.blocks.values()],
        }
        with store._lock:
            store._fold = fold_step(FoldState(), record)
            store._append(record)
            store._write_snapshot()
        return store

    @classmethod
    def open(cls, directory: str | Path, clock=utc_clock) -> "ScenarioStore":
        store = cls(directory, clock=clock)
        if not store.events_path.exists():
            raise StorageError(f"no event log under {store.dir}")
        store._fold = fold_records(store.read_events())
        return store

    # --- queries ---

    @property
    def scenario_id(self) -> str:
        return self._fold.scenario_id

    def block(self, kind: BlockKind) -> BlockRecord:
        return self._fold.blocks[kind.name]

    def block_names(self) -> list[str]:
        return sorted(self._fold.blocks)

    def states(self) -> dict[BlockKind, BlockState]:
        return {BlockKind.parse(name): rec.state
                for name, rec in self._fold.blocks.items()}

    def read_events(self) -> list[dict]:
        with self.events_path.open("r", encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def snapshot(self) -> dict:
        with self._lock:
            return self._fold.snapshot()

    # --- mutations ---

    def apply_event(self, kind: BlockKind, event: ReviewEvent) -> BlockState:
        """Apply + persist one review event; raises IllegalTransition."""
        with self._lock:
            record = {"kind": kind.name, **event.to_json()}
            record["timestamp"] = record["timestamp"] or self.clock()
            fold_step(self._fold, record)  # raises before anything is written
            self._append(record)
            self._write_snapshot()
            return self._fold.blocks[kind.name].state

    def record_failure(self, kind: BlockKind, reason: str) -> BlockState:
        """Mark a generation job failed; the block reverts to its pre-start state."""
        with self._lock:
            record = {"kind": kind.name, "type": GENERATION_FAILED,
                      "actor": Actor.SYSTEM.value, "reason": reason,
                      "timestamp": self.clock()}
            fold_step(self._fold, record)
            self._append(record)
            self._write_snapshot()
            return self._fold.blocks[kind.name].state

    def invalidate_downstream(self, graph: DependencyGraph,
                              edited: BlockKind) -> list[BlockKind]:
        """UpstreamEdited for every Approved descendant; returns those touched."""
        touched = []
        with self._lock:
            for kind in sorted(descendants(graph, edited), key=str):
                if kind.name not in self._fold.blocks:
                    continue
                if self._fold.blocks[kind.name].state.phase is Phase.APPROVED:
                    self.apply_event(kind, ReviewEvent(
                        type=EventType.UPSTREAM_EDITED, actor=Actor.SYSTEM,
                        timestamp=self.clock()))
                    touched.append(kind)
        return touched

    # --- internals ---

    def _append(self, record: dict):
        try:
            self.dir.mkdir(parents=True, exist_ok=True)
            with self.events_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
        except OSError as exc:
            raise StorageError(f"cannot append event: {exc}") from exc

    def _write_snapshot(self):
        try:
            fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(canonical_json(self._fold.snapshot()))
            os.replace(tmp, self.state_path)
        except OSError as exc:
            raise StorageError(f"cannot write snapshot: {exc}") from exc
