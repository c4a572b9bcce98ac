"""Information-block taxonomy, automation levels, and the review state machine.

The transition table here is the single source of truth for block review
lifecycle; ``docs/state_machine.json`` mirrors it and the test suite checks
the two never diverge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources

from .errors import IllegalTransition

STANDARD_KINDS = (
    "Backstory",
    "LearningObjectives",
    "MapMcoo",
    "ForceGroupings",
    "RedBlueObjectives",
    "HighLevelUnitPurpose",
    "DecisionSupportMatrix",
    "UnitPositionsTimeBased",
    "OpordSchemeOfManeuver",
)

OPORD_SECTION = "OpordSection"


@dataclass(frozen=True)
class BlockKind:
    """A block identity; OPORD sections carry a section name."""

    base: str
    section: str | None = None

    def __post_init__(self):
        if self.base == OPORD_SECTION:
            if not self.section:
                raise ValueError("OpordSection requires a section name")
        elif self.base not in STANDARD_KINDS:
            raise ValueError(f"unknown block kind {self.base!r}")
        elif self.section is not None:
            raise ValueError(f"{self.base} does not take a section name")

    @property
    def name(self) -> str:
        if self.section is None:
            return self.base
        return f"{self.base}:{self.section}"

    def __str__(self) -> str:
        return self.name

    @classmethod
    def parse(cls, name: str) -> "BlockKind":
        base, sep, section = name.partition(":")
        return cls(base, section if sep else None)


# Shorthand constants for the nine standard kinds.
BACKSTORY = BlockKind("Backstory")
LEARNING_OBJECTIVES = BlockKind("LearningObjectives")
MAP_MCOO = BlockKind("MapMcoo")
FORCE_GROUPINGS = BlockKind("ForceGroupings")
RED_BLUE_OBJECTIVES = BlockKind("RedBlueObjectives")
HIGH_LEVEL_UNIT_PURPOSE = BlockKind("HighLevelUnitPurpose")
DECISION_SUPPORT_MATRIX = BlockKind("DecisionSupportMatrix")
UNIT_POSITIONS = BlockKind("UnitPositionsTimeBased")
SCHEME_OF_MANEUVER = BlockKind("OpordSchemeOfManeuver")


class AutomationLevel(str, Enum):
    GREEN = "Green"
    ORANGE = "Orange"
    PURPLE = "Purple"


def _load_level_table() -> dict[str, AutomationLevel]:
    raw = json.loads(resources.files("sforge.data").joinpath("block_levels.json").read_text())
    table: dict[str, AutomationLevel] = {}
    for level_name, kinds in raw.items():
        for kind_name in kinds:
            table[kind_name] = AutomationLevel(level_name)
    return table


_LEVEL_TABLE: dict[str, AutomationLevel] | None = None


def automation_level_of(kind: BlockKind) -> AutomationLevel:
    """Classification of a block kind per the repo-level table."""
    global _LEVEL_TABLE
    if _LEVEL_TABLE is None:
        _LEVEL_TABLE = _load_level_table()
    if kind.base == OPORD_SECTION:
        return _LEVEL_TABLE[f"{OPORD_SECTION}:*"]
    return _LEVEL_TABLE[kind.base]


class Phase(str, Enum):
    PENDING = "Pending"
    READY = "Ready"
    GENERATING = "Generating"
    AWAITING_REVIEW = "AwaitingReview"
    AWAITING_SELECTION = "AwaitingSelection"
    APPROVED = "Approved"
    REJECTED = "Rejected"
    STALE = "Stale"


@dataclass(frozen=True)
class BlockState:
    """Review-lifecycle state plus the payload the phase carries.

    ``content`` holds the candidate text in AwaitingReview and the
    authoritative text in Approved (and survives into Stale so the stale
    content stays visible, flagged). ``options`` is only populated in
    AwaitingSelection; ``feedback`` only in Rejected.
    """

    phase: Phase
    content: str | None = None
    options: tuple[str, ...] = ()
    feedback: str | None = None

    @classmethod
    def pending(cls) -> "BlockState":
        return cls(Phase.PENDING)

    def to_json(self) -> dict:
        out: dict = {"phase": self.phase.value}
        if self.content is not None:
            out["content"] = self.content
        if self.options:
            out["options"] = list(self.options)
        if self.feedback is not None:
            out["feedback"] = self.feedback
        return out

    @classmethod
    def from_json(cls, raw: dict) -> "BlockState":
        return cls(
            phase=Phase(raw["phase"]),
            content=raw.get("content"),
            options=tuple(raw.get("options", ())),
            feedback=raw.get("feedback"),
        )


class Actor(str, Enum):
    HUMAN = "Human"
    SYSTEM = "System"


class EventType(str, Enum):
    GENERATION_STARTED = "GenerationStarted"
    GENERATION_FINISHED = "GenerationFinished"
    APPROVE = "Approve"
    REJECT = "Reject"
    EDIT = "Edit"
    SELECT_OPTION = "SelectOption"
    UPSTREAM_EDITED = "UpstreamEdited"


HUMAN_ONLY_EVENTS = frozenset(
    {EventType.APPROVE, EventType.REJECT, EventType.EDIT, EventType.SELECT_OPTION}
)


@dataclass(frozen=True)
class ReviewEvent:
    """One review action. Human-only event types reject a System actor."""

    type: EventType
    actor: Actor
    timestamp: str = ""
    payload: str | None = None         # GenerationFinished text, Edit new content
    options: tuple[str, ...] = ()      # GenerationFinished options (purple)
    feedback: str | None = None        # Reject
    index: int | None = None           # SelectOption

    def __post_init__(self):
        if self.type in HUMAN_ONLY_EVENTS and self.actor is not Actor.HUMAN:
            raise ValueError(f"{self.type.value} requires a human actor")
        if self.type is EventType.REJECT and not (self.feedback or "").strip():
            raise ValueError("Reject requires feedback text")
        if self.type is EventType.EDIT and self.payload is None:
            raise ValueError("Edit requires replacement content")
        if self.type is EventType.SELECT_OPTION and self.index is None:
            raise ValueError("SelectOption requires an option index")

    def to_json(self) -> dict:
        out: dict = {"type": self.type.value, "actor": self.actor.value,
                     "timestamp": self.timestamp}
        if self.payload is not None:
            out["payload"] = self.payload
        if self.options:
            out["options"] = list(self.options)
        if self.feedback is not None:
            out["feedback"] = self.feedback
        if self.index is not None:
            out["index"] = self.index
        return out

    @classmethod
    def from_json(cls, raw: dict) -> "ReviewEvent":
        return cls(
            type=EventType(raw["type"]),
            actor=Actor(raw["actor"]),
            timestamp=raw.get("timestamp", ""),
            payload=raw.get("payload"),
            options=tuple(raw.get("options", ())),
            feedback=raw.get("feedback"),
            index=raw.get("index"),
        )


# Legal (phase, event) -> next phase, shared by every automation level.
_COMMON_TABLE: dict[tuple[Phase, EventType], Phase] = {
    (Phase.PENDING, EventType.GENERATION_STARTED): Phase.GENERATING,
    (Phase.READY, EventType.GENERATION_STARTED): Phase.GENERATING,
    (Phase.REJECTED, EventType.GENERATION_STARTED): Phase.GENERATING,
    (Phase.STALE, EventType.GENERATION_STARTED): Phase.GENERATING,
    (Phase.PENDING, EventType.EDIT): Phase.APPROVED,
    (Phase.READY, EventType.EDIT): Phase.APPROVED,
    (Phase.REJECTED, EventType.EDIT): Phase.APPROVED,
    (Phase.STALE, EventType.EDIT): Phase.APPROVED,
    (Phase.APPROVED, EventType.EDIT): Phase.APPROVED,
    (Phase.STALE, EventType.APPROVE): Phase.APPROVED,
    (Phase.APPROVED, EventType.UPSTREAM_EDITED): Phase.STALE,
    (Phase.STALE, EventType.UPSTREAM_EDITED): Phase.STALE,
}

_LEVEL_TABLE_EXTRA: dict[AutomationLevel, dict[tuple[Phase, EventType], Phase]] = {
    AutomationLevel.GREEN: {
        (Phase.GENERATING, EventType.GENERATION_FINISHED): Phase.APPROVED,
    },
    AutomationLevel.ORANGE: {
        (Phase.GENERATING, EventType.GENERATION_FINISHED): Phase.AWAITING_REVIEW,
        (Phase.AWAITING_REVIEW, EventType.APPROVE): Phase.APPROVED,
        (Phase.AWAITING_REVIEW, EventType.REJECT): Phase.REJECTED,
        (Phase.AWAITING_REVIEW, EventType.EDIT): Phase.APPROVED,
    },
    AutomationLevel.PURPLE: {
        (Phase.GENERATING, EventType.GENERATION_FINISHED): Phase.AWAITING_SELECTION,
        (Phase.AWAITING_SELECTION, EventType.SELECT_OPTION): Phase.APPROVED,
        (Phase.AWAITING_SELECTION, EventType.REJECT): Phase.REJECTED,
        (Phase.AWAITING_SELECTION, EventType.EDIT): Phase.APPROVED,
    },
}


def transition_table(level: AutomationLevel) -> dict[tuple[Phase, EventType], Phase]:
    """The full legal transition map for one automation level."""
    table = dict(_COMMON_TABLE)
    table.update(_LEVEL_TABLE_EXTRA[level])
    return table


def apply_review_event(state: BlockState, level: AutomationLevel,
                       event: ReviewEvent) -> BlockState:
    """Pure transition function; raises IllegalTransition off the table."""
    key = (state.phase, event.type)
    table = transition_table(level)
    if key not in table:
        raise IllegalTransition(
            f"{event.type.value} is not legal for a {level.value} block in {state.phase.value}"
        )
    nxt = table[key]

    if event.type is EventType.GENERATION_STARTED:
        return BlockState(Phase.GENERATING, content=state.content,
                          feedback=state.feedback)
    if event.type is EventType.GENERATION_FINISHED:
        if level is AutomationLevel.PURPLE:
            if len(event.options) < 2:
                raise IllegalTransition(
                    "purple generation must finish with at least 2 options"
                )
            return BlockState(Phase.AWAITING_SELECTION, options=event.options)
        if event.payload is None:
            raise IllegalTransition("generation finished without a payload")
        return BlockState(nxt, content=event.payload)
    if event.type is EventType.APPROVE:
        if state.content is None:
            raise IllegalTransition("nothing to approve: state carries no content")
        return BlockState(Phase.APPROVED, content=state.content)
    if event.type is EventType.REJECT:
        return BlockState(Phase.REJECTED, feedback=event.feedback)
    if event.type is EventType.EDIT:
        return BlockState(Phase.APPROVED, content=event.payload)
    if event.type is EventType.SELECT_OPTION:
        if not (0 <= event.index < len(state.options)):
            raise IllegalTransition(
                f"option index {event.index} out of range for {len(state.options)} options"
            )
        return BlockState(Phase.APPROVED, content=state.options[event.index])
    if event.type is EventType.UPSTREAM_EDITED:
        return BlockState(Phase.STALE, content=state.content)
    raise IllegalTransition(f"unhandled event {event.type}")  # pragma: no cover


@dataclass
class InformationBlock:
    """A scenario pipeline node: kind, automation level, review state."""

    kind: BlockKind
    level: AutomationLevel
    state: BlockState

    @classmethod
    def fresh(cls, kind: BlockKind) -> "InformationBlock":
        return cls(kind=kind, level=automation_level_of(kind), state=BlockState.pending())
