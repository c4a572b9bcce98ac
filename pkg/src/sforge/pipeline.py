"""Unattended pipeline runner shared by the CLI and the review service.

Package-backed blocks are seeded as human-authored content (Edit events),
then generation targets run in topological order as they become ready.
Orange results pause for review unless the operator granted auto-approval;
purple results pause for option selection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .agents import ArtifactStore, HelperAgent, MapAgent, Registry
from .blocks import (Actor, AutomationLevel, BlockKind, EventType, Phase,
                     ReviewEvent)
from .depgraph import ready_blocks, topological_order
from .errors import (CoverageError, OrchestratorAbort, SforgeError,
                     TimelineInvalid)
from .gateway import LlmGateway
from .mapmodel import MapModel
from .orchestrator import (TaskSpec, generate_scheme_of_maneuver,
                           load_strategy, predict_unit_positions, run_task)
from .retrieval import Corpus, chunk_document
from .scenario import SEEDED_DOC_KEYS, Scenario, canonical_json
from .store import MAX_REGEN_ATTEMPTS, ScenarioStore

HELPER_PREAMBLE = (
    "You are the {kind} helper agent for the scenario \"{title}\". "
    "Answer the question precisely and strictly from the context you were given."
)


def helper_preamble(kind_name: str, title: str) -> str:
    return HELPER_PREAMBLE.format(kind=kind_name, title=title)


def build_registry(scenario: Scenario, model: MapModel, store: ScenarioStore,
                   artifacts: ArtifactStore) -> Registry:
    """Helpers for every Approved block (stale content is excluded), plus the
    tool-bearing map agent."""
    registry = Registry()
    for kind, block in scenario.blocks.items():
        if kind.name == "MapMcoo":
            continue
        state = store.block(kind).state
        if state.phase is not Phase.APPROVED or state.content is None:
            continue
        chunks = chunk_document(state.content, source=kind.name)
        registry.add(HelperAgent(
            kind_name=kind.name,
            corpus=Corpus.build(chunks),
            system_preamble=helper_preamble(kind.name, scenario.title),
        ))
    registry.map_agent = MapAgent(model, artifacts)
    return registry


def seed_package_blocks(scenario: Scenario, map_doc: dict,
                        store: ScenarioStore) -> list[BlockKind]:
    """Approve every block whose content ships in the package.

    The package is human-authored material, so seeding is an Edit by the
    scenario author. Already-processed blocks are left alone.
    """
    seeded = []
    for kind in scenario.blocks:
        if store.block(kind).state.phase is not Phase.PENDING:
            continue
        if kind.name not in SEEDED_DOC_KEYS and kind.name != "MapMcoo":
            continue
        content = scenario.seeded_content(kind, map_document=map_doc)
        if content is None:
            continue
        store.apply_event(kind, ReviewEvent(
            type=EventType.EDIT, actor=Actor.HUMAN, payload=content))
        seeded.append(kind)
    return seeded


def generation_targets(scenario: Scenario) -> list[BlockKind]:
    return [kind for kind in scenario.blocks
            if kind.name not in SEEDED_DOC_KEYS and kind.name != "MapMcoo"]


PURPLE_OPTION_COUNT = 3


def generate_block_content(scenario: Scenario, model: MapModel,
                           store: ScenarioStore, gateway: LlmGateway,
                           kind: BlockKind, *,
                           feedback: str | None = None) -> str | list[str]:
    """Run the generation task for one block.

    Returns the content text for green/orange kinds, or a list of candidate
    options for purple kinds. Raises orchestrator/validation errors; the
    caller owns the review events.
    """
    artifacts = ArtifactStore(store.artifacts_dir)
    registry = build_registry(scenario, model, store, artifacts)
    trace_dir = store.traces_dir
    if kind.name == "UnitPositionsTimeBased":
        params = scenario.tasks.get(kind.name, {})
        unit = params.get("unit")
        if not unit:
            raise TimelineInvalid("scenario.tasks.UnitPositionsTimeBased.unit is not set")
        timeline, _ = predict_unit_positions(
            scenario, model, registry, gateway, unit,
            int(params.get("horizon_day", 0)),
            start_day=int(params.get("start_day", 0)),
            trace_dir=trace_dir, extra_context=feedback)
        return canonical_json(timeline.to_json())
    if kind.name == "OpordSchemeOfManeuver":
        text, _ = generate_scheme_of_maneuver(
            scenario, model, registry, gateway,
            trace_dir=trace_dir, extra_context=feedback)
        return text

    def run_generic(inputs: dict[str, str], task_id: str) -> str:
        spec = TaskSpec(
            kind=kind,
            objective=f"Generate the {kind.name} information block.",
            strategy=load_strategy(kind),
            inputs=inputs,
        )
        answer, _ = run_task(spec, registry, gateway, task_id=task_id,
                             trace_dir=trace_dir)
        return str(answer.payload)

    base_inputs = {"reviewer feedback": feedback} if feedback else {}
    if store.block(kind).level is not AutomationLevel.PURPLE:
        return run_generic(base_inputs, f"{scenario.id}-{kind.name}")
    # purple blocks produce a menu of distinct candidates for the human
    options = []
    for i in range(PURPLE_OPTION_COUNT):
        inputs = dict(base_inputs)
        inputs["option"] = f"candidate {i + 1} of {PURPLE_OPTION_COUNT}"
        options.append(run_generic(inputs, f"{scenario.id}-{kind.name}-opt{i + 1}"))
    return options


@dataclass
class RunReport:
    completed: list[str] = field(default_factory=list)
    paused_on: str | None = None
    failures: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def run_pipeline(scenario: Scenario, model: MapModel, map_doc: dict,
                 store: ScenarioStore, gateway: LlmGateway, *,
                 auto_approve_green: bool = False,
                 pause_on: tuple[str, ...] = ("orange", "purple")) -> RunReport:
    """Drive ready blocks to completion, pausing where review is demanded.

    Auto-approvals (orange not paused-on, green with the flag) are recorded
    as human events: the operator granted them by flag when starting the run.
    """
    report = RunReport()
    graph = scenario.graph
    seed_package_blocks(scenario, map_doc, store)
    skipped: set[BlockKind] = set()

    while True:
        states = store.states()
        ready = ready_blocks(graph, states)
        candidates = [kind for kind in topological_order(graph)
                      if kind in ready and kind in set(generation_targets(scenario))
                      and kind not in skipped]
        if not candidates:
            break
        kind = candidates[0]
        record = store.block(kind)
        if record.regen_attempts >= MAX_REGEN_ATTEMPTS:
            report.failures[kind.name] = (
                f"{record.regen_attempts} regeneration attempts used; edit required")
            skipped.add(kind)
            continue
        if record.level is AutomationLevel.GREEN and not auto_approve_green:
            report.paused_on = kind.name
            break

        feedback = record.state.feedback if record.state.phase is Phase.REJECTED else None
        store.apply_event(kind, ReviewEvent(
            type=EventType.GENERATION_STARTED, actor=Actor.SYSTEM))
        try:
            content = generate_block_content(scenario, model, store, gateway,
                                             kind, feedback=feedback)
        except (OrchestratorAbort, CoverageError, TimelineInvalid, SforgeError) as exc:
            store.record_failure(kind, f"{type(exc).__name__}: {exc}")
            report.failures[kind.name] = f"{type(exc).__name__}: {exc}"
            skipped.add(kind)
            continue

        if isinstance(content, list):
            finished = ReviewEvent(type=EventType.GENERATION_FINISHED,
                                   actor=Actor.SYSTEM, options=tuple(content))
        else:
            finished = ReviewEvent(type=EventType.GENERATION_FINISHED,
                                   actor=Actor.SYSTEM, payload=content)
        state = store.apply_event(kind, finished)
        if state.phase is Phase.AWAITING_REVIEW:
            if "orange" in pause_on:
                report.paused_on = kind.name
                break
            state = store.apply_event(kind, ReviewEvent(
                type=EventType.APPROVE, actor=Actor.HUMAN))
        elif state.phase is Phase.AWAITING_SELECTION:
            if "purple" in pause_on:
                report.paused_on = kind.name
                break
            state = store.apply_event(kind, ReviewEvent(
                type=EventType.SELECT_OPTION, actor=Actor.HUMAN, index=0))
        if state.phase is Phase.APPROVED:
            report.completed.append(kind.name)
            _write_output(store, kind, state.content)

    return report


def _write_output(store: ScenarioStore, kind: BlockKind, content: str | None):
    if content is None:
        return
    store.outputs_dir.mkdir(parents=True, exist_ok=True)
    suffix = ".json" if content.lstrip().startswith(("{", "[")) else ".md"
    path = store.outputs_dir / f"{kind.name}{suffix}"
    path.write_text(content if content.endswith("\n") else content + "\n",
                    encoding="utf-8")
