"""ReAct orchestration: parse model turns, dispatch to helpers, backtrack.

The loop is model-mediated: tool and helper failures are fed back as error
observations so the model can reissue a corrected query, bounded by the step
budget. Malformed turns get a format reminder; three consecutive malformed
turns abort the task.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any

from .agents import MAP_AGENT_NAME, Observation, Registry
from .blocks import BlockKind
from .errors import (ArgsError, BudgetExhausted, CoverageError,
                     DanglingReference, FormatError, GatewayError,
                     PersistentFormatError, UnknownTool)
from .gateway import ChatMessage, ChatRequest, LlmGateway
from .mapmodel import MapModel, locate_between_phase_lines
from .scenario import (Scenario, TimelineSample, UnitPositionTimeline,
                       canonical_json)

DEFAULT_BUDGET = 20
MAX_CONSECUTIVE_FORMAT_ERRORS = 3

# Block kinds whose final answer must be a fenced JSON object.
STRUCTURED_KINDS = {"UnitPositionsTimeBased"}

_LABEL = {
    "thought": re.compile(r"^[ \t]*thought[ \t]*:", re.IGNORECASE | re.MULTILINE),
    "action": re.compile(r"^[ \t]*action[ \t]*:", re.IGNORECASE | re.MULTILINE),
    "input": re.compile(r"^[ \t]*action[ \t]+input[ \t]*:", re.IGNORECASE | re.MULTILINE),
    "final": re.compile(r"^[ \t]*final[ \t]+answer[ \t]*:", re.IGNORECASE | re.MULTILINE),
}

_FENCE = re.compile(r"```(?:json)?\s*(\{.*?\})\s*```", re.DOTALL)

FORMAT_REMINDER = (
    "Format reminder: reply with exactly one of the two forms.\n"
    "Thought: <reasoning>\nAction: <Agent.operation>\nAction Input: <one JSON object>\n"
    "or\nFinal Answer: <answer>"
)


@dataclass(frozen=True)
class ParsedAction:
    thought: str
    action: str
    action_input: dict


@dataclass(frozen=True)
class ParsedFinal:
    text: str


def parse_react_block(llm_output: str):
    """Parse one model turn into a (thought, action, input) triple or a final.

    Labels are case-insensitive and order-enforced; the action input must be
    a single JSON object. Raises FormatError otherwise.
    """
    final_m = _LABEL["final"].search(llm_output)
    action_m = _LABEL["action"].search(llm_output)
    input_m = _LABEL["input"].search(llm_output)
    # "Action Input:" also matches the "action" pattern; a real Action label
    # must exist at some position other than the input label's.
    standalone_action = action_m is not None and (
        input_m is None or action_m.start() != input_m.start())

    if final_m is not None:
        if standalone_action:
            raise FormatError("both Action and Final Answer present")
        return ParsedFinal(llm_output[final_m.end():].strip())

    if not standalone_action and action_m is None:
        raise FormatError("missing Action or Final Answer label")
    thought_m = _LABEL["thought"].search(llm_output)
    if thought_m is None:
        raise FormatError("missing Thought label")
    if not standalone_action:
        raise FormatError("missing Action label")
    if input_m is None:
        raise FormatError("missing Action Input label")
    if action_m.start() == input_m.start():
        # the first "action" hit was the input label; find a separate one
        action_m = next((m for m in _LABEL["action"].finditer(llm_output)
                         if m.start() != input_m.start()), None)
        if action_m is None:
            raise FormatError("missing Action label")
    if not thought_m.start() < action_m.start() < input_m.start():
        raise FormatError("labels out of order (Thought, Action, Action Input)")

    thought = llm_output[thought_m.end():action_m.start()].strip()
    action_line = llm_output[action_m.end():input_m.start()].strip()
    action = action_line.splitlines()[0].strip() if action_line else ""
    if not action:
        raise FormatError("empty Action")
    input_text = llm_output[input_m.end():].strip()
    fence = _FENCE.search(input_text)
    if fence:
        input_text = fence.group(1)
    try:
        action_input = json.loads(input_text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"Action Input is not valid JSON: {exc}") from exc
    if not isinstance(action_input, dict):
        raise FormatError("Action Input must be a JSON object")
    return ParsedAction(thought=thought, action=action, action_input=action_input)


def extract_final_object(text: str) -> dict:
    """The fenced JSON object a structured final answer must carry."""
    fence = _FENCE.search(text)
    if not fence:
        raise FormatError("structured final answer needs a fenced JSON object")
    try:
        payload = json.loads(fence.group(1))
    except json.JSONDecodeError as exc:
        raise FormatError(f"fenced final answer is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise FormatError("fenced final answer must be a JSON object")
    return payload


class StepStatus(str, Enum):
    OK = "Ok"
    FAILED = "Failed"
    RETRIED = "Retried"


@dataclass
class ReactStep:
    index: int
    thought: str
    action: str
    action_input: dict
    observation: Observation
    status: StepStatus

    def to_json(self) -> dict:
        return {"index": self.index, "thought": self.thought, "action": self.action,
                "action_input": self.action_input,
                "observation": self.observation.to_json(),
                "status": self.status.value}


@dataclass
class FinalAnswer:
    payload: Any  # timeline object, section text, or option list


@dataclass
class ReactTrace:
    task_id: str
    steps: list[ReactStep] = field(default_factory=list)
    final: dict | None = None  # {"type": "answer"|"aborted", ...}
    budget_used: int = 0

    def to_json(self) -> dict:
        return {"task_id": self.task_id,
                "steps": [s.to_json() for s in self.steps],
                "final": self.final, "budget_used": self.budget_used}


@dataclass
class TaskSpec:
    kind: BlockKind
    objective: str
    strategy: str
    inputs: dict[str, str] = field(default_factory=dict)
    budget: int = DEFAULT_BUDGET

    @property
    def structured(self) -> bool:
        return self.kind.name in STRUCTURED_KINDS


def load_strategy(kind: BlockKind) -> str:
    base = resources.files("sforge.data").joinpath("strategies")
    candidate = base.joinpath(f"{kind.base}.md")
    if candidate.is_file():
        return candidate.read_text()
    return base.joinpath("default.md").read_text()


def _system_prompt(spec: TaskSpec, registry: Registry) -> str:
    final_note = (
        "Because this block is structured data, the final answer must contain "
        "a fenced ```json code block holding the result object."
        if spec.structured else
        "The final answer is the finished text of the block."
    )
    return (
        f"{spec.strategy.strip()}\n\n"
        "Respond in exactly one of these two forms.\n\n"
        "To take an action:\n"
        "Thought: <your reasoning>\n"
        "Action: <Agent.operation>\n"
        "Action Input: <one JSON object>\n\n"
        "To finish:\n"
        "Final Answer: <your answer>\n\n"
        f"{final_note}\n\n"
        "Available agents and tools:\n"
        f"{registry.catalog()}"
    )


def _task_message(spec: TaskSpec) -> str:
    parts = [f"Task: {spec.objective}"]
    for key in sorted(spec.inputs):
        parts.append(f"{key}: {spec.inputs[key]}")
    return "\n".join(parts)


def dispatch(registry: Registry, action: str, args: dict,
             llm: LlmGateway) -> Observation:
    """Route one parsed action to a helper or map tool.

    Never raises for model-recoverable problems; those become error
    observations the model sees on its next turn.
    """
    target, sep, op = action.partition(".")
    target, op = target.strip(), op.strip()
    if not sep or not op:
        return Observation(text=f"Action {action!r} must look like Agent.operation",
                           error=True, reason="bad-action")
    if target == MAP_AGENT_NAME and registry.map_agent is not None:
        try:
            return registry.map_agent.invoke_tool(op, args)
        except UnknownTool as exc:
            return Observation(text=str(exc), error=True, reason="unknown-tool")
        except ArgsError as exc:
            return Observation(text=str(exc), error=True, reason="bad-args")
    if op != "answer":
        return Observation(text=f"{target} only supports the 'answer' operation",
                           error=True, reason="unknown-operation")
    agent = registry.helpers.get(target)
    if agent is None:
        known = ", ".join(sorted(registry.helpers))
        return Observation(text=f"no helper agent named {target!r}; known: {known}",
                           error=True, reason="unknown-agent")
    question = args.get("question")
    if not isinstance(question, str) or not question.strip():
        return Observation(text="answer requires a string 'question' argument",
                           error=True, reason="bad-args")
    return agent.answer_query(question, llm)


def persist_trace(trace: ReactTrace, trace_dir: str | Path | None):
    if trace_dir is None:
        return
    trace_dir = Path(trace_dir)
    trace_dir.mkdir(parents=True, exist_ok=True)
    path = trace_dir / f"{trace.task_id}.json"
    path.write_text(canonical_json(trace.to_json()), encoding="utf-8")


def run_task(spec: TaskSpec, registry: Registry, llm: LlmGateway,
             *, task_id: str, trace_dir: str | Path | None = None
             ) -> tuple[FinalAnswer, ReactTrace]:
    """Run one generation task as a sequential ReAct loop.

    The trace is persisted whatever the outcome. BudgetExhausted and
    PersistentFormatError carry the aborted trace on the exception.
    """
    if spec.budget < 1:
        raise ValueError("budget must be >= 1")
    trace = ReactTrace(task_id=task_id)
    messages: list[ChatMessage] = [
        ChatMessage("system", _system_prompt(spec, registry)),
        ChatMessage("user", _task_message(spec)),
    ]
    attachments: tuple[str, ...] = ()
    consecutive_format = 0
    retry_pending = False

    while len(trace.steps) < spec.budget:
        request = ChatRequest(messages=tuple(messages), attachments=attachments)
        try:
            text = llm.complete(request)
        except GatewayError:
            trace.final = {"type": "aborted", "reason": "gateway"}
            trace.budget_used = len(trace.steps)
            persist_trace(trace, trace_dir)
            raise

        try:
            parsed = parse_react_block(text)
            if isinstance(parsed, ParsedFinal) and spec.structured:
                extract_final_object(parsed.text)  # validated again below
        except FormatError as exc:
            consecutive_format += 1
            if consecutive_format >= MAX_CONSECUTIVE_FORMAT_ERRORS:
                trace.final = {"type": "aborted",
                               "reason": f"PersistentFormatError: {exc}"}
                trace.budget_used = len(trace.steps)
                persist_trace(trace, trace_dir)
                raise PersistentFormatError(str(exc), trace=trace) from exc
            messages.append(ChatMessage("assistant", text))
            messages.append(ChatMessage("user", FORMAT_REMINDER))
            retry_pending = True
            continue

        consecutive_format = 0
        if isinstance(parsed, ParsedFinal):
            payload: Any = (extract_final_object(parsed.text) if spec.structured
                            else parsed.text)
            trace.final = {"type": "answer", "payload": payload}
            trace.budget_used = len(trace.steps)
            persist_trace(trace, trace_dir)
            return FinalAnswer(payload=payload), trace

        observation = dispatch(registry, parsed.action, parsed.action_input, llm)
        previous_failed = bool(trace.steps) and trace.steps[-1].status is StepStatus.FAILED
        if retry_pending or previous_failed:
            status = StepStatus.RETRIED
        elif observation.error:
            status = StepStatus.FAILED
        else:
            status = StepStatus.OK
        retry_pending = False
        trace.steps.append(ReactStep(
            index=len(trace.steps), thought=parsed.thought, action=parsed.action,
            action_input=parsed.action_input, observation=observation,
            status=status))
        messages.append(ChatMessage("assistant", text))
        messages.append(ChatMessage("user", f"Observation: {observation.text}"))
        attachments = (observation.image_ref,) if observation.image_ref else ()

    trace.final = {"type": "aborted", "reason": "BudgetExhausted"}
    trace.budget_used = len(trace.steps)
    persist_trace(trace, trace_dir)
    raise BudgetExhausted(f"no final answer within {spec.budget} steps", trace=trace)


def predict_unit_positions(scenario: Scenario, model: MapModel, registry: Registry,
                           llm: LlmGateway, unit: str, horizon_day: int,
                           *, start_day: int = 0,
                           trace_dir: str | Path | None = None,
                           extra_context: str | None = None
                           ) -> tuple[UnitPositionTimeline, ReactTrace | None]:
    """Four-step unit position forecast; validates the returned timeline."""
    if unit not in scenario.all_unit_ids():
        raise DanglingReference(f"unit {unit!r} is not in the force groupings")
    if horizon_day < start_day:
        raise ValueError("horizon must not precede the current day")

    if horizon_day == start_day:
        marker = model.unit(unit)
        if marker is None:
            raise DanglingReference(f"unit {unit!r} has no map position")
        west, east = locate_between_phase_lines(model, marker.position)
        timeline = UnitPositionTimeline(unit=unit, samples=(
            TimelineSample(day=start_day, position=marker.position,
                           context=(west, east)),))
        timeline.validate(model)
        return timeline, None

    inputs = {
        "unit": unit,
        "current day": f"D+{start_day}",
        "horizon": f"D+{horizon_day}",
    }
    if extra_context:
        inputs["reviewer feedback"] = extra_context
    spec = TaskSpec(
        kind=BlockKind.parse("UnitPositionsTimeBased"),
        objective=(f"Predict {unit}'s position for each day from D+{start_day + 1} "
                   f"through D+{horizon_day}."),
        strategy=load_strategy(BlockKind.parse("UnitPositionsTimeBased")),
        inputs=inputs,
    )
    answer, trace = run_task(spec, registry, llm,
                             task_id=f"{scenario.id}-UnitPositionsTimeBased",
                             trace_dir=trace_dir)
    timeline = UnitPositionTimeline.from_json(answer.payload)
    timeline.validate(model)
    return timeline, trace


def generate_scheme_of_maneuver(scenario: Scenario, model: MapModel,
                                registry: Registry, llm: LlmGateway,
                                *, trace_dir: str | Path | None = None,
                                extra_context: str | None = None
                                ) -> tuple[str, ReactTrace]:
    """Four-step scheme-of-maneuver drafting with coverage validation.

    The returned text must mention every friendly unit id and at least one
    phase-line name; otherwise CoverageError carries the draft so a human
    can review it instead of approving.
    """
    friendly = scenario.friendly_unit_ids()
    inputs = {"friendly units": ", ".join(friendly)}
    if extra_context:
        inputs["reviewer feedback"] = extra_context
    spec = TaskSpec(
        kind=BlockKind.parse("OpordSchemeOfManeuver"),
        objective=("Write the OPORD Scheme of Movement and Maneuver paragraph "
                   "covering all friendly units as one coordinated action."),
        strategy=load_strategy(BlockKind.parse("OpordSchemeOfManeuver")),
        inputs=inputs,
    )
    answer, trace = run_task(spec, registry, llm,
                             task_id=f"{scenario.id}-OpordSchemeOfManeuver",
                             trace_dir=trace_dir)
    text = str(answer.payload)
    missing = [uid for uid in friendly if uid not in text]
    phase_names = [pl.name for pl in model.phase_lines]
    if phase_names and not any(name in text for name in phase_names):
        missing.append("<any phase line>")
    if missing:
        raise CoverageError(missing, draft=text)
    return text, trace
