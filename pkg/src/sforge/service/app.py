"""Review service: scenario lifecycle, generation jobs, human review actions.

State mutations are serialized per scenario by the store's lock; generation
runs on a small worker pool and re-enters the state machine through review
events, exactly like the CLI path.
"""

from __future__ import annotations

import itertools
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware

from ..blocks import Actor, BlockKind, EventType, Phase, ReviewEvent
from ..depgraph import ready_blocks
from ..errors import (DanglingReference, IllegalTransition, SchemaError,
                      SforgeError, StorageError, UnknownElement)
from ..gateway import LlmGateway
from ..mapmodel import MapModel, load_map
from ..overlay import ElementSelector, render_overlay
from ..pipeline import generate_block_content, seed_package_blocks
from ..scenario import Scenario, canonical_json, load_scenario
from ..store import MAX_REGEN_ATTEMPTS, LogicalClock, ScenarioStore, utc_clock
from .schemas import (BlocksResponse, BlockView, EditBody, GenerateResponse,
                      JobView, RejectBody, SelectOptionBody, StateResponse,
                      UploadBody, UploadResponse)


@dataclass
class ScenarioRecord:
    scenario: Scenario
    model: MapModel
    map_doc: dict
    store: ScenarioStore


class JobRegistry:
    def __init__(self):
        self._jobs: dict[str, JobView] = {}
        self._lock = threading.Lock()
        self._seq = itertools.count(1)

    def create(self, scenario_id: str, kind: str) -> JobView:
        with self._lock:
            job = JobView(id=f"job-{next(self._seq)}", scenario_id=scenario_id,
                          kind=kind, state="Queued")
            self._jobs[job.id] = job
            return job

    def get(self, job_id: str) -> JobView | None:
        with self._lock:
            return self._jobs.get(job_id)

    def running_for(self, scenario_id: str, kind: str) -> JobView | None:
        with self._lock:
            for job in self._jobs.values():
                if (job.scenario_id == scenario_id and job.kind == kind
                        and job.state in ("Queued", "Running")):
                    return job
            return None

    def last_for(self, scenario_id: str, kind: str) -> JobView | None:
        with self._lock:
            last = None
            for job in self._jobs.values():
                if job.scenario_id == scenario_id and job.kind == kind:
                    last = job
            return last


def create_app(store_root: str | Path, gateway: LlmGateway | None = None,
               max_workers: int = 2) -> FastAPI:
    """Build the service around a store directory and a completion gateway."""
    store_root = Path(store_root)
    store_root.mkdir(parents=True, exist_ok=True)
    if gateway is None:
        gateway = LlmGateway.from_env()
    clock = LogicalClock() if gateway.mode in ("replay", "scripted") else utc_clock

    app = FastAPI(title="sforge review service")
    # the workbench is a static page on another origin; no auth by design
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    scenarios: dict[str, ScenarioRecord] = {}
    jobs = JobRegistry()
    executor = ThreadPoolExecutor(max_workers=max_workers)
    app.state.scenarios = scenarios
    app.state.jobs = jobs

    for package_path in sorted(store_root.glob("*/package.json")):
        record = _rehydrate(package_path.parent, clock)
        scenarios[record.scenario.id] = record

    def get_record(scenario_id: str) -> ScenarioRecord:
        record = scenarios.get(scenario_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"no scenario {scenario_id!r}")
        return record

    def get_kind(record: ScenarioRecord, kind_name: str) -> BlockKind:
        try:
            kind = BlockKind.parse(kind_name)
        except ValueError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        if kind not in record.scenario.blocks:
            raise HTTPException(status_code=404,
                                detail=f"scenario has no block {kind_name!r}")
        return kind

    @app.post("/scenarios", response_model=UploadResponse, status_code=201)
    def upload_scenario(body: UploadBody):
        document = canonical_json(body.package).encode("utf-8")
        try:
            scenario = load_scenario(document, map_document=body.map)
            model = load_map(body.map)
        except (SchemaError, DanglingReference) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        if scenario.id in scenarios:
            raise HTTPException(status_code=409,
                                detail=f"scenario {scenario.id!r} already loaded")
        directory = store_root / scenario.id
        try:
            store = ScenarioStore.create(directory, scenario, clock=clock)
        except StorageError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        (directory / "package.json").write_text(document.decode("utf-8"),
                                                encoding="utf-8")
        (directory / "map.json").write_text(canonical_json(body.map),
                                            encoding="utf-8")
        scenarios[scenario.id] = ScenarioRecord(scenario, model, body.map, store)
        return UploadResponse(id=scenario.id)

    @app.get("/scenarios/{scenario_id}/graph")
    def dependency_graph(scenario_id: str):
        record = get_record(scenario_id)
        graph = record.scenario.graph
        return {
            "nodes": sorted(str(n) for n in graph.nodes),
            "edges": sorted([str(a), str(b)] for a, b in graph.edges),
        }

    @app.get("/scenarios/{scenario_id}/blocks", response_model=BlocksResponse)
    def list_blocks(scenario_id: str):
        record = get_record(scenario_id)
        states = record.store.states()
        ready = ready_blocks(record.scenario.graph, states)
        views = []
        for kind in sorted(record.scenario.blocks, key=str):
            block = record.store.block(kind)
            last_job = jobs.last_for(scenario_id, kind.name)
            views.append(BlockView(
                kind=kind.name, automation=block.level.value,
                state=block.state.to_json(), ready=kind in ready,
                regen_attempts=block.regen_attempts,
                last_job_id=last_job.id if last_job else None))
        return BlocksResponse(scenario_id=scenario_id, blocks=views)

    @app.post("/scenarios/{scenario_id}/blocks/seed")
    def seed_blocks(scenario_id: str):
        """Approve every package-backed block that is still pending."""
        record = get_record(scenario_id)
        seeded = seed_package_blocks(record.scenario, record.map_doc, record.store)
        return {"seeded": [k.name for k in seeded]}

    @app.post("/scenarios/{scenario_id}/blocks/{kind_name}/generate",
              response_model=GenerateResponse, status_code=202)
    def generate(scenario_id: str, kind_name: str):
        record = get_record(scenario_id)
        kind = get_kind(record, kind_name)
        states = record.store.states()
        if kind not in ready_blocks(record.scenario.graph, states):
            raise HTTPException(status_code=409,
                                detail=f"{kind.name} is not ready to generate")
        if jobs.running_for(scenario_id, kind.name) is not None:
            raise HTTPException(status_code=409,
                                detail=f"a job is already running for {kind.name}")
        block = record.store.block(kind)
        if block.regen_attempts >= MAX_REGEN_ATTEMPTS:
            raise HTTPException(
                status_code=409,
                detail=f"{kind.name} used {block.regen_attempts} regeneration "
                       "attempts; edit it instead")
        job = jobs.create(scenario_id, kind.name)
        executor.submit(_execute_job, record, kind, job, gateway, clock)
        return GenerateResponse(job_id=job.id)

    @app.get("/jobs/{job_id}", response_model=JobView)
    def job_status(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no job {job_id!r}")
        return job

    def _apply(record: ScenarioRecord, kind: BlockKind, event: ReviewEvent,
               invalidate: bool) -> StateResponse:
        if jobs.running_for(record.scenario.id, kind.name) is not None:
            raise HTTPException(status_code=409,
                                detail=f"a job is running for {kind.name}")
        was_approved = record.store.block(kind).state.phase is Phase.APPROVED
        try:
            state = record.store.apply_event(kind, event)
        except IllegalTransition as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        stale: list[str] = []
        if invalidate and was_approved:
            touched = record.store.invalidate_downstream(record.scenario.graph, kind)
            stale = [k.name for k in touched]
        return StateResponse(kind=kind.name, state=state.to_json(),
                             stale_descendants=stale)

    @app.post("/scenarios/{scenario_id}/blocks/{kind_name}/approve",
              response_model=StateResponse)
    def approve(scenario_id: str, kind_name: str):
        record = get_record(scenario_id)
        kind = get_kind(record, kind_name)
        return _apply(record, kind,
                      ReviewEvent(type=EventType.APPROVE, actor=Actor.HUMAN),
                      invalidate=False)

    @app.post("/scenarios/{scenario_id}/blocks/{kind_name}/reject",
              response_model=StateResponse)
    def reject(scenario_id: str, kind_name: str, body: RejectBody):
        record = get_record(scenario_id)
        kind = get_kind(record, kind_name)
        return _apply(record, kind,
                      ReviewEvent(type=EventType.REJECT, actor=Actor.HUMAN,
                                  feedback=body.feedback),
                      invalidate=False)

    @app.post("/scenarios/{scenario_id}/blocks/{kind_name}/edit",
              response_model=StateResponse)
    def edit(scenario_id: str, kind_name: str, body: EditBody):
        record = get_record(scenario_id)
        kind = get_kind(record, kind_name)
        return _apply(record, kind,
                      ReviewEvent(type=EventType.EDIT, actor=Actor.HUMAN,
                                  payload=body.content),
                      invalidate=True)

    @app.post("/scenarios/{scenario_id}/blocks/{kind_name}/select-option",
              response_model=StateResponse)
    def select_option(scenario_id: str, kind_name: str, body: SelectOptionBody):
        record = get_record(scenario_id)
        kind = get_kind(record, kind_name)
        return _apply(record, kind,
                      ReviewEvent(type=EventType.SELECT_OPTION, actor=Actor.HUMAN,
                                  index=body.index),
                      invalidate=False)

    @app.get("/scenarios/{scenario_id}/blocks/{kind_name}/trace")
    def get_trace(scenario_id: str, kind_name: str):
        record = get_record(scenario_id)
        kind = get_kind(record, kind_name)
        path = record.store.traces_dir / f"{scenario_id}-{kind.name}.json"
        if not path.exists():
            raise HTTPException(status_code=404,
                                detail=f"no trace for {kind.name}")
        return json.loads(path.read_text(encoding="utf-8"))

    @app.get("/scenarios/{scenario_id}/overlay")
    def overlay(scenario_id: str, units: str = "", areas: str = "", routes: str = ""):
        record = get_record(scenario_id)
        selector = ElementSelector.of(
            units=[u for u in units.split(",") if u],
            areas=[a for a in areas.split(",") if a],
            routes=[r for r in routes.split(",") if r])
        try:
            svg = render_overlay(record.model, selector)
        except UnknownElement as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return Response(content=svg, media_type="image/svg+xml")

    @app.get("/scenarios/{scenario_id}/artifacts/{digest}")
    def artifact(scenario_id: str, digest: str):
        record = get_record(scenario_id)
        path = record.store.artifacts_dir / f"{digest}.svg"
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"no artifact {digest}")
        return Response(content=path.read_text(encoding="utf-8"),
                        media_type="image/svg+xml")

    return app


def _rehydrate(directory: Path, clock) -> ScenarioRecord:
    document = (directory / "package.json").read_bytes()
    map_doc = json.loads((directory / "map.json").read_text(encoding="utf-8"))
    scenario = load_scenario(document, map_document=map_doc)
    model = load_map(map_doc)
    store = ScenarioStore.open(directory, clock=clock)
    return ScenarioRecord(scenario, model, map_doc, store)


def _execute_job(record: ScenarioRecord, kind: BlockKind, job: JobView,
                 gateway: LlmGateway, clock):
    job.state = "Running"
    job.started_at = clock() if callable(clock) else utc_clock()
    feedback = None
    block = record.store.block(kind)
    if block.state.phase is Phase.REJECTED:
        feedback = block.state.feedback
    record.store.apply_event(kind, ReviewEvent(
        type=EventType.GENERATION_STARTED, actor=Actor.SYSTEM))
    try:
        content = generate_block_content(record.scenario, record.model,
                                         record.store, gateway, kind,
                                         feedback=feedback)
        if isinstance(content, list):
            finished = ReviewEvent(type=EventType.GENERATION_FINISHED,
                                   actor=Actor.SYSTEM, options=tuple(content))
        else:
            finished = ReviewEvent(type=EventType.GENERATION_FINISHED,
                                   actor=Actor.SYSTEM, payload=content)
        record.store.apply_event(kind, finished)
    except SforgeError as exc:
        record.store.record_failure(kind, f"{type(exc).__name__}: {exc}")
        job.state = "Failed"
        job.reason = f"{type(exc).__name__}: {exc}"
        job.finished_at = clock() if callable(clock) else utc_clock()
        return
    job.state = "Done"
    job.trace_id = f"{record.scenario.id}-{kind.name}"
    job.finished_at = clock() if callable(clock) else utc_clock()
