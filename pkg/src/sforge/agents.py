"""Helper-agent registry.

Each helper answers orchestrator questions from its own corpus only (RAG
over the block content it serves). The map agent is special: it exposes
callable tools that dispatch into the map engine and return observations
with optional rendered overlays stored in a content-addressed artifact
store.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import (AmbiguousGeometry, ArgsError, EmptyGraph, GatewayError,
                     UnknownElement, UnknownTool, Unreachable)
from .gateway import ChatMessage, ChatRequest, LlmGateway
from .mapmodel import MapModel, locate_between_phase_lines, polygon_centroid
from .overlay import ElementSelector, RouteMarkers, render_overlay
from .retrieval import DEFAULT_TOP_K, Corpus, retrieve_top_k
from .routing import (Route, WaypointGraph, build_waypoint_graph, k_routes,
                      position_at_time)

MAP_AGENT_NAME = "MapMcoo"
MAP_TOOLS = ("list_elements", "render_focus", "propose_routes",
             "route_progress", "locate_unit")


@dataclass
class Observation:
    """What the orchestrator sees after one dispatch."""

    text: str
    image_ref: str | None = None
    payload: Any = None
    error: bool = False
    reason: str | None = None
    low_evidence: bool = False

    def __post_init__(self):
        if self.error and not self.reason:
            raise ValueError("error observations must carry a reason")

    def to_json(self) -> dict:
        out: dict = {"text": self.text, "error": self.error}
        if self.image_ref is not None:
            out["image_ref"] = self.image_ref
        if self.payload is not None:
            out["payload"] = self.payload
        if self.reason is not None:
            out["reason"] = self.reason
        if self.low_evidence:
            out["low_evidence"] = True
        return out

    @classmethod
    def from_json(cls, raw: dict) -> "Observation":
        return cls(text=raw["text"], image_ref=raw.get("image_ref"),
                   payload=raw.get("payload"), error=raw.get("error", False),
                   reason=raw.get("reason"), low_evidence=raw.get("low_evidence", False))


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    params: dict[str, dict]  # name -> {"type": str, "required": bool}
    returns_image: bool
    summary: str


class ArtifactStore:
    """Content-addressed SVG store: artifacts/<sha256>.svg, atomic writes."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def put_svg(self, svg: str) -> str:
        data = svg.encode("utf-8")
        digest = hashlib.sha256(data).hexdigest()
        path = self.path(digest)
        if not path.exists():
            fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)  # atomic + idempotent by content hash
        return digest

    def path(self, digest: str) -> Path:
        return self.root / f"{digest}.svg"

    def read(self, digest: str) -> str | None:
        path = self.path(digest)
        return path.read_text(encoding="utf-8") if path.exists() else None


@dataclass
class HelperAgent:
    """RAG-backed answerer for one block kind."""

    kind_name: str
    corpus: Corpus
    system_preamble: str
    top_k: int = DEFAULT_TOP_K

    def answer_query(self, question: str, llm: LlmGateway) -> Observation:
        """Answer from this agent's corpus only.

        The assembled prompt is exactly preamble + retrieved chunk texts +
        question; gateway failures come back as error observations so the
        orchestrator can backtrack.
        """
        ranked = retrieve_top_k(self.corpus, question, self.top_k)
        context = [chunk.text for chunk, score in ranked if score > 0]
        low_evidence = not context
        user_text = "\n\n".join(context + [question])
        request = ChatRequest(messages=(
            ChatMessage("system", self.system_preamble),
            ChatMessage("user", user_text),
        ))
        try:
            answer = llm.complete(request)
        except GatewayError as exc:
            return Observation(text=f"{self.kind_name} helper failed: {exc}",
                               error=True, reason=exc.reason)
        return Observation(text=answer, low_evidence=low_evidence)


def _tool_descriptors() -> dict[str, ToolDescriptor]:
    opt_str_list = {"type": "list[str]", "required": False}
    tools = [
        ToolDescriptor(
            "list_elements", {}, returns_image=False,
            summary="Names of map elements by category."),
        ToolDescriptor(
            "render_focus",
            {"units": opt_str_list, "areas": opt_str_list, "routes": opt_str_list,
             "corridors": opt_str_list, "obstacles": {"type": "list[int]", "required": False}},
            returns_image=True,
            summary="Focused overlay containing only the selected elements."),
        ToolDescriptor(
            "propose_routes",
            {"from": {"type": "str", "required": True},
             "to": {"type": "str", "required": True},
             "k": {"type": "int", "required": False},
             "max_overlap": {"type": "float", "required": False}},
            returns_image=True,
            summary="Up to k diverse routes between two named elements."),
        ToolDescriptor(
            "route_progress",
            {"route_id": {"type": "str", "required": True},
             "start": {"type": "number", "required": True},
             "arrive": {"type": "number", "required": True},
             "query": {"type": "number", "required": True}},
            returns_image=True,
            summary="Interpolated position along a proposed route at a given day."),
        ToolDescriptor(
            "locate_unit",
            {"unit": {"type": "str", "required": True}},
            returns_image=False,
            summary="A unit's position and its bracketing phase lines."),
    ]
    return {t.name: t for t in tools}


def _check_args(tool: ToolDescriptor, args: dict):
    if not isinstance(args, dict):
        raise ArgsError("tool arguments must be an object")
    for name in args:
        if name not in tool.params:
            raise ArgsError(f"unexpected argument {name!r} for {tool.name}")
    checks = {
        "str": lambda v: isinstance(v, str),
        "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
        "float": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
        "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
        "list[str]": lambda v: isinstance(v, list) and all(isinstance(x, str) for x in v),
        "list[int]": lambda v: isinstance(v, list) and all(
            isinstance(x, int) and not isinstance(x, bool) for x in v),
    }
    for name, schema in tool.params.items():
        if name not in args:
            if schema["required"]:
                raise ArgsError(f"{tool.name} requires argument {name!r}")
            continue
        if not checks[schema["type"]](args[name]):
            raise ArgsError(f"argument {name!r} must be {schema['type']}")


class MapAgent:
    """Tool-augmented map helper: routing, progress, focused rendering."""

    def __init__(self, model: MapModel, artifacts: ArtifactStore,
                 resolution: float | None = None):
        self.kind_name = MAP_AGENT_NAME
        self.model = model
        self.artifacts = artifacts
        self.resolution = resolution or model.resolution_km
        self._graph: WaypointGraph | None = None
        self._routes: dict[str, Route] = {}
        self._route_seq = 0
        self.tools = _tool_descriptors()

    @property
    def graph(self) -> WaypointGraph:
        if self._graph is None:
            self._graph = build_waypoint_graph(self.model, self.resolution)
        return self._graph

    def stored_route(self, route_id: str) -> Route | None:
        return self._routes.get(route_id)

    def invoke_tool(self, name: str, args: dict) -> Observation:
        """Dispatch a tool call.

        Raises UnknownTool/ArgsError for out-of-contract calls; everything
        the map engine itself rejects (unknown names, unreachable nodes)
        comes back as an error observation the model can recover from.
        """
        if name not in self.tools:
            raise UnknownTool(f"map agent offers no tool {name!r}")
        _check_args(self.tools[name], args)
        handler = getattr(self, f"_tool_{name}")
        try:
            return handler(args)
        except (UnknownElement, Unreachable, EmptyGraph, AmbiguousGeometry,
                ValueError) as exc:
            return Observation(text=f"{name} failed: {exc}", error=True,
                               reason=type(exc).__name__)

    # --- tool handlers ---

    def _tool_list_elements(self, args: dict) -> Observation:
        names = self.model.element_names()
        lines = [f"{category}: {', '.join(values) if values else '(none)'}"
                 for category, values in names.items()]
        return Observation(text="\n".join(lines), payload=names)

    def _tool_render_focus(self, args: dict) -> Observation:
        selector = ElementSelector.of(
            units=args.get("units", ()), areas=args.get("areas", ()),
            routes=args.get("routes", ()), corridors=args.get("corridors", ()),
            obstacles=args.get("obstacles", ()))
        svg = render_overlay(self.model, selector)
        ref = self.artifacts.put_svg(svg)
        shown = [*selector.units, *selector.areas, *selector.routes,
                 *selector.corridors, *[f"obstacle {i}" for i in selector.obstacles]]
        text = ("Rendered focused overlay showing: " + ", ".join(shown)
                if shown else "Rendered base map (frame and phase lines only).")
        return Observation(text=text, image_ref=ref)

    def resolve_point(self, name: str):
        unit = self.model.unit(name)
        if unit is not None:
            return unit.position
        area = self.model.area(name)
        if area is not None:
            return polygon_centroid(list(area.polygon))
        raise UnknownElement(f"no unit or area named {name!r}")

    def _tool_propose_routes(self, args: dict) -> Observation:
        src = self.resolve_point(args["from"])
        dst = self.resolve_point(args["to"])
        k = args.get("k", 3)
        max_overlap = args.get("max_overlap", 0.8)
        routes = k_routes(self.graph, src, dst, k, max_overlap)
        named: list[tuple[str, Route]] = []
        for route in routes:
            self._route_seq += 1
            route_id = f"R{self._route_seq}"
            self._routes[route_id] = route
            named.append((route_id, route))
        svg = render_overlay(
            self.model, ElementSelector(),
            [RouteMarkers(route_id, route) for route_id, route in named])
        ref = self.artifacts.put_svg(svg)
        payload = [{"route_id": route_id, "length_km": round(route.total_length, 3),
                    "waypoints": len(route.node_ids)} for route_id, route in named]
        lines = [f"{p['route_id']}: {p['length_km']} km over {p['waypoints']} waypoints"
                 for p in payload]
        text = (f"Found {len(named)} route(s) from {args['from']} to {args['to']}:\n"
                + "\n".join(lines))
        return Observation(text=text, image_ref=ref, payload=payload)

    def _tool_route_progress(self, args: dict) -> Observation:
        route = self._routes.get(args["route_id"])
        if route is None:
            raise UnknownElement(f"no proposed route {args['route_id']!r}")
        point, fraction = position_at_time(route, args["start"], args["arrive"],
                                           args["query"])
        try:
            west, east = locate_between_phase_lines(self.model, point)
            context = [west, east]
        except AmbiguousGeometry:
            context = ["on a phase line", "on a phase line"]
        svg = render_overlay(self.model, ElementSelector(),
                             [RouteMarkers(args["route_id"], route, (fraction,))])
        ref = self.artifacts.put_svg(svg)
        payload = {"route_id": args["route_id"], "fraction": fraction,
                   "position": [point[0], point[1]], "between": context}
        text = (f"At D+{args['query']:g} the unit is {fraction:.0%} along "
                f"{args['route_id']} at ({point[0]:.2f}, {point[1]:.2f}), "
                f"between {context[0]} and {context[1]}.")
        return Observation(text=text, image_ref=ref, payload=payload)

    def _tool_locate_unit(self, args: dict) -> Observation:
        unit = self.model.unit(args["unit"])
        if unit is None:
            raise UnknownElement(f"no unit named {args['unit']!r}")
        west, east = locate_between_phase_lines(self.model, unit.position)
        payload = {"unit": unit.id, "position": [unit.position[0], unit.position[1]],
                   "between": [west, east], "echelon": unit.echelon,
                   "affiliation": unit.affiliation}
        text = (f"{unit.id} ({unit.affiliation} {unit.echelon}) is at "
                f"({unit.position[0]:.2f}, {unit.position[1]:.2f}), "
                f"between {west} and {east}.")
        return Observation(text=text, payload=payload)


@dataclass
class Registry:
    """Immutable-after-build set of helpers keyed by the kind they serve."""

    helpers: dict[str, HelperAgent] = field(default_factory=dict)
    map_agent: MapAgent | None = None

    def add(self, agent: HelperAgent):
        if agent.kind_name in self.helpers or agent.kind_name == MAP_AGENT_NAME:
            raise ValueError(f"duplicate helper for {agent.kind_name}")
        self.helpers[agent.kind_name] = agent

    def catalog(self) -> str:
        """Prompt-ready list of callable agents and tools."""
        lines = [f"- {name}.answer — answers questions about {name}"
                 for name in sorted(self.helpers)]
        if self.map_agent is not None:
            for tool in self.map_agent.tools.values():
                lines.append(f"- {MAP_AGENT_NAME}.{tool.name} — {tool.summary}")
        return "\n".join(lines)
