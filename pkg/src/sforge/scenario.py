"""Scenario package: loading, validation, canonical serialization.

A scenario package is a directory of seven documents (scenario.json,
force_groupings.json, objectives.json, unit_purposes.json, dsm.json,
backstory.md, learning_objectives.md) plus the map document referenced by
``map_ref``. For transport the seven documents are assembled into one
canonical JSON body that round-trips byte-identically through load/serialize.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .blocks import BlockKind, InformationBlock
from .depgraph import DependencyGraph, default_graph, graph_from_json
from .errors import DanglingReference, SchemaError, TimelineInvalid
from .mapmodel import MapModel, Point, load_map

PACKAGE_FILES = {
    "scenario": "scenario.json",
    "force_groupings": "force_groupings.json",
    "objectives": "objectives.json",
    "unit_purposes": "unit_purposes.json",
    "dsm": "dsm.json",
    "backstory": "backstory.md",
    "learning_objectives": "learning_objectives.md",
}

# Blocks whose authoritative content ships inside the package itself.
SEEDED_DOC_KEYS = {
    "Backstory": "backstory",
    "LearningObjectives": "learning_objectives",
    "ForceGroupings": "force_groupings",
    "RedBlueObjectives": "objectives",
    "HighLevelUnitPurpose": "unit_purposes",
    "DecisionSupportMatrix": "dsm",
}


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


@dataclass(frozen=True)
class DecisionTrigger:
    id: str
    unit: str
    condition: str
    effect: str
    reference_point: str | None = None


@dataclass(frozen=True)
class TimelineSample:
    day: int
    position: Point
    context: tuple[str, str]  # bracketing phase lines (or map edges)


@dataclass(frozen=True)
class UnitPositionTimeline:
    unit: str
    samples: tuple[TimelineSample, ...]

    def validate(self, model: MapModel):
        days = [s.day for s in self.samples]
        if any(b <= a for a, b in zip(days, days[1:])):
            raise TimelineInvalid(f"times not strictly increasing: {days}")
        for s in self.samples:
            if not model.in_bounds(s.position):
                raise TimelineInvalid(
                    f"sample at D+{s.day} is outside map bounds: {s.position}")

    def to_json(self) -> dict:
        return {
            "unit": self.unit,
            "samples": [
                {"day": s.day, "position": [s.position[0], s.position[1]],
                 "context": list(s.context)}
                for s in self.samples
            ],
        }

    @classmethod
    def from_json(cls, raw: dict) -> "UnitPositionTimeline":
        try:
            samples = tuple(
                TimelineSample(
                    day=int(s["day"]),
                    position=(float(s["position"][0]), float(s["position"][1])),
                    context=tuple(s.get("context", ("", "")))[:2],
                )
                for s in raw["samples"]
            )
            return cls(unit=raw["unit"], samples=samples)
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise TimelineInvalid(f"malformed timeline payload: {exc}") from exc


@dataclass
class Scenario:
    id: str
    title: str
    map_ref: str
    blocks: dict[BlockKind, InformationBlock]
    documents: dict[str, object]  # the seven package documents, verbatim
    graph: DependencyGraph
    tasks: dict[str, dict] = field(default_factory=dict)

    @property
    def kinds(self) -> list[BlockKind]:
        return list(self.blocks.keys())

    def friendly_unit_ids(self) -> list[str]:
        return [u["id"] for u in self.documents["force_groupings"].get("friendly", [])]

    def all_unit_ids(self) -> set[str]:
        fg = self.documents["force_groupings"]
        return {u["id"] for side in ("friendly", "enemy") for u in fg.get(side, [])}

    def triggers(self) -> list[DecisionTrigger]:
        out = []
        for t in self.documents["dsm"].get("triggers", []):
            out.append(DecisionTrigger(
                id=t["id"], unit=t["unit"], condition=t["condition"],
                effect=t["effect"], reference_point=t.get("reference_point")))
        return out

    def seeded_content(self, kind: BlockKind, map_document: dict | None = None) -> str | None:
        """Package-provided content for a block, canonically rendered."""
        if kind.name == "MapMcoo":
            return canonical_json(map_document) if map_document is not None else None
        key = SEEDED_DOC_KEYS.get(kind.name)
        if key is None:
            return None
        doc = self.documents[key]
        return doc if isinstance(doc, str) else canonical_json(doc)


def assemble_package(directory: str | Path) -> bytes:
    """Read the seven package files into canonical document bytes."""
    directory = Path(directory)
    body = {}
    for key, filename in PACKAGE_FILES.items():
        path = directory / filename
        if not path.exists():
            raise SchemaError(f"package missing {filename}")
        if filename.endswith(".json"):
            try:
                body[key] = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{filename} is not valid JSON: {exc}") from exc
        else:
            body[key] = path.read_text(encoding="utf-8")
    return canonical_json(body).encode("utf-8")


def serialize_scenario(scenario: Scenario) -> bytes:
    """Inverse of load_scenario: canonical package document bytes."""
    return canonical_json(scenario.documents).encode("utf-8")


def _require(cond: bool, msg: str):
    if not cond:
        raise SchemaError(msg)


def load_scenario(document: bytes, map_document: dict | None = None) -> Scenario:
    """Parse and validate a package document. All blocks start Pending.

    Raises SchemaError for missing/misshapen fields and DanglingReference
    for unit or map-element references that do not resolve.
    """
    try:
        body = json.loads(document.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"package document is not valid JSON: {exc}") from exc
    _require(isinstance(body, dict), "package document must be an object")
    for key in PACKAGE_FILES:
        _require(key in body, f"package document missing {key!r}")

    meta = body["scenario"]
    _require(isinstance(meta, dict), "'scenario' must be an object")
    for required in ("id", "title", "map_ref", "blocks"):
        _require(required in meta, f"scenario.json missing {required!r}")
    _require(isinstance(meta["blocks"], list) and meta["blocks"],
             "scenario.json 'blocks' must be a non-empty list")

    kinds: list[BlockKind] = []
    for name in meta["blocks"]:
        try:
            kinds.append(BlockKind.parse(name))
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc
    _require(len(kinds) == len(set(kinds)), "duplicate block kind in scenario.json")
    section_names = [k.section for k in kinds if k.section is not None]
    _require(len(section_names) == len(set(section_names)),
             "OpordSection names must be unique")

    fg = body["force_groupings"]
    _require(isinstance(fg, dict) and "friendly" in fg and "enemy" in fg,
             "force_groupings.json needs 'friendly' and 'enemy' lists")
    unit_ids = set()
    for side in ("friendly", "enemy"):
        _require(isinstance(fg[side], list), f"force_groupings {side!r} must be a list")
        for entry in fg[side]:
            _require(isinstance(entry, dict) and "id" in entry,
                     "force grouping entries need an 'id'")
            unit_ids.add(entry["id"])

    dsm = body["dsm"]
    _require(isinstance(dsm, dict) and isinstance(dsm.get("triggers", []), list),
             "dsm.json must hold a 'triggers' list")
    model = load_map(map_document) if map_document is not None else None
    for t in dsm.get("triggers", []):
        for required in ("id", "unit", "condition", "effect"):
            _require(required in t, f"DSM trigger missing {required!r}")
        if t["unit"] not in unit_ids:
            raise DanglingReference(
                f"DSM trigger {t['id']} names unknown unit {t['unit']!r}")
        ref = t.get("reference_point")
        if ref and model is not None and not model.has_named_element(ref):
            raise DanglingReference(
                f"DSM trigger {t['id']} references unknown map element {ref!r}")

    graph = graph_from_json(meta["graph"]) if "graph" in meta else default_graph()
    kind_set = set(kinds)
    for node in graph.nodes:
        if node not in kind_set:
            raise DanglingReference(
                f"dependency graph node {node} has no block in the scenario")

    blocks = {kind: InformationBlock.fresh(kind) for kind in kinds}
    return Scenario(
        id=meta["id"],
        title=meta["title"],
        map_ref=meta["map_ref"],
        blocks=blocks,
        documents=body,
        graph=graph,
        tasks=meta.get("tasks", {}),
    )


def load_scenario_dir(directory: str | Path) -> tuple[Scenario, MapModel]:
    """Load a package directory, resolving map_ref relative to it."""
    directory = Path(directory)
    document = assemble_package(directory)
    meta = json.loads((directory / "scenario.json").read_text(encoding="utf-8"))
    map_path = directory / meta.get("map_ref", "")
    if not map_path.exists():
        raise DanglingReference(f"map_ref {meta.get('map_ref')!r} does not resolve")
    try:
        map_doc = json.loads(map_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"map document is not valid JSON: {exc}") from exc
    scenario = load_scenario(document, map_document=map_doc)
    return scenario, load_map(map_doc)
