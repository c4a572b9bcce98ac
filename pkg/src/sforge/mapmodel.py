"""Planar map model: bounds, phase lines, obstacles, corridors, named elements.

Coordinates are kilometres; x grows eastward, y northward. All geometry is
abstract planar data, not geodetic terrain.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import AmbiguousGeometry, SchemaError

Point = tuple[float, float]

WEST_EDGE = "WestEdge"
EAST_EDGE = "EastEdge"

PHASE_LINE_EPS_KM = 1e-6


def dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def polyline_length(points: list[Point]) -> float:
    return sum(dist(points[i], points[i + 1]) for i in range(len(points) - 1))


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return dist(p, a)
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / seg2))
    return dist(p, (ax + t * dx, ay + t * dy))


def point_polyline_distance(p: Point, points: list[Point]) -> float:
    return min(point_segment_distance(p, points[i], points[i + 1])
               for i in range(len(points) - 1))


def point_in_polygon(p: Point, polygon: list[Point], *, strict: bool = False) -> bool:
    """Even-odd ray casting. With strict=True, boundary points count as outside."""
    x, y = p
    n = len(polygon)
    on_edge = any(point_segment_distance(p, polygon[i], polygon[(i + 1) % n]) < 1e-12
                  for i in range(n))
    if on_edge:
        return not strict
    inside = False
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x_cross > x:
                inside = not inside
    return inside


def _segments_properly_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    def orient(p, q, r):
        v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        return 0 if abs(v) < 1e-12 else (1 if v > 0 else -1)

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def _polyline_self_intersects(points: list[Point]) -> bool:
    n = len(points) - 1
    for i in range(n):
        for j in range(i + 2, n):
            if _segments_properly_intersect(points[i], points[i + 1],
                                            points[j], points[j + 1]):
                return True
    return False


def polygon_centroid(polygon: list[Point]) -> Point:
    # area-weighted centroid; falls back to vertex mean for degenerate rings
    a = 0.0
    cx = cy = 0.0
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        cross = x1 * y2 - x2 * y1
        a += cross
        cx += (x1 + x2) * cross
        cy += (y1 + y2) * cross
    if abs(a) < 1e-12:
        return (sum(p[0] for p in polygon) / n, sum(p[1] for p in polygon) / n)
    a *= 0.5
    return (cx / (6 * a), cy / (6 * a))


@dataclass(frozen=True)
class PhaseLine:
    name: str
    points: tuple[Point, ...]
    order: int


@dataclass(frozen=True)
class Obstacle:
    """multiplier None means impassable; otherwise a cost factor >= 1."""

    polygon: tuple[Point, ...]
    multiplier: float | None = None

    @property
    def impassable(self) -> bool:
        return self.multiplier is None


@dataclass(frozen=True)
class Corridor:
    name: str
    points: tuple[Point, ...]
    width_km: float
    multiplier: float

    def contains(self, p: Point) -> bool:
        return point_polyline_distance(p, list(self.points)) <= self.width_km / 2


@dataclass(frozen=True)
class NamedArea:
    name: str
    polygon: tuple[Point, ...]


@dataclass(frozen=True)
class NamedRoute:
    name: str
    points: tuple[Point, ...]


@dataclass(frozen=True)
class Lane:
    name: str
    points: tuple[Point, ...]


@dataclass(frozen=True)
class UnitMarker:
    id: str
    echelon: str
    affiliation: str  # "Friendly" | "Enemy"
    position: Point


@dataclass
class MapModel:
    bounds: tuple[float, float, float, float]  # x0, y0, x1, y1
    phase_lines: list[PhaseLine] = field(default_factory=list)
    obstacles: list[Obstacle] = field(default_factory=list)
    corridors: list[Corridor] = field(default_factory=list)
    areas: list[NamedArea] = field(default_factory=list)
    routes_named: list[NamedRoute] = field(default_factory=list)
    lanes: list[Lane] = field(default_factory=list)
    units: list[UnitMarker] = field(default_factory=list)
    resolution_km: float = 10.0
    explicit_waypoints: dict | None = None
    raw: dict | None = None

    def in_bounds(self, p: Point) -> bool:
        x0, y0, x1, y1 = self.bounds
        return x0 <= p[0] <= x1 and y0 <= p[1] <= y1

    def unit(self, unit_id: str) -> UnitMarker | None:
        for u in self.units:
            if u.id == unit_id:
                return u
        return None

    def area(self, name: str) -> NamedArea | None:
        for a in self.areas:
            if a.name == name:
                return a
        return None

    def element_names(self) -> dict[str, list[str]]:
        return {
            "phase_lines": [pl.name for pl in sorted(self.phase_lines, key=lambda l: l.order)],
            "areas": [a.name for a in self.areas],
            "routes": [r.name for r in self.routes_named],
            "lanes": [l.name for l in self.lanes],
            "corridors": [c.name for c in self.corridors],
            "units": [u.id for u in self.units],
        }

    def has_named_element(self, name: str) -> bool:
        return any(name in names for names in self.element_names().values())


def _require(cond: bool, msg: str):
    if not cond:
        raise SchemaError(msg)


def _points(raw, label: str, minimum: int = 2) -> tuple[Point, ...]:
    _require(isinstance(raw, list) and len(raw) >= minimum,
             f"{label} needs at least {minimum} points")
    pts = []
    for p in raw:
        _require(isinstance(p, list) and len(p) == 2, f"{label} point must be [x, y]")
        pts.append((float(p[0]), float(p[1])))
    return tuple(pts)


def load_map(raw: dict) -> MapModel:
    """Build and validate a MapModel from parsed map.json content."""
    _require(isinstance(raw, dict), "map document must be an object")
    _require("bounds" in raw, "map document missing 'bounds'")
    b = raw["bounds"]
    _require(isinstance(b, list) and len(b) == 4, "'bounds' must be [x0, y0, x1, y1]")
    bounds = tuple(float(v) for v in b)
    _require(bounds[0] < bounds[2] and bounds[1] < bounds[3], "degenerate bounds")

    model = MapModel(bounds=bounds, raw=raw)
    model.resolution_km = float(raw.get("resolution", 10.0))

    orders_seen: set[int] = set()
    for pl in raw.get("phase_lines", []):
        pts = _points(pl["points"], f"phase line {pl.get('name')}")
        _require(not _polyline_self_intersects(list(pts)),
                 f"phase line {pl['name']} self-intersects")
        order = int(pl["order"])
        _require(order not in orders_seen, f"duplicate phase line order {order}")
        orders_seen.add(order)
        model.phase_lines.append(PhaseLine(pl["name"], pts, order))

    for ob in raw.get("obstacles", []):
        poly = _points(ob["polygon"], "obstacle polygon", minimum=3)
        kind = ob.get("kind", "impassable")
        if kind == "impassable":
            mult = None
        else:
            _require(isinstance(kind, dict) and "cost" in kind,
                     "obstacle kind must be 'impassable' or {'cost': m}")
            mult = float(kind["cost"])
            _require(math.isfinite(mult) and mult >= 1.0,
                     "obstacle cost multiplier must be finite and >= 1")
        _require(not _polyline_self_intersects(list(poly) + [poly[0]]),
                 "obstacle polygon must be simple")
        model.obstacles.append(Obstacle(poly, mult))

    for co in raw.get("corridors", []):
        mult = float(co.get("cost", 1.0))
        _require(0.0 < mult <= 1.0, f"corridor {co.get('name')} multiplier must be in (0, 1]")
        model.corridors.append(Corridor(co["name"], _points(co["points"], "corridor"),
                                        float(co["width"]), mult))

    for ar in raw.get("areas", []):
        model.areas.append(NamedArea(ar["name"], _points(ar["polygon"], "area", minimum=3)))

    for rt in raw.get("routes", []):
        model.routes_named.append(NamedRoute(rt["name"], _points(rt["points"], "route")))

    for ln in raw.get("lanes", []):
        model.lanes.append(Lane(ln["name"], _points(ln["points"], "lane")))

    for un in raw.get("units", []):
        pos = (float(un["pos"][0]), float(un["pos"][1]))
        _require(un.get("affiliation") in ("Friendly", "Enemy"),
                 f"unit {un.get('id')} affiliation must be Friendly or Enemy")
        model.units.append(UnitMarker(un["id"], un.get("echelon", ""),
                                      un["affiliation"], pos))

    if "waypoints" in raw:
        model.explicit_waypoints = raw["waypoints"]

    _validate_geometry(model)
    return model


def _validate_geometry(model: MapModel):
    for category, items, getter in (
        ("phase line", model.phase_lines, lambda e: e.points),
        ("corridor", model.corridors, lambda e: e.points),
        ("area", model.areas, lambda e: e.polygon),
        ("route", model.routes_named, lambda e: e.points),
        ("lane", model.lanes, lambda e: e.points),
        ("obstacle", model.obstacles, lambda e: e.polygon),
    ):
        for element in items:
            for p in getter(element):
                _require(model.in_bounds(p), f"{category} geometry outside map bounds")
    for u in model.units:
        _require(model.in_bounds(u.position), f"unit {u.id} outside map bounds")
    for label, names in (
        ("phase line", [pl.name for pl in model.phase_lines]),
        ("corridor", [c.name for c in model.corridors]),
        ("area", [a.name for a in model.areas]),
        ("route", [r.name for r in model.routes_named]),
        ("lane", [l.name for l in model.lanes]),
        ("unit", [u.id for u in model.units]),
    ):
        _require(len(names) == len(set(names)), f"duplicate {label} name")


def load_map_bytes(document: bytes) -> MapModel:
    try:
        raw = json.loads(document.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"map document is not valid JSON: {exc}") from exc
    return load_map(raw)


def _west_crossings(p: Point, points: tuple[Point, ...]) -> int:
    """Crossings of the westward horizontal ray from ``p`` with a polyline."""
    x, y = p
    count = 0
    for i in range(len(points) - 1):
        (x1, y1), (x2, y2) = points[i], points[i + 1]
        if (y1 > y) != (y2 > y):  # half-open rule handles shared vertices
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x_cross < x:
                count += 1
    return count


def locate_between_phase_lines(model: MapModel, p: Point):
    """The consecutive pair of phase lines (by order) bracketing ``p``.

    Returns names; the map edge sentinels substitute beyond the first or
    last line. Raises AmbiguousGeometry when ``p`` sits on a line.
    """
    if not model.in_bounds(p):
        raise ValueError(f"point {p} outside map bounds")
    ordered = sorted(model.phase_lines, key=lambda pl: pl.order)
    for pl in ordered:
        if point_polyline_distance(p, list(pl.points)) < PHASE_LINE_EPS_KM:
            raise AmbiguousGeometry(f"point {p} lies on phase line {pl.name}")
    west_name = WEST_EDGE
    east_name = EAST_EDGE
    for pl in ordered:
        if _west_crossings(p, pl.points) % 2 == 1:
            west_name = pl.name  # line is west of p; keep the last such
        else:
            east_name = pl.name  # first line east of p
            break
    return west_name, east_name
