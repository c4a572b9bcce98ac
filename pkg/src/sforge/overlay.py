"""Focused SVG overlay rendering.

The base layer (bounds frame + phase lines) is always drawn; everything else
appears only when selected, so the orchestrator never sees a full map dump.
Output is deterministic: identical input yields byte-identical SVG.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import UnknownElement
from .mapmodel import MapModel, Point
from .routing import Route, route_point_at_fraction

SCALE = 10.0

STYLE = """
.frame { fill: none; stroke: #333333; stroke-width: 3; }
.phase-line { fill: none; stroke: #555577; stroke-width: 2; stroke-dasharray: 12 6; }
.obstacle { fill: #b08060; fill-opacity: 0.45; stroke: #7a5238; stroke-width: 2; }
.corridor { fill: none; stroke: #3a8f3a; stroke-width: 8; stroke-opacity: 0.4; }
.area { fill: #d8c030; fill-opacity: 0.3; stroke: #a08820; stroke-width: 2; }
.route { fill: none; stroke: #2060c0; stroke-width: 3; }
.lane { fill: none; stroke: #20a0a0; stroke-width: 3; stroke-dasharray: 4 4; }
.friendly { fill: #3060d0; stroke: #102050; stroke-width: 2; }
.enemy { fill: #d04040; stroke: #501010; stroke-width: 2; }
.waypoint { fill: #101010; stroke: #ffffff; stroke-width: 1.5; }
.label { font: 28px sans-serif; fill: #222222; }
""".strip()


@dataclass(frozen=True)
class ElementSelector:
    """Names of map elements to include beyond the base layer."""

    units: tuple[str, ...] = ()
    areas: tuple[str, ...] = ()
    routes: tuple[str, ...] = ()      # matches named routes, then lanes
    corridors: tuple[str, ...] = ()
    obstacles: tuple[int, ...] = ()   # obstacles are unnamed; select by index

    @classmethod
    def of(cls, units=(), areas=(), routes=(), corridors=(), obstacles=()):
        return cls(tuple(units), tuple(areas), tuple(routes), tuple(corridors),
                   tuple(obstacles))


@dataclass(frozen=True)
class RouteMarkers:
    """An ad-hoc route to draw, with waypoint markers at given fractions."""

    name: str
    route: Route
    fractions: tuple[float, ...] = ()


def _ident(name: str) -> str:
    return name.replace(" ", "_")


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


class _Svg:
    def __init__(self, model: MapModel):
        self.model = model
        x0, y0, x1, y1 = model.bounds
        self.y_flip = y0 + y1
        self.parts: list[str] = []
        self.parts.append(
            '<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="{_fmt(x0 * SCALE)} {_fmt(y0 * SCALE)} '
            f'{_fmt((x1 - x0) * SCALE)} {_fmt((y1 - y0) * SCALE)}">'
        )
        self.parts.append(f"<style>{STYLE}</style>")

    def pt(self, p: Point) -> tuple[float, float]:
        # map y grows north; svg y grows down
        return (p[0] * SCALE, (self.y_flip - p[1]) * SCALE)

    def points_attr(self, pts: Sequence[Point]) -> str:
        return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (self.pt(p) for p in pts))

    def open_group(self, elem_id: str, css: str):
        self.parts.append(f'<g id="{elem_id}" class="{css}">')

    def close_group(self):
        self.parts.append("</g>")

    def polyline(self, pts: Sequence[Point]):
        self.parts.append(f'<polyline points="{self.points_attr(pts)}" />')

    def polygon(self, pts: Sequence[Point]):
        self.parts.append(f'<polygon points="{self.points_attr(pts)}" />')

    def circle(self, center: Point, r: float):
        cx, cy = self.pt(center)
        self.parts.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" />')

    def label(self, anchor: Point, text: str, dx: float = 8.0, dy: float = -8.0):
        x, y = self.pt(anchor)
        self.parts.append(
            f'<text class="label" x="{_fmt(x + dx)}" y="{_fmt(y + dy)}">{text}</text>'
        )

    def render(self) -> str:
        return "".join(self.parts) + "</svg>"


def render_overlay(model: MapModel, focus: ElementSelector,
                   route_markers: Sequence[RouteMarkers] | RouteMarkers | None = None) -> str:
    """Emit the focused overlay as an SVG document string."""
    _check_selection(model, focus)
    if isinstance(route_markers, RouteMarkers):
        route_markers = [route_markers]
    markers = list(route_markers or [])

    svg = _Svg(model)
    x0, y0, x1, y1 = model.bounds
    svg.parts.append(
        f'<rect id="frame" class="frame" x="{_fmt(x0 * SCALE)}" y="{_fmt(y0 * SCALE)}" '
        f'width="{_fmt((x1 - x0) * SCALE)}" height="{_fmt((y1 - y0) * SCALE)}" />'
    )

    for idx in focus.obstacles:
        ob = model.obstacles[idx]
        svg.open_group(f"obstacle-{idx}", "obstacle")
        svg.polygon(ob.polygon)
        svg.close_group()

    for corridor in model.corridors:
        if corridor.name in focus.corridors:
            svg.open_group(f"corridor-{_ident(corridor.name)}", "corridor")
            svg.polyline(corridor.points)
            svg.label(corridor.points[0], corridor.name)
            svg.close_group()

    for area in model.areas:
        if area.name in focus.areas:
            svg.open_group(f"obj-{_ident(area.name)}", "area")
            svg.polygon(area.polygon)
            svg.label(area.polygon[0], area.name)
            svg.close_group()

    for named in model.routes_named:
        if named.name in focus.routes:
            svg.open_group(f"route-{_ident(named.name)}", "route")
            svg.polyline(named.points)
            svg.label(named.points[0], named.name)
            svg.close_group()

    for lane in model.lanes:
        if lane.name in focus.routes:
            svg.open_group(f"lane-{_ident(lane.name)}", "lane")
            svg.polyline(lane.points)
            svg.label(lane.points[0], lane.name)
            svg.close_group()

    # base layer: phase lines always present
    for pl in sorted(model.phase_lines, key=lambda l: l.order):
        svg.open_group(f"pl-{_ident(pl.name)}", "phase-line")
        svg.polyline(pl.points)
        svg.label(pl.points[-1], pl.name)
        svg.close_group()

    for marker_set in markers:
        svg.open_group(f"route-{_ident(marker_set.name)}", "route")
        svg.polyline(marker_set.route.geometry)
        svg.label(marker_set.route.geometry[0], marker_set.name)
        svg.close_group()

    wp_index = 0
    for marker_set in markers:
        for f in marker_set.fractions:
            p = route_point_at_fraction(marker_set.route, f)
            svg.open_group(f"wp-{wp_index}", "waypoint")
            svg.circle(p, 7.0)
            svg.close_group()
            wp_index += 1

    for unit in model.units:
        if unit.id in focus.units:
            css = "friendly" if unit.affiliation == "Friendly" else "enemy"
            svg.open_group(f"unit-{_ident(unit.id)}", css)
            svg.circle(unit.position, 10.0)
            svg.label(unit.position, f"{unit.id} ({unit.echelon})")
            svg.close_group()

    return svg.render()


def _check_selection(model: MapModel, focus: ElementSelector):
    unit_ids = {u.id for u in model.units}
    area_names = {a.name for a in model.areas}
    route_names = {r.name for r in model.routes_named} | {l.name for l in model.lanes}
    corridor_names = {c.name for c in model.corridors}
    for uid in focus.units:
        if uid not in unit_ids:
            raise UnknownElement(f"unknown unit {uid!r}")
    for name in focus.areas:
        if name not in area_names:
            raise UnknownElement(f"unknown area {name!r}")
    for name in focus.routes:
        if name not in route_names:
            raise UnknownElement(f"unknown route {name!r}")
    for name in focus.corridors:
        if name not in corridor_names:
            raise UnknownElement(f"unknown corridor {name!r}")
    for idx in focus.obstacles:
        if not 0 <= idx < len(model.obstacles):
            raise UnknownElement(f"obstacle index {idx} out of range")
