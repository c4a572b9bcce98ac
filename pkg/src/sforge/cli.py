"""sforge command line.

Everything but `serve` binds the core library directly, so replayed runs
stay fully offline; `serve` exposes the same behavior over HTTP for the
review workbench.

Exit codes: 0 ok, 1 validation failure, 2 runtime error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import DanglingReference, SchemaError, SforgeError
from .gateway import LlmGateway
from .overlay import ElementSelector, render_overlay
from .pipeline import run_pipeline
from .routing import build_waypoint_graph, k_routes
from .scenario import load_scenario_dir
from .store import LogicalClock, ScenarioStore, utc_clock


@click.group()
def main():
    """Scenario-artifact generation pipeline."""


def _load(directory: str):
    try:
        return load_scenario_dir(directory)
    except (SchemaError, DanglingReference) as exc:
        click.echo(f"validation failed: {exc}", err=True)
        sys.exit(1)


@main.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
def validate(directory):
    """Validate a scenario package directory."""
    scenario, model = _load(directory)
    click.echo(f"ok: scenario {scenario.id!r} with {len(scenario.blocks)} blocks, "
               f"map {scenario.map_ref} ({len(model.units)} units)")


@main.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--auto-approve-green", is_flag=True, default=False,
              help="Generate green blocks unattended (finish approves them).")
@click.option("--pause-on", "pause", multiple=True,
              type=click.Choice(["orange", "purple"]),
              help="Stop for human review at these levels (default: both).")
@click.option("--mode", default="replay",
              type=click.Choice(["live", "record", "replay", "scripted"]))
@click.option("--cassette", type=click.Path(), default=None,
              help="Cassette file for record/replay modes.")
@click.option("--store", "store_dir", type=click.Path(), default=None,
              help="Output store directory (default: <dir>/store).")
def run(directory, auto_approve_green, pause, mode, cassette, store_dir):
    """Run the generation pipeline over a scenario package."""
    scenario, model = _load(directory)
    map_doc = json.loads((Path(directory) / scenario.map_ref).read_text(encoding="utf-8"))
    store_path = Path(store_dir) if store_dir else Path(directory) / "store"
    try:
        gateway = LlmGateway(mode, cassette_path=cassette)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    clock = LogicalClock() if mode in ("replay", "scripted") else utc_clock
    if (store_path / "events.jsonl").exists():
        store = ScenarioStore.open(store_path, clock=clock)
    else:
        store = ScenarioStore.create(store_path, scenario, clock=clock)
    pause_on = tuple(pause) if pause else ("orange", "purple")
    try:
        report = run_pipeline(scenario, model, map_doc, store, gateway,
                              auto_approve_green=auto_approve_green,
                              pause_on=pause_on)
    except SforgeError as exc:
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(2)
    for name in report.completed:
        click.echo(f"approved: {name}")
    for name, reason in report.failures.items():
        click.echo(f"failed: {name}: {reason}", err=True)
    if report.paused_on:
        click.echo(f"paused: {report.paused_on} awaits human review "
                   f"(store: {store_path})")
    if not report.ok:
        sys.exit(2)


@main.group("map")
def map_group():
    """Map-engine utilities."""


@map_group.command("route")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--from", "src", required=True, help="Origin unit or area name.")
@click.option("--to", "dst", required=True, help="Destination unit or area name.")
@click.option("-k", "count", default=3, show_default=True)
@click.option("--max-overlap", default=0.8, show_default=True)
@click.option("--resolution", default=None, type=float,
              help="Grid spacing in km (default: map file's resolution).")
def map_route(directory, src, dst, count, max_overlap, resolution):
    """Propose up to K routes between two named map elements."""
    scenario, model = _load(directory)
    from .agents import MapAgent

    try:
        graph = build_waypoint_graph(model, resolution or model.resolution_km)
        agent = MapAgent(model, _NullArtifacts(), resolution or model.resolution_km)
        origin = agent.resolve_point(src)
        target = agent.resolve_point(dst)
        routes = k_routes(graph, origin, target, count, max_overlap)
    except SforgeError as exc:
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(2)
    for i, route in enumerate(routes, 1):
        click.echo(f"R{i}: {route.total_length:.2f} km over "
                   f"{len(route.node_ids)} waypoints")


class _NullArtifacts:
    def put_svg(self, svg: str) -> str:  # routing-only CLI path stores nothing
        return "unsaved"


@map_group.command("render")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--units", default="", help="Comma-separated unit ids.")
@click.option("--areas", default="", help="Comma-separated area names.")
@click.option("--routes", default="", help="Comma-separated route/lane names.")
@click.option("-o", "output", required=True, type=click.Path())
def map_render(directory, units, areas, routes, output):
    """Render a focused overlay to an SVG file."""
    scenario, model = _load(directory)
    selector = ElementSelector.of(
        units=[u for u in units.split(",") if u],
        areas=[a for a in areas.split(",") if a],
        routes=[r for r in routes.split(",") if r])
    try:
        svg = render_overlay(model, selector)
    except SforgeError as exc:
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(2)
    Path(output).write_text(svg, encoding="utf-8")
    click.echo(f"wrote {output}")


@main.command()
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store", "store_dir", type=click.Path(), default="store",
              show_default=True)
def serve(port, host, store_dir):
    """Start the review service (gateway configured via LLM_* env vars)."""
    import uvicorn

    from .service import create_app

    app = create_app(Path(store_dir))
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
