#!/usr/bin/env python3
"""Rebuild the mini-pacific replay cassette.

Composes the scripted model turns for the two generation tasks (unit
positions, scheme of maneuver), embedding route facts computed from the real
map engine, then runs the full pipeline in record mode so every cassette key
is the hash of a request the engine actually sends. Re-run this after any
change to prompts, strategies, fixture data, or observation formatting.
"""

import json
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from sforge.agents import ArtifactStore, MapAgent  # noqa: E402
from sforge.gateway import LlmGateway  # noqa: E402
from sforge.pipeline import run_pipeline  # noqa: E402
from sforge.scenario import load_scenario_dir  # noqa: E402
from sforge.store import LogicalClock, ScenarioStore  # noqa: E402

FIXTURE = ROOT / "fixtures" / "mini-pacific"
CASSETTE = FIXTURE / "cassettes" / "run.jsonl"


def compose_responses(model) -> list[str]:
    # Pre-compute the exact route facts the narrative bakes in, using a MapAgent
    # configured identically to the one the pipeline will build.
    with tempfile.TemporaryDirectory() as tmp:
        agent = MapAgent(model, ArtifactStore(tmp))
        proposal = agent.invoke_tool(
            "propose_routes", {"from": "25ID", "to": "OBJ BRONCOS", "k": 3})
        assert not proposal.error, proposal.text
        routes = proposal.payload
        chosen = routes[1]["route_id"] if len(routes) > 1 else routes[0]["route_id"]
        samples = []
        for day in range(1, 6):
            obs = agent.invoke_tool("route_progress", {
                "route_id": chosen, "start": 0, "arrive": 5, "query": day})
            assert not obs.error, obs.text
            samples.append({"day": day, "position": obs.payload["position"],
                            "context": obs.payload["between"]})
    timeline_json = json.dumps({"unit": "25ID", "samples": samples}, indent=2)
    projected = "; ".join(
        f"D+{s['day']} at ({s['position'][0]:.1f}, {s['position'][1]:.1f}) "
        f"between {s['context'][0]} and {s['context'][1]}" for s in samples)

    unit_positions_task = [
        'Thought: I need 25ID\'s assigned tasks and objectives before I can '
        'forecast its movement.\n'
        'Action: HighLevelUnitPurpose.answer\n'
        'Action Input: {"question": "What are 25ID\'s assigned tasks and objectives?"}',

        "25ID is the main effort. It attacks east in zone from PL APPLE toward "
        "PL DATE, defeats elements of 165BCG, seizes OBJ BRONCOS, then "
        "establishes LANE DENVER and LANE SEATTLE in preparation for the FPOL "
        "of IAD.",

        'Thought: Next I need the most recent known location of 25ID on the map.\n'
        'Action: MapMcoo.locate_unit\n'
        'Action Input: {"unit": "25ID"}',

        'Thought: Before fixing the goal location I should check whether any '
        'pre-defined trigger events apply to 25ID.\n'
        'Action: DecisionSupportMatrix.answer\n'
        'Action Input: {"question": "Do any pre-defined trigger events apply to 25ID?"}',

        "Trigger DP1 applies to 25ID: when 25ID crosses PL BANANA in zone, IAD "
        "begins movement from AA MINERS toward its route start points.",

        'Thought: The goal is OBJ BRONCOS east of PL DATE, reachable in five '
        'days. I will request route options between 25ID and OBJ BRONCOS and '
        'compare them on the overlay.\n'
        'Action: MapMcoo.propose_routes\n'
        'Action Input: {"from": "25ID", "to": "OBJ BRONCOS", "k": 3}',
    ]
    day_thoughts = {
        1: (f"Thought: The shortest option runs straight along CORRIDOR NORTH "
            f"past the reported 165BCG position, which is vulnerable to ambush. "
            f"I select {chosen}, which detours around that terrain at an "
            f"acceptable cost. Now I interpolate the D+1 position.\n"),
        2: "Thought: Continue the interpolation for D+2.\n",
        3: "Thought: Continue the interpolation for D+3.\n",
        4: "Thought: Continue the interpolation for D+4.\n",
        5: "Thought: Finally interpolate the arrival-day position, D+5.\n",
    }
    for day in range(1, 6):
        unit_positions_task.append(
            day_thoughts[day]
            + "Action: MapMcoo.route_progress\n"
            + f'Action Input: {{"route_id": "{chosen}", "start": 0, '
              f'"arrive": 5, "query": {day}}}')
    unit_positions_task.append(
        "Final Answer: The movement forecast for 25ID is complete.\n\n"
        "```json\n" + timeline_json + "\n```")

    scheme_task = [
        'Thought: I start by extracting the intent and tasks of each friendly unit.\n'
        'Action: HighLevelUnitPurpose.answer\n'
        'Action Input: {"question": "Summarize the intended role and mission of '
        '25ID, 3DIV, and IAD."}',

        "25ID is the main effort, attacking east in zone from PL APPLE toward "
        "PL DATE to seize OBJ BRONCOS and establish LANE DENVER and LANE "
        "SEATTLE for the FPOL of IAD. 3DIV is the supporting effort south of "
        "the central mountains, seizing OBJ JAGUARS and establishing LANE "
        "JACKSONVILLE. IAD stages in AA MINERS and moves along ROUTE COLORADO, "
        "ROUTE WASHINGTON, and ROUTE FLORIDA to conduct the FPOL.",

        'Thought: I need the projected time-based positions so each movement '
        'has spatial-temporal context.\n'
        'Action: UnitPositionsTimeBased.answer\n'
        'Action Input: {"question": "Where is 25ID projected to be between D+1 and D+5?"}',

        f"Projected positions for 25ID: {projected}. The D+5 position is "
        f"inside OBJ BRONCOS.",

        'Thought: Next I align movements with the decision points in the '
        'decision support matrix.\n'
        'Action: DecisionSupportMatrix.answer\n'
        'Action Input: {"question": "Which decision points condition or '
        'synchronize unit movements?"}',

        "DP1: when 25ID crosses PL BANANA in zone, IAD begins movement from AA "
        "MINERS toward its route start points. DP2: when 3DIV seizes OBJ "
        "JAGUARS, LANE JACKSONVILLE opens for the FPOL of IAD. DP3: when LANE "
        "DENVER and LANE SEATTLE are reported open, IAD conducts FPOL and "
        "assumes the main effort.",

        'Thought: Finally I confirm the phase-line ordering and the named '
        'control measures on the map.\n'
        'Action: MapMcoo.list_elements\n'
        'Action Input: {}',

        "Final Answer: In the north, 25ID attacks east in zone from PL APPLE "
        "to PL BANANA as the main effort, defeats elements of the 165BCG "
        "along CORRIDOR NORTH, and continues the attack across PL CHERRY and "
        "PL DATE to seize OBJ BRONCOS and OBJ SEAHAWKS by D+5. On seizure of "
        "OBJ BRONCOS, 25ID establishes LANE DENVER and LANE SEATTLE in "
        "preparation for the forward passage of lines (FPOL) of IAD (DP3).\n\n"
        "In the south, 3DIV attacks east below the central high ground in "
        "zone from PL APPLE toward PL DATE, engages the 164BCG, seizes OBJ "
        "JAGUARS, and establishes LANE JACKSONVILLE for the FPOL of IAD "
        "(DP2).\n\nIn the rear, IAD completes staging in AA MINERS; when 25ID "
        "crosses PL BANANA (DP1), IAD begins movement along ROUTE COLORADO, "
        "ROUTE WASHINGTON, and ROUTE FLORIDA toward the lane entrances, "
        "prepared to conduct FPOL through LANE DENVER, LANE SEATTLE, and "
        "LANE JACKSONVILLE and assume the main effort east of PL DATE.",
    ]
    return unit_positions_task + scheme_task


def main():
    scenario, model = load_scenario_dir(FIXTURE)
    map_doc = json.loads((FIXTURE / scenario.map_ref).read_text(encoding="utf-8"))
    responses = compose_responses(model)

    CASSETTE.parent.mkdir(parents=True, exist_ok=True)
    if CASSETTE.exists():
        CASSETTE.unlink()

    queue = list(responses)

    def scripted_transport(request):
        if not queue:
            raise AssertionError("script ran dry: composed responses are out of sync")
        return queue.pop(0)

    gateway = LlmGateway("record", cassette_path=CASSETTE,
                         transport=scripted_transport)
    with tempfile.TemporaryDirectory() as tmp:
        store = ScenarioStore.create(Path(tmp) / "store", scenario,
                                     clock=LogicalClock())
        report = run_pipeline(scenario, model, map_doc, store, gateway,
                              auto_approve_green=True, pause_on=("purple",))
    if queue:
        print(f"warning: {len(queue)} scripted responses unused", file=sys.stderr)
    if not report.ok or report.paused_on:
        print(f"pipeline did not complete: {report}", file=sys.stderr)
        sys.exit(1)
    print(f"recorded {sum(1 for _ in CASSETTE.open())} cassette entries "
          f"-> {CASSETTE.relative_to(ROOT)}")
    print(f"completed blocks: {', '.join(report.completed)}")


if __name__ == "__main__":
    main()
