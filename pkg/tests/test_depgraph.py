"""Dependency DAG: construction, ordering, readiness, invalidation.

DERIVED expectations are checked against brute-force oracles: exhaustive
topological-order enumeration and DFS reachability closures.
"""

import itertools
import random

import pytest

from sforge.blocks import BlockKind, BlockState, Phase
from sforge.depgraph import (build_graph, default_graph, invalidate_downstream,
                             ready_blocks, topological_order)
from sforge.errors import CycleError, DanglingEdge


def k(name: str) -> BlockKind:
    """Synthetic node names ride on the OpordSection kind."""
    return BlockKind.parse(f"OpordSection:{name}")


def brute_force_topo_orders(nodes, edges):
    """All valid topological orders by filtering permutations."""
    orders = []
    for perm in itertools.permutations(nodes):
        position = {n: i for i, n in enumerate(perm)}
        if all(position[a] < position[b] for a, b in edges):
            orders.append(list(perm))
    return orders


def brute_force_descendants(edges, start):
    out = {}
    for a, b in edges:
        out.setdefault(a, set()).add(b)
    seen, frontier = set(), [start]
    while frontier:
        node = frontier.pop()
        for nxt in out.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def random_dag(rng, max_nodes=10, edge_prob=0.4):
    n = rng.randint(1, max_nodes)
    nodes = [k(f"N{i}") for i in range(n)]
    order = list(nodes)
    rng.shuffle(order)
    edges = [(order[i], order[j])
             for i in range(n) for j in range(i + 1, n)
             if rng.random() < edge_prob]
    return nodes, edges


class TestBuildGraph:
    def test_unit_positions_consumes_three_default_inputs(self):
        g = default_graph()
        target = BlockKind.parse("UnitPositionsTimeBased")
        assert len(g.in_neighbors(target)) == 3

    def test_scheme_of_maneuver_consumes_four_default_inputs(self):
        g = default_graph()
        target = BlockKind.parse("OpordSchemeOfManeuver")
        assert len(g.in_neighbors(target)) == 4

    def test_two_cycle_rejected_with_cycle_listed(self):
        with pytest.raises(CycleError) as err:
            build_graph([k("A"), k("B")], [(k("A"), k("B")), (k("B"), k("A"))])
        assert set(err.value.cycle) >= {k("A"), k("B")}

    def test_dangling_edge_rejected(self):
        with pytest.raises(DanglingEdge):
            build_graph([k("A")], [(k("A"), k("B"))])


class TestTopologicalOrder:
    def test_diamond_returns_lexicographically_least_order(self):
        nodes = [k("A"), k("B"), k("C"), k("D")]
        edges = [(k("A"), k("B")), (k("A"), k("C")),
                 (k("B"), k("D")), (k("C"), k("D"))]
        g = build_graph(nodes, edges)
        expected = min(brute_force_topo_orders(nodes, edges),
                       key=lambda order: [str(n) for n in order])
        assert topological_order(g) == expected

    def test_single_node(self):
        g = build_graph([k("solo")], [])
        assert topological_order(g) == [k("solo")]

    def test_default_graph_orders_positions_before_scheme(self):
        order = topological_order(default_graph())
        positions = order.index(BlockKind.parse("UnitPositionsTimeBased"))
        scheme = order.index(BlockKind.parse("OpordSchemeOfManeuver"))
        assert positions < scheme

    def test_random_dags_output_is_a_valid_permutation(self):
        rng = random.Random(4021)
        for _ in range(100):
            nodes, edges = random_dag(rng)
            g = build_graph(nodes, edges)
            order = topological_order(g)
            assert sorted(order, key=str) == sorted(nodes, key=str)
            position = {n: i for i, n in enumerate(order)}
            for a, b in edges:
                assert position[a] < position[b]


def states_for(nodes, approved=(), stale=(), rejected=()):
    states = {}
    for node in nodes:
        if node in approved:
            states[node] = BlockState(Phase.APPROVED, content="x")
        elif node in stale:
            states[node] = BlockState(Phase.STALE, content="x")
        elif node in rejected:
            states[node] = BlockState(Phase.REJECTED, feedback="f")
        else:
            states[node] = BlockState.pending()
    return states


class TestReadyBlocks:
    def test_pending_with_all_parents_approved_is_ready(self):
        nodes = [k("A"), k("B")]
        g = build_graph(nodes, [(k("A"), k("B"))])
        states = states_for(nodes, approved=[k("A")])
        assert k("B") in ready_blocks(g, states)

    def test_stale_parent_blocks_readiness(self):
        nodes = [k("A"), k("B")]
        g = build_graph(nodes, [(k("A"), k("B"))])
        states = states_for(nodes, stale=[k("A")])
        assert k("B") not in ready_blocks(g, states)

    def test_mini_pacific_positions_ready_after_three_parents(self):
        g = default_graph()
        target = BlockKind.parse("UnitPositionsTimeBased")
        states = states_for(g.nodes, approved=g.in_neighbors(target))
        assert target in ready_blocks(g, states)

    def test_ready_never_intersects_approved(self):
        rng = random.Random(77)
        for _ in range(50):
            nodes, edges = random_dag(rng)
            g = build_graph(nodes, edges)
            approved = {n for n in nodes if rng.random() < 0.5}
            states = states_for(nodes, approved=approved)
            assert not (ready_blocks(g, states) & approved)


class TestInvalidateDownstream:
    def test_editing_unit_purpose_stales_both_poc_blocks(self):
        g = default_graph()
        edited = BlockKind.parse("HighLevelUnitPurpose")
        states = states_for(g.nodes, approved=g.nodes)
        updated = invalidate_downstream(g, edited, states)
        expected_stale = brute_force_descendants(g.edges, edited)
        assert BlockKind.parse("UnitPositionsTimeBased") in expected_stale
        assert BlockKind.parse("OpordSchemeOfManeuver") in expected_stale
        for node in g.nodes:
            expected = Phase.STALE if node in expected_stale else Phase.APPROVED
            assert updated[node].phase is expected

    def test_sink_edit_changes_nothing(self):
        g = default_graph()
        sink = BlockKind.parse("OpordSchemeOfManeuver")
        states = states_for(g.nodes, approved=g.nodes)
        assert invalidate_downstream(g, sink, states) == states

    def test_pending_descendants_untouched(self):
        nodes = [k("A"), k("B"), k("C")]
        g = build_graph(nodes, [(k("A"), k("B")), (k("B"), k("C"))])
        states = states_for(nodes, approved=[k("A")])  # B, C pending
        updated = invalidate_downstream(g, k("A"), states)
        assert updated[k("B")] == states[k("B")]
        assert updated[k("C")] == states[k("C")]

    def test_idempotent(self):
        rng = random.Random(99)
        for _ in range(30):
            nodes, edges = random_dag(rng)
            g = build_graph(nodes, edges)
            approved = {n for n in nodes if rng.random() < 0.6}
            states = states_for(nodes, approved=approved)
            edited = rng.choice(nodes)
            once = invalidate_downstream(g, edited, states)
            assert invalidate_downstream(g, edited, once) == once

    def test_matches_brute_force_closure_on_random_dags(self):
        rng = random.Random(2718)
        for _ in range(100):
            nodes, edges = random_dag(rng)
            g = build_graph(nodes, edges)
            approved = {n for n in nodes if rng.random() < 0.7}
            states = states_for(nodes, approved=approved)
            edited = rng.choice(nodes)
            updated = invalidate_downstream(g, edited, states)
            closure = brute_force_descendants(edges, edited)
            for node in nodes:
                should_stale = node in closure and node in approved
                assert (updated[node].phase is Phase.STALE) == should_stale
