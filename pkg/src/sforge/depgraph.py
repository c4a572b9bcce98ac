"""Dependency DAG over block kinds: ordering, readiness, invalidation."""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping

from .blocks import BlockKind, BlockState, Phase
from .errors import CycleError, DanglingEdge

Edge = tuple[BlockKind, BlockKind]


@dataclass(frozen=True)
class DependencyGraph:
    """Immutable DAG; edge (a, b) means b consumes a's output."""

    nodes: frozenset[BlockKind]
    edges: frozenset[Edge]

    def in_neighbors(self, kind: BlockKind) -> set[BlockKind]:
        return {a for (a, b) in self.edges if b == kind}

    def out_neighbors(self, kind: BlockKind) -> set[BlockKind]:
        return {b for (a, b) in self.edges if a == kind}


def _find_cycle(nodes: Iterable[BlockKind], out: Mapping[BlockKind, set[BlockKind]]):
    """Return one cycle as a node list, or None. Iterative DFS with colors."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}
    parent: dict[BlockKind, BlockKind] = {}
    for start in sorted(nodes, key=str):
        if color[start] != WHITE:
            continue
        stack = [(start, iter(sorted(out.get(start, ()), key=str)))]
        color[start] = GRAY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GRAY:
                    # walk parents back to nxt to materialize the cycle
                    cycle = [node]
                    cur = node
                    while cur != nxt:
                        cur = parent[cur]
                        cycle.append(cur)
                    cycle.reverse()
                    return cycle + [nxt]
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    parent[nxt] = node
                    stack.append((nxt, iter(sorted(out.get(nxt, ()), key=str))))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return None


def build_graph(nodes: Iterable[BlockKind], edges: Iterable[Edge]) -> DependencyGraph:
    """Validate and freeze a dependency graph.

    Raises DanglingEdge for an endpoint outside ``nodes`` and CycleError
    (listing one offending cycle) if the edges are not acyclic.
    """
    node_set = frozenset(nodes)
    edge_set = frozenset(edges)
    for a, b in sorted(edge_set, key=lambda e: (str(e[0]), str(e[1]))):
        if a not in node_set or b not in node_set:
            raise DanglingEdge(f"edge {a} -> {b} references an undeclared node")
    out: dict[BlockKind, set[BlockKind]] = {}
    for a, b in edge_set:
        out.setdefault(a, set()).add(b)
    cycle = _find_cycle(node_set, out)
    if cycle is not None:
        raise CycleError(cycle)
    return DependencyGraph(nodes=node_set, edges=edge_set)


def graph_from_json(raw: dict) -> DependencyGraph:
    nodes = [BlockKind.parse(n) for n in raw["nodes"]]
    edges = [(BlockKind.parse(a), BlockKind.parse(b)) for a, b in raw["edges"]]
    return build_graph(nodes, edges)


def default_graph() -> DependencyGraph:
    """The reconstructed edge set shipped with the package."""
    raw = json.loads(resources.files("sforge.data").joinpath("graph.json").read_text())
    return graph_from_json(raw)


def topological_order(graph: DependencyGraph) -> list[BlockKind]:
    """Kahn's algorithm; ties broken by ascending lexicographic kind name."""
    indeg = {n: 0 for n in graph.nodes}
    for _, b in graph.edges:
        indeg[b] += 1
    heap = [(str(n), n) for n in graph.nodes if indeg[n] == 0]
    heapq.heapify(heap)
    order: list[BlockKind] = []
    while heap:
        _, node = heapq.heappop(heap)
        order.append(node)
        for nxt in graph.out_neighbors(node):
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(heap, (str(nxt), nxt))
    return order


def ready_blocks(graph: DependencyGraph,
                 states: Mapping[BlockKind, BlockState]) -> set[BlockKind]:
    """Kinds in Pending/Rejected whose every in-neighbor is Approved."""
    ready = set()
    for kind in graph.nodes:
        if states[kind].phase not in (Phase.PENDING, Phase.REJECTED):
            continue
        if all(states[parent].phase is Phase.APPROVED
               for parent in graph.in_neighbors(kind)):
            ready.add(kind)
    return ready


def descendants(graph: DependencyGraph, kind: BlockKind) -> set[BlockKind]:
    """All nodes reachable from ``kind`` (excluding itself)."""
    seen: set[BlockKind] = set()
    frontier = [kind]
    while frontier:
        node = frontier.pop()
        for nxt in graph.out_neighbors(node):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def invalidate_downstream(graph: DependencyGraph, edited: BlockKind,
                          states: Mapping[BlockKind, BlockState]) -> dict[BlockKind, BlockState]:
    """Mark every Approved descendant of ``edited`` Stale; touch nothing else."""
    if edited not in graph.nodes:
        raise DanglingEdge(f"{edited} is not a graph node")
    updated = dict(states)
    for kind in descendants(graph, edited):
        state = updated[kind]
        if state.phase is Phase.APPROVED:
            updated[kind] = BlockState(Phase.STALE, content=state.content)
    return updated
