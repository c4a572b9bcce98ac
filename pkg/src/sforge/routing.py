"""Waypoint-graph routing: grid discretization, Dijkstra, Yen's k-shortest.

Ties are broken everywhere by the lexicographically smallest node sequence so
route planning is fully deterministic and comparable against brute-force
path enumeration.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .errors import EmptyGraph, SchemaError, Unreachable
from .mapmodel import MapModel, Point, dist, point_in_polygon

GRID_EPS = 1e-9


@dataclass(frozen=True)
class WaypointGraph:
    """Undirected weighted graph over traversable map nodes."""

    nodes: dict[int, Point]                       # node id -> coordinates
    adjacency: dict[int, tuple[tuple[int, float], ...]]  # id -> ((nbr, weight), ...)
    resolution: float

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency.values()) // 2

    def weight(self, a: int, b: int) -> float:
        for nbr, w in self.adjacency.get(a, ()):
            if nbr == b:
                return w
        raise KeyError(f"no edge {a} -> {b}")


@dataclass(frozen=True)
class Route:
    """A loopless path: node ids, weighted length, geometry, per-leg weights."""

    node_ids: tuple[int, ...]
    total_length: float
    geometry: tuple[Point, ...]
    leg_weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.node_ids) != len(set(self.node_ids)):
            raise ValueError("route repeats a node")
        if len(self.leg_weights) != max(len(self.node_ids) - 1, 0):
            raise ValueError("leg weight count does not match node count")
        total = sum(self.leg_weights)
        if abs(total - self.total_length) > 1e-9 * max(1.0, abs(total)):
            raise ValueError("total_length disagrees with leg weights")


def route_from_nodes(graph: WaypointGraph, node_ids: list[int]) -> Route:
    legs = tuple(graph.weight(node_ids[i], node_ids[i + 1])
                 for i in range(len(node_ids) - 1))
    return Route(
        node_ids=tuple(node_ids),
        total_length=sum(legs),
        geometry=tuple(graph.nodes[n] for n in node_ids),
        leg_weights=legs,
    )


def straight_route(points: list[Point]) -> Route:
    """A route from raw geometry with Euclidean leg weights (test/tool helper)."""
    legs = tuple(dist(points[i], points[i + 1]) for i in range(len(points) - 1))
    return Route(tuple(range(len(points))), sum(legs), tuple(points), legs)


def build_waypoint_graph(model: MapModel, resolution: float) -> WaypointGraph:
    """Discretize the map into a uniform grid with 8-neighbor adjacency.

    Grid points inside impassable obstacles (boundary included, so a polygon
    covering the bounds empties the graph) are dropped. Edge weight
    is Euclidean distance times the strongest cost-multiplier obstacle
    containing the edge midpoint, times the best (smallest) corridor
    multiplier whose buffered polyline contains the midpoint. An explicit
    node/edge list in the map file overrides grid derivation.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if model.explicit_waypoints is not None:
        return _explicit_graph(model)

    x0, y0, x1, y1 = model.bounds
    nx = int(math.floor((x1 - x0) / resolution + GRID_EPS)) + 1
    ny = int(math.floor((y1 - y0) / resolution + GRID_EPS)) + 1
    impassable = [list(o.polygon) for o in model.obstacles if o.impassable]

    nodes: dict[int, Point] = {}
    index: dict[tuple[int, int], int] = {}
    for j in range(ny):
        for i in range(nx):
            p = (x0 + i * resolution, y0 + j * resolution)
            if any(point_in_polygon(p, poly) for poly in impassable):
                continue
            node_id = j * nx + i
            nodes[node_id] = p
            index[(i, j)] = node_id
    if not nodes:
        raise EmptyGraph("every grid point is inside an impassable obstacle")

    cost_obstacles = [o for o in model.obstacles if not o.impassable]
    adjacency: dict[int, list[tuple[int, float]]] = {n: [] for n in nodes}
    steps = ((1, 0), (0, 1), (1, 1), (1, -1))  # forward half of 8-neighborhood
    for (i, j), a in index.items():
        for di, dj in steps:
            b = index.get((i + di, j + dj))
            if b is None:
                continue
            pa, pb = nodes[a], nodes[b]
            mid = ((pa[0] + pb[0]) / 2, (pa[1] + pb[1]) / 2)
            w = dist(pa, pb)
            mults = [o.multiplier for o in cost_obstacles
                     if point_in_polygon(mid, list(o.polygon))]
            if mults:
                w *= max(mults)
            corridor_mults = [c.multiplier for c in model.corridors if c.contains(mid)]
            if corridor_mults:
                w *= min(corridor_mults)
            adjacency[a].append((b, w))
            adjacency[b].append((a, w))

    frozen = {n: tuple(sorted(nbrs)) for n, nbrs in adjacency.items()}
    return WaypointGraph(nodes=nodes, adjacency=frozen, resolution=resolution)


def _explicit_graph(model: MapModel) -> WaypointGraph:
    raw = model.explicit_waypoints
    nodes: dict[int, Point] = {}
    impassable = [list(o.polygon) for o in model.obstacles if o.impassable]
    for entry in raw.get("nodes", []):
        node_id, x, y = int(entry[0]), float(entry[1]), float(entry[2])
        p = (x, y)
        if any(point_in_polygon(p, poly) for poly in impassable):
            raise SchemaError(f"explicit node {node_id} inside an impassable obstacle")
        nodes[node_id] = p
    if not nodes:
        raise EmptyGraph("explicit waypoint list is empty")
    adjacency: dict[int, list[tuple[int, float]]] = {n: [] for n in nodes}
    for a, b, w in raw.get("edges", []):
        a, b, w = int(a), int(b), float(w)
        if w <= 0:
            raise SchemaError("edge weights must be positive")
        if a not in nodes or b not in nodes:
            raise SchemaError(f"edge ({a}, {b}) references an unknown node")
        adjacency[a].append((b, w))
        adjacency[b].append((a, w))
    frozen = {n: tuple(sorted(nbrs)) for n, nbrs in adjacency.items()}
    return WaypointGraph(nodes=nodes, adjacency=frozen,
                         resolution=float(raw.get("resolution", 0.0)) or 1.0)


def snap_to_node(graph: WaypointGraph, p: Point) -> int:
    """Nearest node by Euclidean distance; ties broken by lowest node id."""
    return min(graph.nodes, key=lambda n: (dist(graph.nodes[n], p), n))


def _dijkstra(graph: WaypointGraph, src: int, dst: int,
              removed_nodes: frozenset[int] = frozenset(),
              removed_edges: frozenset[tuple[int, int]] = frozenset()):
    """Shortest path with lexicographically-least tie-break.

    Heap entries are (distance, path) so among equal-length paths the
    smallest node sequence settles first. Returns (length, path) or None.
    """
    if src in removed_nodes or dst in removed_nodes:
        return None
    heap: list[tuple[float, tuple[int, ...]]] = [(0.0, (src,))]
    settled: set[int] = set()
    while heap:
        length, path = heapq.heappop(heap)
        node = path[-1]
        if node in settled:
            continue
        settled.add(node)
        if node == dst:
            return length, path
        for nbr, w in graph.adjacency.get(node, ()):
            if nbr in settled or nbr in removed_nodes:
                continue
            if (node, nbr) in removed_edges:
                continue
            heapq.heappush(heap, (length + w, path + (nbr,)))
    return None


def shortest_route(graph: WaypointGraph, src: Point, dst: Point) -> Route:
    """Minimum-weight loopless route between the nodes nearest src and dst."""
    if not graph.nodes:
        raise EmptyGraph("waypoint graph has no nodes")
    a = snap_to_node(graph, src)
    b = snap_to_node(graph, dst)
    if a == b:
        return Route((a,), 0.0, (graph.nodes[a],), ())
    found = _dijkstra(graph, a, b)
    if found is None:
        raise Unreachable(f"no path between nodes {a} and {b}")
    return route_from_nodes(graph, list(found[1]))


def _yen(graph: WaypointGraph, src: int, dst: int, k: int) -> list[tuple[float, tuple[int, ...]]]:
    """Yen's k-shortest loopless paths in (length, sequence) order."""
    first = _dijkstra(graph, src, dst)
    if first is None:
        raise Unreachable(f"no path between nodes {src} and {dst}")
    accepted: list[tuple[float, tuple[int, ...]]] = [first]
    accepted_set = {first[1]}
    candidates: list[tuple[float, tuple[int, ...]]] = []
    candidate_set: set[tuple[int, ...]] = set()

    while len(accepted) < k:
        _, prev_path = accepted[-1]
        for i in range(len(prev_path) - 1):
            spur = prev_path[i]
            root = prev_path[: i + 1]
            removed_edges = set()
            for _, path in accepted:
                if len(path) > i + 1 and path[: i + 1] == root:
                    removed_edges.add((path[i], path[i + 1]))
            removed_nodes = frozenset(root[:-1])
            spur_found = _dijkstra(graph, spur, dst, removed_nodes,
                                   frozenset(removed_edges))
            if spur_found is None:
                continue
            spur_len, spur_path = spur_found
            total_path = root[:-1] + spur_path
            if total_path in accepted_set or total_path in candidate_set:
                continue
            root_len = sum(graph.weight(root[j], root[j + 1]) for j in range(i))
            heapq.heappush(candidates, (root_len + spur_len, total_path))
            candidate_set.add(total_path)
        if not candidates:
            break
        best = heapq.heappop(candidates)
        candidate_set.discard(best[1])
        accepted.append(best)
        accepted_set.add(best[1])
    return accepted


def _edge_overlap_fraction(route: Route, kept: Route) -> float:
    """Fraction of ``route``'s weighted length shared (as edges) with ``kept``."""
    if route.total_length == 0:
        return 1.0 if route.node_ids == kept.node_ids else 0.0
    kept_edges = {frozenset(pair) for pair in zip(kept.node_ids, kept.node_ids[1:])}
    shared = sum(w for pair, w in zip(zip(route.node_ids, route.node_ids[1:]),
                                      route.leg_weights)
                 if frozenset(pair) in kept_edges)
    return shared / route.total_length


def k_routes(graph: WaypointGraph, src: Point, dst: Point, k: int,
             max_overlap: float = 0.8) -> list[Route]:
    """k-shortest loopless routes, greedily filtered for edge diversity.

    A candidate is dropped when more than ``max_overlap`` of its edge length
    is shared with any already-kept route. May return fewer than k routes.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 < max_overlap <= 1.0:
        raise ValueError("max_overlap must be in (0, 1]")
    if not graph.nodes:
        raise EmptyGraph("waypoint graph has no nodes")
    a = snap_to_node(graph, src)
    b = snap_to_node(graph, dst)
    if a == b:
        return [Route((a,), 0.0, (graph.nodes[a],), ())]

    kept: list[Route] = []
    # Yen already yields non-decreasing lengths, so greedy keep-order is by length.
    for _, path in _yen(graph, a, b, k):
        route = route_from_nodes(graph, list(path))
        if any(_edge_overlap_fraction(route, existing) > max_overlap
               for existing in kept):
            continue
        kept.append(route)
    return kept


def route_point_at_fraction(route: Route, f: float) -> Point:
    """Point at weighted arc position f * total_length along the geometry.

    Legs advance by their weights, so a cost-multiplied leg takes a
    proportionally larger share of the journey; within a leg the position
    is linear in its geometry.
    """
    if not 0.0 <= f <= 1.0:
        raise ValueError("fraction must be within [0, 1]")
    if len(route.geometry) == 1 or route.total_length == 0:
        return route.geometry[0] if f < 1.0 else route.geometry[-1]
    if f == 0.0:
        return route.geometry[0]
    if f == 1.0:
        return route.geometry[-1]
    target = f * route.total_length
    walked = 0.0
    for i, w in enumerate(route.leg_weights):
        if w > 0 and walked + w >= target:
            t = (target - walked) / w
            (x1, y1), (x2, y2) = route.geometry[i], route.geometry[i + 1]
            return (x1 + t * (x2 - x1), y1 + t * (y2 - y1))
        walked += w
    return route.geometry[-1]


def position_at_time(route: Route, start: float, arrive: float,
                     query: float) -> tuple[Point, float]:
    """Clamped linear progress: f = clamp((query-start)/(arrive-start), 0, 1)."""
    if arrive <= start:
        raise ValueError("arrive must be after start")
    f = (query - start) / (arrive - start)
    f = max(0.0, min(1.0, f))
    return route_point_at_fraction(route, f), f
