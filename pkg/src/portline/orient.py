"""Edge orientation: turn the undirected plan into a DAG.

Three strategies, all reducible to a total order on vertices (which is why
no cycle elimination is ever needed): a spring embedder followed by
"edges point upward", a BFS discovery order, and a uniform random
placement followed by the same upward rule.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from portline.model import PortGraph, contracted_graph

Point = tuple[float, float]

# Ideal spring length when no drawing area is given.
_EDGE_LENGTH = 50.0


@dataclass(frozen=True)
class FdConfig:
    iterations: int = 500
    restarts: int = 1
    # (width, height); (0, 0) means auto-size from the vertex count
    area: tuple[float, float] = (0.0, 0.0)
    seed: int = 0


@dataclass(frozen=True)
class Orientation:
    """Maps each edge id to (tail vertex id, head vertex id)."""

    direction: dict[str, tuple[str, str]]

    def arcs(self) -> list[tuple[str, str]]:
        """Directed vertex pairs with multiplicity, sorted for determinism."""
        return sorted(self.direction.values())


def _orient_by_order(graph: PortGraph, rank: dict[str, int]) -> Orientation:
    ports = graph.port_by_id
    direction: dict[str, tuple[str, str]] = {}
    for e in graph.edges:
        va, vb = ports[e.a].vertex, ports[e.b].vertex
        direction[e.id] = (va, vb) if rank[va] < rank[vb] else (vb, va)
    return Orientation(direction=direction)


def orient_by_y(graph: PortGraph, positions: dict[str, Point]) -> Orientation:
    """Direct every edge from its lower endpoint to its higher one.

    Ties fall back to id order, so the underlying vertex order is total and
    the result is acyclic no matter what the positions look like.
    """
    order = sorted(positions, key=lambda v: (positions[v][1], v))
    rank = {v: i for i, v in enumerate(order)}
    return _orient_by_order(graph, rank)


def orient_bfs(graph: PortGraph, seed: int = 0) -> Orientation:
    cg = contracted_graph(graph)
    rng = np.random.default_rng(seed)
    nodes = sorted(cg.nodes)
    start = nodes[int(rng.integers(len(nodes)))]
    rank: dict[str, int] = {start: 0}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for nxt in cg.adjacency[cur]:
            if nxt not in rank:
                rank[nxt] = len(rank)
                queue.append(nxt)
    return _orient_by_order(graph, rank)


def orient_rand(graph: PortGraph, seed: int = 0) -> Orientation:
    cg = contracted_graph(graph)
    rng = np.random.default_rng(seed)
    side = math.sqrt(len(cg.nodes)) * _EDGE_LENGTH
    pts = rng.uniform(0.0, max(side, 1.0), size=(len(cg.nodes), 2))
    positions = {v: (float(x), float(y)) for v, (x, y) in zip(sorted(cg.nodes), pts)}
    return orient_by_y(graph, positions)


def orient_fd(graph: PortGraph, config: FdConfig = FdConfig()) -> Orientation:
    return orient_by_y(graph, layout_force_directed(graph, config))


def orient(graph: PortGraph, method: str, seed: int = 0,
           fd_iterations: int = 500, fd_restarts: int = 1) -> Orientation:
    if method == "fd":
        return orient_fd(graph, FdConfig(iterations=fd_iterations,
                                         restarts=fd_restarts, seed=seed))
    if method == "bfs":
        return orient_bfs(graph, seed)
    if method == "rand":
        return orient_rand(graph, seed)
    raise ValueError(f"unknown orientation method {method!r}")


def layout_force_directed(graph: PortGraph, config: FdConfig = FdConfig()) -> dict[str, Point]:
    """Fruchterman-Reingold positions for the contracted graph.

    Runs ``restarts`` seeded starts and keeps the layout whose straight-line
    drawing has the fewest crossings (first such run on ties).
    """
    cg = contracted_graph(graph)
    nodes = sorted(cg.nodes)
    n = len(nodes)
    width, height = config.area
    if width <= 0 or height <= 0:
        width = height = math.sqrt(n) * _EDGE_LENGTH
    if n == 1:
        return {nodes[0]: (width / 2, height / 2)}

    index = {v: i for i, v in enumerate(nodes)}
    pairs = sorted(cg.multiplicity)
    ei = np.array([index[a] for a, _ in pairs], dtype=int)
    ej = np.array([index[b] for _, b in pairs], dtype=int)
    ew = np.array([cg.multiplicity[p] for p in pairs], dtype=float)

    best: dict[str, Point] | None = None
    best_crossings = -1
    for r in range(max(1, config.restarts)):
        rng = np.random.default_rng((config.seed, r))
        pos = _fr_run(rng, n, width, height, ei, ej, ew, config.iterations)
        layout = {v: (float(pos[i, 0]), float(pos[i, 1])) for v, i in index.items()}
        crossings = straight_line_crossings(layout, pairs)
        if best is None or crossings < best_crossings:
            best, best_crossings = layout, crossings
    assert best is not None
    return best


def _fr_run(rng: np.random.Generator, n: int, width: float, height: float,
            ei: np.ndarray, ej: np.ndarray, ew: np.ndarray,
            iterations: int) -> np.ndarray:
    k = math.sqrt(width * height / n)
    pos = rng.uniform((0.0, 0.0), (width, height), size=(n, 2))
    t0 = max(width, height) / 10.0
    for step in range(iterations):
        t = t0 * (1.0 - step / iterations)
        diff = pos[:, None, :] - pos[None, :, :]
        dist2 = np.einsum("ijk,ijk->ij", diff, diff)
        np.fill_diagonal(dist2, np.inf)
        np.maximum(dist2, 1e-4, out=dist2)
        disp = np.einsum("ijk,ij->ik", diff, k * k / dist2)
        if len(ei):
            d = pos[ei] - pos[ej]
            dd = np.maximum(np.sqrt(np.einsum("ij,ij->i", d, d)), 1e-6)
            # f_a(d) = d^2 / k along the edge, scaled by multiplicity
            pull = d * (dd * ew / k)[:, None]
            for axis in (0, 1):
                disp[:, axis] -= np.bincount(ei, weights=pull[:, axis], minlength=n)
                disp[:, axis] += np.bincount(ej, weights=pull[:, axis], minlength=n)
        norm = np.maximum(np.sqrt(np.einsum("ij,ij->i", disp, disp)), 1e-12)
        move = np.minimum(norm, t)
        pos = pos + disp / norm[:, None] * move[:, None]
        pos[:, 0] = np.clip(pos[:, 0], 0.0, width)
        pos[:, 1] = np.clip(pos[:, 1], 0.0, height)
    return pos


def straight_line_crossings(positions: dict[str, Point],
                            pairs: list[tuple[str, str]]) -> int:
    """Proper crossings between straight segments of distinct vertex pairs."""
    segs = [(positions[a], positions[b], a, b) for a, b in pairs]
    count = 0
    for i in range(len(segs)):
        p1, p2, a1, b1 = segs[i]
        for j in range(i + 1, len(segs)):
            q1, q2, a2, b2 = segs[j]
            if {a1, b1} & {a2, b2}:
                continue
            if _segments_cross(p1, p2, q1, q2):
                count += 1
    return count


def _ccw(a: Point, b: Point, c: Point) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    d1 = _ccw(q1, q2, p1)
    d2 = _ccw(q1, q2, p2)
    d3 = _ccw(p1, p2, q1)
    d4 = _ccw(p1, p2, q2)
    return ((d1 > 0) != (d2 > 0) and (d3 > 0) != (d4 > 0)
            and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0)
