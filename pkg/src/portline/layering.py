"""Layer assignment: minimize the total number of layers the edges span.

Network simplex in the style of Gansner et al.: longest-path initial
ranks, a tight spanning tree, and pivots on tree edges with negative cut
value.  Cut values are recomputed per pivot from subtree net weights,
which keeps every pivot at O(V+E).  If the pivot count ever exceeds
4*|V|*|E| the remaining work is handed to an LP solver (the constraint
matrix is a network matrix, so the relaxation is integral) and a warning
is logged.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

from portline.model import PortGraph
from portline.orient import Orientation

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Layering:
    layer_of: dict[str, int]

    def span(self, arcs: dict[tuple[str, str], int]) -> int:
        return sum(w * (self.layer_of[h] - self.layer_of[t])
                   for (t, h), w in arcs.items())

    def height(self) -> int:
        return max(self.layer_of.values(), default=0) + 1

    def layers(self) -> list[list[str]]:
        out: list[list[str]] = [[] for _ in range(self.height())]
        for v in sorted(self.layer_of):
            out[self.layer_of[v]].append(v)
        return out


def weighted_arcs(graph: PortGraph, orientation: Orientation) -> dict[tuple[str, str], int]:
    arcs: dict[tuple[str, str], int] = {}
    for tail, head in orientation.direction.values():
        arcs[(tail, head)] = arcs.get((tail, head), 0) + 1
    return arcs


def assign_layers(graph: PortGraph, orientation: Orientation) -> Layering:
    nodes = sorted(v.id for v in graph.vertices)
    arcs = weighted_arcs(graph, orientation)
    rank = _network_simplex(nodes, arcs)
    return normalize_layers(Layering(layer_of=rank))


def normalize_layers(layering: Layering) -> Layering:
    """Shift and compact indices: min becomes 0, empty layers vanish."""
    used = sorted(set(layering.layer_of.values()))
    remap = {old: new for new, old in enumerate(used)}
    return Layering(layer_of={v: remap[l] for v, l in layering.layer_of.items()})


def _longest_path_ranks(nodes: list[str], arcs: dict[tuple[str, str], int]) -> dict[str, int]:
    preds: dict[str, list[str]] = {v: [] for v in nodes}
    succs: dict[str, list[str]] = {v: [] for v in nodes}
    indeg = {v: 0 for v in nodes}
    for (t, h) in arcs:
        preds[h].append(t)
        succs[t].append(h)
        indeg[h] += 1
    rank = {v: 0 for v in nodes}
    ready = sorted(v for v in nodes if indeg[v] == 0)
    order: list[str] = []
    while ready:
        v = ready.pop()
        order.append(v)
        for w in succs[v]:
            rank[w] = max(rank[w], rank[v] + 1)
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    if len(order) != len(nodes):
        raise ValueError("orientation is not acyclic")
    return rank


def _network_simplex(nodes: list[str], arcs: dict[tuple[str, str], int]) -> dict[str, int]:
    if len(nodes) <= 1 or not arcs:
        return {v: 0 for v in nodes}
    rank = _longest_path_ranks(nodes, arcs)
    arc_list = sorted(arcs.items())
    tree = _tight_tree(nodes, arc_list, rank)

    cap = 4 * len(nodes) * len(arcs)
    pivots = 0
    while True:
        leave = _negative_cut_edge(nodes, arc_list, tree, rank)
        if leave is None:
            return rank
        pivots += 1
        if pivots > cap:
            log.warning("network simplex hit the pivot cap (%d); solving the LP instead", cap)
            return _lp_ranks(nodes, arcs)
        (lp, lc), subtree = leave
        # Entering arc: minimum slack from the head component to the tail
        # component of the leaving edge.
        arc_into = (lp, lc) in arcs
        best = None
        for (t, h), _w in arc_list:
            t_in = t in subtree
            h_in = h in subtree
            if t_in == h_in:
                continue
            # Head component is the subtree iff the tree arc points into it.
            from_head = t_in if arc_into else not t_in
            if not from_head:
                continue
            slack = rank[h] - rank[t] - 1
            key = (slack, t, h)
            if best is None or key < best:
                best = key
        # A negative cut value implies weight crossing head-to-tail.
        assert best is not None
        d = best[0]
        shift = set(subtree) if arc_into else set(nodes) - set(subtree)
        for v in shift:
            rank[v] += d
        tree.discard(frozenset((lp, lc)))
        tree.add(frozenset((best[1], best[2])))


def _tight_tree(nodes: list[str], arc_list: list[tuple[tuple[str, str], int]],
                rank: dict[str, int]) -> set[frozenset[str]]:
    incident: dict[str, list[tuple[str, str]]] = {v: [] for v in nodes}
    for (t, h), _ in arc_list:
        incident[t].append((t, h))
        incident[h].append((t, h))
    in_tree = {nodes[0]}
    tree: set[frozenset[str]] = set()
    while len(in_tree) < len(nodes):
        grew = True
        while grew:
            grew = False
            for (t, h), _ in arc_list:
                if (t in in_tree) != (h in in_tree) and rank[h] - rank[t] == 1:
                    in_tree.update((t, h))
                    tree.add(frozenset((t, h)))
                    grew = True
        if len(in_tree) == len(nodes):
            break
        best = None
        for (t, h), _ in arc_list:
            if (t in in_tree) == (h in in_tree):
                continue
            slack = rank[h] - rank[t] - 1
            key = (slack, t, h)
            if best is None or key < best:
                best = key
        assert best is not None, "contracted graph must be connected"
        slack, t, h = best
        delta = slack if t in in_tree else -slack
        for v in in_tree:
            rank[v] += delta
    return tree


def _negative_cut_edge(nodes: list[str], arc_list: list[tuple[tuple[str, str], int]],
                       tree: set[frozenset[str]], rank: dict[str, int]):
    """Most negative cut value; returns ((parent, child), subtree nodes) or None.

    For the tree edge to child c with subtree S, the entering-minus-leaving
    weight of S is the subtree sum of per-node net weights, and the cut
    value is that sum signed by the tree arc's direction.
    """
    children: dict[str, list[str]] = {v: [] for v in nodes}
    parent: dict[str, str] = {}
    adj: dict[str, list[str]] = {v: [] for v in nodes}
    for e in tree:
        a, b = sorted(e)
        adj[a].append(b)
        adj[b].append(a)
    root = nodes[0]
    order = [root]
    seen = {root}
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for w in sorted(adj[v]):
            if w not in seen:
                seen.add(w)
                parent[w] = v
                children[v].append(w)
                order.append(w)

    net = {v: 0 for v in nodes}
    arc_set = {pair for pair, _ in arc_list}
    for (t, h), w in arc_list:
        net[h] += w
        net[t] -= w
    subtree_net = dict(net)
    members: dict[str, set[str]] = {v: {v} for v in nodes}
    for v in reversed(order):
        if v in parent:
            subtree_net[parent[v]] += subtree_net[v]
            members[parent[v]] |= members[v]

    best = None
    for v in order[1:]:
        p = parent[v]
        arc_into = (p, v) in arc_set
        cut = subtree_net[v] if arc_into else -subtree_net[v]
        key = (cut, p, v)
        if cut < 0 and (best is None or key < best):
            best = key
    if best is None:
        return None
    _, p, c = best
    return (p, c), members[c]


def _lp_ranks(nodes: list[str], arcs: dict[tuple[str, str], int]) -> dict[str, int]:
    from scipy.optimize import linprog
    from scipy.sparse import lil_matrix

    index = {v: i for i, v in enumerate(nodes)}
    c = [0.0] * len(nodes)
    for (t, h), w in arcs.items():
        c[index[h]] += w
        c[index[t]] -= w
    a = lil_matrix((len(arcs), len(nodes)))
    for row, (t, h) in enumerate(sorted(arcs)):
        a[row, index[t]] = 1.0
        a[row, index[h]] = -1.0
    res = linprog(c, A_ub=a.tocsr(), b_ub=[-1.0] * len(arcs),
                  bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"layering LP failed: {res.message}")
    return {v: round(res.x[index[v]]) for v in nodes}
