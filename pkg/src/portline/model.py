"""Core data model: port graphs with grouped, pairable ports.

A plan is modelled as a 5-tuple (vertices, ports, port groups, port
pairings, edges).  Ports belong to exactly one vertex, directly or through
a nesting forest of port groups; each port carries at most one edge and at
most one pairing.  Edges connect ports of two different vertices.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property


class Side(enum.Enum):
    TOP = "Top"
    BOTTOM = "Bottom"
    LEFT = "Left"
    RIGHT = "Right"
    FREE = "Free"

    @classmethod
    def from_name(cls, name: str) -> "Side":
        for side in cls:
            if side.value == name:
                return side
        raise ValueError(f"unknown side {name!r}")


@dataclass(frozen=True)
class Vertex:
    id: str
    label: str = ""
    min_width: float = 12.0
    min_height: float = 12.0
    # Ordered top-level port forest: ids of ports and port groups.
    children: tuple[str, ...] = ()


@dataclass(frozen=True)
class Port:
    id: str
    vertex: str
    label: str = ""


@dataclass(frozen=True)
class PortGroup:
    id: str
    side: Side = Side.FREE
    # fixed=True pins the declared child order; otherwise it may be permuted.
    fixed: bool = False
    children: tuple[str, ...] = ()


@dataclass(frozen=True)
class PortPairing:
    a: str
    b: str

    def key(self) -> tuple[str, str]:
        return (self.a, self.b) if self.a <= self.b else (self.b, self.a)


@dataclass(frozen=True)
class Edge:
    id: str
    a: str
    b: str


@dataclass(frozen=True)
class Violation:
    rule: str
    elements: tuple[str, ...]
    detail: str = ""

    def __str__(self) -> str:
        where = ", ".join(self.elements)
        return f"{self.rule}: {where}" + (f" ({self.detail})" if self.detail else "")


@dataclass(frozen=True)
class ContractedGraph:
    """Simple undirected graph over vertex ids with edge multiplicities."""

    nodes: tuple[str, ...]
    adjacency: dict[str, tuple[str, ...]]
    multiplicity: dict[tuple[str, str], int]

    def degree(self, v: str) -> int:
        return len(self.adjacency.get(v, ()))


@dataclass(frozen=True)
class PortGraph:
    vertices: tuple[Vertex, ...]
    ports: tuple[Port, ...]
    groups: tuple[PortGroup, ...]
    pairings: tuple[PortPairing, ...]
    edges: tuple[Edge, ...]

    @cached_property
    def vertex_by_id(self) -> dict[str, Vertex]:
        return {v.id: v for v in self.vertices}

    @cached_property
    def port_by_id(self) -> dict[str, Port]:
        return {p.id: p for p in self.ports}

    @cached_property
    def group_by_id(self) -> dict[str, PortGroup]:
        return {g.id: g for g in self.groups}

    @cached_property
    def edge_by_id(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def edge_of_port(self) -> dict[str, Edge]:
        out: dict[str, Edge] = {}
        for e in self.edges:
            out[e.a] = e
            out[e.b] = e
        return out

    @cached_property
    def pairing_of_port(self) -> dict[str, PortPairing]:
        out: dict[str, PortPairing] = {}
        for pr in self.pairings:
            out[pr.a] = pr
            out[pr.b] = pr
        return out

    @cached_property
    def parent_of(self) -> dict[str, str]:
        """Maps each port/group id to its parent group or vertex id."""
        out: dict[str, str] = {}
        for v in self.vertices:
            for c in v.children:
                out[c] = v.id
        for g in self.groups:
            for c in g.children:
                out[c] = g.id
        return out

    @cached_property
    def vertex_of_group(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for g in sorted(self.groups, key=lambda g: g.id):
            cur: str | None = g.id
            seen = set()
            while cur is not None and cur not in self.vertex_by_id:
                if cur in seen:
                    cur = None
                    break
                seen.add(cur)
                cur = self.parent_of.get(cur)
            if cur is not None:
                out[g.id] = cur
        return out

    def ports_of_vertex(self, vertex_id: str) -> list[Port]:
        return [p for p in self.ports if p.vertex == vertex_id]

    def group_ports(self, group_id: str) -> list[str]:
        """All port ids in the subtree of a group, in forest order."""
        out: list[str] = []
        stack = [group_id]
        while stack:
            cur = stack.pop()
            g = self.group_by_id.get(cur)
            if g is None:
                out.append(cur)
                continue
            stack.extend(reversed(g.children))
        return out


def contracted_graph(graph: PortGraph) -> ContractedGraph:
    """Collapse ports: one node per vertex, parallel edges merged with counts."""
    mult: dict[tuple[str, str], int] = {}
    ports = graph.port_by_id
    for e in graph.edges:
        va = ports[e.a].vertex
        vb = ports[e.b].vertex
        if va == vb:
            continue
        key = (va, vb) if va <= vb else (vb, va)
        mult[key] = mult.get(key, 0) + 1
    adj: dict[str, list[str]] = {v.id: [] for v in graph.vertices}
    for (va, vb) in mult:
        adj[va].append(vb)
        adj[vb].append(va)
    adjacency = {v: tuple(sorted(ns)) for v, ns in adj.items()}
    nodes = tuple(sorted(adj))
    return ContractedGraph(nodes=nodes, adjacency=adjacency, multiplicity=mult)


def _check_forest(graph: PortGraph, out: list[Violation]) -> None:
    parents: dict[str, list[str]] = {}
    for v in graph.vertices:
        for c in v.children:
            parents.setdefault(c, []).append(v.id)
    for g in graph.groups:
        for c in g.children:
            parents.setdefault(c, []).append(g.id)
    for child, owners in sorted(parents.items()):
        if len(owners) > 1:
            out.append(Violation("forest", (child,), f"referenced by {len(owners)} parents"))
        if child not in graph.port_by_id and child not in graph.group_by_id:
            out.append(Violation("forest", (child,), "unknown child reference"))
    for g in graph.groups:
        if g.id not in parents:
            out.append(Violation("forest", (g.id,), "group attached to no vertex"))
    # Cycles: walk up from each group; a cycle never reaches a vertex.
    for g in graph.groups:
        if g.id not in graph.vertex_of_group and g.id in parents:
            out.append(Violation("forest", (g.id,), "group nesting cycle"))
    for p in graph.ports:
        owner = graph.parent_of.get(p.id)
        if owner is None:
            out.append(Violation("forest", (p.id,), "port attached to nothing"))
            continue
        if owner in graph.vertex_by_id:
            root_vertex = owner
        else:
            root_vertex = graph.vertex_of_group.get(owner, "")
        if root_vertex != p.vertex:
            out.append(Violation("forest", (p.id,), "port nested under a different vertex"))


def validate(graph: PortGraph) -> list[Violation]:
    """Structural validation; an empty result means a well-formed instance."""
    out: list[Violation] = []
    seen: set[str] = set()
    for kind, items in (
        ("vertex", graph.vertices),
        ("port", graph.ports),
        ("group", graph.groups),
        ("edge", graph.edges),
    ):
        for item in items:
            if item.id in seen:
                out.append(Violation("identity", (item.id,), f"duplicate id ({kind})"))
            seen.add(item.id)
    for v in graph.vertices:
        if v.min_width <= 0 or v.min_height <= 0:
            out.append(Violation("size", (v.id,), "minimum size must be positive"))
    for p in graph.ports:
        if p.vertex not in graph.vertex_by_id:
            out.append(Violation("reference", (p.id,), "unknown vertex"))
    _check_forest(graph, out)

    port_edges: dict[str, int] = {}
    for e in graph.edges:
        for end in (e.a, e.b):
            if end not in graph.port_by_id:
                out.append(Violation("reference", (e.id,), f"unknown port {end}"))
        port_edges[e.a] = port_edges.get(e.a, 0) + 1
        port_edges[e.b] = port_edges.get(e.b, 0) + 1
        if e.a == e.b:
            out.append(Violation("edge", (e.id,), "edge joins a port to itself"))
            continue
        pa, pb = graph.port_by_id.get(e.a), graph.port_by_id.get(e.b)
        if pa is not None and pb is not None and pa.vertex == pb.vertex:
            out.append(Violation("edge", (e.id,), "edge joins ports of one vertex"))
    for pid, n in sorted(port_edges.items()):
        if n > 1:
            out.append(Violation("edge", (pid,), f"port carries {n} edges"))

    port_pairs: dict[str, int] = {}
    for pr in graph.pairings:
        if pr.a == pr.b:
            out.append(Violation("pairing", (pr.a,), "port paired with itself"))
            continue
        for end in (pr.a, pr.b):
            port_pairs[end] = port_pairs.get(end, 0) + 1
            if end not in graph.port_by_id:
                out.append(Violation("reference", (end,), "pairing references unknown port"))
        pa, pb = graph.port_by_id.get(pr.a), graph.port_by_id.get(pr.b)
        if pa is not None and pb is not None and pa.vertex != pb.vertex:
            out.append(Violation("pairing", (pr.a, pr.b), "paired ports on different vertices"))
    for pid, n in sorted(port_pairs.items()):
        if n > 1:
            out.append(Violation("pairing", (pid,), f"port in {n} pairings"))

    if graph.vertices:
        cg = contracted_graph(graph)
        seen_v = {cg.nodes[0]}
        queue = [cg.nodes[0]]
        while queue:
            cur = queue.pop()
            for nb in cg.adjacency[cur]:
                if nb not in seen_v:
                    seen_v.add(nb)
                    queue.append(nb)
        if len(seen_v) != len(cg.nodes):
            missing = sorted(set(cg.nodes) - seen_v)
            out.append(Violation("connectivity", tuple(missing[:4]),
                                 f"{len(missing)} vertices unreachable"))
    return out
