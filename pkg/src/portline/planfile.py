"""Plan files: a JSON document describing a cable plan before normalization.

Top-level keys: vertices, vertexGroups, ports, portGroups, portPairings,
edges.  Every element carries a string id, unique across the whole file.
Raw plans are more permissive than the layout model: edges may join two or
more ports (hyperedges), a port may carry any number of edges, and port
pairings may join two vertices of a vertex group.  ``normalize`` rewrites
all of that into a plain :class:`~portline.model.PortGraph`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from portline.model import Edge, Port, PortGraph, PortGroup, PortPairing, Side, Vertex, validate


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class RawVertex:
    id: str
    label: str = ""
    min_width: float = 24.0
    min_height: float = 16.0


@dataclass(frozen=True)
class RawVertexGroup:
    id: str
    vertices: tuple[str, ...] = ()


@dataclass(frozen=True)
class RawPort:
    id: str
    vertex: str
    label: str = ""


@dataclass(frozen=True)
class RawPortGroup:
    id: str
    vertex: str = ""
    side: str = "Free"
    fixed: bool = False
    children: tuple[str, ...] = ()


@dataclass(frozen=True)
class RawPairing:
    id: str
    ports: tuple[str, str]


@dataclass(frozen=True)
class RawEdge:
    id: str
    ports: tuple[str, ...]


@dataclass(frozen=True)
class RawPlan:
    vertices: tuple[RawVertex, ...] = ()
    vertex_groups: tuple[RawVertexGroup, ...] = ()
    ports: tuple[RawPort, ...] = ()
    port_groups: tuple[RawPortGroup, ...] = ()
    port_pairings: tuple[RawPairing, ...] = ()
    edges: tuple[RawEdge, ...] = ()


@dataclass
class NormalizeResult:
    graph: PortGraph
    # split group id -> original port id, for collapsing at display time
    split_groups: dict[str, str] = field(default_factory=dict)
    split_members: dict[str, tuple[str, ...]] = field(default_factory=dict)
    merged_vertices: dict[str, str] = field(default_factory=dict)
    join_vertices: dict[str, str] = field(default_factory=dict)
    dropped_edges: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()


def _req(obj: dict, key: str, eid: str) -> object:
    if key not in obj:
        raise PlanError(f"element {eid!r}: missing field {key!r}")
    return obj[key]


def parse_plan(data: bytes | str) -> RawPlan:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise PlanError(f"not valid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise PlanError("plan document must be a JSON object")

    def items(key: str) -> list[dict]:
        raw = doc.get(key, [])
        if not isinstance(raw, list):
            raise PlanError(f"top-level {key!r} must be a list")
        for i, el in enumerate(raw):
            if not isinstance(el, dict) or not isinstance(el.get("id"), str):
                raise PlanError(f"{key}[{i}] must be an object with a string id")
        return raw

    vertices = tuple(
        RawVertex(id=el["id"], label=str(el.get("label", "")),
                  min_width=float(el.get("minWidth", 24.0)),
                  min_height=float(el.get("minHeight", 16.0)))
        for el in items("vertices")
    )
    vertex_groups = tuple(
        RawVertexGroup(id=el["id"], vertices=tuple(_req(el, "vertices", el["id"])))
        for el in items("vertexGroups")
    )
    ports = tuple(
        RawPort(id=el["id"], vertex=str(_req(el, "vertex", el["id"])), label=str(el.get("label", "")))
        for el in items("ports")
    )
    port_groups = tuple(
        RawPortGroup(id=el["id"], vertex=str(el.get("vertex", "")),
                     side=str(el.get("side", "Free")), fixed=bool(el.get("fixed", False)),
                     children=tuple(el.get("children", ())))
        for el in items("portGroups")
    )
    pairings = []
    for el in items("portPairings"):
        pp = tuple(_req(el, "ports", el["id"]))
        if len(pp) != 2:
            raise PlanError(f"pairing {el['id']!r} must join exactly two ports")
        pairings.append(RawPairing(id=el["id"], ports=(pp[0], pp[1])))
    edges = []
    for el in items("edges"):
        pp = tuple(_req(el, "ports", el["id"]))
        if len(pp) < 2:
            raise PlanError(f"edge {el['id']!r} must join at least two ports")
        edges.append(RawEdge(id=el["id"], ports=pp))
    plan = RawPlan(vertices=vertices, vertex_groups=vertex_groups, ports=ports,
                   port_groups=port_groups, port_pairings=tuple(pairings), edges=tuple(edges))
    _check_references(plan)
    return plan


def serialize_plan(plan: RawPlan) -> str:
    doc = {
        "vertices": [
            {"id": v.id, "label": v.label, "minWidth": v.min_width, "minHeight": v.min_height}
            for v in plan.vertices
        ],
        "vertexGroups": [
            {"id": g.id, "vertices": list(g.vertices)} for g in plan.vertex_groups
        ],
        "ports": [
            {"id": p.id, "vertex": p.vertex, "label": p.label} for p in plan.ports
        ],
        "portGroups": [
            {"id": g.id, "vertex": g.vertex, "side": g.side, "fixed": g.fixed,
             "children": list(g.children)}
            for g in plan.port_groups
        ],
        "portPairings": [
            {"id": pr.id, "ports": list(pr.ports)} for pr in plan.port_pairings
        ],
        "edges": [
            {"id": e.id, "ports": list(e.ports)} for e in plan.edges
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _check_references(plan: RawPlan) -> None:
    ids: set[str] = set()
    for group in (plan.vertices, plan.vertex_groups, plan.ports, plan.port_groups,
                  plan.port_pairings, plan.edges):
        for el in group:
            if el.id in ids:
                raise PlanError(f"duplicate id {el.id!r}")
            ids.add(el.id)
    vset = {v.id for v in plan.vertices}
    pset = {p.id for p in plan.ports}
    gset = {g.id for g in plan.port_groups}
    for vg in plan.vertex_groups:
        for v in vg.vertices:
            if v not in vset:
                raise PlanError(f"vertex group {vg.id!r}: unknown vertex {v!r}")
    for p in plan.ports:
        if p.vertex not in vset:
            raise PlanError(f"port {p.id!r}: unknown vertex {p.vertex!r}")
    claimed: dict[str, str] = {}
    for g in plan.port_groups:
        if g.vertex and g.vertex not in vset:
            raise PlanError(f"port group {g.id!r}: unknown vertex {g.vertex!r}")
        for c in g.children:
            if c not in pset and c not in gset:
                raise PlanError(f"port group {g.id!r}: unknown child {c!r}")
            if c in claimed:
                raise PlanError(f"element {c!r} is a child of both {claimed[c]!r} and {g.id!r}")
            claimed[c] = g.id
    member_of: dict[str, str] = {}
    for vg in plan.vertex_groups:
        for v in vg.vertices:
            if v in member_of:
                raise PlanError(f"vertex {v!r} is in vertex groups {member_of[v]!r} and {vg.id!r}")
            member_of[v] = vg.id
    for pr in plan.port_pairings:
        for p in pr.ports:
            if p not in pset:
                raise PlanError(f"pairing {pr.id!r}: unknown port {p!r}")
    for e in plan.edges:
        for p in e.ports:
            if p not in pset:
                raise PlanError(f"edge {e.id!r}: unknown port {p!r}")


def _fresh(base: str, taken: set[str]) -> str:
    name = base
    n = 2
    while name in taken:
        name = f"{base}_{n}"
        n += 1
    taken.add(name)
    return name


def group_vertex_of(plan: RawPlan, vid: str) -> str | None:
    for vg in plan.vertex_groups:
        if vid in vg.vertices:
            return vg.id
    return None


def normalize(plan: RawPlan) -> NormalizeResult:
    """Rewrite a raw plan into a PortGraph the pipeline can draw.

    Vertex groups become single vertices with one port group per member;
    hyperedges become a junction vertex with one leg per endpoint; ports
    with several edges are split into singleton siblings inside a fresh
    free group.  Same-vertex edges are dropped with a warning.
    """
    taken = {el.id for coll in (plan.vertices, plan.vertex_groups, plan.ports,
                                plan.port_groups, plan.port_pairings, plan.edges)
             for el in coll}
    warnings: list[str] = []
    result = NormalizeResult(graph=PortGraph((), (), (), (), ()))

    # Mutable working state.
    vertices: dict[str, Vertex] = {}
    ports: dict[str, Port] = {}
    groups: dict[str, PortGroup] = {}
    top_children: dict[str, list[str]] = {}

    top_level_groups: dict[str, list[str]] = {}
    nested = {c for g in plan.port_groups for c in g.children}
    for g in plan.port_groups:
        if g.id in nested:
            continue
        if not g.vertex:
            raise PlanError(f"top-level port group {g.id!r} names no vertex")
        top_level_groups.setdefault(g.vertex, []).append(g.id)

    grouped_ports = {c for g in plan.port_groups for c in g.children}
    loose_ports: dict[str, list[str]] = {}
    for p in plan.ports:
        if p.id not in grouped_ports:
            loose_ports.setdefault(p.vertex, []).append(p.id)

    for g in plan.port_groups:
        groups[g.id] = PortGroup(id=g.id, side=Side.from_name(g.side), fixed=g.fixed,
                                 children=g.children)
    for p in plan.ports:
        ports[p.id] = Port(id=p.id, vertex=p.vertex, label=p.label)

    merged: dict[str, str] = {}
    for vg in plan.vertex_groups:
        members = [v for v in plan.vertices if v.id in set(vg.vertices)]
        width = max((m.min_width for m in members), default=24.0)
        height = max((m.min_height for m in members), default=16.0)
        children: list[str] = []
        for m in members:
            member_group = _fresh(f"{m.id}__in__{vg.id}", taken)
            forest = list(top_level_groups.get(m.id, [])) + list(loose_ports.get(m.id, []))
            groups[member_group] = PortGroup(id=member_group, side=Side.FREE, fixed=False,
                                             children=tuple(forest))
            children.append(member_group)
            merged[m.id] = vg.id
        label = "+".join(m.label or m.id for m in members)
        vertices[vg.id] = Vertex(id=vg.id, label=label, min_width=width,
                                 min_height=height, children=tuple(children))
        top_children[vg.id] = children
    for v in plan.vertices:
        if v.id in merged:
            continue
        forest = list(top_level_groups.get(v.id, [])) + list(loose_ports.get(v.id, []))
        vertices[v.id] = Vertex(id=v.id, label=v.label or v.id, min_width=v.min_width,
                                min_height=v.min_height, children=tuple(forest))
        top_children[v.id] = forest

    def owner(port_id: str) -> str:
        v = ports[port_id].vertex
        return merged.get(v, v)

    for pid, port in list(ports.items()):
        ports[pid] = replace(port, vertex=owner(pid))

    # Hyperedges: junction vertex with one leg per endpoint incidence.
    incidences: dict[str, list[str]] = {}
    plain_edges: list[Edge] = []
    joins: dict[str, str] = {}
    for e in plan.edges:
        if len(e.ports) == 2:
            plain_edges.append(Edge(id=e.id, a=e.ports[0], b=e.ports[1]))
            continue
        join_vertex = _fresh(f"{e.id}__join", taken)
        joins[join_vertex] = e.id
        leg_ports: list[str] = []
        for i, end in enumerate(e.ports):
            jp = _fresh(f"{e.id}__join_p{i}", taken)
            ports[jp] = Port(id=jp, vertex=join_vertex)
            leg_ports.append(jp)
            plain_edges.append(Edge(id=_fresh(f"{e.id}__leg{i}", taken), a=jp, b=end))
        vertices[join_vertex] = Vertex(id=join_vertex, label="", min_width=8.0,
                                       min_height=8.0, children=tuple(leg_ports))
        top_children[join_vertex] = leg_ports

    dropped: list[str] = []
    kept_edges: list[Edge] = []
    for e in plain_edges:
        if ports[e.a].vertex == ports[e.b].vertex:
            dropped.append(e.id)
            warnings.append(f"dropped edge {e.id}: both ends on vertex {ports[e.a].vertex}")
            continue
        kept_edges.append(e)
        incidences.setdefault(e.a, []).append(e.id)
        incidences.setdefault(e.b, []).append(e.id)

    # Split ports that carry more than one edge.  The original port keeps
    # its id (and any pairing) and takes the first edge.
    split_groups: dict[str, str] = {}
    split_members: dict[str, tuple[str, ...]] = {}
    edge_rebind: dict[tuple[str, str], str] = {}
    for pid in sorted(incidences):
        eids = sorted(incidences[pid])
        if len(eids) <= 1:
            continue
        gid = _fresh(f"{pid}__split", taken)
        members = [pid]
        for eid in eids[1:]:
            sp = _fresh(f"{pid}__s{len(members)}", taken)
            ports[sp] = Port(id=sp, vertex=ports[pid].vertex)
            members.append(sp)
            edge_rebind[(eid, pid)] = sp
        groups[gid] = PortGroup(id=gid, side=Side.FREE, fixed=False, children=tuple(members))
        split_groups[gid] = pid
        split_members[gid] = tuple(members)
        # Replace the port by the group wherever it hangs.
        replaced = False
        for vid, children in top_children.items():
            if pid in children:
                children[children.index(pid)] = gid
                vertices[vid] = replace(vertices[vid], children=tuple(children))
                replaced = True
                break
        if not replaced:
            for gid2, g2 in groups.items():
                if pid in g2.children and gid2 != gid:
                    cs = list(g2.children)
                    cs[cs.index(pid)] = gid
                    groups[gid2] = replace(g2, children=tuple(cs))
                    break

    final_edges = []
    for e in kept_edges:
        a = edge_rebind.get((e.id, e.a), e.a)
        b = edge_rebind.get((e.id, e.b), e.b)
        final_edges.append(Edge(id=e.id, a=a, b=b))

    pairings = []
    for pr in plan.port_pairings:
        a, b = pr.ports
        if ports[a].vertex != ports[b].vertex:
            warnings.append(f"dropped pairing {pr.id}: ports on different vertices")
            continue
        pairings.append(PortPairing(a=a, b=b))

    graph = PortGraph(
        vertices=tuple(vertices[k] for k in sorted(vertices)),
        ports=tuple(ports[k] for k in sorted(ports)),
        groups=tuple(groups[k] for k in sorted(groups)),
        pairings=tuple(pairings),
        edges=tuple(sorted(final_edges, key=lambda e: e.id)),
    )
    result.graph = graph
    result.split_groups = split_groups
    result.split_members = split_members
    result.merged_vertices = merged
    result.join_vertices = joins
    result.dropped_edges = tuple(dropped)
    result.warnings = tuple(warnings)
    return result


def normalized_graph(plan: RawPlan) -> PortGraph:
    res = normalize(plan)
    bad = validate(res.graph)
    if bad:
        raise PlanError("normalization produced an invalid graph: " + "; ".join(map(str, bad[:3])))
    return res.graph


def denormalize_for_display(drawing, result: NormalizeResult):
    """Collapse split-port siblings back into one drawn port.

    Keeps one port rectangle per original port and re-draws the ends of the
    sibling edges so they dock onto the kept rectangle's flanks at staggered
    heights; the re-drawn approaches stay orthogonal and overlap-free.
    """
    from portline.drawing import DrawnEdge, Drawing, simplify

    out = Drawing(vertices=list(drawing.vertices), ports=list(drawing.ports),
                  edges=list(drawing.edges), pairings=list(drawing.pairings))
    ports = {p.id: p for p in out.ports}
    edge_by_id = {e.id: e for e in out.edges}
    incident: dict[str, list[str]] = {}
    graph = result.graph
    for e in graph.edges:
        incident.setdefault(e.a, []).append(e.id)
        incident.setdefault(e.b, []).append(e.id)

    drop_ports: set[str] = set()
    for gid, original in sorted(result.split_groups.items()):
        members = result.split_members[gid]
        keep = original
        kept_rect = ports[keep].rect
        side = ports[keep].side
        upward = side is Side.TOP
        step = 0.5
        k = 0
        for member in members:
            if member == keep:
                continue
            drop_ports.add(member)
            eids = incident.get(member, [])
            if not eids:
                continue
            edge = edge_by_id[eids[0]]
            pts = list(edge.points)
            # The endpoint at the member port is either first or last.
            member_rect = ports[member].rect
            mx = (member_rect.x0 + member_rect.x1) / 2
            at_start = abs(pts[0][0] - mx) < abs(pts[-1][0] - mx)
            if not at_start:
                pts.reverse()
            k += 1
            y_dock = (kept_rect.y0 + step * k) if upward else (kept_rect.y1 - step * k)
            dock_x = kept_rect.x1 if mx > kept_rect.x1 else kept_rect.x0
            pts[0] = (pts[0][0], y_dock)
            pts.insert(0, (dock_x, y_dock))
            if not at_start:
                pts.reverse()
            edge_by_id[edge.id] = DrawnEdge(id=edge.id, points=simplify(tuple(pts)))
    out.ports = [p for p in out.ports if p.id not in drop_ports]
    out.edges = [edge_by_id[e.id] for e in out.edges]
    return out
