"""Port sides, turning dummies, and the layered structure.

Every port ends up on the top or bottom side of its vertex.  Edges whose
port sits on the "wrong" side for their direction are routed over a
turning dummy on an extra layer next to the vertex; afterwards long edges
are subdivided so that every segment connects neighboring rows.

Rows are kept bottom to top.  Each row carries a tag: ("orig", i) for
original layer i, ("above", i) for the extra row hosting the caps of
layer i, ("below", i) for the extra row hosting the cups of layer i.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from portline.layering import Layering
from portline.model import Port, PortGraph, PortGroup, PortPairing, Side, Vertex
from portline.orient import Orientation


@dataclass
class SideAssignment:
    side_of: dict[str, Side]
    notes: list[str] = field(default_factory=list)


@dataclass
class StructNode:
    id: str
    kind: str  # "real" | "long" | "turn"
    vertex: str | None = None  # real: graph vertex; turn: host vertex
    edge: str | None = None  # long dummies: the edge they subdivide
    top: list[str] = field(default_factory=list)
    bottom: list[str] = field(default_factory=list)

    def ports(self) -> list[str]:
        return self.top + self.bottom


@dataclass(frozen=True)
class Link:
    """One edge piece, from the top side of a lower node up to the next."""

    edge: str
    lower: str  # port id
    upper: str  # port id


@dataclass
class LayeredStructure:
    graph: PortGraph
    rows: list[list[str]]
    tags: list[tuple[str, int]]
    nodes: dict[str, StructNode]
    node_of_port: dict[str, str]
    links: list[Link]
    side_of: dict[str, Side]
    notes: list[str] = field(default_factory=list)

    def row_of(self) -> dict[str, int]:
        return {n: r for r, row in enumerate(self.rows) for n in row}

    def links_per_gap(self) -> list[list[Link]]:
        """Links grouped by the gap between row r and r+1 (index r)."""
        row_of = self.row_of()
        gaps: list[list[Link]] = [[] for _ in range(max(1, len(self.rows) - 1))]
        for link in self.links:
            r = row_of[self.node_of_port[link.lower]]
            gaps[r].append(link)
        return gaps

    def fresh(self, base: str) -> str:
        taken = self._taken
        name = base
        n = 2
        while name in taken:
            name = f"{base}_{n}"
            n += 1
        taken.add(name)
        return name

    @property
    def _taken(self) -> set[str]:
        if not hasattr(self, "_taken_cache"):
            ids = {v.id for v in self.graph.vertices}
            ids |= {p.id for p in self.graph.ports}
            ids |= {g.id for g in self.graph.groups}
            ids |= {e.id for e in self.graph.edges}
            ids |= set(self.nodes)
            ids |= set(self.node_of_port)
            self._taken_cache = ids
        return self._taken_cache


def edge_tail_head(graph: PortGraph, orientation: Orientation, edge_id: str) -> tuple[str, str]:
    """Returns (tail port, head port) of an edge under the orientation."""
    e = graph.edge_by_id[edge_id]
    tail_vertex, _ = orientation.direction[edge_id]
    if graph.port_by_id[e.a].vertex == tail_vertex:
        return e.a, e.b
    return e.b, e.a


def is_outgoing(graph: PortGraph, orientation: Orientation, port_id: str) -> bool | None:
    """True/False for ports with an edge, None for edge-less ports."""
    e = graph.edge_of_port.get(port_id)
    if e is None:
        return None
    tail, _ = orientation.direction[e.id]
    return graph.port_by_id[port_id].vertex == tail


def assign_port_sides(graph: PortGraph, orientation: Orientation,
                      pinned: dict[str, Side] | None = None) -> SideAssignment:
    """Top/Bottom for every port.

    Order: explicitly sided groups (id order, first assignment wins, later
    contradictions are repaired and logged), then pairings, then loose
    ports by edge direction, then a majority decision per remaining
    top-level Free group.  Left/Right groups must have been transformed
    away beforehand; any survivors are treated as Free and logged.
    ``pinned`` entries (from the Left/Right transform) take precedence.
    """
    side: dict[str, Side] = dict(pinned or {})
    notes: list[str] = []

    for g in sorted(graph.groups, key=lambda g: g.id):
        if g.side in (Side.FREE,):
            continue
        if g.side in (Side.LEFT, Side.RIGHT):
            notes.append(f"group {g.id}: side {g.side.value} not transformed, treating as Free")
            continue
        subtree = graph.group_ports(g.id)
        existing = {side[p] for p in subtree if p in side}
        if not existing:
            target = g.side
        elif existing == {g.side}:
            target = g.side
        elif len(existing) == 1:
            target = next(iter(existing))
            notes.append(f"group {g.id}: side changed to {target.value} to stay consistent")
        else:
            notes.append(f"group {g.id}: subtree already forces both sides, constraint dropped")
            continue
        for p in subtree:
            side.setdefault(p, target)

    for pr in graph.pairings:
        a, b = pr.a, pr.b
        if a in side and b in side:
            if side[a] == side[b]:
                flip = max(a, b)
                side[flip] = Side.BOTTOM if side[flip] is Side.TOP else Side.TOP
                notes.append(f"pairing {a}/{b}: both were {side[min(a, b)].value}, flipped {flip}")
        elif a in side:
            side[b] = Side.BOTTOM if side[a] is Side.TOP else Side.TOP
        elif b in side:
            side[a] = Side.BOTTOM if side[b] is Side.TOP else Side.TOP
        else:
            def pref(p: str) -> Side:
                return Side.TOP if is_outgoing(graph, orientation, p) else Side.BOTTOM
            if pref(a) != pref(b):
                side[a], side[b] = pref(a), pref(b)
            else:
                keeper = min(a, b)
                other = max(a, b)
                side[keeper] = pref(keeper)
                side[other] = Side.BOTTOM if side[keeper] is Side.TOP else Side.TOP

    grouped = {p for g in graph.groups for p in g.children if p in graph.port_by_id}
    for p in sorted(graph.port_by_id):
        if p in side or p in grouped:
            continue
        if graph.parent_of.get(p) in graph.group_by_id:
            continue
        side[p] = Side.TOP if is_outgoing(graph, orientation, p) else Side.BOTTOM

    for v in graph.vertices:
        for child in v.children:
            if child not in graph.group_by_id:
                continue
            subtree = graph.group_ports(child)
            if all(p in side for p in subtree):
                continue
            out_edges = sum(1 for p in subtree if is_outgoing(graph, orientation, p))
            in_edges = sum(1 for p in subtree if is_outgoing(graph, orientation, p) is False)
            target = Side.TOP if out_edges > in_edges else Side.BOTTOM
            if out_edges == in_edges:
                notes.append(f"group {child}: direction tie, defaulting to Bottom")
            for p in subtree:
                side.setdefault(p, target)

    for p in graph.port_by_id:
        side.setdefault(p, Side.BOTTOM)
    return SideAssignment(side_of=side, notes=notes)


def slab_orders(graph: PortGraph, vertex: Vertex,
                side_of: dict[str, Side]) -> tuple[list[str], list[str]]:
    """Initial top and bottom port orders from one forest traversal.

    Reading both sides off the same left-to-right walk keeps every group's
    ports contiguous on each side, with matching relative group order.
    """
    order: list[str] = []
    stack = list(reversed(vertex.children))
    while stack:
        cur = stack.pop()
        g = graph.group_by_id.get(cur)
        if g is None:
            order.append(cur)
        else:
            stack.extend(reversed(g.children))
    top = [p for p in order if side_of[p] is Side.TOP]
    bottom = [p for p in order if side_of[p] is Side.BOTTOM]
    return top, bottom


def initial_structure(graph: PortGraph, orientation: Orientation, layering: Layering,
                      sides: SideAssignment) -> LayeredStructure:
    height = layering.height()
    rows: list[list[str]] = [[] for _ in range(height)]
    tags: list[tuple[str, int]] = [("orig", i) for i in range(height)]
    nodes: dict[str, StructNode] = {}
    node_of_port: dict[str, str] = {}
    for v in sorted(graph.vertices, key=lambda v: v.id):
        top, bottom = slab_orders(graph, v, sides.side_of)
        node = StructNode(id=v.id, kind="real", vertex=v.id, top=top, bottom=bottom)
        nodes[v.id] = node
        rows[layering.layer_of[v.id]].append(v.id)
        for p in top + bottom:
            node_of_port[p] = v.id
    links = []
    for e in sorted(graph.edges, key=lambda e: e.id):
        tail, head = edge_tail_head(graph, orientation, e.id)
        links.append(Link(edge=e.id, lower=tail, upper=head))
    return LayeredStructure(graph=graph, rows=rows, tags=tags, nodes=nodes,
                            node_of_port=node_of_port, links=links,
                            side_of=dict(sides.side_of), notes=list(sides.notes))


def insert_turning_dummies(st: LayeredStructure) -> LayeredStructure:
    """One turning dummy per (vertex, direction) that has wrong-side ports.

    A top port with an incoming edge gets a cap: the edge rises past the
    vertex to the dummy on the extra row above and comes back down into
    the port.  A bottom port with an outgoing edge mirrors this below.
    """
    layer_of = {n: i for i, row in enumerate(st.rows) for n in row}
    caps: dict[str, list[Link]] = {}
    cups: dict[str, list[Link]] = {}
    for link in st.links:
        head_node = st.node_of_port[link.upper]
        tail_node = st.node_of_port[link.lower]
        if link.upper in st.nodes[head_node].top:
            caps.setdefault(head_node, []).append(link)
        if link.lower in st.nodes[tail_node].bottom:
            cups.setdefault(tail_node, []).append(link)

    if not caps and not cups:
        return st

    above_rows: dict[int, list[str]] = {}
    below_rows: dict[int, list[str]] = {}
    rerouted: dict[str, tuple[str, str]] = {}  # edge id -> (new lower, new upper)
    new_links: list[Link] = []

    for v in sorted(caps):
        layer = layer_of[v]
        t = StructNode(id=st.fresh(f"turn_up__{v}"), kind="turn", vertex=v)
        st.nodes[t.id] = t
        above_rows.setdefault(layer, []).append(t.id)
        for link in sorted(caps[v], key=lambda l: l.edge):
            chain_port = st.fresh(f"{t.id}__chain__{link.edge}")
            down_port = st.fresh(f"{t.id}__drop__{link.edge}")
            t.bottom += [chain_port, down_port]
            st.node_of_port[chain_port] = t.id
            st.node_of_port[down_port] = t.id
            new_links.append(Link(edge=link.edge, lower=link.upper, upper=down_port))
            rerouted[link.edge] = (link.lower, chain_port)

    for v in sorted(cups):
        layer = layer_of[v]
        t = StructNode(id=st.fresh(f"turn_dn__{v}"), kind="turn", vertex=v)
        st.nodes[t.id] = t
        below_rows.setdefault(layer, []).append(t.id)
        for link in sorted(cups[v], key=lambda l: l.edge):
            chain_port = st.fresh(f"{t.id}__chain__{link.edge}")
            rise_port = st.fresh(f"{t.id}__rise__{link.edge}")
            t.top += [chain_port, rise_port]
            st.node_of_port[chain_port] = t.id
            st.node_of_port[rise_port] = t.id
            new_links.append(Link(edge=link.edge, lower=rise_port, upper=link.lower))
            lo, up = rerouted.get(link.edge, (None, link.upper))
            rerouted[link.edge] = (chain_port, up)

    for link in st.links:
        if link.edge in rerouted:
            lo, up = rerouted[link.edge]
            new_links.append(Link(edge=link.edge, lower=lo or link.lower, upper=up))
        else:
            new_links.append(link)

    rows: list[list[str]] = []
    tags: list[tuple[str, int]] = []
    for i, row in enumerate(st.rows):
        if i in below_rows:
            rows.append(below_rows[i])
            tags.append(("below", i))
        rows.append(row)
        tags.append(("orig", i))
        if i in above_rows:
            rows.append(above_rows[i])
            tags.append(("above", i))
    st.rows = rows
    st.tags = tags
    st.links = new_links
    return st


def subdivide_long_edges(st: LayeredStructure) -> LayeredStructure:
    """Split every link until all of them connect neighboring rows."""
    row_of = st.row_of()
    out: list[Link] = []
    for link in sorted(st.links, key=lambda l: (l.edge, l.lower)):
        lo_row = row_of[st.node_of_port[link.lower]]
        up_row = row_of[st.node_of_port[link.upper]]
        assert up_row > lo_row, f"link of {link.edge} does not point upward"
        if up_row == lo_row + 1:
            out.append(link)
            continue
        prev = link.lower
        for r in range(lo_row + 1, up_row):
            d = StructNode(id=st.fresh(f"seg__{link.edge}__r{r}"), kind="long",
                           edge=link.edge)
            pb = st.fresh(f"{d.id}__in")
            pt = st.fresh(f"{d.id}__out")
            d.bottom = [pb]
            d.top = [pt]
            st.nodes[d.id] = d
            st.node_of_port[pb] = d.id
            st.node_of_port[pt] = d.id
            st.rows[r].append(d.id)
            out.append(Link(edge=link.edge, lower=prev, upper=pb))
            prev = pt
        out.append(Link(edge=link.edge, lower=prev, upper=link.upper))
    st.links = out
    return st


def build_structure(graph: PortGraph, orientation: Orientation, layering: Layering,
                    sides: SideAssignment | None = None) -> LayeredStructure:
    if sides is None:
        sides = assign_port_sides(graph, orientation)
    st = initial_structure(graph, orientation, layering, sides)
    st = insert_turning_dummies(st)
    st = subdivide_long_edges(st)
    return st


# Left/Right groups.  Experimental: the construction mirrors the intended
# wall-and-shrink scheme but plans in the wild rarely use these sides, so
# vertices whose remaining content would conflict with the walls are
# demoted (their Left/Right groups become Free) instead of mangled.

@dataclass(frozen=True)
class ShrinkSpec:
    vertex: str
    left_ports: tuple[str, ...]
    right_ports: tuple[str, ...]
    # (top separator, bottom separator) pairing columns, left wall first
    walls: tuple[tuple[str, str], tuple[str, str]]
    pad_left: float
    pad_right: float
    # pairings across the two flanks, (left port, right port): these turn
    # into horizontal rows when the vertex is shrunk back
    rows: tuple[tuple[str, str], ...] = ()


@dataclass
class TransformResult:
    graph: PortGraph
    shrinks: list[ShrinkSpec] = field(default_factory=list)
    pinned: dict[str, Side] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)


def _groups_in_subtree(graph: PortGraph, root: str) -> list[str]:
    out = []
    stack = [root]
    while stack:
        cur = stack.pop()
        g = graph.group_by_id.get(cur)
        if g is not None:
            out.append(cur)
            stack.extend(g.children)
    return out


def _child_pin(graph: PortGraph, orientation: Orientation, child: str) -> Side | None:
    """Side for a whole non-Left/Right top-level child, or None if mixed.

    Children carrying exactly one explicit side keep it; unconstrained
    children take the majority edge direction; children demanding both
    sides cannot sit inside the wall construction.
    """
    explicit = set()
    for gid in _groups_in_subtree(graph, child):
        s = graph.group_by_id[gid].side
        if s in (Side.TOP, Side.BOTTOM):
            explicit.add(s)
    if len(explicit) > 1:
        return None
    if explicit:
        return next(iter(explicit))
    port_ids = [child] if child in graph.port_by_id else graph.group_ports(child)
    out_edges = sum(1 for p in port_ids if is_outgoing(graph, orientation, p))
    in_edges = sum(1 for p in port_ids if is_outgoing(graph, orientation, p) is False)
    return Side.TOP if out_edges > in_edges else Side.BOTTOM


def transform_left_right_groups(graph: PortGraph, orientation: Orientation,
                                port_spacing: float = 8.0) -> TransformResult:
    """Rewrite Left/Right port groups into top/bottom wall structure.

    Both sides of an affected vertex get a new fixed-order top-level group
    [left part, separator, middle part, separator, right part]; the two
    separator columns are pairing-linked so they share an x-coordinate and
    fence off the released side areas.  The vertex is widened to reserve
    those areas; the drawing step shrinks it back and re-routes the edges
    of the side ports as L-shapes inside them.
    """
    lr_children: dict[str, list[tuple[str, Side]]] = {}
    for v in graph.vertices:
        for child in v.children:
            g = graph.group_by_id.get(child)
            if g is None:
                continue
            if g.side in (Side.LEFT, Side.RIGHT):
                lr_children.setdefault(v.id, []).append((child, g.side))
            else:
                inner = {graph.group_by_id[x].side
                         for x in _groups_in_subtree(graph, child)}
                if inner & {Side.LEFT, Side.RIGHT}:
                    # Side groups buried in ordinary content: unsupported.
                    lr_children.setdefault(v.id, []).append((child, Side.FREE))
    if not lr_children:
        return TransformResult(graph=graph)

    taken = {x.id for coll in (graph.vertices, graph.ports, graph.groups, graph.edges)
             for x in coll}

    def fresh(base: str) -> str:
        name = base
        n = 2
        while name in taken:
            name = f"{base}_{n}"
            n += 1
        taken.add(name)
        return name

    vertices = {v.id: v for v in graph.vertices}
    groups = {g.id: g for g in graph.groups}
    ports = {p.id: p for p in graph.ports}
    pairings = list(graph.pairings)
    pinned: dict[str, Side] = {}
    shrinks: list[ShrinkSpec] = []
    notes: list[str] = []
    demoted: set[str] = set()

    def demote(vid: str, why: str) -> None:
        demoted.add(vid)
        notes.append(f"vertex {vid}: Left/Right demoted to Free ({why})")

    for vid in sorted(lr_children):
        v = vertices[vid]
        entries = dict(lr_children[vid])
        if any(s is Side.FREE for s in entries.values()):
            demote(vid, "side group nested inside ordinary content")
            continue

        plan: dict[str, tuple[Side, Side]] = {}  # child -> (part, pinned side)
        ok = True
        for child in v.children:
            part = entries.get(child, Side.FREE)
            pin = _child_pin(graph, orientation, child)
            if pin is None:
                ok = False
                break
            plan[child] = (part, pin)
        if not ok:
            demote(vid, "a child demands both sides")
            continue

        # Pairings must end on opposite sides; flip unconstrained children.
        child_of = {}
        for child in v.children:
            for p in ([child] if child in graph.port_by_id else graph.group_ports(child)):
                child_of[p] = child

        def can_flip(c: str) -> bool:
            return not any(graph.group_by_id[x].side in (Side.TOP, Side.BOTTOM)
                           for x in _groups_in_subtree(graph, c))

        local_pairings = [pr for pr in pairings
                          if pr.a in child_of and pr.b in child_of]
        rows: list[tuple[str, str]] = []
        aligned = []
        for pr in local_pairings:
            ca, cb = child_of[pr.a], child_of[pr.b]
            if ca == cb:
                ok = False
                break
            wing_a, wing_b = plan[ca][0], plan[cb][0]
            in_a = wing_a in (Side.LEFT, Side.RIGHT)
            in_b = wing_b in (Side.LEFT, Side.RIGHT)
            if in_a and in_b:
                if wing_a is wing_b:
                    # Two ports of one flank can never realign.
                    ok = False
                    break
                rows.append((pr.a, pr.b) if wing_a is Side.LEFT
                            else (pr.b, pr.a))
                continue
            if in_a != in_b:
                # A flank port cannot stay aligned with one between the
                # walls once the vertex is shrunk back.
                ok = False
                break
            aligned.append(pr)
            if plan[ca][1] == plan[cb][1]:
                for c in (cb, ca):
                    if can_flip(c):
                        s = plan[c][1]
                        plan[c] = (plan[c][0], Side.BOTTOM if s is Side.TOP else Side.TOP)
                        break
        # A flip may disturb an earlier pairing of the same child; verify.
        if ok:
            ok = all(plan[child_of[pr.a]][1] != plan[child_of[pr.b]][1]
                     for pr in aligned)
        if not ok:
            demote(vid, "pairing conflicts with the wall construction")
            continue
        if rows:
            # Row heights are pinned by the partner, which can split
            # another group's slot run on a crowded flank.
            for flank in (Side.LEFT, Side.RIGHT):
                if sum(1 for c in v.children if plan[c][0] is flank) > 1:
                    demote(vid, "pairing rows with multiple flank groups")
                    ok = False
                    break
            if not ok:
                continue
        # Cross-flank pairings leave the layered phases entirely: walls
        # make a shared column impossible, so keeping them would force
        # the breaking rule to tear either them or a wall apart.
        row_keys = {frozenset(r) for r in rows}
        pairings = [pr for pr in pairings
                    if frozenset((pr.a, pr.b)) not in row_keys]

        parts: dict[tuple[Side, Side], list[str]] = {}
        left_ports: list[str] = []
        right_ports: list[str] = []
        for child in v.children:
            part, pin = plan[child]
            parts.setdefault((part, pin), []).append(child)
            port_ids = [child] if child in graph.port_by_id else graph.group_ports(child)
            for p in port_ids:
                pinned[p] = pin
            if part is Side.LEFT:
                left_ports += port_ids
            elif part is Side.RIGHT:
                right_ports += port_ids

        new_children: list[str] = []
        wall_tops: list[str] = []
        wall_bottoms: list[str] = []
        for side_name, side_enum in (("top", Side.TOP), ("bottom", Side.BOTTOM)):
            sep1 = fresh(f"{vid}__sep_{side_name}_l")
            sep2 = fresh(f"{vid}__sep_{side_name}_r")
            for sep in (sep1, sep2):
                ports[sep] = Port(id=sep, vertex=vid)
                pinned[sep] = side_enum
            part_ids = []
            for name, key in (("left", Side.LEFT), ("mid", Side.FREE), ("right", Side.RIGHT)):
                gid = fresh(f"{vid}__{side_name}_{name}")
                groups[gid] = PortGroup(id=gid, side=Side.FREE, fixed=False,
                                        children=tuple(parts.get((key, side_enum), ())))
                part_ids.append(gid)
            outer = fresh(f"{vid}__{side_name}_lr")
            groups[outer] = PortGroup(
                id=outer, side=side_enum, fixed=True,
                children=(part_ids[0], sep1, part_ids[1], sep2, part_ids[2]))
            new_children.append(outer)
            if side_enum is Side.TOP:
                wall_tops = [sep1, sep2]
            else:
                wall_bottoms = [sep1, sep2]
        pairings.append(PortPairing(a=wall_tops[0], b=wall_bottoms[0]))
        pairings.append(PortPairing(a=wall_tops[1], b=wall_bottoms[1]))

        pad_left = port_spacing * (len(left_ports) + 1)
        pad_right = port_spacing * (len(right_ports) + 1)
        # Each horizontal pairing row reserves one extra pitch of height.
        min_height = max(v.min_height,
                         port_spacing * (max(len(left_ports), len(right_ports))
                                         + len(rows) + 1))
        vertices[vid] = replace(v, children=tuple(new_children),
                                min_width=v.min_width + pad_left + pad_right,
                                min_height=min_height)
        shrinks.append(ShrinkSpec(vertex=vid, left_ports=tuple(left_ports),
                                  right_ports=tuple(right_ports),
                                  walls=((wall_tops[0], wall_bottoms[0]),
                                         (wall_tops[1], wall_bottoms[1])),
                                  pad_left=pad_left, pad_right=pad_right,
                                  rows=tuple(rows)))
        notes.append(f"vertex {vid}: {len(left_ports)} left / {len(right_ports)} right "
                     "ports folded onto top/bottom")

    done = demoted | {s.vertex for s in shrinks}
    if done:
        # Absorbed or demoted side groups lose their side marker so the
        # side assignment never sees a stray Left/Right again.
        for gid, g in list(groups.items()):
            if g.side in (Side.LEFT, Side.RIGHT):
                root = graph.vertex_of_group.get(gid)
                if root in done:
                    groups[gid] = replace(g, side=Side.FREE)

    graph2 = PortGraph(
        vertices=tuple(vertices[k] for k in sorted(vertices)),
        ports=tuple(ports[k] for k in sorted(ports)),
        groups=tuple(groups[k] for k in sorted(groups)),
        pairings=tuple(pairings),
        edges=graph.edges,
    )
    return TransformResult(graph=graph2, shrinks=shrinks, pinned=pinned, notes=notes)
