"""Orthogonal edge routing in the channels between layers.

Every skew edge piece that crosses the gap between two neighboring layers
owns one horizontal lane there; straight vertical pieces need none.  Lanes
stack in four groups, bottom to top: hairpins that come back down into a
top-side port (caps), left-running pieces, right-running pieces, and
hairpins that dip below a bottom-side port (cups).  After the per-group
assignment the groups are pushed into one another as far as piece spans
allow, so disjoint pieces from different groups share lanes.

Two pieces can legally end on the same x when one endpoint sits on the
lower boundary and the other on the upper one.  Most such meetings are
harmless by construction; the one combination that would overlap (a
right-running piece starting where a left-running piece ends) is rerouted
over a reserved lane at the top of the channel, costing two extra bends.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from portline.coords import DELTA, XGeometry
from portline.drawing import (Drawing, DrawnEdge, DrawnPort, DrawnVertex, Point,
                              Rect, simplify)
from portline.model import Side
from portline.portside import LayeredStructure, ShrinkSpec, StructNode


@dataclass
class Arc:
    """One routed piece of an edge inside a single channel.

    Ordinary pieces run from a lower-boundary attachment (a_x) to an
    upper-boundary one (b_x).  Hairpins keep the port-side leg in a_x and
    the far leg (the column the chain continues on) in b_x.
    """

    edge: str
    channel: int
    band: str  # "vertical" | "left" | "right" | "cap" | "cup"
    a_x: float
    b_x: float
    line: int = -1
    jogged: bool = False
    jog_x: float = 0.0

    def span(self) -> tuple[float, float]:
        return (min(self.a_x, self.b_x), max(self.a_x, self.b_x))


@dataclass
class Channel:
    """The horizontal strip between layer `index` and layer `index + 1`."""

    index: int
    delta: float = DELTA
    arcs: list[Arc] = field(default_factory=list)
    lines: int = 0
    top_lane: bool = False
    y0: float = 0.0

    def height(self) -> float:
        lanes = self.lines + (1 if self.top_lane else 0)
        return lanes * self.delta + 2 * self.delta

    def line_y(self, line: int) -> float:
        return self.y0 + (line + 1) * self.delta

    def top_lane_y(self) -> float:
        return self.y0 + (self.lines + 1) * self.delta


@dataclass
class RoutePlan:
    channels: dict[int, Channel]
    # per edge, its arcs in bottom-to-top walk order
    steps: dict[str, list[Arc]]
    # per edge, (lower real port, upper real port)
    ends: dict[str, tuple[str, str]]
    x_of_port: dict[str, float]


def _partner_port(st: LayeredStructure, node: StructNode, port: str,
                  edge: str, link_of: dict[str, object]) -> str:
    if node.kind == "long":
        a, b = node.ports()
        return b if port == a else a
    for p in node.ports():
        if p == port:
            continue
        link = link_of.get(p)
        if link is not None and link.edge == edge:
            return p
    raise RuntimeError(f"unresolved turning dummy {node.id} for edge {edge}")


def _edge_paths(st: LayeredStructure) -> dict[str, list[str]]:
    """Ordered struct-port path of every edge, from e.a to e.b."""
    link_of: dict[str, object] = {}
    for link in st.links:
        link_of[link.lower] = link
        link_of[link.upper] = link
    counts: dict[str, int] = {}
    for link in st.links:
        counts[link.edge] = counts.get(link.edge, 0) + 1

    paths: dict[str, list[str]] = {}
    for e in st.graph.edges:
        seq = [e.a]
        cur = e.a
        hops = 0
        while True:
            link = link_of[cur]
            hops += 1
            cur = link.upper if link.lower == cur else link.lower
            seq.append(cur)
            node = st.nodes[st.node_of_port[cur]]
            if node.kind == "real":
                break
            cur = _partner_port(st, node, cur, e.id, link_of)
            seq.append(cur)
        if cur != e.b or hops != counts[e.id]:
            raise RuntimeError(f"edge {e.id} leaves dummies unresolved")
        paths[e.id] = seq
    return paths


def _tokens(st: LayeredStructure, geo: XGeometry,
            path: list[str]) -> list[tuple]:
    """Compress a port path to drawable stations, bottom end first.

    Tokens: ("end", port, layer, side), ("pass", x, layer),
    ("cap", channel, node) and ("cup", channel, node).  Dummies on the
    extra rows vanish; the channel is one open strip as far as geometry
    is concerned.
    """
    row_of = st.row_of()
    toks: list[tuple] = []
    i = 0
    while i < len(path):
        p = path[i]
        node = st.nodes[st.node_of_port[p]]
        tag, orig = st.tags[row_of[node.id]]
        if node.kind == "real":
            side = Side.TOP if p in node.top else Side.BOTTOM
            toks.append(("end", p, orig, side))
            i += 1
        elif node.kind == "long":
            if tag == "orig":
                toks.append(("pass", geo.x_of_port[p], orig))
            i += 2
        else:
            if node.bottom:  # all ports below: sits above its vertex
                toks.append(("cap", orig, node.id))
            else:
                toks.append(("cup", orig - 1, node.id))
            i += 2
    if toks[0][2] > toks[-1][2]:
        toks.reverse()
    return toks


def _interleavings(spans: list[tuple[float, float]]) -> int:
    n = 0
    for i in range(len(spans)):
        a0, a1 = spans[i]
        for j in range(i + 1, len(spans)):
            b0, b1 = spans[j]
            if max(a0, b0) <= min(a1, b1):
                contained = (a0 <= b0 and b1 <= a1) or (b0 <= a0 and a1 <= b1)
                if not contained:
                    n += 1
    return n


def _rebind_hairpin_ports(st: LayeredStructure, toks: dict[str, list[tuple]],
                          xmap: dict[str, float]) -> None:
    """Swap x positions of sibling wrong-side ports so hairpins nest.

    Only ports that may trade places freely take part: direct children of
    the same free group (or of the vertex root), not in any pairing.  The
    swap happens in x only, so group spans, vertex spans and the slab
    order of everything else stay as assigned.
    """
    graph = st.graph
    paired = graph.pairing_of_port
    by_node: dict[str, list[tuple[str, float, str]]] = {}
    for eid, tk in sorted(toks.items()):
        for k, t in enumerate(tk):
            if t[0] == "cap":
                far, port = tk[k - 1][1], tk[k + 1][1]
            elif t[0] == "cup":
                far, port = tk[k + 1][1], tk[k - 1][1]
            else:
                continue
            by_node.setdefault(t[2], []).append((eid, far, port))

    for node_id in sorted(by_node):
        classes: dict[str, list[tuple[str, float, str]]] = {}
        for entry in by_node[node_id]:
            port = entry[2]
            if port in paired:
                continue
            parent = graph.parent_of[port]
            group = graph.group_by_id.get(parent)
            if group is not None and group.fixed:
                continue
            classes.setdefault(parent, []).append(entry)
        for parent in sorted(classes):
            entries = sorted(classes[parent], key=lambda t: (t[1], t[0]))
            if len(entries) < 2:
                continue
            xs = sorted(xmap[p] for _, _, p in entries)
            best = None
            for cand in (list(reversed(xs)), xs):
                spans = [(min(far, x), max(far, x))
                         for (_, far, _), x in zip(entries, cand)]
                score = (_interleavings(spans),
                         sum(hi - lo for lo, hi in spans))
                if best is None or score < best[0]:
                    best = (score, cand)
            for (_, _, port), x in zip(entries, best[1]):
                xmap[port] = x


def _overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    """Closed-interval test: touching at one x already counts."""
    return a[0] <= b[1] and b[0] <= a[1]


def _first_fit(spans: list[tuple[float, float]], order: list[int],
               nested_rule: bool) -> list[int]:
    """Greedy lane indices, smallest first.

    With nested_rule, a span that continues past an earlier span's right
    end while starting inside it must take a strictly larger index than
    that span; this keeps the lanes crossing-free where the two pieces'
    vertical legs would otherwise collide or double-cross.
    """
    lanes: list[list[tuple[float, float]]] = []
    assigned: list[tuple[tuple[float, float], int]] = []
    out = [0] * len(spans)
    for i in order:
        lo, hi = spans[i]
        floor = 0
        if nested_rule:
            for (plo, phi), lane in assigned:
                if plo < lo <= phi < hi:
                    floor = max(floor, lane + 1)
        k = floor
        while k < len(lanes) and any(_overlap((lo, hi), s) for s in lanes[k]):
            k += 1
        while len(lanes) <= k:
            lanes.append([])
        lanes[k].append((lo, hi))
        assigned.append(((lo, hi), k))
        out[i] = k
    return out


def assign_channel_lines(ch: Channel) -> None:
    """Give every skew arc of the channel its final lane index.

    Per group: hairpins go width-ascending (the narrow ones end up nearest
    their vertex), runs go in left-to-right order of their left ends,
    right-running ones filling from the top of their group and
    left-running ones from the bottom.  The groups are then shifted into
    each other; a piece only has to stay strictly above an earlier-group
    piece whose span it meets.  Finally, a left-running piece whose upper
    end sits exactly on a right-running piece's lower end is sent over
    the reserved top lane.
    """
    groups: dict[str, list[Arc]] = {"cap": [], "left": [], "right": [], "cup": []}
    for a in ch.arcs:
        if a.band in groups:
            groups[a.band].append(a)

    def plain(arcs: list[Arc]) -> list[int]:
        spans = [a.span() for a in arcs]
        order = sorted(range(len(arcs)),
                       key=lambda i: (spans[i][1] - spans[i][0], spans[i][0],
                                      arcs[i].edge))
        return _first_fit(spans, order, nested_rule=False)

    def runs(arcs: list[Arc]) -> list[int]:
        spans = [a.span() for a in arcs]
        order = sorted(range(len(arcs)),
                       key=lambda i: (spans[i][0], spans[i][1], arcs[i].edge))
        return _first_fit(spans, order, nested_rule=True)

    idx = {"cap": plain(groups["cap"]), "left": runs(groups["left"]),
           "right": runs(groups["right"]), "cup": plain(groups["cup"])}

    placed: list[tuple[int, tuple[float, float]]] = []
    total = 0
    for band, flip in (("cap", False), ("left", False),
                       ("right", True), ("cup", True)):
        arcs = groups[band]
        if not arcs:
            continue
        n = max(idx[band]) + 1
        rels = [n - 1 - k if flip else k for k in idx[band]]
        off = 0
        for a, rel in zip(arcs, rels):
            for line, span in placed:
                if _overlap(a.span(), span):
                    off = max(off, line - rel + 1)
        for a, rel in zip(arcs, rels):
            a.line = off + rel
            placed.append((a.line, a.span()))
        total = max(total, off + n)
    ch.lines = total
    assert total <= sum(1 for a in ch.arcs if a.band != "vertical") + 1

    taken = set()
    for a in ch.arcs:
        taken.add(a.a_x)
        taken.add(a.b_x)
    right_at = {a.a_x: a for a in groups["right"]}
    for a in groups["left"]:
        if a.b_x not in right_at:
            continue
        a.jogged = True
        ch.top_lane = True
        for cand in (a.b_x + 3 * ch.delta / 8, a.b_x + 5 * ch.delta / 8):
            if cand not in taken:
                a.jog_x = cand
                taken.add(cand)
                break
        else:
            raise AssertionError("no free jog position")


def plan_channels(st: LayeredStructure, geo: XGeometry,
                  delta: float = DELTA) -> RoutePlan:
    paths = _edge_paths(st)
    toks = {eid: _tokens(st, geo, path) for eid, path in paths.items()}
    xmap = dict(geo.x_of_port)
    _rebind_hairpin_ports(st, toks, xmap)

    layers = sorted({i for t, i in st.tags if t == "orig"})
    assert layers == list(range(len(layers))), "layer indices must be dense"
    channels: dict[int, Channel] = {
        c: Channel(index=c, delta=delta) for c in range(len(layers) - 1)}

    def channel(c: int) -> Channel:
        if c not in channels:
            channels[c] = Channel(index=c, delta=delta)
        return channels[c]

    steps: dict[str, list[Arc]] = {}
    ends: dict[str, tuple[str, str]] = {}
    for eid in sorted(toks):
        tk = toks[eid]
        ends[eid] = (tk[0][1], tk[-1][1])
        arcs: list[Arc] = []
        prev = tk[0]
        pending: tuple | None = None
        for t in tk[1:]:
            if t[0] in ("cap", "cup"):
                pending = t
                continue
            px = xmap[prev[1]] if prev[0] == "end" else prev[1]
            cx = xmap[t[1]] if t[0] == "end" else t[1]
            if pending is None:
                assert t[2] == prev[2] + 1, "run must cross one channel"
                band = ("vertical" if cx == px
                        else "right" if cx > px else "left")
                arc = Arc(edge=eid, channel=prev[2], band=band, a_x=px, b_x=cx)
            else:
                assert t[2] == prev[2], "hairpin stays beside its vertex"
                kind = pending[0]
                port_x, far_x = (px, cx) if kind == "cup" else (cx, px)
                arc = Arc(edge=eid, channel=pending[1], band=kind,
                          a_x=port_x, b_x=far_x)
                pending = None
            channel(arc.channel).arcs.append(arc)
            arcs.append(arc)
            prev = t
        steps[eid] = arcs

    for c in sorted(channels):
        assign_channel_lines(channels[c])
    return RoutePlan(channels=channels, steps=steps, ends=ends, x_of_port=xmap)


def _slot_plan(spec: ShrinkSpec, side_of: dict[str, Side],
               xmap: dict[str, float], rows: dict[str, str],
               y0: float, y1: float, delta: float) -> dict[str, tuple[float, Side]]:
    """Stagger heights for ports moving onto the released flanks.

    On each flank the reroutes form nested L shapes; the column nearest
    the shrunk boundary must take the slot nearest its exit side, or the
    wider hooks cut across the narrower verticals.  A pairing across the
    two flanks (``rows``, left port to right port) becomes one horizontal
    row: the right port takes its partner's height and the loose ports
    fill the heights left over.
    """
    slots: dict[str, tuple[float, Side]] = {}
    fixed: dict[str, float] = {}
    for ports, new_side, near_first in ((spec.left_ports, Side.LEFT, True),
                                        (spec.right_ports, Side.RIGHT, False)):
        taken: set[float] = set()
        for p in ports:
            if p in fixed:
                slots[p] = (fixed[p], new_side)
                taken.add(fixed[p])
        free = [p for p in ports if p not in fixed]
        tops = sorted((p for p in free if side_of[p] == Side.TOP),
                      key=lambda p: xmap[p], reverse=near_first)
        bots = sorted((p for p in free if side_of[p] == Side.BOTTOM),
                      key=lambda p: xmap[p], reverse=near_first)
        for seq, start, step in ((tops, y1, -delta), (bots, y0, delta)):
            y = start
            for p in seq:
                y += step
                while y in taken:
                    y += step
                slots[p] = (y, new_side)
                taken.add(y)
        for p in ports:
            partner = rows.get(p)
            if partner is not None and partner not in slots:
                fixed[partner] = slots[p][0]
    return slots


def build_drawing(st: LayeredStructure, geo: XGeometry,
                  shrinks: tuple[ShrinkSpec, ...] = (),
                  delta: float = DELTA) -> Drawing:
    """Assemble the final drawing from the ordered structure and x values.

    Layers keep a uniform height (the tallest vertex on them); channel
    heights follow their lane counts.  Ports are square tabs sitting flush
    on the outside of their vertex boundary.
    """
    graph = st.graph
    plan = plan_channels(st, geo, delta)
    port_s = delta / 2

    vertex_layer: dict[str, int] = {}
    for r, (tag, i) in enumerate(st.tags):
        if tag != "orig":
            continue
        for nid in st.rows[r]:
            node = st.nodes[nid]
            if node.kind == "real":
                vertex_layer[node.vertex] = i
    n_layers = max(vertex_layer.values()) + 1 if vertex_layer else 0

    shrink_of = {s.vertex: s for s in shrinks}
    req = {i: 2 * delta for i in range(n_layers)}
    for v, i in vertex_layer.items():
        h = graph.vertex_by_id[v].min_height
        s = shrink_of.get(v)
        if s is not None:
            h = max(h, delta * (len(s.left_ports) + len(s.rows) + 1),
                    delta * (len(s.right_ports) + len(s.rows) + 1))
        req[i] = max(req[i], h)

    y = 0.0
    layer_y: dict[int, float] = {}
    for i in range(n_layers):
        ch = plan.channels.get(i - 1)
        if ch is not None:
            ch.y0 = y
            y += ch.height()
        layer_y[i] = y
        y += req[i]
    top = plan.channels.get(n_layers - 1)
    if top is not None:
        top.y0 = y

    side_of: dict[str, Side] = {}
    for node in st.nodes.values():
        if node.kind != "real":
            continue
        for p in node.top:
            side_of[p] = Side.TOP
        for p in node.bottom:
            side_of[p] = Side.BOTTOM

    def attach(port: str) -> Point:
        v = graph.port_by_id[port].vertex
        ly = layer_y[vertex_layer[v]]
        x = plan.x_of_port[port]
        if side_of[port] == Side.TOP:
            return (x, ly + req[vertex_layer[v]] + port_s)
        return (x, ly - port_s)

    vertices: list[DrawnVertex] = []
    for v in graph.vertices:
        lo, hi = geo.vertex_span[v.id]
        y0 = layer_y[vertex_layer[v.id]]
        vertices.append(DrawnVertex(
            id=v.id, rect=Rect(lo, y0, hi, y0 + req[vertex_layer[v.id]]),
            label=v.label))

    ports: list[DrawnPort] = []
    for p in graph.ports:
        x = plan.x_of_port[p.id]
        y0 = layer_y[vertex_layer[p.vertex]]
        y1 = y0 + req[vertex_layer[p.vertex]]
        if side_of[p.id] == Side.TOP:
            rect = Rect(x - port_s / 2, y1, x + port_s / 2, y1 + port_s)
        else:
            rect = Rect(x - port_s / 2, y0 - port_s, x + port_s / 2, y0)
        ports.append(DrawnPort(id=p.id, vertex=p.vertex, rect=rect,
                               side=side_of[p.id]))

    edges: list[DrawnEdge] = []
    for e in graph.edges:
        lo_p, up_p = plan.ends[e.id]
        pts: list[Point] = [attach(lo_p)]
        for arc in plan.steps[e.id]:
            if arc.band == "vertical":
                continue
            ch = plan.channels[arc.channel]
            ly = ch.line_y(arc.line)
            if arc.band == "cup":
                pts += [(arc.a_x, ly), (arc.b_x, ly)]
            elif arc.band == "cap":
                pts += [(arc.b_x, ly), (arc.a_x, ly)]
            elif arc.jogged:
                ty = ch.top_lane_y()
                pts += [(arc.a_x, ly), (arc.jog_x, ly),
                        (arc.jog_x, ty), (arc.b_x, ty)]
            else:
                pts += [(arc.a_x, ly), (arc.b_x, ly)]
        pts.append(attach(up_p))
        edges.append(DrawnEdge(id=e.id, points=simplify(tuple(pts))))

    dropped: set[str] = set()
    drawn_rows: list[tuple[str, str]] = []
    if shrinks:
        vert_of = {v.id: v for v in vertices}
        port_of = {p.id: p for p in ports}
        edge_of = {e.id: e for e in edges}
        edge_at: dict[str, str] = {}
        for e in graph.edges:
            edge_at[e.a] = e.id
            edge_at[e.b] = e.id
        for s in shrinks:
            dv = vert_of[s.vertex]
            old = dv.rect
            # the separator columns fence off the freed side areas; the
            # vertex shrinks onto them, then grows back toward its
            # pre-transform width wherever the reroute hooks leave room
            wall_l = min(plan.x_of_port[s.walls[0][0]],
                         plan.x_of_port[s.walls[0][1]])
            wall_r = max(plan.x_of_port[s.walls[1][0]],
                         plan.x_of_port[s.walls[1][1]])
            flank_l = [plan.x_of_port[p] for p in s.left_ports]
            flank_r = [plan.x_of_port[p] for p in s.right_ports]
            lo = max(flank_l) + 2 * port_s if flank_l else old.x0
            hi = min(flank_r) - 2 * port_s if flank_r else old.x1
            if not (lo <= wall_l < wall_r <= hi):
                st.notes.append(f"shrink of {s.vertex} skipped: no room")
                continue
            want = (graph.vertex_by_id[s.vertex].min_width
                    - s.pad_left - s.pad_right)
            x0, x1 = wall_l, wall_r
            lack = want - (x1 - x0)
            if lack > 0:
                grow = min(lack, x0 - lo)
                x0 -= grow
                x1 += min(lack - grow, hi - x1)
            rect = Rect(x0, old.y0, x1, old.y1)
            dv.rect = rect
            drawn_rows += s.rows
            for wall in s.walls:
                for wp in wall:
                    dropped.add(wp)
            slots = _slot_plan(s, side_of, plan.x_of_port, dict(s.rows),
                               rect.y0, rect.y1, delta)
            for p, (sy, new_side) in slots.items():
                dp = port_of[p]
                if new_side == Side.LEFT:
                    dp.rect = Rect(rect.x0 - port_s, sy - port_s / 2,
                                   rect.x0, sy + port_s / 2)
                    hook = (rect.x0 - port_s, sy)
                else:
                    dp.rect = Rect(rect.x1, sy - port_s / 2,
                                   rect.x1 + port_s, sy + port_s / 2)
                    hook = (rect.x1 + port_s, sy)
                dp.side = new_side
                eid = edge_at.get(p)
                if eid is None:
                    continue
                de = edge_of[eid]
                old_x = plan.x_of_port[p]
                if plan.ends[eid][0] == p:
                    de.points = simplify(
                        (hook, (old_x, sy)) + de.points)
                else:
                    de.points = simplify(
                        de.points + ((old_x, sy), hook))
        ports = [p for p in ports if p.id not in dropped]

    pairings = [(pr.a, pr.b) for pr in graph.pairings
                if pr.a not in dropped and pr.b not in dropped]
    pairings += drawn_rows
    return Drawing(vertices=vertices, ports=ports, edges=edges,
                   pairings=pairings)
