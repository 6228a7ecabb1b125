from __future__ import annotations

import itertools

import pytest

from portline.model import Edge, Port, PortGraph, PortGroup, PortPairing, Side, Vertex


class GraphBuilder:
    """Small helper to assemble PortGraph instances in tests."""

    def __init__(self) -> None:
        self.vertices: dict[str, dict] = {}
        self.ports: list[Port] = []
        self.groups: list[PortGroup] = []
        self.pairings: list[PortPairing] = []
        self.edges: list[Edge] = []
        self._auto = itertools.count()

    def vertex(self, vid: str, label: str = "", w: float = 24.0, h: float = 16.0) -> str:
        self.vertices[vid] = {"label": label or vid, "w": w, "h": h, "children": []}
        return vid

    def port(self, vid: str, pid: str | None = None, parent: str | None = None) -> str:
        pid = pid or f"p{next(self._auto)}"
        self.ports.append(Port(id=pid, vertex=vid))
        if parent is None:
            self.vertices[vid]["children"].append(pid)
        else:
            for i, g in enumerate(self.groups):
                if g.id == parent:
                    self.groups[i] = PortGroup(g.id, g.side, g.fixed, g.children + (pid,))
                    break
            else:
                raise KeyError(parent)
        return pid

    def group(self, vid: str | None, gid: str, side: Side = Side.FREE,
              fixed: bool = False, parent: str | None = None) -> str:
        self.groups.append(PortGroup(id=gid, side=side, fixed=fixed, children=()))
        if parent is not None:
            for i, g in enumerate(self.groups):
                if g.id == parent:
                    self.groups[i] = PortGroup(g.id, g.side, g.fixed, g.children + (gid,))
                    break
            else:
                raise KeyError(parent)
        elif vid is not None:
            self.vertices[vid]["children"].append(gid)
        return gid

    def edge(self, pa: str, pb: str, eid: str | None = None) -> str:
        eid = eid or f"e{next(self._auto)}"
        self.edges.append(Edge(id=eid, a=pa, b=pb))
        return eid

    def pair(self, pa: str, pb: str) -> None:
        self.pairings.append(PortPairing(a=pa, b=pb))

    def connect(self, va: str, vb: str, eid: str | None = None) -> str:
        return self.edge(self.port(va), self.port(vb), eid)

    def build(self) -> PortGraph:
        vertices = tuple(
            Vertex(id=vid, label=d["label"], min_width=d["w"], min_height=d["h"],
                   children=tuple(d["children"]))
            for vid, d in self.vertices.items()
        )
        return PortGraph(vertices=vertices, ports=tuple(self.ports),
                         groups=tuple(self.groups), pairings=tuple(self.pairings),
                         edges=tuple(self.edges))


@pytest.fixture
def builder() -> GraphBuilder:
    return GraphBuilder()


def chain_graph(n: int) -> PortGraph:
    """Path v0 - v1 - ... - v(n-1)."""
    b = GraphBuilder()
    for i in range(n):
        b.vertex(f"v{i}")
    for i in range(n - 1):
        b.connect(f"v{i}", f"v{i + 1}")
    return b.build()


def random_port_plan(rng, n_vertices: int | None = None,
                     groups: bool = True, pairings: bool = True) -> PortGraph:
    """Connected plan with grouped ports, parallel edges, and pairings."""
    import random as _random
    assert isinstance(rng, _random.Random)
    n = n_vertices or rng.randint(4, 14)
    b = GraphBuilder()
    free_ports: dict[str, list[str]] = {}
    for i in range(n):
        vid = b.vertex(f"v{i}")
        free_ports[vid] = []
        if groups and rng.random() < 0.5:
            side = rng.choice([Side.TOP, Side.BOTTOM, Side.FREE, Side.FREE])
            gid = b.group(vid, f"g{i}", side=side, fixed=rng.random() < 0.3)
            for k in range(rng.randint(1, 3)):
                free_ports[vid].append(b.port(vid, pid=f"v{i}g{k}", parent=gid))

    def port_for(vid: str) -> str:
        if free_ports[vid] and rng.random() < 0.6:
            return free_ports[vid].pop(rng.randrange(len(free_ports[vid])))
        return b.port(vid)

    for i in range(1, n):
        j = rng.randrange(i)
        b.edge(port_for(f"v{j}"), port_for(f"v{i}"))
    for _ in range(rng.randrange(n)):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        b.edge(port_for(f"v{i}"), port_for(f"v{j}"))

    if pairings:
        for i in range(n):
            if rng.random() < 0.25:
                vid = f"v{i}"
                pa = b.port(vid)
                pb = b.port(vid)
                b.pair(pa, pb)
                if rng.random() < 0.5:
                    k = rng.randrange(n)
                    if k != i:
                        b.edge(pa, port_for(f"v{k}"))
    return b.build()


# --- shared segment geometry for drawing checks --------------------------

def seg_kind(s):
    """Classify an axis-parallel segment as ("v", x, ylo, yhi) or ("h", y, xlo, xhi)."""
    (ax, ay), (bx, by) = s
    if ax == bx:
        return "v", ax, min(ay, by), max(ay, by)
    return "h", ay, min(ax, bx), max(ax, bx)


def seg_meet(s, t):
    """(intersection points, shared collinear length) of two segments."""
    k1, k2 = seg_kind(s), seg_kind(t)
    if k1[0] == k2[0]:
        if k1[1] != k2[1]:
            return set(), 0.0
        lo, hi = max(k1[2], k2[2]), min(k1[3], k2[3])
        if lo > hi:
            return set(), 0.0
        if lo == hi:
            return {(k1[1], lo) if k1[0] == "v" else (lo, k1[1])}, 0.0
        return set(), hi - lo
    v, h = (k1, k2) if k1[0] == "v" else (k2, k1)
    if h[2] <= v[1] <= h[3] and v[2] <= h[1] <= v[3]:
        return {(v[1], h[1])}, 0.0
    return set(), 0.0


def polyline_meetings(e1, e2):
    """All meeting points and total overlap length of two drawn edges."""
    pts: set = set()
    olap = 0.0
    for s in e1.segments():
        for t in e2.segments():
            got, o = seg_meet(s, t)
            pts |= got
            olap += o
    return pts, olap


def seg_in_rect(s, r, eps=1e-9):
    """True when the segment passes through the rectangle's interior."""
    kind, c, lo, hi = seg_kind(s)
    if kind == "v":
        if not (r.x0 + eps < c < r.x1 - eps):
            return False
        return min(hi, r.y1) - max(lo, r.y0) > eps
    if not (r.y0 + eps < c < r.y1 - eps):
        return False
    return min(hi, r.x1) - max(lo, r.x0) > eps
