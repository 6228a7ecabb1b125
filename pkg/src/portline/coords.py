"""Horizontal coordinates: pure port structure and aligned x-assignment.

Every original row is split into a lower copy holding the bottom-side
ports and an upper copy holding the top-side ports; extra rows built for
turning dummies stay single.  Vertex areas are delimited by separator
paths, widened with padding ports, and tied together by vertical pairing
edges, so the whole drawing becomes a union of paths over ports.  The
alignment is a four-pass median scheme averaged arithmetically, with
blocks broken where they pull two ports of one vertex too far apart.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from portline.portside import LayeredStructure

DELTA = 8.0
BREAK_MULTIPLE = 16.0

_INNER_KINDS = ("pair", "sep", "pass")


@dataclass
class PSItem:
    id: str
    row: int
    kind: str  # port | turn | pass | dummy | pad | sep
    owner: str | None = None  # owning real node for area items


@dataclass
class PSEdge:
    lower: str
    upper: str
    kind: str  # seg | pair | sep | pass


@dataclass
class PortStructure:
    rows: list[list[str]]
    tags: list[tuple[str, int]]  # ("minus"|"plus"|"extra", structure row)
    items: dict[str, PSItem]
    edges: list[PSEdge]
    port_item: dict[str, str]  # structure port id -> item id
    vertex_rows: dict[str, tuple[int, int]]  # real node -> (minus, plus) row
    delta: float
    pad: float

    def positions(self) -> dict[str, int]:
        return {i: p for row in self.rows for p, i in enumerate(row)}

    def edges_between(self, row: int) -> list[PSEdge]:
        return [e for e in self.edges if self.items[e.lower].row == row]

    def is_inner(self, e: PSEdge) -> bool:
        if e.kind in _INNER_KINDS:
            return True
        return (self.items[e.lower].kind in ("pass", "dummy")
                and self.items[e.upper].kind in ("pass", "dummy"))


@dataclass
class XAssignment:
    x: dict[str, float]
    delta: float
    threshold: float


@dataclass
class XGeometry:
    x_of_item: dict[str, float]
    x_of_port: dict[str, float]
    vertex_span: dict[str, tuple[float, float]]
    pad: float


def _padding_count(width: float, delta: float, pad: float) -> int:
    return max(1, math.ceil((width - 2 * pad) / delta) + 1)


def to_port_structure(st: LayeredStructure, delta: float = DELTA) -> PortStructure:
    pad = delta / 2
    graph = st.graph
    rows: list[list[str]] = []
    tags: list[tuple[str, int]] = []
    items: dict[str, PSItem] = {}
    edges: list[PSEdge] = []
    port_item: dict[str, str] = {}
    vertex_rows: dict[str, tuple[int, int]] = {}

    def add(row_items: list[str], item: PSItem) -> str:
        items[item.id] = item
        row_items.append(item.id)
        return item.id

    for r, (tag, orig) in enumerate(st.tags):
        if tag != "orig":
            row_idx = len(rows)
            row: list[str] = []
            for nid in st.rows[r]:
                node = st.nodes[nid]
                if node.kind == "long":
                    add(row, PSItem(id=nid, row=row_idx, kind="dummy"))
                    for p in node.ports():
                        port_item[p] = nid
                else:
                    for p in node.top + node.bottom:
                        add(row, PSItem(id=p, row=row_idx, kind="turn"))
                        port_item[p] = p
            rows.append(row)
            tags.append(("extra", r))
            continue

        minus_idx = len(rows)
        plus_idx = minus_idx + 1
        minus: list[str] = []
        plus: list[str] = []

        def wall(k: int) -> None:
            lo = add(minus, PSItem(id=f"sep_{minus_idx}_{k}_lo", row=minus_idx, kind="sep"))
            hi = add(plus, PSItem(id=f"sep_{minus_idx}_{k}_hi", row=plus_idx, kind="sep"))
            edges.append(PSEdge(lower=lo, upper=hi, kind="sep"))

        wall(0)
        for k, nid in enumerate(st.rows[r], start=1):
            node = st.nodes[nid]
            if node.kind == "long":
                lo = add(minus, PSItem(id=f"{nid}_lo", row=minus_idx, kind="pass"))
                hi = add(plus, PSItem(id=f"{nid}_hi", row=plus_idx, kind="pass"))
                edges.append(PSEdge(lower=lo, upper=hi, kind="pass"))
                for p in node.bottom:
                    port_item[p] = lo
                for p in node.top:
                    port_item[p] = hi
            else:
                vertex_rows[nid] = (minus_idx, plus_idx)
                v = graph.vertex_by_id[node.vertex]
                want = _padding_count(v.min_width, delta, pad)
                for side_row, idx, ports in ((minus, minus_idx, node.bottom),
                                             (plus, plus_idx, node.top)):
                    entries = list(ports)
                    for p in ports:
                        port_item[p] = p
                    n_pad = 0
                    append_next = True
                    while len(entries) < want:
                        pid = f"{nid}_pad{idx}_{n_pad}"
                        n_pad += 1
                        if append_next:
                            entries.append(pid)
                        else:
                            entries.insert(0, pid)
                        append_next = not append_next
                    real = set(ports)
                    for p in entries:
                        add(side_row, PSItem(id=p, row=idx,
                                             kind="port" if p in real else "pad",
                                             owner=nid))
            wall(k)
        rows.append(minus)
        rows.append(plus)
        tags.append(("minus", r))
        tags.append(("plus", r))

    for link in st.links:
        edges.append(PSEdge(lower=port_item[link.lower], upper=port_item[link.upper],
                            kind="seg"))
    for pr in graph.pairings:
        a, b = port_item.get(pr.a), port_item.get(pr.b)
        if a is None or b is None:
            continue
        if items[a].row > items[b].row:
            a, b = b, a
        edges.append(PSEdge(lower=a, upper=b, kind="pair"))

    ps = PortStructure(rows=rows, tags=tags, items=items, edges=edges,
                       port_item=port_item, vertex_rows=vertex_rows,
                       delta=delta, pad=pad)
    for e in ps.edges:
        assert items[e.upper].row == items[e.lower].row + 1, \
            f"edge {e.lower}->{e.upper} must join adjacent rows"
    return ps


def gap_crossings(ps: PortStructure, row: int) -> int:
    """Crossings among edges spanning ps rows row and row+1."""
    pos = ps.positions()
    spans = [(pos[e.lower], pos[e.upper]) for e in ps.edges_between(row)]
    return sum(1 for i in range(len(spans)) for j in range(i + 1, len(spans))
               if (spans[i][0] - spans[j][0]) * (spans[i][1] - spans[j][1]) < 0)


# Alignment.

class _Candidate:
    """One of the four aligned layouts: a vertical direction (align to the
    row below or above) times a horizontal one (mirrored or not)."""

    def __init__(self, ps: PortStructure, down: bool, mirror: bool) -> None:
        self.ps = ps
        self.down = down
        self.mirror = mirror
        self.rows = [list(reversed(r)) if mirror else list(r) for r in ps.rows]
        self.pos = {i: p for row in self.rows for p, i in enumerate(row)}
        # bond_up[i] is the block neighbor of i on the row above, and the
        # edge kind of that bond; bond_down mirrors it.
        self.bond_up: dict[str, tuple[str, str]] = {}
        self.bond_down: dict[str, tuple[str, str]] = {}
        self.x: dict[str, float] = {}
        self._flat = [item for row in self.rows for item in row]
        self._iid = {item: k for k, item in enumerate(self._flat)}
        self._pairs = [(self._iid[a], self._iid[b])
                       for row in self.rows for a, b in zip(row, row[1:])]

    def align(self, marked: set[int]) -> None:
        by_gap: dict[int, list[tuple[int, PSEdge]]] = {}
        for k, e in enumerate(self.ps.edges):
            by_gap.setdefault(self.ps.items[e.lower].row, []).append((k, e))
        n = len(self.rows)
        order = range(1, n) if self.down else range(n - 2, -1, -1)
        for i in order:
            prev = i - 1 if self.down else i + 1
            gap = min(i, prev)
            nb: dict[str, tuple[int, str, str]] = {}
            for k, e in by_gap.get(gap, []):
                if self.down:
                    nb[e.upper] = (k, e.lower, e.kind)
                else:
                    nb[e.lower] = (k, e.upper, e.kind)
            r = -1
            for item in self.rows[i]:
                hit = nb.get(item)
                if hit is None:
                    continue
                k, partner, kind = hit
                if k in marked or self.pos[partner] <= r:
                    continue
                if self.down:
                    self.bond_down[item] = (partner, kind)
                    self.bond_up[partner] = (item, kind)
                else:
                    self.bond_up[item] = (partner, kind)
                    self.bond_down[partner] = (item, kind)
                r = self.pos[partner]

    def roots(self) -> list[int]:
        """Block root of every item, indexed like the flattened row list."""
        iid = self._iid
        bond_up, bond_down = self.bond_up, self.bond_down
        root = [-1] * len(self._flat)
        for item in self._flat:
            if root[iid[item]] >= 0:
                continue
            top = item
            while top in bond_up:
                top = bond_up[top][0]
            t = iid[top]
            cur = top
            while True:
                root[iid[cur]] = t
                down = bond_down.get(cur)
                if down is None:
                    break
                cur = down[0]
        return root

    def compact(self) -> None:
        delta = self.ps.delta
        root = self.roots()
        n = len(self._flat)
        # bucketed successor edges: head[r] -> edge index chain via nxt
        head = [-1] * n
        nxt = [-1] * len(self._pairs)
        targets = [0] * len(self._pairs)
        indeg = [0] * n
        for k, (a, b) in enumerate(self._pairs):
            ra, rb = root[a], root[b]
            assert ra != rb, "two ports of one block share a row"
            targets[k] = rb
            nxt[k] = head[ra]
            head[ra] = k
            indeg[rb] += 1
        x = [0.0] * n
        ready = [r for r in set(root) if indeg[r] == 0]
        seen = 0
        while ready:
            cur = ready.pop()
            seen += 1
            base = x[cur] + delta
            k = head[cur]
            while k >= 0:
                t = targets[k]
                if x[t] < base:
                    x[t] = base
                indeg[t] -= 1
                if indeg[t] == 0:
                    ready.append(t)
                k = nxt[k]
        assert seen == len(set(root)), "block constraints must be acyclic"
        self.x = {item: x[root[self._iid[item]]] for item in self._flat}

    def final_x(self) -> dict[str, float]:
        if not self.x:
            return {}
        if self.mirror:
            hi = max(self.x.values())
            return {i: hi - v for i, v in self.x.items()}
        lo = min(self.x.values())
        return {i: v - lo for i, v in self.x.items()}

    # Block breaking.

    def oversize_gaps(self, threshold: float) -> list[tuple[float, str, str]]:
        out = []
        for row in self.ps.rows:
            run: dict[str | None, str] = {}
            for item in row:
                owner = self.ps.items[item].owner
                if owner is None:
                    continue
                prev = run.get(owner)
                if prev is not None:
                    gap = abs(self.x[item] - self.x[prev])
                    if gap > threshold:
                        out.append((gap, prev, item))
                run[owner] = item
        return out

    def cut_candidates(self, a: str, b: str) -> list[tuple[str, str]]:
        """Severable block bonds at either offending item: (item, dir)."""
        out = []
        for item in (a, b):
            for bonds, side in ((self.bond_up, "up"), (self.bond_down, "down")):
                bond = bonds.get(item)
                if bond is not None and bond[1] == "seg":
                    out.append((item, side))
        return out

    def sever(self, item: str, side: str) -> tuple[str, str]:
        bonds = self.bond_up if side == "up" else self.bond_down
        partner, kind = bonds.pop(item)
        other = self.bond_down if side == "up" else self.bond_up
        other.pop(partner)
        return partner, kind

    def rebond(self, item: str, side: str, partner: str, kind: str) -> None:
        bonds = self.bond_up if side == "up" else self.bond_down
        bonds[item] = (partner, kind)
        other = self.bond_down if side == "up" else self.bond_up
        other[partner] = (item, kind)

    def break_blocks(self, threshold: float) -> None:
        for _ in range(50):
            gaps = self.oversize_gaps(threshold)
            if not gaps:
                return
            gaps.sort(key=lambda g: (-g[0], self.ps.items[g[1]].row, g[1]))
            worst, a, b = gaps[0]
            best = None
            for item, side in self.cut_candidates(a, b):
                partner, kind = self.sever(item, side)
                self.compact()
                gap = abs(self.x[b] - self.x[a])
                key = (gap, self.ps.items[item].row, item, side)
                if best is None or key < best[0]:
                    best = (key, item, side)
                self.rebond(item, side, partner, kind)
            if best is None or best[0][0] >= worst:
                self.compact()
                return
            _, item, side = best
            self.sever(item, side)
            self.compact()


def _mark_type1(ps: PortStructure) -> set[int]:
    """Ordinary segments that cross an inner edge in their gap."""
    pos = ps.positions()
    by_gap: dict[int, list[tuple[int, PSEdge]]] = {}
    for k, e in enumerate(ps.edges):
        by_gap.setdefault(ps.items[e.lower].row, []).append((k, e))
    marked: set[int] = set()
    for gap_edges in by_gap.values():
        inner = [(pos[e.lower], pos[e.upper]) for _, e in gap_edges if ps.is_inner(e)]
        if not inner:
            continue
        for k, e in gap_edges:
            if ps.is_inner(e):
                continue
            lo, up = pos[e.lower], pos[e.upper]
            if any((lo - il) * (up - iu) < 0 for il, iu in inner):
                marked.add(k)
    return marked


def assign_x(ps: PortStructure, threshold_multiple: float | None = BREAK_MULTIPLE) -> XAssignment:
    marked = _mark_type1(ps)
    threshold = math.inf if threshold_multiple is None else threshold_multiple * ps.delta
    candidates = []
    for down in (True, False):
        for mirror in (False, True):
            cand = _Candidate(ps, down=down, mirror=mirror)
            cand.align(marked)
            cand.compact()
            if threshold != math.inf:
                cand.break_blocks(threshold)
            candidates.append(cand.final_x())
    x = {item: sum(c[item] for c in candidates) / len(candidates)
         for item in ps.items}
    lo = min(x.values(), default=0.0)
    x = {i: v - lo for i, v in x.items()}
    return XAssignment(x=x, delta=ps.delta, threshold=threshold)


def close_residual_gaps(assignment: XAssignment, ps: PortStructure) -> XAssignment:
    """Rigid per-vertex shifts that squeeze any leftover gap above the
    threshold.  Paired ports move together, so pairings stay vertical."""
    x = dict(assignment.x)
    threshold = assignment.threshold
    if threshold == math.inf:
        return XAssignment(x=x, delta=assignment.delta, threshold=threshold)
    by_owner: dict[str, list[str]] = {}
    for item in ps.items.values():
        if item.owner is not None:
            by_owner.setdefault(item.owner, []).append(item.id)
    for owner in sorted(by_owner):
        ids = by_owner[owner]
        levels = sorted({x[i] for i in ids})
        shift = 0.0
        new_x: dict[float, float] = {}
        prev = None
        for lv in levels:
            if prev is not None and lv - prev > threshold:
                shift += (lv - prev) - threshold
            new_x[lv] = lv - shift
            prev = lv
        if shift:
            for i in ids:
                x[i] = new_x[x[i]]
    return XAssignment(x=x, delta=assignment.delta, threshold=threshold)


def from_port_structure(assignment: XAssignment, ps: PortStructure) -> XGeometry:
    x = assignment.x
    span: dict[str, tuple[float, float]] = {}
    for item in ps.items.values():
        if item.owner is None:
            continue
        lo, hi = span.get(item.owner, (math.inf, -math.inf))
        span[item.owner] = (min(lo, x[item.id]), max(hi, x[item.id]))
    span = {v: (lo - ps.pad, hi + ps.pad) for v, (lo, hi) in span.items()}
    port_x = {p: x[i] for p, i in ps.port_item.items()}
    return XGeometry(x_of_item=dict(x), x_of_port=port_x, vertex_span=span,
                     pad=ps.pad)
