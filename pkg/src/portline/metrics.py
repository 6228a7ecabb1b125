"""Drawing quality numbers and validation of the drawing contract.

measure() reports crossings, bends, and box statistics for a finished
drawing.  validate_drawing() checks a drawing against the plan it came
from: minimum sizes, ports on the right boundary, group contiguity,
fixed orders, pairing alignment, orthogonal wiring, and the rule that
distinct edges may share single points only.  aggregate() folds repeated
measurements into the mean-ratio / percent-best table used to compare
pipeline variants.
"""
from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from statistics import fmean

from portline.drawing import Drawing, DrawnPort, Rect, simplify
from portline.model import PortGraph, Side

EPS = 1e-6


@dataclass(frozen=True)
class MetricsRecord:
    crossings: int
    bends: int
    width: float
    height: float
    area: float
    aspect: float
    elapsed: float  # milliseconds


@dataclass(frozen=True)
class DrawingViolation:
    kind: str
    subject: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}({self.subject}): {self.detail}"


def _axis_segments(edges):
    """Split every polyline into vertical and horizontal interval records.

    Returns (verticals, horizontals) as (coordinate, low, high, edge index).
    """
    verts: list[tuple[float, float, float, int]] = []
    hors: list[tuple[float, float, float, int]] = []
    for i, e in enumerate(edges):
        pts = simplify(e.points)
        for a, b in zip(pts, pts[1:]):
            if a[0] == b[0]:
                verts.append((a[0], min(a[1], b[1]), max(a[1], b[1]), i))
            else:
                hors.append((a[1], min(a[0], b[0]), max(a[0], b[0]), i))
    return verts, hors


def count_crossings(drawing: Drawing) -> int:
    """Distinct points where two different edges meet.

    Vertical/horizontal meetings come from an x-sorted scan instead of
    the all-pairs check; collinear touches contribute the shared point,
    collinear overlaps contribute nothing (they are violations, not
    crossings).
    """
    verts, hors = _axis_segments(drawing.edges)
    verts.sort()
    xs = [v[0] for v in verts]
    meets: dict[tuple[int, int], set] = {}

    def note(i: int, j: int, pt) -> None:
        if i != j:
            meets.setdefault((i, j) if i < j else (j, i), set()).add(pt)

    for y, lo, hi, i in hors:
        for k in range(bisect_left(xs, lo), bisect_right(xs, hi)):
            x, vlo, vhi, j = verts[k]
            if vlo <= y <= vhi:
                note(i, j, (x, y))
    for segs, upright in ((verts, True), (hors, False)):
        by_c: dict[float, list[tuple[float, float, int]]] = {}
        for c, lo, hi, i in segs:
            by_c.setdefault(c, []).append((lo, hi, i))
        for c, spans in by_c.items():
            spans.sort()
            for a, (lo1, hi1, i1) in enumerate(spans):
                for lo2, hi2, i2 in spans[a + 1:]:
                    if lo2 > hi1:
                        break
                    if lo2 == hi1:
                        note(i1, i2, (c, hi1) if upright else (hi1, c))
    return sum(len(s) for s in meets.values())


def measure(drawing: Drawing, elapsed: float = 0.0) -> MetricsRecord:
    """Quality record of a drawing; elapsed is carried through in ms."""
    box = drawing.bbox()
    width, height = box.width, box.height
    aspect = width / height if width > 0 and height > 0 else 1.0
    return MetricsRecord(crossings=count_crossings(drawing),
                         bends=drawing.total_bends(),
                         width=width, height=height, area=width * height,
                         aspect=aspect, elapsed=elapsed)


# --- validation -----------------------------------------------------------

_FLUSH = {
    Side.TOP: lambda t, r: abs(t.y0 - r.y1) <= EPS
    and t.x0 >= r.x0 - EPS and t.x1 <= r.x1 + EPS,
    Side.BOTTOM: lambda t, r: abs(t.y1 - r.y0) <= EPS
    and t.x0 >= r.x0 - EPS and t.x1 <= r.x1 + EPS,
    Side.LEFT: lambda t, r: abs(t.x1 - r.x0) <= EPS
    and t.y0 >= r.y0 - EPS and t.y1 <= r.y1 + EPS,
    Side.RIGHT: lambda t, r: abs(t.x0 - r.x1) <= EPS
    and t.y0 >= r.y0 - EPS and t.y1 <= r.y1 + EPS,
}


def _required_side(graph: PortGraph, parent: dict[str, str], pid: str) -> Side | None:
    """Innermost explicit side constraint above a port, if any."""
    cur = parent.get(pid)
    while cur is not None:
        g = graph.group_by_id.get(cur)
        if g is not None and g.side is not Side.FREE:
            return g.side
        cur = parent.get(cur)
    return None


def _side_sequences(drawing: Drawing) -> dict[str, dict[Side, list[str]]]:
    """Boundary order of drawn ports per vertex and side."""
    out: dict[str, dict[Side, list[str]]] = {}
    for p in drawing.ports:
        out.setdefault(p.vertex, {}).setdefault(p.side, []).append(p.id)
    by_id = {p.id: p for p in drawing.ports}

    def key(pid: str):
        c = by_id[pid].rect.center
        return c if by_id[pid].side in (Side.TOP, Side.BOTTOM) else (c[1], c[0])

    for sides in out.values():
        for side, seq in sides.items():
            seq.sort(key=key)
    return out


def _contiguous(positions: list[int]) -> bool:
    return not positions or max(positions) - min(positions) + 1 == len(positions)


def validate_drawing(drawing: Drawing, graph: PortGraph) -> list[DrawingViolation]:
    """Every broken clause of the drawing contract, empty when valid."""
    out: list[DrawingViolation] = []
    vrect = {v.id: v.rect for v in drawing.vertices}
    drawn_port: dict[str, DrawnPort] = {p.id: p for p in drawing.ports}

    for dv in drawing.vertices:
        spec = graph.vertex_by_id.get(dv.id)
        if spec is None:
            out.append(DrawingViolation("vertex-unknown", dv.id, "not in the plan"))
            continue
        if (dv.rect.width < spec.min_width - EPS
                or dv.rect.height < spec.min_height - EPS):
            out.append(DrawingViolation(
                "vertex-size", dv.id,
                f"{dv.rect.width:g}x{dv.rect.height:g} below "
                f"{spec.min_width:g}x{spec.min_height:g}"))
    for vid in graph.vertex_by_id:
        if vid not in vrect:
            out.append(DrawingViolation("vertex-missing", vid, "not drawn"))
    for pid in graph.port_by_id:
        if pid not in drawn_port:
            out.append(DrawingViolation("port-missing", pid, "not drawn"))

    parent: dict[str, str] = {}
    for g in graph.groups:
        for child in g.children:
            parent[child] = g.id

    for dp in drawing.ports:
        r = vrect.get(dp.vertex)
        if r is None:
            out.append(DrawingViolation("port-orphan", dp.id, "vertex not drawn"))
            continue
        if not _FLUSH[dp.side](dp.rect, r):
            out.append(DrawingViolation("port-boundary", dp.id,
                                 f"tab not flush on side {dp.side.value}"))
        want = _required_side(graph, parent, dp.id)
        if want is not None and dp.side is not want:
            out.append(DrawingViolation(
                "port-side", dp.id,
                f"drawn on {dp.side.value}, constrained to {want.value}"))

    seqs = _side_sequences(drawing)
    for g in graph.groups:
        vid = graph.vertex_of_group.get(g.id)
        members = [p for p in graph.group_ports(g.id) if p in drawn_port]
        for side, seq in seqs.get(vid, {}).items():
            index = {pid: i for i, pid in enumerate(seq)}
            if not _contiguous([index[p] for p in members if p in index]):
                out.append(DrawingViolation(
                    "group-contiguity", g.id,
                    f"ports interleave with outsiders on side {side.value}"))
        if not g.fixed:
            continue
        for side in (Side.TOP, Side.BOTTOM):
            seq = seqs.get(vid, {}).get(side, [])
            index = {pid: i for i, pid in enumerate(seq)}
            blocks = []
            for child in g.children:
                pids = [child] if child in graph.port_by_id else graph.group_ports(child)
                pos = [index[p] for p in pids if p in index]
                if pos:
                    blocks.append(min(pos))
            if blocks != sorted(blocks):
                out.append(DrawingViolation(
                    "group-order", g.id,
                    f"fixed child order broken on side {side.value}"))

    for a, b in drawing.pairings:
        pa, pb = drawn_port.get(a), drawn_port.get(b)
        if pa is None or pb is None:
            out.append(DrawingViolation("pairing-missing", f"{a}-{b}",
                                 "port not drawn"))
            continue
        sides = {pa.side, pb.side}
        ca, cb = pa.rect.center, pb.rect.center
        if sides == {Side.TOP, Side.BOTTOM}:
            if abs(ca[0] - cb[0]) > EPS:
                out.append(DrawingViolation("pairing-align", f"{a}-{b}",
                                     f"x {ca[0]:g} vs {cb[0]:g}"))
        elif sides == {Side.LEFT, Side.RIGHT}:
            if abs(ca[1] - cb[1]) > EPS:
                out.append(DrawingViolation("pairing-align", f"{a}-{b}",
                                     f"y {ca[1]:g} vs {cb[1]:g}"))
        else:
            out.append(DrawingViolation(
                "pairing-sides", f"{a}-{b}",
                f"{pa.side.value}/{pb.side.value} are not opposite"))

    for e in drawing.edges:
        if len(e.points) < 2:
            out.append(DrawingViolation("edge-degenerate", e.id, "under two points"))
        for p, q in zip(e.points, e.points[1:]):
            if p != q and p[0] != q[0] and p[1] != q[1]:
                out.append(DrawingViolation("edge-orthogonal", e.id,
                                     f"diagonal segment {p} to {q}"))

    verts, hors = _axis_segments(drawing.edges)
    names = [e.id for e in drawing.edges]
    for segs in (verts, hors):
        by_c: dict[float, list[tuple[float, float, int]]] = {}
        for c, lo, hi, i in segs:
            by_c.setdefault(c, []).append((lo, hi, i))
        for spans in by_c.values():
            spans.sort()
            for a, (lo1, hi1, i1) in enumerate(spans):
                for lo2, hi2, i2 in spans[a + 1:]:
                    if lo2 >= hi1:
                        break
                    pair = (names[i1], names[i2]) if i1 != i2 else (names[i1],)
                    out.append(DrawingViolation(
                        "edge-overlap", "/".join(pair),
                        f"collinear for {min(hi1, hi2) - lo2:g} units"))

    boxes = [(dv.id, dv.rect) for dv in drawing.vertices]
    boxes += [(dp.id, dp.rect) for dp in drawing.ports]
    for (n1, r1), (n2, r2) in _overlapping_boxes(boxes):
        out.append(DrawingViolation("box-overlap", f"{n1}/{n2}",
                             "rectangles intersect"))
    for e in drawing.edges:
        pts = simplify(e.points)
        for s in zip(pts, pts[1:]):
            for name, r in boxes:
                if _seg_through(s, r):
                    out.append(DrawingViolation(
                        "edge-through-box", e.id,
                        f"segment {s[0]} to {s[1]} enters {name}"))
    return out


def _overlapping_boxes(boxes: list[tuple[str, Rect]]):
    ordered = sorted(boxes, key=lambda b: b[1].x0)
    for i, (n1, r1) in enumerate(ordered):
        for n2, r2 in ordered[i + 1:]:
            if r2.x0 >= r1.x1:
                break
            if r1.overlaps(r2):
                yield (n1, r1), (n2, r2)


def _seg_through(s, r: Rect) -> bool:
    (ax, ay), (bx, by) = s
    if ax == bx:
        return (r.x0 + EPS < ax < r.x1 - EPS
                and min(by, ay) < r.y1 - EPS and max(by, ay) > r.y0 + EPS)
    return (r.y0 + EPS < ay < r.y1 - EPS
            and min(ax, bx) < r.x1 - EPS and max(ax, bx) > r.x0 + EPS)


# --- variant comparison ----------------------------------------------------

METRIC_FIELDS = ("crossings", "bends", "width", "height", "area",
                 "aspect", "elapsed")


@dataclass(frozen=True)
class AggregateCell:
    mu: float  # mean of per-instance best values, relative to baseline
    beta: float  # percent of instances where this variant is (tied) best


def _best(values: list[float], metric: str) -> float:
    if metric == "aspect":
        return min(values, key=lambda v: abs(v - 1.0))
    return min(values)


def _ratio(value: float, base: float) -> float:
    if base == 0:
        return 1.0 if value == 0 else float("inf")
    return value / base


def aggregate(records: dict[str, dict[str, list[MetricsRecord]]],
              baseline: str) -> dict[str, dict[str, AggregateCell]]:
    """Per-metric mean ratios and percent-best, keyed metric -> variant.

    records maps variant -> instance -> repeated measurements.  For each
    instance the best of the repeats is taken per metric (aspect: closest
    to one), normalized by the baseline's best; ties are not broken, so
    beta columns may sum past 100.
    """
    if baseline not in records:
        raise ValueError(f"baseline variant {baseline!r} has no records")
    instances = sorted(records[baseline])
    if not instances:
        raise ValueError(f"baseline variant {baseline!r} has no instances")
    for variant, by_instance in records.items():
        for inst in instances:
            if not by_instance.get(inst):
                raise ValueError(f"variant {variant!r} lacks runs on {inst!r}")

    table: dict[str, dict[str, AggregateCell]] = {}
    for metric in METRIC_FIELDS:
        bests = {variant: {inst: _best([getattr(r, metric)
                                        for r in records[variant][inst]], metric)
                           for inst in instances}
                 for variant in records}
        cells: dict[str, AggregateCell] = {}
        for variant in sorted(records):
            mu = fmean(_ratio(bests[variant][inst], bests[baseline][inst])
                       for inst in instances)
            wins = 0
            for inst in instances:
                pool = [bests[v][inst] for v in records]
                top = _best(pool, metric)
                mine = bests[variant][inst]
                if metric == "aspect":
                    wins += abs(mine - 1.0) <= abs(top - 1.0) + EPS
                else:
                    wins += mine <= top + EPS
            cells[variant] = AggregateCell(mu=mu,
                                           beta=100.0 * wins / len(instances))
        table[metric] = cells
    return table
