"""Crossing reduction: barycenter layer sweeps over nodes and ports.

Port constraints are kept in an arrangement tree per node: bundles mirror
the port-group forest (free bundles may permute their children, fixed ones
may not) and slots are columns holding a top port, a bottom port, or a
pairing-glued column of both.  Reading both side orders off one traversal
keeps every group contiguous per side with consistent relative order.

Granularities: "vertices" orders whole nodes by multiplicity-weighted
barycenters and arranges ports afterwards; "ports" keys individual ports
and derives node and group orders from mean port keys; "mixed" decomposes
only nodes that carry port pairings into port columns.  Local sources and
sinks (nodes or ports with no segment toward the reference row) follow the
configured strategy: scaled current position, scaled opposite-side
barycenter, or frozen ordinal position.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass

from portline.model import PortGraph, Side, Vertex
from portline.portside import LayeredStructure, Link


@dataclass(frozen=True)
class SweepConfig:
    granularity: str = "ports"  # vertices | ports | mixed
    sink: str = "relpos"  # pseudo | opposite | relpos
    repetitions: int = 1
    max_sweeps: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.granularity not in ("vertices", "ports", "mixed"):
            raise ValueError(f"unknown granularity {self.granularity!r}")
        if self.sink not in ("pseudo", "opposite", "relpos"):
            raise ValueError(f"unknown sink strategy {self.sink!r}")


@dataclass
class LayerOrder:
    rows: list[list[str]]
    top_ports: dict[str, tuple[str, ...]]
    bottom_ports: dict[str, tuple[str, ...]]


def barycenter(positions: list[float]) -> float | None:
    """Plain mean; None signals "no neighbors" to the caller."""
    if not positions:
        return None
    return sum(positions) / len(positions)


def pseudo_barycenter(cur_pos: float, own_size: int, ref_size: int) -> float:
    return cur_pos * ref_size / max(1, own_size)


def opposite_barycenter(b_other: float, other_size: int, ref_size: int) -> float:
    return b_other * ref_size / max(1, other_size)


# The arrangement tree.

class Slot:
    __slots__ = ("top", "bottom")

    def __init__(self, top: str | None = None, bottom: str | None = None) -> None:
        self.top = top
        self.bottom = bottom

    def ports(self) -> list[str]:
        return [p for p in (self.top, self.bottom) if p is not None]


class Bundle:
    __slots__ = ("gid", "fixed", "children")

    def __init__(self, gid: str | None, fixed: bool,
                 children: list["Bundle | Slot"] | None = None) -> None:
        self.gid = gid
        self.fixed = fixed
        self.children = children if children is not None else []


def _subtree_ports(c: Bundle | Slot) -> list[str]:
    if isinstance(c, Slot):
        return c.ports()
    out: list[str] = []
    for child in c.children:
        out.extend(_subtree_ports(child))
    return out


class Arrangement:
    """Permutable port structure of one node."""

    def __init__(self, root: Bundle) -> None:
        self.root = root
        self._slots: list[Slot] | None = None
        self._tops: list[str] | None = None
        self._bottoms: list[str] | None = None

    def _dirty(self) -> None:
        self._slots = self._tops = self._bottoms = None

    def slots(self) -> list[Slot]:
        # cached; callers treat the result as read-only
        if self._slots is None:
            out: list[Slot] = []

            def walk(b: Bundle) -> None:
                for c in b.children:
                    if isinstance(c, Slot):
                        out.append(c)
                    else:
                        walk(c)

            walk(self.root)
            self._slots = out
        return self._slots

    def top_order(self) -> list[str]:
        if self._tops is None:
            self._tops = [s.top for s in self.slots() if s.top is not None]
        return self._tops

    def bottom_order(self) -> list[str]:
        if self._bottoms is None:
            self._bottoms = [s.bottom for s in self.slots() if s.bottom is not None]
        return self._bottoms

    def ports(self) -> list[str]:
        out = []
        for s in self.slots():
            out.extend(s.ports())
        return out

    def shuffle(self, rng: random.Random) -> None:
        self._dirty()

        def walk(b: Bundle) -> None:
            if not b.fixed:
                rng.shuffle(b.children)
            for c in b.children:
                if isinstance(c, Bundle):
                    walk(c)

        walk(self.root)

    def sort_by_keys(self, keys: dict[str, float]) -> None:
        """Recursive stable sort of free bundles by subtree mean key.

        Children without any keyed port stay at their ordinal positions;
        keyed children are stably sorted into the keyed positions.
        """
        self._dirty()

        def subtree_key(c: Bundle | Slot) -> float | None:
            vals = [keys[p] for p in _subtree_ports(c) if p in keys]
            return sum(vals) / len(vals) if vals else None

        def walk(b: Bundle) -> None:
            if not b.fixed and len(b.children) > 1:
                keyed = [(c, subtree_key(c)) for c in b.children]
                movable = [(c, k) for c, k in keyed if k is not None]
                movable.sort(key=lambda t: t[1])
                open_pos = [i for i, (_, k) in enumerate(keyed) if k is not None]
                result: list[Bundle | Slot] = list(b.children)
                for pos, (c, _) in zip(open_pos, movable):
                    result[pos] = c
                b.children = result
            for c in b.children:
                if isinstance(c, Bundle):
                    walk(c)

        walk(self.root)

    def arrangement_count(self) -> int:
        total = 1

        def walk(b: Bundle) -> None:
            nonlocal total
            if not b.fixed:
                total *= math.factorial(len(b.children))
            for c in b.children:
                if isinstance(c, Bundle):
                    walk(c)

        walk(self.root)
        return total

    def enumerate_orders(self):
        """Yields the slot sequence of every valid child permutation."""

        def expand(item: Bundle | Slot):
            if isinstance(item, Slot):
                yield [item]
                return
            if all(isinstance(c, Slot) for c in item.children):
                # flat bundle: permute the slots directly
                if item.fixed or len(item.children) <= 1:
                    yield list(item.children)
                else:
                    for perm in itertools.permutations(item.children):
                        yield list(perm)
                return
            if item.fixed or len(item.children) <= 1:
                perms = [item.children]
            else:
                perms = itertools.permutations(item.children)
            for perm in perms:
                for combo in _product_seqs([list(expand(c)) for c in perm]):
                    yield combo

        yield from expand(self.root)

    def apply_slot_order(self, slots: list[Slot]) -> None:
        """Reorders free bundles to realize the given slot sequence.

        Each child subtree owns a contiguous run of slots, so sorting
        children by the rank of their first slot reproduces the order.
        """
        self._dirty()
        rank = {id(s): i for i, s in enumerate(slots)}

        def child_rank(c: Bundle | Slot) -> int:
            if isinstance(c, Slot):
                return rank[id(c)]
            ranks = [child_rank(x) for x in c.children]
            return min(ranks) if ranks else len(slots)

        def walk(b: Bundle) -> None:
            if not b.fixed and len(b.children) > 1:
                b.children.sort(key=child_rank)
            for c in b.children:
                if isinstance(c, Bundle):
                    walk(c)

        walk(self.root)


def _product_seqs(seq_lists):
    if not seq_lists:
        yield []
        return
    for head in seq_lists[0]:
        for rest in _product_seqs(seq_lists[1:]):
            yield head + rest


def build_arrangement(graph: PortGraph, vertex: Vertex,
                      side_of: dict[str, Side]) -> tuple[Arrangement, list[tuple[str, str]]]:
    """Arrangement for a real node, plus its unglued pairings.

    Pairings whose two ports share a parent are glued into one column so
    they stay aligned by construction; cross-parent pairings are returned
    as (top port, bottom port) and need repair after each sweep.
    """
    slot_of: dict[str, Slot] = {}
    parent_of_port: dict[str, int] = {}

    def build(children: tuple[str, ...], gid: str | None, fixed: bool,
              parent_key: int) -> Bundle:
        b = Bundle(gid=gid, fixed=fixed)
        for c in children:
            g = graph.group_by_id.get(c)
            if g is None:
                s = Slot(top=c) if side_of[c] is Side.TOP else Slot(bottom=c)
                slot_of[c] = s
                parent_of_port[c] = parent_key
                b.children.append(s)
            else:
                b.children.append(build(g.children, g.id, g.fixed, id(g)))
        return b

    root = build(vertex.children, None, False, id(vertex))
    cross: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for p in sorted(slot_of):
        pr = graph.pairing_of_port.get(p)
        if pr is None or pr.key() in seen:
            continue
        seen.add(pr.key())
        a, b_ = pr.a, pr.b
        if side_of[a] is Side.BOTTOM:
            a, b_ = b_, a
        if a not in slot_of or b_ not in slot_of:
            continue
        if parent_of_port[a] == parent_of_port[b_]:
            glued = slot_of[a]
            glued.bottom = b_
            _remove_slot(root, slot_of[b_])
            slot_of[b_] = glued
        else:
            cross.append((a, b_))
    return Arrangement(root), cross


def _remove_slot(b: Bundle, target: Slot) -> bool:
    for i, c in enumerate(b.children):
        if c is target:
            del b.children[i]
            return True
        if isinstance(c, Bundle) and _remove_slot(c, target):
            return True
    return False


def dummy_arrangement(node_top: list[str], node_bottom: list[str],
                      permutable: bool) -> Arrangement:
    root = Bundle(gid=None, fixed=not permutable)
    for p in node_top:
        root.children.append(Slot(top=p))
    for p in node_bottom:
        root.children.append(Slot(bottom=p))
    return Arrangement(root)


# Crossing counting.

def _inversions(seq: list[int]) -> int:
    """Counts inversions by merge sort."""
    if len(seq) < 2:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    count = _inversions(left) + _inversions(right)
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            count += len(left) - i
            j += 1
    seq[:] = merged + left[i:] + right[j:]
    return count


def _side_positions(order: LayerOrder, row: int, side: str) -> dict[str, int]:
    pos: dict[str, int] = {}
    source = order.top_ports if side == "top" else order.bottom_ports
    for node in order.rows[row]:
        for p in source[node]:
            pos[p] = len(pos)
    return pos


def count_crossings(st: LayeredStructure, order: LayerOrder) -> int:
    total = 0
    for r, links in enumerate(st.links_per_gap()):
        if len(links) < 2:
            continue
        lower_pos = _side_positions(order, r, "top")
        upper_pos = _side_positions(order, r + 1, "bottom")
        pairs = sorted((lower_pos[l.lower], upper_pos[l.upper]) for l in links)
        total += _inversions([u for _, u in pairs])
    return total


def count_crossings_naive(st: LayeredStructure, order: LayerOrder) -> int:
    """Quadratic pair enumeration; the oracle for count_crossings."""
    total = 0
    for r, links in enumerate(st.links_per_gap()):
        lower_pos = _side_positions(order, r, "top")
        upper_pos = _side_positions(order, r + 1, "bottom")
        for i in range(len(links)):
            for j in range(i + 1, len(links)):
                a, b = links[i], links[j]
                dl = lower_pos[a.lower] - lower_pos[b.lower]
                du = upper_pos[a.upper] - upper_pos[b.upper]
                if dl * du < 0:
                    total += 1
    return total


# The sweeper.

class _Sweeper:
    def __init__(self, st: LayeredStructure, config: SweepConfig) -> None:
        self.st = st
        self.config = config
        self.rows: list[list[str]] = [list(row) for row in st.rows]
        self.arr: dict[str, Arrangement] = {}
        self.cross_pairs: dict[str, list[tuple[str, str]]] = {}
        self.notes: list[str] = []
        graph = st.graph
        paired_vertices = {graph.port_by_id[pr.a].vertex for pr in graph.pairings}
        for node in st.nodes.values():
            if node.kind == "real":
                arr, cross = build_arrangement(graph, graph.vertex_by_id[node.vertex],
                                               st.side_of)
                self.arr[node.id] = arr
                if cross:
                    self.cross_pairs[node.id] = cross
            else:
                self.arr[node.id] = dummy_arrangement(node.top, node.bottom,
                                                      permutable=node.kind == "turn")
        self.has_pairing = {nid: st.nodes[nid].kind == "real"
                            and st.nodes[nid].vertex in paired_vertices
                            for nid in self.arr}
        self.node_of_port = st.node_of_port
        self.gaps = st.links_per_gap()

    def _facing_links(self, row: int, toward: int) -> list[Link]:
        gap = min(row, toward)
        return self.gaps[gap] if 0 <= gap < len(self.gaps) else []

    def snapshot(self) -> LayerOrder:
        return LayerOrder(
            rows=[list(r) for r in self.rows],
            top_ports={n: tuple(a.top_order()) for n, a in self.arr.items()},
            bottom_ports={n: tuple(a.bottom_order()) for n, a in self.arr.items()},
        )

    def _capture(self) -> tuple[list[list[str]], dict[str, list[Slot]]]:
        return ([list(r) for r in self.rows],
                {n: a.slots() for n, a in self.arr.items()})

    def _restore(self, state: tuple[list[list[str]], dict[str, list[Slot]]]) -> None:
        rows, slot_seqs = state
        self.rows = [list(r) for r in rows]
        for n, slots in slot_seqs.items():
            self.arr[n].apply_slot_order(slots)

    def crossings(self) -> int:
        return count_crossings(self.st, self.snapshot())

    def shuffle_all(self, rng: random.Random) -> None:
        for row in self.rows:
            rng.shuffle(row)
        for a in self.arr.values():
            a.shuffle(rng)

    # Key computation for one directional pass.

    def _port_positions(self, row: int, side: str) -> dict[str, int]:
        pos: dict[str, int] = {}
        for node in self.rows[row]:
            ports = (self.arr[node].top_order() if side == "top"
                     else self.arr[node].bottom_order())
            for p in ports:
                pos[p] = len(pos)
        return pos

    def _port_keys(self, row: int, ref: int) -> tuple[dict[str, float], int]:
        """Barycenter keys for ports of `row` against the facing side of
        `ref`; ports without a segment toward ref carry no key.  Returns
        the keys and the size of the reference sequence."""
        up = ref > row
        ref_pos = self._port_positions(ref, "bottom" if up else "top")
        keys: dict[str, float] = {}
        for link in self._facing_links(row, ref):
            own, other = (link.lower, link.upper) if up else (link.upper, link.lower)
            keys[own] = float(ref_pos[other])
        return keys, max(1, len(ref_pos))

    def _sink_port_keys(self, row: int, ref: int, keys: dict[str, float],
                        ref_size: int) -> dict[str, float]:
        """Fill keys for unkeyed ports per the sink strategy (not relpos)."""
        filled = dict(keys)
        opposite = row - (ref - row)
        opp_keys: dict[str, float] = {}
        opp_size = 1
        if self.config.sink == "opposite" and 0 <= opposite < len(self.rows):
            opp_keys, opp_size = self._port_keys(row, opposite)
        own_top = self._port_positions(row, "top")
        own_bottom = self._port_positions(row, "bottom")
        for node in self.rows[row]:
            for p in self.arr[node].ports():
                if p in filled:
                    continue
                if self.config.sink == "opposite" and p in opp_keys:
                    filled[p] = opposite_barycenter(opp_keys[p], opp_size, ref_size)
                    continue
                own = own_top if p in own_top else own_bottom
                filled[p] = pseudo_barycenter(own.get(p, 0), max(1, len(own)), ref_size)
        return filled

    def _node_segment_keys(self, row: int, ref: int) -> dict[str, list[float]]:
        """Reference-row node positions per node of `row`, one entry per
        segment, so parallel edges weigh the barycenter by multiplicity."""
        node_pos = {n: i for i, n in enumerate(self.rows[ref])}
        up = ref > row
        out: dict[str, list[float]] = {}
        for link in self._facing_links(row, ref):
            own_port, other_port = (link.lower, link.upper) if up else (link.upper, link.lower)
            own_node = self.node_of_port[own_port]
            other_node = self.node_of_port[other_port]
            out.setdefault(own_node, []).append(float(node_pos[other_node]))
        return out

    def pass_row(self, row: int, ref: int) -> None:
        if self.config.granularity == "vertices":
            self._pass_vertices(row, ref)
        elif self.config.granularity == "ports":
            self._pass_ports(row, ref)
        else:
            self._pass_mixed(row, ref)

    def _sort_nodes(self, row: int, node_keys: dict[str, float]) -> None:
        """Stable sort; unkeyed nodes stay at their ordinal positions."""
        current = self.rows[row]
        keyed = [(n, node_keys[n]) for n in current if n in node_keys]
        keyed.sort(key=lambda t: t[1])
        positions = [i for i, n in enumerate(current) if n in node_keys]
        result = list(current)
        for pos, (n, _) in zip(positions, keyed):
            result[pos] = n
        self.rows[row] = result

    def _node_sink_keys(self, row: int, ref: int,
                        node_keys: dict[str, float]) -> dict[str, float]:
        if self.config.sink == "relpos":
            return node_keys
        filled = dict(node_keys)
        ref_size = max(1, len(self.rows[ref]))
        own_size = max(1, len(self.rows[row]))
        opposite = row - (ref - row)
        opp: dict[str, float | None] = {}
        opp_size = 1
        if self.config.sink == "opposite" and 0 <= opposite < len(self.rows):
            opp_raw = self._node_segment_keys(row, opposite)
            opp = {n: barycenter(v) for n, v in opp_raw.items()}
            opp_size = max(1, len(self.rows[opposite]))
        for i, n in enumerate(self.rows[row]):
            if n in filled:
                continue
            ob = opp.get(n)
            if self.config.sink == "opposite" and ob is not None:
                filled[n] = opposite_barycenter(ob, opp_size, ref_size)
            else:
                filled[n] = pseudo_barycenter(i, own_size, ref_size)
        return filled

    def _pass_vertices(self, row: int, ref: int) -> None:
        raw = self._node_segment_keys(row, ref)
        node_keys = {n: b for n, v in raw.items()
                     if (b := barycenter(v)) is not None}
        node_keys = self._node_sink_keys(row, ref, node_keys)
        self._sort_nodes(row, node_keys)

    def _pass_ports(self, row: int, ref: int) -> None:
        keys, ref_size = self._port_keys(row, ref)
        if self.config.sink != "relpos":
            keys = self._sink_port_keys(row, ref, keys, ref_size)
        node_keys: dict[str, float] = {}
        for n in self.rows[row]:
            vals = [keys[p] for p in self.arr[n].ports() if p in keys]
            if vals:
                node_keys[n] = sum(vals) / len(vals)
        self._sort_nodes(row, node_keys)
        for n in self.rows[row]:
            self.arr[n].sort_by_keys(keys)

    def _pass_mixed(self, row: int, ref: int) -> None:
        keys, ref_size = self._port_keys(row, ref)
        if self.config.sink != "relpos":
            keys = self._sink_port_keys(row, ref, keys, ref_size)
        raw = self._node_segment_keys(row, ref)
        node_keys: dict[str, float] = {}
        for n in self.rows[row]:
            if self.has_pairing[n]:
                vals = [keys[p] for p in self.arr[n].ports() if p in keys]
                if vals:
                    node_keys[n] = sum(vals) / len(vals)
            else:
                b = barycenter(raw.get(n, []))
                if b is not None:
                    node_keys[n] = b
        node_keys = self._node_sink_keys(row, ref, node_keys)
        self._sort_nodes(row, node_keys)
        for n in self.rows[row]:
            if self.has_pairing[n]:
                self.arr[n].sort_by_keys(keys)

    def arrange_ports(self) -> None:
        """Greedy per-node port ordering against current neighbor positions."""
        for row in range(len(self.rows)):
            for node in self.rows[row]:
                keys = self._local_port_keys(row, node)
                if keys:
                    self.arr[node].sort_by_keys(keys)

    def _local_port_keys(self, row: int, node: str) -> dict[str, float]:
        keys: dict[str, float] = {}
        ports = set(self.arr[node].ports())
        if row + 1 < len(self.rows):
            upper_pos = self._port_positions(row + 1, "bottom")
            for link in self.gaps[row]:
                if link.lower in ports:
                    keys[link.lower] = float(upper_pos[link.upper])
        if row > 0:
            lower_pos = self._port_positions(row - 1, "top")
            for link in self.gaps[row - 1]:
                if link.upper in ports:
                    keys[link.upper] = float(lower_pos[link.lower])
        return keys

    def polish_ports(self) -> None:
        """Exhaustive local arrangement where the constraint tree is small.

        Crossings with segments of other nodes are invariant under a
        node-internal permutation, so minimizing inversions of each side's
        neighbor positions minimizes the node's true contribution.
        """
        for row in range(len(self.rows)):
            for node in self.rows[row]:
                arr = self.arr[node]
                count = arr.arrangement_count()
                if count <= 1 or count > 40320 or len(arr.ports()) > 8:
                    continue
                keys = self._local_port_keys(row, node)
                if not keys:
                    continue
                slot_keys = {id(s): (keys.get(s.top), keys.get(s.bottom))
                             for s in arr.slots()}
                best_cost = None
                best_slots = None
                for slot_seq in arr.enumerate_orders():
                    cost = _slot_seq_cost(slot_seq, slot_keys)
                    if best_cost is None or cost < best_cost:
                        best_cost = cost
                        best_slots = list(slot_seq)
                        if cost == 0:
                            break
                if best_slots is not None:
                    arr.apply_slot_order(best_slots)

    def repair_pairings(self) -> None:
        """Align cross-parent pairing columns on both sides."""
        for node, pairs in self.cross_pairs.items():
            arr = self.arr[node]
            for _ in range(3):
                top = {p: i for i, p in enumerate(arr.top_order())}
                by_top = sorted(pairs, key=lambda ab: top.get(ab[0], 0))
                arr.sort_by_keys({b: float(i) for i, (_, b) in enumerate(by_top)})
                bottom = {p: i for i, p in enumerate(arr.bottom_order())}
                by_bottom = sorted(pairs, key=lambda ab: bottom.get(ab[1], 0))
                if by_top == by_bottom:
                    break
                arr.sort_by_keys({a: float(i) for i, (a, _) in enumerate(by_bottom)})
            else:
                self.notes.append(f"node {node}: pairing order could not be aligned")

    def run(self) -> tuple[LayerOrder, int]:
        best_state = None
        best_cr = -1
        for rep in range(max(1, self.config.repetitions)):
            rng = random.Random(self.config.seed * 1_000_003 + rep)
            self.shuffle_all(rng)
            self.repair_pairings()
            rep_state = self._capture()
            rep_cr = self.crossings()
            stale = 0
            for j in range(self.config.max_sweeps):
                if j % 2 == 0:
                    for row in range(1, len(self.rows)):
                        self.pass_row(row, row - 1)
                else:
                    for row in range(len(self.rows) - 2, -1, -1):
                        self.pass_row(row, row + 1)
                if self.config.granularity in ("vertices", "mixed"):
                    self.arrange_ports()
                self.repair_pairings()
                cr = self.crossings()
                if cr < rep_cr:
                    rep_cr = cr
                    rep_state = self._capture()
                    stale = 0
                else:
                    stale += 1
                    if stale >= 2:
                        break
            self._restore(rep_state)
            self.polish_ports()
            self.repair_pairings()
            cr = self.crossings()
            if cr < rep_cr:
                rep_cr = cr
                rep_state = self._capture()
            if best_state is None or rep_cr < best_cr:
                best_state, best_cr = rep_state, rep_cr
        assert best_state is not None
        self._restore(best_state)
        return self.snapshot(), best_cr


def _slot_seq_cost(slot_seq: list[Slot],
                   slot_keys: dict[int, tuple[float | None, float | None]]) -> int:
    tops: list[float] = []
    bots: list[float] = []
    for s in slot_seq:
        kt, kb = slot_keys[id(s)]
        if kt is not None:
            tops.append(kt)
        if kb is not None:
            bots.append(kb)
    cost = 0
    for vals in (tops, bots):
        for i, vi in enumerate(vals):
            for vj in vals[i + 1:]:
                if vi > vj:
                    cost += 1
    return cost


def minimize_crossings(st: LayeredStructure, config: SweepConfig) -> tuple[LayerOrder, int]:
    """Returns the best row and port order found, and its crossing count."""
    sweeper = _Sweeper(st, config)
    order, crossings = sweeper.run()
    st.notes.extend(sweeper.notes)
    return order, crossings


def apply_order(st: LayeredStructure, order: LayerOrder) -> LayeredStructure:
    st.rows = [list(r) for r in order.rows]
    for node_id, node in st.nodes.items():
        node.top = list(order.top_ports[node_id])
        node.bottom = list(order.bottom_ports[node_id])
    return st
