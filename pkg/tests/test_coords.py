"""Port structure transform and x-assignment."""
from __future__ import annotations

import math
import random

from portline import coords, crossmin, layering, orient, portside
from portline.coords import (assign_x, close_residual_gaps, from_port_structure,
                             gap_crossings, to_port_structure)
from portline.crossmin import SweepConfig
from portline.model import Side

from conftest import GraphBuilder, chain_graph, random_port_plan

DELTA = coords.DELTA


def pipeline(graph, seed=0):
    o = orient.orient(graph, method="bfs", seed=seed)
    lay = layering.assign_layers(graph, o)
    st = portside.build_structure(graph, o, lay)
    order, _ = crossmin.minimize_crossings(st, SweepConfig(seed=seed))
    crossmin.apply_order(st, order)
    return st


def full_x(st, threshold_multiple=coords.BREAK_MULTIPLE):
    ps = to_port_structure(st)
    a = assign_x(ps, threshold_multiple)
    a = close_residual_gaps(a, ps)
    return ps, a


def test_vertex_ports_split_on_the_two_row_copies():
    b = GraphBuilder()
    b.vertex("w")
    b.vertex("v")
    b.group("v", "gt", side=Side.TOP)
    b.port("v", "t1", parent="gt")
    b.port("v", "t2", parent="gt")
    b.group("v", "gb", side=Side.BOTTOM)
    bp = b.port("v", "b1", parent="gb")
    b.edge(b.port("w"), bp)
    g = b.build()
    o = orient.Orientation({g.edges[0].id: ("w", "v")})
    lay = layering.assign_layers(g, o)
    st = portside.build_structure(g, o, lay)
    ps = to_port_structure(st)
    minus_row, plus_row = ps.vertex_rows["v"]
    minus = [ps.items[i] for i in ps.rows[minus_row]]
    plus = [ps.items[i] for i in ps.rows[plus_row]]
    assert [i.id for i in plus if i.kind == "port" and i.owner == "v"] == ["t1", "t2"]
    assert [i.id for i in minus if i.kind == "port" and i.owner == "v"] == ["b1"]
    # Wall at both ends and between consecutive nodes.
    for row, r_idx in ((minus, minus_row), (plus, plus_row)):
        assert row[0].kind == "sep" and row[-1].kind == "sep"
        n_nodes = len(st.rows[ps.tags[r_idx][1]])
        assert sum(1 for i in row if i.kind == "sep") == n_nodes + 1


def test_padding_fills_vertices_up_to_their_width():
    b = GraphBuilder()
    b.vertex("w")
    b.vertex("v", w=10 * DELTA)
    b.edge(b.port("v"), b.port("w"))
    b.edge(b.port("v"), b.port("w"))
    g = b.build()
    o = orient.Orientation({e.id: ("v", "w") for e in g.edges})
    lay = layering.assign_layers(g, o)
    st = portside.build_structure(g, o, lay)
    ps = to_port_structure(st)
    pads = [i for i in ps.items.values() if i.kind == "pad" and i.owner == "v"]
    assert len(pads) >= 8
    ps2, a = full_x(st)
    geo = from_port_structure(a, ps2)
    lo, hi = geo.vertex_span["v"]
    assert hi - lo >= 10 * DELTA - 1e-9


def test_duplication_gaps_have_no_crossings_on_random_plans():
    rng = random.Random(31)
    for _ in range(100):
        g = random_port_plan(rng)
        st = pipeline(g, seed=rng.randrange(100))
        ps = to_port_structure(st)
        for i, (tag, _) in enumerate(ps.tags):
            if tag == "minus":
                assert gap_crossings(ps, i) == 0


def test_long_edge_chain_is_drawn_vertical():
    b = GraphBuilder()
    for vid in ("a", "b", "c"):
        b.vertex(vid)
    b.connect("a", "b", "e_ab")
    b.connect("b", "c", "e_bc")
    b.connect("a", "c", "e_ac")
    g = b.build()
    o = orient.Orientation({"e_ab": ("a", "b"), "e_bc": ("b", "c"), "e_ac": ("a", "c")})
    lay = layering.assign_layers(g, o)
    st = portside.build_structure(g, o, lay)
    ps, a = full_x(st)
    chain_items = {i.id for i in ps.items.values() if i.kind == "pass"}
    dummies = [n for n in st.nodes.values() if n.kind == "long" and n.edge == "e_ac"]
    assert dummies
    xs = set()
    for node in dummies:
        for p in node.ports():
            xs.add(a.x[ps.port_item[p]])
    tail, head = portside.edge_tail_head(g, o, "e_ac")
    xs.add(a.x[ps.port_item[tail]])
    xs.add(a.x[ps.port_item[head]])
    assert len(xs) == 1
    assert chain_items


def test_rows_keep_order_and_min_separation():
    rng = random.Random(47)
    for _ in range(100):
        g = random_port_plan(rng)
        st = pipeline(g, seed=rng.randrange(100))
        ps, a = full_x(st)
        for row in ps.rows:
            xs = [a.x[i] for i in row]
            for left, right in zip(xs, xs[1:]):
                assert right - left >= DELTA - 1e-9
        for x in a.x.values():
            assert abs(x * 4 - round(x * 4)) < 1e-6


def test_pairings_stay_vertical():
    rng = random.Random(53)
    seen = 0
    for _ in range(60):
        g = random_port_plan(rng, pairings=True)
        if not g.pairings:
            continue
        seen += 1
        st = pipeline(g, seed=rng.randrange(100))
        ps, a = full_x(st)
        geo = from_port_structure(a, ps)
        for pr in g.pairings:
            assert abs(geo.x_of_port[pr.a] - geo.x_of_port[pr.b]) < 1e-9
    assert seen >= 10


def test_blocks_break_when_a_vertex_is_stretched():
    b = GraphBuilder()
    b.vertex("v")
    b.vertex("w1")
    b.vertex("w2", w=50 * DELTA)
    b.vertex("w3")
    for wid in ("w1", "w2", "w3"):
        b.edge(b.port("v"), b.port(wid))
    g = b.build()
    o = orient.Orientation({e.id: ("v", g.port_by_id[e.b].vertex) for e in g.edges})
    lay = layering.assign_layers(g, o)
    st = portside.build_structure(g, o, lay)

    def worst_gap(threshold_multiple):
        ps, a = full_x(st, threshold_multiple)
        worst = 0.0
        for row in ps.rows:
            prev_by_owner = {}
            for i in row:
                owner = ps.items[i].owner
                if owner is None:
                    continue
                if owner in prev_by_owner:
                    worst = max(worst, a.x[i] - a.x[prev_by_owner[owner]])
                prev_by_owner[owner] = i
        return worst

    assert worst_gap(None) > 16 * DELTA
    assert worst_gap(coords.BREAK_MULTIPLE) <= 16 * DELTA + 1e-9


def test_breaking_does_not_widen_vertices():
    rng = random.Random(59)
    for _ in range(50):
        g = random_port_plan(rng)
        st = pipeline(g, seed=rng.randrange(100))
        ps = to_port_structure(st)
        with_break = from_port_structure(assign_x(ps, coords.BREAK_MULTIPLE), ps)
        without = from_port_structure(assign_x(ps, None), ps)
        for v, (lo, hi) in with_break.vertex_span.items():
            wlo, whi = without.vertex_span[v]
            assert hi - lo <= whi - wlo + 1e-9


def test_close_residual_gaps_is_identity_without_big_gaps():
    st = pipeline(chain_graph(4))
    ps = to_port_structure(st)
    a = assign_x(ps)
    closed = close_residual_gaps(a, ps)
    assert closed.x == a.x


def test_vertex_spans_hold_width_and_never_overlap():
    rng = random.Random(61)
    for _ in range(40):
        g = random_port_plan(rng)
        st = pipeline(g, seed=rng.randrange(100))
        ps, a = full_x(st)
        geo = from_port_structure(a, ps)
        for nid, (lo, hi) in geo.vertex_span.items():
            v = g.vertex_by_id[st.nodes[nid].vertex]
            assert hi - lo >= v.min_width - 1e-9
        for r, row in enumerate(st.rows):
            spans = sorted(geo.vertex_span[n] for n in row
                           if n in geo.vertex_span)
            for (alo, ahi), (blo, bhi) in zip(spans, spans[1:]):
                assert blo >= ahi - 1e-9
        for p in st.node_of_port:
            assert p in geo.x_of_port
