"""From a cable plan to a picture, one phase at a time.

Builds a small plan by hand, walks it through every pipeline phase with a
look at the intermediate results, then draws the same plan again through
the one-call entry point.  Writes demos/out/tour.svg.
"""
from __future__ import annotations

from pathlib import Path

from portline import coords, crossmin, layering, orient, portside, routing
from portline.crossmin import SweepConfig
from portline.metrics import measure, validate_drawing
from portline.pipeline import PipelineConfig, run_layout
from portline.planfile import (RawEdge, RawPairing, RawPlan, RawPort,
                               RawPortGroup, RawVertex, normalized_graph)
from portline.svg import emit_svg

# A toy wiring plan: a power source, a switch cabinet with a fixed
# bottom connector row, two lamps, and one twisted pair.
plan = RawPlan(
    vertices=(RawVertex(id="src", label="source"),
              RawVertex(id="cab", label="cabinet"),
              RawVertex(id="lampA", label="lamp A"),
              RawVertex(id="lampB", label="lamp B")),
    ports=(RawPort(id="src1", vertex="src"), RawPort(id="src2", vertex="src"),
           RawPort(id="cab1", vertex="cab"), RawPort(id="cab2", vertex="cab"),
           RawPort(id="cab3", vertex="cab"), RawPort(id="cab4", vertex="cab"),
           RawPort(id="la1", vertex="lampA"), RawPort(id="lb1", vertex="lampB")),
    port_groups=(RawPortGroup(id="cabrow", vertex="cab", side="Bottom",
                              fixed=True, children=("cab1", "cab2")),),
    port_pairings=(RawPairing(id="twist", ports=("cab3", "cab4")),),
    edges=(RawEdge(id="w1", ports=("src1", "cab1")),
           RawEdge(id="w2", ports=("src2", "cab2")),
           RawEdge(id="w3", ports=("cab3", "la1")),
           RawEdge(id="w4", ports=("cab4", "lb1")),
           RawEdge(id="w5", ports=("la1", "lb1"))))

graph = normalized_graph(plan)
print(f"normalized: {len(graph.vertices)} vertices, {len(graph.edges)} edges")

# Phase 1: orient every edge so the plan reads bottom-up.
o = orient.orient(graph, method="fd", seed=0, fd_iterations=200)
print("arcs:", sorted(o.direction.values()))

# Phase 2: stack the vertices into layers with minimum total arc span.
lay = layering.assign_layers(graph, o)
print("layers:", dict(sorted(lay.layer_of.items(), key=lambda kv: kv[1])))

# Phase 3: pick a boundary side for every port and patch in dummies for
# edges that span several layers or leave on the wrong side.
st = portside.build_structure(graph, o, lay)
print("structure nodes per layer:",
      [sum(1 for n in st.nodes.values() if n.layer == i)
       for i in range(max(n.layer for n in st.nodes.values()) + 1)])

# Phase 4: order the ports inside each layer to cut crossings.
order, crossings = crossmin.minimize_crossings(st, SweepConfig(seed=0))
crossmin.apply_order(st, order)
print("crossings after the sweep:", crossings)

# Phase 5: x coordinates; paired ports share a column when affordable.
ps = coords.to_port_structure(st)
geo = coords.from_port_structure(coords.close_residual_gaps(coords.assign_x(ps), ps), ps)

# Phase 6: route the wires through the channels between layers.
dw = routing.build_drawing(st, geo)
rec = measure(dw)
print(f"drawn: {rec.crossings} crossings, {rec.bends} bends, "
      f"{rec.width:g} x {rec.height:g}")
print("violations:", validate_drawing(dw, graph) or "none")

# The same trip in one call, best of three seeds.
result = run_layout(graph, PipelineConfig(runs=3, fd_iterations=200))
out = Path(__file__).parent / "out" / "tour.svg"
out.parent.mkdir(exist_ok=True)
out.write_bytes(emit_svg(result.drawing, title="quick tour"))
print(f"best of 3 runs: {result.record.crossings} crossings -> {out}")
