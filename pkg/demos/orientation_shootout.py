"""Which way should the edges point?

The pipeline drops fewer crossings when the initial edge orientation
already reflects a sensible vertical order.  This script races the three
orientation methods over a small synthetic corpus, ten seeds each, and
prints the aggregate table: mu is the mean ratio of each variant's
per-plan best against the random baseline (lower is better), beta the
share of plans where the variant ties the field's best.
"""
from __future__ import annotations

from dataclasses import replace

from portline.pipeline import PipelineConfig, render_table, run_bench
from portline.planfile import normalized_graph
from portline.samples import sample_corpus

plans = {name: normalized_graph(p)
         for name, p in sample_corpus(12, sizes=(30, 90)).items()}

base = PipelineConfig(runs=10, fd_iterations=250)
variants = {m: replace(base, orient_method=m) for m in ("rand", "bfs", "fd")}

result = run_bench(plans, variants, baseline="rand")
print(render_table(result.tables, baseline="rand"))

# The crossings row is the one the orientation phase is after; width and
# height barely move because the port spacing dominates both.
best = min(result.tables["crossings"], key=lambda v: result.tables["crossings"][v].mu)
print(f"fewest crossings on average: {best}")
