"""End-to-end runs, benchmark plumbing, and the sample corpus."""
from __future__ import annotations

from collections import deque

import pytest

from portline.metrics import METRIC_FIELDS
from portline.model import contracted_graph
from portline.pipeline import (CSV_HEADER, PipelineConfig, render_csv,
                               render_table, run_bench, run_layout,
                               run_records)
from portline.planfile import normalized_graph
from portline.samples import sample_corpus, sample_plan

from conftest import GraphBuilder


def connected(graph) -> bool:
    cg = contracted_graph(graph)
    if not cg.nodes:
        return True
    seen = {cg.nodes[0]}
    queue = deque(seen)
    while queue:
        for nb in cg.adjacency[queue.popleft()]:
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    return len(seen) == len(cg.nodes)


def test_sample_plan_is_deterministic():
    assert sample_plan(7) == sample_plan(7)
    assert sample_plan(7) != sample_plan(8)


def test_sample_plans_are_connected_and_featureful():
    for seed in range(4):
        plan = sample_plan(seed, 50)
        assert len(plan.vertices) == 50
        assert any(len(e.ports) > 2 for e in plan.edges)
        assert plan.port_groups and plan.port_pairings
        g = normalized_graph(plan)
        assert connected(g)
        cg = contracted_graph(g)
        assert any(m >= 2 for m in cg.multiplicity.values())


def test_sample_corpus_spans_the_range():
    corpus = sample_corpus(20)
    assert sorted(corpus) == [f"plan{i:03d}" for i in range(20)]
    sizes = [len(p.vertices) for p in corpus.values()]
    assert min(sizes) == 40 and max(sizes) == 150
    assert corpus == sample_corpus(20)


def test_two_vertex_plan_draws_clean():
    b = GraphBuilder()
    b.vertex("a")
    b.vertex("b")
    b.connect("a", "b")
    res = run_layout(b.build())
    assert res.record.crossings == 0
    assert res.violations == []


def test_run_layout_is_deterministic():
    g = normalized_graph(sample_plan(2, 45))
    cfg = PipelineConfig(orient_method="fd", runs=2, seed=5, timing=False)
    r1 = run_layout(g, cfg)
    r2 = run_layout(g, cfg)
    assert r1.record == r2.record
    assert [e.points for e in r1.drawing.edges] == [e.points for e in r2.drawing.edges]
    assert [v.rect for v in r1.drawing.vertices] == [v.rect for v in r2.drawing.vertices]


def test_best_of_runs_keeps_fewest_crossings():
    g = normalized_graph(sample_plan(3, 60))
    cfg = PipelineConfig(orient_method="rand", runs=6, seed=11, timing=False)
    best = run_layout(g, cfg).record.crossings
    records, _ = run_records(g, cfg)
    assert best == min(r.crossings for r in records)


def test_timing_switch_controls_elapsed():
    g = normalized_graph(sample_plan(4, 40))
    cold = PipelineConfig(orient_method="bfs", timing=False)
    warm = PipelineConfig(orient_method="bfs")
    assert all(r.elapsed == 0.0 for r in run_records(g, cold)[0])
    assert all(r.elapsed > 0.0 for r in run_records(g, warm)[0])


def test_sample_plans_draw_without_violations():
    for i, (name, plan) in enumerate(sample_corpus(6, base_seed=30, sizes=(40, 70)).items()):
        g = normalized_graph(plan)
        res = run_layout(g, PipelineConfig(orient_method="bfs", seed=i))
        assert res.violations == [], f"{name}: {res.violations[:3]}"


def test_bench_tables_and_csv():
    plans = {k: normalized_graph(p)
             for k, p in sample_corpus(2, base_seed=60, sizes=(40, 50)).items()}
    variants = {
        "bfs": PipelineConfig(orient_method="bfs", runs=2, seed=1, timing=False),
        "rand": PipelineConfig(orient_method="rand", runs=2, seed=1, timing=False),
    }
    res = run_bench(plans, variants, baseline="bfs")
    assert set(res.tables) == set(METRIC_FIELDS)
    for metric in METRIC_FIELDS:
        assert set(res.tables[metric]) == {"bfs", "rand"}
    assert res.tables["crossings"]["bfs"].mu == 1.0

    rows = res.csv_rows()
    assert len(rows) == 2 * 2 * 2
    text = render_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + len(rows)

    table = render_table(res.tables, "bfs")
    assert "baseline: bfs" in table
    assert "| crossings |" in table


def test_bench_parallel_matches_serial():
    plans = {"p": normalized_graph(sample_plan(9, 40))}
    variants = {"bfs": PipelineConfig(orient_method="bfs", runs=2, timing=False)}
    serial = run_bench(plans, variants, baseline="bfs")
    parallel = run_bench(plans, variants, baseline="bfs", jobs=2)
    assert serial.records == parallel.records


def test_bench_missing_baseline_raises():
    plans = {"p": normalized_graph(sample_plan(9, 40))}
    with pytest.raises(ValueError):
        run_bench(plans, {"bfs": PipelineConfig(orient_method="bfs")}, baseline="fd")


def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        PipelineConfig(runs=0)
    with pytest.raises(ValueError):
        PipelineConfig(delta=-1.0)
