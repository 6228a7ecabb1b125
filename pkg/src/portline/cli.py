"""Command line front: layout, stats, generate, bench."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from portline import coords
from portline.crossmin import SweepConfig
from portline.generator import (GenConfig, corpus_stats, generate_plan,
                                plan_features, similarity_report)
from portline.pipeline import (CSV_HEADER, PipelineConfig, render_csv,
                               render_table, run_bench, run_layout)
from portline.planfile import (PlanError, normalized_graph, parse_plan,
                               serialize_plan)
from portline.svg import emit_svg


def _env_seed() -> int:
    raw = os.environ.get("PORTLINE_SEED", "")
    try:
        return int(raw)
    except ValueError:
        return 0


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--orient", choices=("fd", "bfs", "rand"), default="fd")
    p.add_argument("--fd-iterations", type=int, default=500, metavar="N")
    p.add_argument("--fd-restarts", type=int, default=1, metavar="K")
    p.add_argument("--cross", choices=("vertices", "ports", "mixed"), default="ports")
    p.add_argument("--sink", choices=("pseudo", "opposite", "relpos"), default="relpos")
    p.add_argument("--reps", type=int, default=1, metavar="R",
                   help="crossing-minimization restarts per run")
    p.add_argument("--min-port-distance", type=float, default=coords.DELTA, metavar="D")
    p.add_argument("--break-threshold-multiple", type=float,
                   default=coords.BREAK_MULTIPLE, metavar="M")
    p.add_argument("--runs", type=int, default=1, metavar="N",
                   help="layout runs per plan; the fewest-crossings one wins")
    p.add_argument("--seed", type=int, default=None, metavar="S",
                   help="base seed (default: $PORTLINE_SEED or 0)")
    p.add_argument("--timing", choices=("wall", "none"), default="wall",
                   help="'none' zeroes reported times, for byte-stable output")


def _pipeline_config(args, orient: str | None = None) -> PipelineConfig:
    seed = args.seed if args.seed is not None else _env_seed()
    return PipelineConfig(
        orient_method=orient or args.orient,
        fd_iterations=args.fd_iterations,
        fd_restarts=args.fd_restarts,
        sweep=SweepConfig(granularity=args.cross, sink=args.sink,
                          repetitions=args.reps),
        delta=args.min_port_distance,
        break_multiple=args.break_threshold_multiple,
        runs=args.runs,
        seed=seed,
        timing=args.timing == "wall",
    )


def _read_plan(path: Path):
    return parse_plan(path.read_bytes())


def _read_corpus(directory: Path) -> dict[str, object]:
    files = sorted(directory.glob("*.json"))
    if not files:
        raise PlanError(f"no .json plans under {directory}")
    return {f.stem: _read_plan(f) for f in files}


def cmd_layout(args) -> int:
    path = Path(args.plan)
    graph = normalized_graph(_read_plan(path))
    res = run_layout(graph, _pipeline_config(args))
    out = Path(args.out) if args.out else path.with_suffix(".svg")
    out.write_bytes(emit_svg(res.drawing, title=path.stem))
    if args.csv:
        row = (path.stem, args.orient, 0) + tuple(
            getattr(res.record, f) for f in
            ("crossings", "bends", "width", "height", "area", "aspect", "elapsed"))
        Path(args.csv).write_text(render_csv([row]))
    r = res.record
    print(f"{path.stem}: crossings={r.crossings} bends={r.bends} "
          f"size={r.width:g}x{r.height:g} time={r.elapsed:.1f}ms "
          f"violations={len(res.violations)} -> {out}")
    for v in res.violations[:10]:
        print(f"  violation: {v}", file=sys.stderr)
    for note in res.notes:
        print(f"  note: {note}", file=sys.stderr)
    return 0 if not res.violations else 1


def cmd_stats(args) -> int:
    corpus = _read_corpus(Path(args.corpus))
    stats = corpus_stats(list(corpus.values()))
    print(f"plans: {stats.count}")
    print("| feature | mean | std |")
    print("| --- | --- | --- |")
    for name in ("vertex_groups", "vertices", "ports", "port_pairings",
                 "self_loops", "parallel_edge_mean"):
        s = getattr(stats, name)
        print(f"| {name} | {s.mean:.3f} | {s.std:.3f} |")
    for name in ("edge_port_incidence", "ports_per_edge", "edges_per_port"):
        dist = getattr(stats, name)
        pairs = " ".join(f"{k}:{v:.3f}" for k, v in sorted(dist.items()))
        print(f"{name}: {pairs}")
    return 0


def cmd_generate(args) -> int:
    corpus = _read_corpus(Path(args.corpus))
    stats = corpus_stats(list(corpus.values()))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else _env_seed()
    outputs = []
    i = 0
    for name, plan in corpus.items():
        for j in range(args.per_plan):
            cfg = GenConfig(q=args.q, c=args.c, std_scale=args.std_scale,
                            seed=seed + i)
            i += 1
            generated, warnings = generate_plan(plan, stats, cfg)
            outputs.append(generated)
            target = out_dir / f"{name}_gen{j}.json"
            target.write_text(serialize_plan(generated))
            for w in warnings:
                print(f"{target.name}: {w}", file=sys.stderr)
            print(f"{target} vertices={len(generated.vertices)} "
                  f"edges={len(generated.edges)}")
    print()
    print("| feature | source mean | source median | generated mean "
          "| generated median | deviation |")
    print("| --- | --- | --- | --- | --- | --- |")
    for row in similarity_report(list(corpus.values()), outputs):
        flag = " (!)" if row.flagged else ""
        print(f"| {row.feature} | {row.original_mean:.3f} | "
              f"{row.original_median:.3f} | {row.generated_mean:.3f} | "
              f"{row.generated_median:.3f} | {row.deviation * 100:.1f}%{flag} |")
    return 0


def cmd_bench(args) -> int:
    corpus = _read_corpus(Path(args.corpus))
    plans = {name: normalized_graph(plan) for name, plan in corpus.items()}
    orients = args.orients.split(",")
    sinks = args.sinks.split(",")
    variants: dict[str, PipelineConfig] = {}
    for orient in orients:
        for sink in sinks:
            args.sink = sink
            variants[f"{orient}-{args.cross}-{sink}"] = _pipeline_config(args, orient)
    baseline = args.baseline or next(iter(variants))
    res = run_bench(plans, variants, baseline=baseline, jobs=args.jobs, check=True)
    if args.csv:
        Path(args.csv).write_text(render_csv(res.csv_rows()))
    table = render_table(res.tables, baseline)
    if args.table:
        Path(args.table).write_text(table)
    print(table)
    if res.violations:
        print(f"{res.violations} validator violations across runs", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="portline",
        description="Layered orthogonal layout for cable plans with port constraints.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("layout", help="draw one plan file to SVG")
    p.add_argument("plan", help="plan file (JSON)")
    p.add_argument("--out", help="SVG output path (default: plan name .svg)")
    p.add_argument("--csv", help="write the metrics record as CSV")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("stats", help="corpus statistics of a plan directory")
    p.add_argument("corpus", help="directory of .json plans")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("generate", help="derive pseudo plans from a corpus")
    p.add_argument("--corpus", required=True, help="directory of .json plans")
    p.add_argument("--per-plan", type=int, default=3, metavar="N")
    p.add_argument("--q", type=float, default=0.05)
    p.add_argument("--c", type=int, default=1000)
    p.add_argument("--std-scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="variant comparison over a corpus")
    p.add_argument("--corpus", required=True, help="directory of .json plans")
    p.add_argument("--orients", default="fd,bfs,rand",
                   help="comma list of orientation methods")
    p.add_argument("--sinks", default="relpos", help="comma list of sink strategies")
    p.add_argument("--baseline", default=None,
                   help="variant name normalized to 1 (default: first)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", help="write per-run records as CSV")
    p.add_argument("--table", help="write the mu/beta table as Markdown")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PlanError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
