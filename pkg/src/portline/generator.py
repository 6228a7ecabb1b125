"""Pseudo-plan generation: corpus statistics, targets, delete and insert."""
from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from statistics import fmean, median, pstdev

from portline.planfile import (RawEdge, RawPairing, RawPlan, RawPort,
                               RawPortGroup, RawVertex, RawVertexGroup)

SCALARS = ("vertex_groups", "vertices", "ports", "port_pairings",
           "self_loops", "parallel_edge_mean")
DISTS = ("edge_port_incidence", "ports_per_edge", "edges_per_port")


@dataclass(frozen=True)
class FeatureStat:
    mean: float
    std: float


@dataclass(frozen=True)
class CorpusStats:
    count: int
    vertex_groups: FeatureStat
    vertices: FeatureStat
    ports: FeatureStat
    port_pairings: FeatureStat
    self_loops: FeatureStat
    parallel_edge_mean: FeatureStat
    # pooled empirical distributions, each summing to 1
    edge_port_incidence: dict[int, float]
    ports_per_edge: dict[int, float]
    edges_per_port: dict[int, float]


@dataclass(frozen=True)
class GenConfig:
    q: float = 0.05
    c: int = 1000
    std_scale: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.q < 1:
            raise ValueError("q must be strictly between 0 and 1")
        if self.c < 1:
            raise ValueError("c must be at least 1")
        if self.std_scale <= 0:
            raise ValueError("std_scale must be positive")


@dataclass(frozen=True)
class Targets:
    vertex_groups: int
    vertices: int
    ports: int
    port_pairings: int
    self_loops: int
    parallel_edge_mean: float
    edge_port_incidence: dict[int, float]
    ports_per_edge: dict[int, float]
    edges_per_port: dict[int, float]


def plan_features(plan: RawPlan) -> dict:
    """Scalar features and incidence histograms of one plan.

    edge_port_incidence counts the edge endpoints landing on each vertex;
    edges_per_port and ports_per_edge are the two sides of the edge-port
    incidence relation.
    """
    vertex_of = {p.id: p.vertex for p in plan.ports}
    self_loops = 0
    mult: Counter[tuple[str, str]] = Counter()
    incid: Counter[str] = Counter()
    per_port: Counter[str] = Counter()
    arity: Counter[int] = Counter()
    for e in plan.edges:
        owners = [vertex_of[p] for p in e.ports]
        arity[len(e.ports)] += 1
        for p, v in zip(e.ports, owners):
            incid[v] += 1
            per_port[p] += 1
        if len(set(owners)) == 1:
            self_loops += 1
        elif len(owners) == 2:
            a, b = owners
            mult[(a, b) if a <= b else (b, a)] += 1
    return {
        "vertex_groups": len(plan.vertex_groups),
        "vertices": len(plan.vertices),
        "ports": len(plan.ports),
        "port_pairings": len(plan.port_pairings),
        "self_loops": self_loops,
        "parallel_edge_mean": fmean(mult.values()) if mult else 0.0,
        "edge_port_incidence": Counter(incid[v.id] for v in plan.vertices),
        "ports_per_edge": arity,
        "edges_per_port": Counter(per_port[p.id] for p in plan.ports),
    }


def _pool(counters: list[Counter[int]]) -> dict[int, float]:
    total: Counter[int] = Counter()
    for c in counters:
        total.update(c)
    norm = sum(total.values())
    if norm == 0:
        return {}
    return {k: total[k] / norm for k in sorted(total)}


def corpus_stats(plans: list[RawPlan]) -> CorpusStats:
    if not plans:
        raise ValueError("corpus is empty")
    feats = [plan_features(p) for p in plans]

    def stat(name: str) -> FeatureStat:
        vals = [f[name] for f in feats]
        return FeatureStat(fmean(vals), pstdev(vals))

    return CorpusStats(
        count=len(plans),
        **{name: stat(name) for name in SCALARS},
        **{name: _pool([f[name] for f in feats]) for name in DISTS},
    )


def sample_targets(stats: CorpusStats, plan: RawPlan, config: GenConfig) -> Targets:
    """Per-feature normal draws centered on the source plan's own values."""
    rng = random.Random(config.seed)
    own = plan_features(plan)
    out: dict[str, object] = {}
    for name in SCALARS:
        sigma = getattr(stats, name).std / (stats.count * config.std_scale)
        value = rng.gauss(own[name], sigma)
        if name != "parallel_edge_mean":
            value = round(value)
        out[name] = max(0, value) if name != "parallel_edge_mean" else max(0.0, value)
    for name in DISTS:
        out[name] = dict(getattr(stats, name))
    return Targets(**out)


# --- delete phase -----------------------------------------------------------

class _Working:
    """Mutable plan view with cascading removals."""

    def __init__(self, plan: RawPlan) -> None:
        self.plan = plan
        self.dead_vertices: set[str] = set()
        self.dead_ports: set[str] = set()
        self.dead_edges: set[str] = set()
        self.dead_pairings: set[str] = set()
        self.dead_vgroups: set[str] = set()
        self.ports_of: dict[str, list[str]] = {v.id: [] for v in plan.vertices}
        for p in plan.ports:
            self.ports_of[p.vertex].append(p.id)
        self.edges_of: dict[str, list[str]] = {}
        for e in plan.edges:
            for p in e.ports:
                self.edges_of.setdefault(p, []).append(e.id)
        self.pairings_of: dict[str, list[RawPairing]] = {}
        for pr in plan.port_pairings:
            for p in pr.ports:
                self.pairings_of.setdefault(p, []).append(pr)
        self.edge_by_id = {e.id: e for e in plan.edges}
        self.vgroup_by_id = {g.id: g for g in plan.vertex_groups}

    def remove_port(self, pid: str, with_pairing: bool = True) -> None:
        if pid in self.dead_ports:
            return
        self.dead_ports.add(pid)
        for eid in self.edges_of.get(pid, []):
            self.dead_edges.add(eid)
        if with_pairing:
            for pr in self.pairings_of.get(pid, []):
                self.dead_pairings.add(pr.id)

    def remove_pairing(self, pr: RawPairing) -> None:
        # the pairing's ports and their edges go down with it
        self.dead_pairings.add(pr.id)
        for pid in pr.ports:
            self.remove_port(pid)

    def remove_vertex(self, vid: str) -> None:
        if vid in self.dead_vertices:
            return
        self.dead_vertices.add(vid)
        for pid in self.ports_of.get(vid, []):
            self.remove_port(pid)

    def remove_vertex_group(self, gid: str) -> None:
        self.dead_vgroups.add(gid)
        for vid in self.vgroup_by_id[gid].vertices:
            self.remove_vertex(vid)

    def alive(self) -> RawPlan:
        plan = self.plan
        vertices = tuple(v for v in plan.vertices if v.id not in self.dead_vertices)
        ports = tuple(p for p in plan.ports if p.id not in self.dead_ports
                      and p.vertex not in self.dead_vertices)
        port_ids = {p.id for p in ports}
        pairings = tuple(pr for pr in plan.port_pairings
                         if pr.id not in self.dead_pairings
                         and set(pr.ports) <= port_ids)
        edges = tuple(e for e in plan.edges if e.id not in self.dead_edges
                      and set(e.ports) <= port_ids)
        vgroups = []
        for g in plan.vertex_groups:
            if g.id in self.dead_vgroups:
                continue
            members = tuple(v for v in g.vertices if v.id not in self.dead_vertices)
            if members:
                vgroups.append(RawVertexGroup(id=g.id, vertices=members))
        # port groups: filter dead children, then drop empty shells inside out
        kept: dict[str, RawPortGroup] = {}
        for g in plan.port_groups:
            if g.vertex and g.vertex in self.dead_vertices:
                continue
            kept[g.id] = g
        changed = True
        while changed:
            changed = False
            for gid, g in list(kept.items()):
                children = tuple(c for c in g.children
                                 if (c in port_ids) or (c in kept and c != gid))
                if not children:
                    del kept[gid]
                    changed = True
                elif children != g.children:
                    kept[gid] = RawPortGroup(id=g.id, vertex=g.vertex, side=g.side,
                                             fixed=g.fixed, children=children)
                    changed = True
        pgroups = tuple(kept[g.id] for g in plan.port_groups if g.id in kept)
        return RawPlan(vertices=vertices, vertex_groups=tuple(vgroups), ports=ports,
                       port_groups=pgroups, port_pairings=pairings, edges=edges)


def delete_phase(plan: RawPlan, q: float, seed: int) -> RawPlan:
    """Remove a q-fraction per category, cascading dependents.

    Category order: vertex groups (with member vertices), vertices (with
    ports and edges), port pairings (with their ports and edges), ports
    (with edges), edges.  Quotas are ceil(q * original count); picks are
    uniform over the survivors of the earlier categories.
    """
    rng = random.Random(seed)
    w = _Working(plan)

    def quota(n: int) -> int:
        return math.ceil(q * n)

    pool = sorted(w.vgroup_by_id)
    for gid in rng.sample(pool, min(quota(len(pool)), len(pool))):
        w.remove_vertex_group(gid)

    pool = sorted(v.id for v in plan.vertices if v.id not in w.dead_vertices)
    for vid in rng.sample(pool, min(quota(len(plan.vertices)), len(pool))):
        w.remove_vertex(vid)

    live_pairs = [pr for pr in plan.port_pairings
                  if pr.id not in w.dead_pairings
                  and not any(p in w.dead_ports for p in pr.ports)]
    k = min(quota(len(plan.port_pairings)), len(live_pairs))
    order = {pr.id: pr for pr in live_pairs}
    for prid in rng.sample(sorted(order), k):
        w.remove_pairing(order[prid])

    pool = sorted(p.id for p in plan.ports if p.id not in w.dead_ports)
    for pid in rng.sample(pool, min(quota(len(plan.ports)), len(pool))):
        w.remove_port(pid)

    pool = sorted(e.id for e in plan.edges if e.id not in w.dead_edges)
    for eid in rng.sample(pool, min(quota(len(plan.edges)), len(pool))):
        w.dead_edges.add(eid)

    return w.alive()


# --- insert phase -----------------------------------------------------------

def _draw(rng: random.Random, dist: dict[int, float], default: int) -> int:
    if not dist:
        return default
    keys = sorted(dist)
    return rng.choices(keys, weights=[dist[k] for k in keys])[0]


class _Hist:
    """Histogram with a running L1 distance to a target distribution."""

    def __init__(self, counts: Counter[int], denom: int, target: dict[int, float]) -> None:
        self.counts = counts
        self.denom = max(denom, 1)
        self.target = target
        self.l1 = sum(abs(self.prob(b) - target.get(b, 0.0))
                      for b in set(counts) | set(target))

    def prob(self, b: int) -> float:
        return self.counts.get(b, 0) / self.denom

    def shift_gain(self, deltas: dict[int, int]) -> float:
        """L1 change if bins move by the given counts (denominator fixed)."""
        gain = 0.0
        for b, dc in deltas.items():
            if dc == 0:
                continue
            t = self.target.get(b, 0.0)
            gain += abs(self.prob(b) + dc / self.denom - t) - abs(self.prob(b) - t)
        return gain

    def apply(self, deltas: dict[int, int]) -> None:
        self.l1 += self.shift_gain(deltas)
        for b, dc in deltas.items():
            self.counts[b] += dc
            if self.counts[b] == 0:
                del self.counts[b]


def _full_l1(counts: Counter[int], denom: int, target: dict[int, float]) -> float:
    denom = max(denom, 1)
    return sum(abs(counts.get(b, 0) / denom - target.get(b, 0.0))
               for b in set(counts) | set(target))


@dataclass
class _InsertState:
    vertex_of: dict[str, str]
    mult: Counter[tuple[str, str]] = field(default_factory=Counter)
    mult_total: int = 0
    self_loops: int = 0
    incid_count: Counter[str] = field(default_factory=Counter)
    n_edges: int = 0
    incid: _Hist | None = None
    arity: Counter[int] = field(default_factory=Counter)
    per_port: _Hist | None = None

    def pem(self) -> float:
        return self.mult_total / len(self.mult) if self.mult else 0.0


def _score(st: _InsertState, t: Targets, cand: tuple[str, ...],
           arity_l1_after: float, per_port_gain: float) -> float:
    owners = [st.vertex_of[p] for p in cand]
    sl = st.self_loops
    pem = st.pem()
    if len(set(owners)) == 1:
        sl += 1
    elif len(owners) == 2:
        a, b = owners
        key = (a, b) if a <= b else (b, a)
        pairs = len(st.mult) + (0 if key in st.mult else 1)
        pem = (st.mult_total + 1) / pairs
    deltas: dict[int, int] = {}
    for v, c in Counter(owners).items():
        b0 = st.incid_count[v]
        deltas[b0] = deltas.get(b0, 0) - 1
        deltas[b0 + c] = deltas.get(b0 + c, 0) + 1
    incid_l1 = st.incid.l1 + st.incid.shift_gain(deltas)
    per_port_l1 = st.per_port.l1 + per_port_gain
    return (abs(pem - t.parallel_edge_mean) / max(t.parallel_edge_mean, 1.0)
            + abs(sl - t.self_loops) / max(t.self_loops, 1)
            + incid_l1 / 2 + arity_l1_after / 2 + per_port_l1 / 2)


def _apply_edge(st: _InsertState, cand: tuple[str, ...]) -> None:
    owners = [st.vertex_of[p] for p in cand]
    if len(set(owners)) == 1:
        st.self_loops += 1
    elif len(owners) == 2:
        a, b = owners
        key = (a, b) if a <= b else (b, a)
        st.mult[key] += 1
        st.mult_total += 1
    deltas: dict[int, int] = {}
    for v, c in Counter(owners).items():
        b0 = st.incid_count[v]
        deltas[b0] = deltas.get(b0, 0) - 1
        deltas[b0 + c] = deltas.get(b0 + c, 0) + 1
        st.incid_count[v] += c
    st.incid.apply(deltas)
    st.per_port.apply({0: -len(cand), 1: len(cand)})
    st.arity[len(cand)] += 1
    st.n_edges += 1


def _fresh_ids(prefix: str, taken: set[str]):
    i = 0
    while True:
        i += 1
        cand = f"{prefix}{i:04d}"
        if cand not in taken:
            taken.add(cand)
            yield cand


def insert_phase(plan: RawPlan, targets: Targets,
                 config: GenConfig) -> tuple[RawPlan, list[str]]:
    """Grow the plan back toward the targets; returns (plan, warnings).

    Elements are added per category in the delete order; connectivity is
    restored first among edges, and each further edge takes the best of
    ``config.c`` uniformly drawn endpoint sets over ports that do not have
    edges yet.
    """
    rng = random.Random(config.seed * 2_654_435_761 % (2 ** 31) + 7)
    warnings: list[str] = []
    taken = {el.id for coll in (plan.vertices, plan.vertex_groups, plan.ports,
                                plan.port_groups, plan.port_pairings, plan.edges)
             for el in coll}
    vertices = list(plan.vertices)
    vgroups = list(plan.vertex_groups)
    ports = list(plan.ports)
    pairings = list(plan.port_pairings)
    edges = list(plan.edges)

    new_vertex = _fresh_ids("gv", taken)
    new_port = _fresh_ids("gp", taken)
    new_edge = _fresh_ids("ge", taken)
    new_vgroup = _fresh_ids("gg", taken)
    new_pairing = _fresh_ids("gq", taken)

    # vertex groups, over vertices not grouped yet
    grouped = {v for g in vgroups for v in g.vertices}
    free_vertices = sorted(v.id for v in vertices if v.id not in grouped)
    while len(vgroups) < targets.vertex_groups:
        size = min(rng.choice((2, 2, 3)), len(free_vertices))
        if size < 2:
            warnings.append("vertex-group target unreachable: too few loose vertices")
            break
        members = rng.sample(free_vertices, size)
        for m in members:
            free_vertices.remove(m)
        vgroups.append(RawVertexGroup(id=next(new_vgroup), vertices=tuple(sorted(members))))

    while len(vertices) < targets.vertices:
        vid = next(new_vertex)
        vertices.append(RawVertex(id=vid))
        free_vertices.append(vid)

    # pairings bring their own two ports, mirroring the delete cascade
    vertex_ids = [v.id for v in vertices]
    while len(pairings) < targets.port_pairings:
        vid = rng.choice(vertex_ids)
        pa, pb = next(new_port), next(new_port)
        ports += [RawPort(id=pa, vertex=vid), RawPort(id=pb, vertex=vid)]
        pairings.append(RawPairing(id=next(new_pairing), ports=(pa, pb)))

    while len(ports) < targets.ports:
        ports.append(RawPort(id=next(new_port), vertex=rng.choice(vertex_ids)))

    # edge bookkeeping for scoring
    vertex_of = {p.id: p.vertex for p in ports}
    st = _InsertState(vertex_of=vertex_of)
    used: set[str] = set()
    for e in edges:
        owners = [vertex_of[p] for p in e.ports]
        used.update(e.ports)
        st.arity[len(e.ports)] += 1
        for v in owners:
            st.incid_count[v] += 1
        if len(set(owners)) == 1:
            st.self_loops += 1
        elif len(owners) == 2:
            a, b = owners
            key = (a, b) if a <= b else (b, a)
            st.mult[key] += 1
            st.mult_total += 1
    st.n_edges = len(edges)
    incid_counts = Counter(st.incid_count[v] for v in vertex_ids)
    st.incid = _Hist(incid_counts, len(vertices), targets.edge_port_incidence)
    edges_on: Counter[str] = Counter()
    for e in edges:
        edges_on.update(e.ports)
    per_port_counts = Counter(edges_on[p.id] for p in ports)
    st.per_port = _Hist(per_port_counts, len(ports), targets.edges_per_port)

    pool = sorted(p.id for p in ports if p.id not in used)

    def connect(cand: tuple[str, ...]) -> None:
        edges.append(RawEdge(id=next(new_edge), ports=cand))
        _apply_edge(st, cand)
        for p in cand:
            pool.remove(p)

    # reconnect components first
    comp = {v: v for v in vertex_ids}

    def find(v: str) -> str:
        while comp[v] != v:
            comp[v] = comp[comp[v]]
            v = comp[v]
        return v

    for e in edges:
        owners = {vertex_of[p] for p in e.ports}
        first, *rest = owners
        for o in rest:
            comp[find(o)] = find(first)
    groups: dict[str, list[str]] = {}
    for v in vertex_ids:
        groups.setdefault(find(v), []).append(v)
    components = sorted(groups.values(), key=lambda vs: min(vs))
    if len(components) > 1:
        anchor = components[0]
        for other in components[1:]:
            legs = []
            for vs in (anchor, other):
                cands = [p for p in pool if vertex_of[p] in set(vs)]
                if cands:
                    legs.append(rng.choice(sorted(cands)))
                else:
                    vid = rng.choice(sorted(vs))
                    pid = next(new_port)
                    ports.append(RawPort(id=pid, vertex=vid))
                    vertex_of[pid] = vid
                    st.per_port.counts[0] += 1
                    st.per_port.denom += 1
                    st.per_port.l1 = _full_l1(st.per_port.counts, st.per_port.denom,
                                              targets.edges_per_port)
                    pool.append(pid)
                    pool.sort()
                    legs.append(pid)
            connect(tuple(legs))
            anchor = anchor + other

    # remaining edges: candidate sets scored against the targets
    while len(pool) >= 2:
        k = min(max(2, _draw(rng, targets.ports_per_edge, 2)), len(pool))
        arity_after = Counter(st.arity)
        arity_after[k] += 1
        arity_l1_after = _full_l1(arity_after, st.n_edges + 1, targets.ports_per_edge)
        per_port_gain = st.per_port.shift_gain({0: -k, 1: k})
        best: tuple[float, tuple[str, ...]] | None = None
        for _ in range(config.c):
            cand = tuple(rng.sample(pool, k))
            score = _score(st, targets, cand, arity_l1_after, per_port_gain)
            if best is None or score < best[0]:
                best = (score, cand)
        connect(best[1])

    plan_out = RawPlan(vertices=tuple(vertices), vertex_groups=tuple(vgroups),
                       ports=tuple(ports), port_groups=plan.port_groups,
                       port_pairings=tuple(pairings), edges=tuple(edges))
    return plan_out, warnings


def generate_plan(source: RawPlan, stats: CorpusStats,
                  config: GenConfig) -> tuple[RawPlan, list[str]]:
    """Delete a q-fraction of the source, then grow back toward targets."""
    targets = sample_targets(stats, source, config)
    trimmed = delete_phase(source, config.q, config.seed + 1)
    return insert_phase(trimmed, targets, config)


# --- similarity report ------------------------------------------------------

def largest_component_diameter(plan: RawPlan) -> int:
    """Exact diameter of the largest connected component, hop metric."""
    vertex_of = {p.id: p.vertex for p in plan.ports}
    adj: dict[str, set[str]] = {v.id: set() for v in plan.vertices}
    for e in plan.edges:
        owners = sorted({vertex_of[p] for p in e.ports})
        for i, a in enumerate(owners):
            for b in owners[i + 1:]:
                adj[a].add(b)
                adj[b].add(a)

    def bfs(start: str) -> dict[str, int]:
        dist = {start: 0}
        frontier = [start]
        while frontier:
            nxt = []
            for v in frontier:
                for u in adj[v]:
                    if u not in dist:
                        dist[u] = dist[v] + 1
                        nxt.append(u)
            frontier = nxt
        return dist

    seen: set[str] = set()
    component: list[str] = []
    for v in sorted(adj):
        if v in seen:
            continue
        reach = bfs(v)
        seen.update(reach)
        if len(reach) > len(component):
            component = sorted(reach)
    if not component:
        return 0
    return max(max(bfs(v).values()) for v in component)


@dataclass(frozen=True)
class SimilarityRow:
    feature: str
    original_mean: float
    original_median: float
    generated_mean: float
    generated_median: float
    deviation: float
    flagged: bool


def similarity_report(original: list[RawPlan], generated: list[RawPlan],
                      band: float = 0.15) -> list[SimilarityRow]:
    """Mean/median comparison for vertices, parallel edges, and diameter."""

    def values(plans: list[RawPlan], feature: str) -> list[float]:
        if feature == "diameter":
            return [float(largest_component_diameter(p)) for p in plans]
        return [float(plan_features(p)[feature]) for p in plans]

    rows = []
    for feature in ("vertices", "parallel_edge_mean", "diameter"):
        ov, gv = values(original, feature), values(generated, feature)
        om, gm = fmean(ov), fmean(gv)
        deviation = abs(gm - om) / om if om else (0.0 if gm == om else math.inf)
        rows.append(SimilarityRow(feature, om, median(ov), gm, median(gv),
                                  deviation, deviation > band))
    return rows
