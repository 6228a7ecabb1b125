"""Deterministic synthetic cable plans, for tests, demos, and benchmarks."""
from __future__ import annotations

import random

from portline.planfile import (RawEdge, RawPairing, RawPlan, RawPort,
                               RawPortGroup, RawVertex)

SIZE_RANGE = (40, 150)


def sample_plan(seed: int, n_vertices: int | None = None) -> RawPlan:
    """One connected plan: port groups, pairings, parallel and hyper edges.

    Pure function of the arguments.  Group sides stay Top/Bottom/Free so the
    drawn output is checkable against the plan without wall rewrites.
    """
    rng = random.Random(seed)
    n = n_vertices if n_vertices is not None else rng.randint(*SIZE_RANGE)
    if n < 2:
        raise ValueError("a plan needs at least two vertices")

    vertices = tuple(RawVertex(id=f"v{i:03d}") for i in range(n))
    ports: list[RawPort] = []
    port_groups: list[RawPortGroup] = []
    pairings: list[RawPairing] = []
    vertex_ports: dict[str, list[str]] = {}

    for v in vertices:
        count = rng.choices((2, 3, 4, 5), weights=(3, 4, 2, 1))[0]
        mine = [f"{v.id}p{j}" for j in range(count)]
        ports += [RawPort(id=p, vertex=v.id) for p in mine]
        vertex_ports[v.id] = mine
        loose = list(mine)
        if count >= 3 and rng.random() < 0.4:
            take = rng.randint(2, count - 1)
            members = loose[:take]
            loose = loose[take:]
            port_groups.append(RawPortGroup(
                id=f"{v.id}g", vertex=v.id,
                side=rng.choice(("Free", "Free", "Top", "Bottom")),
                fixed=rng.random() < 0.3, children=tuple(members)))
        if len(loose) >= 2 and rng.random() < 0.25:
            pairings.append(RawPairing(id=f"{v.id}pr", ports=(loose[0], loose[1])))

    def port_of(vid: str) -> str:
        return rng.choice(vertex_ports[vid])

    edges: list[RawEdge] = []

    def link(eid: str, vids: tuple[str, ...]) -> None:
        edges.append(RawEdge(id=eid, ports=tuple(port_of(v) for v in vids)))

    ids = [v.id for v in vertices]
    for i in range(1, n):
        link(f"e{len(edges):04d}", (ids[rng.randrange(i)], ids[i]))
    for _ in range(round(0.25 * n)):
        a, b = rng.sample(ids, 2)
        link(f"e{len(edges):04d}", (a, b))
    for _ in range(max(1, n // 30)):
        a, b = rng.sample(ids, 2)
        eid = f"e{len(edges):04d}"
        link(eid, (a, b))
        link(eid + "x", (a, b))  # deliberate parallel pair
    for _ in range(max(1, n // 40)):
        arity = rng.choice((3, 3, 4))
        link(f"h{len(edges):04d}", tuple(rng.sample(ids, arity)))

    return RawPlan(vertices=vertices, ports=tuple(ports),
                   port_groups=tuple(port_groups),
                   port_pairings=tuple(pairings), edges=tuple(edges))


def sample_corpus(count: int, base_seed: int = 0,
                  sizes: tuple[int, int] = SIZE_RANGE) -> dict[str, RawPlan]:
    """``count`` plans named plan000..., sizes spread across ``sizes``.

    The spread is quadratic: the whole range is covered but small plans
    outnumber large ones, like the long-tailed sizes of real cable plans.
    """
    lo, hi = sizes
    out: dict[str, RawPlan] = {}
    for i in range(count):
        frac = (i / (count - 1)) ** 2 if count > 1 else 0.0
        out[f"plan{i:03d}"] = sample_plan(base_seed + i, lo + round((hi - lo) * frac))
    return out
