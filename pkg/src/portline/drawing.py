"""Geometric primitives for finished layouts.

Coordinates are mathematical (y grows upward, layer 0 lowest); the SVG
writer flips the y axis on output.  All coordinates produced by the
pipeline land on a 0.25 grid, so equality checks are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from portline.model import Side

Point = tuple[float, float]


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def center(self) -> Point:
        return ((self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2)

    def overlaps(self, other: "Rect", eps: float = 1e-9) -> bool:
        """True if the interiors intersect (shared boundaries do not count)."""
        return (self.x0 < other.x1 - eps and other.x0 < self.x1 - eps
                and self.y0 < other.y1 - eps and other.y0 < self.y1 - eps)

    def contains_point(self, p: Point, eps: float = 1e-9) -> bool:
        return self.x0 - eps <= p[0] <= self.x1 + eps and self.y0 - eps <= p[1] <= self.y1 + eps


@dataclass
class DrawnVertex:
    id: str
    rect: Rect
    label: str = ""


@dataclass
class DrawnPort:
    id: str
    vertex: str
    rect: Rect
    side: Side


@dataclass
class DrawnEdge:
    id: str
    points: tuple[Point, ...]

    def bends(self) -> int:
        pts = simplify(self.points)
        return max(0, len(pts) - 2)

    def segments(self) -> list[tuple[Point, Point]]:
        pts = simplify(self.points)
        return [(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]


@dataclass
class Drawing:
    vertices: list[DrawnVertex] = field(default_factory=list)
    ports: list[DrawnPort] = field(default_factory=list)
    edges: list[DrawnEdge] = field(default_factory=list)
    pairings: list[tuple[str, str]] = field(default_factory=list)

    def port_by_id(self) -> dict[str, DrawnPort]:
        return {p.id: p for p in self.ports}

    def bbox(self) -> Rect:
        xs: list[float] = []
        ys: list[float] = []
        for v in self.vertices:
            xs += [v.rect.x0, v.rect.x1]
            ys += [v.rect.y0, v.rect.y1]
        for p in self.ports:
            xs += [p.rect.x0, p.rect.x1]
            ys += [p.rect.y0, p.rect.y1]
        for e in self.edges:
            xs += [pt[0] for pt in e.points]
            ys += [pt[1] for pt in e.points]
        if not xs:
            return Rect(0.0, 0.0, 0.0, 0.0)
        return Rect(min(xs), min(ys), max(xs), max(ys))

    def total_bends(self) -> int:
        return sum(e.bends() for e in self.edges)


def simplify(points: tuple[Point, ...]) -> tuple[Point, ...]:
    """Drop repeated and collinear interior points of an orthogonal chain."""
    out: list[Point] = []
    for pt in points:
        if out and out[-1] == pt:
            continue
        while len(out) >= 2:
            ax, ay = out[-2]
            bx, by = out[-1]
            if (ax == bx == pt[0]) or (ay == by == pt[1]):
                out.pop()
            else:
                break
        out.append(pt)
    return tuple(out)
