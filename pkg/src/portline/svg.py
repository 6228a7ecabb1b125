"""Deterministic SVG output.

All coordinates are printed with one decimal place, elements are emitted in
id order, and nothing depends on dict iteration or wall time, so the same
drawing always produces byte-identical output.
"""
from __future__ import annotations

from portline.drawing import Drawing

_MARGIN = 10.0


def _f(x: float) -> str:
    s = f"{x:.1f}"
    return "0.0" if s == "-0.0" else s


def emit_svg(drawing: Drawing, title: str = "") -> bytes:
    box = drawing.bbox()
    x0, y0, x1, y1 = box.x0, box.y0, box.x1, box.y1
    width = (x1 - x0) + 2 * _MARGIN
    height = (y1 - y0) + 2 * _MARGIN

    def tx(x: float) -> float:
        return x - x0 + _MARGIN

    def ty(y: float) -> float:
        # Plan coordinates grow upward; SVG grows downward.
        return (y1 - y) + _MARGIN

    out: list[str] = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">'
    )
    if title:
        out.append(f"  <title>{_escape(title)}</title>")
    out.append('  <g fill="none" stroke="#222" stroke-width="1">')
    for e in sorted(drawing.edges, key=lambda e: e.id):
        pts = " ".join(f"{_f(tx(x))},{_f(ty(y))}" for x, y in e.points)
        out.append(f'    <polyline id="e-{_escape(e.id)}" points="{pts}"/>')
    out.append("  </g>")
    out.append('  <g fill="#dde4ee" stroke="#445" stroke-width="1">')
    for v in sorted(drawing.vertices, key=lambda v: v.id):
        r = v.rect
        out.append(
            f'    <rect id="v-{_escape(v.id)}" x="{_f(tx(r.x0))}" y="{_f(ty(r.y1))}" '
            f'width="{_f(r.width)}" height="{_f(r.height)}"/>'
        )
    out.append("  </g>")
    out.append('  <g fill="#333" stroke="none">')
    for p in sorted(drawing.ports, key=lambda p: p.id):
        r = p.rect
        out.append(
            f'    <rect id="p-{_escape(p.id)}" x="{_f(tx(r.x0))}" y="{_f(ty(r.y1))}" '
            f'width="{_f(r.width)}" height="{_f(r.height)}"/>'
        )
    out.append("  </g>")
    out.append('  <g font-family="sans-serif" font-size="7" fill="#111">')
    for v in sorted(drawing.vertices, key=lambda v: v.id):
        if not v.label:
            continue
        cx, cy = v.rect.center
        out.append(
            f'    <text x="{_f(tx(cx))}" y="{_f(ty(cy) + 2.5)}" '
            f'text-anchor="middle">{_escape(v.label)}</text>'
        )
    out.append("  </g>")
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _escape(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))
