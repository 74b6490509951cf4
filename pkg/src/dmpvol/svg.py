"""Minimal deterministic SVG plots of planar trajectories and obstacles."""

from datetime import datetime, timezone
from xml.sax.saxutils import escape

import numpy as np

from .obstacles import PointObstacle, Superquadric, boundary_points

OUTLINE_POINTS = 200
MAX_POLYLINE_POINTS = 2000
PALETTE = ("#d62728", "#2ca02c", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2")


def _num(v):
    text = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if text in ("", "-0") else text


def _outline(sq: Superquadric):
    if sq.dims != 2:
        sq = Superquadric(sq.center[:2], sq.axes[:2], sq.exponents)
    return boundary_points(sq, OUTLINE_POINTS)


class Figure:
    """Collects planar polylines and shapes, then renders one SVG document.

    Coordinates are in world units with ``y`` up; the viewport is fitted
    to everything added.
    """

    def __init__(self, title="", width=640):
        self.title = title
        self.width = width
        self._items = []  # (kind, points, style)
        self._legend = []

    def trajectory(self, positions, color, dashed=False, label=None, width=1.5):
        pts = np.asarray(positions, dtype=float)[:, :2]
        if len(pts) > MAX_POLYLINE_POINTS:
            stride = -(-len(pts) // MAX_POLYLINE_POINTS)
            pts = np.vstack([pts[::stride], pts[-1:]])
        style = f'fill="none" stroke="{color}" stroke-width="{width}"'
        if dashed:
            style += ' stroke-dasharray="6,4"'
        self._items.append(("polyline", pts, style))
        if label:
            self._legend.append((label, color, dashed))

    def obstacle(self, obs, color="#555555"):
        if isinstance(obs, Superquadric):
            self._items.append(("polygon", _outline(obs),
                                f'fill="{color}" fill-opacity="0.25" stroke="{color}" stroke-width="1"'))
        elif isinstance(obs, PointObstacle):
            self._items.append(("dot", obs.position[None, :2], f'fill="{color}"'))
        else:
            raise TypeError(f"cannot draw {obs!r}")

    def marker(self, point, color):
        self._items.append(("dot", np.asarray(point, dtype=float)[None, :2], f'fill="{color}"'))

    def render(self, timestamp=False):
        allpts = np.vstack([pts for _, pts, _ in self._items]) if self._items else np.zeros((1, 2))
        lo, hi = allpts.min(axis=0), allpts.max(axis=0)
        span = np.maximum(hi - lo, 1e-9)
        pad = 0.05 * float(span.max())
        lo, span = lo - pad, span + 2 * pad
        scale = (self.width - 20) / span[0]
        height = int(np.ceil(span[1] * scale)) + 20 + (20 if self.title else 0)
        top = 10 + (20 if self.title else 0)

        def xy(p):
            return _num(10 + (p[0] - lo[0]) * scale), _num(top + (lo[1] + span[1] - p[1]) * scale)

        out = ['<?xml version="1.0" encoding="UTF-8"?>']
        if timestamp:
            out.append(f"<!-- generated {datetime.now(timezone.utc).isoformat(timespec='seconds')} -->")
        out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{height}" '
                   f'viewBox="0 0 {self.width} {height}">')
        out.append(f'<rect width="{self.width}" height="{height}" fill="white"/>')
        if self.title:
            out.append(f'<text x="10" y="20" font-family="sans-serif" font-size="14">{escape(self.title)}</text>')
        for kind, pts, style in self._items:
            if kind == "dot":
                x, y = xy(pts[0])
                out.append(f'<circle cx="{x}" cy="{y}" r="2.5" {style}/>')
                continue
            coords = " ".join(",".join(xy(p)) for p in pts)
            out.append(f'<{kind} points="{coords}" {style}/>')
        for i, (label, color, dashed) in enumerate(self._legend):
            y = top + 14 * i + 4
            dash = ' stroke-dasharray="6,4"' if dashed else ""
            out.append(f'<line x1="{self.width - 150}" y1="{y}" x2="{self.width - 125}" y2="{y}" '
                       f'stroke="{color}" stroke-width="1.5"{dash}/>')
            out.append(f'<text x="{self.width - 120}" y="{y + 4}" font-family="sans-serif" '
                       f'font-size="11">{escape(label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path, timestamp=False):
        with open(path, "w", newline="\n") as fh:
            fh.write(self.render(timestamp))
