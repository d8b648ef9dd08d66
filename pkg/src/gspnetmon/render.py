"""Graph rendering with a traffic colormap: red is high traffic, dark blue is
low. DOT is the primary target (diffable, toolchain-free); SVG uses a simple
built-in layout with spine/leaf/host rows.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import DimensionError
from .graphs import GraphSignal, LayerGraph

# Dark blue through cyan and yellow to red.
_STOPS = (
    (0.00, (0, 0, 139)),
    (0.25, (0, 64, 255)),
    (0.50, (0, 255, 255)),
    (0.75, (255, 255, 0)),
    (1.00, (255, 0, 0)),
)


def traffic_color(t: float) -> str:
    """Hex color for a normalized traffic value in [0, 1]."""
    t = min(max(float(t), 0.0), 1.0)
    for (t0, c0), (t1, c1) in zip(_STOPS, _STOPS[1:]):
        if t <= t1:
            f = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            rgb = tuple(round(a + f * (b - a)) for a, b in zip(c0, c1))
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#ff0000"


def normalize_signal(values: np.ndarray) -> np.ndarray:
    """Min-max normalization to [0, 1]; a constant signal maps to all zeros."""
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return np.zeros_like(values, dtype=np.float64)
    return (values - lo) / (hi - lo)


def _check(g: LayerGraph, x: GraphSignal):
    if len(x) != g.n_nodes:
        raise DimensionError("signal length does not match the graph")


def render_dot(g: LayerGraph, x: GraphSignal, title: str = "G") -> str:
    _check(g, x)
    norm = normalize_signal(x.values)
    lines = [f'graph "{title}" {{',
             "  node [shape=circle style=filled fontsize=10];"]
    for i in range(g.n_nodes):
        color = traffic_color(norm[i])
        font = "white" if norm[i] < 0.35 else "black"
        lines.append(f'  {i} [label="{g.labels[i]}" fillcolor="{color}" '
                     f'fontcolor="{font}"];')
    for i, j, _ in g.edges():
        lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _positions(g: LayerGraph, width: float, height: float) -> list[tuple[float, float]]:
    rows = {"spine-switch": [], "leaf-switch": [], "host": [], "monitor": []}
    for i, r in enumerate(g.roles):
        rows.setdefault(r, []).append(i)
    layered = [rows["spine-switch"], rows["leaf-switch"], rows["host"]]
    if rows["spine-switch"] and rows["leaf-switch"]:
        pos: list[tuple[float, float]] = [(0.0, 0.0)] * g.n_nodes
        used_rows = [row for row in layered if row] + ([rows["monitor"]] if rows["monitor"] else [])
        for rank, row in enumerate(used_rows):
            y = height * (rank + 1) / (len(used_rows) + 1)
            for k, v in enumerate(row):
                pos[v] = (width * (k + 1) / (len(row) + 1), y)
        return pos
    # Generic graphs (monitor layers, coarse levels): a circle.
    n = g.n_nodes
    cx, cy, r = width / 2, height / 2, min(width, height) / 2 - 30
    return [(cx + r * math.cos(2 * math.pi * i / n - math.pi / 2),
             cy + r * math.sin(2 * math.pi * i / n - math.pi / 2))
            for i in range(n)]


def render_svg(g: LayerGraph, x: GraphSignal, title: str = "G") -> str:
    _check(g, x)
    width = max(480.0, 60.0 * math.ceil(math.sqrt(g.n_nodes)) + 120.0)
    height = width * 0.66
    pos = _positions(g, width, height)
    norm = normalize_signal(x.values)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
             f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
             f"<title>{title}</title>"]
    for i, j, _ in g.edges():
        (x1, y1), (x2, y2) = pos[i], pos[j]
        parts.append(f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" '
                     f'y2="{y2:.1f}" stroke="#999" stroke-width="1"/>')
    for i in range(g.n_nodes):
        px, py = pos[i]
        parts.append(f'<circle cx="{px:.1f}" cy="{py:.1f}" r="11" '
                     f'fill="{traffic_color(norm[i])}" stroke="#333"/>')
        parts.append(f'<text x="{px:.1f}" y="{py + 3.5:.1f}" font-size="7" '
                     f'text-anchor="middle">{g.labels[i]}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_json(g: LayerGraph, x: GraphSignal) -> str:
    _check(g, x)
    norm = normalize_signal(x.values)
    doc = {
        "nodes": [{"id": i, "label": g.labels[i], "role": g.roles[i],
                   "value": float(x.values[i]), "color": traffic_color(norm[i])}
                  for i in range(g.n_nodes)],
        "edges": [[i, j] for i, j, _ in g.edges()],
    }
    return json.dumps(doc, indent=1) + "\n"


def render_graph(g: LayerGraph, x: GraphSignal, out, fmt: str = "dot",
                 title: str = "G") -> Path:
    """Write the colored rendering of a signal on a graph; returns the path."""
    if fmt == "dot":
        text = render_dot(g, x, title)
    elif fmt == "svg":
        text = render_svg(g, x, title)
    elif fmt == "json":
        text = render_json(g, x)
    else:
        raise ValueError(f"unknown render format {fmt!r}")
    out = Path(out)
    out.write_text(text)
    return out
