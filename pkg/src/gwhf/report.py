"""Plain-text artifacts: CSV with an embedded header, and SVG line charts.

The SVG writer reads the summary CSV, so every figure is derived from a
table that is itself a run output.
"""
from __future__ import annotations

import csv
import io
import json
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["csv_with_header", "read_csv_body", "svg_from_summary_csv", "svg_line_chart"]


def csv_with_header(body: str, meta: dict) -> str:
    """Prefix a CSV body with one ``# key: json`` comment line per metadata entry."""
    lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in meta.items()]
    return "\n".join(lines) + "\n" + body


def read_csv_body(text: str) -> list[dict]:
    rows = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(rows))))


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_line_chart(series: dict[str, tuple[Sequence[float], Sequence[float]]], title: str,
                   xlabel: str, ylabel: str, width: int = 640, height: int = 420) -> str:
    left, right, top, bottom = 70, 20, 40, 60
    xs = np.concatenate([np.asarray(x, dtype=float) for x, _ in series.values()]) if series else np.zeros(1)
    ys = np.concatenate([np.asarray(y, dtype=float) for _, y in series.values()]) if series else np.zeros(1)
    ys = ys[np.isfinite(ys)] if np.isfinite(ys).any() else np.zeros(1)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = min(0.0, float(ys.min())), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>']
    for t in np.linspace(x0, x1, 6):
        out.append(f'<text x="{px(t):.1f}" y="{top + ph + 18}" text-anchor="middle">{t:.3g}</text>')
    for t in np.linspace(y0, y1, 6):
        out.append(f'<text x="{left - 6}" y="{py(t) + 4:.1f}" text-anchor="end">{t:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2:.1f})">{escape(ylabel)}</text>')
    for k, (name, (x, y)) in enumerate(series.items()):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{px(a):.1f},{py(b):.1f}" for a, b in zip(x, y) if np.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        out.append(f'<text x="{left + pw - 4}" y="{top + 16 + 16 * k}" text-anchor="end" '
                   f'fill="{color}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_from_summary_csv(text: str, title: str, column: str = "iod") -> str:
    """Chart ``column`` against radius, one line per ``mode`` in the CSV."""
    series: dict[str, tuple[list, list]] = {}
    for row in read_csv_body(text):
        x, y = series.setdefault(row["mode"], ([], []))
        x.append(float(row["radius"]))
        y.append(float(row[column]))
    label = {"iod": "index of dispersion", "var": "variance", "mean": "mean"}.get(column, column)
    return svg_line_chart(series, title, "R", label)
