"""A small line-plot writer producing standalone SVG.

Only what the command-line tool needs: stacked panels that share an x axis,
several labelled series per panel, optional log-scaled y axes and tick labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#17becf", "#8c564b")

WIDTH = 640
PANEL_HEIGHT = 220
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 30
MARGIN_BOTTOM = 40


@dataclass
class Series:
    x: Sequence[float]
    y: Sequence[float]
    label: str = ""
    dashed: bool = False


@dataclass
class Panel:
    series: list = field(default_factory=list)
    ylabel: str = ""
    logy: bool = False
    title: str = ""

    def add(self, x, y, label="", dashed=False) -> "Panel":
        self.series.append(Series(x, y, label, dashed))
        return self


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list:
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def _limits(values: np.ndarray, log: bool):
    vals = values[np.isfinite(values)]
    if log:
        vals = vals[vals > 0.0]
    if vals.size == 0:
        return (0.0, 1.0)
    lo, hi = float(vals.min()), float(vals.max())
    if log:
        lo, hi = math.log10(lo), math.log10(hi)
    if hi == lo:
        pad = 0.5 if lo == 0.0 else 0.1 * abs(lo)
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def render(panels: Sequence[Panel], xlabel: str = "", title: str = "") -> str:
    """Return an SVG document with ``panels`` stacked vertically."""
    height = MARGIN_TOP + len(panels) * (PANEL_HEIGHT + MARGIN_BOTTOM)
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>')

    all_x = np.concatenate([np.asarray(s.x, float) for p in panels for s in p.series] or [np.zeros(1)])
    x_lo, x_hi = _limits(all_x, False)

    for i, panel in enumerate(panels):
        top = MARGIN_TOP + i * (PANEL_HEIGHT + MARGIN_BOTTOM)
        all_y = np.concatenate([np.asarray(s.y, float) for s in panel.series] or [np.zeros(1)])
        y_lo, y_hi = _limits(all_y, panel.logy)

        def px(x):
            return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

        def py(y):
            if panel.logy:
                y = math.log10(y) if y > 0 else -math.inf
            return top + PANEL_HEIGHT - (y - y_lo) / (y_hi - y_lo) * PANEL_HEIGHT

        out.append(
            f'<rect x="{MARGIN_LEFT}" y="{top}" width="{plot_w}" height="{PANEL_HEIGHT}" '
            'fill="none" stroke="black"/>'
        )
        for t in _nice_ticks(x_lo, x_hi):
            x = px(t)
            out.append(f'<line x1="{x:.2f}" y1="{top + PANEL_HEIGHT}" x2="{x:.2f}" y2="{top + PANEL_HEIGHT + 4}" stroke="black"/>')
            out.append(f'<text x="{x:.2f}" y="{top + PANEL_HEIGHT + 15}" text-anchor="middle">{_fmt(t)}</text>')
        for t in _nice_ticks(y_lo, y_hi):
            label = _fmt(10.0**t) if panel.logy else _fmt(t)
            yy = top + PANEL_HEIGHT - (t - y_lo) / (y_hi - y_lo) * PANEL_HEIGHT
            out.append(f'<line x1="{MARGIN_LEFT - 4}" y1="{yy:.2f}" x2="{MARGIN_LEFT}" y2="{yy:.2f}" stroke="black"/>')
            out.append(f'<text x="{MARGIN_LEFT - 6}" y="{yy + 4:.2f}" text-anchor="end">{label}</text>')
        if panel.ylabel:
            cy = top + PANEL_HEIGHT / 2
            out.append(
                f'<text x="14" y="{cy:.2f}" text-anchor="middle" transform="rotate(-90 14 {cy:.2f})">'
                f"{escape(panel.ylabel)}</text>"
            )
        if panel.title:
            out.append(f'<text x="{MARGIN_LEFT + 4}" y="{top - 4}">{escape(panel.title)}</text>')

        for j, s in enumerate(panel.series):
            color = PALETTE[j % len(PALETTE)]
            pts = []
            segments = []
            for x, y in zip(np.asarray(s.x, float), np.asarray(s.y, float)):
                ok = math.isfinite(x) and math.isfinite(y) and (y > 0 or not panel.logy)
                if ok:
                    pts.append(f"{px(x):.2f},{py(y):.2f}")
                elif pts:
                    segments.append(pts)
                    pts = []
            if pts:
                segments.append(pts)
            dash = ' stroke-dasharray="5,3"' if s.dashed else ""
            for seg in segments:
                out.append(
                    f'<polyline points="{" ".join(seg)}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>'
                )
            if s.label:
                ly = top + 14 + 14 * j
                lx = MARGIN_LEFT + plot_w - 150
                out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" stroke-width="2"{dash}/>')
                out.append(f'<text x="{lx + 25}" y="{ly}">{escape(s.label)}</text>')

    last = MARGIN_TOP + len(panels) * (PANEL_HEIGHT + MARGIN_BOTTOM) - 8
    if xlabel:
        out.append(f'<text x="{MARGIN_LEFT + plot_w / 2}" y="{last}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
