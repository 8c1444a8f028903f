"""Minimal deterministic SVG line plots, no plotting dependencies.

Output is a standalone SVG document with axes, tick labels, gridlines and a
legend.  Rendering is purely a function of the inputs, so identical data
produces byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

_PALETTE = ("#1f6feb", "#d73a49", "#2da44e", "#b08800", "#8250df", "#57606a")


@dataclass(frozen=True)
class LineSeries:
    label: str
    x: Sequence[float]
    y: Sequence[float]


def _finite_span(values) -> tuple[float, float] | None:
    lo = math.inf
    hi = -math.inf
    for v in values:
        if math.isfinite(v):
            lo = min(lo, v)
            hi = max(hi, v)
    if lo > hi:
        return None
    return lo, hi


def _padded(lo: float, hi: float) -> tuple[float, float]:
    if lo == hi:
        pad = max(abs(lo) * 0.5, 1.0)
    else:
        pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def _ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    span = hi - lo
    raw = span / max(count, 1)
    magnitude = 10.0 ** math.floor(math.log10(raw))
    step = 10.0 * magnitude
    for mult in (1.0, 2.0, 2.5, 5.0):
        if raw <= mult * magnitude:
            step = mult * magnitude
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * span:
        ticks.append(round(v / step) * step)
        v += step
    return ticks


def _tick_label(v: float) -> str:
    if v == 0:
        return "0"
    return f"{v:.10g}"


def render_lines(
    lines: Sequence[LineSeries],
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    width: int = 720,
    height: int = 480,
) -> str:
    """Render line series into a self-contained SVG document string."""
    left, right, top, bottom = 64, 18, 38, 48
    plot_w = width - left - right
    plot_h = height - top - bottom

    xs = [v for s in lines for v in s.x]
    ys = [v for s in lines for v in s.y]
    xspan = _finite_span(xs) or (0.0, 1.0)
    yspan = _finite_span(ys) or (0.0, 1.0)
    x_lo, x_hi = _padded(*xspan)
    y_lo, y_hi = _padded(*yspan)

    def px(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return top + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" '
            f'font-size="15">{escape(title)}</text>'
        )

    for tx in _ticks(x_lo, x_hi):
        x = px(tx)
        parts.append(
            f'<line x1="{x:.2f}" y1="{top}" x2="{x:.2f}" y2="{top + plot_h}" '
            f'stroke="#eeeeee"/>'
        )
        parts.append(
            f'<line x1="{x:.2f}" y1="{top + plot_h}" x2="{x:.2f}" '
            f'y2="{top + plot_h + 5}" stroke="#333333"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{top + plot_h + 18}" '
            f'text-anchor="middle">{escape(_tick_label(tx))}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        y = py(ty)
        parts.append(
            f'<line x1="{left}" y1="{y:.2f}" x2="{left + plot_w}" y2="{y:.2f}" '
            f'stroke="#eeeeee"/>'
        )
        parts.append(
            f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" '
            f'stroke="#333333"/>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{y + 4:.2f}" '
            f'text-anchor="end">{escape(_tick_label(ty))}</text>'
        )

    # frame drawn after gridlines so it stays crisp
    parts.append(
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333"/>'
    )
    if xlabel:
        parts.append(
            f'<text x="{left + plot_w / 2:.1f}" y="{height - 10}" '
            f'text-anchor="middle">{escape(xlabel)}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="16" y="{top + plot_h / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {top + plot_h / 2:.1f})">{escape(ylabel)}</text>'
        )

    for i, series in enumerate(lines):
        color = _PALETTE[i % len(_PALETTE)]
        run: list[str] = []
        segments: list[list[str]] = []
        for x, y in zip(series.x, series.y):
            if math.isfinite(x) and math.isfinite(y):
                run.append(f"{px(x):.2f},{py(y):.2f}")
            elif run:
                segments.append(run)
                run = []
        if run:
            segments.append(run)
        for seg in segments:
            if len(seg) == 1:
                cx, cy = seg[0].split(",")
                parts.append(f'<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>')
            else:
                parts.append(
                    f'<polyline points="{" ".join(seg)}" fill="none" '
                    f'stroke="{color}" stroke-width="1.5"/>'
                )

    legend_x = left + plot_w - 150
    legend_y = top + 12
    for i, series in enumerate(lines):
        if not series.label:
            continue
        color = _PALETTE[i % len(_PALETTE)]
        y = legend_y + 16 * i
        parts.append(
            f'<line x1="{legend_x}" y1="{y}" x2="{legend_x + 22}" y2="{y}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{legend_x + 28}" y="{y + 4}">{escape(series.label)}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
