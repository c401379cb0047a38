"""Self-contained two-panel SVG line charts (no plotting dependency).

Fixed 800x500 viewBox with stacked panels, intended for the real and
imaginary coherence quadratures of a run. Output is deterministic for
identical input data and references nothing external.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_WIDTH = 800
_HEIGHT = 500
_MARGIN_LEFT = 70
_MARGIN_RIGHT = 160
_PANEL_TOP = (45, 235)
_PANEL_BOTTOM = (285, 475)

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e")


@dataclass(frozen=True)
class Series:
    label: str
    values: np.ndarray
    dashed: bool = False


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi) or lo == hi:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def _panel(
    lines: list[str],
    times: np.ndarray,
    series: list[Series],
    y_top: int,
    y_bottom: int,
    title: str,
    x_label: str | None,
) -> None:
    x_lo, x_hi = float(times[0]), float(times[-1])
    values = np.concatenate([s.values for s in series]) if series else np.zeros(1)
    y_lo, y_hi = float(np.min(values)), float(np.max(values))
    if y_hi - y_lo < 1e-300:
        pad = max(abs(y_hi), 1.0) * 0.1
        y_lo, y_hi = y_lo - pad, y_hi + pad
    else:
        pad = 0.06 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad

    x_left, x_right = _MARGIN_LEFT, _WIDTH - _MARGIN_RIGHT

    def px(x: float) -> float:
        return x_left + (x - x_lo) / (x_hi - x_lo) * (x_right - x_left)

    def py(y: float) -> float:
        return y_bottom - (y - y_lo) / (y_hi - y_lo) * (y_bottom - y_top)

    lines.append(
        f'<text x="{(x_left + x_right) / 2:.1f}" y="{y_top - 8}" '
        f'text-anchor="middle" font-size="14" font-family="sans-serif">'
        f"{_escape(title)}</text>"
    )
    for tick in _ticks(y_lo, y_hi):
        ty = py(tick)
        lines.append(
            f'<line x1="{x_left}" y1="{ty:.2f}" x2="{x_right}" y2="{ty:.2f}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        lines.append(
            f'<text x="{x_left - 6}" y="{ty + 4:.2f}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif">{tick:.3g}</text>'
        )
    for tick in _ticks(x_lo, x_hi):
        tx = px(tick)
        lines.append(
            f'<line x1="{tx:.2f}" y1="{y_bottom}" x2="{tx:.2f}" '
            f'y2="{y_bottom + 5}" stroke="#000000" stroke-width="1"/>'
        )
        lines.append(
            f'<text x="{tx:.2f}" y="{y_bottom + 18}" text-anchor="middle" '
            f'font-size="11" font-family="sans-serif">{tick:.3g}</text>'
        )
    lines.append(
        f'<rect x="{x_left}" y="{y_top}" width="{x_right - x_left}" '
        f'height="{y_bottom - y_top}" fill="none" stroke="#000000" '
        'stroke-width="1"/>'
    )
    for i, s in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(
            f"{px(float(t)):.2f},{py(float(v)):.2f}"
            for t, v in zip(times, s.values)
        )
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        lines.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"{dash}/>'
        )
        ly = y_top + 16 + 18 * i
        lines.append(
            f'<line x1="{x_right + 10}" y1="{ly - 4}" x2="{x_right + 34}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="1.5"{dash}/>'
        )
        lines.append(
            f'<text x="{x_right + 40}" y="{ly}" font-size="11" '
            f'font-family="sans-serif">{_escape(s.label)}</text>'
        )
    if x_label:
        lines.append(
            f'<text x="{(x_left + x_right) / 2:.1f}" y="{y_bottom + 34}" '
            f'text-anchor="middle" font-size="12" font-family="sans-serif">'
            f"{_escape(x_label)}</text>"
        )


def two_panel_chart(
    times: np.ndarray,
    top_series: list[Series],
    bottom_series: list[Series],
    top_title: str,
    bottom_title: str,
    x_label: str,
) -> str:
    """Render two stacked line panels sharing a time axis; returns SVG text."""
    times = np.asarray(times, dtype=float)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>',
    ]
    _panel(lines, times, top_series, *_PANEL_TOP, top_title, None)
    _panel(lines, times, bottom_series, *_PANEL_BOTTOM, bottom_title, x_label)
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
