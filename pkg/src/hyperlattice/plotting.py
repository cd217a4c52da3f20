"""Minimal single-file SVG emission for time responses.

Deliberately dependency-free and deterministic: fixed canvas, fixed
float formatting, no timestamps.
"""

from __future__ import annotations

import numpy as np

from .tdtransform import Arrival, TimeResponse

_WIDTH, _HEIGHT = 960, 320
_MARGIN = 42


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def time_response_svg(
    tr: TimeResponse,
    arrivals: tuple[Arrival, ...] = (),
    title: str = "time response",
) -> str:
    """Line plot of the pulse train with arrival markers."""
    t = np.asarray(tr.t_grid)
    v = np.asarray(tr.values)
    span = max(float(np.abs(v).max()), 1e-30)
    t0, t1 = float(t[0]), float(t[-1])

    def sx(time: float) -> float:
        return _MARGIN + (time - t0) / (t1 - t0) * (_WIDTH - 2 * _MARGIN)

    def sy(value: float) -> float:
        return _HEIGHT / 2 - value / span * (_HEIGHT / 2 - _MARGIN)

    # Downsample long traces to at most ~4 points per horizontal pixel.
    stride = max(1, len(t) // (4 * (_WIDTH - 2 * _MARGIN)))
    points = " ".join(
        f"{_fmt(sx(float(ti)))},{_fmt(sy(float(vi)))}"
        for ti, vi in zip(t[::stride], v[::stride])
    )

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_MARGIN}" y="{_MARGIN - 18}" font-family="monospace" '
        f'font-size="13">{title}</text>',
        f'<line x1="{_MARGIN}" y1="{_HEIGHT / 2}" x2="{_WIDTH - _MARGIN}" '
        f'y2="{_HEIGHT / 2}" stroke="#bbbbbb" stroke-width="1"/>',
        f'<polyline fill="none" stroke="#1f3d7a" stroke-width="1" points="{points}"/>',
    ]
    for a in arrivals:
        x = _fmt(sx(a.time))
        parts.append(
            f'<circle cx="{x}" cy="{_fmt(sy(a.amplitude))}" r="3" '
            f'fill="none" stroke="#c43b3b" stroke-width="1.2"/>'
        )
    parts.append(
        f'<text x="{_MARGIN}" y="{_HEIGHT - 10}" font-family="monospace" '
        f'font-size="11">t: {_fmt(t0)} .. {_fmt(t1)}   peak: {span!r}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
