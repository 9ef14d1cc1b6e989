"""Deterministic SVG line chart of gain versus frequency.

Output depends only on the curves passed in: coordinates are rounded to
0.01 px and every attribute is emitted in a fixed order, so identical inputs
give byte-identical files.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH = 800
HEIGHT = 500
MARGIN_LEFT = 70
MARGIN_RIGHT = 150
MARGIN_TOP = 30
MARGIN_BOTTOM = 55

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _px(v: float) -> str:
    s = f"{round(v, 2):.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 5, 10):
        if raw <= m * mag:
            return m * mag
    return 10 * mag


def _ticks(lo, hi):
    step = _nice_step(hi - lo)
    start = math.ceil(lo / step - 1e-9) * step
    out = []
    v = start
    while v <= hi + step * 1e-9:
        out.append(round(v, 10))
        v += step
    return out


def render_gain_chart(curves, title="Channel gain") -> str:
    """Render ``curves`` (GainCurve objects) to SVG text.

    One polyline per curve. Classical curves are solid and wireless dashed.
    Colours follow the distance, so both modes at one distance share a colour.
    """
    curves = list(curves)
    if not curves:
        raise ValueError("nothing to plot")
    fmin = min(c.freqs[0] for c in curves) / 1e6
    fmax = max(c.freqs[-1] for c in curves) / 1e6
    gmin = min(min(c.gains) for c in curves)
    gmax = max(max(c.gains) for c in curves)
    if fmax == fmin:
        fmax = fmin + 1.0
    pad = max((gmax - gmin) * 0.05, 1.0)
    gmin, gmax = gmin - pad, gmax + pad

    x0, x1 = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    y0, y1 = HEIGHT - MARGIN_BOTTOM, MARGIN_TOP

    def sx(f_mhz):
        return x0 + (f_mhz - fmin) / (fmax - fmin) * (x1 - x0)

    def sy(g):
        return y0 + (g - gmin) / (gmax - gmin) * (y1 - y0)

    distances = sorted({c.distance_cm for c in curves})
    colour = {d: PALETTE[i % len(PALETTE)] for i, d in enumerate(distances)}

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{_px((x0 + x1) / 2)}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    for t in _ticks(fmin, fmax):
        x = _px(sx(t))
        out.append(f'<line x1="{x}" y1="{_px(y0)}" x2="{x}" y2="{_px(y1)}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{x}" y="{_px(y0 + 18)}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(gmin, gmax):
        y = _px(sy(t))
        out.append(f'<line x1="{_px(x0)}" y1="{y}" x2="{_px(x1)}" y2="{y}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{_px(x0 - 8)}" y="{_px(sy(t) + 4)}" text-anchor="end">{t:g}</text>')
    out.append(
        f'<rect x="{_px(x0)}" y="{_px(y1)}" width="{_px(x1 - x0)}" height="{_px(y0 - y1)}" '
        'fill="none" stroke="#000000"/>'
    )
    out.append(f'<text x="{_px((x0 + x1) / 2)}" y="{_px(HEIGHT - 15)}" text-anchor="middle">Frequency (MHz)</text>')
    out.append(
        f'<text x="18" y="{_px((y0 + y1) / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 18 {_px((y0 + y1) / 2)})">Channel gain (dB)</text>'
    )

    for i, c in enumerate(curves):
        pts = " ".join(f"{_px(sx(f / 1e6))},{_px(sy(g))}" for f, g in zip(c.freqs, c.gains))
        dash = ' stroke-dasharray="6 4"' if c.daq_mode == "wireless" else ""
        out.append(
            f'<polyline id="{escape(c.label)}" points="{pts}" fill="none" '
            f'stroke="{colour[c.distance_cm]}" stroke-width="1.5"{dash}/>'
        )
        ly = MARGIN_TOP + 10 + 18 * i
        lx = x1 + 12
        out.append(
            f'<line x1="{_px(lx)}" y1="{_px(ly)}" x2="{_px(lx + 24)}" y2="{_px(ly)}" '
            f'stroke="{colour[c.distance_cm]}" stroke-width="1.5"{dash}/>'
        )
        out.append(f'<text x="{_px(lx + 30)}" y="{_px(ly + 4)}">{escape(c.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
