"""Tiny SVG line and bar charts (no plotting dependency)."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=60, right=150, top=40, bottom=50)
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _frame(title, xlabel, ylabel, body):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'font-family="sans-serif" font-size="12">\n'
            f'<rect width="100%" height="100%" fill="white"/>\n'
            f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-size="14">'
            f'{escape(title)}</text>\n'
            f'<text x="{(MARGIN["left"] + WIDTH - MARGIN["right"]) / 2:.0f}" y="{HEIGHT - 10}" '
            f'text-anchor="middle">{escape(xlabel)}</text>\n'
            f'<text x="15" y="{HEIGHT / 2:.0f}" text-anchor="middle" '
            f'transform="rotate(-90 15 {HEIGHT / 2:.0f})">{escape(ylabel)}</text>\n'
            + body + "</svg>\n")


def _range(values):
    vals = np.asarray([v for v in values if np.isfinite(v)], dtype=float)
    if vals.size == 0:
        return 0.0, 1.0
    lo, hi = float(vals.min()), float(vals.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _axes(ylo, yhi):
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    parts = [f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
             f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>']
    for t in np.linspace(ylo, yhi, 5):
        y = y0 - (t - ylo) / (yhi - ylo) * (y0 - y1)
        parts.append(f'<text x="{x0 - 5}" y="{y + 4:.1f}" text-anchor="end">{t:.3f}</text>')
    return "\n".join(parts) + "\n"


def line_chart(series: dict, title="", xlabel="", ylabel="") -> str:
    """``series`` maps a legend label to ``(xs, ys)``."""
    xs_all = [x for xs, _ in series.values() for x in xs]
    ys_all = [y for _, ys in series.values() for y in ys]
    xlo, xhi = (min(xs_all), max(xs_all)) if xs_all else (0, 1)
    if xhi == xlo:
        xhi = xlo + 1
    ylo, yhi = _range(ys_all)
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    body = _axes(ylo, yhi)
    for i, (label, (xs, ys)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{x0 + (x - xlo) / (xhi - xlo) * (x1 - x0):.1f},"
                       f"{y0 - (y - ylo) / (yhi - ylo) * (y0 - y1):.1f}"
                       for x, y in zip(xs, ys) if np.isfinite(y))
        body += f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>\n'
        ly = MARGIN["top"] + 16 * i
        body += (f'<line x1="{x1 + 10}" y1="{ly}" x2="{x1 + 30}" y2="{ly}" stroke="{color}" '
                 f'stroke-width="2"/><text x="{x1 + 35}" y="{ly + 4}">{escape(label)}</text>\n')
    body += (f'<text x="{x0}" y="{y0 + 16}" text-anchor="middle">{xlo:g}</text>'
             f'<text x="{x1}" y="{y0 + 16}" text-anchor="middle">{xhi:g}</text>\n')
    return _frame(title, xlabel, ylabel, body)


def bar_chart(labels, values, title="", ylabel="") -> str:
    ylo, yhi = _range(list(values) + [min(values) - 0.05 * abs(min(values))])
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    body = _axes(ylo, yhi)
    slot = (x1 - x0) / max(len(labels), 1)
    for i, (lab, v) in enumerate(zip(labels, values)):
        h = 0.0 if not np.isfinite(v) else (v - ylo) / (yhi - ylo) * (y0 - y1)
        x = x0 + i * slot + 0.15 * slot
        body += (f'<rect x="{x:.1f}" y="{y0 - h:.1f}" width="{0.7 * slot:.1f}" height="{h:.1f}" '
                 f'fill="{PALETTE[i % len(PALETTE)]}"/>\n'
                 f'<text x="{x + 0.35 * slot:.1f}" y="{y0 + 16}" text-anchor="middle">'
                 f'{escape(str(lab))}</text>\n')
    return _frame(title, "", ylabel, body)
