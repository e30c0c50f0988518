"""Minimal log-log scatter/line plots written as standalone SVG."""
from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo, hi):
    a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
    return [10.0 ** k for k in range(a, b + 1)]


def loglog_plot(path, series, title="", xlabel="", ylabel="", width=640, height=440) -> Path:
    """Write ``series`` = [(label, xs, ys, style)] with style 'points' or 'line'."""
    pts = [(x, y) for _, xs, ys, _ in series for x, y in zip(xs, ys) if x > 0 and y > 0]
    if not pts:
        raise ValueError("nothing positive to plot on log axes")
    xlo, xhi = min(p[0] for p in pts), max(p[0] for p in pts)
    ylo, yhi = min(p[1] for p in pts), max(p[1] for p in pts)
    if xlo == xhi:
        xlo, xhi = xlo / 2, xhi * 2
    if ylo == yhi:
        ylo, yhi = ylo / 2, yhi * 2
    lx0, lx1 = math.log10(xlo), math.log10(xhi)
    ly0, ly1 = math.log10(ylo), math.log10(yhi)
    pad = 0.05
    lx0, lx1 = lx0 - pad * (lx1 - lx0), lx1 + pad * (lx1 - lx0)
    ly0, ly1 = ly0 - pad * (ly1 - ly0), ly1 + pad * (ly1 - ly0)
    left, right, top, bottom = 70, 20, 40, 55
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (math.log10(x) - lx0) / (lx1 - lx0) * pw

    def sy(y):
        return top + (1 - (math.log10(y) - ly0) / (ly1 - ly0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>']
    for t in _ticks(10 ** lx0, 10 ** lx1):
        if 10 ** lx0 <= t <= 10 ** lx1:
            x = sx(t)
            out.append(f'<line x1="{x:.1f}" y1="{top}" x2="{x:.1f}" y2="{top + ph}" stroke="#ddd"/>')
            out.append(f'<text x="{x:.1f}" y="{top + ph + 16}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(10 ** ly0, 10 ** ly1):
        if 10 ** ly0 <= t <= 10 ** ly1:
            y = sy(t)
            out.append(f'<line x1="{left}" y1="{y:.1f}" x2="{left + pw}" y2="{y:.1f}" stroke="#ddd"/>')
            out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">{t:g}</text>')
    for k, (label, xs, ys, style) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        xy = [(sx(x), sy(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
        if style == "line" and len(xy) > 1:
            d = " ".join(f"{x:.1f},{y:.1f}" for x, y in xy)
            out.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        else:
            out += [f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3" fill="{color}"/>' for x, y in xy]
        ly = top + 14 + 16 * k
        out.append(f'<rect x="{left + 10}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{left + 26}" y="{ly}">{escape(label)}</text>')
    out.append(f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2})">{escape(ylabel)}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n")
    return path
