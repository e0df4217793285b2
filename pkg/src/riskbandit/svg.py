"""Tiny dependency-free SVG writer for regret curves (log-scaled time axis)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=70, right=170, top=30, bottom=50)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _fmt(v):
    return f"{v:.2f}"


def regret_plot(summary: dict) -> str:
    """Mean regret with a 5-95% band per policy, plus dashed lines for valid bounds."""
    entries = [e for e in summary.get("policies", []) if e["aggregates"]["mean"]]
    ts = sorted({t for e in entries for t in e["checkpoints"]})
    ys = [v for e in entries for v in e["aggregates"]["p95"]]
    bound_lines = []
    for e in entries:
        for b in e["bounds"]:
            if b["valid"] and b["total"] is not None:
                bound_lines.append((e["policy"], b["regime"], b["total"]))
    y_max = max(ys + [1.0])
    # bounds far above the data would flatten every curve
    shown_bounds = [b for b in bound_lines if b[2] <= 20 * y_max]
    y_max = max([y_max] + [b[2] for b in shown_bounds]) * 1.05

    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    lo = math.log10(ts[0]) if ts else 0.0
    hi = math.log10(ts[-1]) if ts else 1.0
    if hi <= lo:
        hi = lo + 1.0

    def px(t):
        return x0 + (math.log10(t) - lo) / (hi - lo) * (x1 - x0)

    def py(v):
        return y0 - v / y_max * (y0 - y1)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle" font-size="13">t (log scale)</text>',
        f'<text x="16" y="{(y0 + y1) / 2:.0f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2:.0f})">cumulative regret</text>',
    ]
    for k in range(math.floor(lo), math.ceil(hi) + 1):
        if lo <= k <= hi:
            x = px(10 ** k)
            out.append(f'<line x1="{_fmt(x)}" y1="{y0}" x2="{_fmt(x)}" y2="{y0 + 5}" stroke="black"/>')
            out.append(f'<text x="{_fmt(x)}" y="{y0 + 20}" text-anchor="middle" font-size="11">1e{k}</text>')
    for j in range(6):
        v = y_max * j / 5
        out.append(f'<text x="{x0 - 6}" y="{_fmt(py(v) + 4)}" text-anchor="end" font-size="11">{v:.4g}</text>')

    for idx, e in enumerate(entries):
        color = COLORS[idx % len(COLORS)]
        cps, agg = e["checkpoints"], e["aggregates"]
        band = [f"{_fmt(px(t))},{_fmt(py(v))}" for t, v in zip(cps, agg["p95"])]
        band += [f"{_fmt(px(t))},{_fmt(py(v))}" for t, v in reversed(list(zip(cps, agg["p05"])))]
        out.append(f'<polygon points="{" ".join(band)}" fill="{color}" fill-opacity="0.15" stroke="none"/>')
        line = " ".join(f"{_fmt(px(t))},{_fmt(py(v))}" for t, v in zip(cps, agg["mean"]))
        out.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = y1 + 18 * idx
        out.append(f'<line x1="{x1 + 15}" y1="{ly}" x2="{x1 + 35}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{x1 + 40}" y="{ly + 4}" font-size="11">{escape(e["policy"])}</text>')
        for name, regime, total in shown_bounds:
            if name == e["policy"]:
                y = py(total)
                out.append(f'<line x1="{x0}" y1="{_fmt(y)}" x2="{x1}" y2="{_fmt(y)}" stroke="{color}" '
                           'stroke-dasharray="6,4"/>')
                out.append(f'<text x="{x1 - 4}" y="{_fmt(y - 4)}" text-anchor="end" font-size="10">'
                           f'{escape(regime)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
