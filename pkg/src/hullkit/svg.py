"""Tiny standalone SVG line and bar charts (no plotting dependency)."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

W, H = 640, 400
ML, MR, MT, MB = 70, 150, 40, 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _nice_range(lo, hi):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return 0.0, 1.0
    if hi - lo < 1e-300:
        pad = abs(hi) * 0.1 or 1.0
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _frame(title, xlabel, ylabel, ylo, yhi, xlo=None, xhi=None):
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<line x1="{ML}" y1="{H - MB}" x2="{W - MR}" y2="{H - MB}" stroke="black"/>',
           f'<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{H - MB}" stroke="black"/>',
           f'<text x="{(ML + W - MR) / 2:.1f}" y="{H - 15}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="18" y="{(MT + H - MB) / 2:.1f}" text-anchor="middle" '
           f'transform="rotate(-90 18 {(MT + H - MB) / 2:.1f})">{escape(ylabel)}</text>']
    for k in range(5):
        v = ylo + (yhi - ylo) * k / 4
        y = H - MB - (H - MB - MT) * k / 4
        out.append(f'<text x="{ML - 6}" y="{y + 4:.1f}" text-anchor="end">{v:.4g}</text>')
    if xlo is not None:
        for k in range(5):
            v = xlo + (xhi - xlo) * k / 4
            x = ML + (W - ML - MR) * k / 4
            out.append(f'<text x="{x:.1f}" y="{H - MB + 16}" text-anchor="middle">{v:.4g}</text>')
    return out


def _legend(out, labels):
    for i, lbl in enumerate(labels):
        y = MT + 18 * i
        c = COLORS[i % len(COLORS)]
        out.append(f'<rect x="{W - MR + 10}" y="{y}" width="12" height="12" fill="{c}"/>')
        out.append(f'<text x="{W - MR + 28}" y="{y + 10}">{escape(lbl)}</text>')


def line_plot(path, series: dict, xlabel="", ylabel="", title=""):
    """``series`` maps label -> (x, y)."""
    xs = np.concatenate([np.asarray(x, float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, float) for _, y in series.values()])
    ys = ys[np.isfinite(ys)]
    xlo, xhi = _nice_range(xs.min(), xs.max())
    ylo, yhi = _nice_range(ys.min() if ys.size else 0.0, ys.max() if ys.size else 1.0)
    out = _frame(title, xlabel, ylabel, ylo, yhi, xlo, xhi)

    def px(x):
        return ML + (W - ML - MR) * (x - xlo) / (xhi - xlo)

    def py(y):
        return H - MB - (H - MB - MT) * (y - ylo) / (yhi - ylo)
    for i, (lbl, (x, y)) in enumerate(series.items()):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y) if math.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{COLORS[i % len(COLORS)]}" '
                   f'stroke-width="1.5" points="{pts}"/>')
    _legend(out, list(series))
    out.append("</svg>")
    _write(path, out)


def bar_chart(path, categories, groups: dict, ylabel="", title=""):
    """Grouped bars: ``groups`` maps label -> one value per category."""
    vals = np.array([v for g in groups.values() for v in g], float)
    vals = vals[np.isfinite(vals)]
    yhi = _nice_range(0.0, vals.max() if vals.size else 1.0)[1]
    out = _frame(title, "panel", ylabel, 0.0, yhi)
    n, m = max(len(categories), 1), max(len(groups), 1)
    slot = (W - ML - MR) / n
    bw = 0.8 * slot / m
    for j, (lbl, g) in enumerate(groups.items()):
        for i, v in enumerate(g):
            if not math.isfinite(v):
                continue
            h = (H - MB - MT) * v / yhi
            x = ML + i * slot + 0.1 * slot + j * bw
            out.append(f'<rect x="{x:.2f}" y="{H - MB - h:.2f}" width="{bw:.2f}" height="{h:.2f}" '
                       f'fill="{COLORS[j % len(COLORS)]}"><title>{escape(str(categories[i]))}: '
                       f'{v:.4g}</title></rect>')
    _legend(out, list(groups))
    out.append("</svg>")
    _write(path, out)


def _write(path, lines):
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
