"""Minimal standalone SVG line charts (fixed 800x500 viewport)."""

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 500
_MARGIN = dict(left=70, right=20, top=40, bottom=55)
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
_DASHES = ("", "6,4", "2,3", "8,3,2,3", "")


def _nice_ticks(lo, hi, n=6):
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10) * mag
    start = np.ceil(lo / step) * step
    ticks = np.arange(start, hi + 0.5 * step, step)
    return [float(t) for t in ticks if lo - 1e-12 <= t <= hi + 1e-12]


def _fmt(v):
    return f"{v:.6g}"


def _polylines(xs, ys, sx, sy):
    """Split a series at NaNs into polyline point strings."""
    parts, cur = [], []
    for x, y in zip(xs, ys):
        if np.isfinite(x) and np.isfinite(y):
            cur.append(f"{sx(x):.2f},{sy(y):.2f}")
        elif cur:
            parts.append(" ".join(cur))
            cur = []
    if cur:
        parts.append(" ".join(cur))
    return parts


def line_chart(series, title="", xlabel="x", ylabel="", ylim=None):
    """Render ``series`` (a list of ``(label, x, y)``) as an SVG document string."""
    xs_all = np.concatenate([np.asarray(s[1], float) for s in series])
    ys_all = np.concatenate([np.asarray(s[2], float) for s in series])
    fin = np.isfinite(xs_all) & np.isfinite(ys_all)
    x_lo, x_hi = float(xs_all[fin].min()), float(xs_all[fin].max())
    if ylim is None:
        y_lo, y_hi = float(min(0.0, ys_all[fin].min())), float(ys_all[fin].max())
        y_hi += 0.05 * (y_hi - y_lo or 1.0)
    else:
        y_lo, y_hi = ylim
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    left, right = _MARGIN["left"], WIDTH - _MARGIN["right"]
    top, bottom = _MARGIN["top"], HEIGHT - _MARGIN["bottom"]

    def sx(x):
        return left + (x - x_lo) / (x_hi - x_lo) * (right - left)

    def sy(y):
        return bottom - (y - y_lo) / (y_hi - y_lo) * (bottom - top)

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<g stroke="black" stroke-width="1" fill="none">'
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/>'
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}"/></g>',
    ]
    out.append('<g font-family="sans-serif" font-size="12" fill="black">')
    for tx in _nice_ticks(x_lo, x_hi):
        px = sx(tx)
        out.append(f'<line x1="{px:.2f}" y1="{bottom}" x2="{px:.2f}" y2="{bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{bottom + 20}" text-anchor="middle">{_fmt(tx)}</text>')
    for ty in _nice_ticks(y_lo, y_hi):
        py = sy(ty)
        out.append(f'<line x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py + 4:.2f}" text-anchor="end">{_fmt(ty)}</text>')
    out.append(f'<text x="{(left + right) / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="18" y="{(top + bottom) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(top + bottom) / 2:.1f})">{escape(ylabel)}</text>'
    )
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>')
    out.append("</g>")

    for i, (label, xs, ys) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        dash = _DASHES[i % len(_DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        for pts in _polylines(np.asarray(xs, float), np.asarray(ys, float), sx, sy):
            out.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="2"{dash_attr} points="{pts}"/>'
            )
        ly = top + 15 + 20 * i
        out.append(
            f'<line x1="{right - 190}" y1="{ly}" x2="{right - 160}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"{dash_attr}/>'
        )
        out.append(
            f'<text x="{right - 152}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="12">{escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
