"""Minimal SVG line and CDF plots: pure generated markup, no renderer."""

import numpy as np

_W, _H = 640, 400
_MARGIN = 56
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _scale(vals, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return out_lo + (np.asarray(vals, dtype=float) - lo) / span * (out_hi - out_lo)


def _fmt(x):
    return f"{x:.6g}"


def line_plot(series, title="", xlabel="", ylabel=""):
    """SVG document for named (x, y) series.

    `series` maps a label to a pair of equal-length sequences.
    """
    xs = np.concatenate([np.asarray(x, dtype=float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, dtype=float) for _, y in series.values()])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    ax_l, ax_r = _MARGIN, _W - 20
    ax_t, ax_b = 36, _H - _MARGIN
    parts.append(f'<rect x="{ax_l}" y="{ax_t}" width="{ax_r - ax_l}" '
                 f'height="{ax_b - ax_t}" fill="none" stroke="black"/>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        gx = ax_l + frac * (ax_r - ax_l)
        gy = ax_b - frac * (ax_b - ax_t)
        parts.append(f'<text x="{gx:.1f}" y="{ax_b + 16}" text-anchor="middle" '
                     f'font-size="10">{_fmt(x_lo + frac * (x_hi - x_lo))}</text>')
        parts.append(f'<text x="{ax_l - 6}" y="{gy + 3:.1f}" text-anchor="end" '
                     f'font-size="10">{_fmt(y_lo + frac * (y_hi - y_lo))}</text>')
    for i, (label, (x, y)) in enumerate(series.items()):
        px = _scale(x, x_lo, x_hi, ax_l, ax_r)
        py = _scale(y, y_lo, y_hi, ax_b, ax_t)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        color = _COLORS[i % len(_COLORS)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{ax_r - 6}" y="{ax_t + 14 + 14 * i}" '
                     f'text-anchor="end" font-size="11" fill="{color}">{label}</text>')
    parts.append(f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle" '
                 f'font-size="12">{xlabel}</text>')
    parts.append(f'<text x="14" y="{_H / 2}" font-size="12" '
                 f'transform="rotate(-90 14 {_H / 2})" text-anchor="middle">{ylabel}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def cdf_plot(values, fractions, title="", xlabel=""):
    """Step-style empirical CDF as an SVG document."""
    v = np.asarray(values, dtype=float)
    f = np.asarray(fractions, dtype=float)
    # prepend a zero step so the curve starts on the axis
    v2 = np.concatenate([[v[0]], np.repeat(v, 2)[1:]])
    f2 = np.concatenate([[0.0], np.repeat(f, 2)[:-1]])
    return line_plot({"cdf": (v2, f2)}, title=title, xlabel=xlabel,
                     ylabel="cumulative fraction")


def write_svg(path, svg_text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg_text)
