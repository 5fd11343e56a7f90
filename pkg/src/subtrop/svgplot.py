"""Minimal deterministic SVG line plots with error bars.

No plotting dependency: experiment figures only need axes, a few series
with +/- error bars, and a legend.  All coordinates are formatted with a
fixed precision so regenerating a plot from the same data is byte-identical.
"""

from __future__ import annotations

import math

__all__ = ["line_plot_svg"]

_WIDTH, _HEIGHT = 640, 440
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 40, 55
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v):
    return f"{v:.2f}"


def _nice_ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = span / (count - 1)
    return [lo + i * step for i in range(count)]


def _esc(text):
    return (
        str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def line_plot_svg(path, x, series, title="", xlabel="", ylabel=""):
    """Write a line plot with vertical error bars.

    ``series`` is a list of (label, means, half_widths) triples sharing the
    x vector; ``half_widths`` may be None.
    """
    xs = [float(v) for v in x]
    if not xs:
        raise ValueError("empty x vector")
    ymin, ymax = math.inf, -math.inf
    for _, means, halves in series:
        for i, mv in enumerate(means):
            h = halves[i] if halves is not None else 0.0
            ymin = min(ymin, mv - h)
            ymax = max(ymax, mv + h)
    if not series or not math.isfinite(ymin):
        ymin, ymax = 0.0, 1.0
    if ymin == ymax:
        ymin -= 0.5
        ymax += 0.5
    pad = 0.05 * (ymax - ymin)
    ymin -= pad
    ymax += pad
    xmin, xmax = min(xs), max(xs)
    if xmin == xmax:
        xmin -= 0.5
        xmax += 0.5

    pw = _WIDTH - _MARGIN_L - _MARGIN_R
    ph = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(v):
        return _MARGIN_L + pw * (v - xmin) / (xmax - xmin)

    def py(v):
        return _MARGIN_T + ph * (1.0 - (v - ymin) / (ymax - ymin))

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">'
    )
    out.append(f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>')
    if title:
        out.append(
            f'<text x="{_WIDTH / 2:.0f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{_esc(title)}</text>'
        )
    # frame
    out.append(
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{pw}" height="{ph}" '
        f'fill="none" stroke="#444" stroke-width="1"/>'
    )
    for tv in _nice_ticks(xmin, xmax):
        tx = px(tv)
        out.append(
            f'<line x1="{_fmt(tx)}" y1="{_MARGIN_T + ph}" x2="{_fmt(tx)}" '
            f'y2="{_MARGIN_T + ph + 5}" stroke="#444"/>'
        )
        out.append(
            f'<text x="{_fmt(tx)}" y="{_MARGIN_T + ph + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tv:.4g}</text>'
        )
    for tv in _nice_ticks(ymin, ymax):
        ty = py(tv)
        out.append(
            f'<line x1="{_MARGIN_L - 5}" y1="{_fmt(ty)}" x2="{_MARGIN_L}" '
            f'y2="{_fmt(ty)}" stroke="#444"/>'
        )
        out.append(
            f'<text x="{_MARGIN_L - 8}" y="{_fmt(ty + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{tv:.4g}</text>'
        )
    if xlabel:
        out.append(
            f'<text x="{_MARGIN_L + pw / 2:.0f}" y="{_HEIGHT - 12}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="13">'
            f"{_esc(xlabel)}</text>"
        )
    if ylabel:
        cx, cy = 18, _MARGIN_T + ph / 2
        out.append(
            f'<text x="{cx}" y="{cy:.0f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" '
            f'transform="rotate(-90 {cx} {cy:.0f})">{_esc(ylabel)}</text>'
        )

    for si, (label, means, halves) in enumerate(series):
        color = _COLORS[si % len(_COLORS)]
        pts = " ".join(f"{_fmt(px(xs[i]))},{_fmt(py(means[i]))}" for i in range(len(xs)))
        if halves is not None:
            for i in range(len(xs)):
                cx = px(xs[i])
                y1 = py(means[i] - halves[i])
                y0 = py(means[i] + halves[i])
                out.append(
                    f'<line x1="{_fmt(cx)}" y1="{_fmt(y0)}" x2="{_fmt(cx)}" '
                    f'y2="{_fmt(y1)}" stroke="{color}" stroke-width="1"/>'
                )
                for yy in (y0, y1):
                    out.append(
                        f'<line x1="{_fmt(cx - 3)}" y1="{_fmt(yy)}" '
                        f'x2="{_fmt(cx + 3)}" y2="{_fmt(yy)}" '
                        f'stroke="{color}" stroke-width="1"/>'
                    )
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        for i in range(len(xs)):
            out.append(
                f'<circle cx="{_fmt(px(xs[i]))}" cy="{_fmt(py(means[i]))}" '
                f'r="2.5" fill="{color}"/>'
            )
        ly = _MARGIN_T + 14 + 16 * si
        out.append(
            f'<line x1="{_MARGIN_L + pw - 120}" y1="{ly}" '
            f'x2="{_MARGIN_L + pw - 100}" y2="{ly}" stroke="{color}" '
            f'stroke-width="2"/>'
        )
        out.append(
            f'<text x="{_MARGIN_L + pw - 94}" y="{ly + 4}" '
            f'font-family="sans-serif" font-size="11">{_esc(label)}</text>'
        )
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
