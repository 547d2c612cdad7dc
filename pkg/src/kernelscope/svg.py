"""Minimal static SVG charts (line and bar) for batch reports.

Hand-rolled so that output bytes are a pure function of the inputs.
"""

from __future__ import annotations

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 30, 40, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _scale(vals, lo_pix, hi_pix):
    lo, hi = min(vals), max(vals)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo

    def to_pix(v):
        return lo_pix + (v - lo) / span * (hi_pix - lo_pix)

    return to_pix, lo, hi


def _frame(title: str, xlabel: str, ylabel: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>',
        f'<text x="18" y="{HEIGHT / 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 18 {HEIGHT / 2})">{ylabel}</text>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{WIDTH - MARGIN_L - MARGIN_R}" '
        f'height="{HEIGHT - MARGIN_T - MARGIN_B}" fill="none" stroke="#333"/>',
    ]


def line_chart(path, xs, series: dict, title: str = "", xlabel: str = "",
               ylabel: str = "") -> None:
    """Write a multi-series line chart; series maps label -> y values."""
    parts = _frame(title, xlabel, ylabel)
    all_y = [v for ys in series.values() for v in ys]
    to_x, x_lo, x_hi = _scale(xs, MARGIN_L, WIDTH - MARGIN_R)
    to_y, y_lo, y_hi = _scale(all_y, HEIGHT - MARGIN_B, MARGIN_T)
    for frac in (0.0, 0.5, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        parts.append(
            f'<text x="{_fmt(to_x(xv))}" y="{HEIGHT - MARGIN_B + 16}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="10">'
            f"{_fmt(xv)}</text>"
        )
        parts.append(
            f'<text x="{MARGIN_L - 6}" y="{_fmt(to_y(yv) + 3)}" '
            f'text-anchor="end" font-family="sans-serif" font-size="10">'
            f"{_fmt(yv)}</text>"
        )
    for idx, (label, ys) in enumerate(sorted(series.items())):
        color = PALETTE[idx % len(PALETTE)]
        pts = " ".join(f"{_fmt(to_x(x))},{_fmt(to_y(y))}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        for x, y in zip(xs, ys):
            parts.append(
                f'<circle cx="{_fmt(to_x(x))}" cy="{_fmt(to_y(y))}" r="3" '
                f'fill="{color}"/>'
            )
        ly = MARGIN_T + 16 + 16 * idx
        parts.append(
            f'<rect x="{WIDTH - MARGIN_R - 150}" y="{ly - 9}" width="10" '
            f'height="10" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{WIDTH - MARGIN_R - 135}" y="{ly}" '
            f'font-family="sans-serif" font-size="11">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def bar_chart(path, labels, values, title: str = "", ylabel: str = "") -> None:
    """Write a single-series bar chart."""
    parts = _frame(title, "", ylabel)
    to_y, y_lo, y_hi = _scale(list(values) + [0.0], HEIGHT - MARGIN_B, MARGIN_T)
    inner = WIDTH - MARGIN_L - MARGIN_R
    slot = inner / max(len(labels), 1)
    for frac in (0.0, 0.5, 1.0):
        yv = y_lo + frac * (y_hi - y_lo)
        parts.append(
            f'<text x="{MARGIN_L - 6}" y="{_fmt(to_y(yv) + 3)}" '
            f'text-anchor="end" font-family="sans-serif" font-size="10">'
            f"{_fmt(yv)}</text>"
        )
    base = to_y(max(y_lo, 0.0))
    for idx, (label, value) in enumerate(zip(labels, values)):
        color = PALETTE[idx % len(PALETTE)]
        x0 = MARGIN_L + slot * idx + slot * 0.15
        top = to_y(value)
        y0, h = (top, base - top) if top <= base else (base, top - base)
        parts.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(slot * 0.7)}" '
            f'height="{_fmt(h)}" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{_fmt(x0 + slot * 0.35)}" y="{HEIGHT - MARGIN_B + 16}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="10">'
            f"{label}</text>"
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
