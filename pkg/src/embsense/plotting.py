"""Minimal deterministic SVG charts.

Every figure is plain SVG text with fixed-precision coordinates and an
embedded data table in a <desc> element, so outputs are byte-identical
across runs and self-describing without the code that made them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2",
]

WIDTH, HEIGHT = 640, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 40, 48


@dataclass
class Series:
    name: str
    x: list[float]
    y: list[float]
    mode: str = "line"      # "line" or "scatter"
    dash: bool = False
    color: str | None = None


@dataclass
class Chart:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series] = field(default_factory=list)
    annotations: list[str] = field(default_factory=list)


def _f(v: float) -> str:
    return f"{v:.3f}"


def _esc(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = np.linspace(lo, hi, n)
    return [float(v) for v in raw]


def render_chart(chart: Chart) -> str:
    xs = [v for s in chart.series for v in s.x]
    ys = [v for s in chart.series for v in s.y]
    x_lo, x_hi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y_lo, y_hi = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad_y = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad_y, y_hi + pad_y

    def sx(v):
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R)

    def sy(v):
        return HEIGHT - MARGIN_B - (v - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B)

    rows = ["series,x,y"]
    for s in chart.series:
        rows.extend(f"{s.name},{x!r},{y!r}" for x, y in zip(s.x, s.y))
    desc = _esc("\n".join(rows))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<desc>{desc}</desc>",
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-size="15" '
        f'font-family="sans-serif">{_esc(chart.title)}</text>',
    ]
    # axes
    x0, y0 = MARGIN_L, HEIGHT - MARGIN_B
    x1, y1 = WIDTH - MARGIN_R, MARGIN_T
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for tx in _ticks(x_lo, x_hi):
        px = sx(tx)
        parts.append(f'<line x1="{_f(px)}" y1="{y0}" x2="{_f(px)}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(
            f'<text x="{_f(px)}" y="{y0 + 20}" text-anchor="middle" font-size="11" '
            f'font-family="sans-serif">{tx:.3g}</text>')
    for ty in _ticks(y_lo, y_hi):
        py = sy(ty)
        parts.append(f'<line x1="{x0 - 5}" y1="{_f(py)}" x2="{x0}" y2="{_f(py)}" stroke="black"/>')
        parts.append(
            f'<text x="{x0 - 8}" y="{_f(py + 4)}" text-anchor="end" font-size="11" '
            f'font-family="sans-serif">{ty:.3g}</text>')
    parts.append(
        f'<text x="{(x0 + x1) / 2:.0f}" y="{HEIGHT - 10}" text-anchor="middle" '
        f'font-size="12" font-family="sans-serif">{_esc(chart.xlabel)}</text>')
    parts.append(
        f'<text x="16" y="{(y0 + y1) / 2:.0f}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif" transform="rotate(-90 16 {(y0 + y1) / 2:.0f})">'
        f"{_esc(chart.ylabel)}</text>")

    for i, s in enumerate(chart.series):
        color = s.color or PALETTE[i % len(PALETTE)]
        if s.mode == "line":
            pts = " ".join(f"{_f(sx(x))},{_f(sy(y))}" for x, y in zip(s.x, s.y))
            dash = ' stroke-dasharray="6,4"' if s.dash else ""
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"{dash}/>')
        else:
            for x, y in zip(s.x, s.y):
                parts.append(
                    f'<circle cx="{_f(sx(x))}" cy="{_f(sy(y))}" r="2.5" '
                    f'fill="{color}" fill-opacity="0.7"/>')
    # legend
    ly = MARGIN_T + 6
    for i, s in enumerate(chart.series):
        if s.name.startswith("_"):
            continue
        color = s.color or PALETTE[i % len(PALETTE)]
        parts.append(
            f'<rect x="{x1 - 170}" y="{ly - 9}" width="12" height="8" fill="{color}"/>')
        parts.append(
            f'<text x="{x1 - 154}" y="{ly}" font-size="11" '
            f'font-family="sans-serif">{_esc(s.name)}</text>')
        ly += 16
    for note in chart.annotations:
        parts.append(
            f'<text x="{x0 + 10}" y="{ly}" font-size="12" '
            f'font-family="sans-serif">{_esc(note)}</text>')
        ly += 16
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def scatter_chart(title: str, xlabel: str, ylabel: str,
                  points: list[tuple[float, float]],
                  annotations: list[str]) -> str:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return render_chart(Chart(
        title=title, xlabel=xlabel, ylabel=ylabel,
        series=[Series(name="samples", x=xs, y=ys, mode="scatter")],
        annotations=annotations,
    ))


def spectrum_chart(title: str, cca_spectrum, baseline_spectrum,
                   annotations: list[str]) -> str:
    k1 = list(range(1, len(cca_spectrum) + 1))
    k2 = list(range(1, len(baseline_spectrum) + 1))
    return render_chart(Chart(
        title=title, xlabel="component index", ylabel="normalized singular value",
        series=[
            Series(name="sample-wise CCA directions", x=k1, y=list(cca_spectrum)),
            Series(name="clean embeddings", x=k2, y=list(baseline_spectrum), dash=True),
        ],
        annotations=annotations,
    ))


def polyline_chart(title: str, polylines: list, names: list[str]) -> str:
    series = [
        Series(name=name, x=[float(p[0]) for p in line], y=[float(p[1]) for p in line])
        for name, line in zip(names, polylines)
    ]
    return render_chart(Chart(title=title, xlabel="component 1", ylabel="component 2",
                              series=series))
