"""Minimal self-contained SVG charts (no plotting dependency).

Emits hand-assembled SVG 1.1 documents: log/linear line charts and an
annotated heatmap.  Output is deterministic for identical inputs.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

__all__ = ["line_chart", "heatmap"]

_PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]

_W, _H = 840, 560
_ML, _MR, _MT, _MB = 90, 200, 50, 70


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _tick_label(value: float, log: bool) -> str:
    if log:
        e = round(math.log10(value))
        if abs(value - 10.0 ** e) < 1e-9 * value:
            return f"1e{e}"
        return f"{value:.3g}"
    return f"{value:.4g}"


def _axis_ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        e0 = math.floor(math.log10(lo) - 1e-9)
        e1 = math.ceil(math.log10(hi) + 1e-9)
        return [10.0 ** e for e in range(int(e0), int(e1) + 1)
                if lo / 10.0 <= 10.0 ** e <= hi * 10.0]
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / 5.0))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= 6.0:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-12 * span:
        ticks.append(v)
        v += step
    return ticks


class _Scale:
    def __init__(self, lo: float, hi: float, out_lo: float, out_hi: float,
                 log: bool):
        if log:
            lo = max(lo, 1e-300)
            hi = max(hi, lo * 10.0)
        elif hi <= lo:
            hi = lo + 1.0
        self.lo, self.hi, self.log = lo, hi, log
        self.out_lo, self.out_hi = out_lo, out_hi

    def __call__(self, v: float) -> float:
        if self.log:
            a = (math.log(v) - math.log(self.lo)) / (math.log(self.hi) - math.log(self.lo))
        else:
            a = (v - self.lo) / (self.hi - self.lo)
        return self.out_lo + a * (self.out_hi - self.out_lo)


def line_chart(title: str, xlabel: str, ylabel: str,
               series: list[tuple[str, list[tuple[float, float]]]],
               logx: bool = False, logy: bool = False) -> str:
    """Render labelled (x, y) polylines; non-finite points are dropped."""
    pts = [(x, y) for _, data in series for x, y in data
           if math.isfinite(x) and math.isfinite(y)
           and (not logx or x > 0.0) and (not logy or y > 0.0)]
    if pts:
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
    else:
        x_lo, x_hi, y_lo, y_hi = (0.1, 1.0, 0.1, 1.0) if (logx or logy) else (0.0, 1.0, 0.0, 1.0)
    if logy and y_lo == y_hi:
        y_hi = y_lo * 10.0
    sx = _Scale(x_lo, x_hi, _ML, _W - _MR, logx)
    sy = _Scale(y_lo, y_hi, _H - _MB, _MT, logy)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_W} {_H}" '
        f'font-family="Helvetica,Arial,sans-serif" font-size="13">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="28" text-anchor="middle" font-size="17">'
        f'{escape(title)}</text>',
    ]
    # frame
    out.append(f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
               f'height="{_H - _MT - _MB}" fill="none" stroke="#444"/>')
    for v in _axis_ticks(sx.lo, sx.hi, logx):
        if not sx.lo <= v <= sx.hi:
            continue
        x = sx(v)
        out.append(f'<line x1="{_fmt(x)}" y1="{_H - _MB}" x2="{_fmt(x)}" '
                   f'y2="{_H - _MB + 5}" stroke="#444"/>')
        out.append(f'<line x1="{_fmt(x)}" y1="{_MT}" x2="{_fmt(x)}" '
                   f'y2="{_H - _MB}" stroke="#eee"/>')
        out.append(f'<text x="{_fmt(x)}" y="{_H - _MB + 20}" '
                   f'text-anchor="middle">{_tick_label(v, logx)}</text>')
    for v in _axis_ticks(sy.lo, sy.hi, logy):
        if not sy.lo <= v <= sy.hi:
            continue
        y = sy(v)
        out.append(f'<line x1="{_ML - 5}" y1="{_fmt(y)}" x2="{_ML}" '
                   f'y2="{_fmt(y)}" stroke="#444"/>')
        out.append(f'<line x1="{_ML}" y1="{_fmt(y)}" x2="{_W - _MR}" '
                   f'y2="{_fmt(y)}" stroke="#eee"/>')
        out.append(f'<text x="{_ML - 9}" y="{_fmt(y + 4)}" '
                   f'text-anchor="end">{_tick_label(v, logy)}</text>')
    out.append(f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 18}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="24" y="{(_MT + _H - _MB) / 2}" text-anchor="middle" '
               f'transform="rotate(-90 24 {(_MT + _H - _MB) / 2})">'
               f'{escape(ylabel)}</text>')

    for i, (label, data) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        good = [(x, y) for x, y in data
                if math.isfinite(x) and math.isfinite(y)
                and (not logx or x > 0.0) and (not logy or y > 0.0)]
        if good:
            path = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in good)
            out.append(f'<polyline points="{path}" fill="none" '
                       f'stroke="{color}" stroke-width="1.8"/>')
            for x, y in good:
                out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" '
                           f'r="2.6" fill="{color}"/>')
        ly = _MT + 16 + 20 * i
        out.append(f'<line x1="{_W - _MR + 12}" y1="{ly - 4}" '
                   f'x2="{_W - _MR + 40}" y2="{ly - 4}" stroke="{color}" '
                   f'stroke-width="2.5"/>')
        out.append(f'<text x="{_W - _MR + 46}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _cell_color(frac: float) -> str:
    """Blue (0) through white (0.5) to red (1)."""
    frac = min(1.0, max(0.0, frac))
    if frac < 0.5:
        k = frac / 0.5
        r, g, b = int(70 + k * 185), int(110 + k * 145), 255
    else:
        k = (frac - 0.5) / 0.5
        r, g, b = 255, int(255 - k * 160), int(255 - k * 200)
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(title: str, row_labels: list[str], col_labels: list[str],
            values: list[list[float | None]],
            value_format: str = "{:.1f}") -> str:
    """Annotated matrix; None cells are rendered gray."""
    n_r, n_c = len(row_labels), len(col_labels)
    cw, ch = 64, 40
    ml, mt = 120, 90
    w = ml + n_c * cw + 40
    h = mt + n_r * ch + 40
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" '
        f'font-family="Helvetica,Arial,sans-serif" font-size="12">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w / 2}" y="26" text-anchor="middle" font-size="16">'
        f'{escape(title)}</text>',
    ]
    flat = [v for row in values for v in row if v is not None]
    v_lo = min(flat) if flat else 0.0
    v_hi = max(flat) if flat else 1.0
    if v_hi <= v_lo:
        v_hi = v_lo + 1.0
    for j, lab in enumerate(col_labels):
        x = ml + j * cw + cw / 2
        out.append(f'<text x="{x}" y="{mt - 10}" text-anchor="middle" '
                   f'transform="rotate(-35 {x} {mt - 10})">{escape(lab)}</text>')
    for i, lab in enumerate(row_labels):
        out.append(f'<text x="{ml - 8}" y="{mt + i * ch + ch / 2 + 4}" '
                   f'text-anchor="end">{escape(lab)}</text>')
        for j in range(n_c):
            v = values[i][j]
            x, y = ml + j * cw, mt + i * ch
            if v is None:
                fill = "#d8d8d8"
                text = "-"
            else:
                fill = _cell_color((v - v_lo) / (v_hi - v_lo))
                text = value_format.format(v)
            out.append(f'<rect x="{x}" y="{y}" width="{cw}" height="{ch}" '
                       f'fill="{fill}" stroke="#777"/>')
            out.append(f'<text x="{x + cw / 2}" y="{y + ch / 2 + 4}" '
                       f'text-anchor="middle">{escape(text)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
