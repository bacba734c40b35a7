"""Static SVG line charts for probe waveforms.

Output is a pure function of the inputs: fixed coordinate formatting, fixed
palette, no timestamps. Long records are reduced per pixel column to the
first/min/max/last samples so peaks survive decimation.
"""

from __future__ import annotations

import math
from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

WIDTH = 900
PANEL_H = 360
INSET_H = 240
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 170, 30, 45
GAP = 30


def clip_range(time, lo: Optional[float], hi: Optional[float]):
    """Intersect a requested window with the data span.

    Returns ``(lo, hi, clipped)``; ``clipped`` is True when the request
    reached outside the data.
    """
    t_first, t_last = float(time[0]), float(time[-1])
    req_lo = t_first if lo is None else lo
    req_hi = t_last if hi is None else hi
    if req_hi <= req_lo:
        raise ValueError(f"empty time range {req_lo}:{req_hi}")
    new_lo, new_hi = max(req_lo, t_first), min(req_hi, t_last)
    if new_hi <= new_lo:
        raise ValueError(f"time range {req_lo}:{req_hi} does not overlap the data "
                         f"({t_first}:{t_last})")
    return new_lo, new_hi, (new_lo != req_lo or new_hi != req_hi)


def nice_ticks(lo: float, hi: float, count: int = 5) -> list:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9)
    ticks = []
    k = first
    while k * step <= hi + 1e-9 * step:
        ticks.append(k * step)
        k += 1
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _label(v: float) -> str:
    if v == 0:
        return "0"
    return f"{v:.4g}"


def _decimate(t, y, columns: int):
    n = len(t)
    if n <= 4 * columns:
        return t, y
    edges = np.linspace(0, n, columns + 1).astype(np.int64)
    keep = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        seg = y[a:b]
        idx = {a, b - 1, a + int(np.argmin(seg)), a + int(np.argmax(seg))}
        keep.extend(sorted(idx))
    keep = np.asarray(keep)
    return t[keep], y[keep]


def _panel(out, top, height, time, series, lo, hi, title, time_scale, time_unit):
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = top + MARGIN_T, top + height - MARGIN_B
    sel = (time >= lo) & (time <= hi)
    t = time[sel]
    ys = [np.asarray(v)[sel] for v in series.values()]
    vmin = min(float(v.min()) for v in ys) if len(t) else 0.0
    vmax = max(float(v.max()) for v in ys) if len(t) else 1.0
    if vmax == vmin:
        pad = abs(vmax) * 0.1 or 1.0
        vmin, vmax = vmin - pad, vmax + pad
    else:
        pad = 0.05 * (vmax - vmin)
        vmin, vmax = vmin - pad, vmax + pad

    def px(tv):
        return x0 + (tv - lo) / (hi - lo) * (x1 - x0)

    def py(v):
        return y1 - (v - vmin) / (vmax - vmin) * (y1 - y0)

    out.append(f'<text x="{_fmt((x0 + x1) / 2)}" y="{_fmt(top + 18)}" '
               f'text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
               f'height="{_fmt(y1 - y0)}" fill="none" stroke="#000"/>')
    for tick in nice_ticks(lo, hi):
        x = px(tick)
        out.append(f'<line x1="{_fmt(x)}" y1="{_fmt(y1)}" x2="{_fmt(x)}" y2="{_fmt(y1 + 5)}" '
                   f'stroke="#000"/>')
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(y1 + 18)}" text-anchor="middle" '
                   f'font-size="11">{_label(tick * time_scale)}</text>')
    for tick in nice_ticks(vmin, vmax):
        y = py(tick)
        out.append(f'<line x1="{_fmt(x0 - 5)}" y1="{_fmt(y)}" x2="{_fmt(x1)}" y2="{_fmt(y)}" '
                   f'stroke="#ddd"/>')
        out.append(f'<text x="{_fmt(x0 - 8)}" y="{_fmt(y + 4)}" text-anchor="end" '
                   f'font-size="11">{_label(tick)}</text>')
    out.append(f'<text x="{_fmt((x0 + x1) / 2)}" y="{_fmt(y1 + 36)}" text-anchor="middle" '
               f'font-size="12">time ({time_unit})</text>')

    clip_id = f"clip{int(top)}"
    out.append(f'<clipPath id="{clip_id}"><rect x="{_fmt(x0)}" y="{_fmt(y0)}" '
               f'width="{_fmt(x1 - x0)}" height="{_fmt(y1 - y0)}"/></clipPath>')
    for k, (name, y) in enumerate(zip(series, ys)):
        color = PALETTE[k % len(PALETTE)]
        td, yd = _decimate(t, y, int(x1 - x0))
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(td, yd))
        out.append(f'<polyline clip-path="url(#{clip_id})" fill="none" stroke="{color}" '
                   f'stroke-width="1.2" points="{pts}"/>')
        ly = y0 + 14 + 18 * k
        out.append(f'<line x1="{_fmt(x1 + 12)}" y1="{_fmt(ly - 4)}" x2="{_fmt(x1 + 36)}" '
                   f'y2="{_fmt(ly - 4)}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{_fmt(x1 + 42)}" y="{_fmt(ly)}" font-size="12">'
                   f'{escape(name)}</text>')


def _time_unit(span: float):
    if span < 1e-3:
        return 1e6, "μs"
    if span < 1.0:
        return 1e3, "ms"
    return 1.0, "s"


def render_svg(time, series: dict, t_range=None, zoom=None, title: str = "") -> str:
    """Render ``series`` (name -> samples on ``time``) as a standalone SVG document.

    ``t_range`` and ``zoom`` are ``(lo, hi)`` pairs already clipped to the
    data; ``zoom`` adds a second panel for that window below the main one.
    """
    if not series:
        raise ValueError("no series to plot")
    time = np.asarray(time, dtype=float)
    lo, hi = t_range if t_range is not None else (float(time[0]), float(time[-1]))
    height = PANEL_H + (GAP + INSET_H if zoom is not None else 0)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
           f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">',
           f'<rect width="{WIDTH}" height="{height}" fill="#fff"/>']
    scale, unit = _time_unit(hi - lo)
    _panel(out, 0, PANEL_H, time, series, lo, hi, title or "waveforms", scale, unit)
    if zoom is not None:
        zlo, zhi = zoom
        scale, unit = _time_unit(zhi - zlo)
        _panel(out, PANEL_H + GAP, INSET_H, time, series, zlo, zhi,
               f"zoom {_label(zlo * scale)} to {_label(zhi * scale)} {unit}", scale, unit)
    out.append("</svg>")
    return "\n".join(out) + "\n"
