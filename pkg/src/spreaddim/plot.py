"""Static SVG rendering of a dimension profile: estimate curve over a shaded CI band."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

WIDTH = 800
HEIGHT = 480
MARGIN = {"left": 70, "right": 30, "top": 40, "bottom": 60}

LINE_COLOR = "#1f77b4"
BAND_COLOR = "#1f77b4"
BAND_OPACITY = 0.25


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round-numbered ticks covering [lo, hi]."""
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:g}"


def render_profile_svg(t: Sequence[float], estimate: Sequence[float], ci_low: Sequence[float],
                       ci_high: Sequence[float], title: str = "Pseudo spread dimension") -> str:
    t = np.asarray(t, dtype=np.float64)
    est = np.asarray(estimate, dtype=np.float64)
    lo = np.asarray(ci_low, dtype=np.float64)
    hi = np.asarray(ci_high, dtype=np.float64)
    if t.size == 0:
        raise ValueError("nothing to plot")

    x0, x1 = float(t.min()), float(t.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    y0 = min(0.0, float(lo.min()))
    y1 = max(float(hi.max()), float(est.max()))
    if y1 <= y0:
        y1 = y0 + 1.0
    y1 += 0.05 * (y1 - y0)

    left, top = MARGIN["left"], MARGIN["top"]
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    bottom = top + ph

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return bottom - (y - y0) / (y1 - y0) * ph

    def pts(xs, ys):
        return " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="15">{_escape(title)}</text>',
    ]
    out.append('<g class="axes" stroke="#333333" stroke-width="1">')
    out.append(f'<line x1="{left}" y1="{bottom}" x2="{left + pw}" y2="{bottom}"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}"/>')
    out.append("</g>")
    out.append('<g class="ticks" fill="#333333">')
    for v in nice_ticks(x0, x1):
        x = px(v)
        out.append(f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 5}" stroke="#333333"/>')
        out.append(f'<text x="{x:.2f}" y="{bottom + 18}" text-anchor="middle">{_fmt(v)}</text>')
    for v in nice_ticks(y0, y1):
        y = py(v)
        out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="#333333"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">{_fmt(v)}</text>')
    out.append("</g>")
    out.append(f'<text x="{left + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">t</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2:.1f})">dimension</text>')

    if t.size == 1:
        out.append(f'<line class="ci-band" x1="{px(t[0]):.2f}" y1="{py(lo[0]):.2f}" '
                   f'x2="{px(t[0]):.2f}" y2="{py(hi[0]):.2f}" stroke="{BAND_COLOR}" '
                   f'stroke-opacity="{BAND_OPACITY * 2}" stroke-width="6"/>')
        out.append(f'<circle class="estimate-marker" cx="{px(t[0]):.2f}" cy="{py(est[0]):.2f}" '
                   f'r="4" fill="{LINE_COLOR}"/>')
    else:
        band = pts(np.concatenate([t, t[::-1]]), np.concatenate([hi, lo[::-1]]))
        out.append(f'<polygon class="ci-band" points="{band}" fill="{BAND_COLOR}" '
                   f'fill-opacity="{BAND_OPACITY}" stroke="none"/>')
        out.append(f'<polyline class="estimate" points="{pts(t, est)}" fill="none" '
                   f'stroke="{LINE_COLOR}" stroke-width="1.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_profile_svg(profile, path, title: str = "Pseudo spread dimension") -> None:
    svg = render_profile_svg(profile.grid.values, profile.column("estimate"),
                             profile.column("ci_low"), profile.column("ci_high"), title)
    Path(path).write_text(svg)
