"""Minimal self-contained SVG emitter for log-log curve plots.

No external renderer: the output is a single <svg> element with axes,
decade ticks, one polyline per curve, optional dashed model overlays,
and optional vertical error bars.  Non-positive points cannot be drawn
on log axes and are dropped by the caller.
"""

from __future__ import annotations

import math

WIDTH, HEIGHT = 720, 520
MARGIN = dict(left=70, right=160, top=40, bottom=55)

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


class LogLogPlot:
    """Accumulates curves, then renders one SVG string."""

    def __init__(self, title: str, xlabel: str = "t", ylabel: str = "value"):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.curves = []
        self.overlays = []

    def add_curve(self, x, y, label: str, err=None):
        """Add a data polyline; err draws vertical bars where finite."""
        pts = [(float(a), float(b), (float(e) if err is not None else 0.0))
               for a, b, e in zip(x, y, err if err is not None else [0.0] * len(x))
               if a > 0 and b > 0]
        if pts:
            self.curves.append((label, pts))

    def add_overlay(self, x, y, label: str = ""):
        """Add a dashed model overlay."""
        pts = [(float(a), float(b)) for a, b in zip(x, y) if a > 0 and b > 0]
        if pts:
            self.overlays.append((label, pts))

    def _ranges(self):
        xs = [p[0] for _l, pts in self.curves for p in pts]
        ys = [p[1] for _l, pts in self.curves for p in pts]
        ys += [max(p[1] - p[2], p[1] * 0.5) for _l, pts in self.curves for p in pts]
        ys += [p[1] + p[2] for _l, pts in self.curves for p in pts]
        for _l, pts in self.overlays:
            xs += [p[0] for p in pts]
            ys += [p[1] for p in pts]
        ys = [y for y in ys if y > 0]
        if not xs or not ys:
            raise ValueError("nothing to plot: no positive points")
        pad = 0.05
        lx = (math.log10(min(xs)), math.log10(max(xs)))
        ly = (math.log10(min(ys)), math.log10(max(ys)))
        sx = (lx[1] - lx[0]) or 1.0
        sy = (ly[1] - ly[0]) or 1.0
        return ((lx[0] - pad * sx, lx[1] + pad * sx),
                (ly[0] - pad * sy, ly[1] + pad * sy))

    def render(self) -> str:
        (x0, x1), (y0, y1) = self._ranges()
        iw = WIDTH - MARGIN["left"] - MARGIN["right"]
        ih = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

        def px(x):
            return MARGIN["left"] + (math.log10(x) - x0) / (x1 - x0) * iw

        def py(y):
            return MARGIN["top"] + (y1 - math.log10(y)) / (y1 - y0) * ih

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{_esc(self.title)}</text>',
        ]
        # Frame.
        fx0, fy0 = MARGIN["left"], MARGIN["top"]
        out.append(f'<rect x="{fx0}" y="{fy0}" width="{iw}" height="{ih}" '
                   'fill="none" stroke="black"/>')
        # Decade ticks and gridlines.
        for k in range(math.ceil(x0), math.floor(x1) + 1):
            x = px(10.0 ** k)
            out.append(f'<line x1="{x:.1f}" y1="{fy0}" x2="{x:.1f}" '
                       f'y2="{fy0 + ih}" stroke="#dddddd"/>')
            out.append(f'<text x="{x:.1f}" y="{fy0 + ih + 18}" text-anchor="middle" '
                       f'font-family="sans-serif" font-size="12">1e{k}</text>')
        for k in range(math.ceil(y0), math.floor(y1) + 1):
            y = py(10.0 ** k)
            out.append(f'<line x1="{fx0}" y1="{y:.1f}" x2="{fx0 + iw}" '
                       f'y2="{y:.1f}" stroke="#dddddd"/>')
            out.append(f'<text x="{fx0 - 8}" y="{y + 4:.1f}" text-anchor="end" '
                       f'font-family="sans-serif" font-size="12">1e{k}</text>')
        out.append(f'<text x="{fx0 + iw / 2:.0f}" y="{HEIGHT - 12}" '
                   f'text-anchor="middle" font-family="sans-serif" font-size="13">'
                   f'{_esc(self.xlabel)}</text>')
        out.append(f'<text x="20" y="{fy0 + ih / 2:.0f}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="13" '
                   f'transform="rotate(-90 20 {fy0 + ih / 2:.0f})">'
                   f'{_esc(self.ylabel)}</text>')

        legend_y = fy0 + 14
        for i, (label, pts) in enumerate(self.curves):
            color = PALETTE[i % len(PALETTE)]
            coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y, _e in pts)
            out.append(f'<polyline points="{coords}" fill="none" '
                       f'stroke="{color}" stroke-width="1.6"/>')
            for x, y, e in pts:
                if e > 0:
                    ylo = max(y - e, 10.0 ** (y0 + 1e-9))
                    out.append(f'<line x1="{px(x):.2f}" y1="{py(ylo):.2f}" '
                               f'x2="{px(x):.2f}" y2="{py(y + e):.2f}" '
                               f'stroke="{color}" stroke-width="0.8"/>')
            lx = WIDTH - MARGIN["right"] + 12
            out.append(f'<line x1="{lx}" y1="{legend_y - 4}" x2="{lx + 22}" '
                       f'y2="{legend_y - 4}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{lx + 28}" y="{legend_y}" font-family="sans-serif" '
                       f'font-size="12">{_esc(label)}</text>')
            legend_y += 18
        for label, pts in self.overlays:
            coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
            out.append(f'<polyline points="{coords}" fill="none" stroke="#444444" '
                       f'stroke-width="1.2" stroke-dasharray="6 4"/>')
            if label:
                out.append(f'<text x="{WIDTH - MARGIN["right"] + 12}" y="{legend_y}" '
                           f'font-family="sans-serif" font-size="12" fill="#444444">'
                           f'{_esc(label)} (fit)</text>')
                legend_y += 18
        out.append("</svg>")
        return "\n".join(out)
