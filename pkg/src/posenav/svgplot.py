"""Tiny deterministic SVG plot writer (no plotting dependency).

Two plot kinds are enough for this package: step/line charts with optional
dotted vertical markers (cumulative error histograms) and 2D path charts
with a fitted line, heading arrows, and flagged samples (path reports).
All coordinates are formatted with fixed precision so output bytes are a
pure function of the data.
"""

from __future__ import annotations

import math

WIDTH, HEIGHT = 640, 420
MARGIN = 54
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


def _fmt(v: float) -> str:
    return f"{v:.3f}"


class _Canvas:
    def __init__(self, x_range, y_range, title, xlabel, ylabel):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
            f'<text x="{WIDTH / 2}" y="{HEIGHT - 8}" text-anchor="middle" font-size="12">{xlabel}</text>',
            f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 14 {HEIGHT / 2})">{ylabel}</text>',
            f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
            f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="black"/>',
        ]
        self._ticks()

    def px(self, x):
        return MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2 * MARGIN)

    def py(self, y):
        return HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2 * MARGIN)

    def _ticks(self):
        for i in range(5):
            fx = self.x0 + (self.x1 - self.x0) * i / 4
            fy = self.y0 + (self.y1 - self.y0) * i / 4
            self.parts.append(
                f'<text x="{_fmt(self.px(fx))}" y="{HEIGHT - MARGIN + 16}" '
                f'text-anchor="middle" font-size="10">{fx:.3g}</text>'
            )
            self.parts.append(
                f'<text x="{MARGIN - 6}" y="{_fmt(self.py(fy) + 3)}" '
                f'text-anchor="end" font-size="10">{fy:.3g}</text>'
            )

    def polyline(self, xs, ys, color, width=1.5, dash=None):
        pts = " ".join(f"{_fmt(self.px(x))},{_fmt(self.py(y))}" for x, y in zip(xs, ys))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{dash_attr}/>'
        )

    def circle(self, x, y, color, r=2.5):
        self.parts.append(
            f'<circle cx="{_fmt(self.px(x))}" cy="{_fmt(self.py(y))}" r="{r}" fill="{color}"/>'
        )

    def vline(self, x, color, dash="4,3"):
        self.parts.append(
            f'<line x1="{_fmt(self.px(x))}" y1="{MARGIN}" x2="{_fmt(self.px(x))}" '
            f'y2="{HEIGHT - MARGIN}" stroke="{color}" stroke-dasharray="{dash}"/>'
        )

    def arrow(self, x, y, dx, dy, color="black", scale=18.0):
        x0, y0 = self.px(x), self.py(y)
        x1, y1 = x0 + dx * scale, y0 - dy * scale
        self.parts.append(
            f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" '
            f'stroke="{color}" stroke-width="1.6"/>'
        )
        # arrow head
        ang = math.atan2(y1 - y0, x1 - x0)
        for side in (-1, 1):
            hx = x1 - 6 * math.cos(ang + side * 0.5)
            hy = y1 - 6 * math.sin(ang + side * 0.5)
            self.parts.append(
                f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(hx)}" y2="{_fmt(hy)}" '
                f'stroke="{color}" stroke-width="1.6"/>'
            )

    def legend(self, labels_colors):
        for i, (label, color) in enumerate(labels_colors):
            y = MARGIN + 14 + 16 * i
            self.parts.append(
                f'<line x1="{WIDTH - MARGIN - 110}" y1="{y}" x2="{WIDTH - MARGIN - 86}" '
                f'y2="{y}" stroke="{color}" stroke-width="2"/>'
            )
            self.parts.append(
                f'<text x="{WIDTH - MARGIN - 80}" y="{y + 4}" font-size="11">{label}</text>'
            )

    def write(self, path):
        self.parts.append("</svg>")
        with open(path, "w") as fh:
            fh.write("\n".join(self.parts) + "\n")


def step_chart(path, curves, vlines=(), title="", xlabel="", ylabel=""):
    """Step chart of (label, xs, ys) curves with dotted vertical markers.

    vlines is a sequence of (x, label) pairs; each marker reuses its curve's
    palette color in order.
    """
    all_x = [x for _, xs, _ in curves for x in xs] or [0.0, 1.0]
    all_y = [y for _, _, ys in curves for y in ys] or [0.0, 1.0]
    canvas = _Canvas(
        (min(min(all_x), 0.0), max(all_x)),
        (min(min(all_y), 0.0), max(max(all_y), 1.0)),
        title,
        xlabel,
        ylabel,
    )
    legend = []
    for i, (label, xs, ys) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        # step rendering: hold each y until the next x
        sx, sy = [], []
        for j, (x, y) in enumerate(zip(xs, ys)):
            if j > 0:
                sx.append(x)
                sy.append(ys[j - 1])
            sx.append(x)
            sy.append(y)
        canvas.polyline(sx, sy, color)
        legend.append((label, color))
    for i, (x, _label) in enumerate(vlines):
        canvas.vline(x, PALETTE[i % len(PALETTE)])
    if legend:
        canvas.legend(legend)
    canvas.write(path)


def line_chart(path, curves, title="", xlabel="", ylabel=""):
    """Plain line chart of (label, xs, ys) curves."""
    all_x = [x for _, xs, _ in curves for x in xs] or [0.0, 1.0]
    all_y = [y for _, _, ys in curves for y in ys] or [0.0, 1.0]
    canvas = _Canvas((min(all_x), max(all_x)), (min(all_y), max(all_y)), title, xlabel, ylabel)
    legend = []
    for i, (label, xs, ys) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        canvas.polyline(xs, ys, color)
        legend.append((label, color))
    if legend:
        canvas.legend(legend)
    canvas.write(path)


def path_chart(
    path,
    xz,
    fitted_line=None,
    arrows=(),
    flagged=(),
    title="",
    xlabel="x",
    ylabel="z",
):
    """Scatter of (x, z) positions with optional fitted line, heading arrows
    ((x, z, dx, dz) unit headings), and flagged sample indices."""
    xs = [p[0] for p in xz] or [0.0, 1.0]
    zs = [p[1] for p in xz] or [0.0, 1.0]
    pad_x = 0.05 * max(max(xs) - min(xs), 1e-6)
    pad_z = 0.05 * max(max(zs) - min(zs), 1e-6)
    canvas = _Canvas(
        (min(xs) - pad_x, max(xs) + pad_x),
        (min(zs) - pad_z, max(zs) + pad_z),
        title,
        xlabel,
        ylabel,
    )
    for i, (x, z) in enumerate(xz):
        canvas.circle(x, z, "#d62728" if i in set(flagged) else "#1f77b4", r=2.0)
    if fitted_line is not None:
        (x0, z0), (x1, z1) = fitted_line
        canvas.polyline([x0, x1], [z0, z1], "#2ca02c", width=1.8)
    for x, z, dx, dz in arrows:
        canvas.arrow(x, z, dx, dz)
    canvas.write(path)
