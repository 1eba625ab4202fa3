"""Static two-panel SVG chart of a sweep: ⟨S⟩ above, η and ε below."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

# Reported experimental values, drawn as a reference marker.
EXPERIMENT_S = 2.1
EXPERIMENT_SVALUE = 11.430
EXPERIMENT_ETA = 0.033

S_MAX = 12.0
S_THRESHOLD = 10.0

WIDTH, HEIGHT = 640, 560
LEFT, RIGHT = 70, 20
PANEL_H = 200
TOP_Y = (30, 300)

S_RANGE = (9.5, 12.25)
RATE_RANGE = (0.0, 1.0)

_COLORS = {"S": "#d62728", "eta": "#000000", "epsilon": "#1f77b4", "exp": "#d62728"}


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


class _Panel:
    def __init__(self, top: float, x_range, y_range):
        self.top = top
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.width = WIDTH - LEFT - RIGHT

    def px(self, x: float) -> float:
        return LEFT + (x - self.x0) / (self.x1 - self.x0) * self.width

    def py(self, y: float) -> float:
        y = min(max(y, self.y0), self.y1)
        return self.top + PANEL_H - (y - self.y0) / (self.y1 - self.y0) * PANEL_H

    def axes(self, ylabel: str, yticks) -> list[str]:
        bottom = self.top + PANEL_H
        out = [
            f'<rect x="{LEFT}" y="{self.top}" width="{self.width}" height="{PANEL_H}" '
            'fill="none" stroke="#000"/>'
        ]
        step = 1.0 if self.x1 - self.x0 <= 10 else 2.0
        x = math.ceil(self.x0)
        while x <= self.x1 + 1e-9:
            X = self.px(x)
            out.append(f'<line x1="{X:.2f}" y1="{bottom}" x2="{X:.2f}" y2="{bottom + 5}" stroke="#000"/>')
            out.append(
                f'<text x="{X:.2f}" y="{bottom + 18}" font-size="11" text-anchor="middle">{_fmt(x)}</text>'
            )
            x += step
        for y in yticks:
            Y = self.py(y)
            out.append(f'<line x1="{LEFT - 5}" y1="{Y:.2f}" x2="{LEFT}" y2="{Y:.2f}" stroke="#000"/>')
            out.append(
                f'<text x="{LEFT - 8}" y="{Y + 4:.2f}" font-size="11" text-anchor="end">{_fmt(y)}</text>'
            )
        out.append(
            f'<text x="{LEFT + self.width / 2}" y="{bottom + 34}" font-size="12" '
            'text-anchor="middle">scale factor s</text>'
        )
        mid = self.top + PANEL_H / 2
        out.append(
            f'<text x="18" y="{mid}" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 18 {mid})">{escape(ylabel)}</text>'
        )
        return out

    def hline(self, y: float, cls: str, dashed: bool = False) -> str:
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        Y = self.py(y)
        return (
            f'<line class="{cls}" data-y="{y:g}" x1="{LEFT}" y1="{Y:.2f}" '
            f'x2="{LEFT + self.width}" y2="{Y:.2f}" stroke="#555"{dash}/>'
        )

    def series(self, name: str, pts, marker: str) -> list[str]:
        color = _COLORS[name]
        out = [f'<g class="series series-{name}">']
        # A break in the polyline wherever a value is undefined.
        runs, cur = [], []
        for x, y in pts:
            if y is None or math.isnan(y):
                if cur:
                    runs.append(cur)
                cur = []
            else:
                cur.append((x, y))
        if cur:
            runs.append(cur)
        for run in runs:
            if len(run) > 1:
                d = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in run)
                out.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.2"/>')
        for run in runs:
            for x, y in run:
                out.append(_marker(marker, self.px(x), self.py(y), color, f"point point-{name}", x, y))
        out.append("</g>")
        return out


def _marker(kind: str, X: float, Y: float, color: str, cls: str, x: float, y: float) -> str:
    data = f'class="{cls}" data-s="{x:g}" data-value="{y:g}"'
    if kind == "square":
        return f'<rect {data} x="{X - 3:.2f}" y="{Y - 3:.2f}" width="6" height="6" fill="{color}"/>'
    if kind == "triangle":
        pts = f"{X:.2f},{Y - 4:.2f} {X - 4:.2f},{Y + 3:.2f} {X + 4:.2f},{Y + 3:.2f}"
        return f'<polygon {data} points="{pts}" fill="{color}"/>'
    if kind == "asterisk":
        r = 5
        d = 0.7 * r
        strokes = (
            f"M{X - r:.2f},{Y:.2f}H{X + r:.2f} M{X:.2f},{Y - r:.2f}V{Y + r:.2f} "
            f"M{X - d:.2f},{Y - d:.2f}L{X + d:.2f},{Y + d:.2f} "
            f"M{X - d:.2f},{Y + d:.2f}L{X + d:.2f},{Y - d:.2f}"
        )
        return f'<path {data} d="{strokes}" stroke="{color}" stroke-width="1.5" fill="none"/>'
    return f'<circle {data} cx="{X:.2f}" cy="{Y:.2f}" r="2.5" fill="{color}"/>'


def render_sweep(rows: list[dict]) -> str:
    """SVG document for parsed sweep rows (as returned by ``records.read_csv``)."""
    xs = [r["s"] for r in rows]
    x_range = (0.0, max([7.0] + [math.ceil(x) for x in xs]))
    upper = _Panel(TOP_Y[0], x_range, S_RANGE)
    lower = _Panel(TOP_Y[1], x_range, RATE_RANGE)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>',
        '<g id="panel-S">',
    ]
    parts += upper.axes("⟨S⟩", [9.5, 10, 10.5, 11, 11.5, 12])
    parts.append(upper.hline(S_MAX, "ref-line ref-max"))
    parts.append(upper.hline(S_THRESHOLD, "ref-line ref-threshold", dashed=True))
    parts += upper.series("S", [(r["s"], r["S"]) for r in rows], "circle")
    parts.append(
        '<g class="experiment">'
        + _marker("asterisk", upper.px(EXPERIMENT_S), upper.py(EXPERIMENT_SVALUE),
                  _COLORS["exp"], "experiment-point", EXPERIMENT_S, EXPERIMENT_SVALUE)
        + "</g>"
    )
    parts.append("</g>")

    parts.append('<g id="panel-rates">')
    parts += lower.axes("η, ε", [0, 0.2, 0.4, 0.6, 0.8, 1.0])
    parts += lower.series("eta", [(r["s"], r["eta"]) for r in rows], "square")
    parts += lower.series("epsilon", [(r["s"], r["epsilon"]) for r in rows], "triangle")
    parts.append(
        '<g class="experiment">'
        + _marker("asterisk", lower.px(EXPERIMENT_S), lower.py(EXPERIMENT_ETA),
                  _COLORS["exp"], "experiment-point", EXPERIMENT_S, EXPERIMENT_ETA)
        + "</g>"
    )
    legend_y = TOP_Y[1] + 16
    for i, (name, label, kind) in enumerate(
        [("eta", "η", "square"), ("epsilon", "ε", "triangle"), ("exp", "experiment", "asterisk")]
    ):
        X = LEFT + 14
        Y = legend_y + 16 * i
        parts.append(_marker(kind, X, Y, _COLORS[name], "legend", 0, 0))
        parts.append(f'<text x="{X + 10}" y="{Y + 4}" font-size="11">{label}</text>')
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
