"""Grouped-bar SVG of F1 and F1-class per system, one panel per matching mode."""
from __future__ import annotations

from xml.sax.saxutils import escape

PANEL_W = 360
PANEL_H = 240
MARGIN = 40
BAR_W = 18
COLORS = {"f1": "#4c72b0", "f1_class": "#dd8452"}


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_svg(reports: list[dict[str, float]], labels: list[str]) -> str:
    if len(reports) != len(labels):
        raise ValueError("need exactly one label per report")
    if not reports:
        raise ValueError("need at least one report")
    n = len(reports)
    group_w = max(2 * BAR_W + 16, (PANEL_W - 2 * MARGIN) / n)
    panel_w = 2 * MARGIN + group_w * n
    width = 2 * panel_w
    height = PANEL_H + 2 * MARGIN
    base = MARGIN + PANEL_H
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{height}" '
        f'viewBox="0 0 {_fmt(width)} {height}" font-family="sans-serif" font-size="10">'
    ]
    for p, mode in enumerate(("strict", "relaxed")):
        x0 = p * panel_w
        out.append(f'<g class="panel" data-mode="{mode}">')
        out.append(f'<text x="{_fmt(x0 + panel_w / 2)}" y="{MARGIN / 2:.2f}" '
                   f'text-anchor="middle" font-size="12">{mode} evaluation</text>')
        out.append(f'<line x1="{_fmt(x0 + MARGIN)}" y1="{MARGIN}" x2="{_fmt(x0 + MARGIN)}" '
                   f'y2="{base}" stroke="black"/>')
        out.append(f'<line x1="{_fmt(x0 + MARGIN)}" y1="{base}" x2="{_fmt(x0 + panel_w - MARGIN)}" '
                   f'y2="{base}" stroke="black"/>')
        for k in range(6):
            v = k / 5
            y = base - v * PANEL_H
            out.append(f'<text x="{_fmt(x0 + MARGIN - 4)}" y="{_fmt(y + 3)}" '
                       f'text-anchor="end">{v:.1f}</text>')
        for g, (report, label) in enumerate(zip(reports, labels)):
            gx = x0 + MARGIN + g * group_w + (group_w - 2 * BAR_W) / 2
            out.append(f'<g class="group" data-label="{escape(label)}">')
            for b, metric in enumerate(("f1", "f1_class")):
                value = float(report[f"{mode}.{metric}"])
                h = value * PANEL_H
                bx = gx + b * BAR_W
                out.append(
                    f'<rect class="bar" data-metric="{metric}" data-value="{value:.6f}" '
                    f'x="{_fmt(bx)}" y="{base - h:.6f}" width="{BAR_W}" height="{h:.6f}" '
                    f'fill="{COLORS[metric]}"/>'
                )
                out.append(f'<text x="{_fmt(bx + BAR_W / 2)}" y="{_fmt(base - h - 3)}" '
                           f'text-anchor="middle" font-size="8">{value:.3f}</text>')
            out.append(f'<text x="{_fmt(gx + BAR_W)}" y="{base + 14}" '
                       f'text-anchor="middle">{escape(label)}</text>')
            out.append("</g>")
        out.append("</g>")
    lx = 8
    for metric, name in (("f1", "F1"), ("f1_class", "F1-class")):
        out.append(f'<rect x="{lx}" y="{height - 14}" width="10" height="10" fill="{COLORS[metric]}"/>')
        out.append(f'<text x="{lx + 14}" y="{height - 5}">{name}</text>')
        lx += 70
    out.append("</svg>")
    return "\n".join(out) + "\n"
