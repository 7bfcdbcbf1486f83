"""Minimal standalone SVG for closed curves in the plane."""

from __future__ import annotations

import numpy as np

SIZE = 480
MARGIN = 20
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def boundary_svg(curves, title: str = "") -> str:
    """``curves`` is a list of (label, complex array); each becomes a closed polyline.

    The viewport is square and centred on the origin, scaled to the largest
    modulus so every curve fits.
    """
    extent = max((float(np.max(np.abs(v))) for _, v in curves), default=1.0) or 1.0
    scale = (SIZE / 2 - MARGIN) / extent
    c = SIZE / 2
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
        f'<line x1="0" y1="{c}" x2="{SIZE}" y2="{c}" stroke="#ccc"/>',
        f'<line x1="{c}" y1="0" x2="{c}" y2="{SIZE}" stroke="#ccc"/>',
    ]
    if title:
        out.append(f'<text x="{MARGIN}" y="{MARGIN}" font-size="14" font-family="sans-serif">{title}</text>')
    for i, (label, vals) in enumerate(curves):
        v = np.append(vals, vals[:1])
        pts = " ".join(f"{c + scale * p.real:.3f},{c - scale * p.imag:.3f}" for p in v)
        out.append(
            f'<polyline fill="none" stroke="{COLORS[i % len(COLORS)]}" stroke-width="1.5" '
            f'points="{pts}"><title>r = {label}</title></polyline>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
