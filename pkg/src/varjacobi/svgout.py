"""Minimal deterministic SVG scatter/polyline writer (no plotting deps)."""

from __future__ import annotations

import numpy as np

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2",
           "#17becf", "#bcbd22", "#7f7f7f"]


def svg_figure(polylines, point_sets, width=800, height=640, pad=0.06) -> str:
    """Polylines and point clouds in a fixed viewport computed from the data.

    ``polylines``: list of (label, complex array); ``point_sets``: same.
    """
    data = [np.asarray(p, dtype=np.complex128) for _, p in polylines]
    data += [np.asarray(p, dtype=np.complex128) for _, p in point_sets]
    allpts = np.concatenate([d for d in data if len(d)]) if data else np.zeros(1, complex)
    x0, x1 = float(np.min(allpts.real)), float(np.max(allpts.real))
    y0, y1 = float(np.min(allpts.imag)), float(np.max(allpts.imag))
    dx = (x1 - x0) or 1.0
    dy = (y1 - y0) or 1.0
    x0 -= pad * dx
    x1 += pad * dx
    y0 -= pad * dy
    y1 += pad * dy
    sx = width / (x1 - x0)
    sy = height / (y1 - y0)

    def map_pt(z):
        return (z.real - x0) * sx, height - (z.imag - y0) * sy

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for i, (label, pts) in enumerate(polylines):
        pts = np.asarray(pts, dtype=np.complex128)
        color = _COLORS[i % len(_COLORS)]
        coords = " ".join("%.3f,%.3f" % map_pt(z) for z in pts)
        out.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.2" '
            f'points="{coords}"><title>{label}</title></polyline>'
        )
    for j, (label, pts) in enumerate(point_sets):
        pts = np.asarray(pts, dtype=np.complex128)
        color = _COLORS[(len(polylines) + j) % len(_COLORS)]
        for z in pts:
            x, y = map_pt(z)
            out.append(
                f'<circle cx="{x:.3f}" cy="{y:.3f}" r="2.2" fill="{color}" '
                f'fill-opacity="0.85"><title>{label}</title></circle>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
