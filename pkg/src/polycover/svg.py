"""Hand-written SVG 1.1 output.

Coordinates are written with a fixed ``%.6g``-style format and y flipped, so
the same scene always produces the same bytes.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .boundary import generate_encircling_points
from .geometry import CircleConfiguration, ConvexPolygon, clipped_voronoi, minimum_bounding_rectangle


def _f(x: float) -> str:
    s = f"{float(x):.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _pt(p) -> str:
    return f"{_f(p[0])},{_f(-p[1])}"


def view_box(poly: ConvexPolygon, margin: float = 0.05) -> tuple[float, float, float, float]:
    """Axis-aligned box around the minimum bounding rectangle plus a margin
    on every side, in flipped (SVG) coordinates."""
    corners = minimum_bounding_rectangle(poly).corners
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    pad = margin * max(hi - lo)
    return (lo[0] - pad, -hi[1] - pad, hi[0] - lo[0] + 2 * pad, hi[1] - lo[1] + 2 * pad)


def svg_document(
    poly: ConvexPolygon,
    cfg: CircleConfiguration | None = None,
    title: str | None = None,
    encircling_points: bool = False,
    voronoi: bool = False,
    alpha_offset: float = 1.0,
) -> str:
    x, y, w, h = view_box(poly)
    stroke = _f(0.004 * max(w, h))
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{_f(x)} {_f(y)} {_f(w)} {_f(h)}">',
    ]
    if title:
        out.append(f"<title>{title}</title>")
    out.append(f'<polygon points="{" ".join(_pt(v) for v in poly.vertices)}" fill="#f4f4f4" stroke="#000" stroke-width="{stroke}"/>')
    have = cfg is not None and cfg.n > 0
    if have and voronoi:
        try:
            cells = clipped_voronoi(cfg.centers, poly)
        except ValueError:
            cells = []
        for cell in cells:
            pts = " ".join(_pt(v) for v in cell.polygon.vertices)
            out.append(f'<polygon points="{pts}" fill="none" stroke="#999" stroke-width="{stroke}"/>')
    if have:
        out.append(f'<g fill="#3a7bd5" fill-opacity="0.35" stroke="#1d3f6e" stroke-width="{stroke}">')
        for c in cfg.centers:
            out.append(f'<circle cx="{_f(c[0])}" cy="{_f(-c[1])}" r="{_f(cfg.radius)}"/>')
        out.append("</g>")
    if have and encircling_points:
        pts = generate_encircling_points(poly, cfg.n, cfg.radius, alpha_offset)
        dot = _f(0.01 * max(w, h))
        out.append('<g fill="#c0392b">')
        for p in pts.points:
            out.append(f'<circle cx="{_f(p[0])}" cy="{_f(-p[1])}" r="{dot}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(poly: ConvexPolygon, cfg: CircleConfiguration | None, report=None, path=None, **options) -> str:
    """Write the scene to ``path`` (if given) and return the SVG text."""
    title = None
    if report is not None:
        title = f"n={report.n} r={_f(report.radius)} coverage={report.coverage_rate:.4f}"
    text = svg_document(poly, cfg, title=title, **options)
    if path is not None:
        Path(path).write_text(text)
    return text


def render_report(report, path=None, **options) -> str:
    poly = ConvexPolygon(np.asarray(report.polygon, dtype=float))
    cfg = CircleConfiguration(np.asarray(report.centers, dtype=float), report.radius) if report.centers else None
    return render_svg(poly, cfg, report, path, **options)
