"""Static pictures of a set next to its dilation and erosion.

1-D interval sets become an SVG with three stacked number-line bands; 2-D grid
sets become a plain PPM (P3) raster.  Output depends only on the inputs, so
two renders of the same set are byte-identical.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .geometry import GeometryError, GridSet, IntervalSet
from .morphology import MorphContext, dilate, erode

BAND_COLORS = ("#3b6ea5", "#9cc3e6", "#1f3b5a")
# background, dilation ring, A, erosion
PPM_COLORS = ((255, 255, 255), (190, 215, 240), (80, 130, 190), (20, 45, 80))


def _fmt(x) -> str:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return str(x)


def _view(sets) -> tuple[Fraction, Fraction]:
    finite = []
    for S in sets:
        for iv in S:
            finite += [v for v in (iv.lo, iv.hi) if abs(v) != math.inf]
    if not finite:
        return Fraction(-1), Fraction(1)
    lo, hi = min(finite), max(finite)
    pad = max((hi - lo) / 10, Fraction(1, 2))
    return lo - pad, hi + pad


def bands_svg(A: IntervalSet, ctx: MorphContext, width: int = 600) -> str:
    """SVG with bands for A, A^eps and A^-eps over a shared axis."""
    if not isinstance(A, IntervalSet):
        raise GeometryError("SVG bands need a 1-D interval set")
    layers = [("A", A), ("A^eps", dilate(A, ctx)), ("A^-eps", erode(A, ctx))]
    lo, hi = _view([S for _, S in layers])
    left, span = 80, width - 100

    def px(x) -> str:
        x = min(max(x, lo), hi) if abs(x) != math.inf else (lo if x < 0 else hi)
        return f"{left + float((x - lo) / (hi - lo)) * span:.3f}"

    h = 30 * len(layers) + 40
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{h}" viewBox="0 0 {width} {h}">',
        f'<text x="{left}" y="14" font-family="monospace" font-size="11">eps = {ctx.eps}, view [{lo}, {hi}]</text>',
    ]
    for row, ((name, S), color) in enumerate(zip(layers, BAND_COLORS)):
        y = 30 + 30 * row
        out.append(f'<text x="4" y="{y + 14}" font-family="monospace" font-size="12">{name}</text>')
        out.append(f'<line x1="{left}" y1="{y + 10}" x2="{left + span}" y2="{y + 10}" stroke="#999" stroke-width="1"/>')
        for iv in S:
            x0, x1 = px(iv.lo), px(iv.hi)
            out.append(
                f'<rect x="{x0}" y="{y + 3}" width="{float(x1) - float(x0):.3f}" height="14" fill="{color}">'
                f"<title>{'[' if iv.lo_closed else '('}{_fmt(iv.lo)}, {_fmt(iv.hi)}{']' if iv.hi_closed else ')'}</title></rect>"
            )
            if iv.lo == iv.hi:
                out.append(f'<circle cx="{x0}" cy="{y + 10}" r="3" fill="{color}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def layer_array(A: GridSet, ctx: MorphContext) -> np.ndarray:
    """Per-cell layer codes over the dilation's bounding box plus a one-cell
    border: 0 outside, 1 dilation only, 2 in A, 3 in the erosion."""
    if not isinstance(A, GridSet):
        raise GeometryError("PPM layers need a grid set")
    if A.dim != 2:
        raise GeometryError("rendering supports 1-D and 2-D sets only")
    D, E = dilate(A, ctx), erode(A, ctx)
    if not D.is_bounded():
        raise GeometryError("cannot rasterize an unbounded set")
    if D.is_empty():
        lo, shape = (0, 0), (1, 1)
    else:
        (lo0, hi0) = D.bbox()
        lo = tuple(int(v) - 1 for v in lo0)
        shape = tuple(int(h) - int(l) + 3 for l, h in zip(lo0, hi0))
    layer = np.zeros(shape, dtype=np.int64)
    for level, S in enumerate((D, A, E), start=1):
        if not S.is_empty():
            layer[S.embed(lo, shape)] = level
    return layer


def layers_ppm(A: GridSet, ctx: MorphContext, scale: int = 4) -> str:
    """P3 raster: erosion darkest, then A, then the dilation ring."""
    layer = np.kron(layer_array(A, ctx), np.ones((scale, scale), dtype=np.int64))
    h, w = layer.shape
    rows = [" ".join(" ".join(str(c) for c in PPM_COLORS[v]) for v in row) for row in layer]
    return f"P3\n{w} {h}\n255\n" + "\n".join(rows) + "\n"


def render(A, ctx: MorphContext) -> tuple[str, str]:
    """(text, file suffix) for a 1-D or 2-D set."""
    if isinstance(A, IntervalSet):
        return bands_svg(A, ctx), ".svg"
    if isinstance(A, GridSet):
        if A.dim == 1:
            raise GeometryError("1-D grids are not rendered; use an interval set")
        return layers_ppm(A, ctx), ".ppm"
    raise GeometryError(f"cannot render {type(A).__name__}")
