"""Standalone SVG figures for curves, caustics and the orthotripod atlas."""

from __future__ import annotations

import numpy as np

from . import kernel
from .caustic import CausticGeometry
from .curves import Curve
from .errors import OnCurve

SIZE = 600
PAD = 20
N_COLORS = {2: "#ffffff", 4: "#d6e4f0", 6: "#9ec3e6", 8: "#5b9bd5"}


def _num(x):
    return f"{x:.3f}".rstrip("0").rstrip(".")


class Canvas:
    """World-coordinate canvas with y pointing up."""

    def __init__(self, lo, hi, size=SIZE, pad=PAD):
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        span = max((hi - lo).max(), 1e-12)
        self.scale = (size - 2 * pad) / span
        self.lo, self.hi, self.pad = lo, hi, pad
        self.w = (hi[0] - lo[0]) * self.scale + 2 * pad
        self.h = (hi[1] - lo[1]) * self.scale + 2 * pad
        self.items = []

    def xy(self, p):
        p = np.asarray(p, float)
        x = (p[..., 0] - self.lo[0]) * self.scale + self.pad
        y = (self.hi[1] - p[..., 1]) * self.scale + self.pad
        return x, y

    def polyline(self, pts, stroke="black", width=1.5, closed=False, dash=None, fill="none"):
        x, y = self.xy(pts)
        d = " ".join(f"{_num(a)},{_num(b)}" for a, b in zip(x, y))
        tag = "polygon" if closed else "polyline"
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<{tag} points="{d}" fill="{fill}" stroke="{stroke}" '
                          f'stroke-width="{width}"{extra}/>')

    def line(self, a, b, stroke="black", width=1.0, dash=None):
        self.polyline(np.array([a, b]), stroke=stroke, width=width, dash=dash)

    def dot(self, p, r=3.0, fill="black"):
        x, y = self.xy(p)
        self.items.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="{r}" fill="{fill}"/>')

    def rect(self, p, cell, fill):
        x, y = self.xy(p + np.array([-cell / 2, cell / 2]))
        s = _num(cell * self.scale)
        self.items.append(f'<rect x="{_num(x)}" y="{_num(y)}" width="{s}" height="{s}" '
                          f'fill="{fill}" stroke="none"/>')

    def text(self, p, s, size=12):
        x, y = self.xy(p)
        self.items.append(f'<text x="{_num(x)}" y="{_num(y)}" font-size="{size}" '
                          f'font-family="sans-serif">{s}</text>')

    def render(self):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(self.w)}" '
                f'height="{_num(self.h)}" viewBox="0 0 {_num(self.w)} {_num(self.h)}">')
        return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>',
                          *self.items, "</svg>"]) + "\n"


def _inside(poly, q):
    try:
        return kernel.winding_index(poly, q) != 0
    except OnCurve:
        return False


def caustic_svg(curve: Curve, caustic: CausticGeometry, double_normals=(), shade_grid=60,
                samples=kernel.DEFAULT_SAMPLES):
    """Curve in black, caustic in red, cusps as dots, double normals dashed.

    The region inside the curve is shaded by the number of normals n(Q),
    sampled on a ``shade_grid`` square grid (0 disables shading).
    """
    X = curve.position(curve.sample_parameters(720))
    allpts = np.vstack([X, caustic.points])
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    margin = 0.05 * (hi - lo).max()
    cv = Canvas(lo - margin, hi + margin)
    if shade_grid:
        xs = np.linspace(lo[0], hi[0], shade_grid)
        ys = np.linspace(lo[1], hi[1], shade_grid)
        cell = max(xs[1] - xs[0], ys[1] - ys[0])
        qs = np.array([(x, y) for y in ys for x in xs])
        qs = qs[[_inside(X, q) for q in qs]]
        counts = [len(r) for r in kernel.normal_feet_batch(curve, qs, samples)]
        for q, n in zip(qs, counts):
            cv.rect(q, cell, N_COLORS.get(n, "#2e75b6"))
    cv.polyline(X, stroke="black", closed=True)
    cv.polyline(caustic.points, stroke="red", closed=True, width=1.2)
    for dn in double_normals:
        cv.line(dn.chord[0], dn.chord[1], stroke="#555555", dash="6,4")
    for _, p in caustic.cusps:
        cv.dot(p, fill="red")
    return cv.render()


def atlas_svg(atlas, panel=220, gap=20):
    """Unrolled cylinder: one panel per sheet in (angle, radius) coordinates.

    Faces whose corners are all positive-charge triples are shaded.  The
    outer edge of each panel is drawn red where it is glued to another sheet
    and dashed blue where it remains free boundary.
    """
    from .atlas import SHEETS, sheet_name

    M, R = atlas.n_rays, atlas.resolution
    pos = atlas.positive_nodes()
    w = 4 * panel + 5 * gap
    h = panel + 2 * gap + 20
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
           f'viewBox="0 0 {w} {h}">', '<rect width="100%" height="100%" fill="white"/>']

    def uv(s, k, j):
        x0 = gap + s * (panel + gap)
        return x0 + panel * j / M, gap + 20 + panel * (1 - k / R)

    for s, sh in enumerate(SHEETS):
        x0 = gap + s * (panel + gap)
        out.append(f'<text x="{x0}" y="{gap + 10}" font-size="13" font-family="sans-serif">'
                   f'Y{sheet_name(sh)}</text>')
        for k in range(R):
            for j in range(M):
                if k == 0:
                    corners = [0, 1 + j, 1 + (j + 1) % M]
                else:
                    v = 1 + (k - 1) * M + j
                    w_ = 1 + (k - 1) * M + (j + 1) % M
                    corners = [v, v + M, w_ + M, w_]
                if all(pos[atlas.sheet_node[c, s]] for c in corners):
                    xa, ya = uv(s, k + 1, j)
                    xb, yb = uv(s, k, j + 1)
                    out.append(f'<rect x="{_num(xa)}" y="{_num(ya)}" width="{_num(xb - xa)}" '
                               f'height="{_num(yb - ya)}" fill="#b7d7a8"/>')
        out.append(f'<rect x="{x0}" y="{gap + 20}" width="{panel}" height="{panel}" '
                   f'fill="none" stroke="#999999" stroke-width="0.5"/>')
        for j in range(M):
            v = 1 + (R - 1) * M + j
            w_ = 1 + (R - 1) * M + (j + 1) % M
            a, b = atlas.sheet_node[v, s], atlas.sheet_node[w_, s]
            glued = len(atlas.edges.get((min(a, b), max(a, b)), ())) > 1
            xa, ya = uv(s, R, j)
            xb, _ = uv(s, R, j + 1)
            style = 'stroke="red" stroke-width="2"' if glued else \
                'stroke="blue" stroke-width="2" stroke-dasharray="4,3"'
            out.append(f'<line x1="{_num(xa)}" y1="{_num(ya)}" x2="{_num(xb)}" y2="{_num(ya)}" {style}/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
