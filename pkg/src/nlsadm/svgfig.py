"""Layered SVG views of the spectral plane.

One figure stacks, bottom to top: the shaded first domain, the axes,
the zero-set skeleton of Im of the quartic (the real axis and the
cubic curve, thin solid), the subset where the branched root is real
(thick dashed), the subset where it is purely imaginary (thin
dashed), the branch cuts (solid thick), and point markers for the
quartic roots (with multiplicities) and the endpoints of the vertical
cut.  The root is real exactly where the quartic is real and
nonnegative, so both dashed layers are sign-splits of the same
skeleton and need no extra tracing.

Mathematical orientation throughout: the k2 axis points up, via a
single scale(1,-1) on the geometry group; the viewBox equals the
requested window and stroke widths are 0.3 percent of its diagonal.
"""

from __future__ import annotations

import math

import numpy as np

from .core import Triple
from .geometry import (
    LABEL_D1,
    DomainPartition,
    quartic_parts,
    trace_gamma,
)
from .spectral import BranchedRoot

__all__ = ["CurveLayers", "compute_layers", "figure_chains", "render_figure"]


def _f(x: float) -> str:
    return "%.8g" % x


def _pts(points) -> str:
    return " ".join("%s,%s" % (_f(z.real), _f(z.imag)) for z in points)


class CurveLayers:
    """Skeleton polylines split by the sign of Re of the quartic."""

    def __init__(self, skeleton, root_real, root_imag):
        self.skeleton = skeleton
        self.root_real = root_real
        self.root_imag = root_imag


def _split_by_mask(points, mask):
    """Runs of consecutive mask-true vertices, transition points shared."""
    runs = []
    start = None
    n = len(points)
    for i in range(n + 1):
        on = i < n and mask[i]
        if on and start is None:
            start = max(0, i - 1)
        elif not on and start is not None:
            stop = min(n, i + 1)
            if stop - start >= 2:
                runs.append(points[start:stop])
            start = None
    return runs


def compute_layers(triple: Triple, window, resolution=(400, 400)) -> CurveLayers:
    gamma = trace_gamma(triple, window, resolution)
    x0, x1, y0, y1 = (float(v) for v in window)
    skeleton = list(gamma.polylines)
    if y0 < 0.0 < y1:
        xs = np.linspace(x0, x1, int(resolution[0]))
        skeleton.append(xs.astype(complex))
    root_real, root_imag = [], []
    for line in skeleton:
        pts = np.asarray(line, dtype=complex)
        re, _im = quartic_parts(triple, pts.real, pts.imag)
        root_real.extend(_split_by_mask(pts, re >= 0.0))
        root_imag.extend(_split_by_mask(pts, re < 0.0))
    return CurveLayers(skeleton, root_real, root_imag)


def _bbox_hits_window(zs, window) -> bool:
    x0, x1, y0, y1 = window
    xs = [z.real for z in zs]
    ys = [z.imag for z in zs]
    return max(xs) >= x0 and min(xs) <= x1 and max(ys) >= y0 and min(ys) <= y1


def _d1_rects(part: DomainPartition):
    """Merge horizontal runs of first-domain cells into rectangles."""
    x0, x1, y0, y1 = part.window
    ny, nx = part.labels.shape
    hx, hy = (x1 - x0) / nx, (y1 - y0) / ny
    rects = []
    for j in range(ny):
        row = part.labels[j]
        i = 0
        while i < nx:
            if row[i] != LABEL_D1:
                i += 1
                continue
            i0 = i
            while i < nx and row[i] == LABEL_D1:
                i += 1
            rects.append((x0 + i0 * hx, y0 + j * hy, (i - i0) * hx, hy))
    return rects


def render_figure(
    triple: Triple,
    br: BranchedRoot,
    partition: DomainPartition | None,
    layers: CurveLayers,
    window,
) -> str:
    x0, x1, y0, y1 = (float(v) for v in window)
    w, h = x1 - x0, y1 - y0
    diag = math.hypot(w, h)
    thin = 0.003 * diag
    thick = 2.5 * thin
    dot = 3.0 * thin
    font = 0.032 * diag

    out = []
    out.append(
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="%s %s %s %s" '
        'width="720" height="%s">' % (_f(x0), _f(-y1), _f(w), _f(h), _f(720.0 * h / w))
    )
    out.append(
        '<defs><clipPath id="win"><rect x="%s" y="%s" width="%s" height="%s"/></clipPath></defs>'
        % (_f(x0), _f(y0), _f(w), _f(h))
    )
    out.append(
        '<rect x="%s" y="%s" width="%s" height="%s" fill="#ffffff"/>'
        % (_f(x0), _f(-y1), _f(w), _f(h))
    )
    out.append('<g transform="scale(1,-1)" clip-path="url(#win)">')

    if partition is not None:
        out.append('<g class="d1-shade" fill="#cfe0f1" stroke="none">')
        for rx, ry, rw, rh in _d1_rects(partition):
            out.append(
                '<rect x="%s" y="%s" width="%s" height="%s"/>' % (_f(rx), _f(ry), _f(rw), _f(rh))
            )
        out.append("</g>")

    out.append('<g class="axes" stroke="#888888" stroke-width="%s" fill="none">' % _f(thin))
    if y0 < 0.0 < y1:
        out.append('<line x1="%s" y1="0" x2="%s" y2="0"/>' % (_f(x0), _f(x1)))
    if x0 < 0.0 < x1:
        out.append('<line x1="0" y1="%s" x2="0" y2="%s"/>' % (_f(y0), _f(y1)))
    out.append("</g>")

    def polylines(chains, cls, width, dash=None, color="#000000"):
        if not chains:
            return
        dash_attr = ' stroke-dasharray="%s"' % dash if dash else ""
        out.append(
            '<g class="%s" stroke="%s" stroke-width="%s" fill="none"%s>'
            % (cls, color, _f(width), dash_attr)
        )
        for pts in chains:
            if len(pts) >= 2 and _bbox_hits_window(pts, (x0, x1, y0, y1)):
                out.append('<polyline points="%s"/>' % _pts(pts))
        out.append("</g>")

    polylines(layers.skeleton, "skeleton", thin, color="#555555")
    polylines(
        layers.root_real, "root-real", thick, dash="%s %s" % (_f(8 * thin), _f(5 * thin))
    )
    polylines(
        layers.root_imag,
        "root-imag",
        thin,
        dash="%s %s" % (_f(3.5 * thin), _f(3.5 * thin)),
        color="#333333",
    )

    out.append('<g class="cuts" stroke="#b02020" stroke-width="%s" fill="none">' % _f(thick))
    for cut in br.cuts.all_cuts:
        if cut.kind == "degenerate":
            continue
        chain = cut.chain
        if not _bbox_hits_window(chain, (x0, x1, y0, y1)):
            continue
        if len(chain) == 2:
            out.append(
                '<line class="cut" x1="%s" y1="%s" x2="%s" y2="%s"/>'
                % (_f(chain[0].real), _f(chain[0].imag), _f(chain[1].real), _f(chain[1].imag))
            )
        else:
            out.append('<polyline class="cut" points="%s"/>' % _pts(chain))
    out.append("</g>")

    out.append('<g class="markers">')
    for r, m in zip(br.rootset.roots, br.rootset.mults):
        if not _bbox_hits_window([r], (x0, x1, y0, y1)):
            continue
        out.append(
            '<circle class="root" cx="%s" cy="%s" r="%s" fill="#000000"/>'
            % (_f(r.real), _f(r.imag), _f(dot))
        )
        out.append(
            '<text class="mult" transform="scale(1,-1)" x="%s" y="%s" '
            'font-size="%s" font-family="sans-serif">%d</text>'
            % (_f(r.real + 1.6 * dot), _f(-(r.imag + 1.6 * dot)), _f(font), m)
        )
    vc = br.cuts.vertical_cut
    if vc is not None:
        for z in (vc.p, vc.q):
            if _bbox_hits_window([z], (x0, x1, y0, y1)):
                out.append(
                    '<circle class="cpoint" cx="%s" cy="%s" r="%s" '
                    'fill="#ffffff" stroke="#000000" stroke-width="%s"/>'
                    % (_f(z.real), _f(z.imag), _f(0.8 * dot), _f(thin))
                )
    out.append("</g>")

    out.append("</g>")
    out.append("</svg>")
    svg = "\n".join(out) + "\n"
    if "nan" in svg or "inf" in svg:
        raise ValueError("non-finite coordinate leaked into the figure")
    return svg


def figure_chains(layers: CurveLayers, br: BranchedRoot):
    """Tagged point chains for the CSV twin of a figure."""
    chains = []
    for i, pts in enumerate(layers.skeleton):
        chains.append(("skeleton-%d" % i, pts))
    for i, pts in enumerate(layers.root_real):
        chains.append(("root-real-%d" % i, pts))
    for i, pts in enumerate(layers.root_imag):
        chains.append(("root-imag-%d" % i, pts))
    ci = 0
    for cut in br.cuts.all_cuts:
        if cut.kind == "degenerate":
            continue
        tag = "vertical-cut" if cut is br.cuts.vertical_cut else "cut-%d" % ci
        if cut is not br.cuts.vertical_cut:
            ci += 1
        chains.append((tag, cut.chain))
    chains.append(("roots", tuple(br.rootset.roots)))
    return chains
