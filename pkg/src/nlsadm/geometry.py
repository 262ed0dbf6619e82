"""Plane geometry of the branched root: sign fields of the real and
imaginary parts of the quartic, the cubic curve that carries its zero
set, the four spectral domains, and the vertical-cut position tests.

Grids are built from exactly antisymmetric center offsets so that the
mirror identities (negating Im k1 or c2 flips the imaginary part and
preserves the real part bitwise) can be asserted cell-exactly rather
than within a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import Triple
from .cuts import CutConfiguration
from .errors import ConfigError, DegenerateCut
from .roots import RootSet
from .spectral import BranchedRoot

LABEL_CUT = 0
LABEL_D1 = 1
LABEL_D2 = 2
LABEL_D3 = 3
LABEL_D4 = 4
LABEL_BOUNDARY = 5

_LABEL_NAMES = {
    LABEL_CUT: "cut",
    LABEL_D1: "D1",
    LABEL_D2: "D2",
    LABEL_D3: "D3",
    LABEL_D4: "D4",
    LABEL_BOUNDARY: "boundary",
}


def default_window(points, margin: float = 2.0) -> tuple:
    """Square box [-L, L]^2 with L = margin * (1 + max |point|)."""
    L = margin * (1.0 + max((abs(p) for p in points), default=0.0))
    return (-L, L, -L, L)


def grid_axes(window: tuple, resolution: tuple):
    """Cell-center coordinates; offsets are exactly antisymmetric so a
    centered window yields a grid closed under negation."""
    x0, x1, y0, y1 = (float(v) for v in window)
    nx, ny = (int(n) for n in resolution)
    if not (x1 > x0 and y1 > y0 and nx > 0 and ny > 0):
        raise ConfigError("window must be nonempty and resolution positive")
    cx, hx = (x0 + x1) / 2.0, (x1 - x0) / nx
    cy, hy = (y0 + y1) / 2.0, (y1 - y0) / ny
    xs = cx + (np.arange(nx) - (nx - 1) / 2.0) * hx
    ys = cy + (np.arange(ny) - (ny - 1) / 2.0) * hy
    return xs, ys


def quartic_parts(triple: Triple, k1, k2):
    """Real and imaginary parts of the quartic on a (k1, k2) mesh.

    For the defocusing sign these are the closed forms
        Im = 4 k2 (4 k1 (k1^2 - k2^2) + omega k1 + alpha c2)
        Re = 4 (k1^2-k2^2)^2 - 16 k1^2 k2^2 + 2 omega (k1^2-k2^2)
             + 4 alpha c2 k1 + (omega/2 + alpha^2)^2 - |c|^2;
    the focusing sign falls back to complex polynomial evaluation.
    """
    a, w, c2 = triple.alpha, triple.omega, triple.c2
    if triple.lam == 1:
        g = 4.0 * k1 * (k1 * k1 - k2 * k2) + w * k1 + a * c2
        im = 4.0 * k2 * g
        s = k1 * k1 - k2 * k2
        re = (
            4.0 * s * s
            - 16.0 * (k1 * k1) * (k2 * k2)
            + 2.0 * w * s
            + 4.0 * a * c2 * k1
            + (w / 2.0 + a * a) ** 2
            - triple.c_sq
        )
        return re, im
    from .core import build_quartic

    val = build_quartic(triple).eval(k1 + 1j * k2)
    return np.real(val), np.imag(val)


@dataclass(frozen=True)
class SignField:
    """Per-cell signs of Re and Im of the quartic on a centered grid."""

    triple: Triple
    window: tuple
    resolution: tuple
    re_sign: np.ndarray
    im_sign: np.ndarray

    def zero_cells(self) -> np.ndarray:
        return self.im_sign == 0


def compute_sign_field(triple: Triple, window: tuple, resolution: tuple) -> SignField:
    xs, ys = grid_axes(window, resolution)
    k1, k2 = np.meshgrid(xs, ys)
    re, im = quartic_parts(triple, k1, k2)
    return SignField(
        triple,
        tuple(float(v) for v in window),
        tuple(int(n) for n in resolution),
        np.sign(re).astype(np.int8),
        np.sign(im).astype(np.int8),
    )


# -- Gamma: the cubic curve carrying the off-axis zero set ---------------


@dataclass(frozen=True)
class GammaCurve:
    """Traced polylines of 4 k1 (k1^2 - k2^2) + omega k1 + alpha c2 = 0
    plus its real-axis crossings (at most three, ascending)."""

    triple: Triple
    window: tuple
    polylines: tuple
    real_intersections: tuple

    def residual(self) -> float:
        worst = 0.0
        for line in self.polylines:
            re, im = line.real, line.imag
            g = 4.0 * re * (re * re - im * im) + self.triple.omega * re + self.triple.alpha * self.triple.c2
            worst = max(worst, float(np.max(np.abs(g))))
        return worst


def gamma_values(triple: Triple, k1, k2):
    return 4.0 * k1 * (k1 * k1 - k2 * k2) + triple.omega * k1 + triple.alpha * triple.c2


def real_axis_crossings(triple: Triple, tol: float = 1e-7) -> tuple:
    """Real roots of 4 x^3 + omega x + alpha c2, deduplicated ascending.

    A double root of the cubic splits by about sqrt(eps) under rounding,
    so the merge tolerance must sit well above that.
    """
    w, b = triple.omega, triple.alpha * triple.c2
    roots = np.roots([4.0, 0.0, w, b])
    out: list[float] = []
    for r in roots:
        if abs(r.imag) <= tol * (1.0 + abs(r)):
            x = float(r.real)
            best, best_f = x, abs((4.0 * x * x + w) * x + b)
            for _ in range(3):
                df = 12.0 * x * x + w
                if df == 0.0:
                    break
                x -= ((4.0 * x * x + w) * x + b) / df
                fx = abs((4.0 * x * x + w) * x + b)
                if fx < best_f:
                    best, best_f = x, fx
            out.append(best)
    out.sort()
    dedup: list[float] = []
    for x in out:
        if not dedup or abs(x - dedup[-1]) > tol * (1.0 + abs(x)):
            dedup.append(x)
    return tuple(dedup)


def _marching_segments(xs, ys, F, center_fn=None):
    """Marching squares with linear interpolation on a node lattice.

    Returns segments keyed by the lattice edges they end on, so chains
    can be stitched without coordinate comparisons.  Saddle cells are
    disambiguated by the sign at the cell center (sampled through
    center_fn when available, corner average otherwise).
    """
    ny, nx = F.shape
    pos = F > 0.0
    segs = []

    def edge_point(i0, j0, i1, j1):
        f0, f1 = F[j0, i0], F[j1, i1]
        t = f0 / (f0 - f1) if f0 != f1 else 0.5
        x = xs[i0] + t * (xs[i1] - xs[i0])
        y = ys[j0] + t * (ys[j1] - ys[j0])
        return complex(x, y)

    for j in range(ny - 1):
        for i in range(nx - 1):
            idx = (
                (1 if pos[j, i] else 0)
                | (2 if pos[j, i + 1] else 0)
                | (4 if pos[j + 1, i + 1] else 0)
                | (8 if pos[j + 1, i] else 0)
            )
            if idx in (0, 15):
                continue
            bottom = ("h", i, j)
            top = ("h", i, j + 1)
            left = ("v", i, j)
            right = ("v", i + 1, j)
            pts = {
                bottom: lambda: edge_point(i, j, i + 1, j),
                right: lambda: edge_point(i + 1, j, i + 1, j + 1),
                top: lambda: edge_point(i, j + 1, i + 1, j + 1),
                left: lambda: edge_point(i, j, i, j + 1),
            }
            table = {
                1: [(left, bottom)],
                2: [(bottom, right)],
                3: [(left, right)],
                4: [(right, top)],
                6: [(bottom, top)],
                7: [(left, top)],
                8: [(top, left)],
                9: [(top, bottom)],
                11: [(top, right)],
                12: [(right, left)],
                13: [(right, bottom)],
                14: [(bottom, left)],
            }
            if idx in (5, 10):
                xc = 0.5 * (xs[i] + xs[i + 1])
                yc = 0.5 * (ys[j] + ys[j + 1])
                if center_fn is not None:
                    fc = center_fn(xc, yc)
                else:
                    fc = F[j, i] + F[j, i + 1] + F[j + 1, i] + F[j + 1, i + 1]
                center_pos = fc > 0.0
                if idx == 5:
                    pairs = [(left, top), (bottom, right)] if center_pos else [(left, bottom), (right, top)]
                else:
                    pairs = [(left, bottom), (right, top)] if center_pos else [(bottom, right), (top, left)]
            else:
                pairs = table[idx]
            for ea, eb in pairs:
                segs.append((ea, eb, pts[ea](), pts[eb]()))
    return segs


def _stitch(segs):
    """Assemble edge-keyed segments into maximal polylines."""
    by_edge: dict = {}
    for s, (ea, eb, pa, pb) in enumerate(segs):
        by_edge.setdefault(ea, []).append(s)
        by_edge.setdefault(eb, []).append(s)
    used = [False] * len(segs)
    lines = []
    for start in range(len(segs)):
        if used[start]:
            continue
        ea, eb, pa, pb = segs[start]
        used[start] = True
        chain = [pa, pb]
        edges = [ea, eb]
        # grow forward then backward
        for end in (1, 0):
            while True:
                tip = edges[-1] if end else edges[0]
                nxt = next((s for s in by_edge.get(tip, []) if not used[s]), None)
                if nxt is None:
                    break
                na, nb, qa, qb = segs[nxt]
                used[nxt] = True
                if na == tip:
                    point, edge = qb, nb
                else:
                    point, edge = qa, na
                if end:
                    chain.append(point)
                    edges.append(edge)
                else:
                    chain.insert(0, point)
                    edges.insert(0, edge)
        lines.append(np.array(chain))
    return lines


def trace_gamma(triple: Triple, window: tuple, resolution: tuple = (400, 400)) -> GammaCurve:
    """Marching-squares trace of the cubic zero curve inside a window."""
    xs, ys = grid_axes(window, resolution)
    k1, k2 = np.meshgrid(xs, ys)
    F = gamma_values(triple, k1, k2)
    segs = _marching_segments(xs, ys, F, lambda x, y: gamma_values(triple, x, y))
    lines = _stitch(segs)
    lines.sort(key=lambda ln: (ln[0].real, ln[0].imag, len(ln)))
    return GammaCurve(
        triple,
        tuple(float(v) for v in window),
        tuple(lines),
        real_axis_crossings(triple),
    )


# -- domain partition ----------------------------------------------------


@dataclass(frozen=True)
class DomainPartition:
    """Cell labels over the window plus connectivity of the first
    domain with the cut set removed."""

    window: tuple
    resolution: tuple
    labels: np.ndarray
    d1_components: np.ndarray
    d1_component_count: int

    def label_name(self, code: int) -> str:
        return _LABEL_NAMES[int(code)]

    def count(self, code: int) -> int:
        return int(np.count_nonzero(self.labels == code))


def _supercover_cells(a: complex, b: complex, window, resolution):
    """Indices of every grid cell a segment passes through."""
    x0, x1, y0, y1 = window
    nx, ny = resolution
    hx = (x1 - x0) / nx
    hy = (y1 - y0) / ny
    ts = [0.0, 1.0]
    dx = b.real - a.real
    dy = b.imag - a.imag
    if dx != 0.0:
        for i in range(nx + 1):
            t = (x0 + i * hx - a.real) / dx
            if 0.0 < t < 1.0:
                ts.append(t)
    if dy != 0.0:
        for j in range(ny + 1):
            t = (y0 + j * hy - a.imag) / dy
            if 0.0 < t < 1.0:
                ts.append(t)
    ts.sort()
    cells = set()
    for t0, t1 in zip(ts[:-1], ts[1:]):
        tm = 0.5 * (t0 + t1)
        x = a.real + tm * dx
        y = a.imag + tm * dy
        i = int(np.floor((x - x0) / hx))
        j = int(np.floor((y - y0) / hy))
        if 0 <= i < nx and 0 <= j < ny:
            cells.add((i, j))
    return cells


def _rasterize_cuts(cuts: CutConfiguration, window, resolution):
    mask = np.zeros((resolution[1], resolution[0]), dtype=bool)
    x0, x1, y0, y1 = window
    nx, ny = resolution
    hx = (x1 - x0) / nx
    hy = (y1 - y0) / ny
    for cut in cuts.all_cuts:
        if cut.kind == "degenerate":
            i = int(np.floor((cut.p.real - x0) / hx))
            j = int(np.floor((cut.p.imag - y0) / hy))
            if 0 <= i < nx and 0 <= j < ny:
                mask[j, i] = True
            continue
        for a, b in zip(cut.chain[:-1], cut.chain[1:]):
            for i, j in _supercover_cells(a, b, window, resolution):
                mask[j, i] = True
    return mask


def partition_domains(
    br: BranchedRoot,
    window: tuple | None = None,
    resolution: tuple = (800, 800),
    cuts: CutConfiguration | None = None,
) -> DomainPartition:
    """Label cells by the signs of Im k and Im of the branched root.

    Cells met by any cut are labeled as cut and block adjacency; the
    remaining first-domain cells are grouped into 4-connected
    components.
    """
    cuts = cuts if cuts is not None else br.cuts
    if window is None:
        window = default_window(cuts.branch_points)
    window = tuple(float(v) for v in window)
    resolution = tuple(int(n) for n in resolution)
    xs, ys = grid_axes(window, resolution)
    k1, k2 = np.meshgrid(xs, ys)
    om = br.value_raw(k1 + 1j * k2)
    sk = np.sign(k2).astype(np.int8)
    so = np.sign(np.imag(om)).astype(np.int8)

    labels = np.full(so.shape, LABEL_BOUNDARY, dtype=np.int8)
    labels[(sk > 0) & (so > 0)] = LABEL_D1
    labels[(sk > 0) & (so < 0)] = LABEL_D2
    labels[(sk < 0) & (so > 0)] = LABEL_D3
    labels[(sk < 0) & (so < 0)] = LABEL_D4
    labels[_rasterize_cuts(cuts, window, resolution)] = LABEL_CUT

    comp, n = ndimage.label(labels == LABEL_D1)
    return DomainPartition(window, resolution, labels, comp.astype(np.int32), int(n))


# -- vertical cut position tests -----------------------------------------


@dataclass(frozen=True)
class TopCutTest:
    """Sign of Im of the quartic at the top c-point and the resulting
    intersection verdict against the closure of the first domain."""

    top_point: complex
    top_point_sign: int
    intersects: bool
    abscissa: float
    K: float | None
    left_of_K: bool | None


def cut_intersects_D1_closure(triple: Triple, rootset: RootSet | None = None, tol: float = 1e-9) -> TopCutTest:
    """Evaluate Im of the quartic at (c2 + i |c1|) / (2 alpha).

    A strictly positive sign keeps the vertical cut clear of the first
    domain's closure; zero or negative means the cut reaches it.  The
    abscissa is compared against a real multiple zero K when the root
    set exhibits one.
    """
    if triple.lam != 1:
        raise ConfigError("cut position test uses the defocusing closed forms")
    scale = np.sqrt(triple.scale)
    if abs(triple.c1) <= tol * scale:
        raise DegenerateCut("vertical cut is degenerate when Re c vanishes")
    a = triple.alpha
    top = complex(triple.c2 / (2.0 * a), abs(triple.c1) / (2.0 * a))
    _re, im = quartic_parts(triple, top.real, top.imag)
    mag = max(1.0, abs(top)) ** 4
    sg = 0 if abs(im) <= 1e-13 * mag else (1 if im > 0 else -1)
    K = None
    left = None
    if rootset is not None:
        reals = [r.real for r, m in zip(rootset.roots, rootset.mults) if m >= 2 and abs(r.imag) <= tol * (1 + abs(r))]
        if reals:
            K = max(reals)
            left = top.real < K
    return TopCutTest(top, sg, sg <= 0, top.real, K, left)


@dataclass(frozen=True)
class K2Window:
    """Real crossings of the cubic and the sandwich test for the
    vertical-cut abscissa."""

    K1: float | None
    K2: float | None
    K3: float | None
    abscissa: float
    in_window: bool


def locate_K2_window(triple: Triple, tol: float = 1e-9) -> K2Window:
    """Sorted real roots of 4 x^3 + omega x + alpha c2 and whether
    c2 / (2 alpha) sits strictly between the middle root and zero."""
    if triple.lam != 1:
        raise ConfigError("window test uses the defocusing closed forms")
    xs = real_axis_crossings(triple, tol)
    absc = triple.c2 / (2.0 * triple.alpha)
    if len(xs) != 3:
        return K2Window(None, None, None, absc, False)
    k1, k2, k3 = xs
    return K2Window(k1, k2, k3, absc, bool(k2 < absc < 0.0))
