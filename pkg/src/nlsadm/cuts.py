"""Branch cut configurations for the branched square root.

Only odd-multiplicity roots of the quartic are genuine square-root
branch points, so the default pairing connects those (conjugate partners
first, leftover real roots in adjacent pairs) and attaches zero-length
cuts to even-multiplicity roots.  A third, vertical cut spans the two
zeros of (2 alpha k - i conj(c))(2 alpha k + i c); the branched root
itself does not jump across it, but the normalizer matrix prefactor
does.  Loop cuts (closed circles around a double zero) are supported
because they change the connectivity of the upper spectral domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Triple
from .errors import ConfigError, InvalidPairing
from .roots import RootSet

_LOOP_SIDES = 96


def seg_distance(z, a: complex, b: complex):
    """Distance from point(s) z to the segment [a, b]."""
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0.0:
        return np.abs(z - a)
    t = np.clip(((np.conj(d)) * (z - a)).real / L2, 0.0, 1.0)
    return np.abs(z - (a + t * d))


def chain_distance(z, chain):
    best = None
    for a, b in zip(chain[:-1], chain[1:]):
        d = seg_distance(z, a, b)
        best = d if best is None else np.minimum(best, d)
    if best is None:
        return np.abs(z - chain[0])
    return best


def point_in_polygon(z, poly):
    """Even-odd rule point-in-polygon test, vectorized over z."""
    zr = np.real(z)
    zi = np.imag(z)
    inside = np.zeros(np.shape(z), dtype=bool)
    n = len(poly)
    for i in range(n):
        a = poly[i]
        b = poly[(i + 1) % n]
        if a.imag == b.imag:
            continue
        cond = (a.imag > zi) != (b.imag > zi)
        xint = a.real + (zi - a.imag) * (b.real - a.real) / (b.imag - a.imag)
        crossing = cond & (zr < xint)
        inside ^= crossing
    return inside


@dataclass(frozen=True)
class Cut:
    """One branch cut.

    kind is "segment" for a straight cut between two roots, "degenerate"
    for a zero-length cut at an even-multiplicity root, "loop" for a
    closed circle, and "vertical" for the cut between the two c-points.
    chain holds the polyline (a closed ring for loops).  For quartic
    cuts, root_indices names the paired entries of the root set.
    """

    kind: str
    p: complex
    q: complex
    chain: tuple = field(default=())
    root_indices: tuple = field(default=())
    center: complex | None = None
    radius: float | None = None

    def __post_init__(self):
        if not self.chain:
            ch = (self.p,) if self.kind == "degenerate" else (self.p, self.q)
            object.__setattr__(self, "chain", ch)

    @property
    def degenerate(self) -> bool:
        return self.kind == "degenerate"

    @property
    def length(self) -> float:
        return sum(abs(b - a) for a, b in zip(self.chain[:-1], self.chain[1:]))

    def distance(self, z):
        if self.kind == "degenerate":
            return np.abs(z - self.p)
        return chain_distance(z, self.chain)

    def interior_points(self, n: int):
        """n evenly spaced points strictly inside the cut."""
        if self.kind == "degenerate":
            raise ConfigError("degenerate cut has no interior")
        ts = (np.arange(n) + 1.0) / (n + 1.0)
        return self.p + ts * (self.q - self.p) if self.kind in ("segment", "vertical") else _chain_points(self.chain, ts)

    def unit_normal(self) -> complex:
        d = self.q - self.p
        if d == 0:
            raise ConfigError("cut has no direction")
        return 1j * d / abs(d)


def _chain_points(chain, ts):
    lens = [abs(b - a) for a, b in zip(chain[:-1], chain[1:])]
    total = sum(lens)
    out = []
    for t in ts:
        s = t * total
        for (a, b), L in zip(zip(chain[:-1], chain[1:]), lens):
            if s <= L or (a, b) == (chain[-2], chain[-1]):
                out.append(a + (b - a) * (s / L if L else 0.0))
                break
            s -= L
    return np.array(out)


@dataclass(frozen=True)
class CutConfiguration:
    """Two quartic cuts plus the optional vertical cut."""

    quartic_cuts: tuple
    vertical_cut: Cut | None
    rootset: RootSet
    triple: Triple

    @property
    def branch_points(self) -> tuple:
        """All cut endpoints.  Degenerate quartic cuts contribute their
        root; an absent vertical cut contributes nothing."""
        pts = []
        for c in self.quartic_cuts:
            if c.kind == "degenerate":
                pts.append(c.p)
            elif c.kind == "loop":
                pts.append(c.center)
            else:
                pts.extend([c.p, c.q])
        if self.vertical_cut is not None:
            pts.extend([self.vertical_cut.p, self.vertical_cut.q])
        seen = []
        for p in pts:
            if not any(abs(p - s) <= 1e-12 * (1 + abs(p)) for s in seen):
                seen.append(p)
        return tuple(seen)

    @property
    def all_cuts(self) -> tuple:
        cs = tuple(self.quartic_cuts)
        if self.vertical_cut is not None:
            cs = cs + (self.vertical_cut,)
        return cs

    @property
    def geom_tol(self) -> float:
        pts = []
        for c in self.all_cuts:
            pts.extend(c.chain)
        pts = np.array(pts, dtype=complex)
        if len(pts) == 0:
            return 1e-9
        diam = math.hypot(np.ptp(pts.real), np.ptp(pts.imag))
        if diam == 0.0:
            diam = 1.0 + float(np.max(np.abs(pts)))
            return 1e-9 * diam
        return 1e-6 * diam

    def distance(self, z):
        best = None
        for c in self.all_cuts:
            d = c.distance(z)
            best = d if best is None else np.minimum(best, d)
        return best

    @property
    def crossings(self) -> tuple:
        """Transverse intersection points of the vertical cut with the
        quartic cuts (allowed, but callers may want to know)."""
        if self.vertical_cut is None:
            return ()
        out = []
        v = self.vertical_cut
        for c in self.quartic_cuts:
            if c.kind != "segment":
                continue
            pt = _segment_intersection(v.p, v.q, c.p, c.q)
            if pt is not None:
                out.append(pt)
        return tuple(out)


def _segment_intersection(a, b, c, d):
    r = b - a
    s = d - c
    den = (r * np.conj(s)).imag
    if den == 0.0:
        return None
    t = ((c - a) * np.conj(s)).imag / den
    u = ((c - a) * np.conj(r)).imag / den
    if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
        return a + t * r
    return None


def _collinear_overlap(a, b, c, d, tol) -> bool:
    r = b - a
    s = d - c
    if abs((r * np.conj(s)).imag) > tol * (abs(r) * abs(s) + 1e-300):
        return False
    if abs(((c - a) * np.conj(r)).imag) > tol * (abs(r) ** 2 + abs(c - a) * abs(r) + 1e-300):
        return False
    # project endpoints of [c, d] on the [a, b] axis and measure overlap
    L = abs(r)
    if L == 0:
        return False
    u = r / L
    i0, i1 = sorted([0.0, L])
    j0, j1 = sorted([((c - a) * np.conj(u)).real, ((d - a) * np.conj(u)).real])
    overlap = min(i1, j1) - max(i0, j0)
    return overlap > tol * (1.0 + L)


def _validate_transverse(cuts):
    segs = []
    for c in cuts:
        if c.kind in ("segment", "vertical"):
            segs.extend(list(zip(c.chain[:-1], c.chain[1:])))
        elif c.kind == "loop":
            continue
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            a, b = segs[i]
            c_, d = segs[j]
            if _collinear_overlap(a, b, c_, d, 1e-9):
                raise InvalidPairing(
                    "cut segments overlap along a common line; choose a different pairing"
                )


def build_cuts(
    rootset: RootSet,
    triple: Triple,
    strategy: str = "auto",
    pairing=None,
    loop=None,
) -> CutConfiguration:
    """Assemble the cut configuration for a root set.

    strategy "auto" pairs odd-multiplicity roots (conjugate partners
    first, remaining real roots adjacent after sorting) and gives every
    even-multiplicity root a degenerate cut.  strategy "explicit" takes
    pairing as a sequence of index pairs into rootset.roots; the pairing
    must match odd multiplicities one slot each.  loop, when given as
    (root_index, radius), replaces the degenerate cut at that root by a
    circular loop cut centred on it.

    Raises InvalidPairing when segments of the requested configuration
    overlap without crossing transversely.
    """
    roots = list(rootset.roots)
    mults = list(rootset.mults)
    odd = [i for i, m in enumerate(mults) if m % 2 == 1]

    pairs: list[tuple[int, int]] = []
    if strategy == "explicit":
        if pairing is None:
            raise ConfigError("explicit strategy needs a pairing")
        pairs = [(int(p[0]), int(p[1])) for p in pairing]
        for i, j in pairs:
            if i == j or not (0 <= i < len(roots) and 0 <= j < len(roots)):
                raise ConfigError("pairing entries must name two distinct roots")
    elif strategy in ("auto", "conjugate"):
        remaining = list(odd)
        while remaining:
            i = remaining.pop(0)
            if roots[i].imag != 0.0:
                j = min(
                    (j for j in remaining if roots[j].imag != 0.0),
                    key=lambda j: abs(np.conj(roots[i]) - roots[j]),
                    default=remaining[0],
                )
            else:
                reals = [j for j in remaining if roots[j].imag == 0.0]
                j = min(reals, key=lambda j: abs(roots[j] - roots[i])) if reals else remaining[0]
            remaining.remove(j)
            pairs.append((i, j))
    else:
        raise ConfigError(f"unknown cut strategy {strategy!r}")

    # every root owns one cut endpoint slot per multiplicity; pairs use
    # one slot at each end and leftover slots close up pairwise into
    # degenerate cuts, which requires matching parity
    appearances = [0] * len(roots)
    for i, j in pairs:
        appearances[i] += 1
        appearances[j] += 1
    for i, m in enumerate(mults):
        if appearances[i] > m or (m - appearances[i]) % 2 != 0:
            raise ConfigError(
                f"pairing uses root {i} (multiplicity {m}) {appearances[i]} times; "
                "multiplicity parity must match"
            )

    qcuts: list[Cut] = []
    for i, j in pairs:
        p, q = roots[i], roots[j]
        if (p.imag, p.real) > (q.imag, q.real):
            p, q = q, p
            i, j = j, i
        qcuts.append(Cut("segment", p, q, root_indices=(i, j)))
    for i, m in enumerate(mults):
        for _ in range((m - appearances[i]) // 2):
            qcuts.append(Cut("degenerate", roots[i], roots[i], root_indices=(i,)))

    if loop is not None:
        idx, radius = loop
        if not (radius > 0):
            raise ConfigError("loop radius must be positive")
        slot = next(
            (t for t, c in enumerate(qcuts) if c.kind == "degenerate" and c.root_indices == (idx,)),
            None,
        )
        if slot is None:
            raise ConfigError("loop cuts replace a degenerate cut at an even-multiplicity root")
        center = roots[idx]
        th = 2.0 * np.pi * np.arange(_LOOP_SIDES) / _LOOP_SIDES
        pts = tuple(center + radius * np.exp(1j * th))
        ring = pts + (pts[0],)
        qcuts[slot] = Cut(
            "loop", center + radius, center + radius, chain=ring, root_indices=(idx,), center=center, radius=radius
        )

    a, c1, c2 = triple.alpha, triple.c1, triple.c2
    if c1 == 0.0:
        vcut = None
    else:
        lo = complex(c2 / (2 * a), -abs(c1) / (2 * a))
        hi = complex(c2 / (2 * a), abs(c1) / (2 * a))
        vcut = Cut("vertical", lo, hi)

    qcuts.sort(key=lambda c: (c.p.real, c.p.imag, c.q.real, c.q.imag))
    _validate_transverse(qcuts + ([vcut] if vcut else []))
    return CutConfiguration(tuple(qcuts), vcut, rootset, triple)
