"""Branched square root of the quartic and the background matrices.

The square root is realized in closed form rather than by storing
samples: each straight cut [p, q] contributes a factor

    g(k) = ((q - p)/2) * sqrt(z - 1) * sqrt(z + 1),   z = (2k - p - q)/(q - p),

whose only discontinuity is exactly the segment, and each
even-multiplicity root contributes a plain linear factor.  Loop cuts
multiply the branch by -1 inside the enclosed disk.  The overall sign is
pinned at a distant anchor on the ray arg k = pi/8 where the root must
match 2 k^2 + omega/2.  Numerical path continuation from the anchor is
kept alongside as an independent cross-check of the closed form.

The normalizer matrix prefactor sqrt((2 Omega - H)/(2 Omega)) carries
its own branch structure (it jumps across the vertical cut); its sign is
available either as the principal square root ("fast", exact for every
determinant, unimodularity and residual identity, all of which are
insensitive to the sign) or path-continued from the anchor value 1
("continued").
"""

from __future__ import annotations

import math

import numpy as np

from .core import EXP_ARG_LIMIT, Quartic, Triple, build_quartic
from .cuts import Cut, CutConfiguration, build_cuts, seg_distance
from .errors import (
    BranchPointError,
    ConfigError,
    InternalInconsistency,
    OnCutError,
    OverflowLimit,
    SingularPointError,
)
from .roots import RootSet, solve_quartic

_ANCHOR_ANGLE = math.pi / 8.0


class BranchedRoot:
    """Single-valued branch of sqrt(quartic) off a cut configuration."""

    def __init__(self, quartic: Quartic, rootset: RootSet, cuts: CutConfiguration, anchor: complex | None = None):
        self.quartic = quartic
        self.rootset = rootset
        self.cuts = cuts
        self.triple = quartic.source
        if self.triple is None:
            raise ConfigError("branched root needs the generating triple")
        maxroot = rootset.max_abs()
        self.anchor = anchor if anchor is not None else 1e3 * (1.0 + maxroot) * np.exp(1j * _ANCHOR_ANGLE)
        self._chords = []
        self._linear = []
        self._loops = []
        for cut in cuts.quartic_cuts:
            if cut.kind == "segment":
                self._chords.append((cut.p, cut.q))
            elif cut.kind == "degenerate":
                self._linear.append(cut.p)
            elif cut.kind == "loop":
                self._linear.append(cut.center)
                self._loops.append((cut.center, cut.radius))
            else:
                raise ConfigError(f"unsupported quartic cut kind {cut.kind!r}")
        self.sign = self._pin_sign()

    def _product(self, k):
        val = 2.0 * np.ones_like(np.asarray(k, dtype=complex))
        for p, q in self._chords:
            z = (2.0 * k - (p + q)) / (q - p)
            val = val * ((q - p) / 2.0) * np.sqrt(z - 1.0) * np.sqrt(z + 1.0)
        for r in self._linear:
            val = val * (k - r)
        for center, radius in self._loops:
            val = np.where(np.abs(k - center) < radius, -val, val)
        return val

    def _pin_sign(self) -> int:
        k0 = self.anchor
        target = 2.0 * k0 * k0 + self.triple.omega / 2.0
        raw = complex(self._product(k0))
        return 1 if abs(raw - target) <= abs(-raw - target) else -1

    def value_raw(self, k):
        """Branch value with no proximity checks; k may be an ndarray."""
        out = self.sign * self._product(k)
        if np.isscalar(k) or np.ndim(k) == 0:
            return complex(out)
        return out

    def value(self, k: complex) -> complex:
        """Branch value at a scalar point with cut and branch point guards."""
        k = complex(k)
        scale = 1.0 + self.rootset.max_abs()
        for r in self.rootset.roots:
            if abs(k - r) <= 1e-12 * scale:
                raise BranchPointError(f"evaluation point {k} hits the branch point {r}")
        tol = self.cuts.geom_tol
        for cut in self.cuts.quartic_cuts:
            if cut.kind == "degenerate":
                continue
            if float(cut.distance(k)) <= tol:
                raise OnCutError(f"evaluation point {k} lies on a branch cut (tol {tol:g})")
        return self.value_raw(k)

    # -- side limits ---------------------------------------------------

    def side_limit(self, cut: Cut, s: float, side: int, eps_rel: float = 1e-7):
        """Richardson-extrapolated limit onto an interior cut point.

        s in (0, 1) parametrizes the cut from p to q; side +1 approaches
        along the left normal of p->q, side -1 along the right normal.
        """
        if cut.kind not in ("segment", "vertical"):
            raise ConfigError("side limits need a straight cut")
        base = cut.p + s * (cut.q - cut.p)
        n = cut.unit_normal() * side
        eps = eps_rel * max(cut.length, 1e-12)
        f1 = self.value_raw(base + eps * n)
        f2 = self.value_raw(base + 0.5 * eps * n)
        return 2.0 * f2 - f1

    # -- continuation cross-check ---------------------------------------

    def continued_value(self, k: complex, rel_tol: float = 1e-9) -> complex:
        """Value by stepwise square-root continuation from the anchor.

        Independent of the closed-form factorization; used to validate
        it.  Much slower, intended for spot checks.
        """
        path = self._path_from_anchor(complex(k))
        n = 24
        prev = None
        for _ in range(8):
            val = self._continue_along(path, n)
            if val is not None and prev is not None:
                if abs(val - prev) <= rel_tol * max(1.0, abs(val)):
                    return val
            prev = val
            n *= 2
        if prev is None:
            raise InternalInconsistency("square-root continuation failed to stabilize")
        return prev

    def _continue_along(self, waypoints, n_per_leg: int):
        pts = []
        for a, b in zip(waypoints[:-1], waypoints[1:]):
            ts = np.linspace(0.0, 1.0, n_per_leg, endpoint=False)
            pts.extend(a + ts * (b - a))
        pts.append(waypoints[-1])
        w = np.sqrt(np.asarray(self.quartic.eval(np.array(pts)), dtype=complex))
        target = 2.0 * pts[0] ** 2 + self.triple.omega / 2.0
        val = w[0] if abs(w[0] - target) <= abs(-w[0] - target) else -w[0]
        for j in range(1, len(pts)):
            cand = w[j]
            if abs(cand - val) > abs(-cand - val):
                cand = -cand
            # ambiguous step: both signs nearly equidistant means the
            # step straddled a zero; ask for refinement
            if abs(cand - val) > 0.7 * (abs(cand) + abs(val)) + 1e-300:
                return None
            val = cand
        return complex(val)

    def _path_from_anchor(self, k: complex):
        R = abs(self.anchor)
        clearance = 0.02 * (1.0 + self.rootset.max_abs())
        d_k = float(self.cuts.distance(k))
        clearance = min(clearance, 0.5 * d_k) if d_k > 0 else clearance
        th0 = np.angle(self.anchor)
        for dth in (0.0, 0.05, -0.05, 0.15, -0.15, 0.3, -0.3, 0.6, -0.6, 1.0, -1.0):
            th = np.angle(k) if k != 0 else th0
            th += dth
            mid = R * np.exp(1j * th)
            inner = abs(k) * np.exp(1j * th) if k != 0 else mid
            legs = [mid, inner, k]
            if self._legs_clear([mid, inner], clearance) and self._legs_clear([inner, k], clearance):
                arc = self._arc(th0, th, R)
                return arc + legs[1:]
        # fall back to the direct segment; continuation refinement still
        # guards against a sign slip
        return [self.anchor, k]

    def _arc(self, th_from: float, th_to: float, R: float):
        dth = th_to - th_from
        while dth > math.pi:
            dth -= 2 * math.pi
        while dth < -math.pi:
            dth += 2 * math.pi
        n = max(2, int(abs(dth) / 0.1) + 1)
        return [R * np.exp(1j * (th_from + dth * t)) for t in np.linspace(0.0, 1.0, n)]

    def _legs_clear(self, seg, clearance: float) -> bool:
        a, b = seg
        ts = np.linspace(0.0, 1.0, 64)
        pts = a + ts * (b - a)
        return bool(np.min(self.cuts.distance(pts)) > clearance)


def make_branched_root(triple: Triple, strategy: str = "auto", pairing=None, loop=None,
                       cluster_tol: float = 1e-6) -> BranchedRoot:
    """Convenience pipeline: quartic, roots, cuts, branched root."""
    q = build_quartic(triple)
    rs = solve_quartic(q, cluster_tol=cluster_tol)
    cc = build_cuts(rs, triple, strategy=strategy, pairing=pairing, loop=loop)
    return BranchedRoot(q, rs, cc)


# -- background matrices ------------------------------------------------


def plateau(triple: Triple, k):
    """The quadratic 2 k^2 + lam alpha^2 + omega/2 that the branched root
    approaches (up to the constant lam alpha^2) at large k."""
    return 2.0 * np.asarray(k, dtype=complex) ** 2 + triple.lam * triple.alpha**2 + triple.omega / 2.0


def background_shift(br: BranchedRoot, k, omega_value=None):
    """Shift H(k) of the branched root below its quadratic plateau.

    H(k) tends to -lam alpha^2 as k grows along the anchor ray, and
    (H - 2 Omega) H factorizes through the c-point quadratic."""
    tr = br.triple
    om = br.value_raw(k) if omega_value is None else omega_value
    return om - plateau(tr, k)


def cpoint_product(triple: Triple, k):
    """lam (2 alpha k - i conj(c)) (2 alpha k + i c), the right side of
    the factorization identity for (H - 2 Omega) H."""
    a, c, lam = triple.alpha, triple.c, triple.lam
    k = np.asarray(k, dtype=complex)
    return lam * (2.0 * a * k - 1j * np.conj(c)) * (2.0 * a * k + 1j * c)


def factorization_residual(br: BranchedRoot, k) -> float:
    """Relative residual of (H - 2 Omega) H = lam (2ak - i cbar)(2ak + i c)."""
    om = br.value_raw(k)
    h = background_shift(br, k, omega_value=om)
    lhs = (h - 2.0 * om) * h
    rhs = cpoint_product(br.triple, k)
    den = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1.0)
    return float(np.max(np.abs(lhs - rhs) / den))


def background_normalizer(br: BranchedRoot, k, branch: str = "fast"):
    """Normalizer matrix E(k), det E = 1, E -> I at large k.

    branch "fast" takes the principal square root for the scalar
    prefactor, which fixes it only up to a global sign; every quantity
    this package tests through E (determinant, the time-part residual,
    jump ratios) is insensitive to that sign.  branch "continued"
    continues the prefactor from its anchor value 1 and is the branch
    matching the large-k normalization pointwise.
    """
    tr = br.triple
    a, c, lam = tr.alpha, tr.c, tr.lam
    karr = np.asarray(k, dtype=complex)
    om = br.value_raw(karr)
    h = om - plateau(tr, karr)
    d1 = 2.0 * a * karr - 1j * np.conj(c)
    d2 = 2.0 * a * karr + 1j * c
    scale = 1.0 + 2.0 * a * np.abs(karr)
    if np.any(np.abs(d1) <= 1e-13 * scale) or np.any(np.abs(d2) <= 1e-13 * scale):
        raise SingularPointError("normalizer denominator vanishes at a c-point")
    if np.any(np.abs(om) <= 1e-300):
        raise BranchPointError("normalizer prefactor is singular where the root vanishes")
    w = (2.0 * om - h) / (2.0 * om)
    if branch == "fast":
        f = np.sqrt(w)
    elif branch == "continued":
        if np.ndim(karr) != 0:
            raise ConfigError("continued branch evaluates one point at a time")
        f = _continued_prefactor(br, complex(karr))
    else:
        raise ConfigError(f"unknown branch mode {branch!r}")
    e11 = f * np.ones_like(karr)
    e12 = f * lam * 1j * h / d1
    e21 = f * (-1j) * h / d2
    e22 = e11
    return np.stack(
        [np.stack([e11, e12], axis=-1), np.stack([e21, e22], axis=-1)], axis=-2
    ) if np.ndim(karr) else np.array([[complex(e11), complex(e12)], [complex(e21), complex(e22)]])


def _prefactor_at(br: BranchedRoot, pts):
    om = br.value_raw(pts)
    h = om - plateau(br.triple, pts)
    return (2.0 * om - h) / (2.0 * om)


def _continued_prefactor(br: BranchedRoot, k: complex) -> complex:
    path = br._path_from_anchor(k)
    n = 24
    prev = None
    for _ in range(8):
        val = _continue_sqrt_along(br, path, n)
        if val is not None and prev is not None and abs(val - prev) <= 1e-9 * max(1.0, abs(val)):
            return val
        prev = val
        n *= 2
    if prev is None:
        raise InternalInconsistency("prefactor continuation failed to stabilize")
    return prev


def _continue_sqrt_along(br: BranchedRoot, waypoints, n_per_leg: int):
    pts = []
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        ts = np.linspace(0.0, 1.0, n_per_leg, endpoint=False)
        pts.extend(a + ts * (b - a))
    pts.append(waypoints[-1])
    w = np.sqrt(_prefactor_at(br, np.array(pts)))
    val = w[0] if abs(w[0] - 1.0) <= abs(w[0] + 1.0) else -w[0]
    for j in range(1, len(pts)):
        cand = w[j]
        if abs(cand - val) > abs(-cand - val):
            cand = -cand
        if abs(cand - val) > 0.7 * (abs(cand) + abs(val)) + 1e-300:
            return None
        val = cand
    return complex(val)


def background_solution(br: BranchedRoot, t, k, branch: str = "fast"):
    """Background time-part solution exp(i omega t sigma3 / 2) E(k)
    exp(-i Omega t sigma3).  Raises OverflowLimit when an exponent
    magnitude would exceed the double-precision cap."""
    tr = br.triple
    karr = np.asarray(k, dtype=complex)
    tarr = np.asarray(t, dtype=float)
    om = br.value_raw(karr)
    worst = np.max(np.abs(tarr) * np.maximum(np.abs(np.imag(om)), abs(tr.omega) / 2.0))
    if worst > EXP_ARG_LIMIT:
        raise OverflowLimit(f"exponent magnitude {worst:.3g} exceeds cap {EXP_ARG_LIMIT}")
    E = background_normalizer(br, karr, branch=branch)
    ph_t = np.exp(1j * tr.omega * tarr / 2.0)
    ph_o = np.exp(-1j * om * tarr)
    if np.ndim(karr) == 0 and np.ndim(tarr) == 0:
        return np.array(
            [
                [ph_t * E[0][0] * ph_o, ph_t * E[0][1] / ph_o],
                [E[1][0] * ph_o / ph_t, E[1][1] / (ph_t * ph_o)],
            ]
        )
    out = np.empty(np.broadcast(karr, tarr).shape + (2, 2), dtype=complex)
    out[..., 0, 0] = ph_t * E[..., 0, 0] * ph_o
    out[..., 0, 1] = ph_t * E[..., 0, 1] / ph_o
    out[..., 1, 0] = E[..., 1, 0] * ph_o / ph_t
    out[..., 1, 1] = E[..., 1, 1] / (ph_t * ph_o)
    return out


def solution_time_residual(br: BranchedRoot, t, k) -> float:
    """Max norm of d(psi)/dt + 2 i k^2 sigma3 psi - Qb psi with the time
    derivative taken analytically.  Zero in exact arithmetic."""
    from .core import tpart_matrix

    tr = br.triple
    k = complex(k)
    t = float(t)
    om = br.value_raw(k)
    psi = background_solution(br, t, k)
    s3 = np.array([[1.0, 0.0], [0.0, -1.0]])
    dpsi = 1j * tr.omega / 2.0 * (s3 @ psi) - 1j * om * (psi @ s3)
    res = dpsi + 2j * k * k * (s3 @ psi) - tpart_matrix(tr, t, k) @ psi
    return float(np.max(np.abs(res)))
