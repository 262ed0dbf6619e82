"""Root structure of the spectral quartic.

The classification machinery needs exact multiplicity patterns, not just
root locations: a double zero at the right place is the difference
between an admissible family member and a rejected triple.  Multiple
zeros are therefore detected through common roots of the quartic and its
derivatives (a double zero is a root of P' where P vanishes, a triple
zero a root of P'' where P' and P vanish, and so on) rather than by
clustering eigenvalue output alone.  Companion-matrix roots plus Newton
polishing handle the simple zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Quartic, Triple
from .errors import ConfigError, IllConditionedRoots, InternalInconsistency

# relative |P| floor under which a stationary point counts as a multiple
# zero; matches a root-pair separation of one cluster tolerance
_ACCEPT_REL = 1e-12
# gray band up to a 10x separation, reported instead of silently resolved
_ILL_REL = 2.5e-11


@dataclass(frozen=True)
class RootSet:
    """Roots of a quartic with multiplicities.

    roots and mults are parallel tuples; multiplicities sum to 4.
    residual is max |P(root)| over the reported locations and
    reconstruction_error the relative coefficient error of
    4 * prod (k - root)^mult against the source coefficients.
    """

    roots: tuple
    mults: tuple
    residual: float
    reconstruction_error: float
    quartic: Quartic

    @property
    def pattern(self) -> tuple:
        """Multiplicities in descending order, e.g. (3, 1) or (2, 1, 1)."""
        return tuple(sorted(self.mults, reverse=True))

    def real_roots(self, tol: float = 1e-10):
        return [r.real for r in self.roots if abs(r.imag) <= tol * (1 + abs(r))]

    def max_abs(self) -> float:
        return max(abs(r) for r in self.roots)


def _abs_poly_eval(coeffs, x):
    """Evaluate sum |c_i| |x|^(deg-i), a conditioning scale for P(x)."""
    ax = abs(x)
    out = 0.0
    for a in coeffs:
        out = out * ax + abs(a)
    return out


def _rel_mag(q: Quartic, x, order: int) -> float:
    cs = q.derivative_coeffs(order) if order else q.coeffs
    scale = _abs_poly_eval(cs, x)
    if scale == 0.0:
        return 0.0
    val = 0.0
    for a in cs:
        val = val * x + a
    return abs(val) / scale


def _newton(q: Quartic, x, order: int = 0, steps: int = 8):
    """Safeguarded Newton iteration on the order-th derivative.

    Returns the iterate with the smallest |value| seen, so polishing can
    never make a root worse (a plain step at an already-exact root with
    near-zero derivative would throw it away)."""
    best, best_f = x, abs(q.eval(x, order))
    for _ in range(steps):
        f = q.eval(x, order)
        df = q.eval(x, order + 1)
        if df == 0:
            break
        step = f / df
        x = x - step
        fx = abs(q.eval(x, order))
        if fx < best_f:
            best, best_f = x, fx
        if abs(step) <= 1e-17 * (1.0 + abs(x)):
            break
    return best


def _closed_form_double(q: Quartic) -> list:
    """Stationary points that the generating triple marks as multiple
    zeros through the defocusing closed-form conditions, at essentially
    exact parameter level.  Used to break ties in the gray band."""
    tr = q.source
    if tr is None or tr.lam != 1:
        return []
    out = []
    for K in np.roots(q.derivative_coeffs(1)):
        chk = multiple_zero_check(tr, complex(K), tol=1e-12)
        if chk.is_stationary and chk.is_multiple:
            out.append(complex(K))
    return out


def solve_quartic(quartic: Quartic, cluster_tol: float = 1e-6) -> RootSet:
    """Roots with multiplicities for a real-coefficient quartic.

    Multiple zeros are located as near-common roots of the derivative
    cascade; remaining simple roots come from deflation followed by
    Newton polishing against the full polynomial.  Root sets are closed
    under conjugation and real roots carry zero imaginary part exactly.

    Raises IllConditionedRoots when a stationary point sits in the
    ambiguity band between "one double zero" and "two nearby simple
    zeros"; the exception carries both candidate clusterings.
    """
    cs = np.asarray(quartic.coeffs, dtype=float)
    if cs[0] == 0.0:
        raise ConfigError("leading coefficient must be nonzero")
    raw = np.roots(cs)
    maxabs = float(np.max(np.abs(raw)))
    ctol = cluster_tol * (1.0 + maxabs)

    multiples: list[tuple[complex, int]] = []

    # quadruple zero: root of P''' with the whole cascade vanishing
    d3 = quartic.derivative_coeffs(3)  # linear
    x4 = -d3[1] / d3[0]
    if (
        _rel_mag(quartic, x4, 2) <= _ACCEPT_REL
        and _rel_mag(quartic, x4, 1) <= _ACCEPT_REL
        and _rel_mag(quartic, x4, 0) <= _ACCEPT_REL
    ):
        multiples.append((complex(x4), 4))
    else:
        # triple zeros: roots of P'' where P' and P vanish
        for t in np.roots(quartic.derivative_coeffs(2)):
            t = complex(t)
            if _rel_mag(quartic, t, 1) <= _ACCEPT_REL and _rel_mag(quartic, t, 0) <= 1e-10:
                multiples.append((t, 3))
                break
        if not multiples:
            promoted = _closed_form_double(quartic)
            ill_candidates = []
            for s in np.roots(quartic.derivative_coeffs(1)):
                s = complex(_newton(quartic, complex(s), order=1))
                if any(abs(s - m[0]) <= ctol for m in multiples):
                    continue
                rel = _rel_mag(quartic, s, 0)
                if rel <= _ACCEPT_REL or any(abs(s - p) <= ctol for p in promoted):
                    multiples.append((s, 2))
                elif rel <= _ILL_REL:
                    ill_candidates.append(s)
            if ill_candidates:
                s = ill_candidates[0]
                near = sorted(raw, key=lambda r: abs(r - s))[:2]
                merged = ([s], [2])
                split = ([complex(r) for r in near], [1, 1])
                raise IllConditionedRoots(
                    "stationary point with |P| in the ambiguity band near "
                    f"{s:.9g}; double zero and split pair both plausible",
                    candidates=[merged, split],
                )

    # deflate multiples, then solve what remains exactly
    rem = cs.copy()
    for loc, m in multiples:
        for _ in range(m):
            rem, _r = np.polydiv(rem, np.array([1.0, -loc]))
    simple: list[complex] = []
    deg = len(rem) - 1
    if deg == 1:
        simple.append(complex(-rem[1] / rem[0]))
    elif deg == 2:
        a, b, c = rem
        disc = np.emath.sqrt(b * b - 4.0 * a * c)
        qq = -0.5 * (b + disc) if b.real >= 0 else -0.5 * (b - disc)
        r1 = qq / a
        r2 = c / qq if qq != 0 else complex(0.0)
        simple.extend([complex(r1), complex(r2)])
    elif deg == 4:
        simple = [complex(r) for r in raw]
    simple = [_newton(quartic, r, order=0) for r in simple]

    roots = [(loc, m) for loc, m in multiples] + [(r, 1) for r in simple]
    roots = _symmetrize(roots, ctol)
    roots = _merge_exact(roots)
    # +0.0 normalizes any negative zero components for determinism
    roots = [(complex(r.real + 0.0, r.imag + 0.0), m) for r, m in roots]
    roots.sort(key=lambda rm: (rm[0].real, rm[0].imag))

    locs = tuple(r for r, _ in roots)
    mults = tuple(m for _, m in roots)
    if sum(mults) != 4:
        raise InternalInconsistency(f"multiplicities {mults} do not sum to 4")
    residual = max(abs(quartic.eval(r)) for r in locs)
    recon = _reconstruction_error(cs, locs, mults)
    return RootSet(locs, mults, float(residual), float(recon), quartic)


def _symmetrize(roots, ctol):
    """Snap near-real roots to the axis and enforce exact conjugate pairs."""
    snapped = []
    for r, m in roots:
        if abs(r.imag) <= ctol:
            snapped.append((complex(r.real, 0.0), m))
        else:
            snapped.append((r, m))
    out = []
    used = [False] * len(snapped)
    for i, (r, m) in enumerate(snapped):
        if used[i]:
            continue
        if r.imag == 0.0:
            out.append((r, m))
            used[i] = True
            continue
        best, bdist = None, np.inf
        for j in range(i + 1, len(snapped)):
            if used[j] or snapped[j][1] != m or snapped[j][0].imag == 0.0:
                continue
            d = abs(np.conj(r) - snapped[j][0])
            if d < bdist:
                best, bdist = j, d
        if best is not None and bdist <= 4.0 * ctol:
            x = 0.5 * (r.real + snapped[best][0].real)
            y = 0.5 * (abs(r.imag) + abs(snapped[best][0].imag))
            out.append((complex(x, y), m))
            out.append((complex(x, -y), m))
            used[i] = used[best] = True
        else:
            out.append((r, m))
            used[i] = True
    return out


def _merge_exact(roots):
    """Collapse exactly coincident locations into one multiplicity."""
    out: list[tuple[complex, int]] = []
    for r, m in roots:
        for i, (s, n) in enumerate(out):
            if s == r:
                out[i] = (s, n + m)
                break
        else:
            out.append((r, m))
    return out


def _reconstruction_error(cs, locs, mults):
    poly = np.array([cs[0]], dtype=complex)
    for r, m in zip(locs, mults):
        for _ in range(m):
            poly = np.polymul(poly, np.array([1.0, -r]))
    scale = max(abs(a) for a in cs)
    return float(np.max(np.abs(poly.real - cs)) / scale + np.max(np.abs(poly.imag)) / scale)


@dataclass(frozen=True)
class MultipleZeroCheck:
    """Residuals of the two closed-form conditions for K to be a multiple
    zero of the quartic of a defocusing triple."""

    K: complex
    stationary_residual: float
    multiple_residual: float
    is_stationary: bool
    is_multiple: bool


def multiple_zero_check(triple: Triple, K, tol: float = 1e-9) -> MultipleZeroCheck:
    """Test the closed-form conditions for a multiple zero at K.

    Stationarity reads 4 K^3 + omega K + alpha c2 = 0 and the multiple
    zero condition c1^2 + c2^2 + 2 K^2 (6 K^2 + omega) = (alpha^2 + omega/2)^2.
    Defocusing only.
    """
    if triple.lam != 1:
        raise ConfigError("closed-form multiple zero conditions are defocusing only")
    a, w = triple.alpha, triple.omega
    c1, c2 = triple.c1, triple.c2
    K = complex(K)
    st = 4.0 * K**3 + w * K + a * c2
    st_scale = max(1.0, abs(4.0 * K**3), abs(w * K), abs(a * c2))
    lhs = c1 * c1 + c2 * c2 + 2.0 * K * K * (6.0 * K * K + w)
    rhs = (a * a + w / 2.0) ** 2
    mu_scale = max(1.0, abs(lhs), abs(rhs))
    st_res = abs(st) / st_scale
    mu_res = abs(lhs - rhs) / mu_scale
    return MultipleZeroCheck(K, float(st_res), float(mu_res), st_res <= tol, mu_res <= tol)


@dataclass(frozen=True)
class DoubleZeroFeasibility:
    """Outcome of the real-double-zero parameter solve for given
    (K, omega, c2) with K > 0 and c2 nonzero."""

    K: float
    omega: float
    c2: float
    case: str
    alpha: float | None
    c1sq: float | None
    feasible: bool


def real_double_zero_feasibility(K: float, omega: float, c2: float, tol: float = 1e-9) -> DoubleZeroFeasibility:
    """Solve for (alpha, c1) making K > 0 a real double zero.

    Three windows arise.  Below omega = -12 K^2 the parameters exist but
    the configuration carries an extra odd-order real zero to the right
    of the double zero (window label "below-band").  Strictly between
    -12 K^2 and -4 K^2 lies the constructive window ("band"), and on the
    measure-zero locus c2 = sqrt(-8 K^4 - 2 K^2 omega) the real part of
    c vanishes ("imaginary-c-locus").
    """
    if not (K > 0.0):
        raise ConfigError("K must be positive")
    if c2 == 0.0:
        raise ConfigError("c2 must be nonzero")
    scale = max(1.0, K * K, abs(omega))
    alpha = -(4.0 * K**3 + omega * K) / c2
    c1sq = None
    if alpha > 0.0:
        c1sq = (alpha * alpha + omega / 2.0) ** 2 - c2 * c2 - 2.0 * K * K * (6.0 * K * K + omega)

    locus = -8.0 * K**4 - 2.0 * K * K * omega
    if locus >= 0.0 and c2 > 0.0 and abs(c2 - np.sqrt(locus)) <= tol * np.sqrt(max(scale, locus)):
        # c1 degenerates to zero here up to roundoff
        return DoubleZeroFeasibility(K, omega, c2, "imaginary-c-locus", alpha, 0.0, alpha > 0.0)
    if omega < -12.0 * K * K - tol * scale:
        ok = alpha is not None and alpha > 0.0 and c1sq is not None and c1sq >= 0.0
        return DoubleZeroFeasibility(K, omega, c2, "below-band", alpha, c1sq, bool(ok))
    if -12.0 * K * K + tol * scale < omega < -4.0 * K * K - tol * scale:
        ok = alpha > 0.0 and c1sq is not None and c1sq >= 0.0
        return DoubleZeroFeasibility(K, omega, c2, "band", alpha, c1sq, bool(ok))
    return DoubleZeroFeasibility(K, omega, c2, "outside", alpha, c1sq, False)
