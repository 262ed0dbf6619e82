"""Bundled verification suite.

Re-runs every module's documented invariants on seeded random samples
and reports one line per invariant with the sample count and the worst
margin seen.  This is the self-check shipped with the tool, not a
replacement for the test suite; it exists so a user can validate an
installation or a parameter regime in seconds.

The fault parameter deliberately corrupts one computation (a sign flip
in the factorization identity) so the wiring of the suite itself can
be exercised end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import core
from .classify import Verdict, classify_defocusing, generate_family
from .core import Triple, build_quartic
from .cuts import build_cuts
from .errors import (
    BranchPointError,
    ConfigError,
    IllConditionedRoots,
    InternalInconsistency,
    InvalidPairing,
    OverflowLimit,
    SingularPointError,
)
from .geometry import compute_sign_field, quartic_parts, trace_gamma
from .roots import solve_quartic
from .scattering import InitialProfile, background_jump, compute_scattering, make_profile
from .spectral import (
    BranchedRoot,
    background_normalizer,
    background_shift,
    background_solution,
    cpoint_product,
    make_branched_root,
    solution_time_residual,
)

__all__ = ["InvariantResult", "run_suite", "format_results", "INVARIANT_IDS"]


@dataclass(frozen=True)
class InvariantResult:
    id: str
    samples: int
    worst: float
    tol: float
    passed: bool
    note: str = ""


def _family_triple(rng, fam: str) -> Triple:
    a = float(rng.uniform(0.3, 3.0))
    if fam == "A":
        w = -3.0 * a * a * float(rng.uniform(0.02, 0.98))
        return generate_family("A", {"alpha": a, "omega": w})
    if fam == "C":
        w = -3.0 * a * a * (1.0 + float(rng.uniform(0.05, 2.0)))
        return generate_family("C", {"alpha": a, "omega": w})
    if fam == "D":
        w = -a * a + float(rng.uniform(0.0, 4.0 * a * a + 2.0))
        return generate_family("D", {"alpha": a, "omega": w})
    K = float(rng.uniform(0.3, 2.0))
    if fam == "B":
        w = -K * K * float(rng.uniform(4.02, 11.98))
        c2 = -(4.0 * K * K + w) / 2.0 * float(rng.uniform(0.02, 1.0))
        return generate_family("B", {"K": K, "omega": w, "c2": c2})
    w = -K * K * float(rng.uniform(3.0, 3.99))
    c2 = -(4.0 * K * K + w) / 2.0 * float(rng.uniform(0.02, 1.0))
    return generate_family("E", {"K": K, "omega": w, "c2": c2})


_FAMILIES = ("A", "B", "C", "D", "E")


def _mixed_triples(rng, n: int):
    """Alternate family members and generic box samples."""
    out = []
    for i in range(n):
        if i % 2 == 0:
            out.append(_family_triple(rng, _FAMILIES[(i // 2) % 5]))
        else:
            out.append(
                Triple(
                    float(rng.uniform(0.2, 3.0)),
                    float(rng.uniform(-8.0, 8.0)),
                    complex(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)),
                )
            )
    return out


def _k_off_cuts(rng, br, n: int, radius: float = 10.0):
    ks = []
    clear = 10.0 * br.cuts.geom_tol + 1e-6
    while len(ks) < n:
        k = complex(rng.uniform(-radius, radius), rng.uniform(-radius, radius))
        if br.cuts.distance(k) > clear:
            ks.append(k)
    return np.array(ks)


def _branched(t: Triple):
    try:
        return make_branched_root(t)
    except (IllConditionedRoots, InternalInconsistency, InvalidPairing):
        return None


# -- invariant bodies ------------------------------------------------------


def _inv_quartic_coefficients(rng, n, fault):
    # rebuild the coefficients in complex arithmetic and confirm the
    # imaginary parts cancel and the real parts match the stored tuple
    worst = 0.0
    triples = _mixed_triples(rng, n)
    for t in triples:
        q = build_quartic(t)
        a, w, lam, c = t.alpha, t.omega, t.lam, t.c
        cs_c = (
            4.0 + 0j,
            0j,
            2.0 * w + 0j,
            2j * lam * a * (np.conj(c) - c),
            (w / 2.0 + lam * a * a) ** 2 - lam * c * np.conj(c),
        )
        scale = max(1.0, max(abs(z) for z in cs_c))
        for stored, built in zip(q.coeffs, cs_c):
            worst = max(worst, abs(built.imag) / scale, abs(built.real - stored) / scale)
    return InvariantResult("quartic-coefficients", len(triples), worst, 1e-14, worst <= 1e-14)


def _inv_branch_square(rng, n, fault):
    worst = 0.0
    count = 0
    for t in _mixed_triples(rng, max(4, n // 4)):
        br = _branched(t)
        if br is None:
            continue
        ks = _k_off_cuts(rng, br, 40)
        om = br.value_raw(ks)
        poly = br.quartic.eval(ks)
        err = np.abs(om * om - poly) / np.maximum(np.abs(poly), 1.0)
        worst = max(worst, float(np.max(err)))
        count += len(ks)
    return InvariantResult("branch-square", count, worst, 1e-10, worst <= 1e-10)


def _inv_shift_identity(rng, n, fault):
    worst = 0.0
    count = 0
    for t in _mixed_triples(rng, max(4, n // 4)):
        if fault == "flip-constant":
            # corrupt the quartic build only; the product side keeps the
            # true triple, so the identity must break
            old = core._FAULT_MODE
            core._FAULT_MODE = "flip-constant"
            try:
                br = _branched(t)
            finally:
                core._FAULT_MODE = old
        else:
            br = _branched(t)
        if br is None:
            continue
        ks = _k_off_cuts(rng, br, 25)
        om = br.value_raw(ks)
        h = background_shift(br, ks, omega_value=om)
        lhs = (h - 2.0 * om) * h
        rhs = cpoint_product(t, ks)
        den = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1.0)
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / den)))
        count += len(ks)
    note = "fault injected" if fault == "flip-constant" else ""
    return InvariantResult("shift-identity", count, worst, 1e-10, worst <= 1e-10, note)


def _inv_normalizer_det(rng, n, fault):
    worst = 0.0
    count = 0
    for t in _mixed_triples(rng, max(4, n // 4)):
        br = _branched(t)
        if br is None:
            continue
        ks = _k_off_cuts(rng, br, 25)
        keep = np.abs(cpoint_product(t, ks)) > 1e-6 * (1.0 + np.abs(ks)) ** 2
        if not np.any(keep):
            continue
        E = background_normalizer(br, ks[keep])
        det = E[..., 0, 0] * E[..., 1, 1] - E[..., 0, 1] * E[..., 1, 0]
        worst = max(worst, float(np.max(np.abs(det - 1.0))))
        count += int(np.sum(keep))
    return InvariantResult("normalizer-det", count, worst, 1e-10, worst <= 1e-10)


def _inv_shift_zero_locations(rng, n, fault):
    # where the c-point quadratic is bounded away from zero, neither
    # factor of the identity may vanish
    worst = math.inf
    count = 0
    for t in _mixed_triples(rng, max(4, n // 4)):
        br = _branched(t)
        if br is None:
            continue
        ks = _k_off_cuts(rng, br, 25)
        rhs = cpoint_product(t, ks)
        scale = (1.0 + np.abs(ks)) ** 2
        keep = np.abs(rhs) > 1e-3 * scale
        if not np.any(keep):
            continue
        om = br.value_raw(ks[keep])
        h = background_shift(br, ks[keep], omega_value=om)
        both = np.minimum(np.abs(h), np.abs(h - 2.0 * om)) / np.sqrt(np.abs(rhs[keep]))
        worst = min(worst, float(np.min(both)))
        count += int(np.sum(keep))
    passed = count > 0 and worst > 1e-8
    return InvariantResult("shift-zero-locations", count, worst, 1e-8, passed,
                           "worst is a lower bound, larger is better")


def _inv_omega_asymptotics(rng, n, fault):
    # fit C inside |k| ~ 1e2, then demand |tail| <= 4 (C/R + 32 eps R^2)
    # further out; the eps R^2 term is the roundoff floor of the root
    # itself.  Two calibration radii: the 1/k and 1/k^2 terms of the
    # tail can cancel at one radius but not at both
    eps = np.finfo(float).eps
    worst = 0.0
    count = 0
    for t in _mixed_triples(rng, max(4, n // 6)):
        br = _branched(t)
        if br is None:
            continue
        th = rng.uniform(0.05, math.pi / 4 - 0.05)

        def tail(R):
            k = R * complex(math.cos(th), math.sin(th))
            return abs(br.value_raw(k) - 2.0 * k * k - t.omega / 2.0)

        C = max(tail(R) * R for R in (1e2, 10.0**2.5))
        for R in (1e3, 1e4):
            model = C / R + 32.0 * eps * R * R
            worst = max(worst, tail(R) / model)
            count += 1
    return InvariantResult("omega-asymptotics", count, worst, 4.0, worst <= 4.0,
                           "measured tail over fitted C/|k| plus roundoff")


def _inv_background_residual(rng, n, fault):
    worst = 0.0
    count = 0
    for t in _mixed_triples(rng, max(4, n // 6)):
        br = _branched(t)
        if br is None:
            continue
        for _ in range(6):
            k = complex(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0))
            if br.cuts.distance(k) < 0.05 or abs(cpoint_product(t, k)) < 1e-3:
                continue
            tt = float(rng.uniform(-1.0, 1.0))
            try:
                res = solution_time_residual(br, tt, k)
                psi = background_solution(br, tt, k)
            except (BranchPointError, SingularPointError, OverflowLimit):
                continue
            scale = (1.0 + abs(k)) ** 2 * max(1.0, float(np.max(np.abs(psi))))
            worst = max(worst, res / scale)
            count += 1
    return InvariantResult("background-residual", count, worst, 1e-8, worst <= 1e-8)


def _inv_root_reconstruction(rng, n, fault):
    worst = 0.0
    count = 0
    for t in _mixed_triples(rng, n):
        q = build_quartic(t)
        try:
            rs = solve_quartic(q)
        except (IllConditionedRoots, InternalInconsistency):
            continue
        poly = np.array([4.0 + 0.0j])
        for r, m in zip(rs.roots, rs.mults):
            for _ in range(m):
                poly = np.convolve(poly, [1.0, -r])
        cs = np.asarray(q.coeffs, dtype=complex)
        scale = np.max(np.abs(cs)) + 1.0
        worst = max(worst, float(np.max(np.abs(poly - cs)) / scale))
        count += 1
    return InvariantResult("root-reconstruction", count, worst, 1e-7, worst <= 1e-7)


def _inv_root_conjugation(rng, n, fault):
    bad = 0
    count = 0
    for t in _mixed_triples(rng, n):
        try:
            rs = solve_quartic(build_quartic(t))
        except (IllConditionedRoots, InternalInconsistency):
            continue
        count += 1
        key = lambda rm: (rm[0].real, rm[0].imag)
        items = sorted(((complex(r), m) for r, m in zip(rs.roots, rs.mults)), key=key)
        mirrored = sorted(((complex(r).conjugate(), m) for r, m in zip(rs.roots, rs.mults)), key=key)
        tol = 1e-7 * (1.0 + rs.max_abs())
        for (r1, m1), (r2, m2) in zip(items, mirrored):
            if m1 != m2 or abs(r1 - r2) > tol:
                bad += 1
                break
    return InvariantResult("root-conjugation", count, float(bad), 0.0, bad == 0)


def _inv_family_patterns(rng, n, fault):
    bad = 0
    count = 0
    for i in range(n):
        fam = _FAMILIES[i % 5]
        t = _family_triple(rng, fam)
        try:
            rs = solve_quartic(build_quartic(t))
        except (IllConditionedRoots, InternalInconsistency):
            continue
        count += 1
        pattern = rs.pattern
        if fam == "A":
            ok = pattern == (3, 1)
        elif fam in ("B", "C", "E"):
            ok = pattern == (2, 1, 1)
        else:
            ok = pattern in ((2, 2), (4,))
        if not ok:
            bad += 1
    return InvariantResult("family-patterns", count, float(bad), 0.0, bad == 0)


def _inv_classify_roundtrip(rng, n, fault):
    bad = 0
    for i in range(n):
        fam = _FAMILIES[i % 5]
        t = _family_triple(rng, fam)
        cl = classify_defocusing(t)
        if cl.verdict.value != "Family" + fam:
            bad += 1
    return InvariantResult("classify-roundtrip", n, float(bad), 0.0, bad == 0)


def _inv_classify_disjoint(rng, n, fault):
    bad = 0
    for i in range(n):
        t = _family_triple(rng, _FAMILIES[i % 5])
        cl = classify_defocusing(t, rules=False)
        hits = sum(
            1
            for r in cl.reasons
            if r.rule.startswith("membership:") and r.passed
        )
        if hits != 1:
            bad += 1
    return InvariantResult("classify-disjoint", n, float(bad), 0.0, bad == 0)


def _inv_negative_sampling(rng, n, fault):
    bad = 0
    count = 0
    for _ in range(n):
        t = Triple(
            float(rng.uniform(0.2, 3.0)),
            float(rng.uniform(-8.0, 8.0)),
            complex(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)),
        )
        cl = classify_defocusing(t, tol=1e-6, rules=False)
        count += 1
        if cl.verdict is not Verdict.INADMISSIBLE and not cl.boundary_flags:
            bad += 1
    return InvariantResult("negative-sampling", count, float(bad), 0.0, bad == 0,
                           "random box triples, measure-zero surfaces")


def _inv_crossing_signs(rng, n, fault):
    worst = math.inf
    count = 0
    bad = 0
    for i in range(n):
        fam = ("A", "B", "E")[i % 3]
        t = _family_triple(rng, fam)
        if abs(t.c1) < 1e-12:
            continue
        top = complex(t.c2 / (2 * t.alpha), abs(t.c1) / (2 * t.alpha))
        _re, im = quartic_parts(t, top.real, top.imag)
        margin = float(im) * (1.0 if fam in ("A", "B") else -1.0)
        norm = margin / max(1.0, abs(top)) ** 4
        count += 1
        if norm <= 0:
            bad += 1
        worst = min(worst, norm)
    return InvariantResult("crossing-signs", count, worst, 0.0, bad == 0,
                           "signed margin, positive required")


def _inv_mirror_symmetry(rng, n, fault):
    bad = 0
    count = 0
    win = (-2.5, 2.5, -2.5, 2.5)
    for _ in range(max(3, n // 12)):
        t = Triple(
            float(rng.uniform(0.3, 2.5)),
            float(rng.uniform(-6.0, 6.0)),
            complex(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)),
        )
        tm = Triple(t.alpha, t.omega, complex(t.c1, -t.c2))
        f = compute_sign_field(t, win, (128, 128))
        g = compute_sign_field(tm, win, (128, 128))
        count += 1
        if not (
            np.array_equal(g.re_sign, f.re_sign[:, ::-1])
            and np.array_equal(g.im_sign, -f.im_sign[:, ::-1])
        ):
            bad += 1
    return InvariantResult("mirror-symmetry", count, float(bad), 0.0, bad == 0, "cell-exact")


def _inv_c2zero_reflection(rng, n, fault):
    bad = 0
    count = 0
    win = (-2.5, 2.5, -2.5, 2.5)
    for _ in range(max(3, n // 12)):
        t = Triple(
            float(rng.uniform(0.3, 2.5)),
            float(rng.uniform(-6.0, 6.0)),
            complex(rng.uniform(-2.0, 2.0), 0.0),
        )
        f = compute_sign_field(t, win, (128, 128))
        count += 1
        if not (
            np.array_equal(f.re_sign[::-1, :], f.re_sign)
            and np.array_equal(f.im_sign[::-1, :], -f.im_sign)
            and np.array_equal(f.re_sign[::-1, ::-1], f.re_sign)
            and np.array_equal(f.im_sign[::-1, ::-1], f.im_sign)
        ):
            bad += 1
    return InvariantResult("c2zero-reflection", count, float(bad), 0.0, bad == 0, "cell-exact")


def _inv_gamma_residual(rng, n, fault):
    worst = 0.0
    count = 0
    for _ in range(max(3, n // 12)):
        t = Triple(
            float(rng.uniform(0.3, 2.5)),
            float(rng.uniform(-6.0, 6.0)),
            complex(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)),
        )
        g = trace_gamma(t, (-3.0, 3.0, -3.0, 3.0), (200, 200))
        if not g.polylines:
            continue
        # curve tolerance: interpolation error scales with cell area
        worst = max(worst, g.residual() / (1.0 + abs(t.omega) + abs(t.alpha * t.c2)))
        count += sum(len(p) for p in g.polylines)
    return InvariantResult("gamma-residual", count, worst, 5e-3, worst <= 5e-3,
                           "normalized by coefficient size")


def _inv_loop_interior(rng, n, fault):
    worst = 0.0
    count = 0
    for _ in range(max(2, n // 20)):
        a = float(rng.uniform(0.5, 2.0))
        w = float(rng.uniform(1.0, 6.0))
        t = generate_family("D", {"alpha": a, "omega": w})
        center = 1j * math.sqrt(w) / 2.0
        radius = 0.3 * math.sqrt(w)
        q = build_quartic(t)
        rs = solve_quartic(q)
        idx = int(np.argmin([abs(complex(r) - center) for r in rs.roots]))
        br = BranchedRoot(q, rs, build_cuts(rs, t, loop=(idx, radius)))
        for _ in range(8):
            rr = radius * 0.6 * math.sqrt(rng.uniform(0.0, 1.0))
            th = rng.uniform(0.0, 2.0 * math.pi)
            k = center + rr * complex(math.cos(th), math.sin(th))
            target = -2.0 * k * k - w / 2.0
            err = abs(br.value_raw(k) - target) / max(1.0, abs(target))
            worst = max(worst, err)
            count += 1
    return InvariantResult("loop-interior", count, worst, 1e-10, worst <= 1e-10)


def _inv_scattering_identity(rng, n, fault):
    zero = InitialProfile(lambda x: 0.0, 1.0, "zero")
    sd = compute_scattering(zero, 0.8)
    exact = sd.s_matrix == ((1.0 + 0j, 0j), (0j, 1.0 + 0j))
    worst = 0.0
    count = 1
    g = make_profile("gaussian", amplitude=float(rng.uniform(0.3, 1.5)))
    for k in np.linspace(-2.0, 2.0, 5):
        s = compute_scattering(g, float(k))
        worst = max(worst, abs(s.det() - 1.0), abs(abs(s.a) ** 2 - abs(s.b) ** 2 - 1.0) * 1e-2)
        count += 1
    return InvariantResult("scattering-identity", count, worst, 1e-8,
                           exact and worst <= 1e-8, "det and trace identities")


def _inv_scattering_halving(rng, n, fault):
    g = make_profile("gaussian")
    worst = 0.0
    count = 0
    for k in (0.5, 1.7):
        coarse = compute_scattering(g, k, fixed_step=0.05)
        fine = compute_scattering(g, k, fixed_step=0.025)
        diff = max(abs(coarse.a - fine.a), abs(coarse.b - fine.b))
        worst = max(worst, diff / coarse.err_estimate)
        count += 1
    return InvariantResult("scattering-halving", count, worst, 10.0, worst <= 10.0,
                           "observed change over reported estimate")


def _inv_jump_closed_form(rng, n, fault):
    worst = 0.0
    sym = 0.0
    count = 0
    t = Triple(1.0, 0.0, 0j)
    br = make_branched_root(t)
    for cut in br.cuts.quartic_cuts:
        probe = background_jump(t, cut, n_samples=6, br=br)
        worst = max(worst, probe.worst_closed_form_error())
        for sm in probe.samples:
            sym = max(sym, abs(sm.omega_plus + sm.omega_minus) / (2.0 * abs(sm.omega_plus)))
        count += len(probe.samples)
    ok = worst <= 1e-9 and sym <= 1e-10
    return InvariantResult("jump-closed-form", count, max(worst, sym), 1e-9, ok,
                           "includes two-sided branch symmetry")


REGISTRY = (
    _inv_quartic_coefficients,
    _inv_branch_square,
    _inv_shift_identity,
    _inv_normalizer_det,
    _inv_shift_zero_locations,
    _inv_omega_asymptotics,
    _inv_background_residual,
    _inv_root_reconstruction,
    _inv_root_conjugation,
    _inv_family_patterns,
    _inv_classify_roundtrip,
    _inv_classify_disjoint,
    _inv_negative_sampling,
    _inv_crossing_signs,
    _inv_mirror_symmetry,
    _inv_c2zero_reflection,
    _inv_gamma_residual,
    _inv_loop_interior,
    _inv_scattering_identity,
    _inv_scattering_halving,
    _inv_jump_closed_form,
)

INVARIANT_IDS = tuple(fn.__name__.removeprefix("_inv_").replace("_", "-") for fn in REGISTRY)


def run_suite(samples: int = 60, seed: int = 20260816, only=None, fault: str | None = None):
    """Run the registered invariants; returns a list of InvariantResult."""
    if samples < 1:
        raise ConfigError("samples must be at least 1")
    if fault not in (None, "flip-constant"):
        raise ConfigError(f"unknown fault mode {fault!r}")
    wanted = set(only) if only else None
    if wanted is not None:
        unknown = wanted - set(INVARIANT_IDS)
        if unknown:
            raise ConfigError(f"unknown invariant ids: {sorted(unknown)}")
    results = []
    for fn, iid in zip(REGISTRY, INVARIANT_IDS):
        if wanted is not None and iid not in wanted:
            continue
        rng = np.random.default_rng(seed)
        try:
            r = fn(rng, samples, fault)
        except Exception as exc:  # a crashed check is a failed check
            r = InvariantResult(iid, 0, math.nan, 0.0, False,
                                f"raised {type(exc).__name__}: {exc}")
        if r.samples == 0 and r.passed:
            r = InvariantResult(iid, 0, r.worst, r.tol, False, "no samples generated")
        results.append(r)
    return results


def format_results(results) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        note = "  (%s)" % r.note if r.note else ""
        lines.append(
            "[%s] %-24s samples=%-6d worst=%-12.4g tol=%-10.3g%s"
            % (status, r.id, r.samples, r.worst, r.tol, note)
        )
    return "\n".join(lines)
