"""Decision procedure for single-exponential boundary triples.

The admissible triples form five closed-form parameter surfaces in
(alpha, omega, c) space for the defocusing sign and two for the
focusing sign.  Membership in each surface reduces to a parameter
window plus one or two scalar equalities, tested here in relative
terms against the triple's own magnitude.  Two independent geometric
exclusion rules (a complex-conjugate zero pair placed where a branch
cut must cross the first spectral domain, and an odd-order real zero
interior to the real trace of the closed first and fourth domains)
cross-check negative verdicts and, in verify mode, guard positive
ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .core import Triple, build_quartic
from .errors import (
    ConfigError,
    IllConditionedRoots,
    InternalInconsistency,
    InvalidPairing,
    OutOfWindow,
)
from .roots import RootSet, solve_quartic
from .cuts import build_cuts
from .spectral import BranchedRoot
from .geometry import partition_domains, real_axis_crossings

__all__ = [
    "Verdict",
    "RuleRecord",
    "Classification",
    "classify",
    "classify_defocusing",
    "classify_focusing",
    "generate_family",
    "generate_focusing",
]


class Verdict(Enum):
    FAMILY_A = "FamilyA"
    FAMILY_B = "FamilyB"
    FAMILY_C = "FamilyC"
    FAMILY_D = "FamilyD"
    FAMILY_E = "FamilyE"
    FOCUSING_A = "FocusingA"
    FOCUSING_B = "FocusingB"
    INADMISSIBLE = "Inadmissible"


_DEFOCUSING_ORDER = ("FamilyA", "FamilyB", "FamilyC", "FamilyD", "FamilyE")
_FOCUSING_ORDER = ("FocusingA", "FocusingB")


@dataclass(frozen=True)
class RuleRecord:
    """One tested rule: membership in a family or an exclusion check.

    margin is the quantity the rule compared against its threshold, in
    relative units; for memberships it is the worst equality residual,
    for exclusion rules a signed firing margin (positive means fired).
    """

    rule: str
    passed: bool
    margin: float
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    reasons: tuple
    boundary_flags: frozenset

    def record(self, rule: str) -> RuleRecord:
        for rec in self.reasons:
            if rec.rule == rule:
                return rec
        raise KeyError(rule)

    @property
    def witness(self):
        """Recovered double-zero abscissa for a B or E verdict, else None."""
        for rec in self.reasons:
            if rec.rule == f"membership:{self.verdict.value}" and "K" in rec.details:
                return rec.details["K"]
        return None


# -- membership tests ----------------------------------------------------

_MISS = float("inf")


def _edge(delta, norm, closed, name, tol, flags) -> bool:
    """One window inequality; delta > 0 is the allowed side.

    Closed edges admit the boundary, open edges exclude it; a band of
    width tol * norm around the edge sets a proximity flag either way,
    and decisions inside a tenth of that band favor the closed side so
    rounding in a generator cannot flip a boundary triple out.
    """
    band = tol * max(norm, 1e-300)
    if abs(delta) <= band:
        flags.add("near:" + name)
    if closed:
        return delta >= -0.1 * band
    return delta > 0.1 * band


def _rel(value, target, floor) -> float:
    """Residual |value - target| relative to the larger magnitude."""
    return abs(value - target) / max(floor, abs(value), abs(target))


@dataclass(frozen=True)
class _Member:
    ok: bool
    residual: float
    flags: frozenset
    details: dict


def _member_a(t: Triple, tol: float) -> _Member:
    fl: set = set()
    s = t.scale
    a2 = t.alpha**2
    # window inequalities compare omega with alpha^2, so their own
    # magnitude sets the band, not the global scale that |c|^2 can dominate
    sw = max(1.0, a2, abs(t.omega))
    ok = _edge(t.omega + 3.0 * a2, sw, True, "A:omega=-3alpha^2", tol, fl)
    ok &= _edge(-t.omega, sw, False, "A:omega=0", tol, fl)
    base = max(0.0, t.omega + 3.0 * a2)
    c2_t = abs(t.omega) ** 1.5 / (3.0 * math.sqrt(3.0) * t.alpha)
    c1sq_t = base**3 / (27.0 * a2)
    residual = max(
        _rel(t.c2, c2_t, math.sqrt(s)),
        _rel(t.c1**2, c1sq_t, s),
    )
    details = {"c2_target": c2_t, "c1sq_target": c1sq_t}
    return _Member(ok and residual <= tol, residual, frozenset(fl), details)


def _member_c(t: Triple, tol: float) -> _Member:
    fl: set = set()
    s = t.scale
    a2 = t.alpha**2
    sw = max(1.0, a2, abs(t.omega))
    ok = _edge(-(t.omega + 3.0 * a2), sw, False, "C:omega=-3alpha^2", tol, fl)
    c2_t = t.alpha * math.sqrt(max(0.0, -2.0 * a2 - t.omega))
    residual = max(
        _rel(t.c1, 0.0, math.sqrt(s)),
        _rel(t.c2, c2_t, math.sqrt(s)),
    )
    return _Member(ok and residual <= tol, residual, frozenset(fl), {"c2_target": c2_t})


def _member_d(t: Triple, tol: float) -> _Member:
    fl: set = set()
    s = t.scale
    a2 = t.alpha**2
    sw = max(1.0, a2, abs(t.omega))
    ok = _edge(t.omega + a2, sw, True, "D:omega=-alpha^2", tol, fl)
    c1sq_t = a2 * max(0.0, t.omega + a2)
    residual = max(
        _rel(t.c2, 0.0, math.sqrt(s)),
        _rel(t.c1**2, c1sq_t, s),
    )
    return _Member(ok and residual <= tol, residual, frozenset(fl), {"c1sq_target": c1sq_t})


def _c1sq_pair_formula(t: Triple, K: float) -> float:
    a2 = t.alpha**2
    return (a2 + t.omega / 2.0) ** 2 - t.c2**2 - 2.0 * K**2 * (6.0 * K**2 + t.omega)


def _member_be(t: Triple, tol: float, family: str, crossings) -> _Member:
    """Families with a prescribed double zero at a positive abscissa K.

    Every positive real root of the cubic 4 K^3 + omega K + alpha c2 is
    a candidate witness; the best-matching one decides.  The two
    families differ only in the sign of c2 and the parameter windows.
    """
    fl: set = set()
    s = t.scale
    swc = max(1.0, abs(t.omega))
    if family == "FamilyB":
        sign_ok = _edge(t.c2, swc, False, "B:c2=0", tol, fl)
    else:
        sign_ok = _edge(-t.c2, swc, False, "E:c2=0", tol, fl)
    if not sign_ok:
        return _Member(False, _MISS, frozenset(fl), {})

    best: _Member | None = None
    for K in crossings:
        if not K > 0.0:
            continue
        kfl: set = set(fl)
        # the windows live in (K, omega, c2) units; the derived alpha and
        # c1 can dwarf them, so the global scale would wash the bands out
        sw = max(1.0, K * K, abs(t.omega))
        if family == "FamilyB":
            # on the lower omega edge the witness degenerates to a double
            # root of the cubic and carries sqrt(eps) noise, so the edge
            # is decided by the cubic discriminant, which the raw triple
            # data determines to full precision; the raw sign of the
            # derivative then just selects the outer root
            disc = -16.0 * t.omega**3 - 432.0 * (t.alpha * t.c2) ** 2
            norm3 = 16.0 * abs(t.omega) ** 3 + 432.0 * (t.alpha * t.c2) ** 2 + 1.0
            ok = _edge(disc, norm3, False, "B:omega=-12K^2", tol, kfl)
            ok &= t.omega + 12.0 * K**2 > 0.0
            ok &= _edge(-(4.0 * K**2 + t.omega), sw, False, "B:omega=-4K^2", tol, kfl)
            ok &= _edge(-(4.0 * K**2 + t.omega) / 2.0 - t.c2, sw, True, "B:c2-max", tol, kfl)
        else:
            ok = _edge(t.omega + 4.0 * K**2, sw, False, "E:omega=-4K^2", tol, kfl)
            ok &= _edge(-(3.0 * K**2 + t.omega), sw, True, "E:omega=-3K^2", tol, kfl)
            ok &= _edge(t.c2 + (4.0 * K**2 + t.omega) / 2.0, sw, True, "E:c2-min", tol, kfl)
        c1sq_t = _c1sq_pair_formula(t, K)
        residual = _rel(t.c1**2, c1sq_t, s)
        if ok and c1sq_t <= tol * s:
            kfl.add(f"{family[-1]}:c1=0")
        cand = _Member(ok and residual <= tol, residual, frozenset(kfl), {"K": K, "c1sq_target": c1sq_t})
        if best is None or (cand.ok, -cand.residual) > (best.ok, -best.residual):
            best = cand
    if best is None:
        return _Member(False, _MISS, frozenset(fl), {})
    return best


def _member_focusing_a(t: Triple, tol: float) -> _Member:
    fl: set = set()
    s = t.scale
    a2 = t.alpha**2
    sw = max(1.0, a2, abs(t.omega))
    ok = _edge(t.omega - a2, sw, True, "FA:omega=alpha^2", tol, fl)
    c1sq_t = a2 * max(0.0, t.omega - a2)
    residual = max(
        _rel(t.c2, 0.0, math.sqrt(s)),
        _rel(t.c1**2, c1sq_t, s),
    )
    return _Member(ok and residual <= tol, residual, frozenset(fl), {"c1sq_target": c1sq_t})


def _member_focusing_b(t: Triple, tol: float) -> _Member:
    fl: set = set()
    s = t.scale
    a2 = t.alpha**2
    sw = max(1.0, a2, abs(t.omega))
    ok = _edge(-(t.omega + 6.0 * a2), sw, True, "FB:omega=-6alpha^2", tol, fl)
    c2_t = t.alpha * math.sqrt(max(0.0, -t.omega + 2.0 * a2))
    residual = max(
        _rel(t.c1, 0.0, math.sqrt(s)),
        _rel(t.c2, c2_t, math.sqrt(s)),
    )
    return _Member(ok and residual <= tol, residual, frozenset(fl), {"c2_target": c2_t})


# -- exclusion rules ------------------------------------------------------


def _pair_rule_side(t: Triple):
    """Half-plane tested by the conjugate-pair rule, or None when the
    rule does not apply.

    For c2 >= 0 a pair in the open first quadrant always obstructs.
    For c2 < 0 the mirrored pair only obstructs above the cusp value
    omega = -3 |alpha c2|^(2/3); at or below it the pair sits clear of
    the region a connecting cut would have to cross, and the family
    with negative c2 lives exactly there.
    """
    if t.c2 >= 0.0:
        return 1.0
    threshold = -3.0 * (t.alpha * (-t.c2)) ** (2.0 / 3.0)
    if t.omega > threshold:
        return -1.0
    return None


def _rule_complex_pair(t: Triple, rs: RootSet, confirm: bool = False) -> RuleRecord:
    side = _pair_rule_side(t)
    eps = 1e-12 * (1.0 + rs.max_abs())
    upper = [(i, r) for i, r in enumerate(rs.roots) if r.imag > eps]
    if side is None or not upper:
        return RuleRecord("exclusion:complex-pair", True, -math.inf, {"applicable": side is not None})
    hits = [(i, r) for i, r in upper if side * r.real > eps]
    margin = max(side * r.real for _, r in upper)
    details: dict = {"applicable": True, "side": side, "pairs": tuple(r for _, r in hits)}
    fired = bool(hits)
    if fired and confirm:
        confirmed = _confirm_pair_configuration(t, rs, hits[0][0])
        details["configuration_confirmed"] = confirmed
        fired = confirmed
    return RuleRecord("exclusion:complex-pair", not fired, margin, details)


def _confirm_pair_configuration(t: Triple, rs: RootSet, idx: int) -> bool:
    """Check the geometric premises behind the conjugate-pair rule.

    Connect the flagged pair by an explicit straight cut, complete the
    pairing for parity, and confirm that the first domain minus the cut
    system stays connected while the pair's cut meets its closure.  An
    unrealizable straight configuration falls back to the location
    test alone.
    """
    roots = list(rs.roots)
    target = roots[idx].conjugate()
    partner = min(
        (j for j in range(len(roots)) if j != idx),
        key=lambda j: abs(roots[j] - target),
        default=None,
    )
    if partner is None:
        return True
    pairs = [(idx, partner)]
    used = [0] * len(roots)
    used[idx] += 1
    used[partner] += 1
    leftover = [i for i, m in enumerate(rs.mults) if (m - used[i]) % 2 == 1]
    while len(leftover) >= 2:
        i = leftover.pop(0)
        j = min(leftover, key=lambda j: abs(roots[j] - roots[i]))
        leftover.remove(j)
        pairs.append((i, j))
    try:
        cc = build_cuts(rs, t, strategy="explicit", pairing=pairs)
        br = BranchedRoot(rs.quartic, rs, cc)
        part = partition_domains(br, resolution=(160, 160))
    except (InvalidPairing, ConfigError):
        return True
    if part.d1_component_count != 1:
        return False
    cut = next(
        (c for c in cc.quartic_cuts if c.kind == "segment" and set(c.root_indices) == {idx, partner}),
        None,
    )
    if cut is None:
        return True
    delta = 1e-3 * (1.0 + rs.max_abs())
    nrm = cut.unit_normal()
    for p in cut.interior_points(15):
        for sgn in (1.0, -1.0):
            z = complex(p) + sgn * delta * nrm
            if z.imag > 0.0 and complex(br.value_raw(z)).imag > 0.0:
                return True
    return False


def _rule_odd_real_zero(t: Triple, rs: RootSet) -> RuleRecord:
    """Probe just above the axis on both sides of each odd-order real
    zero; the zero obstructs when the branched root has positive
    imaginary part on both probes, meaning the real trace around it
    belongs to the interior of the closed first and fourth domains."""
    odd = [(r.real, m) for r, m in zip(rs.roots, rs.mults) if m % 2 == 1 and r.imag == 0.0]
    if not odd:
        return RuleRecord("exclusion:odd-real-zero", True, -math.inf, {"zeros": ()})
    cc = build_cuts(rs, t, strategy="auto")
    br = BranchedRoot(rs.quartic, rs, cc)
    scale = 1.0 + rs.max_abs()
    zeros = []
    worst = -math.inf
    fired = False
    for x, m in odd:
        gaps = [abs(x - r) for r in rs.roots if abs(x - r) > 1e-12 * scale]
        d = 1e-3 * scale
        if gaps:
            d = min(d, 0.3 * min(gaps))
        left = complex(br.value_raw(x - d + 0.6j * d))
        right = complex(br.value_raw(x + d + 0.6j * d))
        mag = max(abs(left), abs(right), 1e-300)
        mrel = min(left.imag, right.imag) / mag
        hit = mrel > 1e-9
        fired |= hit
        worst = max(worst, mrel)
        zeros.append({"x": x, "mult": m, "probe_margin": mrel, "fired": hit})
    return RuleRecord("exclusion:odd-real-zero", not fired, worst, {"zeros": tuple(zeros)})


# -- classifiers ----------------------------------------------------------


def _run_members(t: Triple, tol: float, order, members):
    records = []
    flags: set = set()
    matched = []
    for pos, name in enumerate(order):
        m = members[name]
        records.append(RuleRecord(f"membership:{name}", m.ok, m.residual, m.details))
        if m.residual <= tol:
            flags |= m.flags
        if m.ok:
            matched.append((m.residual, pos, name))
    if matched:
        matched.sort()
        verdict = Verdict(matched[0][2])
        if len(matched) > 1:
            flags.add("ambiguous:" + "+".join(sorted(name for _, _, name in matched)))
    else:
        verdict = Verdict.INADMISSIBLE
    return verdict, records, flags


def classify_defocusing(
    triple: Triple,
    tol: float = 1e-9,
    rules: bool = True,
    verify: bool = False,
) -> Classification:
    """Decide which admissible family, if any, contains the triple.

    Membership in the five parameter surfaces is authoritative; the
    geometric exclusion rules run as cross-checks on Inadmissible
    verdicts (skipped when rules=False) and, when verify=True, on
    family verdicts as well, raising InternalInconsistency if a rule
    fires against a family verdict.  Proximity to any window edge or
    family joint is reported through boundary_flags, never by refusing
    a verdict.
    """
    if triple.lam != 1:
        raise ConfigError("defocusing classifier requires lam=+1")
    if not tol > 0.0:
        raise ConfigError("tol must be positive")
    crossings = real_axis_crossings(triple)
    members = {
        "FamilyA": _member_a(triple, tol),
        "FamilyB": _member_be(triple, tol, "FamilyB", crossings),
        "FamilyC": _member_c(triple, tol),
        "FamilyD": _member_d(triple, tol),
        "FamilyE": _member_be(triple, tol, "FamilyE", crossings),
    }
    verdict, records, flags = _run_members(triple, tol, _DEFOCUSING_ORDER, members)

    if abs(triple.omega) <= tol * max(1.0, triple.alpha**2):
        # omega = 0 slice: the only admissible structure left is a
        # fourth-order zero of the quartic, which pins c = +-alpha^2
        target = triple.alpha**4
        resid = max(
            _rel(triple.c2, 0.0, math.sqrt(triple.scale)),
            _rel(triple.c1**2, target, triple.scale),
        )
        records.append(
            RuleRecord("fourth-order-zero condition", resid <= tol, resid, {"c1sq_target": target})
        )

    if rules and (verdict is Verdict.INADMISSIBLE or verify):
        checking_family = verify and verdict is not Verdict.INADMISSIBLE
        try:
            rs = solve_quartic(build_quartic(triple))
            rule_records = [
                _rule_complex_pair(triple, rs, confirm=checking_family),
                _rule_odd_real_zero(triple, rs),
            ]
        except (IllConditionedRoots, InternalInconsistency, InvalidPairing) as err:
            # root clustering collapses when the quartic coefficients
            # themselves cancel; report the rules as unavailable instead
            # of guessing from garbage locations
            records.append(
                RuleRecord("exclusion:unavailable", True, math.inf, {"error": str(err)})
            )
        else:
            records.extend(rule_records)
            if checking_family:
                for rec in rule_records:
                    if not rec.passed:
                        raise InternalInconsistency(
                            f"{rec.rule} fired against verdict {verdict.value} "
                            f"for {triple} (margin {rec.margin:.3e})"
                        )
    return Classification(verdict, tuple(records), frozenset(flags))


def classify_focusing(triple: Triple, tol: float = 1e-9) -> Classification:
    """Decide membership in the two focusing branches.

    Both branches are closed-form curves in (alpha, omega, c); no
    geometric cross-checks apply."""
    if triple.lam != -1:
        raise ConfigError("focusing classifier requires lam=-1")
    if not tol > 0.0:
        raise ConfigError("tol must be positive")
    members = {
        "FocusingA": _member_focusing_a(triple, tol),
        "FocusingB": _member_focusing_b(triple, tol),
    }
    verdict, records, flags = _run_members(triple, tol, _FOCUSING_ORDER, members)
    return Classification(verdict, tuple(records), frozenset(flags))


def classify(triple: Triple, tol: float = 1e-9, rules: bool = True, verify: bool = False) -> Classification:
    """Dispatch on the equation sign stored in the triple."""
    if triple.lam == 1:
        return classify_defocusing(triple, tol=tol, rules=rules, verify=verify)
    return classify_focusing(triple, tol=tol)


# -- generators -----------------------------------------------------------


def _params_get(params, keys):
    try:
        return tuple(float(params[k]) for k in keys)
    except (KeyError, TypeError) as err:
        raise ConfigError(f"family parameters need keys {keys}: {err}") from err


def _require(cond: bool, desc: str):
    if not cond:
        raise OutOfWindow(desc)


def generate_family(family, params, sign: int = 1) -> Triple:
    """Construct a triple lying exactly on one defocusing family.

    family: one of "A".."E" (a Verdict or "FamilyX" spelling works
    too).  params: {"alpha", "omega"} for A, C, D; {"K", "omega", "c2"}
    for B, E.  sign picks the branch of c1 where the family carries a
    +- choice.  Raises OutOfWindow naming the violated inequality.
    """
    name = family.value if isinstance(family, Verdict) else str(family)
    name = name.removeprefix("Family").upper()
    if name not in ("A", "B", "C", "D", "E"):
        raise ConfigError(f"unknown family {family!r}")
    if sign not in (1, -1):
        raise ConfigError("sign must be +1 or -1")

    if name in ("A", "C", "D"):
        alpha, omega = _params_get(params, ("alpha", "omega"))
        if not alpha > 0.0:
            raise ConfigError("alpha must be positive")
        a2 = alpha**2
        if name == "A":
            _require(omega >= -3.0 * a2, "omega >= -3*alpha^2")
            _require(omega < 0.0, "omega < 0")
            c2 = abs(omega) ** 1.5 / (3.0 * math.sqrt(3.0) * alpha)
            c1 = sign * math.sqrt(max(0.0, omega + 3.0 * a2) ** 3 / (27.0 * a2))
            return Triple(alpha, omega, complex(c1, c2))
        if name == "C":
            _require(omega < -3.0 * a2, "omega < -3*alpha^2")
            return Triple(alpha, omega, complex(0.0, alpha * math.sqrt(-2.0 * a2 - omega)))
        _require(omega + a2 >= 0.0, "omega >= -alpha^2")
        return Triple(alpha, omega, complex(sign * alpha * math.sqrt(omega + a2), 0.0))

    K, omega, c2 = _params_get(params, ("K", "omega", "c2"))
    _require(K > 0.0, "K > 0")
    if name == "B":
        _require(omega > -12.0 * K**2, "omega > -12*K^2")
        _require(omega < -4.0 * K**2, "omega < -4*K^2")
        _require(c2 > 0.0, "c2 > 0")
        _require(c2 <= -(4.0 * K**2 + omega) / 2.0, "c2 <= -(4*K^2+omega)/2")
    else:
        _require(omega > -4.0 * K**2, "omega > -4*K^2")
        _require(omega <= -3.0 * K**2, "omega <= -3*K^2")
        _require(c2 < 0.0, "c2 < 0")
        _require(c2 >= -(4.0 * K**2 + omega) / 2.0, "c2 >= -(4*K^2+omega)/2")
    alpha = -(4.0 * K**3 + omega * K) / c2
    t_probe = Triple(alpha, omega, complex(0.0, c2))
    c1sq = _c1sq_pair_formula(t_probe, K)
    # the closed c2 edge realizes c1 = 0 exactly up to rounding
    if c1sq < 0.0:
        if c1sq < -1e-9 * t_probe.scale**2:
            raise OutOfWindow("c1^2 >= 0")
        c1sq = 0.0
    return Triple(alpha, omega, complex(sign * math.sqrt(c1sq), c2))


def generate_focusing(branch, params, sign: int = 1) -> Triple:
    """Construct a triple on one of the two focusing branches."""
    name = branch.value if isinstance(branch, Verdict) else str(branch)
    name = name.removeprefix("Focusing").upper()
    if name not in ("A", "B"):
        raise ConfigError(f"unknown focusing branch {branch!r}")
    if sign not in (1, -1):
        raise ConfigError("sign must be +1 or -1")
    alpha, omega = _params_get(params, ("alpha", "omega"))
    if not alpha > 0.0:
        raise ConfigError("alpha must be positive")
    a2 = alpha**2
    if name == "A":
        _require(omega >= a2, "omega >= alpha^2")
        return Triple(alpha, omega, complex(sign * alpha * math.sqrt(omega - a2), 0.0), lam=-1)
    _require(omega <= -6.0 * a2, "omega <= -6*alpha^2")
    return Triple(alpha, omega, complex(0.0, alpha * math.sqrt(-omega + 2.0 * a2)), lam=-1)
