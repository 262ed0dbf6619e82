"""Classifier oracles.

Verdict anchors were derived by hand from the closed-form family
surfaces: each anchor triple's membership equalities and window
placement were checked on paper before being pinned here, so the tests
measure the classifier against independent arithmetic rather than
against itself.
"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlsadm.classify import (
    Classification,
    Verdict,
    classify,
    classify_defocusing,
    classify_focusing,
    generate_family,
    generate_focusing,
)
from nlsadm.core import Triple
from nlsadm.errors import ConfigError, OutOfWindow

SQ2 = math.sqrt(2.0)


def rule(cl: Classification, name: str):
    return cl.record(name)


class TestKnownVerdicts:
    def test_real_c_on_paired_surface(self):
        # c = sqrt(2), omega = 1, alpha = 1: c2 = 0 and c1^2 = 2 = 1*(1+1)
        cl = classify_defocusing(Triple(1.0, 1.0, SQ2))
        assert cl.verdict is Verdict.FAMILY_D

    def test_imaginary_c_locus(self):
        # alpha = sqrt2, omega = -8: alpha*sqrt(-2*2+8) = 2*sqrt2
        cl = classify_defocusing(Triple(SQ2, -8.0, 2.0 * SQ2 * 1j))
        assert cl.verdict is Verdict.FAMILY_C

    def test_quadruple_zero_condition_fails(self):
        # at omega = 0 admissibility needs c1^2 = alpha^4; 1/4 != 1
        cl = classify_defocusing(Triple(1.0, 0.0, 0.5))
        assert cl.verdict is Verdict.INADMISSIBLE
        rec = rule(cl, "membership:FamilyD")
        assert not rec.passed
        assert rec.details["c1sq_target"] == pytest.approx(1.0)
        # the failure is also visible geometrically: the zeros of
        # 4k^4 + 3/4 include a first-quadrant conjugate pair
        assert not rule(cl, "exclusion:complex-pair").passed

    def test_double_zero_family_with_witness(self):
        # K = 1 solves 4K^3 - 8K + 4*1 = 0; c1^2 = (16-4)^2 - 1 - 2(6-8) = 147
        cl = classify_defocusing(Triple(4.0, -8.0, complex(math.sqrt(147.0), 1.0)))
        assert cl.verdict is Verdict.FAMILY_B
        assert cl.witness == pytest.approx(1.0, abs=1e-10)

    def test_fourth_power_quartic_inadmissible(self):
        # c = 0, omega = 0: the quartic is 4k^4 + alpha^4 with no
        # admissible structure; zeros sit at the quadrant bisectors
        cl = classify_defocusing(Triple(1.0, 0.0, 0.0))
        assert cl.verdict is Verdict.INADMISSIBLE
        assert not rule(cl, "exclusion:complex-pair").passed

    def test_wrong_sign_rejected(self):
        with pytest.raises(ConfigError):
            classify_defocusing(Triple(1.0, 1.0, 1.0, lam=-1))
        with pytest.raises(ConfigError):
            classify_focusing(Triple(1.0, 1.0, 1.0))

    def test_dispatcher_routes_on_lam(self):
        assert classify(Triple(1.0, 1.0, SQ2)).verdict is Verdict.FAMILY_D
        assert classify(Triple(1.0, 2.0, 1.0, lam=-1)).verdict is Verdict.FOCUSING_A

    def test_bad_tol(self):
        with pytest.raises(ConfigError):
            classify_defocusing(Triple(1.0, 1.0, SQ2), tol=0.0)


class TestFocusing:
    def test_real_branch(self):
        # alpha = 1, omega = 2: c = +-sqrt(2-1) = +-1
        assert classify_focusing(Triple(1.0, 2.0, 1.0, lam=-1)).verdict is Verdict.FOCUSING_A
        assert classify_focusing(Triple(1.0, 2.0, -1.0, lam=-1)).verdict is Verdict.FOCUSING_A

    def test_imaginary_branch_boundary(self):
        # omega = -6 alpha^2 sits on the closed window edge
        cl = classify_focusing(Triple(1.0, -6.0, 1j * math.sqrt(8.0), lam=-1))
        assert cl.verdict is Verdict.FOCUSING_B
        assert "near:FB:omega=-6alpha^2" in cl.boundary_flags

    def test_imaginary_branch_needs_positive_c2(self):
        cl = classify_focusing(Triple(1.0, -8.0, -1j * math.sqrt(10.0), lam=-1))
        assert cl.verdict is Verdict.INADMISSIBLE

    def test_zero_c_inadmissible(self):
        assert classify_focusing(Triple(1.0, 0.0, 0.0, lam=-1)).verdict is Verdict.INADMISSIBLE

    def test_generator_round_trip(self, rng):
        for _ in range(150):
            a = float(rng.uniform(0.3, 3.0))
            sg = 1 if rng.random() < 0.5 else -1
            ta = generate_focusing("A", {"alpha": a, "omega": a * a + float(rng.uniform(0.0, 5.0))}, sg)
            tb = generate_focusing("B", {"alpha": a, "omega": -6.0 * a * a - float(rng.uniform(0.0, 5.0))})
            assert ta.lam == -1 and tb.lam == -1
            assert classify_focusing(ta).verdict is Verdict.FOCUSING_A
            assert classify_focusing(tb).verdict is Verdict.FOCUSING_B

    def test_generator_windows(self):
        with pytest.raises(OutOfWindow):
            generate_focusing("A", {"alpha": 1.0, "omega": 0.5})
        with pytest.raises(OutOfWindow):
            generate_focusing("B", {"alpha": 1.0, "omega": -5.0})


class TestGenerators:
    def test_triple_zero_anchor(self):
        t = generate_family("A", {"alpha": 2.0, "omega": -12.0})
        assert t.c == 4j

    def test_negative_c2_anchor(self):
        t = generate_family("E", {"K": 1.0, "omega": -3.0, "c2": -0.5})
        assert t.alpha == pytest.approx(2.0, abs=1e-14)
        assert t.c == pytest.approx(-0.5j, abs=1e-14)

    def test_zero_c2_anchor(self):
        t = generate_family("D", {"alpha": 2.0, "omega": -4.0})
        assert t.c == 0j

    def test_sign_flips_c1(self):
        p = {"K": 1.0, "omega": -8.0, "c2": 1.0}
        tp = generate_family("B", p, 1)
        tm = generate_family("B", p, -1)
        assert tp.c1 > 0 and tm.c1 == -tp.c1 and tp.c2 == tm.c2

    def test_family_spellings(self):
        p = {"alpha": 1.0, "omega": -1.0}
        assert generate_family("a", p) == generate_family("FamilyA", p) == generate_family(Verdict.FAMILY_A, p)

    def test_window_violations_name_the_inequality(self):
        with pytest.raises(OutOfWindow, match="omega < 0"):
            generate_family("A", {"alpha": 1.0, "omega": 0.0})
        with pytest.raises(OutOfWindow, match="omega >= -3"):
            generate_family("A", {"alpha": 1.0, "omega": -4.0})
        with pytest.raises(OutOfWindow, match="omega < -3"):
            generate_family("C", {"alpha": 1.0, "omega": -3.0})
        with pytest.raises(OutOfWindow, match="omega >= -alpha"):
            generate_family("D", {"alpha": 1.0, "omega": -1.5})
        with pytest.raises(OutOfWindow, match="K > 0"):
            generate_family("B", {"K": 0.0, "omega": -8.0, "c2": 1.0})
        with pytest.raises(OutOfWindow, match="omega < -4"):
            generate_family("B", {"K": 1.0, "omega": -4.0, "c2": 1.0})
        with pytest.raises(OutOfWindow, match="c2 > 0"):
            generate_family("B", {"K": 1.0, "omega": -8.0, "c2": -1.0})
        with pytest.raises(OutOfWindow, match="c2 <="):
            generate_family("B", {"K": 1.0, "omega": -8.0, "c2": 3.0})
        with pytest.raises(OutOfWindow, match="omega <= -3"):
            generate_family("E", {"K": 1.0, "omega": -2.9, "c2": -0.1})
        with pytest.raises(OutOfWindow, match="c2 >="):
            generate_family("E", {"K": 1.0, "omega": -3.5, "c2": -2.0})

    def test_bad_arguments(self):
        with pytest.raises(ConfigError):
            generate_family("F", {"alpha": 1.0, "omega": -1.0})
        with pytest.raises(ConfigError):
            generate_family("A", {"alpha": 1.0, "omega": -1.0}, sign=2)
        with pytest.raises(ConfigError):
            generate_family("A", {"alpha": 1.0})
        with pytest.raises(ConfigError):
            generate_family("B", {"K": 1.0, "omega": -8.0})

    def test_closed_c2_edge_lands_exactly(self):
        # at c2 = -(4K^2+omega)/2 the remaining freedom collapses, c1 = 0
        t = generate_family("B", {"K": 1.0, "omega": -6.0, "c2": 1.0})
        assert t.c1 == 0.0
        cl = classify_defocusing(t)
        assert cl.verdict is Verdict.FAMILY_B
        assert "B:c1=0" in cl.boundary_flags
        assert "near:B:c2-max" in cl.boundary_flags


def _sample_family(rng, fam, sign=None):
    a = float(rng.uniform(0.3, 3.0))
    sg = sign if sign is not None else (1 if rng.random() < 0.5 else -1)
    if fam == "A":
        w = float(rng.uniform(-3.0 * a * a, 0.0)) or -1e-3
        return generate_family("A", {"alpha": a, "omega": w}, sg)
    if fam == "C":
        return generate_family("C", {"alpha": a, "omega": -3.0 * a * a - float(rng.uniform(0.01, 5.0))})
    if fam == "D":
        return generate_family("D", {"alpha": a, "omega": float(rng.uniform(-a * a, 4.0))}, sg)
    K = float(rng.uniform(0.3, 2.0))
    if fam == "B":
        w = -K * K * float(rng.uniform(4.001, 11.999))
        c2 = -(4.0 * K * K + w) / 2.0 * float(rng.uniform(0.02, 1.0))
        return generate_family("B", {"K": K, "omega": w, "c2": c2}, sg)
    w = -K * K * float(rng.uniform(3.0, 3.999))
    c2 = -(4.0 * K * K + w) / 2.0 * float(rng.uniform(0.02, 1.0))
    return generate_family("E", {"K": K, "omega": w, "c2": c2}, sg)


class TestRoundTrip:
    @pytest.mark.parametrize("fam", list("ABCDE"))
    def test_classify_recovers_family(self, rng, fam):
        for _ in range(200):
            t = _sample_family(rng, fam)
            cl = classify_defocusing(t)
            assert cl.verdict.value == f"Family{fam}", (t, cl.verdict)

    @pytest.mark.parametrize("fam", list("ABCDE"))
    def test_exactly_one_membership(self, rng, fam):
        for _ in range(120):
            cl = classify_defocusing(_sample_family(rng, fam), rules=False)
            hits = [r.rule for r in cl.reasons if r.rule.startswith("membership:") and r.passed]
            assert len(hits) == 1

    def test_witness_matches_generator(self, rng):
        for fam in ("B", "E"):
            for _ in range(40):
                K = float(rng.uniform(0.4, 1.8))
                if fam == "B":
                    w = -K * K * float(rng.uniform(4.2, 11.8))
                else:
                    w = -K * K * float(rng.uniform(3.05, 3.95))
                # -(4K^2+omega)/2 is already positive for B and negative for E
                c2m = -(4.0 * K * K + w) / 2.0
                c2 = c2m * float(rng.uniform(0.05, 0.95))
                t = generate_family(fam, {"K": K, "omega": w, "c2": c2})
                cl = classify_defocusing(t)
                assert cl.verdict.value == f"Family{fam}"
                assert cl.witness == pytest.approx(K, rel=1e-8)

    @given(
        K=st.floats(0.3, 2.0),
        u=st.floats(0.05, 0.95),
        v=st.floats(0.05, 0.95),
        sg=st.sampled_from([1, -1]),
    )
    def test_double_zero_families_property(self, K, u, v, sg):
        w = -(4.0 + 8.0 * u) * K * K
        c2 = -(4.0 * K * K + w) / 2.0 * v
        tb = generate_family("B", {"K": K, "omega": w, "c2": c2}, sg)
        assert classify_defocusing(tb).verdict is Verdict.FAMILY_B
        w = -(3.0 + u) * K * K
        c2 = -(4.0 * K * K + w) / 2.0 * v
        te = generate_family("E", {"K": K, "omega": w, "c2": c2}, sg)
        assert classify_defocusing(te).verdict is Verdict.FAMILY_E

    def test_verify_mode_consistent_on_families(self, rng):
        # the geometric exclusion rules must never contradict a family
        # verdict; verify mode raises if they do
        for fam in "ABCDE":
            for _ in range(12):
                t = _sample_family(rng, fam)
                cl = classify_defocusing(t, verify=True)
                assert cl.verdict.value == f"Family{fam}"
                for rec in cl.reasons:
                    if rec.rule.startswith("exclusion:") and rec.rule != "exclusion:unavailable":
                        assert rec.passed

    def test_deterministic(self):
        t = Triple(1.3, -2.7, complex(0.4, -0.9))
        a = classify_defocusing(t)
        b = classify_defocusing(t)
        assert a == b


class TestJoints:
    def test_triple_zero_meets_imaginary_locus(self):
        # at omega = -3 alpha^2 the two surface formulas coincide:
        # |omega|^(3/2)/(3 sqrt3 alpha) = alpha^2 = alpha sqrt(-2alpha^2-omega)
        a = 1.3
        t = generate_family("A", {"alpha": a, "omega": -3.0 * a * a})
        c_other = a * math.sqrt(-2.0 * a * a + 3.0 * a * a)
        assert abs(t.c - 1j * c_other) <= 1e-12 * max(1.0, abs(t.c))
        cl = classify_defocusing(t)
        assert cl.verdict is Verdict.FAMILY_A
        assert "near:A:omega=-3alpha^2" in cl.boundary_flags
        assert "near:C:omega=-3alpha^2" in cl.boundary_flags

    def test_corner_at_zero_omega(self):
        # (alpha, 0, +-alpha^2) is the common limit of the triple-zero
        # surface (omega -> 0-) and the real-c surface; the open edge
        # puts the verdict on the real-c side, flagged
        cl = classify_defocusing(Triple(1.5, 0.0, 1.5**2))
        assert cl.verdict is Verdict.FAMILY_D
        assert "near:A:omega=0" in cl.boundary_flags

    def test_asymptotic_merge_is_flagged(self):
        # as c2 -> 0+ the derived alpha blows up and the triple-zero and
        # double-zero surfaces approach within any fixed relative
        # tolerance; the classifier keeps one verdict and flags the tie
        t = generate_family("B", {"K": 1.0, "omega": -8.0, "c2": 1e-5})
        cl = classify_defocusing(t, rules=False)
        assert cl.verdict in (Verdict.FAMILY_A, Verdict.FAMILY_B)
        assert any(f.startswith("ambiguous:") for f in cl.boundary_flags)

    def test_negative_c2_edge_shared_forms(self):
        # E at omega = -3K^2 with c2 at the closed minimum: c1 = 0 there
        t = generate_family("E", {"K": 1.0, "omega": -3.0, "c2": -0.5})
        cl = classify_defocusing(t)
        assert cl.verdict is Verdict.FAMILY_E
        assert "near:E:omega=-3K^2" in cl.boundary_flags
        assert "near:E:c2-min" in cl.boundary_flags
        assert "E:c1=0" in cl.boundary_flags


class TestToleranceWindows:
    def test_closed_edge_admits_rounding_overshoot(self):
        # 1e-11 outside the closed window edge is within a tenth of the
        # band and still classifies, with the proximity flagged
        cl = classify_defocusing(Triple(1.0, -1.0 - 1e-11, 0.0))
        assert cl.verdict is Verdict.FAMILY_D
        assert "near:D:omega=-alpha^2" in cl.boundary_flags

    def test_clear_violation_is_inadmissible(self):
        cl = classify_defocusing(Triple(1.0, -1.0 - 1e-6, 0.0))
        assert cl.verdict is Verdict.INADMISSIBLE

    def test_off_surface_beyond_tol(self):
        t = generate_family("B", {"K": 1.0, "omega": -8.0, "c2": 1.0})
        bumped = Triple(t.alpha, t.omega, t.c + 1e-6)
        assert classify_defocusing(bumped).verdict is Verdict.INADMISSIBLE

    def test_loose_tol_recovers_bumped_triple(self):
        t = generate_family("C", {"alpha": 1.0, "omega": -4.0})
        bumped = Triple(t.alpha, t.omega, t.c * (1.0 + 1e-8))
        assert classify_defocusing(bumped).verdict is Verdict.INADMISSIBLE
        assert classify_defocusing(bumped, tol=1e-6).verdict is Verdict.FAMILY_C


class TestExclusionRules:
    def test_interior_simple_zero_fires(self):
        # alpha*c2 = 12 makes K = 1 a double zero of 4(k-1)^2(k^2+2k-5);
        # the simple zero at sqrt6 - 1 > 1 sits interior to the real
        # trace, and c1 was chosen off the family surface
        t = Triple(2.4, -16.0, complex(0.13266499161421599, 5.0))
        cl = classify_defocusing(t)
        assert cl.verdict is Verdict.INADMISSIBLE
        rec = rule(cl, "exclusion:odd-real-zero")
        assert not rec.passed
        fired_at = [z["x"] for z in rec.details["zeros"] if z["fired"]]
        assert fired_at == pytest.approx([math.sqrt(6.0) - 1.0], abs=1e-6)

    def test_first_quadrant_pair_fires(self):
        cl = classify_defocusing(Triple(1.0, 0.0, 0.5))
        rec = rule(cl, "exclusion:complex-pair")
        assert not rec.passed
        assert rec.margin > 0.4

    def test_mirrored_pair_fires_above_cusp(self):
        # c2 < 0 with omega above -3|alpha c2|^(2/3): the obstructing
        # pair sits in the upper-left quadrant
        cl = classify_defocusing(Triple(1.0, 2.0, -0.8j))
        assert cl.verdict is Verdict.INADMISSIBLE
        rec = rule(cl, "exclusion:complex-pair")
        assert not rec.passed
        assert rec.details["side"] == -1.0

    def test_mirrored_pair_not_applicable_below_cusp(self):
        # below the cusp the upper-left pair is exactly the shape the
        # negative-c2 family carries, so the location test stands down
        t = generate_family("E", {"K": 1.0, "omega": -3.5, "c2": -0.2})
        cl = classify_defocusing(t, verify=True)
        assert cl.verdict is Verdict.FAMILY_E
        rec = rule(cl, "exclusion:complex-pair")
        assert rec.passed
        assert rec.details["applicable"] is False

    def test_rules_skipped_when_disabled(self):
        cl = classify_defocusing(Triple(1.0, 0.0, 0.5), rules=False)
        assert cl.verdict is Verdict.INADMISSIBLE
        assert all(not r.rule.startswith("exclusion:") for r in cl.reasons)

    def test_negative_sampling_stays_inadmissible(self, rng):
        # random triples guarded away from every surface at loose
        # tolerance must classify Inadmissible at the working tolerance
        tested = 0
        for _ in range(400):
            t = Triple(
                float(rng.uniform(0.2, 3.0)),
                float(rng.uniform(-20.0, 10.0)),
                complex(rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0)),
            )
            guard = classify_defocusing(t, tol=1e-6, rules=False)
            if guard.verdict is not Verdict.INADMISSIBLE or guard.boundary_flags:
                continue
            tested += 1
            assert classify_defocusing(t).verdict is Verdict.INADMISSIBLE
        assert tested > 300
