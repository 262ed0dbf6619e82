"""Scattering and jump-probe oracles.

The Gaussian reference value for b comes from first-order perturbation
theory: for q0 = A exp(-x^2) with A small, b(k) is -A times the Fourier
half-line integral of the profile, which evaluates to
-A*(sqrt(pi)/2)*exp(-k^2)*erfc(-ik).  The remaining anchors are the
exact identity at q0 = 0, transfer-matrix unimodularity, and the
closed-form jump on the origin-crossing cut configuration of the
(1, 0, 0) triple.
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import erfc

from nlsadm.core import Triple, build_quartic
from nlsadm.cuts import build_cuts
from nlsadm.errors import ConfigError, StripViolation
from nlsadm.geometry import partition_domains
from nlsadm.roots import solve_quartic
from nlsadm.scattering import (
    InitialProfile,
    JumpProbe,
    background_jump,
    compute_scattering,
    decay_margin,
    global_relation_verdict,
    make_profile,
)
from nlsadm.spectral import BranchedRoot, make_branched_root


def zero_profile():
    return InitialProfile(lambda x: 0.0, 1.0, "zero")


class TestProfiles:
    def test_named_shapes_decay_below_certificate(self):
        for shape in ("gaussian", "sech", "bump"):
            p = make_profile(shape)
            assert decay_margin(p) <= 1e-12

    def test_decay_holds_for_large_amplitude(self):
        for shape in ("gaussian", "sech"):
            p = make_profile(shape, amplitude=50.0, width=2.0)
            assert decay_margin(p) <= 1e-12

    def test_bump_is_exactly_zero_outside_support(self):
        p = make_profile("bump", amplitude=3.0, width=1.5)
        assert p.q0(1.5) == 0.0
        assert p.q0(1.7) == 0.0
        assert abs(p.q0(0.0) - 3.0) < 1e-15

    def test_complex_amplitude(self):
        p = make_profile("gaussian", amplitude=1.0 + 2.0j)
        assert abs(complex(p.q0(0.0)) - (1.0 + 2.0j)) < 1e-15
        assert decay_margin(p) <= 1e-12

    def test_bad_arguments(self):
        with pytest.raises(ConfigError):
            make_profile("triangle")
        with pytest.raises(ConfigError):
            make_profile("gaussian", width=0.0)
        with pytest.raises(ConfigError):
            InitialProfile(lambda x: 0.0, -1.0)


class TestScattering:
    def test_zero_profile_gives_exact_identity(self):
        for k in (0.0, 0.7, -2.3, 1.5j, 0.4 - 0.8j):
            sd = compute_scattering(zero_profile(), k)
            for i in range(2):
                for j in range(2):
                    v = sd.s_matrix[i][j]
                    if v is not None:
                        assert v == (1.0 + 0j if i == j else 0j)
            if sd.a is not None:
                assert sd.a == 1.0 + 0j and sd.b == 0j

    def test_gaussian_unimodularity_on_real_axis(self):
        g = make_profile("gaussian")
        for k in np.linspace(-3.0, 3.0, 11):
            sd = compute_scattering(g, float(k))
            assert abs(sd.det() - 1.0) <= 1e-8
            assert abs(abs(sd.a) ** 2 - abs(sd.b) ** 2 - 1.0) <= 1e-6

    def test_focusing_unimodularity(self):
        g = make_profile("gaussian", amplitude=0.8)
        for k in (-1.3, 0.2, 2.1):
            sd = compute_scattering(g, k, lam=-1)
            assert abs(sd.det() - 1.0) <= 1e-8
            # focusing transfer matrix conserves |a|^2 + |b|^2
            assert abs(abs(sd.a) ** 2 + abs(sd.b) ** 2 - 1.0) <= 1e-6

    def test_small_amplitude_matches_first_order_value(self):
        amp = 1e-4
        g = make_profile("gaussian", amplitude=amp)
        for k in (0.3, 1.1, 2.0):
            sd = compute_scattering(g, k)
            ref = -amp * (math.sqrt(math.pi) / 2.0) * np.exp(-k**2) * erfc(-1j * k)
            # first-order reference; next correction is relative O(amp)
            assert abs(sd.b - ref) <= 1e-4 * abs(ref)
            assert abs(sd.a - 1.0) <= 1e-6

    def test_bump_converges_at_k_eq_i(self):
        p = make_profile("bump", amplitude=2.0)
        sd = compute_scattering(p, 1j)
        assert sd.a is not None and sd.b is not None
        assert np.isfinite(abs(sd.a)) and np.isfinite(abs(sd.b))
        # compact support: the tail leg is identically zero
        assert sd.truncation_error == 0.0
        assert sd.s_matrix[0][0] is None

    def test_gaussian_truncation_error_is_tiny(self):
        sd = compute_scattering(make_profile("gaussian"), 0.9)
        assert sd.truncation_error <= 1e-11

    def test_half_plane_column_selection(self):
        g = make_profile("gaussian")
        up = compute_scattering(g, 0.5 + 1.0j)
        assert up.a is not None and up.s_matrix[0][0] is None
        dn = compute_scattering(g, 0.5 - 1.0j)
        assert dn.a is None and dn.s_matrix[0][0] is not None
        with pytest.raises(ConfigError):
            up.det()

    def test_strip_violations(self):
        g = make_profile("gaussian")
        with pytest.raises(StripViolation):
            compute_scattering(g, 1j, column="first")
        with pytest.raises(StripViolation):
            compute_scattering(g, -1j, column="second")
        with pytest.raises(StripViolation):
            compute_scattering(g, 1j, column="both")

    def test_bad_arguments(self):
        g = make_profile("gaussian")
        with pytest.raises(ConfigError):
            compute_scattering(g, 0.5, column="third")
        with pytest.raises(ConfigError):
            compute_scattering(g, 0.5, integrator_tol=0.0)
        with pytest.raises(ConfigError):
            compute_scattering(g, 0.5, lam=2)

    def test_step_halving_within_reported_error(self):
        g = make_profile("gaussian")
        for k in (0.4, 1.3, 2.6):
            coarse = compute_scattering(g, k, fixed_step=0.05)
            fine = compute_scattering(g, k, fixed_step=0.025)
            diff = max(abs(coarse.a - fine.a), abs(coarse.b - fine.b))
            assert diff <= 10.0 * coarse.err_estimate

    @given(
        k=st.floats(-3.0, 3.0),
        amp=st.floats(0.1, 2.0),
        width=st.floats(0.5, 2.0),
    )
    def test_unimodularity_property(self, k, amp, width):
        g = make_profile("gaussian", amplitude=amp, width=width)
        sd = compute_scattering(g, k, integrator_tol=1e-9)
        assert abs(sd.det() - 1.0) <= 1e-7
        assert abs(abs(sd.a) ** 2 - abs(sd.b) ** 2 - 1.0) <= 1e-5


def origin_crossing_configuration():
    """Cuts of the (1, 0, 0) quartic joining antipodal roots.

    Both cuts pass through the origin along the diagonals, which lie
    on the zero set of Im of the squared root, so removing them leaves
    the first domain connected; the conjugate pairing would instead
    pinch off a pocket.
    """
    t = Triple(1.0, 0.0, 0j)
    rs = solve_quartic(build_quartic(t))
    order = sorted(range(4), key=lambda i: (rs.roots[i].real, rs.roots[i].imag))
    ll, ul, lr, ur = order
    cfg = build_cuts(rs, t, strategy="explicit", pairing=[(ll, ur), (lr, ul)])
    return t, BranchedRoot(build_quartic(t), rs, cfg)


class TestJumpProbe:
    def test_origin_cut_jump_matches_ratio_of_root_to_k(self):
        t, br = origin_crossing_configuration()
        cut = br.cuts.quartic_cuts[0]
        probe = background_jump(t, cut, n_samples=8, br=br)
        assert probe.valid_cut and len(probe.samples) == 8
        for sm in probe.samples:
            target = 1j * sm.omega_plus / sm.k
            assert abs(sm.jump - target) <= 1e-9 * abs(target)
        assert probe.jump_nonzero()

    def test_cpoint_sample_is_skipped_not_fatal(self):
        # an odd sample count lands one probe point exactly on the
        # origin, where the ratio denominator 2*alpha*k - i*conj(c)
        # vanishes for c = 0
        t, br = origin_crossing_configuration()
        probe = background_jump(t, br.cuts.quartic_cuts[0], n_samples=7, br=br)
        assert len(probe.samples) == 6
        assert len(probe.skipped) == 1
        assert "denominator" in probe.skipped[0][1]

    def test_side_limits_are_opposite_branches(self):
        t, br = origin_crossing_configuration()
        for cut in br.cuts.quartic_cuts:
            probe = background_jump(t, cut, n_samples=6, br=br)
            for sm in probe.samples:
                rel = abs(sm.omega_plus + sm.omega_minus) / (2.0 * abs(sm.omega_plus))
                assert rel <= 1e-10

    def test_default_pairing_also_carries_nonzero_jump(self):
        t = Triple(1.0, 0.0, 0j)
        br = make_branched_root(t)
        cut = next(c for c in br.cuts.quartic_cuts if c.p.real > 0)
        probe = background_jump(t, cut, n_samples=6, br=br)
        assert probe.jump_nonzero()
        assert probe.worst_closed_form_error() <= 1e-9

    def test_double_zero_cut_reports_no_valid_cut(self):
        t = Triple(1.0, 1.0, complex(math.sqrt(2.0)))
        br = make_branched_root(t)
        assert all(c.degenerate for c in br.cuts.quartic_cuts)
        probe = background_jump(t, br.cuts.quartic_cuts[0], n_samples=5, br=br)
        assert not probe.valid_cut
        assert probe.samples == ()
        assert not probe.jump_nonzero()

    def test_foreign_cut_rejected(self):
        t, br = origin_crossing_configuration()
        other = make_branched_root(t)  # conjugate pairing, different cuts
        with pytest.raises(ConfigError):
            background_jump(t, other.cuts.quartic_cuts[0], br=br)

    def test_bad_sample_count(self):
        t, br = origin_crossing_configuration()
        with pytest.raises(ConfigError):
            background_jump(t, br.cuts.quartic_cuts[0], n_samples=0, br=br)


class TestGlobalRelationVerdict:
    def test_origin_cut_route_flags_obstruction_consistently(self):
        t, br = origin_crossing_configuration()
        part = partition_domains(br)
        assert part.d1_component_count == 1
        probe = background_jump(t, br.cuts.quartic_cuts[0], n_samples=6, br=br)
        v = global_relation_verdict(t, part, probe)
        assert v.d1_minus_C_connected is True
        assert v.jump_obstruction is True
        assert v.verdict_consistent_with_classify is True
        assert v.classify_verdict == "Inadmissible"

    def test_loop_cut_disconnects_and_silences_the_route(self):
        # a loop around a double zero isolates the enclosed region, so
        # the connectivity hypothesis fails and nothing is implied
        t = Triple(1.0, 4.0, complex(math.sqrt(5.0)))
        br = make_branched_root(t, loop=(1, 0.4))
        part = partition_domains(br, resolution=(400, 400))
        v = global_relation_verdict(t, part, probe=None)
        assert v.d1_minus_C_connected is False
        assert v.jump_obstruction is None
        assert v.verdict_consistent_with_classify is True
        assert v.classify_verdict == "FamilyD"

    def test_probe_without_samples_stays_silent(self):
        t = Triple(1.0, 1.0, complex(math.sqrt(2.0)))
        br = make_branched_root(t)
        probe = background_jump(t, br.cuts.quartic_cuts[0], br=br)
        v = global_relation_verdict(t, partition_domains(br), probe)
        assert v.jump_obstruction is None
        assert v.verdict_consistent_with_classify is True

    def test_triple_zero_family_route_is_silent(self):
        # the quartic of this family has a triple zero on the real
        # axis; the default cuts run along the real axis and no probe
        # is supplied, so the closed-form verdict stands alone
        from nlsadm.classify import generate_family

        t = generate_family("A", {"alpha": 1.0, "omega": -1.5})
        br = make_branched_root(t)
        part = partition_domains(br)
        v = global_relation_verdict(t, part, probe=None)
        assert v.jump_obstruction is None
        assert v.verdict_consistent_with_classify is True
        assert v.classify_verdict == "FamilyA"
