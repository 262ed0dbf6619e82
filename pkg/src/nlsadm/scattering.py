"""Direct scattering for decaying initial slices and the background jump.

Two independent numerical instruments live here.  The first integrates
the x-part of the linear system for a decaying profile q0 on the
half-line and reads off the scattering matrix at x = 0, which is where
the spectral functions a and b come from.  The second samples the
ratio of the two background eigenfunction entries on either side of a
quartic branch cut: on an admissible configuration that ratio must
continue across the cut, so a nonzero two-sided jump is an
obstruction.  A verdict combinator cross-checks the obstruction
against the closed-form classifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Triple
from .cuts import Cut
from .errors import (
    ConfigError,
    InternalInconsistency,
    NoConvergence,
    StripViolation,
)
from .spectral import BranchedRoot, make_branched_root, plateau
from .geometry import DomainPartition

__all__ = [
    "InitialProfile",
    "make_profile",
    "decay_margin",
    "ScatteringData",
    "compute_scattering",
    "JumpSample",
    "JumpProbe",
    "background_jump",
    "GlobalRelationVerdict",
    "global_relation_verdict",
]

_DECAY_LEVEL = 1e-12


@dataclass(frozen=True)
class InitialProfile:
    """Decaying initial slice q0 on x >= 0.

    decay_certificate is an L with |q0| <= 1e-12 beyond it, which is
    where the scattering integration may start from the identity.
    """

    q0: object
    decay_certificate: float
    label: str = "custom"

    def __post_init__(self):
        if not (self.decay_certificate > 0 and math.isfinite(self.decay_certificate)):
            raise ConfigError("decay_certificate must be a positive finite length")


def make_profile(shape: str, amplitude: complex = 1.0, width: float = 1.0) -> InitialProfile:
    """Named profile shapes with computed decay certificates."""
    if not (width > 0 and math.isfinite(width)):
        raise ConfigError("width must be positive")
    amplitude = complex(amplitude)
    mag = max(abs(amplitude), _DECAY_LEVEL)
    if shape == "gaussian":
        L = width * math.sqrt(math.log(mag / _DECAY_LEVEL) + 1.0)

        def q0(x, _a=amplitude, _w=width):
            return _a * np.exp(-((x / _w) ** 2))

    elif shape == "sech":
        L = width * (math.log(2.0 * mag / _DECAY_LEVEL) + 1.0)

        def q0(x, _a=amplitude, _w=width):
            return _a / np.cosh(x / _w)

    elif shape == "bump":
        # exactly zero beyond the support edge
        L = width

        def q0(x, _a=amplitude, _w=width):
            u = x / _w
            if u >= 1.0:
                return 0.0 * _a
            return _a * np.exp(1.0 - 1.0 / (1.0 - u * u))

    else:
        raise ConfigError(f"unknown profile shape {shape!r}")
    return InitialProfile(q0, L, label=shape)


def decay_margin(profile: InitialProfile, n: int = 100) -> float:
    """Worst |q0| sampled on [L, 2L]; must sit at or below 1e-12."""
    L = profile.decay_certificate
    xs = np.linspace(L, 2.0 * L, n)
    return max(abs(complex(profile.q0(float(x)))) for x in xs)


# -- adaptive Dormand-Prince 4(5) over a complex state -------------------

_DP_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_DP_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
_DP_E = (
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


def _dp_integrate(f, x0: float, x1: float, y0, rtol: float, fixed_step=None):
    """Integrate y' = f(x, y) from x0 to x1.

    Returns (y, accumulated local error, accepted steps).  fixed_step
    disables step control and marches at the given magnitude, still
    accumulating the embedded error estimate.
    """
    y = np.array(y0, dtype=complex)
    x = x0
    span = x1 - x0
    if span == 0.0:
        return y, 0.0, 0
    direction = 1.0 if span > 0 else -1.0
    atol = rtol * 1e-2
    h = fixed_step * direction if fixed_step else span / 64.0
    h_min = abs(span) * 1e-14
    err_acc = 0.0
    k1 = f(x, y)
    steps = 0
    for _ in range(200000):
        if direction * (x1 - x) <= 0.0:
            return y, err_acc, steps
        if direction * (x + h - x1) > 0.0:
            h = x1 - x
        ks = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * k for a, k in zip(_DP_A[i], ks))
            ks.append(f(x + _DP_C[i] * h, yi))
        y5 = yi  # the 7th stage argument is already the 5th-order solution
        err_vec = h * sum(e * k for e, k in zip(_DP_E, ks))
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err_norm = float(np.max(np.abs(err_vec) / scale))
        if fixed_step or err_norm <= 1.0:
            x += h
            y = y5
            k1 = ks[6]  # FSAL
            err_acc += float(np.max(np.abs(err_vec)))
            steps += 1
            if not fixed_step:
                factor = 0.9 * err_norm ** -0.2 if err_norm > 0 else 5.0
                h *= min(5.0, max(0.2, factor))
        else:
            h *= max(0.2, 0.9 * err_norm**-0.2)
            if abs(h) < h_min:
                raise NoConvergence(f"step control underflow at x = {x:.6g}")
    raise NoConvergence("step budget exhausted")


# -- scattering at x = 0 --------------------------------------------------


@dataclass(frozen=True)
class ScatteringData:
    """Scattering matrix of the x-part at x = 0 for one k.

    a and b are the second-column entries; they are None when only the
    first column was integrable at this k.  err_estimate accumulates
    the embedded local error, truncation_error measures how far the
    tail segment [L, 2L] moved the identity.
    """

    k: complex
    s_matrix: tuple
    a: complex | None
    b: complex | None
    lam: int
    err_estimate: float
    truncation_error: float
    steps: int

    def det(self) -> complex:
        (s11, s12), (s21, s22) = self.s_matrix
        if None in (s11, s12, s21, s22):
            raise ConfigError("determinant needs both columns; integrate at real k")
        return s11 * s22 - s12 * s21


def _columns_for(k: complex, column: str) -> tuple:
    tiny = 1e-12 * (1.0 + abs(k))
    if column == "auto":
        if abs(k.imag) <= tiny:
            return (0, 1)
        return (1,) if k.imag > 0 else (0,)
    if column == "both":
        if abs(k.imag) > tiny:
            raise StripViolation(f"both columns need real k, got Im k = {k.imag:g}")
        return (0, 1)
    if column == "second":
        if k.imag < -tiny:
            raise StripViolation("second column is bounded only for Im k >= 0")
        return (1,)
    if column == "first":
        if k.imag > tiny:
            raise StripViolation("first column is bounded only for Im k <= 0")
        return (0,)
    raise ConfigError(f"unknown column selector {column!r}")


def compute_scattering(
    profile: InitialProfile,
    k: complex,
    integrator_tol: float = 1e-10,
    lam: int = 1,
    column: str = "auto",
    fixed_step=None,
) -> ScatteringData:
    """Integrate the x-part down from the decay region to x = 0.

    The normalized eigenfunction tends to the identity as x grows, so
    integration starts at 2L from the identity; the [2L, L] leg is
    nearly free and its deviation from the identity is reported as the
    truncation error.  Off the real axis only one column stays bounded
    and the other is left as None.
    """
    if lam not in (1, -1):
        raise ConfigError("lam must be +1 or -1")
    if not integrator_tol > 0:
        raise ConfigError("integrator_tol must be positive")
    k = complex(k)
    cols = _columns_for(k, column)
    L = profile.decay_certificate
    q0 = profile.q0
    two_ik = 2.0j * k

    def rhs_col(col):
        # commutator acts only on the off-diagonal entry of each column:
        # col 0 carries e^{+2ikx} free dynamics, col 1 carries e^{-2ikx}
        def f(x, v):
            q = complex(q0(x))
            top, bot = v[0], v[1]
            if col == 1:
                return np.array([-two_ik * top + q * bot, lam * q.conjugate() * top], dtype=complex)
            return np.array([q * bot, two_ik * bot + lam * q.conjugate() * top], dtype=complex)

        return f

    s = [[None, None], [None, None]]
    err_total = 0.0
    trunc_total = 0.0
    steps_total = 0
    for col in cols:
        f = rhs_col(col)
        ident = np.array([1.0, 0.0] if col == 0 else [0.0, 1.0], dtype=complex)
        y_tail, err_tail, st_tail = _dp_integrate(f, 2.0 * L, L, ident, integrator_tol, fixed_step)
        trunc_total = max(trunc_total, float(np.max(np.abs(y_tail - ident))))
        y0, err_main, st_main = _dp_integrate(f, L, 0.0, y_tail, integrator_tol, fixed_step)
        s[0][col] = complex(y0[0])
        s[1][col] = complex(y0[1])
        err_total += err_tail + err_main
        steps_total += st_tail + st_main
    smat = (tuple(s[0]), tuple(s[1]))
    a = s[1][1]
    b = s[0][1]
    return ScatteringData(k, smat, a, b, lam, err_total, trunc_total, steps_total)


# -- background jump across a quartic cut ---------------------------------


@dataclass(frozen=True)
class JumpSample:
    s: float
    k: complex
    omega_plus: complex
    omega_minus: complex
    ba_plus: complex
    ba_minus: complex
    jump: complex
    closed_form: complex


@dataclass(frozen=True)
class JumpProbe:
    """Two-sided samples of the eigenfunction entry ratio on one cut.

    With the exact single-exponential background the connection matrix
    is the identity and the ratio reduces to lam*i*H/(2 alpha k - i
    conj(c)) on either side, so the jump has the closed form
    2*lam*i*Omega_plus/(2 alpha k - i conj(c)).  valid_cut is False
    when the cut has zero length: the root does not change sign across
    it and the probe carries no information.
    """

    triple: Triple
    cut: Cut
    samples: tuple
    skipped: tuple = ()
    valid_cut: bool = True

    def jump_nonzero(self, rel_tol: float = 1e-6) -> bool:
        if not self.samples:
            return False
        for sm in self.samples:
            size = max(abs(sm.ba_plus), abs(sm.ba_minus), 1.0)
            if abs(sm.jump) <= rel_tol * size:
                return False
        return True

    def worst_closed_form_error(self) -> float:
        out = 0.0
        for sm in self.samples:
            den = max(abs(sm.closed_form), 1e-300)
            out = max(out, abs(sm.jump - sm.closed_form) / den)
        return out


def background_jump(
    triple: Triple,
    cut: Cut,
    n_samples: int = 9,
    br: BranchedRoot | None = None,
) -> JumpProbe:
    """Sample the background ratio jump at interior points of a cut.

    The cut must be a quartic segment of the supplied branched root's
    configuration (built automatically when br is omitted).  Samples
    where the root limit nearly vanishes, meaning the point sits too
    close to a branch point, are skipped and reported.
    """
    if n_samples < 1:
        raise ConfigError("n_samples must be at least 1")
    if cut.kind == "degenerate":
        # a double zero: the root does not change sign, nothing to probe
        return JumpProbe(triple, cut, (), (), valid_cut=False)
    if cut.kind != "segment":
        raise ConfigError(f"background jump needs a quartic segment cut, got {cut.kind!r}")
    if br is None:
        br = make_branched_root(triple)
    match = any(
        c.kind == "segment" and abs(c.p - cut.p) + abs(c.q - cut.q) <= 1e-12 * (1.0 + abs(c.p) + abs(c.q))
        for c in br.cuts.quartic_cuts
    )
    if not match:
        raise ConfigError("cut does not belong to the branched root's configuration")

    t = triple
    denom_at = lambda k: 2.0 * t.alpha * k - 1j * t.c.conjugate()
    omega_scale = 1.0 + br.rootset.max_abs() ** 2
    samples = []
    skipped = []
    for j in range(n_samples):
        s = (j + 1.0) / (n_samples + 1.0)
        k0 = cut.p + s * (cut.q - cut.p)
        om_p = br.side_limit(cut, s, +1)
        om_m = br.side_limit(cut, s, -1)
        if abs(om_p) <= 1e-9 * omega_scale:
            skipped.append((s, "root limit vanishes near a branch point"))
            continue
        den = denom_at(k0)
        if abs(den) <= 1e-12 * (1.0 + abs(k0)):
            skipped.append((s, "ratio denominator vanishes at the c-point"))
            continue
        h_p = om_p - plateau(t, k0)
        h_m = om_m - plateau(t, k0)
        ba_p = t.lam * 1j * h_p / den
        ba_m = t.lam * 1j * h_m / den
        jump = ba_p - ba_m
        closed = 2.0 * t.lam * 1j * om_p / den
        if abs(jump - closed) > 1e-9 * max(abs(closed), 1e-300):
            raise InternalInconsistency(
                f"two-sided jump at s = {s:.4f} disagrees with the closed form: "
                f"{jump:.6e} vs {closed:.6e}"
            )
        samples.append(
            JumpSample(s, complex(k0), complex(om_p), complex(om_m),
                       complex(ba_p), complex(ba_m), complex(jump), complex(closed))
        )
    return JumpProbe(t, cut, tuple(samples), tuple(skipped))


# -- global relation cross-check ------------------------------------------


@dataclass(frozen=True)
class GlobalRelationVerdict:
    d1_minus_C_connected: bool
    jump_obstruction: bool | None
    verdict_consistent_with_classify: bool
    classify_verdict: str


def global_relation_verdict(
    triple: Triple,
    partition: DomainPartition,
    probe: JumpProbe | None = None,
) -> GlobalRelationVerdict:
    """Combine connectivity and the jump probe into an obstruction check.

    The obstruction route implies inadmissibility only when the first
    domain minus the cuts is connected and the probed cut carries a
    nonzero jump; the result records whether that implication agrees
    with the closed-form classifier.  A silent route (disconnected, no
    probe, or no valid samples) is consistent with anything.
    """
    from .classify import Verdict, classify

    connected = partition.d1_component_count == 1
    jump = None
    if probe is not None and probe.samples:
        jump = probe.jump_nonzero()
    implied_inadmissible = connected and jump is True
    cl = classify(triple, rules=False)
    consistent = (not implied_inadmissible) or cl.verdict is Verdict.INADMISSIBLE
    return GlobalRelationVerdict(connected, jump, consistent, cl.verdict.value)
