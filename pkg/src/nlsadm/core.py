"""Boundary triples and the spectral quartic they generate.

A boundary triple (alpha, omega, c) prescribes Dirichlet data
alpha*exp(i*omega*t) and Neumann data c*exp(i*omega*t) for the half-line
nonlinear Schrodinger equation i q_t + q_xx - 2*lam*|q|^2 q = 0, with
lam = +1 the defocusing sign and lam = -1 the focusing sign.  Such a
triple determines a real-coefficient quartic polynomial in the spectral
parameter k,

    P(k) = 4 k^4 + 2 omega k^2 + 4 lam alpha Im(c) k
           + (omega/2 + lam alpha^2)^2 - lam |c|^2,

whose branched square root drives every construction in this package:
root patterns, admissibility classification, zero-set geometry and the
jump obstruction on branch cuts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

SIGMA3 = np.array([[1.0 + 0j, 0.0], [0.0, -1.0 + 0j]])

# exp() argument cap; beyond this the time factors overflow double precision
EXP_ARG_LIMIT = 700.0

# test hook: set to "flip-constant" to corrupt the quartic's constant term
_FAULT_MODE = None


@dataclass(frozen=True)
class Triple:
    """One boundary triple plus the equation sign.

    alpha must be positive; c may be any complex number.  lam selects the
    defocusing (+1) or focusing (-1) equation.
    """

    alpha: float
    omega: float
    c: complex
    lam: int = 1

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "lam", int(self.lam))
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ConfigError(f"alpha must be positive and finite, got {self.alpha}")
        if not math.isfinite(self.omega):
            raise ConfigError("omega must be finite")
        if not (math.isfinite(self.c.real) and math.isfinite(self.c.imag)):
            raise ConfigError("c must be finite")
        if self.lam not in (1, -1):
            raise ConfigError(f"lam must be +1 or -1, got {self.lam}")

    @property
    def c1(self) -> float:
        return self.c.real

    @property
    def c2(self) -> float:
        return self.c.imag

    @property
    def c_sq(self) -> float:
        """|c|^2 without the square-root round trip."""
        return self.c.real**2 + self.c.imag**2

    @property
    def scale(self) -> float:
        """Normalization used by relative tolerances."""
        return max(1.0, self.alpha**2, abs(self.omega), self.c_sq)


@dataclass(frozen=True)
class Quartic:
    """Real-coefficient quartic, degree-descending coefficients.

    coeffs has length 5 and coeffs[0] == 4 for quartics built from a
    triple.  source keeps the generating triple when there is one.
    """

    coeffs: tuple
    source: Triple | None = None

    def __post_init__(self):
        if len(self.coeffs) != 5:
            raise ConfigError("quartic needs 5 coefficients")
        object.__setattr__(self, "coeffs", tuple(float(a) for a in self.coeffs))

    def __call__(self, k):
        return self.eval(k)

    def eval(self, k, order: int = 0):
        """Evaluate the order-th derivative at k (scalar or ndarray)."""
        cs = self.coeffs
        if order:
            cs = _poly_derivative(cs, order)
        out = 0.0
        for a in cs:
            out = out * k + a
        return out

    def derivative_coeffs(self, order: int = 1) -> tuple:
        return _poly_derivative(self.coeffs, order)

    @property
    def scale(self) -> float:
        return max(abs(a) for a in self.coeffs)


def _poly_derivative(coeffs, order):
    cs = list(coeffs)
    for _ in range(order):
        n = len(cs) - 1
        cs = [a * (n - i) for i, a in enumerate(cs[:-1])]
        if not cs:
            return (0.0,)
    return tuple(cs)


def build_quartic(triple: Triple) -> Quartic:
    """Quartic generated by a boundary triple.

    All five coefficients are real by construction; the cubic coefficient
    is identically zero.
    """
    a, w, lam = triple.alpha, triple.omega, triple.lam
    const = (w / 2.0 + lam * a * a) ** 2 - lam * triple.c_sq
    if _FAULT_MODE == "flip-constant":
        const = -const
    coeffs = (4.0, 0.0, 2.0 * w, 4.0 * lam * a * triple.c2, const)
    return Quartic(coeffs, source=triple)


def tpart_matrix(triple: Triple, t, k):
    """Coefficient matrix of the time part of the Lax pair evaluated on
    the background field q = alpha*exp(i*omega*t), q_x = c*exp(i*omega*t).

    Returns the 2x2 complex matrix with entries
        [[-i lam alpha^2,              (2 k alpha + i c) e^{i omega t}],
         [(2 k lam alpha - i lam cbar) e^{-i omega t},  i lam alpha^2]].
    Trace is identically zero.
    """
    a, w, c, lam = triple.alpha, triple.omega, triple.c, triple.lam
    ph = np.exp(1j * w * t)
    q12 = (2.0 * k * a + 1j * c) * ph
    q21 = (2.0 * k * lam * a - 1j * lam * np.conj(c)) / ph
    d = 1j * lam * a * a
    return np.array([[-d, q12], [q21, d]])
