"""Exception types shared across the package."""


class NlsadmError(Exception):
    """Base class for package errors."""


class ConfigError(NlsadmError):
    """Invalid user-supplied configuration (bad flag value, malformed file)."""


class OnCutError(NlsadmError):
    """Evaluation point lies within tolerance of a branch cut."""


class BranchPointError(NlsadmError):
    """Evaluation point collides with a branch point."""


class SingularPointError(NlsadmError):
    """Matrix entry denominator vanishes at the evaluation point."""


class OverflowLimit(NlsadmError):
    """An exponent magnitude exceeded the configured cap."""


class IllConditionedRoots(NlsadmError):
    """Root clustering is ambiguous; carries both candidate clusterings."""

    def __init__(self, message, candidates=None):
        super().__init__(message)
        # list of (locations, multiplicities) alternatives
        self.candidates = candidates or []


class InvalidPairing(NlsadmError):
    """Requested cut pairing produces overlapping, non-transverse cuts."""


class DegenerateCut(NlsadmError):
    """Operation requires a cut with nonzero length."""


class OutOfWindow(NlsadmError):
    """Family parameters violate the family's parameter window."""


class ToleranceAmbiguous(NlsadmError):
    """A classification ran within tolerance of a decision boundary.

    Not raised by the classifier itself, which always returns a verdict
    and records the ambiguity in boundary_flags.  Provided for callers
    that want to escalate those flags into a hard failure."""


class StripViolation(NlsadmError):
    """Spectral parameter outside the half-plane where the integrated
    column of the scattering problem stays bounded."""


class NoConvergence(NlsadmError):
    """Adaptive integrator step control underflowed."""


class InternalInconsistency(NlsadmError):
    """Two independent computations of the same fact disagree."""
