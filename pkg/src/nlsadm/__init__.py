"""Admissibility and spectral geometry of single-exponential boundary
data for the half-line nonlinear Schrodinger equation."""

import os as _os

# honor the thread cap before numpy picks its BLAS pool size
_threads = _os.environ.get("NLSADM_THREADS")
if _threads and _threads.isdigit():
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)
del _os

__version__ = "0.1.0"

from .core import Quartic, Triple, build_quartic, tpart_matrix
from .roots import RootSet, solve_quartic
from .cuts import Cut, CutConfiguration, build_cuts
from .spectral import BranchedRoot, make_branched_root
from .classify import (
    Classification,
    Verdict,
    classify,
    classify_defocusing,
    classify_focusing,
    generate_family,
    generate_focusing,
)
from .geometry import (
    GammaCurve,
    DomainPartition,
    SignField,
    compute_sign_field,
    partition_domains,
    trace_gamma,
)
from .scattering import (
    InitialProfile,
    JumpProbe,
    ScatteringData,
    background_jump,
    compute_scattering,
    global_relation_verdict,
    make_profile,
)

__all__ = [
    "Quartic",
    "Triple",
    "build_quartic",
    "tpart_matrix",
    "RootSet",
    "solve_quartic",
    "Cut",
    "CutConfiguration",
    "build_cuts",
    "BranchedRoot",
    "make_branched_root",
    "Classification",
    "Verdict",
    "classify",
    "classify_defocusing",
    "classify_focusing",
    "generate_family",
    "generate_focusing",
    "GammaCurve",
    "DomainPartition",
    "SignField",
    "compute_sign_field",
    "partition_domains",
    "trace_gamma",
    "InitialProfile",
    "JumpProbe",
    "ScatteringData",
    "background_jump",
    "compute_scattering",
    "global_relation_verdict",
    "make_profile",
    "__version__",
]
