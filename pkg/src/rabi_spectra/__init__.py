"""Exact spectra of the one- and two-photon quantum Rabi models.

Eigenvalues are zeros of G-functions built from Bogoliubov-frame coefficient
chains; a Fock-space exact-diagonalization oracle checks every result.
"""
__version__ = "0.1.0"

from .errors import (
    CouplingOutOfRange,
    CutoffTooSmall,
    DegenerateState,
    InvalidParameters,
    NoConvergence,
    NotConverged,
    PoleTooClose,
    RabiError,
    WindowEmpty,
    ZeroCoupling,
)
from .model import OnePhotonParams, Sector, TwoPhotonParams, params_from
from .gfunc import eval_falpha, eval_g0, eval_g2p, eval_g_biased, pole_locations
from .roots import ScanConfig, falpha_spectrum, find_exceptional, find_spectrum, find_zeros
from .oracle import ed_energies, validate_roots
from .sweep import gscan, sweep_coupling

__all__ = [
    "OnePhotonParams",
    "TwoPhotonParams",
    "Sector",
    "params_from",
    "ScanConfig",
    "find_spectrum",
    "find_zeros",
    "find_exceptional",
    "falpha_spectrum",
    "eval_g0",
    "eval_g_biased",
    "eval_g2p",
    "eval_falpha",
    "pole_locations",
    "ed_energies",
    "validate_roots",
    "sweep_coupling",
    "gscan",
    "RabiError",
    "InvalidParameters",
    "CouplingOutOfRange",
    "ZeroCoupling",
    "PoleTooClose",
    "NotConverged",
    "WindowEmpty",
    "CutoffTooSmall",
    "NoConvergence",
    "DegenerateState",
]
