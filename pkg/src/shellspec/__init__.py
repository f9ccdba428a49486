"""Two-dimensional Dirac operators with delta-shell interactions on closed planar curves.

The submodules cover the curve geometry, the 2x2 spin algebra, coupling
classification and renormalisation, Bessel kernels, the boundary integral
(Birman-Schwinger) spectral solver, exact disk references, thin-layer
approximations and a batch command line.
"""

from .couplings import (
    Couplings,
    classify,
    gauge_reduce,
    gauge_reductions,
    isospectral_partner,
    charge_conjugate,
    renormalize_forward,
    renormalize_backward,
)
from .errors import ConfiningCouplingError, CriticalCouplingError, NumericalFailure, ShellSpecError
from .geometry import Curve, circle, ellipse, star
from .kernels import SpectralParameter, bessel_k, green_phi
from .shell_operator import ShellDiscretization, assemble_Cz, bs_operator, eigenvalue_scan, krein_resolvent_apply
from .disk_oracle import disk_eigenvalues, mode_dispersion, zigzag_spectrum
from .approximation import (
    BOX,
    RAISED_COSINE,
    TRIANGLE,
    MOLLIFIER,
    radial_channel_eigenvalues,
    magnetic_alternative,
    field_checks,
)

__all__ = [
    "Couplings",
    "classify",
    "gauge_reduce",
    "gauge_reductions",
    "isospectral_partner",
    "charge_conjugate",
    "renormalize_forward",
    "renormalize_backward",
    "ConfiningCouplingError",
    "CriticalCouplingError",
    "NumericalFailure",
    "ShellSpecError",
    "Curve",
    "circle",
    "ellipse",
    "star",
    "SpectralParameter",
    "bessel_k",
    "green_phi",
    "ShellDiscretization",
    "assemble_Cz",
    "bs_operator",
    "eigenvalue_scan",
    "krein_resolvent_apply",
    "disk_eigenvalues",
    "mode_dispersion",
    "zigzag_spectrum",
    "BOX",
    "RAISED_COSINE",
    "TRIANGLE",
    "MOLLIFIER",
    "radial_channel_eigenvalues",
    "magnetic_alternative",
    "field_checks",
]
