"""Certified frame and invertibility bounds for Gabor operators on lattices."""
from .cert import Certificate, certify
from .gabor_op import GaborSystem, TorusFrame, gabor_apply_direct, janssen_apply
from .stft import StftEngine, stft_grid, stft_on_dual_lattice, stft_point
from .tf_core import GridFunction, GridSpec, Lattice, PolyWeight, diag_lattice, make_lattice
from .verify import assemble, dual_window, extremal_eigs, verify_certificate
from .windows import gaussian, hermite, indicator

__all__ = [
    "Certificate", "certify", "GaborSystem", "TorusFrame", "gabor_apply_direct", "janssen_apply",
    "StftEngine", "stft_grid", "stft_on_dual_lattice", "stft_point", "GridFunction", "GridSpec",
    "Lattice", "PolyWeight", "diag_lattice", "make_lattice", "assemble", "dual_window",
    "extremal_eigs", "verify_certificate", "gaussian", "hermite", "indicator",
]
