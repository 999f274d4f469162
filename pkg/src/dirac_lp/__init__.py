"""Numerical companion for L^p spectra of Dirac operators on H_c^{k+1} x N."""
from .clifford import CliffordRep, build_rep, eigenspinor, volume_element
from .closed_spectra import (Circle, ClosedSpectrum, Point, Torus, circle_spectrum,
                             make_region, product_l2_spectrum, torus_spectrum)
from .spectral_region import (SpectralRegion, boundary, classify, contains,
                              d_squared_boundary, laplacian_boundary, upper_envelope)

__all__ = [
    "CliffordRep", "build_rep", "eigenspinor", "volume_element",
    "Circle", "ClosedSpectrum", "Point", "Torus", "circle_spectrum", "make_region",
    "product_l2_spectrum", "torus_spectrum",
    "SpectralRegion", "boundary", "classify", "contains", "d_squared_boundary",
    "laplacian_boundary", "upper_envelope",
]
__version__ = "0.1.0"
