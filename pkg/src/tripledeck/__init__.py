"""Spectral instability of shear profiles in the triple-deck model."""
__version__ = "0.1.0"

from .profiles import ShearProfile, couette, example1, example2, find_g_zeros, make_profile
from .phi_infinity import eigenfunction, phi_infinity, phi_infinity_boundary
from .criterion import (contour_winding, count_crossings, n_pm_from_g, origin_in_convex_hull,
                        sample_boundary_curve, winding_number)
from .rootfind import count_zeros, find_roots
from .finitek import boundary_layer, phi_k, solve_os_mu, track_mu_k
from .couette import airy, dispersion_residual, scan_unstable_roots

__all__ = [
    "ShearProfile", "couette", "example1", "example2", "find_g_zeros", "make_profile",
    "eigenfunction", "phi_infinity", "phi_infinity_boundary",
    "contour_winding", "count_crossings", "n_pm_from_g", "origin_in_convex_hull",
    "sample_boundary_curve", "winding_number", "count_zeros", "find_roots",
    "boundary_layer", "phi_k", "solve_os_mu", "track_mu_k",
    "airy", "dispersion_residual", "scan_unstable_roots",
]
