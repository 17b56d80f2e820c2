"""Carousel (cabled) solutions of the planar N-body problem.

Pipeline: construct central configurations (`central_config`), certify
the spectral nondegeneracy conditions (`spectral`, with rigorous
interval sweeps from `interval`/`backends`), pick carousel frequencies
and synthesize approximate orbits (`carousel`), verify them by direct
integration (`dynamics`), and refine to numerically periodic solutions
by a Fourier-Galerkin Newton solve (`refine`).  The `carousel` console
script exposes all of it.
"""

from .core import Alpha, ClusterConfig, ClusterIndex
from .central_config import (
    CentralConfiguration,
    amended_potential,
    binary_config,
    lagrange_config,
    mass_beta,
    polygon_config,
    solve_central_config,
)
from .interval import Interval
from .spectral import (
    CertResult,
    certify_a0,
    certify_general,
    certify_lagrange,
    certify_polygon_grav,
    certify_polygon_weak,
    det_m,
    kepler_zero,
    s_coeff,
)

__version__ = "0.1.0"

__all__ = [
    "Alpha",
    "ClusterConfig",
    "ClusterIndex",
    "CentralConfiguration",
    "amended_potential",
    "binary_config",
    "lagrange_config",
    "mass_beta",
    "polygon_config",
    "solve_central_config",
    "Interval",
    "CertResult",
    "certify_a0",
    "certify_general",
    "certify_lagrange",
    "certify_polygon_grav",
    "certify_polygon_weak",
    "det_m",
    "kepler_zero",
    "s_coeff",
    "__version__",
]
