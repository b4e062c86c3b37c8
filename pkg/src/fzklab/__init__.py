"""fzklab: pseudo-spectral laboratory for the fractional Zakharov-Kuznetsov
equation on periodic boxes.

Subpackages
-----------
spectral   grids, transforms, Fourier multipliers, dealiased products
kernels    Bessel-vs-fractional corrector operator and Bessel kernels
weights    weight families, regions, cone condition, smoothing constant
symbols    commutator application and principal symbol expansions
evolve     integrating-factor RK4 time stepping and conservation laws
monitors   localized Sobolev norms, smoothing integrals, propagation monitor
config     experiment configuration (TOML) and the runner behind the CLI
"""

__version__ = "0.1.0"

from .spectral import (
    Field,
    Grid,
    Multiplier,
    SpectralField,
    apply_multiplier,
    bessel_potential,
    bessel_potential_multiplier,
    dealias,
    dealiased_product,
    forward,
    fractional_laplacian,
    fractional_laplacian_multiplier,
    inverse,
    partial,
    partial_multiplier,
    plane_wave,
    riesz_power_multiplier,
)

__all__ = [
    "Field",
    "Grid",
    "Multiplier",
    "SpectralField",
    "apply_multiplier",
    "bessel_potential",
    "bessel_potential_multiplier",
    "dealias",
    "dealiased_product",
    "forward",
    "fractional_laplacian",
    "fractional_laplacian_multiplier",
    "inverse",
    "partial",
    "partial_multiplier",
    "plane_wave",
    "riesz_power_multiplier",
    "__version__",
]
