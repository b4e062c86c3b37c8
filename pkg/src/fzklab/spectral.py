"""Periodic-box spectral core: grids, transforms, Fourier multipliers.

All operators act on real scalar fields sampled on a uniform periodic
lattice.  The frequency convention is ``xi = k / L`` for integer ``k`` in
the centered range ``[-points/2, points/2)``, so symbols are written
literally in terms of ``2*pi*xi``:

* fractional Laplacian of order ``alpha``:  ``|2*pi*xi|**alpha``
* Bessel potential of order ``s``:          ``(1 + |2*pi*xi|**2)**(s/2)``
* partial derivative ``d^beta``:            ``prod (2*pi*i*xi_j)**beta_j``

Nonlinear products use the 2/3-rule sharp spectral truncation, which is
exact for inputs band-limited to the retained band.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.fft as _fft


class GridMismatchError(ValueError):
    """Operands live on different grids."""


class SymbolEvaluationError(ArithmeticError):
    """A multiplier symbol produced non-finite values on the lattice."""


def fft_workers() -> int:
    """Worker count for FFT execution, capped by the FZK_THREADS env var."""
    env = os.environ.get("FZK_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def _as_tuple(value, n: int, name: str) -> tuple:
    if np.isscalar(value):
        return tuple([value] * n)
    out = tuple(value)
    if len(out) != n:
        raise ValueError(f"{name} must be a scalar or a length-{n} sequence")
    return out


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on an n-dimensional box.

    Parameters
    ----------
    points : tuple of int
        Samples per axis.  Each entry must be a power of two and >= 8.
    lengths : tuple of float
        Box length per axis.
    origin : tuple of float
        Coordinate of the lower corner per axis (defaults to 0).
    """

    points: tuple
    lengths: tuple
    origin: tuple = ()

    def __post_init__(self):
        pts = tuple(int(p) for p in self.points)
        n = len(pts)
        if n not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {n}")
        for p in pts:
            if p < 8:
                raise ValueError(f"points per axis must be >= 8, got {p}")
            if p & (p - 1) != 0:
                raise ValueError(f"points per axis must be a power of two, got {p}")
        lengths = tuple(float(L) for L in _as_tuple(self.lengths, n, "lengths"))
        if any(L <= 0 for L in lengths):
            raise ValueError("box lengths must be positive")
        origin = self.origin if self.origin else (0.0,) * n
        origin = tuple(float(o) for o in _as_tuple(origin, n, "origin"))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def square(cls, n: int, points: int, length: float, origin: float = 0.0) -> "Grid":
        """Isotropic n-dimensional grid with identical axes."""
        return cls((points,) * n, (length,) * n, (origin,) * n)

    @property
    def ndim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple:
        return self.points

    @property
    def spacing(self) -> tuple:
        return tuple(L / p for L, p in zip(self.lengths, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def num_points(self) -> int:
        return int(np.prod(self.points))

    @cached_property
    def coordinate_axes(self) -> tuple:
        return tuple(
            o + h * np.arange(p)
            for o, h, p in zip(self.origin, self.spacing, self.points)
        )

    @cached_property
    def coordinates(self) -> tuple:
        """Physical coordinate arrays, one full lattice array per axis."""
        return tuple(np.meshgrid(*self.coordinate_axes, indexing="ij"))

    @cached_property
    def frequency_axes(self) -> tuple:
        # fftfreq(p, d=h) returns k/(p*h) = k/L exactly
        return tuple(
            _fft.fftfreq(p, d=h) for p, h in zip(self.points, self.spacing)
        )

    @cached_property
    def frequencies(self) -> tuple:
        """Frequency arrays xi_j = k_j / L_j on the full lattice."""
        return tuple(np.meshgrid(*self.frequency_axes, indexing="ij"))

    @cached_property
    def wavenumber_norm(self) -> np.ndarray:
        """|2*pi*xi| on the lattice."""
        out = np.zeros(self.shape)
        for xi in self.frequencies:
            out += (2.0 * np.pi * xi) ** 2
        return np.sqrt(out)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Sharp 2/3-rule mask: keep integer modes |k_j| <= points_j // 3."""
        mask = np.ones(self.shape, dtype=bool)
        for axis, p in enumerate(self.points):
            k = np.rint(_fft.fftfreq(p) * p).astype(int)
            cut = p // 3
            shape = [1] * self.ndim
            shape[axis] = p
            mask &= (np.abs(k) <= cut).reshape(shape)
        return mask

    def same_as(self, other: "Grid") -> bool:
        return (
            self.points == other.points
            and self.lengths == other.lengths
            and self.origin == other.origin
        )

    def require_same(self, other: "Grid"):
        if not self.same_as(other):
            raise GridMismatchError(f"grid mismatch: {self} vs {other}")


@dataclass(frozen=True)
class Field:
    """Real scalar field sampled on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise GridMismatchError(
                f"values shape {vals.shape} != grid shape {self.grid.shape}"
            )
        object.__setattr__(self, "values", vals)

    def l2_norm(self) -> float:
        """Continuum L2 norm: sqrt(cell_volume * sum(values^2))."""
        return float(np.sqrt(self.grid.cell_volume * np.sum(self.values**2)))

    def integral(self) -> float:
        return float(self.grid.cell_volume * np.sum(self.values))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def __add__(self, other: "Field") -> "Field":
        self.grid.require_same(other.grid)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self.grid.require_same(other.grid)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a field, in unnormalized DFT layout."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != self.grid.shape:
            raise GridMismatchError(
                f"coeffs shape {coeffs.shape} != grid shape {self.grid.shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    def l2_norm(self) -> float:
        """Same normalization as Field.l2_norm (Parseval-consistent)."""
        scale = self.grid.cell_volume / self.grid.num_points
        return float(np.sqrt(scale * np.sum(np.abs(self.coeffs) ** 2)))

    def hermitian_defect(self) -> float:
        """Max |c(-k) - conj(c(k))| over the lattice (0 for real data)."""
        flipped = _reverse_modes(self.coeffs)
        return float(np.max(np.abs(flipped - np.conj(self.coeffs))))


def _reverse_modes(arr: np.ndarray) -> np.ndarray:
    """Sample array at -k for every lattice mode k."""
    out = arr
    for axis in range(arr.ndim):
        out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
    return out


def forward(f: Field) -> SpectralField:
    """Forward transform (unnormalized DFT of the sample values)."""
    return SpectralField(f.grid, _fft.fftn(f.values, workers=fft_workers()))


def inverse(F: SpectralField, imag_tol: float = 1e-10) -> Field:
    """Inverse transform back to a real field.

    The imaginary residue must be below ``imag_tol`` times the field norm;
    a larger residue signals broken Hermitian symmetry and raises.
    """
    vals = _fft.ifftn(F.coeffs, workers=fft_workers())
    re = np.real(vals)
    im_norm = float(np.linalg.norm(np.imag(vals)))
    re_norm = float(np.linalg.norm(re))
    if im_norm > imag_tol * max(re_norm, 1e-300):
        raise SymbolEvaluationError(
            f"imaginary residue {im_norm:.3e} exceeds {imag_tol:.1e} of "
            f"output norm {re_norm:.3e}; spectrum is not Hermitian"
        )
    return Field(F.grid, re)


@dataclass(frozen=True)
class Multiplier:
    """Fourier multiplier operator defined by a frequency symbol.

    Parameters
    ----------
    symbol : callable
        Maps a tuple of frequency arrays (xi_1, ..., xi_n) to the symbol
        values (complex array of the same shape).
    order : float
        Nominal operator order m (growth exponent of the symbol), used by
        scaling tests.
    name : str
        Short label for diagnostics.
    nyquist_fix : tuple of (axis, value)
        Value forced on the unpaired Nyquist plane of the given axis when
        sampling on a lattice.  Symbols that are odd in one frequency
        component need this (0 for derivatives, 1 for unitary propagators)
        to act real-to-real; the fixed mode lies outside the dealias band.
    """

    symbol: Callable
    order: float = 0.0
    name: str = "multiplier"
    nyquist_fix: tuple = ()

    def sample(self, grid: Grid) -> np.ndarray:
        """Evaluate the symbol on the grid's frequency lattice."""
        values = np.asarray(self.symbol(grid.frequencies), dtype=complex)
        if values.shape != grid.shape:
            values = np.broadcast_to(values, grid.shape).astype(complex)
        for axis, fix in self.nyquist_fix:
            ax = grid.frequency_axes[axis]
            nyq = ax.min()
            if nyq < 0 and -nyq not in ax:
                values = np.where(grid.frequencies[axis] == nyq, fix, values)
        bad = ~np.isfinite(values)
        if np.any(bad):
            idx = tuple(int(i[0]) for i in np.nonzero(bad))
            xi = tuple(float(ax[i]) for ax, i in zip(grid.frequency_axes, idx))
            raise SymbolEvaluationError(
                f"symbol '{self.name}' is non-finite at xi={xi}"
            )
        return values

    def is_hermitian_on(self, grid: Grid, tol: float = 1e-12) -> bool:
        """True if symbol(-xi) == conj(symbol(xi)) on the lattice."""
        values = self.sample(grid)
        defect = np.max(np.abs(_reverse_modes(values) - np.conj(values)))
        scale = max(float(np.max(np.abs(values))), 1e-300)
        return bool(defect <= tol * scale)


def apply_multiplier(m: Multiplier, f: Field, imag_tol: float = 1e-10) -> Field:
    """Apply a Fourier multiplier to a real field.

    A plane wave ``exp(2*pi*i*k.x)`` is scaled by exactly ``symbol(k)``.
    For symbols with the Hermitian property the output is real; its
    imaginary residue is checked against ``imag_tol`` before being dropped.
    """
    spec = forward(f)
    sym = m.sample(f.grid)
    out = SpectralField(f.grid, sym * spec.coeffs)
    if not m.is_hermitian_on(f.grid):
        raise SymbolEvaluationError(
            f"symbol '{m.name}' lacks Hermitian symmetry; output is not real"
        )
    return inverse(out, imag_tol=imag_tol)


# ---------------------------------------------------------------------------
# Standard symbols
# ---------------------------------------------------------------------------

def _two_pi_norm_sq(freqs) -> np.ndarray:
    out = np.zeros(np.broadcast(*freqs).shape)
    for xi in freqs:
        out = out + (2.0 * np.pi * xi) ** 2
    return out


def fractional_laplacian_multiplier(alpha: float) -> Multiplier:
    """(-Laplace)^(alpha/2): symbol |2*pi*xi|^alpha, for 0 < alpha <= 2."""
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"fractional Laplacian needs alpha in (0, 2], got {alpha}")
    return Multiplier(
        symbol=lambda freqs: _two_pi_norm_sq(freqs) ** (alpha / 2.0),
        order=alpha,
        name=f"frac_laplacian[{alpha}]",
    )


def riesz_power_multiplier(r: float) -> Multiplier:
    """Homogeneous symbol |2*pi*xi|^r for r >= 0 (diagnostic use)."""
    if r < 0:
        raise ValueError(f"homogeneous power must be >= 0, got {r}")
    return Multiplier(
        symbol=lambda freqs: _two_pi_norm_sq(freqs) ** (r / 2.0),
        order=r,
        name=f"riesz_power[{r}]",
    )


def bessel_potential_multiplier(s: float) -> Multiplier:
    """J^s = (1 - Laplace)^(s/2): symbol (1 + |2*pi*xi|^2)^(s/2)."""
    return Multiplier(
        symbol=lambda freqs: (1.0 + _two_pi_norm_sq(freqs)) ** (s / 2.0),
        order=s,
        name=f"bessel_potential[{s}]",
    )


def partial_multiplier(beta: Sequence[int]) -> Multiplier:
    """d^beta for a multi-index beta: symbol prod (2*pi*i*xi_j)^beta_j.

    Odd-order factors zero the (unpaired) Nyquist mode of their axis when
    sampled on a lattice, the symmetric choice that keeps derivatives of
    real fields real.  Dealiased fields never populate that mode.
    """
    beta = tuple(int(b) for b in beta)
    if any(b < 0 for b in beta):
        raise ValueError("multi-index entries must be non-negative")

    def symbol(freqs):
        out = np.ones(np.broadcast(*freqs).shape, dtype=complex)
        for xi, b in zip(freqs, beta):
            if b:
                out = out * (2.0j * np.pi * xi) ** b
        return out

    fixes = tuple((axis, 0.0) for axis, b in enumerate(beta) if b % 2 == 1)
    return Multiplier(symbol=symbol, order=float(sum(beta)),
                      name=f"partial{beta}", nyquist_fix=fixes)


def fractional_laplacian(f: Field, alpha: float) -> Field:
    return apply_multiplier(fractional_laplacian_multiplier(alpha), f)


def bessel_potential(f: Field, s: float) -> Field:
    return apply_multiplier(bessel_potential_multiplier(s), f)


def partial(f: Field, beta: Sequence[int]) -> Field:
    return apply_multiplier(partial_multiplier(beta), f)


# ---------------------------------------------------------------------------
# Dealiased products
# ---------------------------------------------------------------------------

def dealias(f: Field) -> Field:
    """Sharp 2/3-rule truncation of a field's spectrum."""
    spec = forward(f)
    coeffs = np.where(f.grid.dealias_mask, spec.coeffs, 0.0)
    return inverse(SpectralField(f.grid, coeffs))


def dealiased_product(f: Field, g: Field) -> Field:
    """Pointwise product with 2/3-rule truncation of inputs and output.

    Exact (to roundoff) when both inputs are band-limited to the retained
    band, since aliased images of the product then fall outside it.
    """
    f.grid.require_same(g.grid)
    mask = f.grid.dealias_mask
    fh = np.where(mask, _fft.fftn(f.values, workers=fft_workers()), 0.0)
    gh = np.where(mask, _fft.fftn(g.values, workers=fft_workers()), 0.0)
    ftrunc = np.real(_fft.ifftn(fh, workers=fft_workers()))
    gtrunc = np.real(_fft.ifftn(gh, workers=fft_workers()))
    ph = _fft.fftn(ftrunc * gtrunc, workers=fft_workers())
    return inverse(SpectralField(f.grid, np.where(mask, ph, 0.0)))


# ---------------------------------------------------------------------------
# Field constructors
# ---------------------------------------------------------------------------

def plane_wave(grid: Grid, k: Sequence[int], kind: str = "cos") -> Field:
    """Real plane wave cos/sin(2*pi*k.x/L) for an integer mode vector k."""
    phase = np.zeros(grid.shape)
    for kj, x, L in zip(k, grid.coordinates, grid.lengths):
        phase += 2.0 * np.pi * kj * x / L
    vals = np.cos(phase) if kind == "cos" else np.sin(phase)
    return Field(grid, vals)


def complex_plane_wave(grid: Grid, k: Sequence[int]) -> np.ndarray:
    """exp(2*pi*i*k.x/L) sample array (complex; for eigenvalue tests)."""
    phase = np.zeros(grid.shape)
    for kj, x, L in zip(k, grid.coordinates, grid.lengths):
        phase += 2.0 * np.pi * kj * x / L
    return np.exp(1j * phase)


def random_field(grid: Grid, rng: np.random.Generator, smooth: float = 0.0) -> Field:
    """Random real field; ``smooth > 0`` applies a Gaussian spectral taper."""
    vals = rng.standard_normal(grid.shape)
    if smooth > 0:
        spec = _fft.fftn(vals)
        spec *= np.exp(-smooth * grid.wavenumber_norm**2)
        vals = np.real(_fft.ifftn(spec))
    return Field(grid, vals)


def band_limited_field(
    grid: Grid,
    rng: np.random.Generator,
    band: tuple,
    unit_norm: bool = True,
) -> Field:
    """Random real field supported on the annulus band[0] <= |xi| < band[1].

    The band is expressed in physical frequency units |xi| (cycles per
    unit length), matching the lattice xi = k / L.
    """
    lo, hi = band
    radius = grid.wavenumber_norm / (2.0 * np.pi)  # |xi|
    shell = (radius >= lo) & (radius < hi)
    if not np.any(shell):
        raise ValueError(f"no lattice frequencies in band [{lo}, {hi})")
    coeffs = np.zeros(grid.shape, dtype=complex)
    coeffs[shell] = rng.standard_normal(int(shell.sum())) + 1j * rng.standard_normal(
        int(shell.sum())
    )
    # symmetrize so the field is real
    coeffs = 0.5 * (coeffs + np.conj(_reverse_modes(coeffs)))
    vals = np.real(_fft.ifftn(coeffs))
    f = Field(grid, vals)
    if unit_norm:
        nrm = f.l2_norm()
        if nrm == 0:
            raise ValueError("degenerate band-limited sample")
        f = Field(grid, vals / nrm)
    return f
