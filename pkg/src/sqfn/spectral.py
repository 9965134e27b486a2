"""Discrete Fourier analysis on the periodic box.

The continuum transform ``f^(xi) = int exp(-2 pi i x.xi) f(x) dx`` is mirrored
by ``h^n * DFT`` of the samples with the origin moved to index 0, so the dual
lattice is ``xi in (1/L) * {-N/2, ..., N/2 - 1}^n`` (stored in FFT order).

Odd first-order multipliers (gradient, Riesz transform, half-Laplacian) use the
wavevector with Nyquist components zeroed.  With that convention the identities
``R . grad f = (-Lap)^(1/2) f`` and ``R (-Lap)^(1/2) f = -grad f`` hold to
roundoff for every lattice field, and the gradient of a real field is real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft as sfft
from scipy import ndimage

from ._parallel import max_workers
from .field import GridSpec, ScalarField, VectorField

__all__ = [
    "Spectrum",
    "RadialProfile",
    "frequencies",
    "wavenumber",
    "reduced_frequencies",
    "transform",
    "inverse_transform",
    "apply_multiplier",
    "riesz",
    "half_laplacian",
    "gradient",
    "divergence",
    "mollify",
    "mollifier_weights",
    "radial_profile",
    "profile_from_coefficients",
]


@dataclass(frozen=True, eq=False)
class Spectrum:
    grid: GridSpec
    coefficients: np.ndarray  # FFT order

    def at(self, mode: Sequence[int]) -> complex:
        """Coefficient at xi = mode / L."""
        idx = tuple(int(m) % self.grid.N for m in mode)
        return complex(self.coefficients[idx])


@dataclass(frozen=True)
class RadialProfile:
    k: np.ndarray          # bin centers, units 1/length
    values: np.ndarray     # h(k_m)
    counts: np.ndarray     # dual points per bin
    residual: float        # rho: transverse / real-part residual relative to max|h|


def frequencies(grid: GridSpec) -> list[np.ndarray]:
    """Open-mesh frequency arrays xi_j in FFT order."""
    xi = sfft.fftfreq(grid.N, d=grid.h)
    out = []
    for j in range(grid.n):
        shp = [1] * grid.n
        shp[j] = grid.N
        out.append(xi.reshape(shp))
    return out


def reduced_frequencies(grid: GridSpec) -> list[np.ndarray]:
    out = []
    for xi in frequencies(grid):
        xi = xi.copy()
        xi[np.abs(xi) * grid.L >= grid.N / 2] = 0.0
        out.append(xi)
    return out


def wavenumber(grid: GridSpec) -> np.ndarray:
    """|xi| on the full dual lattice."""
    return np.sqrt(np.broadcast_to(sum(x**2 for x in frequencies(grid)), grid.shape))


def _fft(a, axes=None):
    return sfft.fftn(a, axes=axes, workers=max_workers())


def _ifft(a, axes=None):
    return sfft.ifftn(a, axes=axes, workers=max_workers())


def _spatial_axes(grid: GridSpec, arr: np.ndarray) -> tuple[int, ...]:
    return tuple(range(arr.ndim - grid.n, arr.ndim))


def transform(f: ScalarField) -> Spectrum:
    g = f.grid
    c = _fft(np.fft.ifftshift(f.values)) * g.cell_volume
    return Spectrum(g, c)


def inverse_transform(s: Spectrum) -> ScalarField:
    g = s.grid
    v = np.fft.fftshift(_ifft(s.coefficients)) / g.cell_volume
    return ScalarField(g, v.real)


def _mirror(grid: GridSpec, m: np.ndarray) -> np.ndarray:
    """m(-xi) in FFT order."""
    axes = _spatial_axes(grid, m)
    return np.roll(np.flip(m, axis=axes), 1, axis=axes)


def _as_multiplier(grid: GridSpec, m) -> np.ndarray:
    if callable(m):
        m = m(frequencies(grid))
    if isinstance(m, (list, tuple)):
        m = np.stack([np.broadcast_to(np.asarray(c), grid.shape) for c in m])
    m = np.asarray(m)
    if m.ndim == 0 or m.shape[-grid.n:] != grid.shape:
        m = np.broadcast_to(m, m.shape[: max(m.ndim - grid.n, 0)] + grid.shape)
    return m


def apply_multiplier(f: ScalarField, m, real: bool = True):
    """Multiply the spectrum of ``f`` by ``m`` and transform back.

    ``m`` is an array on the dual lattice (FFT order), a list of such arrays
    (vector output), or a callable receiving the open-mesh frequencies.  With
    ``real=True`` the multiplier must satisfy m(-xi) = conj(m(xi)).
    """
    g = f.grid
    m = _as_multiplier(g, m)
    if real:
        scale = float(np.abs(m).max()) if m.size else 0.0
        if scale > 0 and np.abs(_mirror(g, m) - np.conj(m)).max() > 1e-12 * scale:
            raise ValueError("multiplier is not Hermitian; result would be complex")
    fh = _fft(f.values)
    out = _ifft(m * fh, axes=_spatial_axes(g, m))
    if real:
        out = out.real
    if m.ndim == g.n:
        return ScalarField(g, out) if real else out
    if not real:
        return out
    return VectorField.from_array(g, out)


def riesz(g: ScalarField) -> VectorField:
    """Riesz transform, multiplier -i xi_j/|xi| (zero at xi = 0)."""
    xi = reduced_frequencies(g.grid)
    mod = np.sqrt(sum(x**2 for x in xi))
    inv = np.divide(1.0, mod, out=np.zeros_like(mod), where=mod > 0)
    return apply_multiplier(g, [-1j * x * inv for x in xi])


def half_laplacian(f: ScalarField) -> ScalarField:
    """(-Lap)^(1/2), multiplier 2 pi |xi|."""
    xi = reduced_frequencies(f.grid)
    return apply_multiplier(f, 2 * math.pi * np.sqrt(sum(x**2 for x in xi)))


def gradient(f: ScalarField) -> VectorField:
    xi = reduced_frequencies(f.grid)
    return apply_multiplier(f, [2j * math.pi * x for x in xi])


def divergence(v: VectorField) -> ScalarField:
    xi = reduced_frequencies(v.grid)
    total = sum(_fft(c.values) * (2j * math.pi * x) for c, x in zip(v, xi))
    return ScalarField(v.grid, _ifft(total).real)


def mollifier_weights(grid: GridSpec, eps: float) -> np.ndarray:
    """Stencil of the sampled bump phi_eps, normalized so sum * h^n = 1."""
    if eps < 2 * grid.h * (1 - 1e-12):
        raise ValueError(f"mollifier radius {eps} below 2h = {2 * grid.h}")
    r = int(math.ceil(eps / grid.h))
    off = np.arange(-r, r + 1) * grid.h
    mesh = np.meshgrid(*([off] * grid.n), indexing="ij", sparse=True)
    s = np.sqrt(sum(x**2 for x in mesh)) / eps
    w = np.zeros(np.broadcast_shapes(*(x.shape for x in mesh)))
    inside = s < 1
    w[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return w / (w.sum() * grid.cell_volume)


def mollify(f: ScalarField, eps: float) -> ScalarField:
    """Convolution with the unit-mass bump of radius ``eps``.

    Evaluated as a direct periodic stencil sum, so nonnegative input gives
    nonnegative output exactly.
    """
    w = mollifier_weights(f.grid, eps) * f.grid.cell_volume
    return ScalarField(f.grid, ndimage.convolve(f.values, w, mode="wrap"))


def radial_profile(k: VectorField, kmax: float | None = None) -> RadialProfile:
    """Radial profile h of an odd kernel with transform i xi/|xi| h(|xi|).

    Coefficient vectors are projected onto i xi/|xi| and averaged in bins of
    width 1/L centered on m/L.  The lowest bin reports the magnitude of the
    zero-frequency coefficient.  ``residual`` is the largest deviation from the
    i xi/|xi| h form, relative to max |h|, over |xi| <= kmax (default N/(2L)).
    """
    g = k.grid
    if len(k) != g.n:
        raise ValueError("kernel must have one component per dimension")
    arr = k.stack()
    mirror = np.roll(np.flip(arr, axis=tuple(range(1, g.n + 1))), 1,
                     axis=tuple(range(1, g.n + 1)))
    scale = float(np.abs(arr).max())
    if scale == 0:
        raise ValueError("kernel vanishes identically")
    if np.abs(arr + mirror).max() > 1e-12 * scale:
        raise ValueError("kernel is not odd on the lattice")

    c = _fft(np.fft.ifftshift(arr, axes=tuple(range(1, g.n + 1))),
             axes=tuple(range(1, g.n + 1))) * g.cell_volume
    return profile_from_coefficients(g, c, kmax)


def profile_from_coefficients(g: GridSpec, c: np.ndarray, kmax: float | None = None) -> RadialProfile:
    """Radial profile of vector coefficients c (FFT order, shape (n,) + grid.shape)."""
    xi = [np.broadcast_to(x, g.shape) for x in frequencies(g)]
    mod = np.sqrt(sum(x**2 for x in xi))
    safe = np.where(mod > 0, mod, 1.0)
    unit = [x / safe for x in xi]
    h = sum(u * cj.imag for u, cj in zip(unit, c))
    resid = np.sqrt(sum(np.abs(cj - 1j * u * h) ** 2 for u, cj in zip(unit, c)))

    kcut = g.N / (2 * g.L) if kmax is None else kmax
    nbins = int(math.floor(kcut * g.L + 0.5)) + 1
    bins = np.rint(mod * g.L).astype(int)
    inside = (bins < nbins) & (mod <= kcut + 1e-12 / g.h)
    sums = np.bincount(bins[inside], weights=h[inside], minlength=nbins)
    counts = np.bincount(bins[inside], minlength=nbins)
    vals = np.divide(sums, counts, out=np.zeros(nbins), where=counts > 0)
    vals[0] = float(np.sqrt(sum(np.abs(cj[(0,) * g.n]) ** 2 for cj in c)))
    hmax = float(np.abs(vals).max())
    sel = inside & (mod > 0)
    rho = float(resid[sel].max() / hmax) if hmax > 0 and sel.any() else 0.0
    return RadialProfile(np.arange(nbins) / g.L, vals, counts, rho)
