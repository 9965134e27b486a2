"""Maximal functions over the nodes of a ScaleGrid.

The spherical maximal function and its ball representation run their sups
over the same nodes, so the identity between them is checked node by node.
The Hardy-Littlewood operator averages |f| with a positive lattice stencil
(cell-volume fractions of the ball), since the spectral ball multiplier is
not positivity preserving on non-band-limited input such as |f|.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from ._parallel import max_workers, pmap
from .averaging import KernelSpec, ScaleGrid, ball_mean, kernel_convolve, sphere_mean
from .field import ScalarField
from .spectral import gradient

__all__ = ["hl_maximal", "lattice_ball_mean", "spherical_maximal", "maximal_representation", "representation_nodes"]


def _node_max(grid, scales: ScaleGrid, fn) -> ScalarField:
    scales.check(grid)
    vals = pmap(lambda t: np.abs(fn(float(t)).values), scales.nodes)
    out = vals[0]
    for v in vals[1:]:
        out = np.maximum(out, v)
    return ScalarField(grid, out)


@lru_cache(maxsize=64)
def _ball_stencil_spectrum(grid, t: float, q: int = 8) -> np.ndarray:
    """FFT of the periodic stencil w_k = |cell_k ∩ B(0,t)| / sum, w >= 0."""
    h, n = grid.h, grid.n
    r = int(math.ceil(t / h + 0.5 * math.sqrt(n)))
    off = np.arange(-r, r + 1)
    sub = (np.arange(q) + 0.5) / q - 0.5
    # supersample every cell on a q^n sub-lattice
    pts = np.add.outer(off, sub) * h                      # (2r+1, q)
    inside = None
    for j in range(n):
        shp = [1] * (2 * n)
        shp[2 * j], shp[2 * j + 1] = pts.shape
        sq = (pts**2).reshape(shp)
        inside = sq if inside is None else inside + sq
    frac = (inside <= t * t).mean(axis=tuple(range(1, 2 * n, 2)))
    w = np.zeros(grid.shape)
    idx = np.ix_(*([off % grid.N] * n))
    w[idx] += frac
    w /= w.sum()
    return sfft.fftn(w)


def lattice_ball_mean(f: ScalarField, t: float) -> ScalarField:
    """Positive ball average: periodic convolution with the cell-fraction stencil."""
    m = _ball_stencil_spectrum(f.grid, float(t))
    w = max_workers()
    return ScalarField(f.grid, sfft.ifftn(sfft.fftn(f.values, workers=w) * m, workers=w).real)


def hl_maximal(f: ScalarField, scales: ScaleGrid) -> ScalarField:
    """max_j (|f|)_B(x, t_j) with the positive lattice ball average."""
    af = abs(f)
    return _node_max(f.grid, scales, lambda t: lattice_ball_mean(af, t))


def spherical_maximal(f: ScalarField, scales: ScaleGrid) -> ScalarField:
    """max_j |f_S(x, t_j)|."""
    return _node_max(f.grid, scales, lambda t: sphere_mean(f, t))


def representation_nodes(f: ScalarField, t: float, df=None) -> ScalarField:
    """f_B(x,t) - (1/n) avg_{B(x,t)} grad f(y).(x-y) dy = f_B - t (eta_t * grad f)."""
    df = gradient(f) if df is None else df
    return ball_mean(f, t) - kernel_convolve(KernelSpec("eta"), df, t) * t


def maximal_representation(f: ScalarField, scales: ScaleGrid) -> ScalarField:
    df = gradient(f)
    return _node_max(f.grid, scales, lambda t: representation_nodes(f, t, df))
