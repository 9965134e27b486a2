"""Square functions as scale quadratures.

Every operator here has the form

    Kf(x) = ( int_0^inf |g_t(x)|^2 dt/t )^(1/2)

for a family g_t built from sphere/ball means or kernel convolutions.  dt/t^3
forms are rewritten with the 1/t folded into g_t, so one rule (ScaleGrid
nodes, weight ln2/M) serves all of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.fft as sfft

from ._parallel import max_workers, pmap
from .averaging import (KernelSpec, ScaleGrid, ball_mean, kernel_convolve,
                        sphere_mean, sphere_nodes)
from .field import ScalarField
from .spectral import frequencies, gradient, riesz

__all__ = [
    "ScaleFamily",
    "scale_integrate",
    "family_T", "family_S", "family_W", "family_T_tilde", "family_S_tilde",
    "family_mu", "family_sigma", "family_T_1d", "family_D",
    "square_T", "square_S", "square_W", "square_T_tilde", "square_S_tilde",
    "mu_omega", "sato_sigma", "square_T_1d", "square_D_fullspace",
    "OPERATORS",
]


@dataclass(frozen=True, eq=False)
class ScaleFamily:
    """One field g_{t_j} per node of ``scales``."""

    scales: ScaleGrid
    fields: tuple

    def __post_init__(self):
        fields = tuple(self.fields)
        object.__setattr__(self, "fields", fields)
        if not fields:
            raise ValueError("empty scale family")
        if len(fields) != len(self.scales.nodes):
            raise ValueError(f"{len(fields)} fields for {len(self.scales.nodes)} nodes")
        g = fields[0].grid
        if any(f.grid != g for f in fields):
            raise ValueError("family members live on different grids")

    @property
    def grid(self):
        return self.fields[0].grid

    def __len__(self):
        return len(self.fields)

    def __iter__(self):
        return iter(self.fields)

    def __getitem__(self, j) -> ScalarField:
        return self.fields[j]

    def array(self) -> np.ndarray:
        return np.stack([f.values for f in self.fields])


def scale_integrate(fam: ScaleFamily, tails: bool = False, limit=None,
                    decay: float | None = None) -> ScalarField:
    """(sum_j w_j g_j(x)^2)^(1/2), summed in node order.

    With ``tails=True`` the ranges outside the rule's edges [a, b] are
    closed with models of g_t:

    * below a, g_t = g_0 t/t_0, adding g_0^2 a^2/(2 t_0^2);
    * above b, without ``limit``, g_t = g_J t_J/t, adding g_J^2 t_J^2/(2 b^2);
    * above b, with ``limit`` = f, the family is a mean deviation
      t g_t = f - M(t) whose mean decays like M(t) = M_J (t_J/t)^k, k = ``decay``
      (default n), and int_b^inf (f - c t^-k)^2 dt/t^3 is added in closed form.
    """
    sc = fam.scales
    w = sc.weight
    acc = np.zeros(fam.grid.shape)
    for g in fam.fields:
        acc += w * g.values**2
    if tails:
        t = sc.nodes
        a, b = sc.edges
        acc += fam.fields[0].values ** 2 * a**2 / (2 * t[0] ** 2)
        gJ = fam.fields[-1].values
        if limit is None:
            acc += gJ**2 * t[-1] ** 2 / (2 * b**2)
        else:
            f = limit.values
            k = fam.grid.n if decay is None else decay
            c = (f - t[-1] * gJ) * t[-1] ** k
            acc += (f**2 / (2 * b**2) - 2 * f * c / ((k + 2) * b ** (k + 2))
                    + c**2 / ((2 * k + 2) * b ** (2 * k + 2)))
            np.maximum(acc, 0.0, out=acc)
    return ScalarField(fam.grid, np.sqrt(acc))


def _build(scales: ScaleGrid, grid, fn: Callable[[float], ScalarField]) -> ScaleFamily:
    scales.check(grid)
    return ScaleFamily(scales, tuple(pmap(fn, [float(t) for t in scales.nodes])))


PHI, PSI, ETA = KernelSpec("phi"), KernelSpec("psi"), KernelSpec("eta")


# -- families ----------------------------------------------------------------

def family_T(f: ScalarField, scales: ScaleGrid, method: str = "mean") -> ScaleFamily:
    """g_t = (f - f_S(.,t))/t, or phi_t * grad f with method='kernel'."""
    if method == "mean":
        return _build(scales, f.grid, lambda t: (f - sphere_mean(f, t)) / t)
    if method == "kernel":
        df = gradient(f)
        return _build(scales, f.grid, lambda t: kernel_convolve(PHI, df, t))
    raise ValueError(f"unknown method {method!r}")


def family_S(f: ScalarField, scales: ScaleGrid, method: str = "mean") -> ScaleFamily:
    """g_t = (f - f_B(.,t))/t, or psi_t * grad f with method='kernel'."""
    if method == "mean":
        return _build(scales, f.grid, lambda t: (f - ball_mean(f, t)) / t)
    if method == "kernel":
        df = gradient(f)
        return _build(scales, f.grid, lambda t: kernel_convolve(PSI, df, t))
    raise ValueError(f"unknown method {method!r}")


def family_W(f: ScalarField, scales: ScaleGrid) -> ScaleFamily:
    df = gradient(f)
    return _build(scales, f.grid, lambda t: kernel_convolve(ETA, df, t))


def family_T_tilde(g: ScalarField, scales: ScaleGrid) -> ScaleFamily:
    rg = riesz(g)
    return _build(scales, g.grid, lambda t: kernel_convolve(PHI, rg, t))


def family_S_tilde(g: ScalarField, scales: ScaleGrid) -> ScaleFamily:
    rg = riesz(g)
    return _build(scales, g.grid, lambda t: kernel_convolve(PSI, rg, t))


def family_sigma(omega, eps: float, f, scales: ScaleGrid) -> ScaleFamily:
    """g_t = zeta_t * f with zeta = |x|^(-n+eps) Omega(x') on the unit ball."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    k = KernelSpec("zeta", eps=float(eps), omega=omega)
    grid = f.grid
    k.check_admissible(grid.n)
    return _build(scales, grid, lambda t: kernel_convolve(k, f, t))


def family_mu(omega, f, scales: ScaleGrid) -> ScaleFamily:
    """Marcinkiewicz family.

    int_{|y|<=t} Omega(y')|y|^(1-n) f(x-y) dy = t (zeta_t * f)(x) with eps = 1,
    so the dt/t^3 integrand becomes |zeta_t * f|^2 dt/t.  ``f`` may be a
    VectorField when Omega returns vectors (scalar product integrand).
    """
    return family_sigma(omega, 1.0, f, scales)


def _shift_pair(f: ScalarField, y: np.ndarray) -> np.ndarray:
    """f(x+y) + f(x-y) by exact band-limited translation."""
    g = f.grid
    phase = 2 * math.pi * sum(x * yj for x, yj in zip(frequencies(g), y))
    w = max_workers()
    return sfft.ifftn(2 * np.cos(phase) * sfft.fftn(f.values, workers=w), workers=w).real


def family_T_1d(f: ScalarField, scales: ScaleGrid) -> ScaleFamily:
    """g_t = (f(x+t) + f(x-t) - 2f(x))/t, n = 1 only."""
    if f.grid.n != 1:
        raise ValueError("the second-difference form is one-dimensional")
    return _build(scales, f.grid,
                  lambda t: ScalarField(f.grid, (_shift_pair(f, [t]) - 2 * f.values) / t))


def family_D(f: ScalarField, scales: ScaleGrid, nodes: int = 64) -> ScaleFamily:
    """g_t = (int_S |f(x+t th) + f(x-t th) - 2f(x)|^2 dsigma(th))^(1/2) / t.

    Polar coordinates turn int |D_y^2 f|^2 |y|^(-n-2) dy into
    int_0^inf (sphere integral of squared second differences) t^-2 dt/t.
    Antipodal directions give the same difference, so only half the sphere
    is visited and its weight doubled.
    """
    dirs, w = sphere_nodes(f.grid.n, nodes)
    keep = _half_sphere(dirs)
    dirs, w = dirs[keep], 2 * w[keep]

    def node(t):
        acc = np.zeros(f.grid.shape)
        for d, wd in zip(dirs, w):
            acc += wd * (_shift_pair(f, t * d) - 2 * f.values) ** 2
        return ScalarField(f.grid, np.sqrt(acc) / t)

    return _build(scales, f.grid, node)


def _half_sphere(dirs: np.ndarray) -> np.ndarray:
    """Select one of each antipodal pair (first nonzero coordinate positive)."""
    keep = np.zeros(len(dirs), bool)
    for i, d in enumerate(dirs):
        nz = np.nonzero(np.abs(d) > 1e-14)[0]
        keep[i] = d[nz[-1]] > 0 if len(nz) else False
    return keep


# -- square functions ----------------------------------------------------------

def square_T(f, scales, method="mean", tails=False) -> ScalarField:
    """Tf(x) = (int |f(x) - f_S(x,t)|^2 dt/t^3)^(1/2)."""
    return scale_integrate(family_T(f, scales, method), tails, limit=f)


def square_S(f, scales, method="mean", tails=False) -> ScalarField:
    """Sf(x) = (int |f(x) - f_B(x,t)|^2 dt/t^3)^(1/2)."""
    return scale_integrate(family_S(f, scales, method), tails, limit=f)


def square_W(f, scales, tails=False) -> ScalarField:
    """Wf(x) = (int |eta_t * grad f(x)|^2 dt/t)^(1/2)."""
    return scale_integrate(family_W(f, scales), tails)


def square_T_tilde(g, scales, tails=False) -> ScalarField:
    return scale_integrate(family_T_tilde(g, scales), tails)


def square_S_tilde(g, scales, tails=False) -> ScalarField:
    return scale_integrate(family_S_tilde(g, scales), tails)


def mu_omega(omega, f, scales, tails=False) -> ScalarField:
    return scale_integrate(family_mu(omega, f, scales), tails)


def sato_sigma(omega, eps, f, scales, tails=False) -> ScalarField:
    return scale_integrate(family_sigma(omega, eps, f, scales), tails)


def square_T_1d(f, scales, tails=False) -> ScalarField:
    """(int |f(x+t) + f(x-t) - 2f(x)|^2 dt/t^3)^(1/2), n = 1."""
    return scale_integrate(family_T_1d(f, scales), tails)


def square_D_fullspace(f, scales, nodes=64, tails=False) -> ScalarField:
    """(int |f(x+y) + f(x-y) - 2f(x)|^2 / |y|^(n+2) dy)^(1/2)."""
    return scale_integrate(family_D(f, scales, nodes), tails)


OPERATORS = {
    "T": square_T,
    "S": square_S,
    "W": square_W,
    "Ttilde": square_T_tilde,
    "Stilde": square_S_tilde,
}
