"""Sphere and ball means, the odd kernels phi, psi, eta, the Sato kernel zeta,
their dilations k_t(x) = t^-n k(x/t), and direct-quadrature oracles.

Sphere and ball means are radial Fourier multipliers of the normalized
surface and volume measures.  Kernel convolutions use the spectrum of the
sampled kernel, where every lattice sample is the exact average of the
continuum kernel over its cell.  Cell averages come from Gauss product rules
on interior cells, a chord-clipped rule on cells cut by the sphere |y| = t,
and a pyramid-to-face reduction on the singular origin cell.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft
from scipy import ndimage, special

from ._parallel import max_workers
from .field import GridSpec, ScalarField, VectorField
from .spectral import frequencies, reduced_frequencies, wavenumber

__all__ = [
    "ScaleGrid",
    "KernelSpec",
    "unit_ball_volume",
    "sphere_area",
    "sphere_nodes",
    "sphere_mean",
    "ball_mean",
    "sphere_multiplier",
    "ball_multiplier",
    "kernel_samples",
    "kernel_field",
    "kernel_spectrum",
    "kernel_convolve",
    "sphere_mean_direct",
    "ball_mean_direct",
    "omega_mean_zero",
    "MEAN_ZERO_TOL",
]

MEAN_ZERO_TOL = 1e-8


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def sphere_area(n: int) -> float:
    """Surface measure n*omega_n of the unit sphere S^(n-1)."""
    return n * unit_ball_volume(n)


# ---------------------------------------------------------------------------
# scale grid

@dataclass(frozen=True)
class ScaleGrid:
    """Dyadic nodes t_j = t_min 2^(j/M), j = 0..J, with t_J <= t_max.

    Each node carries the midpoint weight ln2/M for the measure dt/t, so the
    rule covers [t_min 2^(-1/2M), t_J 2^(1/2M)].
    """

    t_min: float
    t_max: float
    M: int = 8

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("need at least one scale per octave")
        if not 0 < self.t_min <= self.t_max:
            raise ValueError("need 0 < t_min <= t_max")

    @property
    def nodes(self) -> np.ndarray:
        J = int(math.floor(self.M * math.log2(self.t_max / self.t_min) + 1e-9))
        return self.t_min * 2.0 ** (np.arange(J + 1) / self.M)

    @property
    def weight(self) -> float:
        return math.log(2) / self.M

    @property
    def weights(self) -> np.ndarray:
        return np.full(len(self.nodes), self.weight)

    @property
    def edges(self) -> tuple[float, float]:
        t = self.nodes
        half = 2.0 ** (0.5 / self.M)
        return float(t[0] / half), float(t[-1] * half)

    def refined(self, factor: int = 2) -> "ScaleGrid":
        return ScaleGrid(self.t_min, self.t_max, self.M * factor)

    def check(self, grid: GridSpec) -> None:
        if self.t_min < grid.h * (1 - 1e-9):
            raise ValueError(f"t_min={self.t_min} below the spacing h={grid.h}")
        if self.t_max > grid.L / 4 * (1 + 1e-9):
            raise ValueError(f"t_max={self.t_max} exceeds L/4={grid.L / 4}")

    @classmethod
    def for_grid(cls, grid: GridSpec, t_min: float | None = None,
                 t_max: float | None = None, M: int = 8) -> "ScaleGrid":
        sg = cls(grid.h if t_min is None else t_min,
                 grid.L / 4 if t_max is None else t_max, M)
        sg.check(grid)
        return sg

    @classmethod
    def covering(cls, a: float, b: float, M: int = 8) -> "ScaleGrid":
        """Grid whose midpoint cells tile [a, b] exactly.

        Nodes sit at cell centres a 2^((j+1/2)/M), so the integration range
        stays [a, b] under refinement of M.  M log2(b/a) should be an integer;
        otherwise the top edge falls short of b by less than one cell.
        """
        half = 2.0 ** (0.5 / M)
        return cls(a * half, b / half * (1 + 1e-12), M)


# ---------------------------------------------------------------------------
# sphere / ball means

def _check_radius(grid: GridSpec, t: float) -> None:
    if not grid.h * (1 - 1e-9) <= t <= grid.L / 4 * (1 + 1e-9):
        raise ValueError(f"radius {t} outside [h, L/4] = [{grid.h}, {grid.L / 4}]")


def sphere_multiplier(grid: GridSpec, t: float) -> np.ndarray:
    z = 2 * math.pi * t * wavenumber(grid)
    if grid.n == 1:
        return np.cos(z)
    if grid.n == 2:
        return special.j0(z)
    return np.sinc(z / math.pi)


def _ball_profile(n: int, z: np.ndarray) -> np.ndarray:
    if n == 1:
        return np.sinc(z / math.pi)
    small = z < 1e-3
    zs = np.where(small, 1.0, z)
    if n == 2:
        out = 2 * special.j1(zs) / zs
        series = 1 - z**2 / 8 + z**4 / 192
    else:
        out = 3 * (np.sin(zs) - zs * np.cos(zs)) / zs**3
        series = 1 - z**2 / 10 + z**4 / 280
    return np.where(small, series, out)


def ball_multiplier(grid: GridSpec, t: float) -> np.ndarray:
    return _ball_profile(grid.n, 2 * math.pi * t * wavenumber(grid))


def _apply_real(f: ScalarField, m: np.ndarray) -> ScalarField:
    w = max_workers()
    return ScalarField(f.grid, sfft.ifftn(sfft.fftn(f.values, workers=w) * m, workers=w).real)


def sphere_mean(f: ScalarField, t: float) -> ScalarField:
    """f_S(x,t): average of f over the sphere of radius t about each x."""
    _check_radius(f.grid, t)
    return _apply_real(f, sphere_multiplier(f.grid, t))


def ball_mean(f: ScalarField, t: float) -> ScalarField:
    """f_B(x,t): average of f over the ball of radius t about each x."""
    _check_radius(f.grid, t)
    return _apply_real(f, ball_multiplier(f.grid, t))


# ---------------------------------------------------------------------------
# kernels

Omega = Callable[[np.ndarray], np.ndarray]


def _as_columns(v: np.ndarray, P: int) -> np.ndarray:
    v = np.asarray(v, float)
    if v.ndim == 0:
        v = np.full(P, float(v))
    return v.reshape(P, -1)


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """One of phi, psi, eta (vector-valued) or zeta (Omega-valued).

    phi  = x/|x|^n / (n omega_n)        on |x| <= 1
    psi  = (x/|x|^n - x) / (n omega_n)  on |x| <= 1
    eta  = x / (n omega_n)              on |x| <= 1
    zeta = |x|^(-n+eps) Omega(x/|x|)    on |x| <= 1
    """

    kind: str
    eps: float | None = None
    omega: Omega | None = None

    def __post_init__(self):
        if self.kind not in ("phi", "psi", "eta", "zeta"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "zeta":
            if self.eps is None or not self.eps > 0:
                raise ValueError("zeta needs eps > 0")
            if self.omega is None:
                raise ValueError("zeta needs an angular function omega")

    def terms(self, n: int) -> list[tuple[float, Omega]]:
        """The kernel as a sum of |x|^a G(x') pieces on the unit ball."""
        S = sphere_area(n)
        unit = lambda u: u / S  # noqa: E731
        neg = lambda u: -u / S  # noqa: E731
        if self.kind == "phi":
            return [(1.0 - n, unit)]
        if self.kind == "eta":
            return [(1.0, unit)]
        if self.kind == "psi":
            return [(1.0 - n, unit), (1.0, neg)]
        return [(-n + self.eps, self.omega)]

    def components(self, n: int) -> int:
        if self.kind != "zeta":
            return n
        return _as_columns(self.omega(np.eye(n)[:1]), 1).shape[1]

    def check_admissible(self, n: int) -> None:
        if self.kind == "zeta":
            m = np.max(np.abs(omega_mean_zero(self.omega, n)))
            if m > MEAN_ZERO_TOL:
                raise ValueError(
                    f"Omega fails the mean-zero condition: |integral| = {m:.3g}")


def _gauss01(q: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * x, 0.5 * w


def _product_rule(n: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss product rule on the unit cell [-1/2, 1/2]^n, weights sum to 1."""
    x, w = _gauss01(q)
    pts = np.stack(np.meshgrid(*([x] * n), indexing="ij"), -1).reshape(-1, n)
    wts = np.prod(np.stack(np.meshgrid(*([w] * n), indexing="ij"), -1).reshape(-1, n), axis=1)
    return pts, wts


def _evaluate(terms, n: int, t: float, y: np.ndarray) -> np.ndarray:
    """Dilated kernel k_t at points y (..., n); all points must be nonzero."""
    shp = y.shape[:-1]
    y = y.reshape(-1, n)
    r = np.sqrt((y**2).sum(-1))
    u = y / r[:, None]
    out = 0.0
    for a, G in terms:
        out = out + (t ** (-n - a) * r**a)[:, None] * _as_columns(G(u), len(r))
    return out.reshape(*shp, -1)


# Cell integrators return (C, 1+n, k): the cell average of k_t and its first
# moments (1/h^n) int_cell k_t(y) (y - y_c) dy along each axis.

def _origin_cell(terms, n: int, t: float, h: float, q: int = 24) -> np.ndarray:
    """Average and first moments of k_t over the cell [-h/2, h/2]^n.

    The cell is the union of 2n pyramids with apex at the origin, so
    int_cell |x|^a G(x') dx = (h/2)/(a+n) * sum_faces int_face |p|^a G(p') dA.
    """
    if n == 1:
        face_pts, face_w = np.zeros((1, 0)), np.array([1.0])
    else:
        face_pts, face_w = _product_rule(n - 1, q)
        face_pts = face_pts * h
        face_w = face_w * h ** (n - 1)
    total = 0.0
    for axis in range(n):
        others = [j for j in range(n) if j != axis]
        for sgn in (-1.0, 1.0):
            p = np.zeros((len(face_w), n))
            p[:, others] = face_pts
            p[:, axis] = sgn * h / 2
            r = np.sqrt((p**2).sum(-1))
            u = p / r[:, None]
            for a, G in terms:
                g = _as_columns(G(u), len(r))
                avg = (h / 2) / (a + n) * np.einsum("p,pk->k", face_w * r**a, g)
                mom = (h / 2) / (a + 1 + n) * np.einsum("p,pj,pk->jk", face_w * r ** (a + 1), u, g)
                total = total + t ** (-n - a) * np.concatenate([avg[None], mom])
    return np.asarray(total)[None] / h**n


def _interior_cells(terms, n, t, h, centers, q):
    pts, wts = _product_rule(n, q)
    d = h * pts
    out = []
    for chunk in np.array_split(centers, max(1, len(centers) * len(wts) // 400_000 + 1)):
        vals = _evaluate(terms, n, t, chunk[:, None, :] + d[None])
        avg = np.einsum("cqk,q->ck", vals, wts)
        mom = np.einsum("cqk,qj,q->cjk", vals, d, wts)
        out.append(np.concatenate([avg[:, None], mom], axis=1))
    return np.concatenate(out)


def _cut_cells(terms, n, t, h, centers, q_t=16, q_a=16):
    """Cells crossed by |y| = t: Gauss over the transverse coordinates, and
    along the dominant axis Gauss over the chord clipped to the cell."""
    xa, wa = _gauss01(q_a)
    axis_of = np.argmax(np.abs(centers), axis=1)
    result = None
    for axis in range(n):
        sel = np.nonzero(axis_of == axis)[0]
        if not len(sel):
            continue
        c = centers[sel]
        others = [j for j in range(n) if j != axis]
        if n > 1:
            tp, tw = _product_rule(n - 1, q_t)
        else:
            tp, tw = np.zeros((1, 0)), np.ones(1)
        yt = c[:, None, others] + h * tp[None, :, :]               # (C, T, n-1)
        half = np.sqrt(np.clip(t**2 - (yt**2).sum(-1), 0, None))  # chord half-length
        lo = np.maximum(c[:, axis, None] - h / 2, -half)
        hi = np.minimum(c[:, axis, None] + h / 2, half)
        length = np.clip(hi - lo, 0, None)                          # (C, T)
        ya = 0.5 * (lo + hi)[..., None] + length[..., None] * xa    # (C, T, A)
        y = np.empty(ya.shape + (n,))
        y[..., axis] = ya
        for k, j in enumerate(others):
            y[..., j] = yt[:, :, None, k]
        ok = (length > 0)[..., None, None]
        vals = _evaluate(terms, n, t, np.where(ok, y, 1.0)) * ok
        w = np.einsum("a,ct,t->cta", wa, length, tw) * h ** (n - 1) / h**n
        avg = np.einsum("ctak,cta->ck", vals, w)
        mom = np.einsum("ctak,ctaj,cta->cjk", vals, y - c[:, None, None, :], w)
        block = np.concatenate([avg[:, None], mom], axis=1)
        if result is None:
            result = np.zeros((len(centers),) + block.shape[1:])
        result[sel] = block
    return result


def _sample_kernel(grid: GridSpec, spec: KernelSpec, t: float) -> np.ndarray:
    """Cell averages and first moments, shape (1+n, k) + grid.shape, origin at N/2."""
    n, h = grid.n, grid.h
    terms = spec.terms(n)
    rc = int(math.ceil(t / h + math.sqrt(n) / 2)) + 1
    if rc >= grid.N // 2:
        raise ValueError("kernel support does not fit in the box")
    rng = np.arange(-rc, rc + 1)
    K = np.stack(np.meshgrid(*([rng] * n), indexing="ij"), -1).reshape(-1, n)
    c = K * h
    dmin = np.sqrt((np.clip(np.abs(c) - h / 2, 0, None) ** 2).sum(-1))
    dmax = np.sqrt(((np.abs(c) + h / 2) ** 2).sum(-1))
    origin = np.all(K == 0, axis=1)
    inside = (dmax <= t) & ~origin
    cut = (dmin < t) & (dmax > t) & ~origin
    kmax = np.abs(K).max(axis=1)

    vals = np.zeros((len(K), 1 + n, spec.components(n)))
    for lo, hi, q in ((1, 1, 16), (2, 3, 8), (4, rc + 1, 4)):
        sel = inside & (kmax >= lo) & (kmax <= hi)
        if sel.any():
            vals[sel] = _interior_cells(terms, n, t, h, c[sel], q)
    if cut.any():
        vals[cut] = _cut_cells(terms, n, t, h, c[cut])
    vals[origin] = _origin_cell(terms, n, t, h)

    out = np.zeros(vals.shape[1:] + grid.shape)
    idx = tuple(K[:, j] + grid.N // 2 for j in range(n))
    for m in range(1 + n):
        for k in range(vals.shape[2]):
            out[(m, k) + idx] = vals[:, m, k]
    return out


def _box_symbol(grid: GridSpec) -> np.ndarray:
    out = 1.0
    for xi in frequencies(grid):
        out = out * np.sinc(grid.h * xi)
    return np.broadcast_to(out, grid.shape)


_cache_lock = threading.Lock()


@lru_cache(maxsize=48)
def _kernel_spectrum(grid: GridSpec, spec: KernelSpec, t: float) -> np.ndarray:
    """Spectrum acting on point samples of the integrand.

    Within cell k the integrand is expanded about y_k: cell averages pair
    with v, first moments with -grad v, and the second-order term
    (h^2/24) Lap v is carried by the box symbol prod sinc(h xi_j).  The
    remaining error is O(h^4) for smooth integrands.
    """
    n = grid.n
    data = _sample_kernel(grid, spec, t)
    axes = tuple(range(2, n + 2))
    hat = sfft.fftn(np.fft.ifftshift(data, axes=axes), axes=axes,
                    workers=max_workers()) * grid.cell_volume
    xi = reduced_frequencies(grid)
    eff = hat[0] - sum(2j * math.pi * xi[j] * hat[1 + j] for j in range(n))
    return eff * _box_symbol(grid)


def _spectrum(grid: GridSpec, spec: KernelSpec, t: float) -> np.ndarray:
    with _cache_lock:
        return _kernel_spectrum(grid, spec, float(t))


def kernel_samples(grid: GridSpec, spec: KernelSpec, t: float) -> np.ndarray:
    """Cell-averaged samples of k_t, shape (components,) + grid.shape, origin-centered."""
    _check_radius(grid, t)
    spec.check_admissible(grid.n)
    return _sample_kernel(grid, spec, t)[0]


def kernel_field(grid: GridSpec, spec: KernelSpec, t: float) -> VectorField:
    return VectorField.from_array(grid, kernel_samples(grid, spec, t))


def kernel_spectrum(grid: GridSpec, spec: KernelSpec, t: float) -> np.ndarray:
    """Effective transform of k_t on the dual lattice (FFT order), per component."""
    _check_radius(grid, t)
    spec.check_admissible(grid.n)
    return _spectrum(grid, spec, t).copy()


def kernel_convolve(spec: KernelSpec, v, t: float, method: str = "spectral") -> ScalarField:
    """(k_t * v)(x) = int k_t(y) . v(x - y) dy.

    ``v`` is a VectorField matched to the kernel's components (scalar product
    integrand) or a ScalarField for single-component kernels.  ``method`` is
    ``"spectral"`` (cached kernel spectrum) or ``"direct"`` (spatial sum over
    the cells meeting |y| <= t).
    """
    comps = [v] if isinstance(v, ScalarField) else list(v)
    grid = comps[0].grid
    _check_radius(grid, t)
    spec.check_admissible(grid.n)
    if spec.components(grid.n) != len(comps):
        raise ValueError("kernel and field component counts differ")
    if method == "direct":
        return _direct_convolve(_sample_kernel(grid, spec, t), comps)
    if method != "spectral":
        raise ValueError(f"unknown method {method!r}")
    kh = _spectrum(grid, spec, t)
    w = max_workers()
    acc = sum(kh[j] * sfft.fftn(c.values, workers=w) for j, c in enumerate(comps))
    return ScalarField(grid, sfft.ifftn(acc, workers=w).real)


def _direct_convolve(data: np.ndarray, comps: list[ScalarField]) -> ScalarField:
    """Spatial sum with the same cell data as the spectral path.

    Derivatives are fourth-order central differences, and the box correction
    is v + (h^2/24) sum_j d_j^2 v.  Both match the spectral path to O(h^4).
    """
    grid = comps[0].grid
    n, h, o = grid.n, grid.h, grid.N // 2
    ax = tuple(range(n))

    def d1(a, j):
        return (8 * (np.roll(a, -1, j) - np.roll(a, 1, j))
                - (np.roll(a, -2, j) - np.roll(a, 2, j))) / (12 * h)

    def corrected(a):
        lap = sum(np.roll(a, -1, j) - 2 * a + np.roll(a, 1, j) for j in ax)
        return a + lap / 24

    fields = []
    for c in comps:
        a = corrected(c.values)
        fields.append([a] + [d1(a, j) for j in ax])
    out = np.zeros(grid.shape)
    nz = np.argwhere(np.any(data != 0, axis=(0, 1)))
    for idx in nz:
        shift = tuple(int(i) - o for i in idx)
        w = data[(slice(None), slice(None)) + tuple(idx)]   # (1+n, k)
        acc = 0.0
        for k, fk in enumerate(fields):
            acc = acc + w[0, k] * fk[0] - sum(w[1 + j, k] * fk[1 + j] for j in ax)
        out += np.roll(acc, shift, axis=ax)
    return ScalarField(grid, out * grid.cell_volume)


# ---------------------------------------------------------------------------
# quadrature oracles

def sphere_nodes(n: int, m: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Directions on S^(n-1) and weights summing to n*omega_n.

    n=1: the two points +-1; n=2: m equispaced angles; n=3: m/2 Gauss-Legendre
    latitudes times m equispaced longitudes.
    """
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        th = 2 * math.pi * (np.arange(m) + 0.5) / m
        return np.stack([np.cos(th), np.sin(th)], -1), np.full(m, 2 * math.pi / m)
    z, wz = np.polynomial.legendre.leggauss(max(m // 2, 1))
    ph = 2 * math.pi * (np.arange(m) + 0.5) / m
    Z, P = np.meshgrid(z, ph, indexing="ij")
    s = np.sqrt(1 - Z**2)
    dirs = np.stack([s * np.cos(P), s * np.sin(P), Z], -1).reshape(-1, 3)
    wts = np.repeat(wz, m) * (2 * math.pi / m)
    return dirs, wts


def omega_mean_zero(omega: Omega, n: int, m: int = 256):
    """Quadrature of Omega over S^(n-1) with surface measure."""
    dirs, w = sphere_nodes(n, m)
    vals = _as_columns(omega(dirs), len(w))
    out = (w[:, None] * vals).sum(0)
    return float(out[0]) if out.size == 1 else out


def _interp(f: ScalarField, pts: np.ndarray, order: int) -> np.ndarray:
    g = f.grid
    coords = ((pts + g.L / 2) / g.h).T
    return ndimage.map_coordinates(f.values, coords, order=order, mode="grid-wrap")


def _check_point(grid: GridSpec, x: np.ndarray, t: float) -> None:
    if x.shape != (grid.n,):
        raise ValueError("evaluation point has the wrong dimension")
    if t < 0 or np.any(np.abs(x) + t > grid.L / 2):
        raise ValueError("sphere/ball leaves the box")


def sphere_mean_direct(f: ScalarField, x: Sequence[float], t: float,
                       nodes: int = 64, order: int = 3) -> float:
    """Sphere average at one point by angular quadrature of the
    spline-interpolated field."""
    x = np.atleast_1d(np.asarray(x, float))
    _check_point(f.grid, x, t)
    dirs, w = sphere_nodes(f.grid.n, nodes)
    vals = _interp(f, x + t * dirs, order)
    return float((w * vals).sum() / w.sum())


def ball_mean_direct(f: ScalarField, x: Sequence[float], t: float,
                     nodes: int = 64, radial: int = 256, order: int = 3) -> float:
    """Ball average at one point: midpoint rule in r, sphere rule in angle."""
    x = np.atleast_1d(np.asarray(x, float))
    _check_point(f.grid, x, t)
    n = f.grid.n
    dirs, w = sphere_nodes(n, nodes)
    r = (np.arange(radial) + 0.5) * t / radial
    pts = x + r[:, None, None] * dirs[None, :, :]
    vals = _interp(f, pts.reshape(-1, n), order).reshape(radial, -1)
    shell = (vals * w).sum(1) / w.sum()
    return float(n / t**n * np.sum(r ** (n - 1) * shell) * (t / radial))
