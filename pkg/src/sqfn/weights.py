"""Power weights |x|^alpha, brute-force A_p constants, weighted L^p norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import pmap
from .field import GridSpec, ScalarField, VectorField, make_grid

__all__ = [
    "WeightSpec",
    "ApEstimate",
    "ap_constant",
    "ap_estimate",
    "ap_divergence_probe",
    "weighted_lp_norm",
    "dual_weight",
]


@dataclass(frozen=True)
class WeightSpec:
    """w(x) = max(|x|, h/2)^alpha on lattice points."""

    alpha: float

    def admissible(self, n: int, p: float) -> bool:
        """Power weights are A_p exactly for -n < alpha < n(p-1)."""
        return -n < self.alpha < n * (p - 1)

    def values(self, grid: GridSpec) -> np.ndarray:
        r = np.maximum(grid.radius(), grid.h / 2)
        if self.alpha == 0:
            return np.ones(grid.shape)
        return r**self.alpha

    def field(self, grid: GridSpec) -> ScalarField:
        return ScalarField(grid, self.values(grid))


def dual_weight(w: WeightSpec, p: float) -> WeightSpec:
    """w^(-q/p) = w^(-1/(p-1)), q = p/(p-1)."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    q = p / (p - 1)
    a = -w.alpha * q / p
    return WeightSpec(0.0 if a == 0 else a)


@dataclass(frozen=True)
class ApEstimate:
    value: float
    radii: tuple           # ball radii in units of h
    center_stride: int     # center lattice spacing in cells
    n_balls: int
    argmax: tuple          # (center index, radius in cells) of the worst ball


def _ball_offsets(n: int, rc: int) -> np.ndarray:
    rng = np.arange(-rc, rc + 1)
    K = np.stack(np.meshgrid(*([rng] * n), indexing="ij"), -1).reshape(-1, n)
    return K[(K**2).sum(1) <= rc * rc]


def ap_estimate(w: WeightSpec, p: float, grid: GridSpec,
                center_stride: int | None = None) -> ApEstimate:
    """sup over a ball family of (avg_B w)(avg_B w^(-1/(p-1)))^(p-1).

    Balls are lattice balls {x_k : |x_k - c| <= r} with r = 2h, 4h, ..., L/4
    and centers c on a lattice of stride ``center_stride`` cells through the
    origin, kept whole inside the box.  Averages are plain lattice sums.
    """
    if not p > 1:
        raise ValueError("p must exceed 1")
    n, N = grid.n, grid.N
    stride = center_stride or max(1, N // 32)
    wv = w.values(grid)
    dv = dual_weight(w, p).values(grid)
    o = N // 2
    radii = []
    r = 2
    while r <= N // 4:
        radii.append(r)
        r *= 2

    def one(rc):
        off = _ball_offsets(n, rc)
        span = np.arange(-((o - rc) // stride) * stride, o - rc, stride)
        span = span[(span - rc >= -o) & (span + rc <= N - 1 - o)]
        C = np.stack(np.meshgrid(*([span] * n), indexing="ij"), -1).reshape(-1, n) + o
        best, arg = -np.inf, None
        for chunk in np.array_split(C, max(1, len(C) * len(off) // 2_000_000 + 1)):
            idx = tuple((chunk[:, None, j] + off[None, :, j]) for j in range(n))
            a = wv[idx].mean(axis=1)
            b = dv[idx].mean(axis=1)
            val = a * b ** (p - 1)
            k = int(np.argmax(val))
            if val[k] > best:
                best, arg = float(val[k]), (tuple(int(i) for i in chunk[k]), rc)
        return best, arg, len(C)

    res = pmap(one, radii)
    k = int(np.argmax([v for v, _, _ in res]))
    return ApEstimate(res[k][0], tuple(radii), stride, sum(c for _, _, c in res), res[k][1])


def ap_constant(w: WeightSpec, p: float, grid: GridSpec,
                center_stride: int | None = None) -> float:
    return ap_estimate(w, p, grid, center_stride).value


def ap_divergence_probe(w: WeightSpec, p: float, n: int = 1, L: float = 1.0,
                        sizes=(64, 128, 256, 512, 1024), threshold: float = 1.5) -> dict:
    """A_p estimates under grid refinement.

    The ball family reaches closer to the origin as h shrinks.  For an A_p
    weight the estimates settle; a last-doubling growth factor above
    ``threshold`` flags the weight as outside A_p.
    """
    vals = [ap_constant(w, p, make_grid(n, N, L)) for N in sizes]
    growth = vals[-1] / vals[-2]
    return {"sizes": list(sizes), "values": vals, "growth": growth,
            "diverges": bool(growth > threshold)}


def weighted_lp_norm(f, w, p: float) -> float:
    """(sum |f|^p w h^n)^(1/p).  ``f`` may be a VectorField (pointwise norm);
    ``w`` a WeightSpec, a ScalarField, or None."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if isinstance(f, VectorField):
        f = f.magnitude()
    grid = f.grid
    if w is None:
        wv = 1.0
    elif isinstance(w, WeightSpec):
        wv = w.values(grid)
    else:
        wv = w.values
    a = np.abs(f.values)
    m = float(a.max())
    if m == 0.0:
        return 0.0
    s = float(np.sum((a / m) ** p * wv)) * grid.cell_volume
    return m * s ** (1.0 / p)
