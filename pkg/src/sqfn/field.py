"""Uniform periodic grids, sampled fields, a corpus of test functions, L^p norms.

The box ``[-L/2, L/2)^n`` stands in for R^n.  Lattice points are
``x_k = -L/2 + k*h`` with ``h = L/N``, so for even ``N`` the origin sits at
index ``N/2`` on every axis.  Values are stored as C-ordered ``(N,)*n`` arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import erfc

__all__ = [
    "GridSpec",
    "ScalarField",
    "VectorField",
    "make_grid",
    "sample",
    "lp_norm",
    "Gaussian",
    "Bump",
    "PlaneWave",
    "RandomBandlimited",
    "QuadraticWindow",
    "RampWindow",
    "parse_generator",
    "BOUNDARY_TOL",
]

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.n}")
        if self.N < 16 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two >= 16, got {self.N}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError(f"box length must be positive, got {self.L}")
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N**self.n

    @property
    def volume(self) -> float:
        return self.L**self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    @property
    def origin_index(self) -> tuple[int, ...]:
        return (self.N // 2,) * self.n

    def coords(self) -> np.ndarray:
        """1-D lattice coordinates shared by every axis."""
        return -self.L / 2 + np.arange(self.N) * self.h

    def axes(self) -> list[np.ndarray]:
        """Open mesh: one broadcastable coordinate array per axis."""
        x = self.coords()
        out = []
        for j in range(self.n):
            shp = [1] * self.n
            shp[j] = self.N
            out.append(x.reshape(shp))
        return out

    def radius(self, center: Sequence[float] | None = None) -> np.ndarray:
        c = np.zeros(self.n) if center is None else np.asarray(center, float)
        r2 = sum((x - cj) ** 2 for x, cj in zip(self.axes(), c))
        return np.sqrt(np.broadcast_to(r2, self.shape))

    def index_of(self, x: Sequence[float]) -> tuple[int, ...]:
        """Nearest lattice index of a point."""
        x = np.atleast_1d(np.asarray(x, float))
        k = np.rint((x + self.L / 2) / self.h).astype(int) % self.N
        return tuple(int(v) for v in k)

    def point(self, index: Sequence[int]) -> np.ndarray:
        return -self.L / 2 + np.asarray(index, float) * self.h


def make_grid(n: int, N: int, L: float) -> GridSpec:
    return GridSpec(int(n), int(N), float(L))


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != self.grid.shape:
            if v.size != self.grid.size:
                raise ValueError(
                    f"expected {self.grid.size} samples, got {v.size}")
            v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def _lift(self, other):
        if isinstance(other, ScalarField):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return ScalarField(self.grid, self.values + self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - self._lift(other))

    def __rsub__(self, other):
        return ScalarField(self.grid, self._lift(other) - self.values)

    def __mul__(self, other):
        return ScalarField(self.grid, self.values * self._lift(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ScalarField(self.grid, self.values / self._lift(other))

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def __abs__(self):
        return ScalarField(self.grid, np.abs(self.values))

    def mean(self) -> float:
        return float(self.values.mean())

    def at(self, x: Sequence[float]) -> float:
        """Value at the lattice point nearest to ``x``."""
        return float(self.values[self.grid.index_of(x)])

    @classmethod
    def constant(cls, grid: GridSpec, c: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(c)))


@dataclass(frozen=True, eq=False)
class VectorField:
    components: tuple[ScalarField, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a vector field needs at least one component")
        g = comps[0].grid
        if any(c.grid != g for c in comps):
            raise ValueError("all components must share one grid")
        object.__setattr__(self, "components", comps)

    @property
    def grid(self) -> GridSpec:
        return self.components[0].grid

    def __len__(self):
        return len(self.components)

    def __getitem__(self, j) -> ScalarField:
        return self.components[j]

    def __iter__(self):
        return iter(self.components)

    def stack(self) -> np.ndarray:
        return np.stack([c.values for c in self.components])

    def magnitude(self) -> ScalarField:
        return ScalarField(self.grid, np.sqrt((self.stack() ** 2).sum(axis=0)))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(a + b for a, b in zip(self, other)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(a - b for a, b in zip(self, other)))

    def __mul__(self, c: float) -> "VectorField":
        return VectorField(tuple(a * c for a in self))

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField(tuple(-a for a in self))

    @classmethod
    def from_array(cls, grid: GridSpec, arr: np.ndarray) -> "VectorField":
        return cls(tuple(ScalarField(grid, a) for a in arr))


# ---------------------------------------------------------------------------
# test-function corpus

def _boundary_max(grid: GridSpec, values: np.ndarray) -> float:
    """Largest |value| on the faces x_j = -L/2 (the wrap seam)."""
    m = 0.0
    for j in range(grid.n):
        m = max(m, float(np.abs(np.take(values, 0, axis=j)).max()))
    return m


def _center(grid: GridSpec, c) -> np.ndarray:
    if c is None:
        return np.zeros(grid.n)
    c = np.atleast_1d(np.asarray(c, float))
    if c.size == 1 and grid.n > 1:
        c = np.full(grid.n, float(c[0]))
    if c.size != grid.n:
        raise ValueError(f"center has {c.size} coordinates, grid has {grid.n}")
    return c


def _room(grid: GridSpec, c: np.ndarray) -> float:
    """Distance from ``c`` to the nearest face of the box."""
    return float(np.min(grid.L / 2 - np.abs(c)))


@dataclass(frozen=True)
class Gaussian:
    """exp(-pi |x - c|^2 / sigma^2)."""

    sigma: float
    center: tuple[float, ...] | None = None
    localized = True

    def support_radius(self) -> float:
        return self.sigma * math.sqrt(math.log(1 / BOUNDARY_TOL) / math.pi)

    def __call__(self, grid: GridSpec) -> np.ndarray:
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        c = _center(grid, self.center)
        if self.support_radius() > _room(grid, c):
            raise ValueError(
                f"gaussian sigma={self.sigma} at {tuple(c)} does not decay "
                f"below {BOUNDARY_TOL} inside a box of side {grid.L}")
        r = grid.radius(c)
        return np.exp(-math.pi * r**2 / self.sigma**2)


def _bump_profile(s: np.ndarray) -> np.ndarray:
    """exp(-1/(1 - s^2)) on s < 1, zero elsewhere."""
    out = np.zeros_like(s, dtype=float)
    inside = s < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


@dataclass(frozen=True)
class Bump:
    """exp(-1/(1 - |x-c|^2/r^2)) on the ball of radius r."""

    radius: float
    center: tuple[float, ...] | None = None
    localized = True

    def __call__(self, grid: GridSpec) -> np.ndarray:
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        c = _center(grid, self.center)
        if self.radius > _room(grid, c):
            raise ValueError(
                f"bump of radius {self.radius} at {tuple(c)} leaves the box")
        return _bump_profile(grid.radius(c) / self.radius)


@dataclass(frozen=True)
class PlaneWave:
    """cos(2 pi m.x / L) for an integer mode vector m."""

    m: tuple[int, ...]
    localized = False

    def __call__(self, grid: GridSpec) -> np.ndarray:
        m = np.atleast_1d(np.asarray(self.m, int))
        if m.size == 1 and grid.n > 1:
            m = np.concatenate([m, np.zeros(grid.n - 1, int)])
        if m.size != grid.n:
            raise ValueError("mode vector does not match the grid dimension")
        phase = sum(mj * x for mj, x in zip(m, grid.axes()))
        return np.broadcast_to(np.cos(2 * math.pi * phase / grid.L), grid.shape).copy()


@dataclass(frozen=True)
class RandomBandlimited:
    """Random real field with spectral support on integer modes kmin <= |m| <= K.

    Normalized to unit root-mean-square value.
    """

    K: float
    seed: int = 0
    kmin: float = 1.0
    localized = False

    def __call__(self, grid: GridSpec) -> np.ndarray:
        if not (0 < self.kmin <= self.K < grid.N / 2):
            raise ValueError("need 0 < kmin <= K < N/2")
        rng = np.random.default_rng(self.seed)
        noise = rng.standard_normal(grid.shape)
        m = np.fft.fftfreq(grid.N, 1.0 / grid.N)
        msq = sum(a**2 for a in np.meshgrid(*([m] * grid.n), indexing="ij", sparse=True))
        mask = (msq >= self.kmin**2) & (msq <= self.K**2)
        v = np.fft.ifftn(np.fft.fftn(noise) * mask).real
        rms = np.sqrt(np.mean(v**2))
        if rms == 0:
            raise ValueError("empty band")
        return v / rms


def _plateau(grid: GridSpec, radius: float | None) -> np.ndarray:
    """Radial window equal to 1 to ~1e-17 near the origin, ~0 at the box faces."""
    R = grid.L / 4 if radius is None else float(radius)
    if not 0 < R <= grid.L / 4:
        raise ValueError("window radius must lie in (0, L/4]")
    s = R / 6
    return 0.5 * erfc((grid.radius() - R) / s)


@dataclass(frozen=True)
class QuadraticWindow:
    """|x|^2 times a wide plateau window centered at the origin.

    Sphere and ball means about points well inside the plateau reproduce the
    pure quadratic to ~1e-12.
    """

    radius: float | None = None
    localized = True

    def __call__(self, grid: GridSpec) -> np.ndarray:
        return grid.radius() ** 2 * _plateau(grid, self.radius)


@dataclass(frozen=True)
class RampWindow:
    """x_1 times the plateau window; affine near the origin."""

    radius: float | None = None
    localized = True

    def __call__(self, grid: GridSpec) -> np.ndarray:
        x0 = np.broadcast_to(grid.axes()[0], grid.shape)
        return x0 * _plateau(grid, self.radius)


def sample(grid: GridSpec, generator: Callable[[GridSpec], np.ndarray]) -> ScalarField:
    values = generator(grid)
    if getattr(generator, "localized", False):
        scale = max(1.0, float(np.abs(values).max()))
        if _boundary_max(grid, values) >= BOUNDARY_TOL * scale:
            raise ValueError(
                f"{generator!r} does not vanish at the box boundary")
    return ScalarField(grid, values)


def lp_norm(f: ScalarField, p: float) -> float:
    """Riemann-sum L^p norm (sum |f|^p h^n)^(1/p); p = inf gives max |f|."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(f.values)
    m = float(a.max())
    if m == 0.0:
        return 0.0
    if math.isinf(p):
        return m
    s = float(np.sum((a / m) ** p)) * f.grid.cell_volume
    return m * s ** (1.0 / p)


# ---------------------------------------------------------------------------
# "name:key=value,key=value" generator strings (CLI)

_GENERATORS = {
    "gaussian": Gaussian,
    "bump": Bump,
    "plane_wave": PlaneWave,
    "random_bandlimited": RandomBandlimited,
    "quadratic_window": QuadraticWindow,
    "ramp_window": RampWindow,
}


def _parse_value(text: str):
    if ";" in text:
        return tuple(float(t) for t in text.split(";") if t)
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_generator(spec: str, seed: int | None = None):
    """Build a generator from e.g. ``"gaussian:sigma=1,center=0.5;0"``."""
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name not in _GENERATORS:
        raise ValueError(f"unknown generator {name!r}; known: {sorted(_GENERATORS)}")
    kwargs = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"malformed generator parameter {item!r}")
        kwargs[key.strip()] = _parse_value(val.strip())
    if name == "plane_wave" and "m" in kwargs:
        m = kwargs["m"]
        kwargs["m"] = tuple(int(v) for v in np.atleast_1d(m))
    if name == "random_bandlimited" and seed is not None and "seed" not in kwargs:
        kwargs["seed"] = seed
    if "center" in kwargs:
        kwargs["center"] = tuple(np.atleast_1d(kwargs["center"]).astype(float))
    return _GENERATORS[name](**kwargs)
