"""Square functions built from sphere and ball means, evaluated on periodic grids."""

from .field import (GridSpec, ScalarField, VectorField, make_grid, sample, lp_norm,
                    Gaussian, Bump, PlaneWave, RandomBandlimited, QuadraticWindow,
                    RampWindow, parse_generator)
from .averaging import ScaleGrid, KernelSpec, sphere_mean, ball_mean, kernel_convolve

__all__ = [
    "GridSpec", "ScalarField", "VectorField", "make_grid", "sample", "lp_norm",
    "Gaussian", "Bump", "PlaneWave", "RandomBandlimited", "QuadraticWindow",
    "RampWindow", "parse_generator",
    "ScaleGrid", "KernelSpec", "sphere_mean", "ball_mean", "kernel_convolve",
]

__version__ = "0.1.0"
