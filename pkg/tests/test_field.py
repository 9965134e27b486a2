import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sqfn.field import (Bump, Gaussian, PlaneWave, QuadraticWindow, RampWindow,
                        RandomBandlimited, ScalarField, VectorField, lp_norm,
                        make_grid, parse_generator, sample)


def test_grid_spacing_and_counts():
    assert make_grid(1, 16, 1.0).h == 0.0625
    assert make_grid(2, 256, 8.0).size == 65536
    assert make_grid(3, 64, 4.0).h == 0.0625


def test_grid_origin_is_a_lattice_point():
    g = make_grid(2, 64, 3.0)
    assert np.allclose(g.point(g.origin_index), 0.0)
    assert g.radius()[g.origin_index] == 0.0


@pytest.mark.parametrize("args", [(4, 64, 1.0), (2, 100, 1.0), (2, 8, 1.0), (1, 64, 0.0), (1, 64, -1.0)])
def test_grid_rejects_bad_parameters(args):
    with pytest.raises(ValueError):
        make_grid(*args)


def test_plane_wave_values():
    g = make_grid(1, 64, 1.0)
    f = sample(g, PlaneWave((1,)))
    assert np.abs(f.values - np.cos(2 * np.pi * g.coords())).max() < 1e-15


def test_gaussian_vanishes_at_boundary():
    g = make_grid(2, 128, 16.0)
    f = sample(g, Gaussian(1.0))
    edge = max(np.abs(f.values[0]).max(), np.abs(f.values[:, 0]).max())
    assert edge < 1e-12
    # the boundary row sits at |x| = 8, where exp(-64 pi) ~ 1e-88
    assert f.values[0, 64] == pytest.approx(math.exp(-64 * math.pi), rel=1e-9)


def test_localized_generators_refuse_to_wrap():
    g = make_grid(1, 64, 1.0)
    with pytest.raises(ValueError):
        sample(g, Gaussian(0.3))
    with pytest.raises(ValueError):
        sample(g, Bump(0.3, (0.3,)))


def test_random_bandlimited_is_reproducible():
    g = make_grid(1, 256, 1.0)
    a = sample(g, RandomBandlimited(8, seed=7))
    b = sample(g, RandomBandlimited(8, seed=7))
    assert np.array_equal(a.values, b.values)
    c = sample(g, RandomBandlimited(8, seed=8))
    assert not np.array_equal(a.values, c.values)


def test_random_bandlimited_band():
    g = make_grid(2, 64, 1.0)
    f = sample(g, RandomBandlimited(10, seed=1, kmin=4))
    c = np.fft.fftn(f.values)
    m = np.fft.fftfreq(64, 1 / 64)
    r = np.sqrt(m[:, None] ** 2 + m[None, :] ** 2)
    assert np.abs(c[(r < 4) | (r > 10)]).max() < 1e-9 * np.abs(c).max()
    assert np.sqrt(np.mean(f.values**2)) == pytest.approx(1.0)


def test_windows_near_origin():
    g = make_grid(2, 128, 1.0)
    q = sample(g, QuadraticWindow())
    r2 = g.radius() ** 2
    near = g.radius() <= 0.05
    assert np.abs(q.values[near] / r2[near].clip(1e-300) - 1)[r2[near] > 0].max() < 1e-10
    ramp = sample(g, RampWindow())
    x = np.broadcast_to(g.axes()[0], g.shape)
    assert np.abs(ramp.values[near] - x[near]).max() < 1e-12


def test_lp_norm_examples():
    g = make_grid(1, 64, 1.0)
    assert lp_norm(ScalarField.constant(g, 0.0), 2) == 0.0
    f = sample(g, PlaneWave((1,)))
    assert abs(lp_norm(f, 2) - 1 / math.sqrt(2)) < 1e-12
    g3 = make_grid(3, 16, 2.0)
    assert abs(lp_norm(ScalarField.constant(g3, -3.0), 1) - 3.0 * 8.0) < 1e-12
    assert lp_norm(-2 * f, math.inf) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_field_arithmetic_and_immutability():
    g = make_grid(1, 16, 1.0)
    f = ScalarField.constant(g, 2.0)
    assert np.all((f + 1).values == 3.0)
    assert np.all((1 - f).values == -1.0)
    assert np.all((f / f).values == 1.0)
    with pytest.raises(ValueError):
        f.values[0] = 1.0
    with pytest.raises(ValueError):
        f + ScalarField.constant(make_grid(1, 32, 1.0), 1.0)
    with pytest.raises(ValueError):
        ScalarField(g, np.full(16, np.nan))
    v = VectorField((f, 2 * f))
    assert np.allclose(v.magnitude().values, math.sqrt(20.0))


def test_parse_generator():
    gen = parse_generator("gaussian:sigma=0.1,center=0.05;0")
    assert gen == Gaussian(0.1, (0.05, 0.0))
    assert parse_generator("random_bandlimited:K=8", seed=3).seed == 3
    with pytest.raises(ValueError):
        parse_generator("nonsense:a=1")


fields = st.integers(0, 2**31 - 1).map(
    lambda s: sample(make_grid(2, 32, 1.0), RandomBandlimited(6, seed=s)))


@given(fields, st.sampled_from([-2.0, 0.5, 10.0]), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_lp_norm_homogeneous(f, c, p):
    assert lp_norm(c * f, p) == pytest.approx(abs(c) * lp_norm(f, p), rel=1e-13)


@given(fields, fields, st.sampled_from([1.0, 2.0, 3.0]))
def test_lp_norm_triangle(f, g, p):
    assert lp_norm(f + g, p) <= lp_norm(f, p) + lp_norm(g, p) + 1e-12
