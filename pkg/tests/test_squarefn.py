import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sqfn.averaging import (KernelSpec, ScaleGrid, ball_mean, kernel_convolve, sphere_area,
                            sphere_mean)
from sqfn.field import (Gaussian, PlaneWave, QuadraticWindow, RampWindow, RandomBandlimited,
                        ScalarField, VectorField, lp_norm, make_grid, sample)
from sqfn.lab import smooth_corpus
from sqfn.spectral import gradient, half_laplacian, mollify
from sqfn.squarefn import (ScaleFamily, family_S, family_T, family_T_1d, family_W, mu_omega,
                           sato_sigma, scale_integrate, square_D_fullspace, square_S,
                           square_T, square_T_1d, square_T_tilde, square_S_tilde, square_W)

# I0 = int_0^inf (1 - cos u)^2 du / u^3, by an independent composite Gauss rule
# (40-node panels of width 0.1 on [0, 4000] plus the averaged 3/(4 A^2) tail)
I0 = 0.6931471806

G2 = make_grid(2, 128, 1.0)
SC2 = ScaleGrid.for_grid(G2, 8 * G2.h, G2.L / 4)
G1 = make_grid(1, 1024, 1.0)
SC1 = ScaleGrid.for_grid(G1, 8 * G1.h, G1.L / 4)


@pytest.fixture(scope="module")
def corpus2():
    return smooth_corpus(G2, 3, 11)


def _rel(a, b):
    return np.abs(a - b).max() / max(np.abs(b).max(), 1e-300)


def test_scale_integrate_examples():
    sc = ScaleGrid(1.0, 1.0, 1)
    g = make_grid(1, 16, 1.0)
    one = ScaleFamily(sc, (ScalarField.constant(g, 1.0),))
    assert scale_integrate(one).values == pytest.approx(math.sqrt(math.log(2)))
    zero = ScaleFamily(SC1, tuple(ScalarField.constant(G1, 0.0) for _ in SC1.nodes))
    assert np.all(scale_integrate(zero).values == 0.0)
    with pytest.raises(ValueError):
        ScaleFamily(SC1, ())
    with pytest.raises(ValueError):
        ScaleFamily(sc, (ScalarField.constant(g, 1.0), ScalarField.constant(g, 1.0)))


def test_scale_integrate_monotone():
    fam = family_T(sample(G1, Gaussian(0.1)), SC1)
    big = ScaleFamily(SC1, tuple(2 * abs(f) for f in fam))
    assert np.all(scale_integrate(big).values >= scale_integrate(fam).values)


@pytest.mark.parametrize("op", [square_T, square_S, square_W, square_D_fullspace])
def test_constants_are_annihilated(op):
    c = ScalarField.constant(G2, 3.0)
    assert np.abs(op(c, SC2).values).max() < 1e-12


def test_tilde_and_mu_of_zero():
    z = ScalarField.constant(G2, 0.0)
    assert np.abs(square_T_tilde(z, SC2).values).max() == 0.0
    assert np.abs(square_S_tilde(z, SC2).values).max() == 0.0
    assert np.abs(mu_omega(lambda u: u[:, 0], z, SC2).values).max() == 0.0
    c = ScalarField.constant(G2, 2.0)
    assert np.abs(sato_sigma(lambda u: u[:, 0], 0.5, c, SC2).values).max() < 1e-12


def test_square_T_of_cosine():
    g = make_grid(1, 1024, 16.0)
    f = sample(g, PlaneWave((16,)))
    T = square_T(f, ScaleGrid.for_grid(g, g.h, g.L / 4)).values
    exact = np.abs(np.cos(2 * np.pi * g.coords())) * 2 * np.pi * math.sqrt(I0)
    assert np.abs(T - exact).max() <= 0.02 * exact.max()


def test_T_paths_agree(corpus2):
    for _, f in corpus2:
        a = square_T(f, SC2).values
        b = square_T(f, SC2, method="kernel").values
        assert _rel(b, a) <= 1e-3
        a = square_S(f, SC2).values
        b = square_S(f, SC2, method="kernel").values
        assert _rel(b, a) <= 1e-3


def test_S_bounded_by_T_plus_W(corpus2):
    for _, f in corpus2:
        S = square_S(f, SC2).values
        assert np.all(S <= square_T(f, SC2).values + square_W(f, SC2).values + 1e-8)


def test_psi_family_is_phi_minus_eta(corpus2):
    _, f = corpus2[0]
    fs = family_S(f, SC2, "kernel")
    ft = family_T(f, SC2, "kernel")
    fw = family_W(f, SC2)
    for s, t, w in zip(fs, ft, fw):
        assert np.abs(s.values - (t.values - w.values)).max() <= 1e-10 * max(np.abs(t.values).max(), 1)


def test_quadratic_window_integrand_ratio():
    f = sample(G2, QuadraticWindow())
    o = G2.origin_index
    sc = ScaleGrid.for_grid(G2, 8 * G2.h, G2.L / 16)
    for s, t in zip(family_S(f, sc), family_T(f, sc)):
        assert (s.values[o] / t.values[o]) ** 2 == pytest.approx(0.25, abs=1e-3)


def test_T_tilde_of_half_laplacian_is_T(corpus2):
    for _, f in corpus2:
        a = square_T_tilde(half_laplacian(f), SC2).values
        b = square_T(f, SC2).values
        assert _rel(a, b) <= 1e-3


def test_one_dimensional_second_difference_form():
    f = sample(G1, Gaussian(0.1))
    for a, b in zip(family_T_1d(f, SC1), family_T(f, SC1)):
        assert np.abs(a.values + 2 * b.values).max() <= 1e-12 * max(np.abs(a.values).max(), 1)
    assert np.abs(square_T_1d(f, SC1).values - 2 * square_T(f, SC1).values).max() <= 1e-12
    with pytest.raises(ValueError):
        square_T_1d(sample(G2, Gaussian(0.1)), SC2)


def test_one_dimensional_cosine_integrand():
    g = make_grid(1, 256, 1.0)
    f = sample(g, PlaneWave((1,)))
    sc = ScaleGrid.for_grid(g, g.h, g.L / 4)
    x = g.coords()
    for t, fam in zip(sc.nodes, family_T_1d(f, sc)):
        want = 4 * np.cos(2 * np.pi * x) ** 2 * (1 - np.cos(2 * np.pi * t)) ** 2 / t**2
        assert np.abs(fam.values**2 - want).max() <= 1e-10 * max(want.max(), 1)


def test_ramp_second_difference_vanishes_at_center():
    g = make_grid(1, 1024, 1.0)
    f = sample(g, RampWindow())
    sc = ScaleGrid.for_grid(g, g.h, g.L / 16)
    assert square_T_1d(f, sc).values[g.origin_index] < 1e-10


def test_D_is_sqrt2_times_T_1d():
    for _, f in smooth_corpus(G1, 3, 4):
        D = square_D_fullspace(f, SC1).values
        T1 = square_T_1d(f, SC1).values
        assert _rel(D, math.sqrt(2) * T1) <= 1e-3


def test_D_angular_refinement_2d():
    g = make_grid(2, 64, 1.0)
    sc = ScaleGrid.for_grid(g, 4 * g.h, g.L / 4)
    f = sample(g, Gaussian(0.15))
    a = lp_norm(square_D_fullspace(f, sc, nodes=64), 2)
    b = lp_norm(square_D_fullspace(f, sc, nodes=128), 2)
    assert abs(b / a - 1) <= 2e-3


def test_mu_vector_omega_matches_T(corpus2):
    for _, f in corpus2:
        mu = mu_omega(lambda u: u, gradient(f), SC2).values
        T = square_T(f, SC2).values
        assert _rel(mu, sphere_area(2) * T) <= 1e-3


def test_mu_sign_against_second_differences():
    # int_{|y|<=t} sign(y) f'(x-y) dy = 2 f(x) - f(x-t) - f(x+t)
    for _, f in smooth_corpus(G1, 2, 9):
        mu = mu_omega(lambda u: np.sign(u[:, 0]), gradient(f)[0], SC1).values
        T1 = square_T_1d(f, SC1).values
        assert _rel(mu, T1) <= 1e-3
        assert _rel(mu, 2 * square_T(f, SC1).values) <= 1e-3


def test_mu_rejects_non_mean_zero():
    with pytest.raises(ValueError):
        mu_omega(lambda u: np.ones(len(u)), sample(G2, Gaussian(0.1)), SC2)
    with pytest.raises(ValueError):
        sato_sigma(lambda u: u[:, 0], 0.0, sample(G2, Gaussian(0.1)), SC2)


def test_sato_eps_one_is_scaled_phi(corpus2):
    _, f = corpus2[1]
    z = ScalarField.constant(G2, 0.0)
    t = G2.L / 8
    a = kernel_convolve(KernelSpec("zeta", eps=1.0, omega=lambda u: u[:, 0]), f, t).values
    b = sphere_area(2) * kernel_convolve(KernelSpec("phi"), VectorField((f, z)), t).values
    assert np.abs(a - b).max() <= 1e-10 * np.abs(b).max()


def test_sato_sigma_bounded_on_corpus():
    r = []
    for _, f in smooth_corpus(G2, 6, 2):
        r.append(lp_norm(sato_sigma(lambda u: u[:, 0], 0.5, f, SC2), 2) / lp_norm(f, 2))
    assert max(r) / min(r) <= 2.0


def test_T_family_is_mean_deviation():
    f = sample(G2, Gaussian(0.1))
    for t, g in zip(SC2.nodes, family_T(f, SC2)):
        assert np.array_equal(g.values, ((f - sphere_mean(f, t)) / t).values)
    for t, g in zip(SC2.nodes, family_S(f, SC2)):
        assert np.array_equal(g.values, ((f - ball_mean(f, t)) / t).values)


@pytest.mark.parametrize("op", [square_T, square_S, square_W])
def test_scale_refinement(op, corpus2):
    for _, f in corpus2:
        a = lp_norm(op(f, SC2, tails=True), 2)
        b = lp_norm(op(f, SC2.refined(), tails=True), 2)
        assert abs(b / a - 1) <= 5e-3


@pytest.mark.parametrize("op", [square_T, square_S, square_W])
def test_mollifier_domination(op, corpus2):
    for _, f in corpus2[:2]:
        for eps in (4 * G2.h, 8 * G2.h):
            lhs = op(mollify(f, eps), SC2).values
            rhs = mollify(op(f, SC2), eps).values
            assert np.all(lhs <= rhs + 1e-8)


fields1 = st.integers(0, 2**31 - 1).map(
    lambda s: sample(make_grid(1, 256, 1.0), RandomBandlimited(20, seed=s)))
SCR = ScaleGrid.for_grid(make_grid(1, 256, 1.0), 4 / 256, 1 / 4)
OPS = [square_T, square_S, square_W, square_T_1d, square_T_tilde, square_S_tilde]


@given(fields1, st.sampled_from([-2.0, 0.5, 10.0]), st.sampled_from(OPS))
def test_homogeneity(f, c, op):
    a = op(c * f, SCR).values
    b = abs(c) * op(f, SCR).values
    assert np.abs(a - b).max() <= 1e-12 * max(np.abs(b).max(), 1)


@given(fields1, fields1, st.sampled_from(OPS))
def test_subadditivity(f, g, op):
    assert np.all(op(f + g, SCR).values <= op(f, SCR).values + op(g, SCR).values + 1e-10)
