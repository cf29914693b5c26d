import math
import time

import numpy as np
import pytest

from freedeconv.errors import DegenerateXi, EmptyPart, EtaBelowThreshold
from freedeconv.moments import MomentSet, NoiseModel, convolve_moments_multiplicative, moment_set
from freedeconv.multiplicative_solver import (
    ProfileInputs,
    compute_profile,
    k_function,
    kz_map_multiplicative,
    multiplicative_cauchy_estimator,
    reduce_model,
    solve_line_multiplicative,
    stability_functions,
)
from freedeconv.randmat import fig3_profile, preset, sample_model
from freedeconv.transforms import Atomic, Empirical, MarchenkoPastur, Semicircle, cauchy_density, cauchy_smooth

MP = MarchenkoPastur(1, 1)
NOISE = NoiseModel(MP, sup_norm=4.0)


@pytest.fixture(scope="module")
def mp_profile():
    return compute_profile(NOISE, moment_set(MP))


@pytest.fixture(scope="module")
def fig3():
    return fig3_profile()


def test_k_function():
    assert k_function(2.0) == 1.0
    assert k_function(2.5) == pytest.approx(2.0)
    with pytest.raises(DegenerateXi):
        k_function(1.9)


def test_stability_functions_need_xi_above_two(mp_profile):
    with pytest.raises(DegenerateXi):
        mp_profile.inputs.L(2.0)
    vals = stability_functions(3.0, mp_profile.inputs)
    assert set(vals) >= {"k", "g", "t", "theta", "L", "R"}


def test_noise_tilde_variance():
    assert NOISE.moments.sigma_tilde_sq == pytest.approx(1.0)


def test_profile_invariants(fig3):
    assert fig3.xi_g >= 2
    assert fig3.xi0 >= fig3.xi_g
    assert fig3.t(fig3.xi0) < 1 + 1e-9
    assert fig3.K0 > 0
    mesh = np.linspace(fig3.xi_g, 10 * fig3.xi0, 400)
    g = np.array([fig3.g(x) for x in mesh])
    assert np.all(np.diff(g) > 0)
    assert fig3.eta0 == pytest.approx(fig3.g(fig3.xi0) * fig3.sigma_tilde1)


def test_t_decreasing_and_R_increasing(fig3):
    mesh = np.linspace(2.001, 40, 500)
    t = np.array([fig3.t(x) for x in mesh])
    assert np.all(np.diff(t) <= 1e-15)
    mesh = np.linspace(fig3.xi0, 10 * fig3.xi0, 300)
    R = np.array([fig3.R(x) for x in mesh])
    assert np.all(np.diff(R) >= -1e-15)


def test_self_deconvolution_profile_is_finite():
    prof = compute_profile(NOISE, NOISE.moments)
    assert math.isfinite(prof.xi0) and prof.eta0 > 0


def test_kz_fixed_point_on_identity_signal(mp_profile):
    z = 5j
    pts = solve_line_multiplicative(5.0, np.array([0.0]), MP, NOISE, mp_profile)
    w = pts[0].omega3
    assert abs(kz_map_multiplicative(w, z, MP.stieltjes, NOISE) - w) <= 1e-9


def test_kz_point_mass_noise_is_constant():
    one = NoiseModel(Atomic.dirac(1.0))
    for w in (1 + 2j, 3j):
        assert kz_map_multiplicative(w, 0.5 + 4j, MP.stieltjes, one) == pytest.approx(0.5 + 4j)


def test_kz_scale_covariance():
    rng = np.random.default_rng(0)
    law = Semicircle(1.0, 0.2)
    for c in (0.5, 2.0):
        dil = law.dilate(c)
        for _ in range(5):
            z = complex(rng.uniform(-2, 2), rng.uniform(3, 6))
            w = complex(rng.uniform(-2, 2), rng.uniform(3, 6))
            k1 = kz_map_multiplicative(w, z, law.stieltjes, NOISE)
            k2 = kz_map_multiplicative(c * w, c * z, dil.stieltjes, NOISE)
            assert k2 == pytest.approx(c * k1, rel=1e-12)


def test_identity_signal_estimator():
    t0 = time.perf_counter()
    grid = np.linspace(-10, 12, 512)
    est, _ = multiplicative_cauchy_estimator(MP, NOISE, 5.0, grid=grid)
    assert time.perf_counter() - t0 < 10
    assert np.max(np.abs(est.values - cauchy_density(grid, 5.0, 1.0))) <= 1e-6


def test_point_mass_noise_passthrough():
    eig = Empirical(np.random.default_rng(1).uniform(0.5, 1.5, 80))
    grid = np.linspace(-8, 10, 181)
    est, _ = multiplicative_cauchy_estimator(eig, NoiseModel(Atomic.dirac(1.0)), 3.0, grid=grid,
                                             allow_below_threshold=True)
    assert np.max(np.abs(est.values - cauchy_smooth(eig, 3.0, grid))) <= 1e-9


def test_rejects_eta_below_threshold(mp_profile):
    with pytest.raises(EtaBelowThreshold):
        solve_line_multiplicative(0.9 * mp_profile.eta0, np.linspace(0, 1, 5), MP, NOISE, mp_profile)


@pytest.fixture(scope="module")
def fig3_line():
    obs, _ = sample_model(preset("fig3", N=200), 0)
    ev = np.clip(obs.eigenvalues, 0, None)
    m = Empirical(ev / ev.mean())
    prof = compute_profile(NOISE, moment_set(m))
    eta = 1.1 * prof.eta0
    grid = np.linspace(-8, 10, 200)
    pts = solve_line_multiplicative(eta, grid, m, NOISE, prof)
    return m, prof, eta, grid, pts


def test_floor_and_residual(fig3_line):
    m, prof, eta, grid, pts = fig3_line
    floor = prof.g_inverse(eta / prof.sigma_tilde1) * prof.sigma_tilde1
    for p in pts:
        assert p.converged
        assert p.omega3.imag >= floor * (1 - 1e-6)
        tol = 1e-12 * max(1.0, abs(p.z))
        w = p.omega3
        assert abs(kz_map_multiplicative(w, p.z, m.stieltjes, NOISE) - w) <= 10 * tol * max(1.0, abs(w))


def test_path_independence(fig3_line):
    m, prof, eta, grid, pts = fig3_line
    half = grid[grid.size // 2:]
    again = solve_line_multiplicative(eta, half, m, NOISE, prof)
    w_full = np.array([p.omega3 for p in pts[grid.size // 2:]])
    w_half = np.array([p.omega3 for p in again])
    assert np.max(np.abs(w_full - w_half)) <= 100 * 1e-12 * np.max(np.abs(grid)) * 10


def test_guaranteed_step_rule_agrees(mp_profile):
    grid = np.linspace(-2, 4, 13)
    a = solve_line_multiplicative(6.0, grid, MP, NOISE, mp_profile)
    b = solve_line_multiplicative(6.0, grid, MP, NOISE, mp_profile, step_rule="guaranteed")
    assert np.max(np.abs(np.array([p.omega3 for p in a]) - np.array([p.omega3 for p in b]))) < 1e-9


def test_reduce_model():
    ev = np.array([0.5, 1.0, 2.0, 2.5])
    red = reduce_model(ev)
    assert len(red.problems) == 1 and red.stripped_zeros == 0
    assert red.problems[0].mass == 1.0
    padded = np.concatenate([ev, np.zeros(4)])
    red2 = reduce_model(padded, N_outer=8, N_inner=4)
    assert red2.stripped_zeros == 4
    assert np.allclose(red2.problems[0].eigenvalues, red.problems[0].eigenvalues)
    mixed = np.array([-2.0, -1.0, 0.5, 1.0, 3.0])
    red3 = reduce_model(mixed)
    masses = {p.sign: p.mass for p in red3.problems}
    assert masses == {1: 3 / 5, -1: 2 / 5}
    with pytest.raises(EmptyPart):
        reduce_model(ev, signs=(-1,))


def test_negative_eigenvalues_rejected_unless_clipped():
    ev = np.array([-1e-3, 0.5, 1.0, 1.5])
    with pytest.raises(ValueError):
        multiplicative_cauchy_estimator(Empirical(ev), NOISE, 8.0, grid=np.linspace(0, 2, 5),
                                        allow_below_threshold=True)
    est, _ = multiplicative_cauchy_estimator(Empirical(ev), NOISE, 8.0, grid=np.linspace(0, 2, 5),
                                             allow_below_threshold=True, negative="clip")
    assert np.all(est.values >= 0)
