"""Acceptance criteria, one test each.

Each test records a single PASS/FAIL line at the criterion's own tolerance;
the lines are printed together in the pytest terminal summary.  Criteria
that the implementation cannot meet fail here rather than being relaxed.
"""
import math
import time

import numpy as np
import pytest

from freedeconv.additive_solver import additive_cauchy_estimator
from freedeconv.bounds import bound
from freedeconv.cauchy_deconv import fourier_deconvolve, sparse_deconvolve, wasserstein1
from freedeconv.moments import (
    WORD_PAIRS,
    NoiseModel,
    finite_n_mixed_moment,
    free_cumulants_to_moments,
    moment_set,
    moments_to_free_cumulants,
)
from freedeconv.multiplicative_solver import (
    compute_profile,
    kz_map_multiplicative,
    multiplicative_cauchy_estimator,
    solve_line_multiplicative,
)
from freedeconv.randmat import (
    FIG3_ETA,
    FIG4_KAPPA,
    bound_inputs_for,
    fig3_profile,
    monte_carlo_mixed_moment,
    preset,
    rng_stream,
    run_experiment,
    sample_model,
)
from freedeconv.transforms import (
    Atomic,
    Empirical,
    MarchenkoPastur,
    Semicircle,
    cauchy_density,
    cauchy_smooth,
)

SQRT2 = math.sqrt(2.0)


def test_criterion_1_additive_oracle(report_criterion):
    t0 = time.perf_counter()
    grid = np.linspace(-6, 6, 512)
    est = additive_cauchy_estimator(Semicircle(0, 2), NoiseModel(Semicircle(0, 1)), eta=2 * SQRT2, grid=grid)
    err = float(np.max(np.abs(est.values - cauchy_smooth(Semicircle(0, 1), 2 * SQRT2, grid))))
    dt = time.perf_counter() - t0
    ok = report_criterion(1, err <= 1e-7 and dt < 5, f"sup error {err:.2e} (<= 1e-7), {dt:.2f} s (< 5 s)")
    assert ok


def test_criterion_2_multiplicative_oracle(report_criterion):
    t0 = time.perf_counter()
    grid = np.linspace(-10, 12, 512)
    mp = MarchenkoPastur(1, 1)
    est, _ = multiplicative_cauchy_estimator(mp, NoiseModel(mp, sup_norm=4.0), 5.0, grid=grid)
    err = float(np.max(np.abs(est.values - cauchy_density(grid, 5.0, 1.0))))
    dt = time.perf_counter() - t0
    ok = report_criterion(2, err <= 1e-6 and dt < 10, f"sup error {err:.2e} (<= 1e-6), {dt:.2f} s (< 10 s)")
    assert ok


def test_criterion_3_model_constants(report_criterion):
    t0 = time.perf_counter()
    prof = fig3_profile()
    xi0, eta0 = prof.xi0, prof.eta0
    n_add = bound(bound_inputs_for(preset("fig1"))).N_min
    n_mul = bound(bound_inputs_for(preset("fig3"))).N_min
    dt = time.perf_counter() - t0
    parts = {
        "xi0": 3.35 <= xi0 <= 3.65,
        "eta0": 3.9 <= eta0 <= 4.3,
        "N_add": n_add == 4,
        "N_mul": n_mul == 72,
        "time": dt < 1.0,
    }
    detail = (f"xi0={xi0:.3f} in [3.35,3.65]: {parts['xi0']}; eta0={eta0:.3f} in [3.9,4.3]: {parts['eta0']}; "
              f"additive N_min={n_add} (4): {parts['N_add']}; multiplicative N_min={n_mul} (72): "
              f"{parts['N_mul']}; {dt:.2f} s")
    ok = report_criterion(3, all(parts.values()), detail)
    assert ok, detail


@pytest.mark.slow
def test_criterion_4_bound_dominance(report_criterion):
    t0 = time.perf_counter()
    add = [run_experiment(preset("fig2", N=n), 20) for n in (50, 200, 1000)]
    mul = [run_experiment(preset("fig4", N=n), 20, kappa=FIG4_KAPPA) for n in (100, 500)]
    dt = time.perf_counter() - t0
    ratios_add = [r.ratio for r in add]
    ratios_mul = [r.ratio for r in mul]
    dominance = all(r is not None and r >= 1 for r in ratios_add + ratios_mul)
    no_failures = not any(r.failed for r in add + mul)
    # improvement = the bound tightens: the ratio falls toward 1 as N grows
    improving = all(x >= y for rs in (ratios_add, ratios_mul) for x, y in zip(rs, rs[1:]))
    fmt = lambda rs: ", ".join(f"{r:.1f}" for r in rs)
    detail = (f"additive ratios [{fmt(ratios_add)}], multiplicative ratios [{fmt(ratios_mul)}] (>= 1: "
              f"{dominance}); ratio nonincreasing in N: {improving}; failed samples: "
              f"{not no_failures}; {dt:.0f} s (< 1800 s)")
    ok = report_criterion(4, dominance and improving and no_failures and dt < 1800, detail)
    assert ok, detail


@pytest.mark.slow
def test_criterion_5_weingarten(report_criterion):
    t0 = time.perf_counter()
    rng = rng_stream(2024)
    a = rng.uniform(0.2, 2.0, 5)
    b = rng.uniform(0.2, 2.0, 5)
    b /= b.mean()
    ma, mb = moment_set(Empirical(a)), moment_set(Empirical(b))
    worst = 0.0
    fails = []
    for i, w in enumerate(WORD_PAIRS):
        exact = finite_n_mixed_moment(ma, mb, w, 5)
        est, se = monte_carlo_mixed_moment(a, b, w, 100_000, rng_stream(2024, i + 1))
        z = abs(est - exact) / se
        worst = max(worst, z)
        if z > 3:
            fails.append(w)
    dt = time.perf_counter() - t0
    ok = report_criterion(5, not fails and dt < 120,
                          f"{len(WORD_PAIRS)} words, max |z| = {worst:.2f} (<= 3), failing {fails}, "
                          f"{dt:.1f} s (< 120 s)")
    assert ok


def _invariants():
    """Each entry: name -> bool."""
    out = {}
    rng = np.random.default_rng(0)

    # Herglotz containment
    zs = rng.uniform(-10, 10, 500) + 1j * rng.uniform(0.05, 10, 500)
    laws = [Semicircle(0.5, 2.0), MarchenkoPastur(0.5, 1.5), Empirical(rng.normal(size=100)),
            Atomic(np.array([-1.0, 2.0]), np.array([0.3, 0.7]))]
    out["herglotz"] = all(np.all(m.stieltjes(zs).imag > 0)
                          and np.all((-1 / m.stieltjes(zs)).imag >= zs.imag - 1e-12) for m in laws)

    # additive residuals and floors
    eta = 2 * SQRT2
    obs, _ = sample_model(preset("fig1", N=300), 0)
    est = additive_cauchy_estimator(obs, NoiseModel(Semicircle(0, 1)), eta=eta, grid=np.linspace(-12, 12, 256))
    res = [abs(p.omega1 + p.z - p.omega3 + 1 / obs.stieltjes(p.omega3)) <= 10 * 1e-12 * max(1, abs(p.z))
           for p in est.points]
    out["additive residuals"] = est.all_converged and all(res)
    out["additive floor"] = all(p.omega3.imag >= 0.75 * eta * (1 - 1e-9) for p in est.points)

    # multiplicative residuals and floors
    mp = MarchenkoPastur(1, 1)
    noise = NoiseModel(mp, sup_norm=4.0)
    mobs, _ = sample_model(preset("fig3", N=200), 0)
    ev = np.clip(mobs.eigenvalues, 0, None)
    m = Empirical(ev / ev.mean())
    prof = compute_profile(noise, moment_set(m))
    meta = 1.1 * prof.eta0
    pts = solve_line_multiplicative(meta, np.linspace(-8, 10, 200), m, noise, prof)
    floor = prof.g_inverse(meta / prof.sigma_tilde1) * prof.sigma_tilde1
    out["multiplicative residuals"] = all(
        p.converged and abs(kz_map_multiplicative(p.omega3, p.z, m.stieltjes, noise) - p.omega3)
        <= 10 * 1e-12 * max(1, abs(p.z)) * max(1, abs(p.omega3)) for p in pts)
    out["multiplicative floor"] = all(p.omega3.imag >= floor * (1 - 1e-6) for p in pts)

    # NC moment-cumulant round trips
    worst = 0.0
    for _ in range(200):
        k = rng.normal(size=6)
        back = moments_to_free_cumulants(free_cumulants_to_moments(k))
        worst = max(worst, float(np.max(np.abs(back - k))))
    out["moment-cumulant round trip"] = worst <= 1e-10

    # stability-function meshes
    f3 = fig3_profile()
    t = np.array([f3.t(x) for x in np.linspace(2.001, 40, 400)])
    r = np.array([f3.R(x) for x in np.linspace(f3.xi0, 10 * f3.xi0, 300)])
    out["t decreasing"] = bool(np.all(np.diff(t) <= 1e-15))
    out["R increasing"] = bool(np.all(np.diff(r) >= -1e-15))

    # sparse objective monotone, unit output mass
    grid = np.linspace(-20, 20, 801)
    vals = cauchy_smooth(Empirical(rng.normal(size=40)), 0.8, grid)
    sp = sparse_deconvolve((grid, vals, 0.8), 1e-4, np.linspace(-4, 4, 161))
    h = np.array(sp.history)
    out["sparse objective monotone"] = bool(np.all(np.diff(h) <= 1e-12 * np.maximum(1, np.abs(h[:-1]))))
    dens = fourier_deconvolve(est)
    out["output mass"] = abs(np.trapezoid(dens.values, dens.grid) - 1) <= 1e-12
    return out


def test_criterion_6_invariants(report_criterion):
    t0 = time.perf_counter()
    checks = _invariants()
    dt = time.perf_counter() - t0
    bad = [k for k, v in checks.items() if not v]
    ok = report_criterion(6, not bad and dt < 300,
                          f"{len(checks)} invariant groups, failing {bad}, {dt:.1f} s (< 300 s)")
    assert ok


def test_criterion_7_end_to_end(report_criterion):
    spec = preset("fig1")
    obs, eig_b = sample_model(spec, 0)
    est = additive_cauchy_estimator(obs, spec.noise_law(), eta=2 * SQRT2, grid=np.linspace(-30, 30, 1024))
    w_add = wasserstein1(fourier_deconvolve(est), eig_b)

    spec = preset("fig3")
    obs, eig_b = sample_model(spec, 0)
    # the sample's own eta_0 lies just above 4.2, so the line is forced
    est, _ = multiplicative_cauchy_estimator(obs, spec.noise_law(), FIG3_ETA, grid=np.linspace(-40, 40, 1024),
                                             allow_below_threshold=True, negative="clip")
    w_mul = wasserstein1(fourier_deconvolve(est), eig_b)
    detail = (f"additive W1 = {w_add:.3f} (<= 0.15), multiplicative W1 = {w_mul:.3f} (<= 0.2); "
              f"sharp cutoff, automatic rule")
    ok = report_criterion(7, w_add <= 0.15 and w_mul <= 0.2, detail)
    assert ok, detail
