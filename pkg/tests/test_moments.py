import math
from fractions import Fraction

import numpy as np
import pytest

from freedeconv.errors import (
    DegenerateDimension,
    InvalidMomentSequence,
    NormalizationViolated,
    SingularLeadingCumulant,
    UnsupportedWord,
)
from freedeconv.moments import (
    MomentSet,
    convolve_moments_additive,
    convolve_moments_multiplicative,
    deconvolve_moments_additive,
    deconvolve_moments_multiplicative,
    finite_n_mixed_moment,
    free_cumulants_k123,
    free_cumulants_to_moments,
    free_limit_mixed_moment,
    free_mixed_moment,
    moment_set,
    moments_to_free_cumulants,
    noncrossing_partitions,
    point_mass_moments,
    printed_trace_formula,
    weingarten_value,
)
from freedeconv.transforms import Atomic, Empirical, MarchenkoPastur, Semicircle

import oracles as O

SC1 = MomentSet(O.semicircle_moments(1.0))
MP1 = MomentSet(O.CATALAN)


# -- moment sets ---------------------------------------------------------------


def test_point_mass_moments():
    ms = moment_set(Atomic.dirac(1.7))
    assert np.allclose(ms.raw, [1.7 ** k for k in range(1, 7)])


def test_semicircle_and_mp_moments_match_quadrature():
    sc = O.raw_moments_quad(O.semicircle_density, -2, 2)
    mp = O.raw_moments_quad(O.mp_density, 0, 4)
    assert np.allclose(moment_set(Semicircle(0, 1)).raw, sc, atol=1e-9)
    assert np.allclose(moment_set(MarchenkoPastur(1, 1)).raw, mp, atol=1e-7)
    assert np.allclose(mp, O.CATALAN, atol=1e-7)
    assert np.allclose(moment_set(Semicircle(0, 2.5)).raw, [0, 2.5, 0, 2 * 2.5 ** 2, 0, 5 * 2.5 ** 3])


def test_derived_statistics():
    assert MP1.sigma_tilde_sq == pytest.approx(1.0)
    assert SC1.kurtosis == pytest.approx(2.0)
    assert SC1.sigma == pytest.approx(1.0)


def test_hankel_violation_rejected():
    with pytest.raises(InvalidMomentSequence):
        MomentSet([0, 1, 0, 0.5, 0, 1])


def test_free_cumulants_k123():
    assert free_cumulants_k123(point_mass_moments(0.0)) == (0.0, 0.0, 0.0)
    assert free_cumulants_k123(SC1) == pytest.approx((0, 1, 0))
    assert free_cumulants_k123(MP1) == pytest.approx((1, 1, 1))


# -- non-crossing partitions -----------------------------------------------------


def test_noncrossing_partition_counts():
    for n in range(1, 7):
        assert len(noncrossing_partitions(n)) == len(O.nc_partitions(n)) == O.CATALAN[n - 1]
    assert len(noncrossing_partitions(6)) == 132


def test_cumulant_examples():
    assert np.allclose(moments_to_free_cumulants([0, 1, 0, 2, 0, 5]), [0, 1, 0, 0, 0, 0], atol=1e-12)
    c = 1.3
    assert np.allclose(moments_to_free_cumulants([c ** k for k in range(1, 7)]), [c, 0, 0, 0, 0, 0],
                       atol=1e-12)
    assert np.allclose(free_cumulants_to_moments([1] * 6)[:3], [1, 2, 5])


def test_forward_sum_matches_bruteforce():
    rng = np.random.default_rng(3)
    for _ in range(5):
        k = rng.normal(size=6)
        assert np.allclose(free_cumulants_to_moments(k), O.moments_from_cumulants(k), atol=1e-12)


def test_cumulant_round_trip_random():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(1000):
        x = rng.normal(size=8)
        w = rng.dirichlet(np.ones(8))
        m = [float(np.sum(w * x ** k)) for k in range(1, 7)]
        back = free_cumulants_to_moments(moments_to_free_cumulants(m))
        worst = max(worst, float(np.max(np.abs(np.asarray(back) - m))))
        kap = moments_to_free_cumulants(m)
        again = moments_to_free_cumulants(free_cumulants_to_moments(kap))
        worst = max(worst, float(np.max(np.abs(np.asarray(again) - kap))))
    assert worst < 1e-10


# -- moment-level free convolution -----------------------------------------------


def test_additive_deconvolution_examples():
    assert np.allclose(deconvolve_moments_additive(SC1, SC1).raw, 0, atol=1e-12)
    sc2 = MomentSet(O.semicircle_moments(2.0))
    assert np.allclose(deconvolve_moments_additive(sc2, SC1).raw, SC1.raw, atol=1e-10)
    shifted = MomentSet(O.semicircle_moments(1.0, mean=0.8))
    assert np.allclose(deconvolve_moments_additive(shifted, SC1).raw, [0.8 ** k for k in range(1, 7)],
                       atol=1e-10)


def test_additive_round_trip():
    a = MomentSet(O.gaussian_moments(0.7, 0.2))
    b = moment_set(Empirical(np.random.default_rng(5).uniform(-1, 2, 40)))
    h = convolve_moments_additive(a, b)
    assert np.allclose(deconvolve_moments_additive(h, a).raw, b.raw, rtol=1e-10, atol=1e-10)


def test_multiplicative_deconvolution_examples():
    assert np.allclose(deconvolve_moments_multiplicative(MP1, MP1).raw, 1.0, atol=1e-10)
    c = 1.7
    scaled = MomentSet([c ** k * O.CATALAN[k - 1] for k in range(1, 7)])
    assert np.allclose(deconvolve_moments_multiplicative(scaled, MP1).raw, [c ** k for k in range(1, 7)],
                       rtol=1e-10)
    p = convolve_moments_multiplicative(MP1, MP1)
    assert np.allclose(deconvolve_moments_multiplicative(p, MP1).raw, MP1.raw, rtol=1e-10)


def test_mp_squared_matches_fuss_catalan():
    # MP(1,1) boxtimes MP(1,1) has Fuss-Catalan moments C(3n, n) / (2n + 1)
    p = convolve_moments_multiplicative(MP1, MP1)
    fuss = [math.comb(3 * n, n) / (2 * n + 1) for n in range(1, 7)]
    assert np.allclose(p.raw, fuss)


def test_multiplicative_needs_nonzero_mean():
    with pytest.raises(SingularLeadingCumulant):
        deconvolve_moments_multiplicative(MP1, SC1)


# -- mixed moments ---------------------------------------------------------------


def test_free_mixed_moment_examples():
    mu = MomentSet(O.gaussian_moments(1.0, 0.5))
    assert free_mixed_moment(mu, point_mass_moments(1.0), (1,), (1,)) == pytest.approx(mu.m(1))
    nu = MP1
    expect = mu.m(2) * nu.m(1) ** 2 + mu.m(1) ** 2 * nu.m(2) - mu.m(1) ** 2 * nu.m(1) ** 2
    assert free_mixed_moment(mu, nu, (1, 1), (1, 1)) == pytest.approx(expect)
    assert free_mixed_moment(SC1, MP1, (1, 1, 1), (1, 1, 1)) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(UnsupportedWord):
        free_mixed_moment(SC1, MP1, (1, 1, 1), (2, 1, 1))


def test_weingarten_values():
    assert weingarten_value(7, 1, "id") == pytest.approx(1 / 7)
    assert weingarten_value(2, 2, "1^2") == pytest.approx(1 / 3)
    assert weingarten_value(3, 3, "3") == pytest.approx(float(Fraction(1, 60)))
    with pytest.raises(DegenerateDimension):
        weingarten_value(2, 3, "3")
    with pytest.raises(DegenerateDimension):
        weingarten_value(1, 2, "2")


def test_weingarten_orthogonality():
    # sum_tau Wg(sigma tau^-1) N^{#cycles(tau)} = delta_{sigma, id}
    import itertools
    for N in (3, 4, 9):
        for r in (2, 3):
            for sig in itertools.permutations(range(r)):
                total = 0.0
                for tau in itertools.permutations(range(r)):
                    inv = [tau.index(i) for i in range(r)]
                    st = [sig[inv[i]] for i in range(r)]
                    ct = tuple(len(c) for c in O._cycles(st))
                    total += weingarten_value(N, r, ct) * N ** len(O._cycles(list(tau)))
                assert total == pytest.approx(1.0 if list(sig) == list(range(r)) else 0.0, abs=1e-12)


def test_trace_product_word():
    a = MomentSet([2.0, 5, 13, 35, 97, 275])
    b = MomentSet([3.0, 10, 35, 126, 462, 1716])
    assert finite_n_mixed_moment(a, b, "1,1", 6) == pytest.approx(6.0)


def test_identity_inputs():
    one = point_mass_moments(1.0)
    for N in (3, 5, 50):
        assert finite_n_mixed_moment(one, one, "1^2,1^2", N) == pytest.approx(1.0)
        assert finite_n_mixed_moment(one, one, "1^3,21^2", N) == pytest.approx(1.0)


@pytest.mark.parametrize("word", ["1,1", "1^2,1^2", "21,1^2", "1^3,1^3", "1^3,21^2"])
def test_finite_n_against_permutation_sum(word):
    from freedeconv.moments import WORD_PAIRS
    rng = np.random.default_rng(6)
    a = rng.uniform(0.2, 2, 5)
    b = rng.uniform(0.2, 2, 5)
    b /= b.mean()
    s, sp = WORD_PAIRS[word]
    got = finite_n_mixed_moment(moment_set(Empirical(a)), moment_set(Empirical(b)), word, 5)
    assert got == pytest.approx(O.haar_mixed_moment(a, b, s, sp), rel=1e-12)


def test_derived_words():
    rng = np.random.default_rng(7)
    a = rng.uniform(0.2, 2, 6)
    b = rng.uniform(0.2, 2, 6)
    b /= b.mean()
    ma, mb = moment_set(Empirical(a)), moment_set(Empirical(b))
    assert finite_n_mixed_moment(ma, mb, "1^3,2^3", 6) == pytest.approx(
        O.haar_mixed_moment(a, b ** 2, (1, 1, 1), (1, 1, 1)), rel=1e-12)
    assert finite_n_mixed_moment(ma, mb, "A2B2:1^2,1^2", 6) == pytest.approx(
        O.haar_mixed_moment(a ** 2, b ** 2, (1, 1), (1, 1)), rel=1e-12)


def test_length_three_needs_unit_trace():
    with pytest.raises(NormalizationViolated):
        finite_n_mixed_moment(MP1, MomentSet(O.gaussian_moments(1.0, 2.0)), "1^3,1^3", 5)
    with pytest.raises(UnsupportedWord):
        finite_n_mixed_moment(MP1, MP1, "2,2", 5)


def test_printed_length_two_formulas_agree():
    rng = np.random.default_rng(8)
    a = moment_set(Empirical(rng.uniform(0.2, 2, 5)))
    b = moment_set(Empirical(rng.uniform(0.2, 2, 5)))
    for w in ("1,1", "1^2,1^2", "21,1^2"):
        assert printed_trace_formula(a, b, w, 5) == pytest.approx(finite_n_mixed_moment(a, b, w, 5), rel=1e-12)


def test_printed_length_three_formulas_disagree():
    rng = np.random.default_rng(9)
    av = rng.uniform(0.2, 2, 5)
    bv = rng.uniform(0.2, 2, 5)
    bv /= bv.mean()
    a, b = moment_set(Empirical(av)), moment_set(Empirical(bv))
    for w in ("1^3,1^3", "1^3,21^2"):
        exact = finite_n_mixed_moment(a, b, w, 5)
        assert abs(printed_trace_formula(a, b, w, 5) - exact) > 1e-3 * abs(exact)


def test_freeness_limit():
    rng = np.random.default_rng(10)
    for _ in range(5):
        a = moment_set(Empirical(rng.uniform(-1, 2, 30)))
        b = moment_set(Empirical(rng.uniform(-1, 2, 30)))
        fin = finite_n_mixed_moment(a, b, "1^2,1^2", 1000)
        lim = free_mixed_moment(a, b, (1, 1), (1, 1))
        assert abs(fin - lim) <= 1e-4 * max(1.0, abs(lim))


def test_length_three_limit():
    rng = np.random.default_rng(11)
    a = moment_set(Empirical(rng.uniform(0.2, 2, 30)))
    bv = rng.uniform(0.2, 2, 30)
    b = moment_set(Empirical(bv / bv.mean()))
    fin = finite_n_mixed_moment(a, b, "1^3,1^3", 2000)
    assert fin == pytest.approx(free_limit_mixed_moment(a, b, "1^3,1^3"), rel=1e-5)
