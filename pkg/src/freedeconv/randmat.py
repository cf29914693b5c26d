"""Random-matrix simulation: Haar unitaries, the model ensembles and experiment sweeps.

Randomness comes from counter-based Philox streams keyed by (seed, index), so
sample i of an experiment is reproducible regardless of execution order.
"""
from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .additive_solver import additive_cauchy_estimator
from .bounds import (
    BoundInputs,
    bound,
    gue_concentration_constant,
    wishart_concentration_constant,
)
from .errors import DeconvError, UnsupportedWord
from .moments import WORD_PAIRS, MomentSet, NoiseModel, moment_set
from .multiplicative_solver import compute_profile, multiplicative_cauchy_estimator
from .transforms import Empirical, MarchenkoPastur, Semicircle, cauchy_smooth

log = logging.getLogger(__name__)

THREADS_ENV = "SPECDECONV_THREADS"


def rng_stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent Philox stream for (seed, index)."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(index)])
    return np.random.Generator(np.random.Philox(ss))


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# ensembles


def _ginibre(rng, n, m=None):
    m = n if m is None else m
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / math.sqrt(2.0)


def haar_unitary(N: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from the QR factorisation of a Ginibre matrix with phase-fixed R."""
    q, r = np.linalg.qr(_ginibre(rng, N))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_unitaries(N: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """A stack of ``count`` independent Haar unitaries."""
    z = (rng.standard_normal((count, N, N)) + 1j * rng.standard_normal((count, N, N))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def gue(N: int, variance: float, rng: np.random.Generator) -> np.ndarray:
    """(X + X*)/sqrt 2 with entries of X of variance 1/N, scaled to the given limit variance."""
    x = _ginibre(rng, N) / math.sqrt(N)
    return math.sqrt(variance) * (x + x.conj().T) / math.sqrt(2.0)


def wishart_factor(N: int, ratio: float, rng: np.random.Generator) -> np.ndarray:
    """Y of shape N x M, M = round(N/ratio), entries of variance 1/M, so Y Y* -> MP(ratio, 1)."""
    m = max(1, int(round(N / ratio)))
    return _ginibre(rng, N, m) / math.sqrt(m)


# ---------------------------------------------------------------------------
# model specification


@dataclass(frozen=True)
class ModelSpec:
    """Additive H = B + U A U* or multiplicative M = A^1/2 U B U* A^1/2.

    ``noise`` is ("gue", variance) or ("wishart", ratio); ``signal`` is
    ("gaussian-diagonal", mean, variance), ("shifted-wigner", center, variance)
    or ("identity",).
    """

    case: str
    N: int
    noise: tuple
    signal: tuple
    seed: int = 0

    def __post_init__(self):
        if self.case not in ("additive", "multiplicative"):
            raise ValueError("case must be 'additive' or 'multiplicative'")
        if int(self.N) < 2:
            raise ValueError("N must be at least 2")
        if self.noise[0] not in ("gue", "wishart") or not self.noise[1] > 0:
            raise ValueError(f"bad noise spec {self.noise!r}")
        if self.signal[0] not in ("gaussian-diagonal", "shifted-wigner", "identity"):
            raise ValueError(f"bad signal spec {self.signal!r}")
        if self.signal[0] != "identity" and not self.signal[2] > 0:
            raise ValueError("signal variance must be positive")

    def with_N(self, N: int) -> "ModelSpec":
        return ModelSpec(self.case, int(N), self.noise, self.signal, self.seed)

    # -- laws of the ensembles ----------------------------------------------

    def noise_law(self) -> NoiseModel:
        kind, p = self.noise[0], float(self.noise[1])
        if kind == "gue":
            return NoiseModel(Semicircle(0.0, p))
        mp = MarchenkoPastur(p, 1.0)
        return NoiseModel(mp, sup_norm=mp.edges[1])

    def signal_moments(self) -> MomentSet:
        kind = self.signal[0]
        if kind == "identity":
            return MomentSet(np.ones(6))
        mean, var = float(self.signal[1]), float(self.signal[2])
        if kind == "shifted-wigner":
            return moment_set(Semicircle(mean, var))
        # Gaussian raw moments via the centred ones 0, v, 0, 3v^2, 0, 15v^3
        cm = [1.0, 0.0, var, 0.0, 3 * var ** 2, 0.0, 15 * var ** 3]
        raw = [sum(math.comb(n, k) * mean ** (n - k) * cm[k] for k in range(n + 1)) for n in range(1, 7)]
        return MomentSet(raw)

    def concentration_constant(self) -> float:
        kind, p = self.noise[0], float(self.noise[1])
        if kind == "gue":
            return gue_concentration_constant(p)
        return wishart_concentration_constant(MarchenkoPastur(p, 1.0).edges[1])


def _signal_matrix(spec: ModelSpec, rng) -> np.ndarray:
    kind, N = spec.signal[0], int(spec.N)
    if kind == "identity":
        return np.eye(N)
    mean, var = float(spec.signal[1]), float(spec.signal[2])
    if kind == "gaussian-diagonal":
        return np.diag(mean + math.sqrt(var) * rng.standard_normal(N))
    return mean * np.eye(N) + gue(N, var, rng)


def sample_model(spec: ModelSpec, index: int = 0) -> tuple[Empirical, Empirical]:
    """Eigenvalues of the observation and of B for sample ``index``."""
    rng = rng_stream(spec.seed, index)
    N = int(spec.N)
    B = _signal_matrix(spec, rng)
    eig_b = np.linalg.eigvalsh(B)
    if spec.case == "additive":
        A = gue(N, float(spec.noise[1]), rng) if spec.noise[0] == "gue" else _wishart(spec, rng)
        U = haar_unitary(N, rng)
        H = B + U @ A @ U.conj().T
        return Empirical(np.linalg.eigvalsh((H + H.conj().T) / 2.0)), Empirical(eig_b)
    if spec.noise[0] != "wishart":
        raise ValueError("the multiplicative model needs Wishart noise")
    Y = wishart_factor(N, float(spec.noise[1]), rng)
    if spec.signal[0] == "identity":
        M = Y @ Y.conj().T
    else:
        U = haar_unitary(N, rng)
        C = U @ B @ U.conj().T
        if Y.shape[1] == N:
            # A^1/2 C A^1/2 and Y* C Y share their spectrum when Y is square
            M = Y.conj().T @ C @ Y
        else:
            w, v = np.linalg.eigh(Y @ Y.conj().T)
            root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
            M = root @ C @ root
    return Empirical(np.linalg.eigvalsh((M + M.conj().T) / 2.0)), Empirical(eig_b)


def _wishart(spec, rng):
    y = wishart_factor(int(spec.N), float(spec.noise[1]), rng)
    return y @ y.conj().T


# ---------------------------------------------------------------------------
# Monte-Carlo oracle for the Haar mixed moments


def jackknife_se(values) -> float:
    """Delete-one jackknife standard error of the mean."""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < 2:
        return float("nan")
    loo = (v.sum() - v) / (n - 1)
    return float(math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))


def monte_carlo_mixed_moment(a_diag, b_diag, word_pair, samples: int, rng: np.random.Generator,
                             batch: int = 5000) -> tuple[float, float]:
    """Mean of tr(A^{s1} U B^{s'1} U* A^{s2} ...) over Haar U, with its jackknife SE."""
    if isinstance(word_pair, str):
        if word_pair not in WORD_PAIRS:
            raise UnsupportedWord(f"unsupported word pair {word_pair!r}")
        s, sp = WORD_PAIRS[word_pair]
    else:
        s, sp = (tuple(int(x) for x in w) for w in word_pair)
    if len(s) != len(sp) or not 1 <= len(s) <= 3:
        raise UnsupportedWord("words must have equal length between 1 and 3")
    a = np.asarray(a_diag, dtype=float)
    b = np.asarray(b_diag, dtype=float)
    N = a.size
    vals = np.empty(samples)
    done = 0
    while done < samples:
        k = min(batch, samples - done)
        U = haar_unitaries(N, k, rng)
        Ud = U.conj().transpose(0, 2, 1)
        prod = np.broadcast_to(np.eye(N, dtype=complex), (k, N, N))
        for x, y in zip(s, sp):
            prod = (prod * (a ** x)[None, None, :]) @ (U * (b ** y)[None, None, :]) @ Ud
        vals[done:done + k] = np.trace(prod, axis1=1, axis2=2).real / N
        done += k
    return float(vals.mean()), jackknife_se(vals)


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class ExperimentResult:
    N: int
    errors: np.ndarray
    failed: tuple
    mse: float
    sqrt_mse: float
    se: float
    mse_bound: Optional[float]
    bound_sqrt_mse: Optional[float]
    ratio: Optional[float]
    samples: int
    eta: float
    elapsed: float = 0.0
    bound_report: object = field(default=None, repr=False)


def default_grid(spec: ModelSpec, eta: float, num: int = 512) -> np.ndarray:
    """Window around the limiting support of the observation, padded by 5 eta."""
    mom = spec.signal_moments()
    mean, sd = mom.m(1), mom.sigma
    if spec.case == "additive":
        noise_sd = math.sqrt(float(spec.noise[1]))
        lo, hi = mean - 4.0 * (sd + noise_sd), mean + 4.0 * (sd + noise_sd)
    else:
        lo, hi = mean - 4.0 * sd, mean + 4.0 * sd
    return np.linspace(lo - 5.0 * eta, hi + 5.0 * eta, num)


def bound_inputs_for(spec: ModelSpec, kappa: Optional[float] = None) -> BoundInputs:
    noise = spec.noise_law()
    A = noise.moments if noise.sup_norm is None else noise.moments.with_sup_norm(noise.sup_norm)
    return BoundInputs(spec.case, int(spec.N), A, spec.signal_moments(), A,
                       C_A=spec.concentration_constant(), c=0.0, kappa=kappa)


def _l2(values, reference, grid) -> float:
    return float(math.sqrt(np.trapezoid((values - reference) ** 2, grid)))


def _one_sample(spec, index, eta, grid, allow_below_threshold):
    obs, eig_b = sample_model(spec, index)
    noise = spec.noise_law()
    if spec.case == "additive":
        est = additive_cauchy_estimator(obs, noise, eta=eta, grid=grid)
    else:
        est, _ = multiplicative_cauchy_estimator(obs, noise, eta, grid=grid,
                                                 allow_below_threshold=allow_below_threshold,
                                                 negative="clip")
    ref = cauchy_smooth(eig_b, eta, grid)
    return _l2(est.values, ref, grid), est.all_converged


def run_experiment(spec: ModelSpec, samples: int, eta: Optional[float] = None,
                   kappa: Optional[float] = None, grid=None, allow_below_threshold: bool = True,
                   threads: Optional[int] = None) -> ExperimentResult:
    """Monte-Carlo L2 error of the stage-1 estimate against mu_B * Cauchy[eta].

    Additive: eta defaults to 2 sqrt(2) sigma_1.  Multiplicative: pass
    ``kappa`` (eta = kappa sigma~_1); the same kappa is used for the bound.
    Failed samples are recorded and excluded from the MSE.  The bound's
    kappa is certified for the limiting model, while each sample recomputes
    eta_0 from its own spectrum; ``allow_below_threshold`` (default on) keeps
    samples whose empirical eta_0 lands just above the line.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    t0 = time.perf_counter()
    noise = spec.noise_law()
    if spec.case == "additive":
        if eta is None:
            eta = 2.0 * math.sqrt(2.0) * noise.sigma
    else:
        st1 = math.sqrt(noise.moments.sigma_tilde_sq)
        if kappa is None and eta is None:
            raise ValueError("the multiplicative experiment needs kappa or eta")
        if kappa is None:
            kappa = eta / st1
        eta = kappa * st1
    eta = float(eta)
    grid = default_grid(spec, eta) if grid is None else np.asarray(grid, dtype=float)

    def job(i):
        try:
            return _one_sample(spec, i, eta, grid, allow_below_threshold)
        except DeconvError as exc:
            log.warning("sample %d failed: %s", i, exc)
            return None

    n_threads = threads if threads is not None else thread_count()
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            results = list(pool.map(job, range(samples)))
    else:
        results = [job(i) for i in range(samples)]
    failed = tuple(i for i, r in enumerate(results) if r is None or not r[1])
    errs = np.array([r[0] for i, r in enumerate(results) if r is not None and i not in failed])
    mse = float(np.mean(errs ** 2)) if errs.size else float("nan")
    sqrt_mse = math.sqrt(mse) if errs.size else float("nan")
    # jackknife of sqrt(mean e^2)
    if errs.size > 1:
        sq = errs ** 2
        loo = np.sqrt((sq.sum() - sq) / (sq.size - 1))
        se = float(math.sqrt((sq.size - 1) / sq.size * np.sum((loo - loo.mean()) ** 2)))
    else:
        se = float("nan")
    report = None
    mse_bound = bound_sqrt = ratio = None
    try:
        report = bound(bound_inputs_for(spec, kappa))
        mse_bound = report.mse_bound
    except DeconvError as exc:
        log.warning("bound unavailable: %s", exc)
    if mse_bound is not None:
        bound_sqrt = math.sqrt(mse_bound)
        ratio = bound_sqrt / sqrt_mse if sqrt_mse > 0 else math.inf
    return ExperimentResult(int(spec.N), errs, failed, mse, sqrt_mse, se, mse_bound, bound_sqrt,
                            ratio, samples, eta, time.perf_counter() - t0, report)


# ---------------------------------------------------------------------------
# presets


PRESETS = {
    "fig1": ModelSpec("additive", 500, ("gue", 1.0), ("gaussian-diagonal", 0.0, 1.0), seed=1),
    "fig2": ModelSpec("additive", 50, ("gue", 1.0), ("gaussian-diagonal", 0.0, 1.0), seed=2),
    "fig3": ModelSpec("multiplicative", 500, ("wishart", 1.0), ("shifted-wigner", 1.0, 0.25), seed=3),
    "fig4": ModelSpec("multiplicative", 100, ("wishart", 1.0), ("shifted-wigner", 1.0, 0.25), seed=4),
}
FIG3_ETA = 4.2
FIG4_KAPPA = 4.4


def preset(name: str, N: Optional[int] = None, seed: Optional[int] = None) -> ModelSpec:
    try:
        spec = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    if N is not None:
        spec = spec.with_N(N)
    if seed is not None:
        spec = ModelSpec(spec.case, spec.N, spec.noise, spec.signal, int(seed))
    return spec


def fig3_profile(spec: Optional[ModelSpec] = None):
    """Stability profile of the limiting Fig-3 model (mu_M from free convolution of the laws)."""
    from .moments import convolve_moments_multiplicative
    spec = spec or PRESETS["fig3"]
    noise = spec.noise_law()
    return compute_profile(noise, convolve_moments_multiplicative(noise.moments, spec.signal_moments()))
