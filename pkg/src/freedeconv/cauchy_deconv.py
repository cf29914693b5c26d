"""Classical deconvolution of a Cauchy-smoothed density, and a Wasserstein-1 diagnostic.

The stage-1 estimate approximates mu_B * Cauchy[eta].  Its Fourier transform
is that of mu_B damped by exp(-eta |xi|), so :func:`fourier_deconvolve`
multiplies by exp(eta |xi|) below a cutoff frequency.  :func:`sparse_deconvolve`
instead fits a nonnegative combination of Cauchy kernels with an l1 penalty.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .additive_solver import CauchyEstimate
from .errors import EmptySpectrum, NyquistViolation
from .transforms import (
    Atomic,
    Empirical,
    GridDensity,
    MarchenkoPastur,
    Measure,
    Semicircle,
    cauchy_density,
)

log = logging.getLogger(__name__)

MIN_GRID_POINTS = 64
DEFAULT_MSE = 1e-6
MASS_WARN = 2e-2
POLISH_EVERY = 20


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    """Deconvolved density on a uniform grid.

    ``mass`` is the trapezoid mass before renormalisation; ``values`` have
    unit mass unless the input was identically zero.
    """

    grid: np.ndarray
    values: np.ndarray
    mass: float
    cutoff: float

    def to_measure(self) -> GridDensity:
        return GridDensity.from_function(lambda x: np.interp(x, self.grid, self.values), self.grid)


@dataclass(frozen=True, eq=False)
class AtomicEstimate:
    atoms: np.ndarray
    weights: np.ndarray
    lam: float
    objective: float
    sweeps: int
    history: tuple = ()

    def to_measure(self) -> Atomic:
        keep = self.weights > 0
        w = self.weights[keep]
        if w.size == 0:
            raise EmptySpectrum("all atom weights vanish")
        return Atomic(self.atoms[keep], w / w.sum())


def _grid_and_values(est):
    if isinstance(est, CauchyEstimate):
        return np.asarray(est.grid, float), np.asarray(est.values, float), float(est.eta)
    grid, values, eta = est
    return np.asarray(grid, float), np.asarray(values, float), float(eta)


def nyquist(spacing: float) -> float:
    return np.pi / spacing


def choose_cutoff(eta: float, mse_estimate: float, nyquist_freq: Optional[float] = None) -> float:
    """xi_c = min(|log mse| / (2 eta), 0.9 * Nyquist)."""
    if not mse_estimate > 0:
        raise ValueError("mse_estimate must be positive")
    xi = abs(np.log(mse_estimate)) / (2.0 * eta)
    if nyquist_freq is not None:
        xi = min(xi, 0.9 * nyquist_freq)
    return float(xi)


TAPERS = ("sharp", "hann")


def _taper(u: np.ndarray, taper: str) -> np.ndarray:
    if taper == "sharp":
        return (u <= 1.0).astype(float)
    if taper == "hann":
        return np.where(u <= 1.0, 0.5 * (1.0 + np.cos(np.pi * np.minimum(u, 1.0))), 0.0)
    raise ValueError(f"taper must be one of {TAPERS}")


def fourier_deconvolve(est: Union[CauchyEstimate, tuple], cutoff: Union[float, str] = "auto",
                       mse_estimate: Optional[float] = None, taper: str = "sharp") -> DensityEstimate:
    """Divide out the Cauchy[eta] factor exp(-eta|xi|) below ``cutoff``.

    ``est`` is a :class:`CauchyEstimate` or a ``(grid, values, eta)`` triple.
    Frequencies are xi_k = 2 pi k / (G dt).  With ``cutoff="auto"`` the rule
    of :func:`choose_cutoff` is applied to ``mse_estimate`` (default 1e-6).
    ``taper="hann"`` replaces the indicator by a raised cosine on [0, cutoff],
    which suppresses the sinc ringing of the sharp window.
    """
    if taper not in TAPERS:
        raise ValueError(f"taper must be one of {TAPERS}")
    grid, values, eta = _grid_and_values(est)
    if grid.size < MIN_GRID_POINTS:
        raise ValueError(f"need at least {MIN_GRID_POINTS} grid points")
    dt = float(grid[1] - grid[0])
    nyq = nyquist(dt)
    if isinstance(cutoff, str):
        if cutoff != "auto":
            raise ValueError("cutoff must be a number or 'auto'")
        cutoff = choose_cutoff(eta, DEFAULT_MSE if mse_estimate is None else mse_estimate, nyq)
    cutoff = float(cutoff)
    if cutoff >= nyq:
        raise NyquistViolation(f"cutoff {cutoff:.6g} is not below the Nyquist frequency {nyq:.6g}")
    if np.all(np.abs(values) < 1e-300):
        log.warning("input is identically zero; renormalisation skipped")
        return DensityEstimate(grid, np.zeros_like(values), 0.0, cutoff)
    xi = 2.0 * np.pi * np.fft.fftfreq(grid.size, d=dt)
    u = np.abs(xi) / cutoff if cutoff > 0 else np.where(xi == 0, 0.0, np.inf)
    gain = np.exp(eta * np.minimum(np.abs(xi), cutoff)) * _taper(u, taper)
    out = np.real(np.fft.ifft(np.fft.fft(values) * gain))
    out = np.clip(out, 0.0, None)
    mass = float(np.trapezoid(out, grid))
    if mass <= 0:
        raise EmptySpectrum("deconvolved density has no positive mass")
    if abs(mass - 1.0) > MASS_WARN:
        log.info("mass before renormalisation is %.4g", mass)
    return DensityEstimate(grid, out / mass, mass, cutoff)


def sparse_deconvolve(est: Union[CauchyEstimate, tuple], lam: float, atom_grid,
                      max_sweeps: int = 100_000, tol: float = 1e-12) -> AtomicEstimate:
    """Nonnegative l1-penalised fit of Cauchy[eta] kernels on ``atom_grid``.

    Minimises dt * ||sum_j w_j Cauchy[eta](. - x_j) - c_hat||^2 + lam * sum_j w_j
    over w >= 0 by cyclic coordinate descent with exact coordinate updates.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if lam == 0:
        warnings.warn("lam = 0: sparsity is not enforced", RuntimeWarning, stacklevel=2)
    grid, values, eta = _grid_and_values(est)
    atoms = np.asarray(atom_grid, dtype=float).reshape(-1)
    dt = float(grid[1] - grid[0])
    K = cauchy_density(grid[:, None], eta, atoms[None, :])
    gram = dt * (K.T @ K)
    rhs = dt * (K.T @ values)
    c0 = dt * float(values @ values)
    diag = np.diag(gram).copy()
    w = np.zeros(atoms.size)
    gw = np.zeros(atoms.size)

    def objective():
        return float(w @ gw - 2.0 * rhs @ w + c0 + lam * w.sum())

    obj = objective()
    history = [obj]
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for j in range(atoms.size):
            if diag[j] <= 0:
                continue
            grad = 2.0 * (gw[j] - rhs[j]) + lam
            new = max(0.0, w[j] - grad / (2.0 * diag[j]))
            if new != w[j]:
                gw += gram[:, j] * (new - w[j])
                w[j] = new
        if sweeps % POLISH_EVERY == 0:
            _polish(w, gw, gram, rhs, lam, objective)
        new_obj = objective()
        if new_obj > obj + 1e-12 * max(1.0, abs(obj)):
            raise AssertionError("coordinate descent increased the objective")
        history.append(new_obj)
        if obj - new_obj < tol:
            obj = new_obj
            break
        obj = new_obj
    return AtomicEstimate(atoms, w, float(lam), obj, sweeps, tuple(history))


def _polish(w, gw, gram, rhs, lam, objective):
    """Exact solve on the current support; kept only if feasible and not worse.

    Coordinate descent crawls along the nearly collinear kernels of a fine
    atom grid, so the support-restricted optimum is tried periodically.
    """
    support = np.nonzero(w > 0)[0]
    cand = None
    # drop coordinates that turn negative and re-solve (an active-set pass)
    while support.size:
        sub = gram[np.ix_(support, support)]
        try:
            cand = np.linalg.solve(sub, rhs[support] - 0.5 * lam)
        except np.linalg.LinAlgError:
            return
        if not np.all(np.isfinite(cand)):
            return
        if np.all(cand >= 0):
            break
        support = support[cand > 0]
        cand = None
    if cand is None:
        return
    before = objective()
    old_w, old_gw = w.copy(), gw.copy()
    w[:] = 0.0
    w[support] = cand
    gw[:] = gram[:, support] @ cand
    if objective() > before:
        w[:], gw[:] = old_w, old_gw


# ---------------------------------------------------------------------------
# Wasserstein-1


def _discretise(measure: Measure, num: int = 8193) -> Measure:
    if isinstance(measure, (Semicircle, MarchenkoPastur)):
        lo, hi = measure.support()
        return GridDensity.from_function(measure.density, np.linspace(lo, hi, num))
    if isinstance(measure, DensityEstimate):
        return measure.to_measure()
    return measure


def _cdf_parts(measure: Measure):
    """Return (breakpoints, cdf values at them, is_step)."""
    if isinstance(measure, Empirical):
        x = measure.eigenvalues
        return x, np.arange(1, x.size + 1) / x.size, True
    if isinstance(measure, Atomic):
        order = np.argsort(measure.locations, kind="stable")
        return measure.locations[order], np.cumsum(measure.weights[order]), True
    if isinstance(measure, GridDensity):
        return measure.grid, measure.cdf(measure.grid), False
    raise TypeError(f"unsupported measure {type(measure).__name__}")


def _eval_cdf(parts, x):
    pts, vals, step = parts
    if step:
        idx = np.searchsorted(pts, x, side="right")
        return np.where(idx > 0, vals[np.maximum(idx - 1, 0)], 0.0)
    return np.interp(x, pts, vals, left=0.0, right=vals[-1])


def _abs_linear_integral(d0, d1, h):
    same = d0 * d1 >= 0
    a0, a1 = np.abs(d0), np.abs(d1)
    denom = np.where(a0 + a1 > 0, a0 + a1, 1.0)
    return np.where(same, 0.5 * (a0 + a1) * h, 0.5 * (d0 * d0 + d1 * d1) / denom * h)


def wasserstein1(mu: Measure, nu: Measure) -> float:
    """W1 = int |F_mu - F_nu| dx, exact between the union of CDF breakpoints."""
    pa, pb = _cdf_parts(_discretise(mu)), _cdf_parts(_discretise(nu))
    x = np.union1d(pa[0], pb[0])
    if x.size < 2:
        return 0.0
    h = np.diff(x)
    # step CDFs are constant on [x_k, x_{k+1}); grid CDFs are linear there
    left = x[:-1]
    right_a = _eval_cdf(pa, x[1:]) if not pa[2] else _eval_cdf(pa, left)
    right_b = _eval_cdf(pb, x[1:]) if not pb[2] else _eval_cdf(pb, left)
    d0 = _eval_cdf(pa, left) - _eval_cdf(pb, left)
    d1 = right_a - right_b
    return float(np.sum(_abs_linear_integral(d0, d1, h)))
