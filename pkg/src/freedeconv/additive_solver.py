"""Additive subordination on a horizontal line and the additive Cauchy estimator.

For H = B + U A U* with known noise law mu_1 of A, the subordination function
omega_3 is the unique fixed point of

    K_z(w) = z - h_{mu_1}(w - 1/m_H(w) - z)

on Im w >= 3 Im z / 4 whenever Im z >= 2 sqrt(2) sigma_1.  The estimator of
mu_B * Cauchy[eta] is then Im m_H(omega_3(t + i eta)) / pi.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import DomainEscape, DomainViolation, NotConverged, ZeroDenominator
from .moments import NoiseModel
from .transforms import Atomic, Empirical, Measure

log = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 500
DEFAULT_GRID_POINTS = 512
_TINY = 1e-300

StieltjesLike = Union[Measure, Callable]


@dataclass(frozen=True)
class SubordinationPoint:
    """Converged (or last) subordination pair at a single point z."""

    z: complex
    omega1: complex
    omega3: complex
    iterations: int
    residual: float
    converged: bool


@dataclass(frozen=True, eq=False)
class CauchyEstimate:
    """Stage-1 estimate of mu_B * Cauchy[eta] sampled on a uniform grid."""

    eta: float
    grid: np.ndarray
    values: np.ndarray
    points: tuple = ()
    case: str = "additive"

    @property
    def converged(self) -> np.ndarray:
        return np.array([p.converged for p in self.points], dtype=bool)

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged)) if self.points else True

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])


def as_evaluator(m) -> Callable:
    """Turn a Measure or a callable into a Stieltjes evaluator."""
    if isinstance(m, Measure):
        return m.stieltjes
    if callable(m):
        return m
    raise TypeError("expected a Measure or a callable Stieltjes transform")


def scalar_evaluator(m) -> Callable:
    """Single-point ``complex -> complex`` Stieltjes evaluator."""
    if isinstance(m, Measure):
        return m.scalar_stieltjes()
    if callable(m):
        return lambda z: complex(m(z))
    raise TypeError("expected a Measure or a callable Stieltjes transform")


def scalar_h(noise: NoiseModel) -> Callable:
    """Single-point h-transform of the noise law, h(u) = -1/m(u) - u."""
    m = noise.measure.scalar_stieltjes()
    return lambda u: -1.0 / m(u) - u


def as_noise_model(mu1) -> NoiseModel:
    return mu1 if isinstance(mu1, NoiseModel) else NoiseModel(mu1)


def make_grid(grid=None, support=None, eta=None, num=DEFAULT_GRID_POINTS) -> np.ndarray:
    """Uniform grid from an explicit array, a (start, stop, num) triple or a support window."""
    if grid is None:
        lo, hi = support
        return np.linspace(lo - 5.0 * eta, hi + 5.0 * eta, num)
    if isinstance(grid, tuple) and len(grid) == 3:
        return np.linspace(float(grid[0]), float(grid[1]), int(grid[2]))
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid needs at least two points")
    d = np.diff(grid)
    if np.any(d <= 0) or np.max(np.abs(d - d[0])) > 1e-9 * max(1.0, abs(d[0])):
        raise ValueError("grid must be uniform and increasing")
    return grid


def kz_map_additive(w, z, m_H, mu1) -> complex:
    """K_z(w) = z - h_{mu_1}(w - 1/m_H(w) - z)."""
    m_h = as_evaluator(m_H)
    noise = as_noise_model(mu1)
    m = m_h(w)
    if np.any(np.abs(m) < _TINY):
        raise ZeroDenominator("m_H(w) vanishes")
    inner = w - 1.0 / m - z
    if np.any(np.imag(inner) <= 0):
        raise DomainEscape(f"inner argument left the upper half-plane at w={w!r}")
    return z - noise.h(inner)


def _check_line(z, sigma1, relaxed):
    floor = (2.0 if relaxed else 2.0 * np.sqrt(2.0)) * sigma1
    if np.imag(z) < floor * (1.0 - 1e-12):
        raise DomainViolation(
            f"Im z = {np.imag(z):.6g} is below the admissible line {floor:.6g}")
    if relaxed:
        warnings.warn("using the 2 sigma_1 line; convergence is only known for semicircular noise",
                      RuntimeWarning, stacklevel=3)


def _is_degenerate(noise: NoiseModel) -> bool:
    return noise.sigma == 0.0


def solve_subordination_additive(z, m_H, mu1, tol: Optional[float] = None,
                                 max_iter: int = DEFAULT_MAX_ITER, w0=None,
                                 relaxed: bool = False, raise_on_failure: bool = True
                                 ) -> SubordinationPoint:
    """Fixed-point iteration w <- K_z(w) from w0 (default z).

    ``mu1`` must be centred; :func:`additive_cauchy_estimator` takes care of
    that.  With ``raise_on_failure=False`` an unconverged point is returned
    with ``converged=False`` instead of raising :class:`NotConverged`.
    """
    z = complex(z)
    noise = as_noise_model(mu1)
    m_h = as_evaluator(m_H)
    if tol is None:
        tol = 1e-12 * max(1.0, abs(z))
    _check_line(z, noise.sigma, relaxed)
    if _is_degenerate(noise):
        shift = -noise.moments.m(1)
        w = z - shift
        return SubordinationPoint(z, -1.0 / m_h(w), w, 1, 0.0, True)
    w = z if w0 is None else complex(w0)
    residual = np.inf
    n = 0
    for n in range(1, max_iter + 1):
        try:
            w_new = complex(kz_map_additive(w, z, m_h, noise))
        except (DomainEscape, ZeroDenominator) as exc:
            if raise_on_failure:
                raise NotConverged(str(exc), last=w, residual=residual) from exc
            return SubordinationPoint(z, complex("nan"), w, n, float(residual), False)
        residual = abs(w_new - w)
        w = w_new
        if residual <= tol:
            break
    omega1 = w - 1.0 / complex(m_h(w)) - z
    ident = abs(omega1 + z - w + 1.0 / complex(noise.stieltjes(omega1)))
    converged = residual <= tol
    if not converged and raise_on_failure:
        raise NotConverged(f"no convergence after {max_iter} iterations at z={z}",
                           last=w, residual=residual)
    return SubordinationPoint(z, omega1, w, n, float(max(residual, ident) if converged else residual),
                              converged)


def _solve_line(zs, m_h, noise, tol, max_iter, relaxed, warm_start):
    points = []
    prev = None
    for z in zs:
        start = prev if (warm_start and prev is not None) else None
        p = solve_subordination_additive(z, m_h, noise, tol=tol, max_iter=max_iter, w0=start,
                                         relaxed=relaxed, raise_on_failure=False)
        if p.converged:
            prev = p.omega3
        points.append(p)
    return points


def additive_cauchy_estimator(eigsH, mu1, eta: Optional[float] = None, grid=None,
                              tol: Optional[float] = None, max_iter: int = DEFAULT_MAX_ITER,
                              relaxed: bool = False, warm_start: bool = True,
                              num: int = DEFAULT_GRID_POINTS) -> CauchyEstimate:
    """Additive Cauchy estimator of mu_B on the line Im z = eta.

    ``eigsH`` is an :class:`Empirical` spectrum of H, or any Measure /
    Stieltjes callable standing in for mu_H.  A non-centred noise law is
    centred internally and the observation shifted accordingly, so the grid
    and output refer to B itself.  ``eta`` defaults to 2 sqrt(2) sigma_1.
    """
    noise = as_noise_model(mu1)
    shift = noise.moments.m(1)
    sigma1 = noise.sigma
    if eta is None:
        eta = 2.0 * np.sqrt(2.0) * sigma1
        if eta == 0.0:
            raise DomainViolation("eta must be given when the noise is degenerate")
    eta = float(eta)
    m_h_raw = as_evaluator(eigsH)
    if shift != 0.0:
        centred = NoiseModel(noise.measure.shift(-shift), sup_norm=noise.sup_norm)
        m_h = lambda w: m_h_raw(np.asarray(w) + shift)
    else:
        centred, m_h = noise, m_h_raw
    if grid is None:
        if not isinstance(eigsH, Measure):
            raise ValueError("a grid is required when m_H is a bare callable")
        lo, hi = eigsH.support()
        grid = make_grid(None, (lo - shift, hi - shift), eta, num)
    else:
        grid = make_grid(grid)
    zs = grid + 1j * eta
    points = _solve_line(zs, m_h, centred, tol, max_iter, relaxed, warm_start)
    omega3 = np.array([p.omega3 for p in points])
    values = np.imag(m_h(omega3)) / np.pi
    values = np.where(np.isfinite(values), values, 0.0)
    values = np.clip(values, 0.0, None)
    n_bad = sum(not p.converged for p in points)
    if n_bad:
        log.warning("%d of %d grid points did not converge", n_bad, len(points))
    return CauchyEstimate(eta, grid, values, tuple(points), "additive")
