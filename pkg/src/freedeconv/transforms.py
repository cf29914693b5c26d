"""Probability measures on the real line and their upper half-plane transforms.

Every measure exposes a vectorised Stieltjes transform
``m(z) = int dmu(t) / (t - z)`` together with raw moments and a support
interval.  The derived transforms (reciprocal Cauchy, h-transform, the
size-biased "tilde" variants and the log h-transform) are built on top of it
by :func:`transform_eval`.
"""
from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import (
    InvalidMeasure,
    NonPositiveImaginaryPart,
    UnsupportedKind,
    ZeroDenominator,
)

MASS_TOL = 1e-9
_TINY = 1e-300
_CHUNK = 1 << 22


def _as_complex(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise NonPositiveImaginaryPart("Stieltjes transforms need Im z > 0")
    return z


def _catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


def _weighted_resolvent(points, weights, z):
    """Return sum_j w_j / (x_j - z) for an array of z, in memory-bounded chunks."""
    z = np.asarray(z)
    flat = z.reshape(-1)
    out = np.empty(flat.shape, dtype=complex)
    step = max(1, _CHUNK // max(1, points.size))
    for start in range(0, flat.size, step):
        zz = flat[start:start + step]
        out[start:start + step] = weights @ (1.0 / (points[:, None] - zz[None, :]))
    return out.reshape(z.shape)


class Measure:
    """Common interface of the four measure representations."""

    def stieltjes(self, z):
        raise NotImplementedError

    def raw_moment(self, k: int) -> float:
        raise NotImplementedError

    def scalar_stieltjes(self):
        """Return a fast ``complex -> complex`` evaluator for single points."""
        f = self.stieltjes
        return lambda z: complex(f(np.array([z], dtype=complex))[0])

    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def raw_moments(self, order: int = 6) -> np.ndarray:
        return np.array([self.raw_moment(k) for k in range(1, order + 1)], dtype=float)

    @property
    def mean(self) -> float:
        return self.raw_moment(1)

    @property
    def variance(self) -> float:
        return self.raw_moment(2) - self.raw_moment(1) ** 2

    @property
    def sup_norm(self) -> float:
        lo, hi = self.support()
        return max(abs(lo), abs(hi))

    def dilate(self, c: float) -> "Measure":
        """Law of c*X for c > 0."""
        raise NotImplementedError

    def shift(self, c: float) -> "Measure":
        """Law of X + c."""
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Atomic(Measure):
    """Finite mixture of Dirac masses."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        loc = np.atleast_1d(np.asarray(self.locations, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if loc.shape != w.shape or loc.size == 0:
            raise InvalidMeasure("atom locations and weights must be non-empty and aligned")
        if np.any(w < 0) or not np.all(np.isfinite(loc)):
            raise InvalidMeasure("atomic weights must be nonnegative and locations finite")
        if abs(w.sum() - 1.0) > MASS_TOL:
            raise InvalidMeasure(f"atomic weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "weights", w)

    @classmethod
    def dirac(cls, a: float = 0.0) -> "Atomic":
        return cls(np.array([a]), np.array([1.0]))

    def stieltjes(self, z):
        z = _as_complex(z)
        return _weighted_resolvent(self.locations, self.weights, z)

    def scalar_stieltjes(self):
        loc, w = self.locations, self.weights
        return lambda z: complex(w @ (1.0 / (loc - z)))

    def raw_moment(self, k):
        return float(self.weights @ self.locations ** k)

    def support(self):
        return float(self.locations.min()), float(self.locations.max())

    def dilate(self, c):
        return Atomic(self.locations * c, self.weights)

    def shift(self, c):
        return Atomic(self.locations + c, self.weights)


@dataclass(frozen=True, eq=False)
class Empirical(Measure):
    """Spectral distribution (1/N) sum delta_{lambda_i}."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.sort(np.atleast_1d(np.asarray(self.eigenvalues, dtype=float)))
        if ev.size == 0:
            raise InvalidMeasure("no eigenvalues")
        if not np.all(np.isfinite(ev)):
            raise InvalidMeasure("eigenvalues must be finite")
        object.__setattr__(self, "eigenvalues", ev)

    def stieltjes(self, z):
        z = _as_complex(z)
        n = self.eigenvalues.size
        return _weighted_resolvent(self.eigenvalues, np.full(n, 1.0 / n), z)

    def scalar_stieltjes(self):
        ev = self.eigenvalues
        return lambda z: complex(np.mean(1.0 / (ev - z)))

    def raw_moment(self, k):
        return float(np.mean(self.eigenvalues ** k))

    def support(self):
        return float(self.eigenvalues[0]), float(self.eigenvalues[-1])

    def dilate(self, c):
        return Empirical(self.eigenvalues * c)

    def shift(self, c):
        return Empirical(self.eigenvalues + c)

    def __len__(self):
        return self.eigenvalues.size


@dataclass(frozen=True, eq=False)
class Semicircle(Measure):
    """Wigner semicircle law with given center and variance."""

    center: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if not self.variance > 0:
            raise InvalidMeasure("semicircle variance must be positive")

    @property
    def radius(self):
        return 2.0 * np.sqrt(self.variance)

    def stieltjes(self, z):
        z = _as_complex(z)
        u = z - self.center
        r = self.radius
        # product of principal roots keeps the cut on [-r, r] and Im m > 0
        root = np.sqrt(u - r) * np.sqrt(u + r)
        return (-u + root) / (2.0 * self.variance)

    def scalar_stieltjes(self):
        c, r, v = self.center, self.radius, self.variance

        def m(z):
            u = z - c
            return (-u + cmath.sqrt(u - r) * cmath.sqrt(u + r)) / (2.0 * v)
        return m

    def density(self, t):
        t = np.asarray(t, dtype=float) - self.center
        r2 = self.radius ** 2
        return np.sqrt(np.clip(r2 - t * t, 0.0, None)) / (2.0 * np.pi * self.variance)

    def raw_moment(self, k):
        s = np.sqrt(self.variance)
        return float(sum(comb(k, j) * self.center ** (k - j) * s ** j * _catalan(j // 2)
                         for j in range(0, k + 1, 2)))

    def support(self):
        return self.center - self.radius, self.center + self.radius

    def dilate(self, c):
        return Semicircle(self.center * c, self.variance * c * c)

    def shift(self, c):
        return Semicircle(self.center + c, self.variance)


@dataclass(frozen=True, eq=False)
class MarchenkoPastur(Measure):
    """Marchenko-Pastur law with aspect ratio ``ratio`` and scale ``scale``.

    Mean ``scale``, variance ``ratio * scale**2``; an atom of mass
    ``1 - 1/ratio`` sits at zero when ``ratio > 1``.
    """

    ratio: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not (self.ratio > 0 and self.scale > 0):
            raise InvalidMeasure("Marchenko-Pastur parameters must be positive")

    @property
    def edges(self):
        s, c = self.scale, self.ratio
        return s * (1 - np.sqrt(c)) ** 2, s * (1 + np.sqrt(c)) ** 2

    def stieltjes(self, z):
        z = _as_complex(z)
        c, s = self.ratio, self.scale
        lo, hi = self.edges
        root = np.sqrt(z - lo) * np.sqrt(z - hi)
        return (s * (1 - c) - z + root) / (2.0 * c * s * z)

    def scalar_stieltjes(self):
        c, s = self.ratio, self.scale
        lo, hi = self.edges

        def m(z):
            return (s * (1 - c) - z + cmath.sqrt(z - lo) * cmath.sqrt(z - hi)) / (2.0 * c * s * z)
        return m

    def density(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.edges
        c, s = self.ratio, self.scale
        inside = (t > lo) & (t < hi)
        out = np.zeros_like(t)
        tt = t[inside]
        out[inside] = np.sqrt((hi - tt) * (tt - lo)) / (2.0 * np.pi * c * s * tt)
        return out

    def raw_moment(self, k):
        c, s = self.ratio, self.scale
        return float(s ** k * sum(c ** r / (r + 1) * comb(k, r) * comb(k - 1, r) for r in range(k)))

    def support(self):
        lo, hi = self.edges
        return (0.0 if self.ratio > 1 else lo), hi

    def dilate(self, c):
        return MarchenkoPastur(self.ratio, self.scale * c)


@dataclass(frozen=True, eq=False)
class GridDensity(Measure):
    """Density tabulated on a uniform grid, integrated by the trapezoid rule."""

    grid: np.ndarray
    values: np.ndarray
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.asarray(self.grid, dtype=float)
        f = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or x.size < 2:
            raise InvalidMeasure("grid and values must be aligned 1-D arrays")
        dx = np.diff(x)
        if np.any(dx <= 0) or np.ptp(dx) > 1e-9 * max(1.0, abs(dx[0])) * x.size:
            raise InvalidMeasure("grid must be uniform and increasing")
        if np.any(f < 0):
            raise InvalidMeasure("density values must be nonnegative")
        w = np.full(x.size, dx.mean())
        w[0] *= 0.5
        w[-1] *= 0.5
        w = w * f
        if abs(w.sum() - 1.0) > MASS_TOL:
            raise InvalidMeasure(f"density integrates to {w.sum()!r}, expected 1")
        object.__setattr__(self, "grid", x)
        object.__setattr__(self, "values", f)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_function(cls, func, grid) -> "GridDensity":
        """Tabulate ``func`` on ``grid`` and renormalise to unit mass."""
        grid = np.asarray(grid, dtype=float)
        vals = np.clip(np.asarray(func(grid), dtype=float), 0.0, None)
        mass = np.trapezoid(vals, grid)
        if mass <= 0:
            raise InvalidMeasure("density has zero mass on the grid")
        return cls(grid, vals / mass)

    @property
    def spacing(self):
        return float(self.grid[1] - self.grid[0])

    def stieltjes(self, z):
        z = _as_complex(z)
        return _weighted_resolvent(self.grid, self.weights, z)

    def raw_moment(self, k):
        return float(self.weights @ self.grid ** k)

    def support(self):
        nz = np.nonzero(self.values)[0]
        if nz.size == 0:
            return float(self.grid[0]), float(self.grid[-1])
        return float(self.grid[nz[0]]), float(self.grid[nz[-1]])

    def cdf(self, x):
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (self.values[1:] + self.values[:-1]) * np.diff(self.grid))])
        return np.interp(x, self.grid, cum, left=0.0, right=1.0)


class TransformKind(enum.Enum):
    STIELTJES = "stieltjes"
    RECIPROCAL_CAUCHY = "reciprocal_cauchy"
    H_TRANSFORM = "h"
    TILDE_STIELTJES = "tilde_stieltjes"
    TILDE_RECIPROCAL = "tilde_reciprocal"
    HAT_RECIPROCAL = "hat_reciprocal"
    LOG_H = "log_h"


_POSITIVE_KINDS = {
    TransformKind.TILDE_STIELTJES,
    TransformKind.TILDE_RECIPROCAL,
    TransformKind.HAT_RECIPROCAL,
    TransformKind.LOG_H,
}


def stieltjes(measure: Measure, z):
    """Stieltjes transform ``int dmu(t)/(t - z)`` on the upper half-plane."""
    return measure.stieltjes(z)


def _check_positive_unit_mean(measure: Measure):
    lo, _ = measure.support()
    if lo < -MASS_TOL or abs(measure.mean - 1.0) > MASS_TOL:
        raise UnsupportedKind("this transform needs nonnegative support and unit mean")


def _safe_inverse(x, what):
    x = np.asarray(x)
    if np.any(np.abs(x) < _TINY):
        raise ZeroDenominator(f"{what} vanishes")
    return 1.0 / x


def transform_eval(kind: TransformKind, measure: Measure, z):
    """Evaluate one of the analytic transforms of ``measure`` at ``z``.

    F = -1/m, h = F - z, m~ = 1 + z m, F~ = -1/m~, F^ = 1 + F~ and
    L = -log(-h) on the principal branch.
    """
    kind = TransformKind(kind)
    if kind in _POSITIVE_KINDS:
        _check_positive_unit_mean(measure)
    z = _as_complex(z)
    m = measure.stieltjes(z)
    if kind is TransformKind.STIELTJES:
        return m
    if kind in (TransformKind.RECIPROCAL_CAUCHY, TransformKind.H_TRANSFORM):
        f = -_safe_inverse(m, "m_mu(z)")
        return f if kind is TransformKind.RECIPROCAL_CAUCHY else f - z
    if kind is TransformKind.LOG_H:
        h = -_safe_inverse(m, "m_mu(z)") - z
        return -np.log(-h)
    mt = 1.0 + z * m
    if kind is TransformKind.TILDE_STIELTJES:
        return mt
    ft = -_safe_inverse(mt, "1 + z m_mu(z)")
    if kind is TransformKind.TILDE_RECIPROCAL:
        return ft
    return 1.0 + ft


def h_transform(measure: Measure, z):
    return transform_eval(TransformKind.H_TRANSFORM, measure, z)


def cauchy_smooth(measure: Measure, eta: float, t):
    """Density of ``measure * Cauchy[eta]`` at ``t``, i.e. Im m(t + i eta) / pi."""
    if not eta > 0:
        raise NonPositiveImaginaryPart("eta must be positive")
    t = np.asarray(t, dtype=float)
    return np.imag(measure.stieltjes(t + 1j * eta)) / np.pi


def cauchy_density(t, eta: float, center: float = 0.0):
    t = np.asarray(t, dtype=float) - center
    return eta / (np.pi * (t * t + eta * eta))
