"""Multiplicative subordination, its stability functions and the multiplicative estimator.

For M = A^{1/2} U B U* A^{1/2} with known noise law mu_1 (mean 1), omega_3 is a
fixed point of

    K_z(w) = -z h_{mu_1}(H_3(w) / z),    H_3(w) = w^2 m_M(w) / (1 + w m_M(w)).

The fixed point is first reached far on the negative real side (Re z < -K_0)
and then continued to the right in steps bounded by the stability radius R.
All quantities are computed for mean-one laws; :func:`reduce_model` and the
estimator handle the rescaling.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .additive_solver import (
    DEFAULT_GRID_POINTS,
    DEFAULT_MAX_ITER,
    CauchyEstimate,
    SubordinationPoint,
    as_evaluator,
    as_noise_model,
    make_grid,
    scalar_evaluator,
    scalar_h,
)
from .errors import (
    ContinuationStall,
    DegenerateXi,
    DomainEscape,
    EmptyPart,
    EtaBelowThreshold,
    NoStableRegion,
    NotConverged,
    SeedNotConverged,
    ZeroDenominator,
)
from .moments import MomentSet, NoiseModel, moment_set
from .transforms import Empirical, Measure

log = logging.getLogger(__name__)

XI_MAX = 1e6
BISECT_TOL = 1e-10
DERIV_H = 1e-6
MAX_RETRIES = 8
_TINY = 1e-300


def k_function(x):
    """k(x) = (x + sqrt(x^2 - 4)) / 2 for x >= 2."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 2.0):
        raise DegenerateXi("k needs an argument >= 2")
    out = (x + np.sqrt(x * x - 4.0)) / 2.0
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ProfileInputs:
    """Scalar statistics entering g, t, theta, L, R and the K_0 equation."""

    sigma1_sq: float
    sigma_tilde1: float
    sigmaM_sq: float
    sigma_tildeM_sq: float
    mu1_m2: float
    mu1_m3: float
    mu1_m1: float = 1.0
    mM_m2: float = 0.0
    mM_m3: float = 0.0
    mM_m4: float = 0.0

    @classmethod
    def from_moments(cls, mu1: MomentSet, mM: MomentSet) -> "ProfileInputs":
        st1 = mu1.sigma_tilde_sq
        if st1 <= 0:
            raise NoStableRegion("the noise has a vanishing tilde variance")
        return cls(
            sigma1_sq=mu1.variance,
            sigma_tilde1=float(np.sqrt(st1)),
            sigmaM_sq=mM.m(2) - mM.m(1) ** 2,
            sigma_tildeM_sq=mM.sigma_tilde_sq,
            mu1_m2=mu1.m(2),
            mu1_m3=mu1.m(3),
            mu1_m1=mu1.m(1),
            mM_m2=mM.m(2),
            mM_m3=mM.m(3),
            mM_m4=mM.m(4),
        )

    # -- the stability functions ------------------------------------------------

    def g(self, xi: float) -> float:
        kk = k_function(xi)
        s1, st, sm, stm = self.sigma1_sq, self.sigma_tilde1, self.sigmaM_sq, self.sigma_tildeM_sq
        inner = 1.0 / kk + abs(sm - s1) / (kk * st) + stm / (st ** 2 * xi)
        return xi + (1.0 + inner * (s1 / st + 1.0 / kk)) / kk

    def t(self, xi: float) -> float:
        kk = k_function(xi)
        s1, st, sm, stm = self.sigma1_sq, self.sigma_tilde1, self.sigmaM_sq, self.sigma_tildeM_sq
        left = s1 / (kk * st) + (st ** 2 + s1 ** 2 / 2.0) / (kk * st) ** 2
        right = 2.0 + sm / (xi * st) + (stm + sm ** 2 / 2.0) / (xi * xi * st ** 2)
        return left * right

    def theta(self, u: float) -> float:
        kk = k_function(u)
        s1, st, sm, stm = self.sigma1_sq, self.sigma_tilde1, self.sigmaM_sq, self.sigma_tildeM_sq
        return 6.0 * (1.0 + s1 / (kk * st)) * (1.0 + sm / (u * st) + 4.0 * stm / (u * u * st ** 2))

    def _skew_term(self) -> float:
        return self.mu1_m3 - 2.0 * self.mu1_m2 + 1.0

    def L(self, u: float) -> float:
        d = u * u - 4.0
        if d <= 0:
            raise DegenerateXi("L needs xi > 2")
        s1, st, sm, stm = self.sigma1_sq, self.sigma_tilde1, self.sigmaM_sq, self.sigma_tildeM_sq
        first = 32.0 * (s1 / (d * st ** 2) + 2.0 * self._skew_term() / (d ** 1.5 * st ** 3))
        first *= (1.0 + sm / (u * st) + (4.0 * stm + sm ** 2) / (u * u * st ** 2)) ** 2
        m2, m3, m4 = self.mM_m2, self.mM_m3, self.mM_m4
        second = 8.0 * s1 / (d * st ** 2) * (1.0 + 8.0 * (m4 - 2.0 * m3 * m2 + m2 ** 2) / (u ** 3 * st ** 3))
        return first + second

    def R(self, k3: float) -> float:
        d = k3 * k3 - 4.0
        if d <= 0:
            raise DegenerateXi("R needs xi > 2")
        st, s1 = self.sigma_tilde1, self.sigma1_sq
        tt = self.t(k3)
        r0 = min((1.0 - tt) / (2.0 * self.L(k3)), k3 * st / (4.0 * self.theta(k3)))
        denom = 2.0 * (1.0 + 2.0 * s1 / (np.sqrt(d) * st) + self._skew_term() / (d * st ** 2))
        return (1.0 - tt) * r0 / denom

    def k0_equation(self, K: float) -> float:
        s1, sm = self.sigma1_sq, self.sigmaM_sq
        a1, a2, a3 = self.mu1_m1, self.mu1_m2, self.mu1_m3
        c = a3 - 2.0 * a2 * a1 + a1 ** 3
        return K * K / 3.0 - s1 * (27.0 * sm + 2.0 * K / 3.0) / 4.0 * (
            1.0 + 27.0 * c * (sm + 2.0 * K / 3.0) / (4.0 * K * K))


def stability_functions(xi: float, inputs: ProfileInputs) -> dict:
    """k, g, t, theta, L and R at xi (L and R only for xi > 2)."""
    if xi < 2.0:
        raise DegenerateXi("xi must be >= 2")
    out = {"k": k_function(xi), "g": inputs.g(xi), "t": inputs.t(xi), "theta": inputs.theta(xi)}
    if xi > 2.0:
        out["L"] = inputs.L(xi)
        out["R"] = inputs.R(xi)
    return out


def _bisect(f, lo, hi, tol=BISECT_TOL, max_iter=400):
    flo = f(lo)
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, abs(lo)):
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class StabilityProfile:
    """Thresholds of the multiplicative scheme for one (mu_1, mu_M) pair."""

    inputs: ProfileInputs
    xi_g: float
    xi0: float
    eta0: float
    K0: float

    @property
    def sigma1_sq(self):
        return self.inputs.sigma1_sq

    @property
    def sigma_tilde1(self):
        return self.inputs.sigma_tilde1

    @property
    def sigmaM_sq(self):
        return self.inputs.sigmaM_sq

    @property
    def sigma_tildeM_sq(self):
        return self.inputs.sigma_tildeM_sq

    def g(self, xi):
        return self.inputs.g(xi)

    def t(self, xi):
        return self.inputs.t(xi)

    def R(self, xi):
        return self.inputs.R(xi)

    def g_inverse(self, kappa: float) -> float:
        """xi >= xi_g with g(xi) = kappa, by bisection."""
        g0 = self.g(self.xi_g)
        if kappa < g0:
            raise EtaBelowThreshold(f"kappa={kappa:.6g} is below min g = {g0:.6g}")
        hi = max(2.0 * self.xi_g, kappa + 1.0)
        while self.g(hi) < kappa:
            hi *= 2.0
        return _bisect(lambda x: self.g(x) - kappa, self.xi_g, hi)

    def radius(self, eta: float) -> float:
        """Continuation radius R(g^{-1}(eta / sigma~_1)) in z units."""
        return self.R(self.g_inverse(eta / self.sigma_tilde1))


def _g_prime(inputs: ProfileInputs, x):
    return (inputs.g(x + DERIV_H) - inputs.g(x - DERIV_H)) / (2.0 * DERIV_H)


def compute_profile(mu1, mM: MomentSet) -> StabilityProfile:
    """xi_g, xi_0, eta_0 = g(xi_0) sigma~_1 and K_0 for mean-one mu_1 and mu_M."""
    mu1_m = mu1.moments if isinstance(mu1, NoiseModel) else (
        mu1 if isinstance(mu1, MomentSet) else moment_set(mu1))
    for name, ms in (("noise", mu1_m), ("observation", mM)):
        if abs(ms.m(1) - 1.0) > 1e-9:
            raise ValueError(f"{name} law must have mean 1; rescale first")
    inputs = ProfileInputs.from_moments(mu1_m, mM)

    lo = 2.0 + 2.0 * DERIV_H
    if _g_prime(inputs, lo) >= 0:
        xi_g = 2.0
    else:
        hi = 4.0
        while _g_prime(inputs, hi) < 0:
            hi *= 2.0
            if hi > XI_MAX:
                raise NoStableRegion("g never increases")
        xi_g = _bisect(lambda x: _g_prime(inputs, x), lo, hi)

    start = max(xi_g, 2.0 + 1e-12)
    if inputs.t(start) < 1.0:
        xi0 = start
    else:
        hi = 2.0 * start
        while inputs.t(hi) >= 1.0:
            hi *= 2.0
            if hi > XI_MAX:
                raise NoStableRegion("t(xi) >= 1 for every xi up to 1e6")
        xi0 = _bisect(lambda x: inputs.t(x) - 1.0, start, hi)
    eta0 = inputs.g(xi0) * inputs.sigma_tilde1

    f = inputs.k0_equation
    hi = 1.0
    while f(hi) <= 0:
        hi *= 2.0
    lo = hi / 2.0
    while lo > 1e-12 and f(lo) > 0:
        lo /= 2.0
    K0 = _bisect(f, lo, hi) if f(lo) <= 0 else lo
    return StabilityProfile(inputs, xi_g, xi0, eta0, K0)


# ---------------------------------------------------------------------------
# fixed point


def _h3(w, m_m):
    m = m_m(w)
    den = 1.0 + w * m
    if np.any(np.abs(den) < _TINY):
        raise ZeroDenominator("1 + w m_M(w) vanishes")
    return w * w * m / den


def kz_map_multiplicative(w, z, m_M, mu1) -> complex:
    """K_z(w) = -z h_{mu_1}(H_3(w) / z)."""
    m_m = as_evaluator(m_M)
    noise = as_noise_model(mu1)
    inner = _h3(w, m_m) / z
    if np.any(np.imag(inner) <= 0):
        raise DomainEscape(f"H_3(w)/z left the upper half-plane at w={w!r}")
    return -z * noise.h(inner)


class _ScalarMap:
    """K_z on single points with the transforms bound once."""

    def __init__(self, m_M, noise: NoiseModel):
        self.m = scalar_evaluator(m_M)
        self.h = scalar_h(noise)

    def h3(self, w):
        m = self.m(w)
        den = 1.0 + w * m
        if abs(den) < _TINY:
            raise ZeroDenominator("1 + w m_M(w) vanishes")
        return w * w * m / den

    def __call__(self, w, z):
        inner = self.h3(w) / z
        if inner.imag <= 0:
            raise DomainEscape(f"H_3(w)/z left the upper half-plane at w={w!r}")
        return -z * self.h(inner)


def _iterate(z, w0, kmap: _ScalarMap, tol, max_iter):
    """Plain iteration of K_z; returns (w, iterations, step residual, converged)."""
    w = complex(w0)
    residual = np.inf
    for n in range(1, max_iter + 1):
        w_new = kmap(w, z)
        residual = abs(w_new - w)
        w = w_new
        if residual <= tol:
            return w, n, residual, True
    return w, max_iter, residual, False


def _point(z, w, n, residual, converged, kmap: _ScalarMap):
    omega1 = kmap.h3(w) / z
    if converged:
        fp = abs(kmap(w, z) - w)
        residual = max(residual, fp)
    return SubordinationPoint(z, omega1, w, n, float(residual), converged)


@dataclass
class ContinuationState:
    eta: float
    t: float
    omega3: complex
    step: float
    history: list = field(default_factory=list)


def _tol_for(z, tol):
    return 1e-12 * max(1.0, abs(z)) if tol is None else tol


def _solve_from(z, w_start, kmap, tol, max_iter, fallback=None):
    """Iterate from w_start, retrying from midpoints towards ``fallback`` on escapes."""
    tol_z = _tol_for(z, tol)
    w0 = w_start
    for _ in range(MAX_RETRIES + 1):
        try:
            return _iterate(z, w0, kmap, tol_z, max_iter)
        except (DomainEscape, ZeroDenominator):
            if fallback is None:
                raise
            w0 = 0.5 * (w0 + fallback)
    raise DomainEscape(f"iteration kept escaping at z={z}")


def _floor(profile: StabilityProfile, eta: float) -> float:
    """Guaranteed lower bound g^{-1}(eta/sigma~_1) sigma~_1 on Im omega_3, or 0 below eta_0."""
    if eta <= profile.eta0:
        return 0.0
    try:
        return profile.g_inverse(eta / profile.sigma_tilde1) * profile.sigma_tilde1
    except (EtaBelowThreshold, DegenerateXi):
        return 0.0


def solve_line_multiplicative(eta: float, grid, m_M, mu1, profile: StabilityProfile,
                              tol: Optional[float] = None, max_iter: int = DEFAULT_MAX_ITER,
                              allow_below_threshold: bool = False,
                              state: Optional[ContinuationState] = None,
                              step_rule: str = "adaptive") -> list:
    """omega_3 on z = t + i eta for every t in the (ascending) grid.

    Phase 1 seeds at Re z = -K_0 - margin from w_0 = z; phase 2 marches right,
    warm-starting from the previous omega_3.  With ``step_rule="guaranteed"``
    the step is min(R/2, grid spacing).  The default ``"adaptive"`` starts at
    the grid spacing and halves on an escape, a stall or a point below the
    Im omega_3 floor, never going under R/2; it grows back after successes.
    """
    if step_rule not in ("adaptive", "guaranteed"):
        raise ValueError("step_rule must be 'adaptive' or 'guaranteed'")
    kmap = _ScalarMap(m_M, as_noise_model(mu1))
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be ascending")
    if eta <= profile.eta0:
        if not allow_below_threshold:
            raise EtaBelowThreshold(f"eta={eta:.6g} must exceed eta0={profile.eta0:.6g}")
        warnings.warn(f"eta={eta:.6g} is below the guaranteed threshold {profile.eta0:.6g}",
                      RuntimeWarning, stacklevel=2)
    spacing = float(grid[1] - grid[0]) if grid.size > 1 else 1.0
    try:
        radius = profile.radius(eta)
    except (EtaBelowThreshold, DegenerateXi):
        radius = 0.0
    if not np.isfinite(radius) or radius <= 0:
        # below the guaranteed line there is no certified radius
        radius = 0.0
    if step_rule == "guaranteed":
        step = min(0.5 * radius, spacing) if radius > 0 else spacing
        min_step = step
    else:
        step = spacing
        min_step = 0.5 * radius if radius > 0 else spacing * 2.0 ** -20
        min_step = min(min_step, spacing)
    floor = _floor(profile, eta) * (1.0 - 1e-6)

    if state is None:
        seed_t = -profile.K0 - 0.1 * profile.K0 - spacing
        seed_t = min(seed_t, grid[0] - spacing)
        z_seed = complex(seed_t, eta)
        try:
            w, n, res, ok = _solve_from(z_seed, z_seed, kmap, tol, max_iter)
        except (DomainEscape, ZeroDenominator) as exc:
            raise SeedNotConverged(str(exc), last=None, residual=None) from exc
        if not ok:
            raise SeedNotConverged(f"seed at {z_seed} did not converge", last=w, residual=res)
        state = ContinuationState(eta, seed_t, w, step)
    points = []
    t_cur, w_cur = state.t, state.omega3
    n, res = 0, 0.0
    for t_target in grid:
        while True:
            t_next = min(t_cur + step, t_target) if t_target > t_cur else t_target
            z = complex(t_next, eta)
            failure = None
            try:
                w, n, res, ok = _solve_from(z, w_cur, kmap, tol, max_iter, fallback=w_cur)
                if not ok:
                    failure = f"continuation stalled at t={t_next:.6g}"
                elif w.imag < floor:
                    failure = f"Im omega_3 fell below its floor at t={t_next:.6g}"
            except (DomainEscape, ZeroDenominator) as exc:
                failure, w, res = str(exc), w_cur, None
            if failure is not None:
                if step_rule == "adaptive" and step > min_step * (1.0 + 1e-12):
                    step = max(0.5 * step, min_step)
                    continue
                raise ContinuationStall(failure, last=w, residual=res, last_good_t=t_cur)
            t_cur, w_cur = t_next, w
            if step_rule == "adaptive":
                step = min(2.0 * step, spacing)
            if t_next >= t_target:
                break
        p = _point(complex(t_target, eta), w_cur, n, res, True, kmap)
        points.append(p)
        state.history.append(p)
    state.t, state.omega3, state.step = t_cur, w_cur, step
    return points


# ---------------------------------------------------------------------------
# model reduction and estimator


@dataclass(frozen=True)
class ReducedProblem:
    """One positive, mean-one deconvolution problem extracted from M."""

    sign: int
    eigenvalues: np.ndarray
    mass: float
    scale: float

    @property
    def measure(self) -> Empirical:
        return Empirical(self.eigenvalues)


@dataclass(frozen=True)
class Reduction:
    """Problems plus the recipe mu_B = sum_j mass_j * (sign_j * scale_j) # mu_j."""

    problems: tuple
    stripped_zeros: int

    def reassemble(self, grid, per_problem_densities) -> np.ndarray:
        """Combine densities f_j given on ``grid`` (original scale) into one density."""
        total = np.zeros_like(np.asarray(grid, dtype=float))
        for prob, dens in zip(self.problems, per_problem_densities):
            total = total + prob.mass * np.asarray(dens)
        return total


def reduce_model(eigenvalues, N_outer: Optional[int] = None, N_inner: Optional[int] = None,
                 signs=(1, -1), zero_tol: float = 1e-12) -> Reduction:
    """Strip the (N' - N) known zeros, split by sign and rescale each part to mean 1.

    Each problem's masses are counts over N, so the parts sum to one; parts
    whose mass is below 1/N are rejected with :class:`EmptyPart` when they are
    explicitly requested and skipped otherwise.
    """
    ev = np.sort(np.asarray(eigenvalues, dtype=float).reshape(-1))
    n_total = ev.size
    N_outer = n_total if N_outer is None else int(N_outer)
    N_inner = N_outer if N_inner is None else int(N_inner)
    if not N_outer >= N_inner >= 1:
        raise ValueError("need N' >= N >= 1")
    n_strip = N_outer - N_inner
    if n_strip:
        order = np.argsort(np.abs(ev), kind="stable")
        keep = np.sort(order[n_strip:])
        ev = ev[keep]
    problems = []
    explicit = tuple(signs) != (1, -1)
    for s in signs:
        part = ev[ev > zero_tol] if s > 0 else -ev[ev < -zero_tol]
        mass = part.size / N_inner
        if mass < 1.0 / N_inner or part.size == 0:
            if explicit:
                raise EmptyPart(f"sign part {s:+d} is empty")
            continue
        scale = float(part.mean())
        problems.append(ReducedProblem(int(np.sign(s)), part / scale, mass, scale))
    if not problems:
        raise EmptyPart("no nonzero eigenvalues")
    return Reduction(tuple(problems), n_strip)


def _normalised_noise(mu1: NoiseModel) -> tuple[NoiseModel, float]:
    a1 = mu1.moments.m(1)
    if a1 <= 0:
        raise ValueError("multiplicative noise must have positive mean")
    if abs(a1 - 1.0) <= 1e-12:
        return mu1, 1.0
    sn = None if mu1.sup_norm is None else mu1.sup_norm / a1
    return NoiseModel(mu1.measure.dilate(1.0 / a1), sup_norm=sn), a1


_DEGENERATE_VAR = 1e-14


def _point_mass_passthrough(eigsM, eta, grid, lo, hi, a1, num):
    """mu_1 = delta_{a1}: M = a1 B, so K_z is constant and omega_3 = z."""
    if grid is None:
        grid = np.linspace(lo / a1 - 5.0 * eta, hi / a1 + 5.0 * eta, num)
    grid = make_grid(grid)
    law = eigsM.dilate(1.0 / a1)
    zs = grid + 1j * eta
    m = law.stieltjes(zs)
    points = tuple(SubordinationPoint(z, z * z * mz / (1.0 + z * mz) / z, z, 0, 0.0, True)
                   for z, mz in zip(zs, m))
    values = np.clip(np.imag(m) / np.pi, 0.0, None)
    return CauchyEstimate(float(eta), grid, values, points, "multiplicative")


def multiplicative_cauchy_estimator(eigsM, mu1, eta: float, grid=None,
                                    tol: Optional[float] = None, max_iter: int = DEFAULT_MAX_ITER,
                                    allow_below_threshold: bool = False,
                                    profile: Optional[StabilityProfile] = None,
                                    num: int = DEFAULT_GRID_POINTS,
                                    step_rule: str = "adaptive",
                                    negative: str = "reject") -> tuple[CauchyEstimate, StabilityProfile]:
    """Multiplicative Cauchy estimator of mu_B on Im z = eta (original scale).

    ``eigsM`` is the spectrum of M as an :class:`Empirical` measure (or any
    Measure with nonnegative support).  Noise and observation are rescaled
    to mean one internally; with b_1 = m_1(M) / m_1(mu_1) the estimate of
    mu_B * Cauchy[eta] at t is (1/b_1) times the mean-one estimate at t/b_1
    on the line eta/b_1.  Returns the estimate and the stability profile.

    ``negative="clip"`` sets negative eigenvalues of an :class:`Empirical`
    spectrum to zero (finite-N sign noise of a nonnegative signal) instead of
    raising; use :func:`reduce_model` when B genuinely has two signs.
    A point-mass noise law needs no subordination: the estimate is the
    Cauchy smoothing of M / a_1 and the returned profile is ``None``.
    """
    if negative not in ("reject", "clip"):
        raise ValueError("negative must be 'reject' or 'clip'")
    if negative == "clip" and isinstance(eigsM, Empirical) and np.any(eigsM.eigenvalues < 0):
        ev = eigsM.eigenvalues
        log.info("clipping %d negative eigenvalues (min %.3g)", int(np.sum(ev < 0)), ev.min())
        eigsM = Empirical(np.clip(ev, 0.0, None))
    noise, a1 = _normalised_noise(as_noise_model(mu1))
    if not isinstance(eigsM, Measure):
        raise TypeError("eigsM must be a Measure")
    lo, hi = eigsM.support()
    if lo < -1e-9:
        raise ValueError("M must have nonnegative spectrum; use reduce_model first")
    h1 = eigsM.mean
    if h1 <= 0:
        raise EmptyPart("M has zero mean")
    b1 = h1 / a1
    m_norm = eigsM.dilate(1.0 / h1)
    if noise.variance <= _DEGENERATE_VAR:
        return _point_mass_passthrough(eigsM, float(eta), grid, lo, hi, a1, num), None
    if profile is None:
        profile = compute_profile(noise, moment_set(m_norm))
    eta_n = float(eta) / b1
    if grid is None:
        grid = np.linspace(lo / a1 - 5.0 * eta, hi / a1 + 5.0 * eta, num)
    grid = make_grid(grid)
    grid_n = grid / b1
    m_m = m_norm.stieltjes
    points = solve_line_multiplicative(eta_n, grid_n, m_norm, noise, profile, tol=tol,
                                       max_iter=max_iter,
                                       allow_below_threshold=allow_below_threshold,
                                       step_rule=step_rule)
    omega3 = np.array([p.omega3 for p in points])
    zs = grid_n + 1j * eta_n
    values = np.imag(omega3 / zs * m_m(omega3)) / np.pi / b1
    values = np.clip(np.where(np.isfinite(values), values, 0.0), 0.0, None)
    est = CauchyEstimate(float(eta), grid, values, tuple(points), "multiplicative")
    return est, profile
