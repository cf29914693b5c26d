"""Finite-N constants, N-thresholds and MSE bounds for both estimators.

Every constant is a separate function taking the scalar statistics it needs,
so each display can be checked on its own.  ``additive_bound`` and
``multiplicative_bound`` assemble them into a :class:`BoundReport`.

Notation: a_k, b_k are raw moments of the noise side A and the signal B;
sigma_X^2 the variance, theta_X the kurtosis, b0_4 the centred fourth moment,
sigma~_X^2 = x_3 x_1 - x_2^2, k3(X) = x_3 - 3 x_2 x_1 + 2 x_1^3 and a_inf the
operator norm of A.  Mixed moments m_{A*B}(s, s') are the finite-N Haar
expectations of :func:`freedeconv.moments.finite_n_mixed_moment`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BelowThreshold, KappaBelowThreshold, MissingMoments, MissingSupNorm
from .moments import (
    MomentSet,
    convolve_moments_additive,
    convolve_moments_multiplicative,
    deconvolve_moments_additive,
    deconvolve_moments_multiplicative,
    finite_n_mixed_moment,
)
from .multiplicative_solver import StabilityProfile, compute_profile, k_function

SQRT2 = math.sqrt(2.0)
KAPPA_ADDITIVE = 2.0 * SQRT2
N_SEARCH_MAX = 10**6


# ---------------------------------------------------------------------------
# inputs and report


@dataclass(frozen=True, eq=False)
class BoundInputs:
    """Everything the bounds need.

    ``momentsA`` describes the noise matrix (in practice the moments of
    ``mu1_moments``); it must carry ``sup_norm`` in the multiplicative case.
    ``momentsObserved`` is the law of H or M; when omitted it is computed from
    A and B by free convolution.
    """

    case: str
    N: int
    momentsA: MomentSet
    momentsB: MomentSet
    mu1_moments: MomentSet
    momentsObserved: Optional[MomentSet] = None
    C_A: float = 1.0
    c: float = 0.0
    kappa: Optional[float] = None

    def __post_init__(self):
        if self.case not in ("additive", "multiplicative"):
            raise ValueError("case must be 'additive' or 'multiplicative'")
        if int(self.N) < 1:
            raise ValueError("N must be at least 1")
        if self.C_A < 0 or self.c < 0:
            raise ValueError("C_A and c must be nonnegative")
        for name in ("momentsA", "momentsB", "mu1_moments"):
            if getattr(self, name) is None:
                raise MissingMoments(f"{name} is required")
        if self.case == "multiplicative" and self.momentsA.sup_norm is None:
            raise MissingSupNorm("the multiplicative bounds need the operator norm a_inf")
        if self.momentsObserved is None:
            conv = (convolve_moments_additive if self.case == "additive"
                    else convolve_moments_multiplicative)
            object.__setattr__(self, "momentsObserved", conv(self.momentsA, self.momentsB))


@dataclass(frozen=True)
class BoundReport:
    case: str
    N: int
    constants: dict
    N_min: int
    mse_bound: Optional[float]
    valid: bool
    kappa: float
    notes: tuple = field(default=())

    def require_valid(self) -> "BoundReport":
        if not self.valid:
            raise BelowThreshold(f"N = {self.N} is below N_min = {self.N_min}")
        return self

    def as_dict(self) -> dict:
        out = dict(self.constants)
        out.update(N=self.N, N_min=self.N_min, mse_bound=self.mse_bound, valid=self.valid,
                   kappa=self.kappa, case=self.case)
        return out


def infer_signal_moments(case: str, observed: MomentSet, mu1: MomentSet) -> MomentSet:
    """Moments of B from those of the observation by moment deconvolution."""
    if case == "additive":
        return deconvolve_moments_additive(observed, mu1)
    return deconvolve_moments_multiplicative(observed, mu1)


# ---------------------------------------------------------------------------
# additive constants


@dataclass(frozen=True)
class AdditiveStats:
    sA: float
    sB: float
    thA: float
    thB: float
    a2: float
    a4: float
    a6: float
    b2: float
    b4: float
    b6: float
    mA2B2: float
    s1: float
    sH2: float
    mu1_2: float

    @classmethod
    def build(cls, inputs: BoundInputs) -> "AdditiveStats":
        A, B, H, mu1 = inputs.momentsA, inputs.momentsB, inputs.momentsObserved, inputs.mu1_moments
        for name, ms in (("A", A), ("B", B)):
            if abs(ms.m(1)) > 1e-9:
                raise ValueError(f"additive bounds need centred {name}")
        return cls(
            sA=A.sigma, sB=B.sigma,
            thA=_kurtosis(A), thB=_kurtosis(B),
            a2=A.m(2), a4=A.m(4), a6=A.m(6), b2=B.m(2), b4=B.m(4), b6=B.m(6),
            mA2B2=finite_n_mixed_moment(A, B, "A2B2:1^2,1^2", int(inputs.N)),
            s1=mu1.sigma, sH2=H.variance, mu1_2=mu1.m(2),
        )


def _kurtosis(ms: MomentSet) -> float:
    return ms.kurtosis if ms.variance > 0 else 0.0


def _safe_div(num, den):
    return num / den if den != 0 else (0.0 if num == 0 else math.inf)


def add_c_thres_A(eta: float, s: AdditiveStats) -> float:
    sA, sB, thA, thB = s.sA, s.sB, s.thA, s.thB
    if sA == 0 or sB == 0:
        return 0.0
    e2 = eta * eta
    pre = 12.0 * sB ** 2 * sA / eta ** 3 * (1.0 + (sA ** 2 + sB ** 2) / e2)
    t1 = math.sqrt(2.0 * (1.0 + (sA ** 2 + sB ** 2 * thB) / e2)
                   * (1.0 + math.sqrt(thA * thB) + 2.0 * math.sqrt(s.mA2B2 * thA) / (sB ** 2 * e2)))
    inner = _safe_div(math.sqrt(s.mA2B2) * math.sqrt(s.a4) + s.b6 ** (2 / 3) * s.a6 ** (1 / 3),
                      sA ** 2 * sB ** 2 * e2)
    t2 = math.sqrt(3.0 * math.sqrt(thB * thA) * sA ** 2 / e2 * (1.0 + inner))
    t3 = 2.0 * thB ** 0.25 * sB ** 3 * thA ** 0.25 / eta ** 3
    return pre * (t1 + t2 + t3)


def add_c_thres_B(eta: float, s: AdditiveStats) -> float:
    sA, sB, thA, thB = s.sA, s.sB, s.thA, s.thB
    if sA == 0 or sB == 0:
        return 0.0
    e2 = eta * eta
    pre = 12.0 * sA ** 2 * sB / eta ** 3 * (1.0 + (sB ** 2 + sA ** 2) / e2)
    t1 = math.sqrt(2.0 * (1.0 + (sB ** 2 + sA ** 2 * thA) / e2)
                   * (1.0 + math.sqrt(thA * thB) + 2.0 * math.sqrt(s.mA2B2 * thB) / (sA ** 2 * e2)))
    inner = _safe_div(math.sqrt(s.mA2B2) * math.sqrt(s.b4) + s.a6 ** (2 / 3) * s.b6 ** (1 / 3),
                      sA ** 2 * sB ** 2 * e2)
    t2 = math.sqrt(3.0 * math.sqrt(thB * thA) * sB ** 2 / e2 * (1.0 + inner))
    t3 = 2.0 * thA ** 0.25 * sA ** 3 * thB ** 0.25 / eta ** 3
    return pre * (t1 + t2 + t3)


def add_c_bound_A(kappa: float, s: AdditiveStats) -> float:
    sA, sB = s.sA, s.sB
    if sA == 0 or sB == 0:
        return 0.0
    ks2 = (kappa * s.s1) ** 2
    pre = 12.0 * math.sqrt(6.0) * sB ** 2 * sA / (kappa * s.s1) ** 3
    return (pre * (1.0 + (sA ** 2 + sB ** 2) / ks2)
            * math.sqrt(1.0 + (sA ** 2 + s.thB * sB ** 2) / ks2)
            * math.sqrt(1.0 + (math.sqrt(s.mA2B2) * math.sqrt(s.a4) + s.b6 ** (2 / 3) * s.a6 ** (1 / 3))
                        / (s.a2 * s.b2 * ks2)))


def add_c_bound_B(kappa: float, s: AdditiveStats) -> float:
    sA, sB = s.sA, s.sB
    if sA == 0 or sB == 0:
        return 0.0
    ks2 = (kappa * s.s1) ** 2
    pre = 12.0 * math.sqrt(6.0) * sA ** 2 * sB / (kappa * s.s1) ** 3
    return (pre * (1.0 + (sB ** 2 + sA ** 2) / ks2)
            * math.sqrt(1.0 + (sB ** 2 + s.thA * sA ** 2) / ks2)
            * math.sqrt(1.0 + (math.sqrt(s.mA2B2) * math.sqrt(s.b4) + s.a6 ** (2 / 3) * s.b6 ** (1 / 3))
                        / (s.a2 * s.b2 * ks2)))


def _add_L_factor(kappa, s: AdditiveStats, N):
    """(1 + C_bound,B(3k/4)(1 + 16(a2+b2)/(9k^2 s1^2)) / N^2) (1 + 2 sB^2/(k s1)^2) / (1 - 4/k^2)."""
    cbb = add_c_bound_B(0.75 * kappa, s)
    ks2 = (kappa * s.s1) ** 2
    return ((1.0 + cbb * (1.0 + 16.0 * (s.a2 + s.b2) / (9.0 * ks2)) / N ** 2)
            * (1.0 + 2.0 * s.sB ** 2 / ks2) / (1.0 - 4.0 / kappa ** 2))


def add_c1(kappa: float, s: AdditiveStats, N: int) -> float:
    cbb = add_c_bound_B(0.75 * kappa, s)
    cba = add_c_bound_A(0.75 * kappa, s)
    ks = kappa * s.s1
    return ((1.0 + 2.0 / kappa ** 2) * cbb
            + _add_L_factor(kappa, s, N) * (1.0 + 4.0 / kappa ** 2)
            * (4.0 / 3.0 + 16.0 * s.sB ** 2 / (9.0 * ks ** 2)) * cba * (1.0 + s.sB / ks))


def add_c2(kappa: float, s: AdditiveStats, N: int) -> float:
    return _add_L_factor(kappa, s, N) * (1.0 + 4.0 / kappa ** 2) * (1.0 + s.sB / (kappa * s.s1))


def add_c3(kappa: float, s: AdditiveStats, N: int) -> float:
    # the printed denominator reads "1 - /kappa^2"; 1 - 4/kappa^2 as in C1 and C2
    ks2 = (kappa * s.s1) ** 2
    return (1.0 + 8.0 / (3.0 * kappa ** 2)
            + _add_L_factor(kappa, s, N) * 4.0 / kappa ** 2 * (1.0 + s.sB / (kappa * s.s1))
            * (1.0 + 16.0 * s.sH2 / (9.0 * ks2)))


def add_mse(s: AdditiveStats, N: int, C_A: float, c: float, c1: float, c2: float, c3: float) -> float:
    s1 = s.s1
    term_a = c2 * C_A * (1.0 + (1.0 + c / N) * math.sqrt(s.mu1_2) / (SQRT2 * s1)) / (SQRT2 * s1)
    term_m = 4.0 * c3 / (3.0 * s1) * math.sqrt(s.sA ** 2 + 2.0 * (s.sA ** 2 * s.sB ** 2 + s.a4)
                                               / (9.0 * s1 ** 2))
    return (term_a + term_m + c1 / N) ** 2 / (2.0 * SQRT2 * math.pi * s1 * N ** 2)


def additive_bound(inputs: BoundInputs) -> BoundReport:
    """Constants and MSE bound for the additive estimator on Im z = 2 sqrt(2) sigma_1.

    ``C_threshold`` is max(C_thres,A, C_thres,B) at eta = 3 sigma_1 / sqrt(2):
    C_thres already carries its eta^-3, so N^2 >= C_threshold is the condition
    of the underlying lower bound on Im omega.  The literal composite with a
    second eta^-3 factor is reported as ``C_threshold_printed``.
    """
    if inputs.case != "additive":
        raise ValueError("additive_bound needs case='additive'")
    N = int(inputs.N)
    s = AdditiveStats.build(inputs)
    if s.s1 <= 0:
        raise ValueError("additive bounds need a non-degenerate noise law")
    kappa = KAPPA_ADDITIVE
    eta_t = 3.0 * s.s1 / SQRT2
    cta, ctb = add_c_thres_A(eta_t, s), add_c_thres_B(eta_t, s)
    c_threshold = max(cta, ctb)
    printed = 2.0 * SQRT2 * c_threshold / (27.0 * s.s1 ** 3)
    n_min = max(1, math.ceil(math.sqrt(c_threshold) - 1e-12))
    c1, c2, c3 = add_c1(kappa, s, N), add_c2(kappa, s, N), add_c3(kappa, s, N)
    constants = {
        "C_thres_A": cta, "C_thres_B": ctb,
        "C_bound_A": add_c_bound_A(kappa, s), "C_bound_B": add_c_bound_B(kappa, s),
        "C1": c1, "C2": c2, "C3": c3,
        "C_threshold": c_threshold, "C_threshold_printed": printed,
        "m_A2B2_11_11": s.mA2B2, "sigma_H_sq": s.sH2, "theta_A": s.thA, "theta_B": s.thB,
    }
    valid = N >= n_min
    mse = add_mse(s, N, inputs.C_A, inputs.c, c1, c2, c3) if valid else None
    return BoundReport("additive", N, constants, n_min, mse, valid, kappa)


# ---------------------------------------------------------------------------
# multiplicative constants


@dataclass(frozen=True)
class MultiplicativeStats:
    N: int
    a2: float
    a3: float
    ainf: float
    b2: float
    b3: float
    b4: float
    b6: float
    sA2: float
    sB2: float
    stA2: float
    stB2: float
    b0_4: float
    k3A: float
    k3B: float
    m2: float
    sM2: float
    stM2: float
    s1_2: float
    st1: float
    mu1_2: float
    m_13_212: float
    m_13_13: float
    m_21_12: float
    m_13_23: float

    @classmethod
    def build(cls, inputs: BoundInputs) -> "MultiplicativeStats":
        A, B, M, mu1 = inputs.momentsA, inputs.momentsB, inputs.momentsObserved, inputs.mu1_moments
        for name, ms in (("A", A), ("B", B), ("mu_1", mu1)):
            if abs(ms.m(1) - 1.0) > 1e-9:
                raise ValueError(f"multiplicative bounds need {name} with mean 1")
        N = int(inputs.N)
        return cls(
            N=N, a2=A.m(2), a3=A.m(3), ainf=float(A.sup_norm),
            b2=B.m(2), b3=B.m(3), b4=B.m(4), b6=B.m(6),
            sA2=A.variance, sB2=B.variance, stA2=A.sigma_tilde_sq, stB2=B.sigma_tilde_sq,
            b0_4=float(B.centered[4]), k3A=_k3(A), k3B=_k3(B),
            m2=M.m(2), sM2=M.variance, stM2=M.sigma_tilde_sq,
            s1_2=mu1.variance, st1=math.sqrt(mu1.sigma_tilde_sq), mu1_2=mu1.m(2),
            m_13_212=finite_n_mixed_moment(A, B, "1^3,21^2", N),
            m_13_13=finite_n_mixed_moment(A, B, "1^3,1^3", N),
            m_21_12=finite_n_mixed_moment(A, B, "21,1^2", N),
            m_13_23=finite_n_mixed_moment(A, B, "1^3,2^3", N),
        )


def _k3(ms: MomentSet) -> float:
    x1, x2, x3 = ms.m(1), ms.m(2), ms.m(3)
    return x3 - 3.0 * x2 * x1 + 2.0 * x1 ** 3


def _dens(N):
    return 1.0 - N ** -2.0, 1.0 - 4.0 * N ** -2.0


def mul_c_thres_A(eta: float, s: MultiplicativeStats) -> float:
    d1, d2 = _dens(s.N)
    if s.sB2 == 0:
        return 0.0
    corr = (s.k3B + s.sB2 * (s.a2 - s.sB2) + (10.0 + 4.0 * s.b2 + 5.0 * s.b3) * s.a2 / s.N)
    return (48.0 * s.b2 * s.ainf ** 3
            * (1.0 + s.m_13_212 / (eta ** 2 * s.sB2))
            * (1.0 + s.m2 / eta + s.stM2 / eta ** 2)
            * (1.0 + corr / (d1 ** 2 * d2 * s.ainf * eta)))


def mul_c_thres_B(eta: float, s: MultiplicativeStats) -> float:
    d1, d2 = _dens(s.N)
    q = math.sqrt(1.0 + s.m_13_212 / (s.b2 * eta ** 2))
    corr = (s.k3A + s.sA2 * (s.b2 - s.sA2) + s.b2 * (10.0 + 4.0 * s.a2 + 5.0 * s.a3) / s.N)
    last = (q + s.ainf ** 1.5 * math.sqrt(s.b4) / (math.sqrt(2.0 * s.b2) * eta)
            + (1.0 + 2.0 * math.sqrt(s.b2) * s.ainf ** 1.5 / eta) * corr
            / (d1 ** 2 * d2 ** 2 * eta * math.sqrt(s.b2)))
    return (24.0 * s.ainf * s.b2 * q
            * (1.0 + s.a2 / eta + (s.stA2 + s.a2 * s.sB2) / (d1 * eta ** 2)) * last)


def mul_c_bound_A(xi: float, s: MultiplicativeStats) -> float:
    d1, _ = _dens(s.N)
    x = xi * s.st1
    return (24.0 * s.ainf ** 3 * s.b2 / x ** 3
            * (1.0 + s.m_13_212 / (x ** 2 * s.b2))
            * (1.0 + s.a2 / x + (s.a2 * s.sB2 + s.st1 ** 2) / (d1 * x ** 2)))


def mul_c_bound_B(xi: float, s: MultiplicativeStats) -> float:
    # the stray eta in the first square root is read as xi sigma~_1
    d1, _ = _dens(s.N)
    x = xi * s.st1
    q = math.sqrt(1.0 + s.m_13_212 / (s.b2 * x ** 2))
    bracket = (s.ainf ** 1.5 / x * (math.sqrt(s.b4 / s.b2) + math.sqrt(9.0 * s.b6 / (4.0 * s.b2 * x ** 2)))
               + SQRT2 * q
               + 3.0 / (math.sqrt(2.0 * s.b2) * x) * math.sqrt(s.b4 + s.m_13_23 / x ** 2))
    return (4.0 * SQRT2 * s.ainf * s.b2 / x ** 2
            * (1.0 + 1.0 / x + (s.sA2 + s.sB2) / (d1 * x ** 2)) * q * bracket)


def _mul_common(kappa, xi, s: MultiplicativeStats):
    """(1 + b2/(k s~1)) (1 + 3 mu1(2)/(2 xi s~1) + 9/(4 xi^2)) (1 + 3 s~B^2/(2 eta xi s~1)) / (1 - 3/(2 xi k(xi)))."""
    eta = kappa * s.st1
    kx = k_function(xi)
    return ((1.0 + s.b2 / (kappa * s.st1))
            * (1.0 + 3.0 * s.mu1_2 / (2.0 * xi * s.st1) + 9.0 / (4.0 * xi ** 2))
            * (1.0 + 3.0 * s.stB2 / (2.0 * eta * xi * s.st1)) / (1.0 - 3.0 / (2.0 * xi * kx)))


def mul_c1(kappa: float, xi: float, s: MultiplicativeStats) -> float:
    d1, _ = _dens(s.N)
    x = xi * s.st1
    kx = k_function(xi)
    stB = math.sqrt(max(s.stB2, 0.0))
    part_b = ((1.0 + s.s1_2 / (kx * s.st1)) * (1.0 + math.sqrt(s.sM2) / x)
              * (1.0 + s.a2 / x + (s.a2 * s.sB2 + s.stA2) / (d1 * x ** 2))
              * (1.0 + _safe_div(3.0 * s.b2, 2.0 * xi * stB) + 9.0 * s.stB2 / (4.0 * x ** 2))
              * mul_c_bound_B(xi, s))
    return _mul_common(kappa, xi, s) * mul_c_bound_A(xi, s) + (1.0 + s.b2 / (kappa * s.st1)) * part_b


def mul_c2(kappa: float, xi: float, s: MultiplicativeStats) -> float:
    return _mul_common(kappa, xi, s)


def mul_c3(kappa: float, xi: float, s: MultiplicativeStats) -> float:
    eta = kappa * s.st1
    kx = k_function(xi)
    return 1.0 + (3.0 / (2.0 * xi * s.st1) * (1.0 + s.b2 / (kappa * s.st1))
                  * (s.s1_2 + s.s1_2 / (kx * s.st1) + s.st1 ** 2 / (kx * s.st1))
                  * (1.0 + 3.0 * s.stB2 / (2.0 * eta * xi * s.st1)) / (1.0 - 3.0 / (2.0 * xi * kx)))


def mul_c4(xi: float, s: MultiplicativeStats, c_max: float) -> float:
    kx = k_function(xi)
    return (16.0 * c_max ** 3 * (1.0 + 1.0 / (math.pi ** 2 * kx)) ** 3
            / (math.sqrt(3.0) * math.pi ** 2 * (xi * s.st1) ** 9))


def mul_delta(xi: float, s: MultiplicativeStats) -> float:
    mixed = s.m_13_212 - 2.0 * s.m_13_13 + s.m_21_12
    return 8.0 * (math.sqrt(s.a2 * (s.b0_4 + s.sA2 * s.sB2 ** 2))
                  + s.ainf / (xi * s.st1) ** 2 * mixed)


def mul_c_threshold(kappa: float, xi: float, s: MultiplicativeStats) -> tuple[float, float, float]:
    x = xi * s.st1
    cta, ctb = mul_c_thres_A(x, s), mul_c_thres_B(x, s)
    ct = 2.0 * kappa * max(cta, ctb) / (xi ** 3 * s.st1 ** 2) * (1.0 + 1.0 / k_function(xi))
    return cta, ctb, ct


def mul_mse(kappa, xi, s: MultiplicativeStats, C_A, c, c1, c2, c3, c4, delta) -> float:
    x = xi * s.st1
    N = s.N
    term_a = 3.0 * c2 * C_A * (1.0 + 3.0 * (1.0 + c / N) * math.sqrt(s.mu1_2) / (2.0 * x)) / (2.0 * x)
    term_m = c3 * math.sqrt(max(delta, 0.0)) / x
    return ((term_a + term_m + c1 / N) ** 2 / (kappa * math.pi * s.st1 * N ** 2)
            + c4 / N ** 6)


def _with_N(inputs: BoundInputs, N: int) -> BoundInputs:
    return BoundInputs(inputs.case, N, inputs.momentsA, inputs.momentsB, inputs.mu1_moments,
                       inputs.momentsObserved, inputs.C_A, inputs.c, inputs.kappa)


def multiplicative_n_min(inputs: BoundInputs, kappa: float, xi: float) -> int:
    """Smallest N >= 3 with N^2 >= C_threshold(N); the threshold depends on N."""
    def ok(n):
        s = MultiplicativeStats.build(_with_N(inputs, n))
        return n * n >= mul_c_threshold(kappa, xi, s)[2]

    n = 3
    while n <= N_SEARCH_MAX:
        if ok(n):
            return n
        n += 1 if n < 10_000 else n // 100
    raise BelowThreshold("no N up to 1e6 satisfies the threshold")


def multiplicative_bound(inputs: BoundInputs, profile: Optional[StabilityProfile] = None
                         ) -> BoundReport:
    """Constants and MSE bound for the multiplicative estimator at eta = kappa sigma~_1.

    ``kappa`` defaults to just above g(xi_0), the most demanding admissible
    line.  The constants depend on N through (1 - N^-2) factors and the
    finite-N mixed moments; they are evaluated at ``inputs.N``.
    """
    if inputs.case != "multiplicative":
        raise ValueError("multiplicative_bound needs case='multiplicative'")
    if inputs.momentsA.sup_norm is None:
        raise MissingSupNorm("a_inf is required")
    if profile is None:
        profile = compute_profile(inputs.mu1_moments, inputs.momentsObserved)
    g0 = profile.g(profile.xi0)
    kappa = inputs.kappa if inputs.kappa is not None else g0 * (1.0 + 1e-9)
    if not kappa > g0:
        raise KappaBelowThreshold(f"kappa={kappa:.6g} must exceed g(xi_0)={g0:.6g}")
    xi = profile.g_inverse(kappa)
    N = int(inputs.N)
    if N < 3:
        raise BelowThreshold("the multiplicative constants need N >= 3")
    s = MultiplicativeStats.build(inputs)
    cta, ctb, ct = mul_c_threshold(kappa, xi, s)
    n_min = multiplicative_n_min(inputs, kappa, xi)
    c1, c2, c3 = mul_c1(kappa, xi, s), mul_c2(kappa, xi, s), mul_c3(kappa, xi, s)
    c4 = mul_c4(xi, s, max(cta, ctb))
    delta = mul_delta(xi, s)
    constants = {
        "C_thres_A": cta, "C_thres_B": ctb,
        "C_bound_A": mul_c_bound_A(xi, s), "C_bound_B": mul_c_bound_B(xi, s),
        "C1": c1, "C2": c2, "C3": c3, "C4": c4, "Delta": delta,
        "C_threshold": ct, "xi": xi, "eta": kappa * s.st1,
        "m_13_212": s.m_13_212, "m_13_13": s.m_13_13, "m_21_12": s.m_21_12, "m_13_23": s.m_13_23,
        "k3_A": s.k3A, "k3_B": s.k3B, "sigma_tilde_A_sq": s.stA2, "sigma_tilde_B_sq": s.stB2,
        "b0_4": s.b0_4,
    }
    valid = N * N >= ct
    mse = mul_mse(kappa, xi, s, inputs.C_A, inputs.c, c1, c2, c3, c4, delta) if valid else None
    return BoundReport("multiplicative", N, constants, n_min, mse, valid, kappa)


def bound(inputs: BoundInputs, **kwargs) -> BoundReport:
    if inputs.case == "additive":
        return additive_bound(inputs)
    return multiplicative_bound(inputs, **kwargs)


def gue_concentration_constant(variance: float) -> float:
    """C_A for a GUE noise matrix with semicircle limit of the given variance."""
    return math.sqrt(variance)


def wishart_concentration_constant(a_inf: float) -> float:
    """C_A for A = Y Y* with Gaussian Y, from the Gaussian Poincare inequality."""
    return math.sqrt(2.0 * a_inf)
