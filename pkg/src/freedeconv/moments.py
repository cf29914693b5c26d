"""Moment statistics, free cumulants and Haar-unitary mixed moments.

Free cumulants are obtained from the non-crossing partition lattice, which is
enumerated once for n <= 6 together with the Kreweras complements used by the
multiplicative moment recursion.  Finite-N mixed moments
``m_{A*B}(s, s') = E tr(A^{s_1} U B^{s'_1} U* ... A^{s_r} U B^{s'_r} U*)`` are
evaluated by summing the Weingarten expansion over S_r x S_r.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateDimension,
    InvalidMeasure,
    InvalidMomentSequence,
    NormalizationViolated,
    SingularLeadingCumulant,
    UnsupportedWord,
)
from .transforms import Measure

ORDER = 6
HANKEL_TOL = 1e-9
DECONV_HANKEL_TOL = 1e-6


def _hankel_min_eig(raw: np.ndarray) -> float:
    m = np.concatenate([[1.0], raw[:4]])
    hank = np.array([[m[i + j] for j in range(3)] for i in range(3)])
    scale = max(1.0, float(np.max(np.abs(hank))))
    return float(np.linalg.eigvalsh(hank).min()) / scale


@dataclass(frozen=True, eq=False)
class MomentSet:
    """Raw moments m_1..m_6 of a law, with the derived statistics used downstream.

    ``sup_norm`` is the operator-norm bound (a_inf / b_inf) required by the
    multiplicative bounds.
    """

    raw: np.ndarray
    sup_norm: Optional[float] = None
    centered: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        raw = np.asarray(self.raw, dtype=float).reshape(-1)
        if raw.size < ORDER:
            raise InvalidMomentSequence(f"need {ORDER} raw moments, got {raw.size}")
        raw = raw[:ORDER].copy()
        if not np.all(np.isfinite(raw)):
            raise InvalidMomentSequence("moments must be finite")
        if _hankel_min_eig(raw) < -HANKEL_TOL:
            raise InvalidMomentSequence("Hankel matrix of the moments is not positive semidefinite")
        raw.setflags(write=False)
        object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "centered", _centered_moments(raw))

    def m(self, k: int) -> float:
        """Raw moment of order k, with m(0) = 1."""
        if k == 0:
            return 1.0
        return float(self.raw[k - 1])

    def __getitem__(self, k):
        return self.m(k)

    @property
    def variance(self) -> float:
        return max(float(self.centered[2]), 0.0)

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.variance))

    @property
    def sigma_tilde_sq(self) -> float:
        return self.m(3) * self.m(1) - self.m(2) ** 2

    @property
    def kurtosis(self) -> float:
        v = self.variance
        return float(self.centered[4] / v ** 2) if v > 0 else float("nan")

    @property
    def k3(self) -> float:
        return free_cumulants_k123(self)[2]

    def with_sup_norm(self, sup_norm: float) -> "MomentSet":
        return MomentSet(self.raw, sup_norm)

    def scaled(self, c: float) -> "MomentSet":
        """Moments of c*X."""
        raw = self.raw * c ** np.arange(1, ORDER + 1)
        sn = None if self.sup_norm is None else self.sup_norm * abs(c)
        return MomentSet(raw, sn)

    def as_dict(self) -> dict:
        return {f"m{k}": self.m(k) for k in range(1, ORDER + 1)}


def _centered_moments(raw: np.ndarray) -> np.ndarray:
    """Centered moments m0_0..m0_6 from raw moments via the binomial expansion."""
    m = np.concatenate([[1.0], raw])
    mu = m[1]
    out = np.zeros(ORDER + 1)
    for k in range(ORDER + 1):
        out[k] = sum(_binom(k, j) * m[j] * (-mu) ** (k - j) for j in range(k + 1))
    return out


@lru_cache(maxsize=None)
def _binom(n, k):
    from math import comb
    return comb(n, k)


def moment_set(measure: Measure, sup_norm: Optional[float] = None) -> MomentSet:
    """Raw moments through order 6 of ``measure``.

    ``sup_norm`` defaults to the largest absolute value of the support.
    """
    if not isinstance(measure, Measure):
        raise InvalidMeasure("expected a Measure")
    raw = measure.raw_moments(ORDER)
    if sup_norm is None:
        sup_norm = measure.sup_norm
    return MomentSet(raw, sup_norm)


def point_mass_moments(c: float) -> MomentSet:
    return MomentSet(np.array([c ** k for k in range(1, ORDER + 1)], dtype=float), abs(c))


def free_cumulants_k123(moments: MomentSet) -> tuple[float, float, float]:
    m1, m2, m3 = moments.m(1), moments.m(2), moments.m(3)
    return m1, m2 - m1 ** 2, m3 - 3 * m2 * m1 + 2 * m1 ** 3


# ---------------------------------------------------------------------------
# non-crossing partitions


def _set_partitions(n):
    if n == 0:
        yield []
        return
    for part in _set_partitions(n - 1):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [n - 1]] + part[i + 1:]
        yield part + [[n - 1]]


def _is_noncrossing(blocks) -> bool:
    label = {}
    for b, block in enumerate(blocks):
        for x in block:
            label[x] = b
    n = len(label)
    for a, b, c, d in itertools.combinations(range(n), 4):
        if label[a] == label[c] and label[b] == label[d] and label[a] != label[b]:
            return False
    return True


def _kreweras_sizes(blocks, n) -> tuple[int, ...]:
    """Block sizes of the Kreweras complement, read off the permutation pi^{-1} gamma."""
    pi = [0] * n
    for block in blocks:
        block = sorted(block)
        for i, x in enumerate(block):
            pi[x] = block[(i + 1) % len(block)]
    pi_inv = [0] * n
    for i, j in enumerate(pi):
        pi_inv[j] = i
    perm = [pi_inv[(i + 1) % n] for i in range(n)]
    return tuple(sorted(len(c) for c in _cycles(perm)))


@lru_cache(maxsize=None)
def noncrossing_partitions(n: int) -> tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]:
    """All pi in NC(n) as (block sizes of pi, block sizes of Kr(pi))."""
    out = []
    for blocks in _set_partitions(n):
        if _is_noncrossing(blocks):
            sizes = tuple(sorted(len(b) for b in blocks))
            out.append((sizes, _kreweras_sizes(blocks, n)))
    return tuple(out)


def _cumulants_from(seq: Sequence[float], sizes) -> float:
    return float(np.prod([seq[s - 1] for s in sizes]))


def free_cumulants_to_moments(kappa: Sequence[float]) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=float)
    n_max = kappa.size
    return np.array([
        sum(_cumulants_from(kappa, sizes) for sizes, _ in noncrossing_partitions(n))
        for n in range(1, n_max + 1)
    ])


def moments_to_free_cumulants(m: Sequence[float]) -> np.ndarray:
    """Invert m_n = sum_{pi in NC(n)} prod kappa_|V| order by order."""
    m = np.asarray(m, dtype=float)
    kappa = np.zeros(m.size)
    for n in range(1, m.size + 1):
        rest = sum(_cumulants_from(kappa, sizes)
                   for sizes, _ in noncrossing_partitions(n) if sizes != (n,))
        kappa[n - 1] = m[n - 1] - rest
    return kappa


def nc_moment_cumulant(m: Sequence[float]) -> np.ndarray:
    return moments_to_free_cumulants(m)


def _checked(raw, tol=DECONV_HANKEL_TOL) -> MomentSet:
    raw = np.asarray(raw, dtype=float)
    if _hankel_min_eig(raw) < -tol:
        raise InvalidMomentSequence("deconvolved moments are not a valid moment sequence")
    return _unchecked_moment_set(raw)


def _unchecked_moment_set(raw) -> MomentSet:
    ms = object.__new__(MomentSet)
    raw = np.asarray(raw, dtype=float).copy()
    raw.setflags(write=False)
    object.__setattr__(ms, "raw", raw)
    object.__setattr__(ms, "sup_norm", None)
    object.__setattr__(ms, "centered", _centered_moments(raw))
    return ms


def convolve_moments_additive(x: MomentSet, y: MomentSet) -> MomentSet:
    """Moments of x boxplus y (free cumulants add)."""
    kappa = moments_to_free_cumulants(x.raw) + moments_to_free_cumulants(y.raw)
    return _checked(free_cumulants_to_moments(kappa))


def deconvolve_moments_additive(h: MomentSet, a: MomentSet) -> MomentSet:
    """Moments of b such that h = a boxplus b."""
    kappa = moments_to_free_cumulants(h.raw) - moments_to_free_cumulants(a.raw)
    return _checked(free_cumulants_to_moments(kappa))


def convolve_moments_multiplicative(a: MomentSet, b: MomentSet) -> MomentSet:
    """Moments of a boxtimes b via m_n = sum_{pi in NC(n)} kappa_pi[a] m_{Kr(pi)}[b]."""
    kappa = moments_to_free_cumulants(a.raw)
    out = np.array([
        sum(_cumulants_from(kappa, s) * _cumulants_from(b.raw, kr)
            for s, kr in noncrossing_partitions(n))
        for n in range(1, ORDER + 1)
    ])
    return _checked(out)


def deconvolve_moments_multiplicative(p: MomentSet, a: MomentSet) -> MomentSet:
    """Moments of nu with p = a boxtimes nu, solved triangularly in n."""
    kappa = moments_to_free_cumulants(a.raw)
    if abs(kappa[0]) < 1e-12:
        raise SingularLeadingCumulant("first free cumulant of the noise vanishes")
    nu = np.zeros(ORDER)
    for n in range(1, ORDER + 1):
        singletons = (1,) * n
        rest = sum(_cumulants_from(kappa, s) * _cumulants_from(nu, kr)
                   for s, kr in noncrossing_partitions(n) if s != singletons)
        nu[n - 1] = (p.m(n) - rest) / kappa[0] ** n
    return _checked(nu)


# ---------------------------------------------------------------------------
# mixed moments


def _word(w) -> tuple[int, ...]:
    w = tuple(int(x) for x in w)
    if not 1 <= len(w) <= 3 or any(x < 1 for x in w):
        raise UnsupportedWord(f"unsupported word {w!r}")
    return w


def free_mixed_moment(mu: MomentSet, nu: MomentSet, k_word, kp_word) -> float:
    """Mixed moment tau(x^{k1} y^{k'1} ...) of free x ~ mu and y ~ nu (words of length <= 3)."""
    k, kp = _word(k_word), _word(kp_word)
    if len(k) != len(kp):
        raise UnsupportedWord("word lengths differ")
    if len(k) == 1:
        return mu.m(k[0]) * nu.m(kp[0])
    if len(k) == 2:
        k1, k2 = k
        q1, q2 = kp
        return (mu.m(k1 + k2) * nu.m(q1) * nu.m(q2)
                + mu.m(k1) * mu.m(k2) * nu.m(q1 + q2)
                - mu.m(k1) * mu.m(k2) * nu.m(q1) * nu.m(q2))
    if kp != (1, 1, 1):
        raise UnsupportedWord("length-3 free mixed moments need the second word 1^3")
    k1, k2, k3 = k
    n1 = nu.m(1)
    var = nu.m(2) - n1 ** 2
    return (n1 ** 3 * mu.m(k1 + k2 + k3)
            + n1 * var * (mu.m(k1 + k2) * mu.m(k3) + mu.m(k2 + k3) * mu.m(k1) + mu.m(k3 + k1) * mu.m(k2))
            + nu.k3 * mu.m(k1) * mu.m(k2) * mu.m(k3))


def _cycles(perm) -> list[list[int]]:
    seen = [False] * len(perm)
    out = []
    for s in range(len(perm)):
        if not seen[s]:
            c = []
            t = s
            while not seen[t]:
                seen[t] = True
                c.append(t)
                t = perm[t]
            out.append(c)
    return out


_CYCLE_TYPES = {
    1: {"1": (1,), "id": (1,)},
    2: {"1^2": (1, 1), "2": (2,)},
    3: {"1^3": (1, 1, 1), "21": (1, 2), "3": (3,)},
}


def weingarten_value(N: int, r: int, cycle_type) -> float:
    """Unitary Weingarten function W_{N,r} at a permutation of the given cycle type.

    ``cycle_type`` is either a label such as ``"21"`` / ``"1^3"`` or a tuple of
    cycle lengths.
    """
    if isinstance(cycle_type, str):
        try:
            ct = _CYCLE_TYPES[r][cycle_type.lower()]
        except KeyError as exc:
            raise UnsupportedWord(f"unknown cycle type {cycle_type!r} for r={r}") from exc
    else:
        ct = tuple(sorted(int(c) for c in cycle_type))
    if sum(ct) != r:
        raise UnsupportedWord(f"cycle type {ct} is not a partition of {r}")
    if r == 1:
        if N < 1:
            raise DegenerateDimension("N must be positive")
        return 1.0 / N
    d1 = 1.0 - N ** -2.0
    if r == 2:
        if N < 2:
            raise DegenerateDimension("W_{N,2} needs N >= 2")
        return 1.0 / (N ** 2 * d1) if ct == (1, 1) else -1.0 / (N ** 3 * d1)
    if r == 3:
        if N < 3:
            raise DegenerateDimension("W_{N,3} needs N >= 3")
        d2 = 1.0 - 4.0 * N ** -2.0
        if ct == (1, 1, 1):
            return (1.0 - 2.0 * N ** -2.0) / (N ** 3 * d1 * d2)
        if ct == (1, 2):
            return -1.0 / (N ** 4 * d1 * d2)
        return 2.0 / (N ** 5 * d1 * d2)
    raise UnsupportedWord("Weingarten values are tabulated for r <= 3")


@lru_cache(maxsize=None)
def _wg_terms(r: int):
    """(cycles of gamma*sigma, cycles of tau, cycle type of sigma*tau^-1) for all sigma, tau."""
    perms = list(itertools.permutations(range(r)))
    terms = []
    for sig in perms:
        gs = tuple((sig[t] + 1) % r for t in range(r))
        gs_cycles = tuple(tuple(c) for c in _cycles(gs))
        for tau in perms:
            tau_inv = [0] * r
            for i, j in enumerate(tau):
                tau_inv[j] = i
            st = [sig[tau_inv[i]] for i in range(r)]
            ct = tuple(sorted(len(c) for c in _cycles(st)))
            terms.append((gs_cycles, tuple(tuple(c) for c in _cycles(tau)), ct))
    return tuple(terms)


def weingarten_mixed_moment(a_moment, b_moment, s, sp, N: int) -> float:
    """E tr(A^{s_1} U B^{s'_1} U* ... ) for deterministic A, B and Haar U in U(N).

    ``a_moment(k)`` / ``b_moment(k)`` return normalised traces tr(A^k), tr(B^k).
    The value depends on A and B only through these traces.
    """
    s, sp = _word(s), _word(sp)
    if len(s) != len(sp):
        raise UnsupportedWord("word lengths differ")
    r = len(s)
    total = 0.0
    for gs_cycles, tau_cycles, ct in _wg_terms(r):
        pa = 1.0
        for c in gs_cycles:
            pa *= N * a_moment(sum(s[t] for t in c))
        pb = 1.0
        for c in tau_cycles:
            pb *= N * b_moment(sum(sp[t] for t in c))
        total += weingarten_value(N, r, ct) * pa * pb
    return total / N


WORD_PAIRS = {
    "1,1": ((1,), (1,)),
    "1^2,1^2": ((1, 1), (1, 1)),
    "21,1^2": ((2, 1), (1, 1)),
    "1^3,1^3": ((1, 1, 1), (1, 1, 1)),
    "1^3,21^2": ((1, 1, 1), (2, 1, 1)),
    "1^3,2^3": ((1, 1, 1), (2, 2, 2)),
    "A2B2:1^2,1^2": ((2, 2), (2, 2)),
}
_NEEDS_UNIT_TRACE = {"1^3,1^3", "1^3,21^2"}


def finite_n_mixed_moment(a: MomentSet, b: MomentSet, word_pair: str, N: int) -> float:
    """Finite-N mixed moment m_{A*B}(s, s') for diagonal A, B with the given traces.

    ``word_pair`` is one of :data:`WORD_PAIRS`; ``"A2B2:1^2,1^2"`` is
    m_{A^2*B^2}(1^2, 1^2) and ``"1^3,2^3"`` is m_{A*B^2}(1^3, 1^3).
    """
    if word_pair not in WORD_PAIRS:
        raise UnsupportedWord(f"unsupported word pair {word_pair!r}")
    if word_pair in _NEEDS_UNIT_TRACE and abs(b.m(1) - 1.0) > 1e-9:
        raise NormalizationViolated("length-3 mixed moments are stated for tr(B) = 1")
    s, sp = WORD_PAIRS[word_pair]
    return weingarten_mixed_moment(a.m, b.m, s, sp, N)


def free_limit_mixed_moment(a: MomentSet, b: MomentSet, word_pair: str) -> float:
    """N -> infinity limit of :func:`finite_n_mixed_moment` (free position)."""
    s, sp = WORD_PAIRS[word_pair]
    if len(s) == 3 and sp != (1, 1, 1):
        # the printed length-3 formula fixes the B word to 1^3, so swap roles:
        # tr(A B^2 A B A B) read cyclically with A and B exchanged
        return free_mixed_moment(b, a, sp, s)
    return free_mixed_moment(a, b, s, sp)


def printed_trace_formula(a: MomentSet, b: MomentSet, word_pair: str, N: int) -> float:
    """Closed-form trace expressions exactly as stated for the Haar lemma.

    Only used to document where the closed forms agree with the Weingarten
    expansion; the length-3 expressions do not (see the test-suite).
    """
    a1, a2, a3 = a.m(1), a.m(2), a.m(3)
    b1, b2, b3, b4 = b.m(1), b.m(2), b.m(3), b.m(4)
    d1 = 1.0 - N ** -2.0
    d2 = 1.0 - 4.0 * N ** -2.0
    if word_pair == "1,1":
        return a1 * b1
    if word_pair == "1^2,1^2":
        return (a2 * b1 ** 2 + a1 ** 2 * b2 - a1 ** 2 * b1 ** 2 - a2 * b2 / N ** 2) / d1
    if word_pair == "21,1^2":
        return (a3 * b1 ** 2 + a1 * a2 * b2 - a1 * a2 * b1 ** 2 - a3 * b2 / N ** 2) / d1
    var_a = a2 - a1 ** 2
    if word_pair == "1^3,1^3":
        eps = 6.0 / N ** 2 * (a2 * b2 - b2 * a3 - a2 * b3) + 4.0 / N ** 4 * a3 * b3
        return ((b3 + 3 * b2 ** 2) * var_a + (a3 - 3 * a2 + 2 * a1 ** 3) + eps) / (d1 * d2)
    if word_pair == "1^3,21^2":
        eps = ((a3 * (b4 - 2 * b2 ** 2 - 4 * b3) + a2 * (2 * b2 ** 2 - 6 * b4 + 4 * b2)) / N ** 2
               + a3 * b4 / N ** 4)
        return (b4 + (b2 ** 2 + 2 * b3) * var_a + b2 * (a3 - 3 * a2 + 2 * a1 ** 3) + eps) / (d1 * d2)
    raise UnsupportedWord(f"no closed form stated for {word_pair!r}")


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """The known noise law mu_1: a measure, its moments and a sup-norm bound."""

    measure: Measure
    moments: MomentSet = field(default=None)
    sup_norm: Optional[float] = None

    def __post_init__(self):
        if self.moments is None:
            object.__setattr__(self, "moments", moment_set(self.measure, self.sup_norm))
        if self.sup_norm is None:
            object.__setattr__(self, "sup_norm", self.moments.sup_norm)

    def stieltjes(self, z):
        return self.measure.stieltjes(z)

    def h(self, z):
        """h(z) = -1/m(z) - z."""
        return -1.0 / self.measure.stieltjes(z) - z

    @property
    def sigma(self) -> float:
        return self.moments.sigma

    @property
    def variance(self) -> float:
        return self.moments.variance
