"""The q-geometric, q-Hahn and q-hypergeometric distributions.

Pmf evaluation, pmf tables for inverse-CDF sampling, and the finite
identities tying the distributions together.
"""
from __future__ import annotations

import bisect
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .qkernel import (
    INF,
    DomainError,
    is_inf,
    log_q_int,
    q_binomial,
    q_int,
    q_pochhammer,
    unpack,
)

QGEOM_TAIL_TOL = 1e-14

# Counts truncated q-geometric tables whose residual mass was folded into the
# last support point.  Keyed by (alpha, q).
truncation_events: Counter = Counter()


@dataclass(frozen=True)
class DiscretePmf:
    """Probability table on the integers ``offset, offset + 1, ...``.

    ``tail`` records mass that was cut off when the table was built from an
    infinite support (0 for exact tables).
    """

    offset: int
    probs: tuple
    tail: float = 0.0
    _cdf: list = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if any(p < 0 for p in self.probs):
            raise DomainError("negative probability in pmf table")

    def __len__(self):
        return len(self.probs)

    @property
    def support(self) -> range:
        return range(self.offset, self.offset + len(self.probs))

    def prob(self, k: int) -> float:
        i = k - self.offset
        if 0 <= i < len(self.probs):
            return self.probs[i]
        return 0.0

    def atoms(self) -> list:
        """Nonzero atoms as ``(value, prob)`` pairs."""
        return [(self.offset + i, p) for i, p in enumerate(self.probs) if p > 0.0]

    def total(self) -> float:
        return math.fsum(self.probs)

    def mean(self) -> float:
        return math.fsum((self.offset + i) * p for i, p in enumerate(self.probs))

    @property
    def cdf(self) -> list:
        if self._cdf is None:
            c = np.cumsum(self.probs).tolist()
            c[-1] = max(c[-1], 1.0)
            object.__setattr__(self, "_cdf", c)
        return self._cdf

    def sample(self, u: float) -> int:
        """Inverse-CDF lookup for a uniform ``u`` in [0, 1)."""
        i = bisect.bisect_right(self.cdf, u)
        return self.offset + min(i, len(self.probs) - 1)

    def normalized(self) -> "DiscretePmf":
        s = self.total()
        return DiscretePmf(self.offset, tuple(p / s for p in self.probs), self.tail)

    def to_json(self) -> str:
        return json.dumps({"offset": self.offset, "probs": list(self.probs)})

    @classmethod
    def from_json(cls, text: str) -> "DiscretePmf":
        d = json.loads(text)
        return cls(int(d["offset"]), tuple(d["probs"]))


class RngStream:
    """Reproducible uniform stream identified by ``(seed, stream_id)``.

    Distinct stream ids give statistically independent streams.
    """

    _BUF = 4096

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))
        self._buf = []
        self._pos = 0

    def uniform(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self.generator.random(self._BUF).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def spawn(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


# -- q-geometric -------------------------------------------------------------

def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"q-geometric parameter must lie in (0, 1), got {alpha}")


def qgeom_pmf(alpha: float, q, k: int) -> float:
    """alpha^k (alpha; q)_inf / (k)_q."""
    _check_alpha(alpha)
    if k < 0:
        return 0.0
    qv, tol = unpack(q)
    return alpha**k * q_pochhammer(alpha, q, INF) / q_int(k, qv)


def qgeom_log_pmf(alpha: float, q, k: int) -> float:
    _check_alpha(alpha)
    qv, _ = unpack(q)
    return k * math.log(alpha) + math.log(q_pochhammer(alpha, q, INF)) - log_q_int(k, qv)


@lru_cache(maxsize=4096)
def qgeom_table(alpha: float, q: float, tail_tol: float = QGEOM_TAIL_TOL) -> DiscretePmf:
    """q-geometric table extended until the cumulative mass reaches
    ``1 - tail_tol``; the leftover mass goes on the next support point."""
    _check_alpha(alpha)
    base = q_pochhammer(alpha, q, INF)
    probs = []
    cum = 0.0
    k = 0
    while cum < 1.0 - tail_tol:
        p = alpha**k * base / q_int(k, q)
        probs.append(p)
        cum += p
        k += 1
    residual = 1.0 - math.fsum(probs)
    if residual > 0:
        probs.append(residual)
        truncation_events[(alpha, q)] += 1
    return DiscretePmf(0, tuple(probs), tail=max(residual, 0.0))


def qgeom_tail(alpha: float, q, cap: int) -> float:
    """P(X > cap) for X ~ qGeom(alpha), summed directly (no cancellation)."""
    qv, _ = unpack(q)
    total = 0.0
    k = cap + 1
    while True:
        p = qgeom_pmf(alpha, qv, k)
        total += p
        if p < 1e-18 * max(total, 1e-300) or p == 0.0:
            break
        k += 1
    return total


def qgeom_sample(alpha: float, q, rng: RngStream) -> int:
    qv, _ = unpack(q)
    return qgeom_table(alpha, qv).sample(rng.uniform())


# -- q-Hahn ------------------------------------------------------------------

def qhahn_pmf(xi: float, eta: float, n, q_base: float, k: int) -> float:
    """phi_{q_base, xi, eta}(k | n).

    ``q_base`` may exceed 1 (the q-RSK instantiates it at 1/q); every
    Pochhammer is then a finite product.  ``n = INF`` needs ``q_base < 1``.
    """
    if is_inf(n):
        if q_base >= 1:
            raise DomainError("q-Hahn with n = INF needs a base below 1")
        if k < 0:
            return 0.0
        den = q_pochhammer(eta, q_base, INF)
        if den == 0.0:
            raise DomainError("(eta; q)_n vanishes")
        return (xi**k * q_pochhammer(eta / xi, q_base, k) * q_pochhammer(xi, q_base, INF)
                / den / q_int(k, q_base))
    n = int(n)
    if k < 0 or k > n:
        return 0.0
    den = _poch(eta, q_base, n)
    if den == 0.0:
        raise DomainError("(eta; q)_n vanishes")
    ratio = _poch_ratio(eta, xi, q_base, k) if xi != 0 else (1.0 if k == 0 else 0.0)
    return xi**k * ratio * _poch(xi, q_base, n - k) / den * q_binomial(n, k, q_base)


# With base 1/q and xi, eta powers of q, a factor 1 - a base^i is exactly
# zero when the exponents cancel; rounding leaves ~1e-16 there instead.
_ZERO_FACTOR = 1e-12


def _poch(a, base, k):
    out = 1.0
    for i in range(k):
        f = 1.0 - a * base**i
        out *= 0.0 if abs(f) < _ZERO_FACTOR else f
    return out


def _poch_ratio(eta, xi, base, k):
    return _poch(eta / xi, base, k)


def qhahn_table(xi: float, eta: float, n: int, q_base: float) -> DiscretePmf:
    return DiscretePmf(0, tuple(qhahn_pmf(xi, eta, n, q_base, k) for k in range(n + 1)))


# -- q-hypergeometric --------------------------------------------------------

def qhyp_support(m1: int, m2, k: int) -> tuple:
    lo = 0 if is_inf(m2) else max(0, k - int(m2))
    return lo, min(m1, k)


def _check_qhyp(m1, m2, k):
    if m1 < 0 or k < 0 or m2 < 0:
        raise DomainError(f"qHyp parameters must be nonnegative: {(m1, m2, k)}")
    if not is_inf(m2) and m1 + m2 < k:
        raise DomainError(f"qHyp needs m1 + m2 >= k: {(m1, m2, k)}")


def qhyp_pmf(m1: int, m2, k: int, q, l: int) -> float:
    """pmf of qHyp(m1, m2, k) at l; m2 may be INF."""
    _check_qhyp(m1, m2, k)
    qv, _ = unpack(q)
    lo, hi = qhyp_support(m1, m2, k)
    if l < lo or l > hi:
        return 0.0
    power = qv ** ((m1 - l) * (k - l))
    if power == 0.0:
        return 0.0
    if qv == 0.0:
        return 1.0
    if is_inf(m2):
        logv = (log_q_int(m1, qv) + log_q_int(k, qv) - log_q_int(l, qv)
                - log_q_int(m1 - l, qv) - log_q_int(k - l, qv))
        return power * math.exp(logv)
    m2 = int(m2)
    return (power * q_binomial(m1, l, qv) * q_binomial(m2, k - l, qv)
            / q_binomial(m1 + m2, k, qv))


@lru_cache(maxsize=200_000)
def qhyp_table(m1: int, m2, k: int, q: float) -> DiscretePmf:
    """Normalized sampling table of qHyp(m1, m2, k)."""
    lo, hi = qhyp_support(m1, m2, k)
    if qv_is_zero(q) or lo == hi:
        point = min(m1, k)
        return DiscretePmf(point, (1.0,))
    return DiscretePmf(lo, tuple(qhyp_pmf(m1, m2, k, q, l) for l in range(lo, hi + 1))).normalized()


def qv_is_zero(q) -> bool:
    return unpack(q)[0] == 0.0


def qhyp_sample(m1: int, m2, k: int, q, rng: RngStream) -> int:
    _check_qhyp(m1, m2, k)
    return qhyp_table(int(m1), m2 if is_inf(m2) else int(m2), int(k), unpack(q)[0]).sample(rng.uniform())


# -- identities --------------------------------------------------------------

def qbinhyp_rhs(a: int, b: int, c: int, q, s: int) -> float:
    """q^{s(s+a-c)} binom(b,a)^{-1} binom(c,s) binom(b-c, s+a-c)."""
    qv, _ = unpack(q)
    e = s * (s + a - c)
    if qv == 0.0 and e < 0:
        raise DomainError("negative power of q = 0")
    top = q_binomial(c, s, qv) * q_binomial(b - c, s + a - c, qv)
    if top == 0.0:
        return 0.0
    return qv**e * top / q_binomial(b, a, qv)


def check_qhahn_to_qhyp(a: int, b: int, c: int, q) -> float:
    """max_s |phi_{1/q, q^a, q^b}(s|c) - qHyp(c, b-c, a)(c-s)|.

    At q = 0 the base 1/q does not exist; the closed form of the q-Hahn
    weights is compared instead.
    """
    if not (0 <= a <= b and c <= b and c >= 0):
        raise DomainError(f"need 0 <= a <= b >= c >= 0, got {(a, b, c)}")
    qv, _ = unpack(q)
    dev = 0.0
    for s in range(c + 1):
        if qv == 0.0:
            lhs = qbinhyp_rhs(a, b, c, 0.0, s) if s * (s + a - c) >= 0 else 0.0
        else:
            lhs = qhahn_pmf(qv**a, qv**b, c, 1.0 / qv, s)
        dev = max(dev, abs(lhs - qhyp_pmf(c, b - c, a, qv, c - s)))
    return dev


def check_qbinhyp(a: int, b: int, c: int, q) -> float:
    """max_s |phi_{1/q, q^a, q^b}(s|c) - closed form|, q > 0."""
    qv, _ = unpack(q)
    dev = 0.0
    for s in range(c + 1):
        lhs = qhahn_pmf(qv**a, qv**b, c, 1.0 / qv, s)
        if s * (s + a - c) < 0 and lhs == 0.0:
            continue
        dev = max(dev, abs(lhs - qbinhyp_rhs(a, b, c, qv, s)))
    return dev


class IdentityDeviations(NamedTuple):
    qhyp: float
    qhypinf: float
    vandermonde: float


def check_qhyp_identities(m1: int, m2: int, k: int, q) -> IdentityDeviations:
    """Deviations of the two summation identities and q-Vandermonde.

    Each deviation is ``|LHS / RHS - 1|``: the identities are the statement
    that the qHyp weights sum to one, and the scale of both sides grows like
    1/(q;q)_n^3 as q approaches 1.
    """
    qv, _ = unpack(q)
    if m1 < 0 or m2 < 0 or k < 0 or m1 + m2 < k:
        raise DomainError(f"need nonnegative m1, m2, k with m1 + m2 >= k: {(m1, m2, k)}")

    def qi(n):
        return q_int(n, qv)

    terms = []
    for s in range(max(0, k - m2), min(m1, k) + 1):
        terms.append(qv ** ((m1 - s) * (k - s)) / (qi(m1 - s) * qi(k - s) * qi(s) * qi(m2 - k + s)))
    rhs = qi(m1 + m2) / (qi(m1) * qi(m2) * qi(k) * qi(m1 + m2 - k))
    d_qhyp = abs(math.fsum(terms) / rhs - 1.0)

    terms = [qv ** ((m1 - s) * (k - s)) / (qi(m1 - s) * qi(k - s) * qi(s))
             for s in range(0, min(m1, k) + 1)]
    rhs = 1.0 / (qi(m1) * qi(k))
    d_inf = abs(math.fsum(terms) / rhs - 1.0)

    terms = [qv ** ((m1 - l) * (k - l)) * q_binomial(m1, l, qv) * q_binomial(m2, k - l, qv)
             for l in range(max(0, k - m2), min(m1, k) + 1)]
    rhs = q_binomial(m1 + m2, k, qv)
    d_vdm = abs(math.fsum(terms) / rhs - 1.0)
    return IdentityDeviations(d_qhyp, d_inf, d_vdm)
