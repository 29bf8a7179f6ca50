"""q-arithmetic primitives: q-Pochhammer symbols, q-integers, Gaussian binomials.

All functions take the deformation parameter ``q`` either as a plain float or
as a :class:`QParams`.  ``INF`` is the extended-integer infinity used for
``k = INF`` Pochhammers, the ``lambda_0 = INF`` edge convention and the
``m2 = INF`` hypergeometric branch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

INF = math.inf
DEFAULT_INF_TOL = 1e-15


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a q-function."""


@dataclass(frozen=True)
class QParams:
    q: float
    inf_tol: float = DEFAULT_INF_TOL
    log_space: bool = False

    def __post_init__(self):
        if not 0.0 <= self.q < 1.0:
            raise DomainError(f"q must lie in [0, 1), got {self.q}")
        if not 0.0 < self.inf_tol < 1e-6:
            raise DomainError(f"inf_tol must lie in (0, 1e-6), got {self.inf_tol}")


def unpack(q):
    """Return ``(q, inf_tol)`` from a float or a QParams."""
    if isinstance(q, QParams):
        return q.q, q.inf_tol
    return float(q), DEFAULT_INF_TOL


def is_inf(k) -> bool:
    return isinstance(k, float) and math.isinf(k) and k > 0


def q_pochhammer(a: float, q, k) -> float:
    """(a; q)_k for integer k (any sign) or k = INF.

    For ``k = INF`` the product stops once ``|a q^i| < inf_tol``; the
    neglected tail changes the value by a relative amount of at most
    ``inf_tol / (1 - q)``.
    """
    qv, tol = unpack(q)
    if is_inf(k):
        if abs(a) >= 1:
            raise DomainError(f"(a;q)_inf needs |a| < 1, got a={a}")
        if isinstance(q, QParams) and q.log_space:
            return math.exp(log_q_pochhammer_inf(a, qv, tol))
        prod = 1.0
        term = a
        while abs(term) >= tol:
            prod *= 1.0 - term
            term *= qv
            if qv == 0.0:
                break
        return prod
    k = int(k)
    if k == 0:
        return 1.0
    if k > 0:
        prod = 1.0
        for i in range(k):
            prod *= 1.0 - a * qv**i
        return prod
    prod = 1.0
    for i in range(1, -k + 1):
        if qv == 0.0:
            raise DomainError("negative-index Pochhammer needs q > 0")
        factor = 1.0 - a * qv ** (-i)
        if factor == 0.0:
            raise DomainError(f"pole of (a;q)_k at a={a}, k={k}")
        prod /= factor
    return prod


def log_q_pochhammer_inf(a: float, q: float, tol: float = DEFAULT_INF_TOL) -> float:
    s = 0.0
    term = a
    while abs(term) >= tol:
        s += math.log1p(-term)
        term *= q
        if q == 0.0:
            break
    return s


@lru_cache(maxsize=None)
def _log_qfact_table(q: float, n: int) -> tuple:
    out = [0.0]
    acc = 0.0
    for i in range(1, n + 1):
        acc += math.log1p(-(q**i))
        out.append(acc)
    return tuple(out)


def log_q_int(k: int, q) -> float:
    """log (q; q)_k, k >= 0."""
    qv, _ = unpack(q)
    if k < 0:
        raise DomainError(f"q_int needs k >= 0, got {k}")
    size = 64
    while size < k:
        size *= 2
    return _log_qfact_table(qv, size)[k]


def q_int(k: int, q) -> float:
    """(k)_q = (q; q)_k."""
    qv, _ = unpack(q)
    if k < 0:
        raise DomainError(f"q_int needs k >= 0, got {k}")
    if qv == 0.0:
        return 1.0
    return math.exp(log_q_int(k, qv))


def q_binomial(n: int, k: int, q) -> float:
    """Gaussian binomial coefficient; zero outside 0 <= k <= n.

    Works for any base (including bases above one, which the q-Hahn
    distribution needs) through the finite product
    prod_{i<k} (1 - q^(n-i)) / (1 - q^(i+1)).
    """
    qv, _ = unpack(q)
    if k < 0 or k > n:
        return 0.0
    k = min(k, n - k)
    out = 1.0
    for i in range(k):
        out *= (1.0 - qv ** (n - i)) / (1.0 - qv ** (i + 1))
    return out


def gamma_rate(x: float, q) -> float:
    """x (log E_q)'(x) = sum_{i>=0} x q^i / (1 - x q^i).

    This is the mean of the q-geometric distribution with parameter x.
    """
    qv, tol = unpack(q)
    if not 0.0 < x < 1.0:
        raise DomainError(f"gamma_rate needs 0 < x < 1, got {x}")
    total = 0.0
    xi = x
    while True:
        term = xi / (1.0 - xi)
        total += term
        if qv == 0.0 or term < tol * total:
            break
        xi *= qv
    return total
