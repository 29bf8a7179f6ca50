"""(t = 0)-Macdonald polynomials, q-Whittaker measures and the push-forward
measure of the local moves.

Arrays on a diagram Lambda are dicts ``{(i, j): value}`` over its cells
(1-based), or tuples in row-major cell order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .localmoves import t_lambda_law
from .qdist import qgeom_pmf, qgeom_tail
from .qkernel import INF, DomainError, log_q_int, q_binomial, q_pochhammer, unpack
from .tableaux import cells, gt_patterns, normalize, outer_corners, pad, transpose, type_of

MAX_PATTERNS = 10**7


@dataclass(frozen=True)
class EnvParams:
    """Column parameters ``alpha`` and row parameters ``alpha_hat``; the
    weight at (i, j) is qGeom(alpha_hat[i-1] * alpha[j-1])."""

    alpha: tuple
    alpha_hat: tuple

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "alpha_hat", tuple(float(a) for a in self.alpha_hat))
        for a in self.alpha + self.alpha_hat:
            if not 0 < a < 1:
                raise DomainError(f"environment parameter {a} outside (0, 1)")

    def rate(self, i: int, j: int) -> float:
        return self.alpha_hat[i - 1] * self.alpha[j - 1]

    def log_partition(self, pairs, q) -> float:
        """sum of log (alpha_hat_i alpha_j; q)_inf over the given cells."""
        return sum(math.log(q_pochhammer(self.rate(i, j), q, INF)) for i, j in pairs)


# -- Macdonald polynomials at t = 0 ------------------------------------------

def _check_partition(lam, N):
    lam = tuple(int(x) for x in lam)
    if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)) or any(x < 0 for x in lam):
        raise DomainError(f"{lam} is not a partition")
    if len(normalize(lam)) > N:
        raise DomainError(f"{lam} has more than {N} parts")
    return pad(normalize(lam), N)


def macdonald_P(lam, x, q, max_patterns: int = MAX_PATTERNS) -> float:
    """Sum over GT patterns with bottom row lam of x^type times the
    q-binomial branching weights."""
    x = tuple(x)
    N = len(x)
    lam = _check_partition(lam, N)
    qv, _ = unpack(q)
    total = 0.0
    for count, p in enumerate(gt_patterns(lam)):
        if count >= max_patterns:
            raise RuntimeError(f"more than {max_patterns} GT patterns")
        w = 1.0
        for xi, e in zip(x, type_of(p)):
            w *= xi**e
        for k in range(2, N + 1):
            for j in range(1, k):
                top = p.entry(k, j) - p.entry(k, j + 1)
                w *= q_binomial(top, p.entry(k, j) - p.entry(k - 1, j), qv)
        total += w
    return total


def _q_norm(lam, q) -> float:
    """(lam_N)_q prod_{i >= 2} (lam_{i-1} - lam_i)_q."""
    out = math.exp(log_q_int(lam[-1], q)) if lam else 1.0
    for a, b in zip(lam, lam[1:]):
        out *= math.exp(log_q_int(a - b, q))
    return out


def macdonald_Q(lam, x, q) -> float:
    x = tuple(x)
    lam = _check_partition(lam, len(x))
    return macdonald_P(lam, x, q) / _q_norm(lam, unpack(q)[0])


def whittaker_psi(lam, x, q) -> float:
    x = tuple(x)
    lam = _check_partition(lam, len(x))
    return math.exp(log_q_int(lam[-1], unpack(q)[0])) * macdonald_Q(lam, x, q)


def ssyt(lam, N: int):
    """Semistandard tableaux of shape lam with entries in 1..N, row by row."""
    lam = normalize(lam)

    def rows_from(r, above):
        if r == len(lam):
            yield ()
            return
        length = lam[r]
        lower = [(above[c] + 1 if above else 1) for c in range(length)]

        def fill(c, prev, acc):
            if c == length:
                yield tuple(acc)
                return
            for v in range(max(prev, lower[c]), N + 1):
                yield from fill(c + 1, v, acc + [v])
        for row in fill(0, 1, []):
            for rest in rows_from(r + 1, row):
                yield (row,) + rest

    yield from rows_from(0, None)


def schur_oracle(lam, x) -> float:
    """Schur polynomial by direct enumeration of semistandard tableaux."""
    x = tuple(x)
    total = 0.0
    for tab in ssyt(lam, len(x)):
        w = 1.0
        for row in tab:
            for v in row:
                w *= x[v - 1]
        total += w
    return total


def qwhittaker_measure(lam, env: EnvParams, q) -> float:
    """P_lam(alpha) Q_lam(alpha_hat) prod (alpha_hat_i alpha_j; q)_inf."""
    n, m = len(env.alpha_hat), len(env.alpha)
    if len(normalize(lam)) > min(n, m):
        return 0.0
    pairs = [(i, j) for i in range(1, n + 1) for j in range(1, m + 1)]
    return (macdonald_P(lam, env.alpha, q) * macdonald_Q(lam, env.alpha_hat, q)
            * math.exp(env.log_partition(pairs, q)))


def partitions_bounded(parts: int, top: int):
    """Partitions with at most ``parts`` parts, each at most ``top``."""
    def rec(k, bound):
        if k == 0:
            yield ()
            return
        for v in range(bound, -1, -1):
            for rest in rec(k - 1, v):
                yield (v,) + rest
    for lam in rec(parts, top):
        yield normalize(lam)


# -- the push-forward measure ------------------------------------------------

def _as_array(t, rows) -> dict:
    if isinstance(t, dict):
        return {c: int(v) for c, v in t.items()}
    cs = cells(rows)
    t = tuple(t)
    if len(t) != len(cs):
        raise DomainError("array does not match the diagram")
    return dict(zip(cs, (int(v) for v in t)))


def in_d_lambda(t: dict) -> bool:
    """Rows and columns weakly increasing, entries nonnegative."""
    for (i, j), v in t.items():
        if v < 0:
            return False
        for nb in ((i - 1, j), (i, j - 1)):
            if nb in t and t[nb] > v:
                return False
    return True


def exponents(t, rows) -> tuple:
    """(r, r_hat): the powers of alpha_j and alpha_hat_i in the measure.

    r_j sums t along the diagonal ending at the bottom cell of column j and
    subtracts the parallel diagonal one step to the left; r_hat_i does the
    same from the last cell of row i.
    """
    rows = normalize(rows)
    t = _as_array(t, rows)
    cols = transpose(rows)
    r = []
    for j in range(1, len(cols) + 1):
        h = cols[j - 1]
        s = sum(t[(h - k + 1, j - k + 1)] for k in range(1, min(j, h) + 1))
        s -= sum(t[(h - k + 1, j - k)] for k in range(1, min(j - 1, h) + 1))
        r.append(s)
    rh = []
    for i in range(1, len(rows) + 1):
        w = rows[i - 1]
        s = sum(t[(i - k + 1, w - k + 1)] for k in range(1, min(i, w) + 1))
        s -= sum(t[(i - k, w - k + 1)] for k in range(1, min(i - 1, w) + 1))
        rh.append(s)
    return tuple(r), tuple(rh)


def log_mu_q_lambda(t, rows, env: EnvParams, q) -> float:
    """log of the push-forward density; -inf outside D_Lambda."""
    rows = normalize(rows)
    t = _as_array(t, rows)
    if set(t) != set(cells(rows)):
        raise DomainError("array must be defined exactly on the diagram")
    if len(env.alpha) < (rows[0] if rows else 0) or len(env.alpha_hat) < len(rows):
        raise DomainError("environment too small for the diagram")
    if not in_d_lambda(t):
        return -math.inf
    qv, _ = unpack(q)
    out = -log_q_int(t[(1, 1)], qv) if t else 0.0
    for (i, j), v in t.items():
        if (i - 1, j - 1) in t:
            out += log_q_int(v - t[(i - 1, j - 1)], qv)
        if (i, j - 1) in t:
            out -= log_q_int(v - t[(i, j - 1)], qv)
        if (i - 1, j) in t:
            out -= log_q_int(v - t[(i - 1, j)], qv)
    r, rh = exponents(t, rows)
    out += sum(e * math.log(env.alpha[j]) for j, e in enumerate(r))
    out += sum(e * math.log(env.alpha_hat[i]) for i, e in enumerate(rh))
    return out + env.log_partition(t.keys(), qv)


def mu_q_lambda(t, rows, env: EnvParams, q) -> float:
    lv = log_mu_q_lambda(t, rows, env, q)
    return 0.0 if lv == -math.inf else math.exp(lv)


@dataclass(frozen=True)
class LmpushReport:
    tv: float
    tail: float
    input_mass: float
    exponent_violations: int
    unreachable_mass: float   # measure mass on arrays never produced

    @property
    def ok(self) -> bool:
        return self.tv <= self.tail + 1e-9 and self.exponent_violations == 0


def verify_lmpush(rows, env: EnvParams, q, cap: int, seq=None) -> LmpushReport:
    """Exact law of T_Lambda on q-geometric inputs truncated at ``cap``
    against the closed-form measure.

    TV is taken between the accumulated sub-probability table and the full
    measure, so measure mass outside the reached arrays counts too.
    """
    from .tableaux import growth_sequences

    rows = normalize(rows)
    cs = cells(rows)
    qv, _ = unpack(q)
    n, m = len(rows), rows[0]
    if seq is None:
        seq = growth_sequences(rows, "row")
    acc = {}
    bad = 0
    mass = 0.0
    for ws in itertools.product(range(cap + 1), repeat=len(cs)):
        w = dict(zip(cs, ws))
        pw = math.prod(qgeom_pmf(env.rate(i, j), qv, w[(i, j)]) for i, j in cs)
        mass += pw
        A = [[w.get((i, j), 0) for j in range(1, m + 1)] for i in range(1, n + 1)]
        law = t_lambda_law(A, rows, seq, qv)
        rsum = tuple(sum(w[c] for c in cs if c[0] == i) for i in range(1, n + 1))
        csum = tuple(sum(w[c] for c in cs if c[1] == j) for j in range(1, m + 1))
        for t, p in law.items():
            if exponents(t, rows) != (csum, rsum):
                bad += 1
            acc[t] = acc.get(t, 0.0) + pw * p
    tail = 1.0 - math.prod(1.0 - qgeom_tail(env.rate(i, j), qv, cap) for i, j in cs)
    mu = {t: mu_q_lambda(t, rows, env, qv) for t in acc}
    covered = math.fsum(mu.values())
    tv = 0.5 * (math.fsum(abs(acc[t] - mu[t]) for t in acc) + max(0.0, 1.0 - covered))
    unreachable = _unreachable_mass(rows, env, qv, cap, set(acc))
    return LmpushReport(tv, tail, mass, bad, unreachable)


def d_lambda_arrays(rows, top: int):
    """Arrays in D_Lambda with every entry at most ``top``."""
    cs = cells(rows)

    def rec(idx, cur):
        if idx == len(cs):
            yield dict(cur)
            return
        i, j = cs[idx]
        lo = max(cur.get((i - 1, j), 0), cur.get((i, j - 1), 0))
        for v in range(lo, top + 1):
            cur[(i, j)] = v
            yield from rec(idx + 1, cur)
        cur.pop((i, j), None)
    yield from rec(0, {})


def _unreachable_mass(rows, env, q, cap, reached) -> float:
    """Measure mass on arrays in D_Lambda, entries <= cap, never reached."""
    cs = cells(rows)
    total = 0.0
    for t in d_lambda_arrays(rows, cap):
        key = tuple(t[c] for c in cs)
        if key not in reached:
            total += mu_q_lambda(t, rows, env, q)
    return total


# -- joint distributions -----------------------------------------------------

def _corner_bounds(rows, pinned: dict) -> dict:
    """Upper bound for each cell: the smallest pinned corner below-right."""
    out = {}
    for i, j in cells(rows):
        vals = [v for (a, b), v in pinned.items() if a >= i and b >= j]
        out[(i, j)] = min(vals)
    return out


def pinned_arrays(rows, pinned: dict):
    """Arrays in D_Lambda taking the given values at the pinned cells.

    Every cell lies weakly above-left of some outer corner, so with all
    corners pinned the enumeration is finite.
    """
    rows = normalize(rows)
    cs = cells(rows)
    bound = _corner_bounds(rows, pinned)

    def rec(idx, cur):
        if idx == len(cs):
            yield dict(cur)
            return
        c = cs[idx]
        lo = max(cur.get((c[0] - 1, c[1]), 0), cur.get((c[0], c[1] - 1), 0))
        if c in pinned:
            choices = [pinned[c]] if pinned[c] >= lo else []
        else:
            choices = range(lo, bound[c] + 1)
        for v in choices:
            cur[c] = v
            yield from rec(idx + 1, cur)
        cur.pop(c, None)
    yield from rec(0, {})


def joint_corner_dist(rows, env: EnvParams, q, corner_values) -> float:
    """Sum of the measure over D_Lambda with the outer corners pinned.

    ``corner_values`` lists values for the outer corners in top-to-bottom
    order, or is a dict keyed by corner cell.
    """
    rows = normalize(rows)
    corners = outer_corners(rows)
    if isinstance(corner_values, dict):
        pinned = {tuple(c): int(v) for c, v in corner_values.items()}
    else:
        pinned = dict(zip(corners, (int(v) for v in corner_values)))
    if set(pinned) != set(corners):
        raise DomainError(f"corner values must cover exactly {corners}")
    return math.fsum(mu_q_lambda(t, rows, env, q) for t in pinned_arrays(rows, pinned))


def qpng_display(p: int, env: EnvParams, q, x) -> float:
    """The closed-form staircase corner law written with joint alpha_hat_i
    alpha_j powers on the last two antidiagonals.  It agrees with
    :func:`joint_corner_dist` on the staircase for p <= 2 only."""
    qv, _ = unpack(q)
    rows = tuple(range(p, 0, -1))
    pinned = {(i, p - i + 1): int(v) for i, v in zip(range(1, p + 1), x)}
    pairs = [(i, j) for i, j in cells(rows)]
    pref = math.exp(env.log_partition(pairs, qv))
    total = 0.0
    for t in pinned_arrays(rows, pinned):
        lv = -log_q_int(t[(1, 1)], qv)
        for (i, j) in pairs:
            if i + j <= p - 1:
                lv += log_q_int(t[(i + 1, j + 1)] - t[(i, j)], qv)
            if i + j <= p:
                lv -= log_q_int(t[(i + 1, j)] - t[(i, j)], qv)
                lv -= log_q_int(t[(i, j + 1)] - t[(i, j)], qv)
            if i + j == p + 1:
                lv += t[(i, j)] * math.log(env.rate(i, j))
        for i in range(2, p + 1):
            j = p + 2 - i
            if j > 1:
                lv -= t[(i - 1, j - 1)] * math.log(env.rate(i, j))
        total += math.exp(lv)
    return pref * total


@dataclass(frozen=True)
class WhittakerReport:
    deviation: float
    worst: tuple
    checked: int


def diagonal_of(n: int, m: int) -> list:
    """Cells (n, m), (n-1, m-1), ... down to the first row or column."""
    return [(n - k, m - k) for k in range(min(n, m))]


def verify_qwhittaker_corollary(n: int, m: int, env: EnvParams, q, cap: int) -> WhittakerReport:
    """Largest gap between the diagonal marginal of the rectangular measure
    and the q-Whittaker measure, over partitions with parts <= cap.

    With the diagonal fixed every entry is bounded by lambda_1, so each
    marginal is a finite sum and no truncation tail arises.
    """
    if len(env.alpha_hat) < n or len(env.alpha) < m:
        raise DomainError("environment too small")
    env = EnvParams(env.alpha[:m], env.alpha_hat[:n])
    rows = (m,) * n
    diag = diagonal_of(n, m)
    worst, dev, count = (), 0.0, 0
    for lam in partitions_bounded(min(n, m), cap):
        lam_p = pad(lam, min(n, m))
        pinned = dict(zip(diag, lam_p))
        total = 0.0
        for t in pinned_arrays(rows, pinned):
            total += mu_q_lambda(t, rows, env, q)
        d = abs(total - qwhittaker_measure(lam, env, q))
        count += 1
        if d > dev:
            dev, worst = d, lam
    return WhittakerReport(dev, worst, count)
