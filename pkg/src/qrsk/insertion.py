"""qRSK row insertion in Noumi-Yamada form, and its deterministic relatives.

Patterns are indexed as ``lam[j-1][k-1]`` = lambda^j_k (level j, edge k).
The ``*_core`` functions work on plain nested lists and use only arithmetic
on the entries, so they also run with numpy arrays as entries (one array
slot per replica) under :class:`~qrsk.oracle.BatchSampler`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .oracle import as_chooser
from .qdist import qhahn_table
from .qkernel import INF, DomainError, unpack
from .tableaux import GTPattern, interlaces


@dataclass(frozen=True)
class InsertionTrace:
    before: GTPattern
    after: GTPattern
    a: tuple  # a[j-1][k-1] = a^j_k


@dataclass(frozen=True)
class QrskOutput:
    p_pattern: GTPattern
    q_pattern: GTPattern
    evolution: tuple = field(default=(), compare=False)  # evolution[l] = levels at time l


# -- Noumi-Yamada insertion --------------------------------------------------

def insert_core(lam, row, q, ch):
    """One qRSK row insertion on nested lists; returns ``(new, a)``."""
    m = len(lam)
    new = [list(lev) for lev in lam]
    a = [[None] * j for j in range(1, m + 1)]
    for j in range(1, m + 1):
        a[j - 1][0] = row[j - 1]
    for k in range(1, m + 1):
        new[k - 1][k - 1] = lam[k - 1][k - 1] + a[k - 1][k - 1]
        for j in range(k + 1, m + 1):
            m1 = new[j - 2][k - 1] - lam[j - 2][k - 1]
            m2 = INF if k == 1 else lam[j - 2][k - 2] - new[j - 2][k - 1]
            kk = lam[j - 1][k - 1] - lam[j - 2][k - 1]
            x = ch.qhyp(m1, m2, kk, q)
            a[j - 1][k] = x
            new[j - 1][k - 1] = a[j - 1][k - 1] + lam[j - 1][k - 1] + m1 - x
    return new, a


def _check_row(p: GTPattern, row):
    row = tuple(row)
    if len(row) != p.depth:
        raise DomainError(f"row length {len(row)} differs from pattern depth {p.depth}")
    if any(int(x) != x or x < 0 for x in row):
        raise DomainError("row entries must be nonnegative integers")
    return tuple(int(x) for x in row)


def qrsk_insert_row(p: GTPattern, row, q, rng) -> InsertionTrace:
    row = _check_row(p, row)
    new, a = insert_core([list(l) for l in p.levels], row, q, as_chooser(rng))
    return InsertionTrace(p, GTPattern(tuple(map(tuple, new))), tuple(map(tuple, a)))


def qrsk_core(A, q, ch, keep_evolution=True):
    """Insert the rows of A in turn starting from the empty pattern.

    Returns ``(P levels, Q levels, evolution, a-tables)``.
    """
    n = len(A)
    m = len(A[0]) if n else 0
    lam = [[0] * j for j in range(1, m + 1)]
    evo = [lam] if keep_evolution else []
    tops = [[0] * m]
    atabs = []
    for l in range(n):
        lam, a = insert_core(lam, A[l], q, ch)
        atabs.append(a)
        if keep_evolution:
            evo.append(lam)
        tops.append(list(lam[-1]) if m else [])
    qlev = [[tops[l][j] if j < m else 0 for j in range(l)] for l in range(1, n + 1)]
    return lam, qlev, evo, atabs


def _as_matrix(A):
    A = [list(r) for r in A]
    if A and any(len(r) != len(A[0]) for r in A):
        raise DomainError("ragged matrix")
    for r in A:
        for x in r:
            if int(x) != x or x < 0:
                raise DomainError("matrix entries must be nonnegative integers")
    return [[int(x) for x in r] for r in A]


def qrsk_matrix(A, q, rng, keep_evolution: bool = True) -> QrskOutput:
    A = _as_matrix(A)
    lam, qlev, evo, _ = qrsk_core(A, q, as_chooser(rng), keep_evolution)
    return QrskOutput(_pattern(lam), _pattern(qlev),
                      tuple(tuple(map(tuple, e)) for e in evo))


def _pattern(levels):
    return GTPattern(tuple(tuple(int(x) for x in lev) for lev in levels))


def qrsk_pq(ch, A, q):
    """(P, Q) level tuples of one run; the outcome used for exact laws."""
    lam, qlev, _, _ = qrsk_core(A, q, ch, keep_evolution=False)
    return (tuple(map(tuple, lam)), tuple(map(tuple, qlev)))


# -- the q-Hahn form ---------------------------------------------------------

def qhahn_insert_core(lam, row, q, ch):
    """Row insertion that splits each level increment with q-Hahn draws.

    The increment of edge k at level j-1 is split into a right part r (kept
    on edge k of level j) drawn from the q-Hahn law with base 1/q, and a left
    part passed to edge k+1.  Needs q > 0.
    """
    qv, _ = unpack(q)
    if qv <= 0:
        raise DomainError("the q-Hahn form needs q > 0")
    m = len(lam)
    new = [list(lev) for lev in lam]
    if m == 0:
        return new
    new[0][0] = lam[0][0] + row[0]
    for j in range(2, m + 1):
        new[j - 1][0] += row[j - 1]
        for k in range(1, j):
            delta = new[j - 2][k - 1] - lam[j - 2][k - 1]
            xi = qv ** (lam[j - 1][k - 1] - lam[j - 2][k - 1])
            eta = 0.0 if k == 1 else qv ** (lam[j - 2][k - 2] - lam[j - 2][k - 1])
            r = ch.choose(qhahn_table(xi, eta, delta, 1.0 / qv).normalized())
            new[j - 1][k - 1] += r
            new[j - 1][k] += delta - r
    return new


def qhahn_insert_row(p: GTPattern, row, q, rng) -> GTPattern:
    row = _check_row(p, row)
    new = qhahn_insert_core([list(l) for l in p.levels], row, q, as_chooser(rng))
    return _pattern(new)


# -- deterministic references ------------------------------------------------

def rsk_insert_core(lam, row):
    m = len(lam)
    new = [list(lev) for lev in lam]
    a = [[None] * j for j in range(1, m + 1)]
    for j in range(1, m + 1):
        a[j - 1][0] = row[j - 1]
    for k in range(1, m + 1):
        new[k - 1][k - 1] = lam[k - 1][k - 1] + a[k - 1][k - 1]
        for j in range(k + 1, m + 1):
            new[j - 1][k - 1] = a[j - 1][k - 1] + max(lam[j - 1][k - 1], new[j - 2][k - 1])
            a[j - 1][k] = (a[j - 1][k - 1] + lam[j - 1][k - 1] - new[j - 1][k - 1]
                           + new[j - 2][k - 1] - lam[j - 2][k - 1])
    return new, a


def rsk_insert_row(p: GTPattern, row) -> GTPattern:
    row = _check_row(p, row)
    return _pattern(rsk_insert_core([list(l) for l in p.levels], row)[0])


def rsk_matrix(A) -> QrskOutput:
    A = _as_matrix(A)
    n = len(A)
    m = len(A[0]) if n else 0
    lam = [[0] * j for j in range(1, m + 1)]
    evo = [lam]
    for l in range(n):
        lam, _ = rsk_insert_core(lam, A[l])
        evo.append(lam)
    qlev = [[evo[l][-1][j] if j < m else 0 for j in range(l)] for l in range(1, n + 1)]
    return QrskOutput(_pattern(lam), _pattern(qlev), tuple(tuple(map(tuple, e)) for e in evo))


def grsk_insert_core(z, row, time):
    """Geometric insertion at ``time`` (1-based) on nested lists of reals.

    Only edges k <= time carry information.  Edge k = time is entered for
    the first time: its boundary entry starts at 1 and its bulk entries at 0,
    which reproduces the upper-boundary recursion of the integer algorithm.
    """
    m = len(z)
    z = [list(lev) for lev in z]
    top = min(time, m)
    if time <= m:
        for j in range(time, m + 1):
            z[j - 1][time - 1] = 1.0 if j == time else 0.0
    new = [list(lev) for lev in z]
    a = [[None] * j for j in range(1, m + 1)]
    for j in range(1, m + 1):
        a[j - 1][0] = math.exp(row[j - 1])
    for k in range(1, top + 1):
        new[k - 1][k - 1] = z[k - 1][k - 1] * a[k - 1][k - 1]
        for j in range(k + 1, m + 1):
            new[j - 1][k - 1] = a[j - 1][k - 1] * (z[j - 1][k - 1] + new[j - 2][k - 1])
            if k < top:
                a[j - 1][k] = (a[j - 1][k - 1] * z[j - 1][k - 1] * new[j - 2][k - 1]
                               / (new[j - 1][k - 1] * z[j - 2][k - 1]))
    return new


def grsk_matrix(A) -> list:
    """Levels z[j-1][k-1] after inserting every row; inactive entries are 0."""
    n = len(A)
    m = len(A[0]) if n else 0
    z = [[0.0] * j for j in range(1, m + 1)]
    for l in range(n):
        z = grsk_insert_core(z, [float(x) for x in A[l]], l + 1)
    return z


def grsk_insert_row(z, row, time: int):
    return grsk_insert_core(z, row, time)


# -- path oracles ------------------------------------------------------------

MAX_PATH_CELLS = 24


def _paths(n, m):
    if n + m - 1 > MAX_PATH_CELLS:
        raise DomainError(f"{n}x{m} matrix exceeds the path-enumeration guard")
    for downs in itertools.combinations(range(n + m - 2), n - 1):
        i = j = 0
        cells = [(0, 0)]
        ds = set(downs)
        for s in range(n + m - 2):
            if s in ds:
                i += 1
            else:
                j += 1
            cells.append((i, j))
        yield cells


def dlpp_bruteforce(A) -> int:
    """Maximum weight of an up-right path from (1,1) to (n,m)."""
    n, m = len(A), len(A[0])
    return max(sum(A[i][j] for i, j in p) for p in _paths(n, m))


def dp_partition_bruteforce(A) -> float:
    """log of the sum over up-right paths of exp(path weight)."""
    n, m = len(A), len(A[0])
    ws = [sum(A[i][j] for i, j in p) for p in _paths(n, m)]
    top = max(ws)
    return top + math.log(math.fsum(math.exp(w - top) for w in ws))


# -- structural checks -------------------------------------------------------

def check_structural_lemmas(A, q, rng, reps: int = 1) -> int:
    """Count violations of the zero-propagation, upper-boundary, interlacing
    and weight-preservation properties over ``reps`` sampled runs."""
    A = _as_matrix(A)
    ch = as_chooser(rng)
    n = len(A)
    m = len(A[0]) if n else 0
    bad = 0
    for _ in range(reps):
        _, _, evo, atabs = qrsk_core(A, q, ch, keep_evolution=True)
        for t in range(n + 1):
            lam = evo[t]
            for j in range(1, m + 1):
                for k in range(1, j + 1):
                    if t < k and lam[j - 1][k - 1] != 0:
                        bad += 1
                colsum = sum(A[i][c] for i in range(t) for c in range(j))
                if sum(lam[j - 1]) != colsum:
                    bad += 1
            if t >= 1:
                prev = evo[t - 1]
                a = atabs[t - 1]
                for j in range(1, m + 1):
                    if not interlaces(prev[j - 1], lam[j - 1]):
                        bad += 1
                    if j >= 2 and not interlaces(lam[j - 2], lam[j - 1]):
                        bad += 1
                    if j > t and t <= m and lam[j - 1][t - 1] != lam[j - 2][t - 1] + a[j - 1][t - 1]:
                        bad += 1
                if t <= m and lam[t - 1][t - 1] != a[t - 1][t - 1]:
                    bad += 1
    return bad
