"""The q-polymer, the q-Burke property, stationary boundaries and q-pushTASEP.

Two lattices are used.  The plain polymer lives on cells (l, j) with
l, j >= 1 and takes the matrix entry ``w[l-1][j-1]`` at (l, j); it is the
first edge lambda^j_1(l) of qRSK.  The stationary polymer lives on
[0, N] x [0, M] with Z(0, 0) = 0, q-geometric boundary weights on row and
column 0, and interior weights qGeom(alpha * beta).

The ``*_core`` functions only do arithmetic on their state, so they accept
a :class:`~qrsk.oracle.BatchSampler` and then carry one replica per array
slot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .insertion import _as_matrix, qrsk_core
from .oracle import BatchSampler, Recorder, Replay, Sampler, as_chooser
from .qdist import RngStream, qgeom_pmf, qgeom_tail, qhyp_table
from .qkernel import INF, DomainError, gamma_rate, is_inf, unpack


@dataclass
class PolymerField:
    """Partition function values ``z[(l, j)]``.

    ``origin`` is 1 for the plain polymer (cells l, j >= 1) and 0 for the
    stationary polymer (cells l, j >= 0).  ``boundary`` holds (alpha, beta)
    for stationary fields.
    """

    z: dict
    origin: int = 1
    boundary: tuple | None = None

    def __getitem__(self, cell) -> int:
        return self.z[cell]

    @property
    def shape(self) -> tuple:
        return (max(l for l, _ in self.z), max(j for _, j in self.z)) if self.z else (0, 0)

    def is_monotone(self) -> bool:
        for (l, j), v in self.z.items():
            for nb in ((l - 1, j), (l, j - 1)):
                if nb in self.z and self.z[nb] > v:
                    return False
        return True

    def csv_rows(self) -> list:
        return [(l, j, self.z[(l, j)]) for l, j in sorted(self.z)]


# -- Burke relations ---------------------------------------------------------

def burke_step(U: int, V: int, X: int, q, rng) -> tuple:
    """(U', V', X') from the Burke relations.

    X' ~ qHyp(U, inf, V) (the minimum of U and V at q = 0), then
    U' - U = V' - V = X - X'.
    """
    if min(U, V, X) < 0:
        raise DomainError("Burke inputs must be nonnegative")
    xp = as_chooser(rng).qhyp(U, INF, V, q)
    return U + X - xp, V + X - xp, xp


@dataclass(frozen=True)
class BurkeReport:
    tv: float            # TV between output table and the product law
    tail: float          # input mass discarded by the truncation
    max_dev: float       # largest pointwise gap on outputs with all coordinates <= cap
    xprime_tv: float     # TV of the X' marginal against qGeom(alpha * beta)

    @property
    def ok(self) -> bool:
        return self.tv <= self.tail + 1e-10


def _geom_vec(alpha, q, n):
    return np.array([qgeom_pmf(alpha, q, k) for k in range(n + 1)])


def check_qburke(alpha: float, beta: float, q, cap: int = 40) -> BurkeReport:
    """Push the product law of (U, V, X) truncated at ``cap`` through one
    Burke step exactly, and compare with the product law of the outputs."""
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise DomainError("alpha and beta must lie in (0, 1)")
    qv, _ = unpack(q)
    gamma = alpha * beta
    pu, pv, px = _geom_vec(alpha, qv, cap), _geom_vec(beta, qv, cap), _geom_vec(gamma, qv, cap)
    size = 2 * cap + 1
    out = np.zeros((size, size, cap + 1))
    xs = np.arange(cap + 1)
    for u in range(cap + 1):
        for v in range(cap + 1):
            tab = qhyp_table(u, INF, v, qv)
            ls = np.arange(tab.offset, tab.offset + len(tab.probs))
            w = pu[u] * pv[v] * np.outer(px, np.asarray(tab.probs))
            X, L = np.meshgrid(xs, ls, indexing="ij")
            np.add.at(out, (u + X - L, v + X - L, L), w)
    target = np.einsum("i,j,k->ijk", _geom_vec(alpha, qv, 2 * cap), _geom_vec(beta, qv, 2 * cap), px)
    outside = max(0.0, 1.0 - target.sum())
    tv = 0.5 * (np.abs(out - target).sum() + outside)
    tail = -math.expm1(sum(math.log1p(-qgeom_tail(a, qv, cap)) for a in (alpha, beta, gamma)))
    max_dev = float(np.abs(out - target)[: cap + 1, : cap + 1, :].max())
    xmarg = out.sum(axis=(0, 1))
    xprime_tv = 0.5 * (np.abs(xmarg - px).sum() + max(0.0, 1.0 - px.sum()))
    return BurkeReport(float(tv), float(tail), max_dev, float(xprime_tv))


# -- the plain polymer -------------------------------------------------------

def polymer_core(w, q, ch):
    """Z as nested lists, ``Z[l-1][j-1]`` = Z(l, j), rows filled in order."""
    n = len(w)
    m = len(w[0]) if n else 0
    Z = [[0] * m for _ in range(n)]
    for l in range(n):
        for j in range(m):
            if l == 0:
                Z[0][j] = w[0][j] + (Z[0][j - 1] if j else 0)
            elif j == 0:
                Z[l][0] = w[l][0] + Z[l - 1][0]
            else:
                up, left, diag = Z[l - 1][j], Z[l][j - 1], Z[l - 1][j - 1]
                xp = ch.qhyp(left - diag, INF, up - diag, q)
                Z[l][j] = w[l][j] + up + left - diag - xp
    return Z


def _weights_matrix(weights):
    if isinstance(weights, dict):
        if not weights:
            return []
        n = max(l for l, _ in weights)
        m = max(j for _, j in weights)
        return _as_matrix([[weights.get((l, j), 0) for j in range(1, m + 1)] for l in range(1, n + 1)])
    return _as_matrix(weights)


def polymer_evolve(weights, q, rng) -> PolymerField:
    """Sample the q-polymer on the rectangle spanned by ``weights``.

    ``weights`` is a matrix (row l-1 holds w_{l, .}) or a dict keyed by
    1-based cells; missing cells of a dict count as 0.
    """
    w = _weights_matrix(weights)
    Z = polymer_core(w, q, as_chooser(rng))
    return PolymerField({(l + 1, j + 1): int(v) for l, row in enumerate(Z) for j, v in enumerate(row)})


def polymer_from_qrsk(A, q, seed: int = 0) -> tuple:
    """Run qRSK on A, replay its first-edge draws into the polymer.

    Returns ``(polymer field, first edges)`` where the second entry maps
    (l, j) to lambda^j_1(l) of the qRSK run.
    """
    A = _as_matrix(A)
    rec = Recorder(Sampler(seed=seed))
    _, _, evo, _ = qrsk_core(A, q, rec, keep_evolution=True)
    draws = rec.values(keep=lambda kind, args: kind == "qhyp" and is_inf(args[1]))
    replay = Replay(draws)
    field_ = polymer_evolve(A, q, replay)
    if not replay.exhausted:
        raise RuntimeError("polymer did not use every first-edge draw")
    edges = {(l, j): int(evo[l][j - 1][0]) for l in range(1, len(A) + 1) for j in range(1, len(A[0]) + 1)}
    return field_, edges


def check_polymer_coupling(A, q, seed: int = 0) -> int:
    """Number of cells where the replayed polymer differs from qRSK."""
    field_, edges = polymer_from_qrsk(A, q, seed)
    return sum(field_.z[c] != v for c, v in edges.items())


# -- stationary polymer ------------------------------------------------------

def _check_stationary(alpha, beta):
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise DomainError("alpha and beta must lie in (0, 1)")


def stationary_core(N, M, alpha, beta, q, ch, keep=None):
    """Stationary polymer on [0, N] x [0, M].

    Draw order: w_{0,j} for j = 1..M, then for each row l the weight
    w_{l,0} followed by (w_{l,j}, X') for j = 1..M.  Only two rows are held
    at a time; returns ``{cell: Z}`` for the cells in ``keep`` (all cells
    when ``keep`` is None).
    """
    ab = alpha * beta
    rec = {}
    want = (lambda c: True) if keep is None else (lambda c, s=set(keep): c in s)
    prev = [0] * (M + 1)
    for j in range(1, M + 1):
        prev[j] = prev[j - 1] + ch.qgeom(beta, q)
    for j in range(M + 1):
        if want((0, j)):
            rec[(0, j)] = prev[j]
    for l in range(1, N + 1):
        cur = [0] * (M + 1)
        cur[0] = prev[0] + ch.qgeom(alpha, q)
        for j in range(1, M + 1):
            w = ch.qgeom(ab, q)
            up, left, diag = prev[j], cur[j - 1], prev[j - 1]
            xp = ch.qhyp(left - diag, INF, up - diag, q)
            cur[j] = w + up + left - diag - xp
        for j in range(M + 1):
            if want((l, j)):
                rec[(l, j)] = cur[j]
        prev = cur
    return rec


def stationary_polymer(N: int, M: int, alpha: float, beta: float, q, rng) -> PolymerField:
    _check_stationary(alpha, beta)
    z = stationary_core(N, M, alpha, beta, q, as_chooser(rng))
    return PolymerField({c: int(v) for c, v in z.items()}, origin=0, boundary=(alpha, beta))


def stationary_batch(N, M, alpha, beta, q, reps: int, seed: int = 0, cells=None) -> dict:
    """``{cell: array of reps values}`` from independent stationary replicas."""
    _check_stationary(alpha, beta)
    return stationary_core(N, M, alpha, beta, q, BatchSampler(reps, seed=seed), keep=cells)


def expected_z(l, j, alpha, beta, q) -> float:
    """E Z(l, j) = l gamma(alpha) + j gamma(beta) for the stationary polymer."""
    return l * gamma_rate(alpha, q) + j * gamma_rate(beta, q)


@dataclass
class LlnRow:
    N: int
    cell: tuple
    mean_ratio: float
    stderr: float
    mean_abs_error: float
    within_tol: float     # fraction of replicas with |ratio - limit| < tol


@dataclass
class LlnTable:
    x: float
    y: float
    limit: float
    tol: float
    rows: list = field(default_factory=list)
    final_errors: np.ndarray | None = None

    @property
    def shrinking(self) -> bool:
        errs = [r.mean_abs_error for r in self.rows]
        return all(b < a for a, b in zip(errs, errs[1:]))

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "limit": self.limit, "tol": self.tol,
                "shrinking": self.shrinking,
                "rows": [{"N": r.N, "cell": list(r.cell), "mean_ratio": r.mean_ratio,
                          "stderr": r.stderr, "mean_abs_error": r.mean_abs_error,
                          "within_tol": r.within_tol} for r in self.rows]}


def lln_experiment(x, y, N_list, alpha, beta, q, rng=0, reps: int = 100, tol: float = 0.05) -> LlnTable:
    """Z(floor(Nx), floor(Ny)) / N for each N, over ``reps`` replicas.

    All N share one field per replica (the largest N is simulated and the
    smaller cells are read off), so the rows show the trend along a single
    trajectory family.  ``rng`` is a seed or an :class:`RngStream`.
    """
    _check_stationary(alpha, beta)
    Ns = sorted(int(n) for n in N_list)
    cells = [(math.floor(n * x), math.floor(n * y)) for n in Ns]
    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng), 0)
    ch = BatchSampler(reps, rng=stream)
    z = stationary_core(max(c[0] for c in cells), max(c[1] for c in cells), alpha, beta, q, ch, keep=cells)
    limit = x * gamma_rate(alpha, q) + y * gamma_rate(beta, q)
    table = LlnTable(x, y, limit, tol)
    for n, c in zip(Ns, cells):
        ratio = np.broadcast_to(np.asarray(z[c], dtype=float), (reps,)) / n
        err = np.abs(ratio - limit)
        table.rows.append(LlnRow(n, c, float(ratio.mean()), float(ratio.std(ddof=1) / math.sqrt(reps)),
                                 float(err.mean()), float((err < tol).mean())))
        table.final_errors = err
    return table


# -- stationary geometric q-pushTASEP ----------------------------------------

@dataclass(frozen=True)
class PushTasepState:
    """Positions xi_0 < xi_1 < ... < xi_M at time ``time``."""

    xi: tuple
    time: int = 0

    def gaps(self) -> tuple:
        return tuple(b - a - 1 for a, b in zip(self.xi, self.xi[1:]))


def pushtasep_init_core(M, beta, q, ch):
    xi = [0] * (M + 1)
    for m in range(1, M + 1):
        xi[m] = xi[m - 1] + 1 + ch.qgeom(beta, q)
    return xi


def pushtasep_step_core(xi, alpha, beta, q, ch):
    """One time step.  Particle 0 jumps qGeom(alpha); particle m jumps
    qGeom(alpha beta) + Y with Y = U - X', where U is the jump of particle
    m-1 and X' ~ qHyp(U, inf, gap_m before the step)."""
    new = list(xi)
    new[0] = xi[0] + ch.qgeom(alpha, q)
    for m in range(1, len(xi)):
        x = ch.qgeom(alpha * beta, q)
        u = new[m - 1] - xi[m - 1]
        gap = xi[m] - xi[m - 1] - 1
        y = u - ch.qhyp(u, INF, gap, q)
        new[m] = xi[m] + x + y
    return new


def pushtasep_init(M: int, beta: float, q, rng) -> PushTasepState:
    """M + 1 particles with xi_0 = 0 and i.i.d. qGeom(beta) gaps."""
    xi = pushtasep_init_core(M, beta, q, as_chooser(rng))
    return PushTasepState(tuple(int(v) for v in xi), 0)


def pushtasep_evolve(state: PushTasepState, alpha: float, beta: float, q, rng) -> PushTasepState:
    _check_stationary(alpha, beta)
    new = pushtasep_step_core(list(state.xi), alpha, beta, q, as_chooser(rng))
    assert all(b > a for a, b in zip(new, new[1:])), "particle order violated"
    return PushTasepState(tuple(int(v) for v in new), state.time + 1)


def pushtasep_run(M: int, T: int, alpha: float, beta: float, q, rng) -> list:
    """States at times 0..T.  With the same seed, xi_m(n) = Z(n, m) + m for
    :func:`stationary_polymer` (T, M), since both consume draws in the same
    order."""
    _check_stationary(alpha, beta)
    ch = as_chooser(rng)
    states = [pushtasep_init(M, beta, q, ch)]
    for _ in range(T):
        states.append(pushtasep_evolve(states[-1], alpha, beta, q, ch))
    return states


def pushtasep_batch(M: int, T: int, alpha, beta, q, reps: int, seed: int = 0) -> list:
    """Positions at times 0..T, each a list of M + 1 arrays of length reps."""
    _check_stationary(alpha, beta)
    ch = BatchSampler(reps, seed=seed)
    xi = pushtasep_init_core(M, beta, q, ch)
    out = [xi]
    for _ in range(T):
        xi = pushtasep_step_core(xi, alpha, beta, q, ch)
        out.append(xi)
    return out


def pushtasep_csv_rows(states) -> list:
    return [(s.time, m, x) for s in states for m, x in enumerate(s.xi)]
