"""q-local moves on arrays with labelled horizontal edges, and q-PNG.

An array holds entries ``w[(i, j)]`` for i, j >= 1 (missing entries are 0)
and edge labels ``e[(i, j)]`` on the edge between (i-1, j) and (i, j)
(missing labels are INF).  The moves mutate the array in place and return
it; :func:`t_lambda` copies its input first.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .insertion import qrsk_core
from .oracle import (
    DEFAULT_GUARD, Recorder, Replay, as_chooser, enumerate_law, tv_distance,
)
from .qkernel import INF, DomainError, is_inf
from .tableaux import (
    added_cell, all_growth_sequences, cells, check_growth_sequence, contains, growth_sequences, lambda_coordinate,
    normalize,
)


@dataclass
class EdgeLabeledArray:
    entries: dict = field(default_factory=dict)
    hedges: dict = field(default_factory=dict)

    @classmethod
    def from_matrix(cls, A) -> "EdgeLabeledArray":
        return cls({(i + 1, j + 1): x for i, r in enumerate(A) for j, x in enumerate(r)})

    def w(self, i, j):
        return self.entries.get((i, j), 0)

    def e(self, i, j):
        return self.hedges.get((i, j), INF)

    def copy(self) -> "EdgeLabeledArray":
        return EdgeLabeledArray(dict(self.entries), dict(self.hedges))

    def restrict(self, rows) -> tuple:
        """Entries on the cells of a diagram, row-major."""
        return tuple(self.w(i, j) for i, j in cells(rows))

    def to_json(self) -> str:
        def enc(v):
            return "INF" if is_inf(v) else int(v)
        return json.dumps({
            "entries": [[i, j, enc(v)] for (i, j), v in sorted(self.entries.items())],
            "hedges": [[i, j, enc(v)] for (i, j), v in sorted(self.hedges.items())],
        })

    @classmethod
    def from_json(cls, text: str) -> "EdgeLabeledArray":
        d = json.loads(text)

        def dec(v):
            return INF if v == "INF" else int(v)
        return cls({(i, j): dec(v) for i, j, v in d["entries"]},
                   {(i, j): dec(v) for i, j, v in d["hedges"]})


def _reject(cond, msg):
    if bool(np.any(cond)):
        raise DomainError(msg)


def apply_l(arr: EdgeLabeledArray, i: int, j: int, q, rng) -> EdgeLabeledArray:
    """The random move l on the window with bottom-right corner (i, j)."""
    d = arr.w(i, j)
    if i > 1 and j > 1:
        a, b, c = arr.w(i - 1, j - 1), arr.w(i - 1, j), arr.w(i, j - 1)
        e = arr.e(i, j)
        _reject((b < a) | (c < a), f"malformed window at {(i, j)}")
        if not is_inf(e):
            _reject(c - a + e < b - a, f"edge label too small at {(i, j)}")
        a2 = as_chooser(rng).qhyp(c - a, e, b - a, q)
        arr.entries[(i - 1, j - 1)] = a2
        arr.entries[(i, j)] = b + c + d - a - a2
    elif i == 1 and j > 1:
        arr.entries[(i, j)] = arr.w(i, j - 1) + d
    elif j == 1 and i > 1:
        arr.entries[(i, j)] = arr.w(i - 1, j) + d
    return arr


def apply_lprime(arr: EdgeLabeledArray, i: int, j: int) -> EdgeLabeledArray:
    """Store w(i, j) - w(i, j-1) on the edge (i, j); no-op on the boundary."""
    if i > 1 and j > 1:
        arr.hedges[(i, j)] = arr.w(i, j) - arr.w(i, j - 1)
    return arr


def apply_rho(arr: EdgeLabeledArray, n: int, k: int, q, rng) -> EdgeLabeledArray:
    """l moves down the diagonal from (n, k) towards the top-left, then l'
    moves down the diagonal from (n-1, k)."""
    ch = as_chooser(rng)
    for s in range(min(n, k)):
        apply_l(arr, n - s, k - s, q, ch)
    for s in range(min(n - 1, k)):
        apply_lprime(arr, n - 1 - s, k - s)
    return arr


def t_lambda(arr: EdgeLabeledArray, rows, seq, q, rng) -> EdgeLabeledArray:
    """Compose rho over the cells added by a growth sequence of ``rows``."""
    check_growth_sequence(seq, rows)
    ch = as_chooser(rng)
    out = arr.copy()
    for a, b in zip(seq, seq[1:]):
        n, k = added_cell(normalize(a), normalize(b))
        apply_rho(out, n, k, q, ch)
    return out


# -- the strip form ----------------------------------------------------------

def strip_rho(t: dict, n: int, k: int, q, rng) -> dict:
    """rho_{n,k} written directly on the values of the tridiagonal strip.

    Every right-hand side uses the values before the move.  Along the
    diagonal, cell (i, j) becomes t(i-1,j) + t(i,j-1) - t(i-1,j-1) + X - X',
    where X is the variable drawn one cell further down (X = t(n,k) at the
    start) and X' ~ qHyp(t(i,j-1) - t(i-1,j-1), t(i,j) - t(i,j-1),
    t(i-1,j) - t(i-1,j-1)), with the middle argument INF at (n, k).
    """
    ch = as_chooser(rng)
    g = t.get
    new = {}
    x = g((n, k), 0)
    for s in range(min(n, k)):
        i, j = n - s, k - s
        if i > 1 and j > 1:
            tl, up, left = g((i - 1, j - 1), 0), g((i - 1, j), 0), g((i, j - 1), 0)
            m2 = INF if s == 0 else g((i, j), 0) - left
            x2 = ch.qhyp(left - tl, m2, up - tl, q)
            new[(i, j)] = up + left - tl + x - x2
            x = x2
        elif i == 1 and j > 1:
            new[(i, j)] = g((1, j - 1), 0) + x
        elif j == 1 and i > 1:
            new[(i, j)] = g((i - 1, 1), 0) + x
        else:
            new[(i, j)] = x
    out = dict(t)
    out.update(new)
    return out


def strip_t_lambda(entries: dict, rows, seq, q, rng) -> dict:
    check_growth_sequence(seq, rows)
    ch = as_chooser(rng)
    t = dict(entries)
    for a, b in zip(seq, seq[1:]):
        n, k = added_cell(normalize(a), normalize(b))
        t = strip_rho(t, n, k, q, ch)
    return t


# -- exact laws and the qRSK correspondence ----------------------------------

def _bounding(rows):
    rows = normalize(rows)
    return len(rows), (rows[0] if rows else 0)


def t_lambda_law(A, rows, seq, q, max_branches: int = DEFAULT_GUARD):
    """Exact law of T_Lambda A restricted to the diagram."""
    arr = EdgeLabeledArray.from_matrix(A)

    def run(ch):
        return t_lambda(arr, rows, seq, q, ch).restrict(rows)
    return enumerate_law(run, max_branches=max_branches)


def strip_law(A, rows, seq, q, max_branches: int = DEFAULT_GUARD):
    ent = EdgeLabeledArray.from_matrix(A).entries

    def run(ch):
        t = strip_t_lambda(ent, rows, seq, q, ch)
        return tuple(t.get(c, 0) for c in cells(rows))
    return enumerate_law(run, max_branches=max_branches)


def qrsk_array(ch, A, rows, q):
    """Array on the diagram built from a qRSK run on the covering rectangle:
    the cell with Lambda-coordinate (i, j, k) gets lambda^j_k(i)."""
    _, _, evo, _ = qrsk_core(A, q, ch, keep_evolution=True)
    out = []
    for c in cells(rows):
        lc = lambda_coordinate(rows, c)
        out.append(evo[lc.i][lc.j - 1][lc.k - 1])
    return tuple(out)


def check_qrsk_equivalence(rows, A, q, seq=None, max_branches: int = DEFAULT_GUARD) -> float:
    """TV between the laws of T_Lambda A and the qRSK-derived array on Lambda.

    ``A`` must cover the bounding rectangle of the diagram; qRSK runs on
    that rectangle.
    """
    rows = normalize(rows)
    n, m = _bounding(rows)
    A = [list(r[:m]) for r in A[:n]]
    if len(A) < n or any(len(r) < m for r in A):
        raise DomainError("input matrix does not cover the diagram")
    if seq is None:
        seq = growth_sequences(rows, "row")
    left = t_lambda_law(A, rows, seq, q, max_branches)
    right = enumerate_law(qrsk_array, A, rows, q, max_branches=max_branches)
    return tv_distance(left, right)


def check_growth_independence(rows, A, q, max_branches: int = DEFAULT_GUARD) -> float:
    """Largest TV between the law of T_Lambda A under the row-by-row growth
    sequence and under any other growth sequence of the diagram."""
    rows = normalize(rows)
    ref = t_lambda_law(A, rows, growth_sequences(rows, "row"), q, max_branches)
    return max(tv_distance(ref, t_lambda_law(A, rows, seq, q, max_branches))
               for seq in all_growth_sequences(rows))


# -- q-PNG -------------------------------------------------------------------

def staircase(p: int) -> tuple:
    return tuple(range(p, 0, -1))


def height_cell(m: int, k: int, level: int = 0) -> tuple:
    """Array cell read by h^level_m(k)."""
    return (math.ceil((m - k) / 2) - level, math.ceil((m + k) / 2) - level)


def droplet_cell(m: int, k: int) -> tuple:
    """Array cell fed by the top-level droplet d_m(k) (|k| < m, k + m odd)."""
    return ((m - k + 1) // 2, (m + k + 1) // 2)


def droplet_positions(m: int) -> list:
    return list(range(-(m - 1), m, 2))


@dataclass
class PngState:
    """Multilayer heights at time m, held as the underlying local-moves array."""

    m: int = 0
    array: EdgeLabeledArray = field(default_factory=EdgeLabeledArray)

    def height(self, k: int, level: int = 0) -> int:
        i, j = height_cell(self.m, k, level)
        if i < 1 or j < 1 or abs(k) >= self.m - 2 * level:
            return 0
        return self.array.w(i, j)

    def heights(self) -> dict:
        """{(level, k): h} on the cone |k| < m - 2 level."""
        out = {}
        level = 0
        while self.m - 2 * level > 0:
            for k in range(-(self.m - 2 * level) + 1, self.m - 2 * level):
                out[(level, k)] = self.height(k, level)
            level += 1
        return out

    def top(self) -> dict:
        return {k: self.height(k) for k in range(-self.m, self.m + 1)}


def qpng_step(state: PngState, droplets: dict, q, rng) -> PngState:
    """Advance to time m + 1 with top-level droplets ``{k: d}``.

    Droplets sit on the cells i + j = m + 2; each is absorbed by rho on
    its diagonal, in order of increasing row.  Reads only the time-m array
    and the new droplets.
    """
    m = state.m + 1
    allowed = set(droplet_positions(m))
    bad = [k for k, v in droplets.items() if k not in allowed and v != 0]
    if bad:
        raise DomainError(f"droplets outside the cone or on the wrong parity at time {m}: {bad}")
    ch = as_chooser(rng)
    arr = state.array.copy()
    for k in sorted(allowed, reverse=True):
        arr.entries[droplet_cell(m, k)] = droplets.get(k, 0)
    for k in sorted(allowed, reverse=True):
        apply_rho(arr, *droplet_cell(m, k), q, ch)
    return PngState(m, arr)


def qpng_run(droplet_seq, q, rng) -> list:
    """States at times 0..len(droplet_seq)."""
    ch = as_chooser(rng)
    states = [PngState()]
    for d in droplet_seq:
        states.append(qpng_step(states[-1], d, q, ch))
    return states


def top_level_step(prev: dict, m: int, droplets: dict, q, rng) -> dict:
    """Top-level heights at time m from those at time m - 1 alone.

    New positions (k + m odd): h(k-1) + h(k+1) - h(k) - X + d(k) with
    X ~ qHyp(h(k-1) - h(k), INF, h(k+1) - h(k)); other positions keep
    their value.
    """
    ch = as_chooser(rng)
    h = lambda k: prev.get(k, 0)
    out = {}
    for k in range(-m, m + 1):
        if (k + m) % 2 == 0:
            out[k] = h(k)
    for k in sorted(droplet_positions(m), reverse=True):
        left, mid, right = h(k - 1), h(k), h(k + 1)
        x = ch.qhyp(left - mid, INF, right - mid, q)
        out[k] = left + right - mid - x + droplets.get(k, 0)
    return out


def staircase_droplets(A, p: int) -> list:
    """Droplet schedule feeding the staircase array A (1-based cells)."""
    seq = []
    for m in range(1, p + 1):
        seq.append({k: A[droplet_cell(m, k)[0] - 1][droplet_cell(m, k)[1] - 1]
                    for k in droplet_positions(m)})
    return seq


def antidiagonal_sequence(p: int) -> list:
    """Growth sequence of the staircase adding antidiagonals i + j = m + 1
    in turn, each in the order of decreasing column."""
    seq = [()]
    cur = set()
    for m in range(1, p + 1):
        for k in sorted(droplet_positions(m), reverse=True):
            cur.add(droplet_cell(m, k))
            seq.append(normalize(_rows_of(cur)))
    return seq


def _rows_of(cellset):
    nrows = max(i for i, _ in cellset)
    return tuple(sum(1 for i, _ in cellset if i == r) for r in range(1, nrows + 1))


def check_png_coupling(A, p: int, q, seed: int) -> tuple:
    """Per-run agreement of q-PNG with the staircase local moves.

    Runs T_Lambda on the staircase, then replays its draws through the PNG
    steps and the INF-labelled draws through :func:`top_level_step`.
    Returns ``(mismatches_multilevel, mismatches_top)``.
    """
    rows = staircase(p)
    rec = Recorder(as_chooser(seed))
    t = t_lambda(EdgeLabeledArray.from_matrix(A), rows, antidiagonal_sequence(p), q, rec)
    drops = staircase_droplets(A, p)
    states = qpng_run(drops, q, Replay(rec.values()))
    multi = 0
    final = states[-1]
    for (level, k), h in final.heights().items():
        i, j = height_cell(p, k, level)
        if h != t.w(i, j):
            multi += 1
    top_draws = Replay(rec.values(lambda kind, args: kind == "qhyp" and is_inf(args[1])))
    top = {}
    mism = 0
    for m in range(1, p + 1):
        top = top_level_step(top, m, drops[m - 1], q, top_draws)
        for k, h in top.items():
            if h != states[m].height(k):
                mism += 1
    return multi, mism


def png_csv(states) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "level", "position", "height"])
    for s in states:
        for (level, k), h in sorted(s.heights().items()):
            w.writerow([s.m, level, k, h])
    return buf.getvalue()
