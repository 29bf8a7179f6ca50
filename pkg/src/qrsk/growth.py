"""Branching growth diagram of qRSK.

The vertex (l, j) of the growth diagram carries the diagram lambda^j(l)
(level j of the pattern after l insertions); the cell (l, j) carries the
matrix entry w_{l,j}.  The local rule produces the label of the top-right
corner of a cell from the other three corners and the cell weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .insertion import qrsk_pq
from .oracle import DEFAULT_GUARD, ExactLaw, as_chooser, enumerate_law, pushforward, tv_distance
from .qkernel import INF
from .tableaux import interlaces, normalize, pad


def local_rule_core(lam, mu1, mu2, x, q, ch):
    """F(lam, mu1, mu2, x) on padded lists of equal length.

    Edge k gets mu2_k + mu1_k - lam_k + x_k - x_{k+1} with x_1 = x and
    x_{k+1} ~ qHyp(mu1_k - lam_k, lam_{k-1} - mu1_k, mu2_k - lam_k).
    """
    out = []
    xk = x
    for k in range(len(lam)):
        m2 = INF if k == 0 else lam[k - 1] - mu1[k]
        nxt = ch.qhyp(mu1[k] - lam[k], m2, mu2[k] - lam[k], q)
        out.append(mu2[k] + mu1[k] - lam[k] + xk - nxt)
        xk = nxt
    return out


def _prepare(lam, mu1, mu2):
    lam, mu1, mu2 = normalize(lam), normalize(mu1), normalize(mu2)
    if not (interlaces(lam, mu1) and interlaces(lam, mu2)):
        raise ValueError(f"local rule needs lam < mu1 and lam < mu2: {lam}, {mu1}, {mu2}")
    depth = max(len(mu1), len(mu2)) + 1
    return list(pad(lam, depth)), list(pad(mu1, depth)), list(pad(mu2, depth))


def local_rule(lam, mu1, mu2, x: int, q, rng) -> tuple:
    """One draw of the local rule."""
    lam, mu1, mu2 = _prepare(lam, mu1, mu2)
    return normalize(local_rule_core(lam, mu1, mu2, int(x), q, as_chooser(rng)))


def local_rule_pmf(lam, mu1, mu2, x: int, q) -> ExactLaw:
    """Exact law of the local rule output, keyed by diagram."""
    lam, mu1, mu2 = _prepare(lam, mu1, mu2)
    if x < 0:
        raise ValueError("cell weight must be nonnegative")
    return enumerate_law(lambda ch: normalize(local_rule_core(lam, mu1, mu2, int(x), q, ch)))


def max_table_deviation(a: ExactLaw, b: ExactLaw) -> float:
    keys = set(a.probs) | set(b.probs)
    return max((abs(a.probs.get(k, 0.0) - b.probs.get(k, 0.0)) for k in keys), default=0.0)


# -- growth diagrams and down-right paths ------------------------------------

@dataclass(frozen=True)
class DownRightPath:
    """Vertices (l, j) from (0, m) to (n, 0) with steps (1, 0) or (0, -1)."""

    vertices: tuple

    def __post_init__(self):
        v = tuple(tuple(p) for p in self.vertices)
        object.__setattr__(self, "vertices", v)
        if not v or v[0][0] != 0 or v[-1][1] != 0:
            raise ValueError("path must run from (0, m) to (n, 0)")
        for a, b in zip(v, v[1:]):
            if (b[0] - a[0], b[1] - a[1]) not in ((1, 0), (0, -1)):
                raise ValueError(f"invalid step {a} -> {b}")

    @property
    def n(self) -> int:
        return self.vertices[-1][0]

    @property
    def m(self) -> int:
        return self.vertices[0][1]

    def transpose(self) -> "DownRightPath":
        return DownRightPath(tuple((k, j) for j, k in reversed(self.vertices)))

    @classmethod
    def from_steps(cls, n: int, m: int, steps: str) -> "DownRightPath":
        """Steps as a string of 'R' (time +1) and 'D' (level -1)."""
        v = [(0, m)]
        for s in steps:
            l, j = v[-1]
            v.append((l + 1, j) if s == "R" else (l, j - 1))
        return cls(tuple(v))

    @classmethod
    def boundary(cls, n: int, m: int) -> "DownRightPath":
        return cls.from_steps(n, m, "D" * m + "R" * n)

    @classmethod
    def top_right(cls, n: int, m: int) -> "DownRightPath":
        return cls.from_steps(n, m, "R" * n + "D" * m)


def enclosed_cells(path: DownRightPath) -> list:
    """Cells (l, j), l, j >= 1, below-left of the path, in row-major order."""
    reach = {}
    for l, j in path.vertices:
        reach[l] = max(reach.get(l, 0), j)
    out = []
    for l in range(1, path.n + 1):
        top = max(reach.get(t, 0) for t in range(l, path.n + 1))
        out.extend((l, j) for j in range(1, top + 1))
    return out


def growth_core(A, q, ch, cells=None):
    """Labels of every vertex reached, as a dict (l, j) -> padded list."""
    n = len(A)
    m = len(A[0]) if n else 0
    depth = m + 1
    zero = [0] * depth
    lab = {}
    for l in range(n + 1):
        lab[(l, 0)] = zero
    for j in range(m + 1):
        lab[(0, j)] = zero
    todo = cells if cells is not None else [(l, j) for l in range(1, n + 1) for j in range(1, m + 1)]
    for l, j in todo:
        lab[(l, j)] = local_rule_core(lab[(l - 1, j - 1)], lab[(l, j - 1)], lab[(l - 1, j)],
                                      A[l - 1][j - 1], q, ch)
    return lab


def growth_diagram(A, q, rng) -> dict:
    """Sampled labels lambda^j(l) of the full growth diagram."""
    lab = growth_core(A, q, as_chooser(rng))
    return {v: normalize(d) for v, d in lab.items()}


def path_labels(ch, A, path: DownRightPath, q):
    lab = growth_core(A, q, ch, enclosed_cells(path))
    return tuple(normalize(lab[v]) for v in path.vertices)


def path_label_dist(A, path: DownRightPath, q, max_branches: int = DEFAULT_GUARD) -> ExactLaw:
    """Exact joint law of the diagrams along a down-right path."""
    return enumerate_law(path_labels, A, path, q, max_branches=max_branches)


def transpose_matrix(A):
    return [list(r) for r in zip(*A)] if A else []


def check_path_symmetry(A, path: DownRightPath, q) -> float:
    """TV between L(A, path) and the reversed L(A^T, path^T)."""
    left = path_label_dist(A, path, q)
    right = pushforward(path_label_dist(transpose_matrix(A), path.transpose(), q),
                        lambda t: tuple(reversed(t)))
    return tv_distance(left, right)


def pq_law(A, q, max_branches: int = DEFAULT_GUARD) -> ExactLaw:
    """Exact joint law of the (P, Q) patterns of qRSK on A."""
    return enumerate_law(qrsk_pq, [list(r) for r in A], q, max_branches=max_branches)


def check_symmetry(A, q, max_branches: int = DEFAULT_GUARD) -> float:
    """TV between the law of (P, Q) for A and the law of (Q, P) for A^T."""
    law = pq_law(A, q, max_branches)
    swapped = pushforward(pq_law(transpose_matrix(A), q, max_branches), lambda pq: (pq[1], pq[0]))
    return tv_distance(law, swapped)
