"""Young diagrams, Gelfand-Tsetlin patterns and growth sequences.

Diagrams are plain tuples of weakly decreasing row lengths, e.g. ``(4, 3, 1)``.
Cells are 1-based ``(row, column)`` pairs.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable, Sequence


class ShapeError(ValueError):
    pass


def normalize(rows: Iterable[int]) -> tuple:
    """Validate a diagram and drop trailing zeros."""
    rows = tuple(int(r) for r in rows)
    if any(r < 0 for r in rows):
        raise ShapeError(f"negative row length in {rows}")
    if any(rows[i] < rows[i + 1] for i in range(len(rows) - 1)):
        raise ShapeError(f"rows not weakly decreasing: {rows}")
    while rows and rows[-1] == 0:
        rows = rows[:-1]
    return rows


def pad(rows: Sequence[int], n: int) -> tuple:
    rows = tuple(rows)
    if len(rows) > n and any(rows[n:]):
        raise ShapeError(f"{rows} has more than {n} nonzero parts")
    return rows[:n] + (0,) * (n - len(rows))


def size(rows) -> int:
    return sum(rows)


def cells(rows) -> list:
    return [(i + 1, j + 1) for i, r in enumerate(rows) for j in range(r)]


def from_cells(cellset) -> tuple:
    cellset = set(cellset)
    if not cellset:
        return ()
    nrows = max(i for i, _ in cellset)
    rows = tuple(sum(1 for (i, _) in cellset if i == r) for r in range(1, nrows + 1))
    rows = normalize(rows)
    if set(cells(rows)) != cellset:
        raise ShapeError("cell set is not a Young diagram")
    return rows


def contains(rows, cell) -> bool:
    i, j = cell
    return i >= 1 and j >= 1 and i <= len(rows) and rows[i - 1] >= j


def interlaces(a: Sequence[int], b: Sequence[int]) -> bool:
    """a < b in the interlacing order: b1 >= a1 >= b2 >= a2 >= ..."""
    n = max(len(a), len(b))
    a = tuple(a) + (0,) * (n - len(a))
    b = tuple(b) + (0,) * (n + 1 - len(b))
    return all(b[i] >= a[i] >= b[i + 1] for i in range(n))


def transpose(rows) -> tuple:
    rows = normalize(rows)
    if not rows:
        return ()
    return tuple(sum(1 for r in rows if r > j) for j in range(rows[0]))


def add_cell(rows, i: int) -> tuple:
    """Add a cell at the end of row ``i`` (1-based)."""
    rows = list(rows) + [0] * max(0, i - len(rows))
    rows[i - 1] += 1
    return normalize(rows)


def addable_rows(rows) -> list:
    rows = tuple(rows)
    out = []
    for i in range(len(rows) + 1):
        cur = rows[i] if i < len(rows) else 0
        if i == 0 or rows[i - 1] > cur:
            out.append(i + 1)
    return out


def diagram_to_json(rows) -> str:
    return json.dumps(list(rows))


def diagram_from_json(text: str) -> tuple:
    return normalize(json.loads(text))


# -- Gelfand-Tsetlin patterns ------------------------------------------------

@dataclass(frozen=True)
class GTPattern:
    """Triangular array ``levels[k-1][j-1]`` = lambda^k_j, 1 <= j <= k <= m."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(tuple(int(x) for x in lev) for lev in self.levels)
        object.__setattr__(self, "levels", levels)
        for k, lev in enumerate(levels, start=1):
            if len(lev) != k:
                raise ShapeError(f"level {k} has {len(lev)} entries")
            if any(x < 0 for x in lev):
                raise ShapeError("negative GT entry")
        for k in range(len(levels) - 1):
            if not interlaces(levels[k], levels[k + 1]):
                raise ShapeError(f"levels {k + 1} and {k + 2} do not interlace")

    @classmethod
    def zero(cls, m: int) -> "GTPattern":
        return cls(tuple((0,) * k for k in range(1, m + 1)))

    @property
    def depth(self) -> int:
        return len(self.levels)

    def entry(self, k: int, j: int) -> int:
        """lambda^k_j, zero when j > k."""
        if j > k:
            return 0
        return self.levels[k - 1][j - 1]

    @property
    def shape(self) -> tuple:
        return normalize(self.levels[-1]) if self.levels else ()

    def flat(self) -> tuple:
        return tuple(x for lev in self.levels for x in lev)

    def to_json(self) -> str:
        return json.dumps([list(lev) for lev in self.levels])

    @classmethod
    def from_json(cls, text: str) -> "GTPattern":
        return cls(tuple(tuple(lev) for lev in json.loads(text)))


def type_of(p: GTPattern) -> tuple:
    sums = [sum(lev) for lev in p.levels]
    return tuple(s - (sums[i - 1] if i else 0) for i, s in enumerate(sums))


def check_tableau(tab) -> tuple:
    tab = tuple(tuple(int(x) for x in row) for row in tab if len(row))
    normalize(len(r) for r in tab)
    for row in tab:
        if any(x < 1 for x in row):
            raise ShapeError("tableau entries must be positive")
        if any(row[c] > row[c + 1] for c in range(len(row) - 1)):
            raise ShapeError("tableau rows must be weakly increasing")
    for r in range(len(tab) - 1):
        for c in range(len(tab[r + 1])):
            if tab[r][c] >= tab[r + 1][c]:
                raise ShapeError("tableau columns must be strictly increasing")
    return tab


def gt_from_tableau(tab, m: int | None = None) -> GTPattern:
    """GT pattern with lambda^k_j = #(entries <= k in row j)."""
    tab = check_tableau(tab)
    top = max((max(r) for r in tab), default=0)
    if m is None:
        m = top
    if top > m:
        raise ShapeError(f"tableau entry {top} exceeds depth {m}")
    return GTPattern(tuple(
        tuple(sum(1 for x in tab[j - 1] if x <= k) if j <= len(tab) else 0 for j in range(1, k + 1))
        for k in range(1, m + 1)))


def tableau_from_gt(p: GTPattern) -> tuple:
    rows = []
    for j in range(1, p.depth + 1):
        row = []
        for k in range(j, p.depth + 1):
            row.extend([k] * (p.entry(k, j) - p.entry(k - 1, j)))
        if row:
            rows.append(tuple(row))
    return tuple(rows)


def gt_patterns(bottom: Sequence[int]):
    """All GT patterns with the given bottom level (depth = len(bottom))."""
    bottom = tuple(bottom)
    m = len(bottom)

    def rec(level):
        if len(level) == 1:
            yield (level,)
            return
        n = len(level)
        ranges = [range(level[j + 1], level[j] + 1) for j in range(n - 1)]

        def rows(j):
            if j == n - 1:
                yield ()
                return
            for x in ranges[j]:
                for rest in rows(j + 1):
                    yield (x,) + rest

        for up in rows(0):
            for head in rec(up):
                yield head + (level,)

    if m == 0:
        yield GTPattern(())
        return
    for levels in rec(bottom):
        yield GTPattern(levels)


# -- diagram geometry --------------------------------------------------------

def outer_corners(rows) -> list:
    rows = normalize(rows)
    out = []
    for n, m in enumerate(rows, start=1):
        nxt = rows[n] if n < len(rows) else 0
        if nxt < m:
            out.append((n, m))
    return out


def boundary(rows) -> list:
    """Cells (i, j) of the diagram with (i+1, j+1) outside it."""
    return [c for c in cells(rows) if not contains(rows, (c[0] + 1, c[1] + 1))]


@dataclass(frozen=True)
class LambdaCoordinate:
    i: int
    j: int
    k: int


def lambda_coordinate(rows, cell) -> LambdaCoordinate:
    """Boundary cell on the same diagonal plus the diagonal distance + 1."""
    if not contains(rows, cell):
        raise ShapeError(f"cell {cell} is not in {tuple(rows)}")
    i, j = cell
    k = 1
    while contains(rows, (i + 1, j + 1)):
        i, j, k = i + 1, j + 1, k + 1
    return LambdaCoordinate(i, j, k)


def cell_of_coordinate(rows, coord: LambdaCoordinate) -> tuple:
    if (coord.i, coord.j) not in boundary(rows):
        raise ShapeError(f"{(coord.i, coord.j)} is not a boundary cell")
    cell = (coord.i - coord.k + 1, coord.j - coord.k + 1)
    if coord.k < 1 or not contains(rows, cell):
        raise ShapeError(f"depth {coord.k} leaves the diagram")
    return cell


# -- growth sequences --------------------------------------------------------

def added_cell(small, big) -> tuple:
    """Coordinate of the single cell in ``big`` but not in ``small``."""
    diff = set(cells(big)) - set(cells(small))
    if len(diff) != 1 or not set(cells(small)) <= set(cells(big)):
        raise ShapeError(f"{small} -> {big} does not add exactly one cell")
    return diff.pop()


def check_growth_sequence(seq, rows=None) -> None:
    seq = [normalize(d) for d in seq]
    if not seq or seq[0] != ():
        raise ShapeError("growth sequence must start from the empty diagram")
    for a, b in zip(seq, seq[1:]):
        added_cell(a, b)
    if rows is not None and seq[-1] != normalize(rows):
        raise ShapeError("growth sequence does not end at the target diagram")


def growth_sequences(rows, strategy: str = "row", seed: int | None = None) -> list:
    """One growth sequence of the diagram.

    Strategies: ``row`` (fill row by row), ``column`` (column by column),
    ``diagonal`` (anti-diagonals i + j = const in turn) and ``random``
    (uniform among addable cells at each step, seeded).
    """
    rows = normalize(rows)
    cs = cells(rows)
    if strategy == "row":
        order = sorted(cs)
    elif strategy == "column":
        order = sorted(cs, key=lambda c: (c[1], c[0]))
    elif strategy == "diagonal":
        order = sorted(cs, key=lambda c: (c[0] + c[1], c[0]))
    elif strategy == "random":
        rnd = random.Random(seed)
        cur = ()
        seq = [cur]
        for _ in range(len(cs)):
            choices = [i for i in addable_rows(cur)
                       if contains(rows, (i, (cur[i - 1] if i <= len(cur) else 0) + 1))]
            cur = add_cell(cur, rnd.choice(choices))
            seq.append(cur)
        return seq
    else:
        raise ValueError(f"unknown growth strategy {strategy!r}")
    seq = [()]
    cur = set()
    for c in order:
        cur.add(c)
        seq.append(from_cells(cur))
    return seq


def all_growth_sequences(rows):
    """Every growth sequence (standard Young tableau) of the diagram."""
    rows = normalize(rows)
    target = len(cells(rows))

    def rec(cur, seq):
        if len(seq) - 1 == target:
            yield list(seq)
            return
        for i in addable_rows(cur):
            c = (i, (cur[i - 1] if i <= len(cur) else 0) + 1)
            if contains(rows, c):
                nxt = add_cell(cur, i)
                yield from rec(nxt, seq + [nxt])

    yield from rec((), [()])
