"""Choice providers and exact laws of randomized procedures.

Every randomized procedure in the package takes a *chooser* and asks it for
each random value (``chooser.qhyp``, ``chooser.qgeom`` or ``chooser.choose``
for an arbitrary finite pmf).  The same code then serves several purposes:

* :class:`Sampler` draws from a seeded :class:`RngStream`;
* :func:`enumerate_law` replays the procedure over every branch of its
  choice tree and returns the exact law of the outcome;
* :class:`Recorder` / :class:`Replay` reuse one procedure's draws in another;
* :class:`BatchSampler` runs many independent replicas at once, with every
  state variable a numpy array (the procedures only use arithmetic on their
  state, so the same code vectorizes).
"""
from __future__ import annotations

import dataclasses
import json
import math
from collections import defaultdict
from functools import lru_cache

import numpy as np

from .qdist import DiscretePmf, RngStream, qgeom_table, qhyp_table
from .qkernel import INF, DomainError, is_inf, unpack

DEFAULT_GUARD = 10**7


class GuardExceeded(RuntimeError):
    """Raised when an enumeration would exceed its branch budget."""


class CouplingError(RuntimeError):
    """Raised when a replayed draw is impossible for the replaying procedure."""


def _qhyp_key(m1, m2, k, q):
    return int(m1), (INF if is_inf(m2) else int(m2)), int(k), unpack(q)[0]


class Chooser:
    """Base choice provider; subclasses implement :meth:`choose`."""

    def choose(self, pmf: DiscretePmf) -> int:
        raise NotImplementedError

    def qhyp(self, m1, m2, k, q):
        return self.choose(qhyp_table(*_qhyp_key(m1, m2, k, q)))

    def qgeom(self, alpha, q):
        return self.choose(qgeom_table(float(alpha), unpack(q)[0]))


class Sampler(Chooser):
    """Draws by inverse CDF from a seeded stream.

    Single-atom pmfs return their atom without consuming randomness.
    """

    def __init__(self, rng=None, seed: int = 0, stream_id: int = 0):
        if rng is None:
            rng = RngStream(seed, stream_id)
        elif isinstance(rng, Sampler):
            rng = rng.rng
        self.rng = rng

    def choose(self, pmf: DiscretePmf) -> int:
        if len(pmf.probs) == 1:
            return pmf.offset
        return pmf.sample(self.rng.uniform())


def as_chooser(rng) -> Chooser:
    """Accept a chooser, an RngStream or an integer seed."""
    if isinstance(rng, Chooser):
        return rng
    if isinstance(rng, RngStream):
        return Sampler(rng)
    if isinstance(rng, (int, np.integer)):
        return Sampler(seed=int(rng))
    raise TypeError(f"cannot build a chooser from {type(rng).__name__}")


class Deterministic(Chooser):
    """Accepts only point masses; used for q = 0 and other degenerate runs."""

    def choose(self, pmf):
        atoms = pmf.atoms()
        if len(atoms) != 1:
            raise ValueError("deterministic chooser met a genuine random choice")
        return atoms[0][0]


class Recorder(Chooser):
    """Wraps another chooser and records its genuinely random draws.

    ``log`` holds ``(kind, args, value)`` with kind in {"qhyp", "qgeom",
    "choose"}.  Point-mass draws are not recorded, and :class:`Replay`
    answers them without consuming a value, so two procedures can share
    draws even when only one of them meets a given degenerate choice.
    """

    def __init__(self, inner: Chooser):
        self.inner = inner
        self.log = []

    def choose(self, pmf):
        v = self.inner.choose(pmf)
        if len(pmf.atoms()) > 1:
            self.log.append(("choose", None, v))
        return v

    def qhyp(self, m1, m2, k, q):
        v = self.inner.qhyp(m1, m2, k, q)
        if len(qhyp_table(*_qhyp_key(m1, m2, k, q)).probs) > 1:
            self.log.append(("qhyp", (m1, m2, k), v))
        return v

    def qgeom(self, alpha, q):
        v = self.inner.qgeom(alpha, q)
        self.log.append(("qgeom", (alpha,), v))
        return v

    def values(self, keep=None) -> list:
        """Recorded values, optionally filtered by ``keep(kind, args)``."""
        return [v for kind, args, v in self.log if keep is None or keep(kind, args)]


class Replay(Chooser):
    """Returns a fixed sequence of values, checking each is possible."""

    def __init__(self, values):
        self.values = list(values)
        self.pos = 0

    def _next(self, pmf):
        if pmf is not None and len(pmf.atoms()) == 1:
            return pmf.atoms()[0][0]
        if self.pos >= len(self.values):
            raise CouplingError("replay sequence exhausted")
        v = self.values[self.pos]
        self.pos += 1
        if pmf is not None and pmf.prob(v) <= 0.0:
            raise CouplingError(f"replayed value {v} has zero probability")
        return v

    def choose(self, pmf):
        return self._next(pmf)

    def qhyp(self, m1, m2, k, q):
        return self._next(qhyp_table(*_qhyp_key(m1, m2, k, q)))

    def qgeom(self, alpha, q):
        return self._next(None)

    @property
    def exhausted(self) -> bool:
        return self.pos == len(self.values)


# -- exact laws --------------------------------------------------------------

def canonical(obj):
    """Hashable canonical form: sequences become tuples, mappings become
    sorted item tuples, dataclasses are expanded field by field."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return tuple(canonical(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                     if not f.name.startswith("_"))
    if isinstance(obj, dict):
        return tuple(sorted((canonical(k), canonical(v)) for k, v in obj.items()))
    if isinstance(obj, (list, tuple)):
        return tuple(canonical(x) for x in obj)
    if isinstance(obj, np.ndarray):
        return canonical(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def flatten(obj) -> tuple:
    """Leaves of a canonical outcome in a fixed order."""
    if isinstance(obj, tuple):
        out = []
        for x in obj:
            out.extend(flatten(x))
        return tuple(out)
    return (obj,)


@dataclasses.dataclass
class ExactLaw:
    """Map from canonical outcome to probability."""

    probs: dict

    def __getitem__(self, outcome):
        return self.probs.get(canonical(outcome), 0.0)

    def __len__(self):
        return len(self.probs)

    def items(self):
        return self.probs.items()

    def total(self) -> float:
        return math.fsum(self.probs.values())

    def support(self) -> list:
        return sorted(self.probs, key=repr)

    def pushforward(self, f) -> "ExactLaw":
        return pushforward(self, f)

    def mean(self, f=lambda x: x) -> float:
        return math.fsum(p * f(o) for o, p in self.probs.items())

    def to_json(self) -> str:
        keys = self.support()
        return json.dumps({"outcomes": [list(flatten(k)) if isinstance(k, tuple) else k for k in keys],
                           "probs": [self.probs[k] for k in keys]})

    @classmethod
    def point(cls, outcome) -> "ExactLaw":
        return cls({canonical(outcome): 1.0})


def tv_distance(a: ExactLaw, b: ExactLaw) -> float:
    """Half the L1 distance over the union support."""
    keys = set(a.probs) | set(b.probs)
    return 0.5 * math.fsum(abs(a.probs.get(k, 0.0) - b.probs.get(k, 0.0)) for k in keys)


def pushforward(law: ExactLaw, f) -> ExactLaw:
    acc = defaultdict(list)
    for o, p in law.probs.items():
        acc[canonical(f(o))].append(p)
    return ExactLaw({k: math.fsum(v) for k, v in acc.items()})


class _Brancher(Chooser):
    """Replays a prefix of branch indices, then takes the first atom of every
    new choice point while recording how many atoms it had."""

    def __init__(self, prefix):
        self.prefix = prefix
        self.path = []  # (index, n_atoms, log p)
        self.worst = None

    def choose(self, pmf):
        atoms = pmf.atoms()
        if pmf.tail > 0:
            raise GuardExceeded("cannot enumerate a truncated infinite-support pmf")
        if len(atoms) == 1:
            return atoms[0][0]
        pos = len(self.path)
        idx = self.prefix[pos] if pos < len(self.prefix) else 0
        v, p = atoms[idx]
        self.path.append((idx, len(atoms), math.log(p)))
        if self.worst is None or len(atoms) > self.worst[0]:
            self.worst = (len(atoms), pos, pmf.support)
        return v


def enumerate_law(procedure, *args, max_branches: int = DEFAULT_GUARD, **kwargs) -> ExactLaw:
    """Exact law of ``procedure(chooser, *args, **kwargs)``.

    Depth-first over the choice tree by replay: every leaf costs one run of
    the procedure.  Path probabilities are summed in log space and combined
    per outcome with ``math.fsum``.  Zero-probability atoms are never
    visited.
    """
    acc = defaultdict(list)
    stack = [()]
    leaves = 0
    worst = None
    while stack:
        prefix = stack.pop()
        br = _Brancher(prefix)
        out = procedure(br, *args, **kwargs)
        leaves += 1
        if br.worst is not None and (worst is None or br.worst[0] > worst[0]):
            worst = br.worst
        if leaves > max_branches:
            raise GuardExceeded(
                f"more than {max_branches} branches; widest choice point had "
                f"{worst[0]} atoms at depth {worst[1]} (support {worst[2]})")
        acc[canonical(out)].append(math.fsum(lp for _, _, lp in br.path))
        for pos in range(len(br.path) - 1, len(prefix) - 1, -1):
            base = tuple(i for i, _, _ in br.path[:pos])
            for alt in range(br.path[pos][1] - 1, 0, -1):
                stack.append(base + (alt,))
    return ExactLaw({k: math.fsum(math.exp(lp) for lp in v) for k, v in acc.items()})


def law_from_samples(outcomes) -> ExactLaw:
    counts = defaultdict(int)
    n = 0
    for o in outcomes:
        counts[canonical(o)] += 1
        n += 1
    return ExactLaw({k: c / n for k, c in counts.items()})


# -- vectorized sampling -----------------------------------------------------

@lru_cache(maxsize=64)
def _log_qfact_array(q: float, n: int) -> np.ndarray:
    i = np.arange(1, n + 1, dtype=float)
    return np.concatenate([[0.0], np.cumsum(np.log1p(-(q**i))) if q > 0 else np.zeros(n)])


class BatchSampler(Chooser):
    """Draws independent values per call as numpy arrays.

    Arguments may be scalars or arrays; the draw has the broadcast shape of
    the arguments and ``(size,)``.  Results depend on ``(seed, stream_id)``
    and the sequence of requested shapes only.
    """

    def __init__(self, size: int, rng=None, seed: int = 0, stream_id: int = 0):
        self.size = int(size)
        self.rng = rng if rng is not None else RngStream(seed, stream_id)

    def uniforms(self, shape=None) -> np.ndarray:
        return self.rng.generator.random(self.size if shape is None else shape)

    def _shape(self, *args):
        return np.broadcast_shapes((self.size,), *(np.shape(a) for a in args))

    def choose(self, pmf: DiscretePmf, shape=None):
        shape = (self.size,) if shape is None else shape
        if len(pmf.probs) == 1:
            return np.full(shape, pmf.offset, dtype=np.int64)
        cdf = np.asarray(pmf.cdf)
        idx = np.searchsorted(cdf, self.uniforms(shape), side="right")
        return pmf.offset + np.minimum(idx, len(cdf) - 1)

    def qgeom(self, alpha, q, shape=None):
        return self.choose(qgeom_table(float(alpha), unpack(q)[0]), shape)

    def qhyp(self, m1, m2, k, q):
        qv = unpack(q)[0]
        inf = np.ndim(m2) == 0 and is_inf(m2)
        shape = self._shape(m1, k) if inf else self._shape(m1, k, m2)
        m1 = np.broadcast_to(np.asarray(m1, dtype=np.int64), shape).ravel()
        k = np.broadcast_to(np.asarray(k, dtype=np.int64), shape).ravel()
        if not inf:
            m2 = np.broadcast_to(np.asarray(m2, dtype=np.int64), shape).ravel()
        if np.any(m1 < 0) or np.any(k < 0) or (not inf and (np.any(m2 < 0) or np.any(m1 + m2 < k))):
            raise DomainError("qHyp needs nonnegative parameters with m1 + m2 >= k")
        hi = np.minimum(m1, k)
        if qv == 0.0:
            return hi.reshape(shape)
        lo = np.zeros_like(hi) if inf else np.maximum(0, k - m2)
        out = lo.copy()
        u = self.uniforms(shape).ravel()
        idx = np.nonzero(hi > lo)[0]
        if idx.size == 0:
            return out.reshape(shape)
        m1, k, hi, u, l = m1[idx], k[idx], hi[idx], u[idx], lo[idx]
        nmax = int(max(m1.max(), k.max(), 0 if inf else (m1 + m2[idx]).max()))
        lf = _log_qfact_array(qv, max(64, 1 << max(nmax, 1).bit_length()))
        if inf:
            base = lf[m1] + lf[k]
        else:
            m2 = m2[idx]
            base = lf[m1] + lf[m2] + lf[k] + lf[m1 + m2 - k] - lf[m1 + m2]
        cum = np.zeros(idx.size)
        # walk the support upward, dropping replicas once their uniform is passed
        while idx.size:
            a, b = m1 - l, k - l
            logp = base - lf[l] - lf[a] - lf[b]
            if not inf:
                logp = logp - lf[m2 - k + l]
            cum += np.exp(logp) * qv ** (a * b)
            done = (u < cum) | (l >= hi)
            out[idx[done]] = l[done]
            keep = ~done
            idx, m1, k, hi, u, l, cum, base = (x[keep] for x in (idx, m1, k, hi, u, l, cum, base))
            if not inf:
                m2 = m2[keep]
            l = l + 1
        return out.reshape(shape)


def batch_law(outcomes, size: int) -> ExactLaw:
    """Empirical law of a batched outcome: every array leaf has length
    ``size`` and replica r's outcome is the flat tuple of leaf values."""
    leaves = [np.broadcast_to(np.asarray(x), (size,)) for x in flatten(canonical_batch(outcomes))]
    mat = np.stack(leaves, axis=1) if leaves else np.zeros((size, 0))
    rows, counts = np.unique(mat, axis=0, return_counts=True)
    return ExactLaw({tuple(int(v) for v in r): c / size for r, c in zip(rows, counts)})


def canonical_batch(obj):
    """Like :func:`canonical` but keeps numpy arrays as leaves."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return tuple(canonical_batch(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                     if not f.name.startswith("_"))
    if isinstance(obj, dict):
        return tuple((k, canonical_batch(v)) for k, v in sorted(obj.items()))
    if isinstance(obj, (list, tuple)):
        return tuple(canonical_batch(x) for x in obj)
    return obj


def flat_law(law: ExactLaw) -> ExactLaw:
    """Relabel every outcome by its flat leaf tuple (matches batch_law)."""
    return pushforward(law, lambda o: tuple(int(v) for v in flatten(o)))
