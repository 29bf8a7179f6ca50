"""Acceptance suite: twelve end-to-end criteria at their stated tolerances.

Each test prints one ``PASS`` or ``FAIL`` line (shown even under output
capture) and then asserts.  Run alone with ``pytest tests/test_acceptance.py``.
"""
from __future__ import annotations

import itertools
import math
import random
import time

import numpy as np
import pytest

from qrsk.growth import check_symmetry, local_rule_core, local_rule_pmf, max_table_deviation
from qrsk.insertion import dlpp_bruteforce, qrsk_matrix, qrsk_pq, rsk_matrix
from qrsk.localmoves import (check_growth_independence, check_png_coupling, check_qrsk_equivalence,
                             droplet_positions, qpng_run)
from qrsk.measures import (EnvParams, partitions_bounded, qwhittaker_measure, schur_oracle,
                           verify_lmpush, verify_qwhittaker_corollary)
from qrsk.oracle import BatchSampler, Deterministic, batch_law, enumerate_law, flat_law
from qrsk.polymer import check_qburke, expected_z, lln_experiment, polymer_core, pushtasep_batch, stationary_batch
from qrsk.qdist import check_qbinhyp, check_qhahn_to_qhyp, check_qhyp_identities
from qrsk.qkernel import INF
from qrsk.tableaux import normalize

from stathelp import law_chisquare, qgeom_chisquare

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def _report(number: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}")
        assert ok, detail
    return _report


def _matrices(n, m, top):
    for vals in itertools.product(range(top + 1), repeat=n * m):
        yield [list(vals[i * m:(i + 1) * m]) for i in range(n)]


# 1 -------------------------------------------------------------------------

def test_c01_q_identities(report):
    start = time.perf_counter()
    rnd = random.Random(1)
    worst = 0.0
    tuples = 0
    for q in [i / 10 for i in range(10)]:
        for _ in range(60):
            m1, m2 = rnd.randint(0, 8), rnd.randint(0, 8)
            k = rnd.randint(0, min(8, m1 + m2))
            worst = max(worst, *check_qhyp_identities(m1, m2, k, q))
            b = rnd.randint(0, 8)
            a, c = rnd.randint(0, b), rnd.randint(0, b)
            worst = max(worst, check_qhahn_to_qhyp(a, b, c, q))
            if q > 0:
                worst = max(worst, check_qbinhyp(a, b, c, q))
            tuples += 1
    elapsed = time.perf_counter() - start
    report(1, tuples >= 500 and worst < 1e-11 and elapsed < 10,
           f"{tuples} tuples, max deviation {worst:.2e} (< 1e-11), {elapsed:.1f}s")


# 2 -------------------------------------------------------------------------

def _q0_mismatches(A):
    out = qrsk_matrix(A, 0.0, Deterministic(), keep_evolution=False)
    ref = rsk_matrix(A)
    bad = int(out.p_pattern != ref.p_pattern) + int(out.q_pattern != ref.q_pattern)
    bad += int(out.p_pattern.entry(len(A[0]), 1) != dlpp_bruteforce(A))
    return bad


def test_c02_q0_is_rsk_and_dlpp(report):
    bad = sum(_q0_mismatches(A) for A in _matrices(3, 3, 2))
    rnd = random.Random(2)
    for _ in range(1000):
        bad += _q0_mismatches([[rnd.randint(0, 5) for _ in range(4)] for _ in range(4)])
    report(2, bad == 0, f"{3 ** 9} exhaustive 3x3 + 1000 random 4x4, {bad} mismatches")


# 3 -------------------------------------------------------------------------

SYMMETRY_2x3 = [
    [[1, 0, 0], [0, 0, 1]], [[1, 1, 0], [0, 1, 1]], [[0, 1, 1], [1, 1, 0]], [[1, 1, 1], [1, 1, 1]],
    [[1, 0, 1], [0, 1, 0]], [[1, 1, 1], [0, 0, 1]], [[0, 0, 1], [1, 1, 1]], [[1, 0, 1], [1, 1, 1]],
]


def test_c03_symmetry(report):
    start = time.perf_counter()
    cases = [A for A in _matrices(2, 2, 1)] + SYMMETRY_2x3
    worst = max(check_symmetry(A, q) for A in cases for q in (0.3, 0.7))
    elapsed = time.perf_counter() - start
    report(3, worst < 1e-10 and elapsed < 300,
           f"{2 * len(cases)} (matrix, q) pairs, max TV {worst:.2e} (< 1e-10), {elapsed:.1f}s")


# 4 -------------------------------------------------------------------------

def _random_partition(rnd, parts, top):
    return normalize(sorted((rnd.randint(0, top) for _ in range(parts)), reverse=True))


def _random_cover(rnd, lam, extra_top):
    """A random mu with lam interlacing into mu."""
    lam = list(lam) + [0]
    mu = [lam[0] + rnd.randint(0, extra_top)]
    for k in range(1, len(lam)):
        mu.append(rnd.randint(lam[k], lam[k - 1]))
    return normalize(mu)


def test_c04_local_rule_symmetry(report):
    rnd = random.Random(4)
    worst = 0.0
    for _ in range(200):
        lam = _random_partition(rnd, rnd.randint(0, 3), 4)
        mu1, mu2 = _random_cover(rnd, lam, 3), _random_cover(rnd, lam, 3)
        x, q = rnd.randint(0, 3), rnd.uniform(0.05, 0.95)
        worst = max(worst, max_table_deviation(local_rule_pmf(lam, mu1, mu2, x, q),
                                               local_rule_pmf(lam, mu2, mu1, x, q)))
    report(4, worst < 1e-13, f"200 random triples, max table deviation {worst:.2e} (< 1e-13)")


# 5 -------------------------------------------------------------------------

def test_c05_qburke(report):
    fails = []
    worst_margin = -math.inf
    for alpha, beta, q in itertools.product((0.3, 0.5), (0.3, 0.5), (0.2, 0.5, 0.8)):
        r = check_qburke(alpha, beta, q, cap=40)
        worst_margin = max(worst_margin, r.tv - r.tail)
        if not r.tv < r.tail + 1e-10:
            fails.append((alpha, beta, q, r.tv, r.tail))
    report(5, not fails, f"12 parameter triples, max (TV - tail) {worst_margin:.2e} (< 1e-10), failures {fails}")


# 6 -------------------------------------------------------------------------

def _inputs_on(rows):
    n, m = len(rows), rows[0]
    for A in _matrices(n, m, 1):
        if not any(A[i][j] for i in range(n) for j in range(rows[i], m)):
            yield A


def test_c06_local_moves_equal_qrsk(report):
    q = 0.5
    worst = max(check_qrsk_equivalence(rows, A, q)
                for rows in [(1,), (2, 1), (2, 2)] for A in _inputs_on(rows))
    growth = max(check_growth_independence((2, 2), A, q) for A in _inputs_on((2, 2)))
    report(6, worst < 1e-10 and growth < 1e-10,
           f"max TV vs qRSK {worst:.2e}, max TV across growth sequences {growth:.2e} (< 1e-10)")


# 7 -------------------------------------------------------------------------

def test_c07_pushforward_measure(report):
    q = 0.5
    cases = [((1,), EnvParams([0.4], [0.35]), 5),
             ((2, 1), EnvParams([0.4, 0.3], [0.35, 0.25]), 4),
             ((1, 1), EnvParams([0.4], [0.35, 0.25]), 5)]
    parts = []
    ok = True
    for rows, env, cap in cases:
        r = verify_lmpush(rows, env, q, cap)
        ok &= r.tv < r.tail + 1e-9 and r.exponent_violations == 0
        parts.append(f"{rows}: TV {r.tv:.2e} tail {r.tail:.2e}")
    report(7, ok, "; ".join(parts))


# 8 -------------------------------------------------------------------------

def test_c08_qwhittaker(report):
    env = EnvParams([0.3, 0.2], [0.25, 0.35])
    r = verify_qwhittaker_corollary(2, 2, env, 0.5, cap=6)
    rel = 0.0
    for lam in partitions_bounded(2, 6):
        ref = (schur_oracle(lam, env.alpha) * schur_oracle(lam, env.alpha_hat)
               * math.prod(1 - a * b for a in env.alpha for b in env.alpha_hat))
        got = qwhittaker_measure(lam, env, 0.0)
        rel = max(rel, abs(got - ref) / ref if ref else abs(got))
    report(8, r.deviation < 1e-9 and rel < 1e-10,
           f"corollary deviation {r.deviation:.2e} over {r.checked} partitions (< 1e-9, no tail), "
           f"q=0 Schur relative deviation {rel:.2e} (< 1e-10)")


# 9 -------------------------------------------------------------------------

def test_c09_lln(report):
    start = time.perf_counter()
    alpha = beta = 0.3
    q = 0.5
    z = stationary_batch(20, 20, alpha, beta, q, reps=10**5, seed=9, cells=[(20, 20)])[(20, 20)]
    z = np.asarray(z, dtype=float)
    mean, se = z.mean(), z.std(ddof=1) / math.sqrt(z.size)
    target = expected_z(20, 20, alpha, beta, q)
    table = lln_experiment(1, 1, [50, 100, 200, 400], alpha, beta, q, rng=9, reps=100, tol=0.05)
    errs = [r.mean_abs_error for r in table.rows]
    within = int((table.final_errors < 0.05).sum())
    elapsed = time.perf_counter() - start
    ok = abs(mean - target) < 3 * se and table.shrinking and within >= 95 and elapsed < 600
    report(9, ok, f"Z(20,20) mean {mean:.4f} vs {target:.4f} ({abs(mean - target) / se:.2f} SE); "
                  f"mean |error| {', '.join(f'{e:.4f}' for e in errs)}; {within}/100 within 0.05; {elapsed:.1f}s")


# 10 ------------------------------------------------------------------------

def test_c10_pushtasep(report):
    alpha, beta, q = 0.4, 0.3, 0.5
    states = pushtasep_batch(3, 5, alpha, beta, q, reps=10**5, seed=10)
    pvals = {"particle 0 increments": qgeom_chisquare(states[-1][0] - states[-2][0], alpha, q)[0]}
    for m in range(1, 4):
        pvals[f"gap {m}"] = qgeom_chisquare(states[-1][m] - states[-1][m - 1] - 1, beta, q)[0]
    ok = all(p > 1e-3 for p in pvals.values())
    report(10, ok, "chi-square p-values " + ", ".join(f"{k} {p:.3f}" for k, p in pvals.items())
           + " (> 1e-3, 1e5 runs)")


# 11 ------------------------------------------------------------------------

UNIT_EVOLUTION = [
    {(0, 0): 1},
    {(0, -1): 2, (0, 0): 1, (0, 1): 2},
    {(0, -2): 3, (0, -1): 2, (0, 0): 3, (0, 1): 2, (0, 2): 3, (1, 0): 1},
]
ZERO_START_EVOLUTION = [
    {(0, 0): 0},
    {(0, -1): 1, (0, 0): 0, (0, 1): 1},
    {(0, -2): 2, (0, -1): 1, (0, 0): 2, (0, 1): 1, (0, 2): 2, (1, 0): 1},
]


def test_c11_qpng(report):
    rnd = random.Random(11)
    multi = top = runs = 0
    for p in range(1, 6):
        for q in (0.0, 0.3, 0.5, 0.8):
            for _ in range(5):
                A = [[rnd.randint(0, 3) for _ in range(p)] for _ in range(p)]
                a, b = check_png_coupling(A, p, q, seed=rnd.randrange(10**6))
                multi, top, runs = multi + a, top + b, runs + 1
    unit = [{k: 1 for k in droplet_positions(m)} for m in (1, 2, 3)]
    zero_start = [{0: 0}] + unit[1:]
    hand = ([s.heights() for s in qpng_run(unit, 0.0, Deterministic())[1:]] == UNIT_EVOLUTION
            and [s.heights() for s in qpng_run(zero_start, 0.0, Deterministic())[1:]] == ZERO_START_EVOLUTION)
    report(11, multi == 0 and top == 0 and hand,
           f"{runs} coupled runs p<=5: {multi} multilevel and {top} top-level mismatches; "
           f"hand-computed q=0 evolutions {'reproduced' if hand else 'NOT reproduced'}")


# 12 ------------------------------------------------------------------------

def _procedures(rnd):
    """Twenty (name, procedure, args) triples, every draw of finite support."""
    out = []
    for i in range(20):
        kind = ("qhyp", "local_rule", "qrsk", "polymer")[i % 4]
        q = rnd.choice([0.2, 0.35, 0.5, 0.65, 0.8])
        if kind == "qhyp":
            m1, k = rnd.randint(1, 7), rnd.randint(1, 7)
            m2 = INF if rnd.random() < 0.5 else rnd.randint(1, 7)
            out.append((f"qhyp{(m1, m2, k, q)}", lambda ch, *a: ch.qhyp(*a), (m1, m2, k, q)))
        elif kind == "local_rule":
            lam = _random_partition(rnd, 2, 3)
            mu1, mu2 = _random_cover(rnd, lam, 2), _random_cover(rnd, lam, 2)
            d = max(len(mu1), len(mu2)) + 1
            pad = lambda t: list(t) + [0] * (d - len(t))
            x = rnd.randint(0, 2)
            out.append((f"local_rule{(lam, mu1, mu2, x, q)}",
                        lambda ch, l, a, b, x, q: local_rule_core(l, a, b, x, q, ch),
                        (pad(lam), pad(mu1), pad(mu2), x, q)))
        elif kind == "qrsk":
            n, m = rnd.choice([(2, 2), (2, 3), (3, 2)])
            A = [[rnd.randint(0, 2) for _ in range(m)] for _ in range(n)]
            out.append((f"qrsk{(A, q)}", qrsk_pq, (A, q)))
        else:
            w = [[rnd.randint(0, 2) for _ in range(3)] for _ in range(3)]
            out.append((f"polymer{(w, q)}", lambda ch, w, q: polymer_core(w, q, ch), (w, q)))
    return out


def test_c12_sampler_matches_enumerator(report):
    rnd = random.Random(12)
    n = 10**6
    worst = (1.0, "")
    for i, (name, proc, args) in enumerate(_procedures(rnd)):
        exact = flat_law(enumerate_law(proc, *args))
        sampled = batch_law(proc(BatchSampler(n, seed=1200 + i), *args), n)
        p, _, _ = law_chisquare(sampled, exact, n)
        if p < worst[0]:
            worst = (p, name)
    report(12, worst[0] > 1e-3,
           f"20 procedures x 1e6 samples, smallest chi-square p-value {worst[0]:.4f} ({worst[1]})")
