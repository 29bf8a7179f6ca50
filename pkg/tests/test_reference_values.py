"""Pinned reference values and small worked cases for every module."""
import itertools
import math
import random

import numpy as np
import pytest

from qrsk.growth import DownRightPath, check_path_symmetry, check_symmetry, local_rule_pmf, max_table_deviation, path_label_dist
from qrsk.insertion import (dp_partition_bruteforce, dlpp_bruteforce, grsk_matrix, qrsk_insert_row, qrsk_matrix,
                            rsk_insert_row)
from qrsk.localmoves import (EdgeLabeledArray, apply_l, apply_lprime, check_qrsk_equivalence, qrsk_array,
                             strip_rho, t_lambda, t_lambda_law)
from qrsk.measures import (EnvParams, d_lambda_arrays, joint_corner_dist, macdonald_P, mu_q_lambda,
                           partitions_bounded, qwhittaker_measure, verify_lmpush, verify_qwhittaker_corollary)
from qrsk.oracle import BatchSampler, Deterministic, ExactLaw, enumerate_law, tv_distance
from qrsk.polymer import burke_step, check_qburke, expected_z, polymer_evolve, pushtasep_batch, stationary_batch
from qrsk.qdist import (check_qbinhyp, check_qhahn_to_qhyp, check_qhyp_identities, qgeom_pmf, qgeom_tail,
                        qhahn_table, qhyp_pmf, qhyp_sample, RngStream)
from qrsk.qkernel import INF, gamma_rate, q_binomial, q_int, q_pochhammer
from qrsk.tableaux import (GTPattern, gt_from_tableau, growth_sequences, lambda_coordinate, outer_corners,
                           type_of, LambdaCoordinate)

from stathelp import qgeom_chisquare


# -- q-arithmetic ----------------------------------------------------------------

def test_negative_index_pochhammer_value():
    assert q_pochhammer(0.25, 0.5, -1) == pytest.approx(2.0)


def test_small_q_integers_and_binomials():
    assert q_int(1, 0.5) == pytest.approx(0.5)
    for q in (0.0, 0.3, 0.5):
        assert q_binomial(2, 1, q) == pytest.approx(1 + q)
    assert q_binomial(4, 2, 0.5) == pytest.approx(2.1875)


# -- distributions -----------------------------------------------------------------

def test_qgeom_value_at_one():
    assert qgeom_pmf(0.5, 0.5, 1) == pytest.approx(0.2887880950866024, rel=1e-13)


def test_qgeom_sample_mean():
    x = BatchSampler(10**6, seed=126).qgeom(0.3, 0.6).astype(float)
    assert abs(x.mean() - gamma_rate(0.3, 0.6)) < 3 * x.std(ddof=1) / math.sqrt(x.size)


def test_qhahn_cases():
    assert check_qbinhyp(1, 2, 1, 0.5) < 1e-12
    assert qhahn_table(0.2, 0.1, 5, 0.4).total() == pytest.approx(1.0, abs=1e-12)
    assert check_qhahn_to_qhyp(0, 2, 1, 0.5) < 1e-12
    assert check_qhahn_to_qhyp(2, 4, 3, 0.3) < 1e-12
    assert check_qhahn_to_qhyp(1, 1, 1, 0.7) < 1e-12


def test_qhyp_degenerate_cases():
    for m2, k in [(3, 2), (INF, 4)]:
        assert qhyp_pmf(0, m2, k, 0.5, 0) == 1.0
    assert qhyp_pmf(3, 2, 0, 0.5, 0) == 1.0
    rng = RngStream(0)
    assert {qhyp_sample(0, 4, 3, 0.5, rng) for _ in range(100)} == {0}


def test_qhyp_sample_frequencies():
    n = 10**6
    vals = BatchSampler(n, seed=150).qhyp(2, 3, 2, 0.5)
    for l in range(3):
        p = qhyp_pmf(2, 3, 2, 0.5, l)
        se = math.sqrt(p * (1 - p) / n)
        assert abs((vals == l).mean() - p) < 4 * se


def test_identities_on_two_term_sums():
    assert max(check_qhyp_identities(1, 1, 1, 0.5)) < 1e-15
    q = 0.5
    lhs = sum(q ** ((1 - s) * (1 - s)) / (q_int(1 - s, q) ** 2 * q_int(s, q)) for s in range(2))
    assert lhs == pytest.approx(1 / q_int(1, q) ** 2)


# -- tableaux ----------------------------------------------------------------------

def test_example_tableau():
    p = gt_from_tableau(((1, 2, 2, 3, 3), (2, 3, 4), (4,)))
    assert p.flat() == (1, 3, 1, 5, 2, 0, 5, 3, 1, 0)
    assert type_of(p) == (1, 3, 3, 2)


def test_corners_and_coordinates():
    assert outer_corners((4, 3, 1, 1)) == [(1, 4), (2, 3), (4, 1)]
    assert lambda_coordinate((2, 2), (1, 1)) == LambdaCoordinate(2, 2, 2)


# -- insertion ---------------------------------------------------------------------

def test_q_zero_row_insertion_is_rsk():
    rnd = random.Random(308)
    for _ in range(50):
        m = rnd.randint(1, 4)
        p = GTPattern.zero(m)
        for _ in range(rnd.randint(0, 3)):
            p = rsk_insert_row(p, [rnd.randint(0, 3) for _ in range(m)])
        row = [rnd.randint(0, 3) for _ in range(m)]
        assert qrsk_insert_row(p, row, 0.0, Deterministic()).after == rsk_insert_row(p, row)


def test_small_q_zero_runs():
    out = qrsk_matrix([[1, 0], [0, 1]], 0.0, Deterministic())
    assert out.p_pattern.levels[1] == (2, 0)
    out = qrsk_matrix([[2, 1, 3]], 0.6, 1)
    assert [lev[0] for lev in out.p_pattern.levels] == [2, 3, 6]
    assert dlpp_bruteforce([[1, 2], [3, 0]]) == 4
    assert qrsk_matrix([[1, 2], [3, 0]], 0.0, Deterministic()).p_pattern.entry(2, 1) == 4


def test_geometric_insertion_references():
    rnd = random.Random(332)
    A = [[rnd.uniform(-1, 1) for _ in range(3)] for _ in range(3)]
    assert abs(math.log(grsk_matrix(A)[-1][0]) - dp_partition_bruteforce(A)) < 1e-10
    assert math.log(grsk_matrix([[0.0] * 3] * 2)[-1][0]) == pytest.approx(math.log(math.comb(3, 1)))


# -- growth ------------------------------------------------------------------------

def test_local_rule_forced_cases():
    law = local_rule_pmf((1,), (1,), (2, 1), 0, 0.5)
    assert dict(law.items()) == {(2, 1): 1.0}
    a = local_rule_pmf((1,), (2,), (1,), 1, 0.5)
    b = local_rule_pmf((1,), (1,), (2,), 1, 0.5)
    assert max_table_deviation(a, b) < 1e-13


def test_boundary_path_is_empty():
    law = path_label_dist([[1, 1], [1, 0]], DownRightPath.boundary(2, 2), 0.5)
    assert dict(law.items()) == {((), (), (), (), ()): 1.0}


def test_path_symmetry_all_binary_two_by_two():
    paths = [DownRightPath.from_steps(2, 2, "".join(s)) for s in set(itertools.permutations("RRDD"))]
    for bits in itertools.product((0, 1), repeat=4):
        A = [list(bits[:2]), list(bits[2:])]
        for path in paths:
            assert check_path_symmetry(A, path, 0.5) < 1e-10


@pytest.mark.parametrize("q", [0.0, 0.3, 0.7])
def test_symmetry_small_matrices(q):
    assert check_symmetry([[1, 0], [0, 0]], q) < 1e-10
    assert check_symmetry([[1, 2], [0, 1]], q) < 1e-10


# -- local moves -------------------------------------------------------------------

def test_first_row_move():
    arr = EdgeLabeledArray.from_matrix([[3, 2]])
    apply_l(arr, 1, 2, 0.5, 0)
    assert (arr.w(1, 1), arr.w(1, 2)) == (3, 5)
    apply_lprime(arr, 1, 2)
    assert arr.hedges == {}


def test_strip_move_touches_only_its_diagonal():
    t = {(i, j): i + j for i in range(1, 4) for j in range(1, 4)}
    new = strip_rho(t, 3, 2, 0.5, 4)
    assert all(new[c] == t[c] for c in t if c[0] - c[1] != 1)


def test_q_zero_rectangle_matches_rsk():
    for A in ([[1, 0], [2, 1]], [[0, 3], [1, 1]]):
        t = t_lambda(EdgeLabeledArray.from_matrix(A), (2, 2), growth_sequences((2, 2)), 0.0, Deterministic())
        assert t.restrict((2, 2)) == qrsk_array(Deterministic(), A, (2, 2), 0.0)


def test_equivalence_on_hook_at_low_q():
    for bits in itertools.product((0, 1), repeat=3):
        A = [[bits[0], bits[1]], [bits[2], 0]]
        assert check_qrsk_equivalence((2, 1), A, 0.3) < 1e-10


# -- polymer -----------------------------------------------------------------------

def test_burke_single_draw_law():
    law = enumerate_law(lambda ch: burke_step(1, 1, 0, 0.5, ch)[2])
    assert law[0] == pytest.approx(0.5) and law[1] == pytest.approx(0.5)


@pytest.mark.parametrize("alpha,beta,q", [(0.5, 0.5, 0.0), (0.4, 0.3, 0.5)])
def test_burke_reference_cases(alpha, beta, q):
    r = check_qburke(alpha, beta, q, cap=40)
    assert r.tv < r.tail + 1e-10 and r.xprime_tv < r.tail + 1e-10


def test_first_row_and_q_zero_polymer():
    f = polymer_evolve([[2, 0, 1, 4]], 0.5, 0)
    assert [f[(1, j)] for j in range(1, 5)] == [2, 2, 3, 7]
    rnd = random.Random(556)
    for _ in range(30):
        A = [[rnd.randint(0, 5) for _ in range(4)] for _ in range(4)]
        assert polymer_evolve(A, 0.0, Deterministic())[(4, 4)] == dlpp_bruteforce(A)


def test_stationary_mean():
    z = stationary_batch(5, 5, 0.4, 0.4, 0.5, reps=10**5, seed=563, cells=[(5, 5)])[(5, 5)].astype(float)
    assert abs(z.mean() - expected_z(5, 5, 0.4, 0.4, 0.5)) < 3 * z.std(ddof=1) / math.sqrt(z.size)


def test_top_edge_vertical_increments():
    N, M, beta = 6, 4, 0.45
    z = stationary_batch(N, M, 0.35, beta, 0.5, reps=10**5, seed=565, cells=[(N, j) for j in range(M + 1)])
    incs = [z[(N, j)] - z[(N, j - 1)] for j in range(1, M + 1)]
    for v in incs:
        assert qgeom_chisquare(v, beta, 0.5)[0] > 1e-3
    assert abs(np.corrcoef(incs[0], incs[1])[0, 1]) < 0.02


def test_q_zero_stationary_mean():
    assert expected_z(3, 2, 0.3, 0.4, 0.0) == pytest.approx(3 * 0.3 / 0.7 + 2 * 0.4 / 0.6)


def test_pushtasep_position_mean():
    alpha, beta, q, T, M = 0.3, 0.4, 0.5, 40, 20
    xi = pushtasep_batch(M, T, alpha, beta, q, reps=20_000, seed=581)[-1][M].astype(float)
    target = T * gamma_rate(alpha, q) + M * (gamma_rate(beta, q) + 1)
    assert abs(xi.mean() - target) < 3 * xi.std(ddof=1) / math.sqrt(xi.size)


# -- measures ----------------------------------------------------------------------

def test_two_variable_single_box():
    assert macdonald_P((1, 0), (0.3, 0.7), 0.5) == pytest.approx(1.0)


def test_truncated_qwhittaker_total():
    env = EnvParams([0.3, 0.2], [0.3, 0.2])
    total = math.fsum(qwhittaker_measure(l, env, 0.5) for l in partitions_bounded(2, 12) if sum(l) <= 12)
    assert abs(1 - total) < 1e-8


def test_truncated_pushforward_total():
    env = EnvParams([0.3, 0.3], [0.3, 0.3])
    total = math.fsum(mu_q_lambda(t, (2, 1), env, 0.4) for t in d_lambda_arrays((2, 1), 15))
    tail = 1 - math.prod(1 - qgeom_tail(0.09, 0.4, 15 // 3) for _ in range(3))
    assert 1 - tail - 1e-12 <= total <= 1 + 1e-12


@pytest.mark.parametrize("rows,cap", [((2, 1), 4), ((1, 1), 5)])
def test_pushforward_reference_shapes(rows, cap):
    env = EnvParams([0.3, 0.3][: rows[0]], [0.3, 0.3])
    r = verify_lmpush(rows, env, 0.5, cap)
    assert r.tv < r.tail + 1e-9


def test_rectangle_corner_marginal():
    env = EnvParams([0.3, 0.2], [0.25, 0.35])
    for v in range(4):
        direct = math.fsum(mu_q_lambda(t, (2, 2), env, 0.5) for t in d_lambda_arrays((2, 2), v) if t[(2, 2)] == v)
        assert joint_corner_dist((2, 2), env, 0.5, [v]) == pytest.approx(direct, rel=1e-12)


def test_corollary_reference_cases():
    env = EnvParams([0.3, 0.2], [0.3, 0.2])
    assert verify_qwhittaker_corollary(2, 2, env, 0.5, cap=1).deviation < 1e-9
    assert verify_qwhittaker_corollary(2, 1, env, 0.5, cap=6).deviation < 1e-9


# -- oracle ------------------------------------------------------------------------

def test_single_draw_law_and_tv():
    assert dict(enumerate_law(lambda ch: ch.qhyp(1, INF, 1, 0.5)).items()) == pytest.approx({0: 0.5, 1: 0.5})
    assert tv_distance(ExactLaw({0: 0.5, 1: 0.5}), ExactLaw({0: 0.6, 1: 0.4})) == pytest.approx(0.1)


def test_corner_projection_matches_joint_law():
    rows, q, cap = (2, 1), 0.5, 4
    env = EnvParams([0.35, 0.3], [0.3, 0.25])
    cs = [(1, 1), (1, 2), (2, 1)]
    acc = {}
    for ws in itertools.product(range(cap + 1), repeat=3):
        w = dict(zip(cs, ws))
        pw = math.prod(qgeom_pmf(env.rate(*c), q, w[c]) for c in cs)
        A = [[w[(1, 1)], w[(1, 2)]], [w[(2, 1)], 0]]
        for t, p in t_lambda_law(A, rows, growth_sequences(rows), q).items():
            key = (t[1], t[2])
            acc[key] = acc.get(key, 0.0) + pw * p
    tail = 1 - math.prod(1 - qgeom_tail(env.rate(*c), q, cap) for c in cs)
    gap = math.fsum(abs(p - joint_corner_dist(rows, env, q, list(k))) for k, p in acc.items())
    assert gap <= 2 * tail
