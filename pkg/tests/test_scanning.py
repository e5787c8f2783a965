import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import nbinom

from permuniv.errors import Infeasible, OutOfBounds, RowRangeExceeded
from permuniv.matrix import ZeroOneMatrix, is_copy, matrix_contains_permutation
from permuniv.perm import all_permutations, identity, make_permutation, parse_permutation
from permuniv.quasirandom import all_l_delta, l_delta
from permuniv.rng import make_rng
from permuniv.scanning import (
    check_event_A,
    check_event_A_prime,
    choose_threads,
    multi_thread_scan,
    negative_binomial_tail,
    row_runs,
    run_length,
    scan_thread,
    sum_runs_at_placement,
    verify_trace,
)

from oracles import brute_scan, brute_thread_window, no_long_run_probability

P132 = parse_permutation("132")


def random_matrix(rows, cols, seed):
    return ZeroOneMatrix.random(rows, cols, make_rng(seed))


def test_run_length_examples(single_grid):
    assert run_length(single_grid, 5, 3) == 5
    assert run_length(single_grid, 5, 8) == 0
    assert run_length(ZeroOneMatrix.zeros(2, 9), 1, 1) == 9
    with pytest.raises(OutOfBounds):
        run_length(single_grid, 7, 1)


@given(st.integers(0, 10_000))
def test_row_runs_agree(seed):
    M = random_matrix(3, 15, seed)
    for y in range(1, 4):
        assert row_runs(M, y) == [run_length(M, y, x) for x in range(1, 16)]


def test_negative_binomial_examples():
    assert negative_binomial_tail(1, 1) == 0.5
    assert negative_binomial_tail(1, 3) == 0.125
    assert negative_binomial_tail(5, 20) < math.exp(-20 / 8)
    assert negative_binomial_tail(3, 0) == 1.0


@given(st.integers(1, 60), st.integers(0, 500))
def test_negative_binomial_matches_scipy(ell, r):
    # failures before the ell-th success: Pr(F >= r) = sf(r - 1)
    assert negative_binomial_tail(ell, r) == pytest.approx(nbinom.sf(r - 1, ell, 0.5), rel=1e-9, abs=1e-300)


def test_scan_single_grid(single_grid):
    tr = scan_thread(single_grid, P132, 2)
    assert tr.success
    assert tr.witness == [(3, 2), (5, 8), (4, 11)]
    assert tr.exposed_count == 11


def test_scan_trivial():
    for pi in all_permutations(3):
        tr = scan_thread(ZeroOneMatrix.ones(5, 4), pi, 1)
        assert tr.success and [x for _, x in tr.witness] == [1, 2, 3]
    tr = scan_thread(ZeroOneMatrix.zeros(4, 7), P132, 0)
    assert not tr.success and tr.exposed_count == 7
    with pytest.raises(RowRangeExceeded):
        scan_thread(ZeroOneMatrix.zeros(4, 7), P132, 2)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 4), st.integers(0, 3), st.sampled_from([None, 1, 2, 3]), st.data())
def test_scan_matches_reference(seed, k, t, cap, data):
    pi = make_permutation(data.draw(st.permutations(list(range(1, k + 1)))))
    M = random_matrix(k + 3, 10, seed)
    tr = scan_thread(M, pi, t, cap)
    ok, witness, exposed = brute_scan(M, pi, t, cap)
    assert tr.success == ok
    assert tr.witness == witness
    assert tr.exposed == exposed
    assert verify_trace(M, pi, tr)
    assert tr.exposed_count <= M.cols
    if cap is None:
        assert tr.success == brute_thread_window(M, pi, t)
        if tr.success:
            assert is_copy(M, pi, tr.witness)
            assert matrix_contains_permutation(M, pi) is not None


def test_two_threads_one_shared_row(double_grid):
    rep = multi_thread_scan(double_grid, P132, [2, 3])
    t2, t3 = rep.traces
    assert not t2.success and t2.exposed_count == 12
    assert t3.success and t3.witness == [(4, 5), (6, 6), (5, 9)] and t3.exposed_count == 9
    (ov,) = rep.overlaps
    assert ov.rows == [5]
    assert len(ov.rows) <= l_delta(P132, 1) == 1


def test_single_thread_reduces(single_grid):
    rep = multi_thread_scan(single_grid, P132, [2])
    assert rep.traces == [scan_thread(single_grid, P132, 2)] and rep.overlaps == []


def test_overlap_rows_bounded_by_shift_statistic():
    rng = np.random.default_rng(11)
    for i in range(2000):
        pi = make_permutation([int(v) + 1 for v in rng.permutation(5)])
        M = random_matrix(12, 60, i)
        rep = multi_thread_scan(M, pi, [1, 2])
        assert len(rep.overlaps[0].rows) <= all_l_delta(pi)[0]


def test_choose_threads():
    assert choose_threads(set(), 3, 10) == [1, 2, 3]
    assert choose_threads({1}, 3, 10) == [1, 3, 5]
    with pytest.raises(Infeasible):
        choose_threads(set(range(1, 10)), 2, 10)


def test_event_A_examples():
    assert check_event_A(ZeroOneMatrix.ones(3, 5), 1)[0]
    ok, v = check_event_A(ZeroOneMatrix.zeros(2, 4), 3)
    assert not ok and v == [(1, 1), (2, 1)]


def test_event_A_frequency_matches_exact():
    k = 6
    threshold = math.ceil(math.log(k) ** 2)
    exact = no_long_run_probability(100, threshold) ** 12
    trials = 3000
    hits = sum(check_event_A(random_matrix(12, 100, s), threshold)[0] for s in range(trials))
    sigma = math.sqrt(exact * (1 - exact) / trials)
    assert abs(hits / trials - exact) <= 4 * sigma


def test_event_A_prime():
    assert check_event_A_prime(ZeroOneMatrix.ones(3, 5), 1, 0) == (True, [])
    M = ZeroOneMatrix.from_rows([[1, 0, 1], [0, 0, 0], [1, 1, 0]])
    assert check_event_A_prime(M, 2, 1) == (True, [2])
    for s in range(50):
        R = random_matrix(4, 12, s)
        assert check_event_A_prime(R, 3, 0)[0] == check_event_A(R, 3)[0]


def test_sum_runs():
    assert sum_runs_at_placement(ZeroOneMatrix.ones(4, 4), [(1, 1), (2, 3)]) == 0
    M = random_matrix(4, 20, 3)
    assert sum_runs_at_placement(M, [(2, 5)]) == run_length(M, 2, 5)
    assert sum_runs_at_placement(M, [(1, 5)], t=1) == run_length(M, 2, 5)
    with pytest.raises(ValueError):
        sum_runs_at_placement(M, [(1, 1), (1, 2)])


def test_sum_runs_tail_dominated():
    rng = make_rng(99)
    trials, hits = 100_000, 0
    bits = rng.integers(0, 2, size=(trials, 5, 200), dtype=np.int8)
    for i in range(trials):
        M = ZeroOneMatrix.from_array(bits[i])
        place = [(y, int(x)) for y, x in zip(range(1, 6), rng.integers(1, 50, size=5))]
        hits += sum_runs_at_placement(M, place) >= 20
    bound = negative_binomial_tail(5, 20)
    assert hits / trials <= bound + 3 * math.sqrt(bound * (1 - bound) / trials)
