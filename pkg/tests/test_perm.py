import math
from collections import Counter
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from permuniv.errors import DuplicateUniform, NotABijection, PatternTooLong
from permuniv.perm import (
    Permutation,
    all_permutations,
    contains_pattern,
    format_permutation,
    identity,
    is_k_universal,
    lis,
    lis_indices,
    make_permutation,
    min_length_lower_bound,
    parse_permutation,
    permutation_from_uniforms,
    random_permutation,
    reverse_identity,
)

from oracles import brute_contains, order_type

perms = st.integers(1, 9).flatmap(lambda n: st.permutations(list(range(1, n + 1)))).map(make_permutation)


def test_construction():
    assert make_permutation([1]).n == 1
    assert make_permutation([2, 5, 3, 1, 4]).values == (2, 5, 3, 1, 4)
    with pytest.raises(NotABijection):
        make_permutation([1, 1, 2])
    with pytest.raises(NotABijection):
        make_permutation([0, 1])


def test_parse_and_format():
    assert parse_permutation("25314") == make_permutation([2, 5, 3, 1, 4])
    assert parse_permutation("1,3,2") == parse_permutation("1 3 2")
    assert format_permutation(identity(12)) == ",".join(str(i) for i in range(1, 13))
    assert parse_permutation(format_permutation(identity(12))) == identity(12)


def test_inverse_and_call():
    s = make_permutation([2, 5, 3, 1, 4])
    assert s(2) == 5
    inv = s.inverse()
    assert all(inv(s(i)) == i for i in range(1, 6))


def test_contains_examples():
    assert contains_pattern(parse_permutation("25314"), parse_permutation("321")) == (2, 3, 4)
    assert contains_pattern(identity(7), identity(4)) == (1, 2, 3, 4)
    assert contains_pattern(parse_permutation("123"), parse_permutation("21")) is None


@settings(max_examples=200, deadline=None)
@given(perms, st.integers(1, 4), st.data())
def test_contains_matches_bruteforce(sigma, k, data):
    pi = make_permutation(data.draw(st.permutations(list(range(1, k + 1)))))
    if k > sigma.n:
        with pytest.raises(PatternTooLong):
            contains_pattern(sigma, pi)
        return
    w = contains_pattern(sigma, pi)
    assert (w is not None) == brute_contains(sigma, pi)
    if w is not None:
        assert order_type([sigma(i) for i in w]) == pi.values
        # lexicographically least witness
        first = next(idx for idx in combinations(range(1, sigma.n + 1), k)
                     if order_type([sigma(i) for i in idx]) == pi.values)
        assert w == first


def test_lis_examples():
    assert lis([]) == 0
    assert lis(identity(9)) == 9
    assert lis(reverse_identity(9)) == 1
    assert lis([1, 3, 2, 4]) == 3


@given(st.lists(st.integers(0, 20), max_size=12))
def test_lis_matches_bruteforce(seq):
    best = max((r for r in range(len(seq) + 1) for idx in combinations(range(len(seq)), r)
                if all(seq[a] < seq[b] for a, b in zip(idx, idx[1:]))), default=0)
    assert lis(seq) == best
    idx = lis_indices(seq)
    assert len(idx) == best
    assert all(seq[a] < seq[b] for a, b in zip(idx, idx[1:]))


def test_universality_examples():
    ok, missing = is_k_universal(parse_permutation("25314"), 3)
    assert ok and missing == []
    assert not any(is_k_universal(s, 3)[0] for s in all_permutations(4))
    ok, missing = is_k_universal(identity(5), 2)
    assert not ok and missing == [parse_permutation("21")]


def test_random_permutation_edges():
    assert random_permutation(1, 7).values == (1,)
    assert random_permutation(0, 7).n == 0
    assert random_permutation(20, 3) == random_permutation(20, 3)


def test_random_permutation_uniform():
    counts = Counter(random_permutation(3, seed).values for seed in range(60000))
    assert len(counts) == 6
    _, p = chisquare(list(counts.values()))
    assert p > 1e-3


def test_from_uniforms():
    assert permutation_from_uniforms([0.1, 0.5, 0.3]).values == (1, 3, 2)
    assert permutation_from_uniforms([0.1, 0.2, 0.7]) == identity(3)
    assert permutation_from_uniforms([0.9, 0.2, 0.1]) == reverse_identity(3)
    with pytest.raises(DuplicateUniform):
        permutation_from_uniforms([0.5, 0.5])


def test_min_length_lower_bound():
    assert [min_length_lower_bound(k) for k in (1, 2, 3)] == [1, 3, 5]
    for k in range(1, 12):
        n = min_length_lower_bound(k)
        assert math.comb(n, k) >= math.factorial(k) > math.comb(n - 1, k)
