import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from permuniv.errors import DeltaOutOfRange, NoShift, NotInjective
from permuniv.experiments import tilted_grid
from permuniv.perm import Permutation, all_permutations, identity, lis, make_permutation, parse_permutation
from permuniv.quasirandom import (
    PartialMap,
    ShiftWitness,
    all_l_delta,
    all_l_delta_restricted,
    in_Q_k,
    is_quasirandom_map,
    is_quasirandom_set,
    l_delta,
    l_delta_restricted,
    ldelta_rows,
    max_l_delta,
    meets,
    parse_partial_map,
    random_L_bound,
    restrict_permutation,
    shift_partner_map,
    shift_witness,
    verify_shift_witness,
)

from oracles import brute_l_delta

P132 = parse_permutation("132")
perms = st.integers(1, 10).flatmap(lambda n: st.permutations(list(range(1, n + 1)))).map(make_permutation)


def test_partial_map_basics():
    phi = parse_partial_map("2:5,4:1", 6)
    assert phi.domain == (2, 4) and phi(2) == 5
    assert str(phi) == "2:5,4:1"
    with pytest.raises(NotInjective):
        PartialMap(5, (1, 2), (3, 3))
    with pytest.raises(ValueError):
        PartialMap(5, (2, 1), (3, 4))


def test_partner_map_examples():
    assert shift_partner_map(identity(6), 2) == {i: i + 2 for i in range(1, 5)}
    assert shift_partner_map(P132, 1) == {1: 3, 3: 2}
    assert shift_partner_map(identity(6), 6) == {}
    with pytest.raises(DeltaOutOfRange):
        shift_partner_map(P132, 0)
    with pytest.raises(DeltaOutOfRange):
        l_delta(P132, 4)


def test_l_delta_examples():
    assert l_delta(P132, 1) == 1
    assert all(l_delta(identity(9), d) == 9 - d for d in range(1, 10))
    assert l_delta_restricted(identity(6), {4, 5, 6}, 2) == 3
    assert l_delta_restricted(identity(6), set(), 2) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_l_delta_oracle(n):
    for pi in all_permutations(n):
        phi = dict(enumerate(pi.values, start=1))
        fast = all_l_delta(pi)
        for d in range(1, n + 1):
            assert l_delta(pi, d) == fast[d - 1] == brute_l_delta(phi, d)


@settings(max_examples=150, deadline=None)
@given(perms, st.data())
def test_restricted_oracle_and_monotone(pi, data):
    k = pi.n
    X = set(data.draw(st.lists(st.integers(1, k), unique=True)))
    extra = set(data.draw(st.lists(st.integers(1, k), unique=True)))
    phi = dict(enumerate(pi.values, start=1))
    fast = all_l_delta_restricted(pi, X)
    for d in range(1, k + 1):
        r = l_delta_restricted(pi, X, d)
        assert r == fast[d - 1]
        if k <= 8:
            assert r == brute_l_delta(phi, d, upper_in=X)
        assert r <= l_delta_restricted(pi, X | extra, d)
    assert all_l_delta_restricted(pi, range(1, k + 1)) == all_l_delta(pi)


@settings(max_examples=100, deadline=None)
@given(perms)
def test_symmetry_co_shift(pi):
    pos = pi.positions()
    for d in range(1, pi.n + 1):
        co = [pos[v - d] for v in pi.values if v - d >= 1]
        assert lis(co) == l_delta(pi, d)


@settings(max_examples=200, deadline=None)
@given(perms)
def test_witness_valid(pi):
    for d in range(1, pi.n):
        L = l_delta(pi, d)
        if L == 0:
            with pytest.raises(NoShift):
                shift_witness(pi, d)
            continue
        w = shift_witness(pi, d)
        assert len(w) == L and verify_shift_witness(pi, w)


def test_witness_examples():
    assert shift_witness(identity(4), 1).pairs == ((1, 2), (2, 3), (3, 4))
    w = shift_witness(P132, 1)
    assert len(w) == 1 and w.pairs[0] in ((1, 3), (3, 2))
    assert not verify_shift_witness(P132, ShiftWitness(1, ((1, 3), (3, 2))))
    w = shift_witness(identity(6), 2, X={4, 5, 6})
    assert w.upper == (4, 5, 6)


def test_quasirandom_set_examples():
    assert is_quasirandom_set(identity(5), [], Fraction(1, 2), 1) == (True, [])
    for k in range(4, 10):
        ok, bad = is_quasirandom_set(identity(k), range(1, k + 1), Fraction(1, 2), 1)
        assert not ok and 1 in bad
    tg = tilted_grid(10)
    ok, bad = is_quasirandom_set(tg, range(1, 101), Fraction(1, 4), 25)
    assert not ok and len(bad) >= 25


def test_float_alpha_is_exact():
    # 0.1 * 30 = 3.0000000000000004 in floats; the threshold must still admit L = 3
    assert meets(3, 0.1, 30)
    assert not meets(2, 0.1, 30)


@settings(max_examples=100, deadline=None)
@given(perms, st.sampled_from([Fraction(1, 10), Fraction(1, 4), Fraction(1, 2)]), st.integers(1, 4))
def test_map_and_set_agree_on_full_domain(pi, alpha, q):
    full = restrict_permutation(pi, range(1, pi.n + 1))
    assert is_quasirandom_map(full, alpha, q) == is_quasirandom_set(pi, range(1, pi.n + 1), alpha, q)
    assert is_quasirandom_map(pi, alpha, q) == is_quasirandom_map(full, alpha, q)
    copy = PartialMap(full.k, tuple(full.domain), tuple(full.values))
    assert is_quasirandom_map(copy, alpha, q) == is_quasirandom_map(full, alpha, q)


def test_quasirandom_map_empty():
    assert is_quasirandom_map(PartialMap(5, (), ()), Fraction(1, 4), 1) == (True, [])


def test_Q_k_examples():
    assert not in_Q_k(identity(16))
    assert in_Q_k(identity(1))
    assert max_l_delta(identity(16)) == (15, 1)


def test_L_bound():
    b = random_L_bound(1, 1)
    assert b.exact == 1
    for k in range(1, 201):
        for L in range(1, k + 1):
            b = random_L_bound(k, L)
            assert b.log_exact <= b.log_simplified + 1e-9
    assert random_L_bound(400, 60).simplified < 1


def test_ldelta_rows():
    rows = ldelta_rows(P132)
    assert [r["L_delta"] for r in rows] == [1, 1, 0]
    assert all(r["max_L"] == 1 for r in rows)
