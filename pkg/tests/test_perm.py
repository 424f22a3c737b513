import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from permcommit.perm import (
    InvalidSecurityParameter,
    Perm,
    check_security_param,
    compose,
    draw_key,
    enumerate_keys,
    inverse,
    is_key,
    parity,
    rank,
    symmetric_group,
    unrank,
)


def perms(n):
    return st.permutations(list(range(1, n + 1))).map(Perm)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_rank_matches_lexicographic_order(n):
    # itertools yields permutations in lexicographic order of one-line notation
    for k, p in enumerate(itertools.permutations(range(1, n + 1))):
        assert rank(Perm(p)) == k
        assert unrank(n, k) == Perm(p)


def test_known_ranks():
    assert rank(Perm.identity(6)) == 0
    assert rank(Perm((6, 5, 4, 3, 2, 1))) == 719
    assert unrank(3, 3) == Perm((2, 3, 1))


def test_composition_convention():
    a = Perm.from_cycles(3, (1, 2))
    b = Perm.from_cycles(3, (2, 3))
    # (a b)(i) = a(b(i)): 1 -> 1 -> 2, 2 -> 3 -> 3, 3 -> 2 -> 1
    assert compose(a, b) == Perm((2, 3, 1))
    assert a * b == compose(a, b)


def test_parity_convention_even_is_one():
    assert parity(Perm.identity(4)) == 1
    assert parity(Perm.from_cycles(4, (1, 2))) == 0
    assert parity(Perm.from_cycles(4, (1, 2, 3))) == 1


@given(perms(6), perms(6), perms(6))
def test_group_axioms(a, b, c):
    e = Perm.identity(6)
    assert compose(compose(a, b), c) == compose(a, compose(b, c))
    assert compose(a, e) == a == compose(e, a)
    assert compose(a, inverse(a)) == e
    assert parity(compose(a, b)) == 1 - (parity(a) ^ parity(b))


@given(perms(6))
def test_rank_roundtrip(p):
    assert unrank(6, rank(p)) == p
    assert Perm.from_json(p.to_json()) == p


@given(perms(5))
def test_cycles_reconstruct(p):
    assert Perm.from_cycles(5, *p.cycles()) == p


@pytest.mark.parametrize("n,count", [(2, 1), (6, 15), (10, 945)])
def test_key_count_is_double_factorial(n, count):
    keys = enumerate_keys(n)
    assert len(keys) == count == math.prod(range(n - 1, 0, -2))
    assert len(set(keys)) == count


@pytest.mark.parametrize("n", [2, 6])
def test_keys_are_odd_fixed_point_free_involutions(n):
    e = Perm.identity(n)
    for k in enumerate_keys(n):
        assert compose(k, k) == e
        assert all(k(i) != i for i in range(1, n + 1))
        assert parity(k) == 0  # n/2 odd transpositions
        assert is_key(k)
    assert not is_key(e)


def test_first_key_in_rank_order():
    assert enumerate_keys(6)[0] == Perm.from_cycles(6, (1, 2), (3, 4), (5, 6))
    assert str(enumerate_keys(6)[0]) == "(12)(34)(56)"
    assert str(Perm.identity(3)) == "id"


@pytest.mark.parametrize("n", [0, 1, 3, 4, 8, -2])
def test_security_parameter_rejected(n):
    with pytest.raises(InvalidSecurityParameter):
        check_security_param(n)


@pytest.mark.parametrize("n", [2, 6, 10])
def test_security_parameter_accepted(n):
    assert check_security_param(n) == n


def test_draw_key_is_seeded():
    assert draw_key(6, 3) == draw_key(6, 3)
    assert is_key(draw_key(6, np.random.default_rng(1)))


@pytest.mark.parametrize("n", [2, 3, 6])
def test_tables_agree_with_objects(n):
    g = symmetric_group(n)
    assert g.order == math.factorial(n)
    rng = np.random.default_rng(n)
    for _ in range(50):
        a, b = (int(x) for x in rng.integers(g.order, size=2))
        assert g.perm(int(g.mult[a, b])) == compose(g.perm(a), g.perm(b))
        assert g.perm(int(g.inv[a])) == inverse(g.perm(a))
        assert g.parity[a] == parity(g.perm(a))
    assert [g.perm(k) for k in g.keys] == [g.perm(r) for r in range(g.order) if is_key(g.perm(r))]
    if n % 4 == 2:
        assert [g.perm(k) for k in g.keys] == enumerate_keys(n)


def test_tables_are_read_only():
    g = symmetric_group(3)
    with pytest.raises(ValueError):
        g.mult[0, 0] = 1


def test_invalid_perm_rejected():
    with pytest.raises(ValueError):
        Perm((1, 1, 2))
