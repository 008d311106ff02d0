import os
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from campana.arith import (
    SieveTable,
    coprime_count,
    factorize,
    is_m_full,
    is_perfect_square,
    m_full_list,
    m_full_table,
    mobius_sieve,
    squarefree_divisors,
)


@pytest.fixture(scope="module")
def table():
    return SieveTable.build(10**5)


def test_factorize_basics(table):
    assert factorize(1).factors == ()
    assert factorize(72, table).factors == ((2, 3), (3, 2))
    assert factorize(97, table).factors == ((97, 1),)
    assert factorize(2**40 * 3).factors == ((2, 40), (3, 1))


def test_factorize_rejects_nonpositive():
    with pytest.raises(ValueError):
        factorize(0)
    with pytest.raises(ValueError):
        factorize(-6)


def test_factorize_large_semiprime():
    p, q = 1_000_003, 999_983
    f = factorize(p * q)
    assert f.factors == ((q, 1), (p, 1))


@given(st.integers(min_value=1, max_value=10**6))
def test_factorize_roundtrip(n):
    f = factorize(n)
    prod = 1
    for p, e in f.factors:
        prod *= p**e
    assert prod == n


def test_is_m_full_examples():
    assert is_m_full(72, 2)
    assert is_m_full(1, 5)
    assert not is_m_full(24, 3)


@given(
    st.integers(min_value=1, max_value=3000),
    st.integers(min_value=1, max_value=3000),
    st.integers(min_value=1, max_value=5),
)
def test_m_full_multiplicative(a, b, m):
    if gcd(a, b) == 1:
        assert is_m_full(a * b, m) == (is_m_full(a, m) and is_m_full(b, m))


@given(st.integers(min_value=1, max_value=10**5), st.integers(min_value=2, max_value=6))
def test_m_full_monotone_in_m(n, m):
    if is_m_full(n, m):
        assert all(is_m_full(n, mm) for mm in range(1, m))


def test_m_full_list_examples():
    vals = m_full_list(100, 2)
    assert vals == [1, 4, 8, 9, 16, 25, 27, 32, 36, 49, 64, 72, 81, 100]
    assert m_full_list(10, 1) == list(range(1, 11))
    assert m_full_list(7, 3) == [1]


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_m_full_list_matches_predicate(m, table):
    lim = 20000
    assert m_full_list(lim, m) == [n for n in range(1, lim + 1) if is_m_full(n, m, table)]


def test_m_full_table_agrees(table):
    t = m_full_table(5000, 2)
    for n in range(1, 5001):
        assert t[n] == is_m_full(n, 2, table)


def test_coprime_count_examples():
    assert coprime_count(10, 1) == 10
    assert coprime_count(10, 4) == 5
    assert coprime_count(10, 9) == 7
    assert coprime_count(0, 7) == 0


@given(st.integers(min_value=0, max_value=1000), st.integers(min_value=1, max_value=1000))
@settings(max_examples=200)
def test_coprime_count_naive(bound, q):
    assert coprime_count(bound, q) == sum(1 for k in range(1, bound + 1) if gcd(k, q) == 1)


def test_squarefree_divisors():
    assert sorted(squarefree_divisors(12)) == [(1, 1), (2, -1), (3, -1), (6, 1)]


def test_mobius_sieve():
    mu = mobius_sieve(30)
    assert mu[1] == 1 and mu[2] == -1 and mu[4] == 0 and mu[6] == 1 and mu[30] == -1


def test_sieve_table_roundtrip(tmp_path, table):
    small = SieveTable.build(1000)
    path = tmp_path / "spf.bin"
    small.save(path)
    loaded = SieveTable.load(path)
    assert loaded.limit == 1000
    assert loaded.smallest_prime_factor(999) == 3
    assert loaded.smallest_prime_factor(997) == 997


def test_sieve_table_rejects_corruption(tmp_path):
    small = SieveTable.build(100)
    path = tmp_path / "spf.bin"
    small.save(path)
    raw = bytearray(path.read_bytes())
    raw[0] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError):
        SieveTable.load(path)
    # truncated body
    small.save(path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        SieveTable.load(path)


def test_is_perfect_square():
    assert is_perfect_square(0) and is_perfect_square(36)
    assert not is_perfect_square(-4) and not is_perfect_square(35)
