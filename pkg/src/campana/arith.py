"""Exact integer arithmetic: factorization, m-full predicates and sieves,
Mobius and coprimality utilities.

Everything here is deterministic and pure; a SieveTable is read-only after
construction and safe to share across threads.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from math import gcd, isqrt

import numpy as np

__all__ = [
    "Factorization",
    "SieveTable",
    "factorize",
    "is_prime",
    "is_m_full",
    "m_full_list",
    "m_full_table",
    "coprime_count",
    "squarefree_divisors",
    "mobius_sieve",
    "is_perfect_square",
]

_SIEVE_MAGIC = b"CMPSIEVE1"

# Deterministic Miller-Rabin witness set, valid for all n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True)
class Factorization:
    """Canonical factorization: primes strictly increasing, exponents >= 1."""

    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError("factors must have increasing primes and exponents >= 1")
            last = p
            prod *= p**e
        if prod != self.value:
            raise ValueError(f"factors do not multiply to {self.value}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def exponent(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0

    def radical(self) -> int:
        r = 1
        for p, _ in self.factors:
            r *= p
        return r


class SieveTable:
    """Smallest-prime-factor table for 1..limit.

    spf[n] is the least prime dividing n for n >= 2; spf[1] = 1 is a
    sentinel and spf[0] = 0. Entries are uint32, so limit < 2**32.
    """

    def __init__(self, limit: int, spf: np.ndarray):
        if limit < 1:
            raise ValueError("limit must be >= 1")
        if len(spf) != limit + 1:
            raise ValueError("spf array length must be limit + 1")
        self.limit = limit
        self.spf = spf
        self.spf.setflags(write=False)

    @classmethod
    def build(cls, limit: int) -> "SieveTable":
        if limit < 1:
            raise ValueError("limit must be >= 1")
        spf = np.arange(limit + 1, dtype=np.uint32)
        spf[0] = 0
        for p in range(2, isqrt(limit) + 1):
            if spf[p] == p:
                block = spf[p * p :: p]
                untouched = block == np.arange(p * p, limit + 1, p, dtype=np.uint32)
                block[untouched] = p
        return cls(limit, spf)

    def smallest_prime_factor(self, n: int) -> int:
        if not 2 <= n <= self.limit:
            raise ValueError(f"n={n} outside table range 2..{self.limit}")
        return int(self.spf[n])

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "wb") as fh:
            fh.write(_SIEVE_MAGIC)
            fh.write(struct.pack("<Q", self.limit))
            fh.write(self.spf[1:].astype("<u4").tobytes())

    @classmethod
    def load(cls, path: str | os.PathLike) -> "SieveTable":
        with open(path, "rb") as fh:
            magic = fh.read(len(_SIEVE_MAGIC))
            if magic != _SIEVE_MAGIC:
                raise ValueError(f"bad sieve cache magic {magic!r}")
            raw = fh.read(8)
            if len(raw) != 8:
                raise ValueError("truncated sieve cache header")
            (limit,) = struct.unpack("<Q", raw)
            if not 1 <= limit < 2**32:
                raise ValueError(f"implausible sieve cache limit {limit}")
            body = fh.read()
            if len(body) != 4 * limit:
                raise ValueError("sieve cache body length mismatch")
            spf = np.zeros(limit + 1, dtype=np.uint32)
            spf[1:] = np.frombuffer(body, dtype="<u4")
        table = cls(limit, spf)
        # spot-validate so a corrupted body fails loudly
        if limit >= 2 and table.smallest_prime_factor(2) != 2:
            raise ValueError("sieve cache failed validation")
        if limit >= 9 and table.smallest_prime_factor(9) != 3:
            raise ValueError("sieve cache failed validation")
        return table


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n handled here (< 3.3e24)."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    """A nontrivial factor of composite odd n (Brent's cycle variant)."""
    if n % 2 == 0:
        return 2
    seed = 1
    while True:
        y, c, m = seed, seed + 1, 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if g != n:
            return g
        seed += 1


def _factor_general(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_brent(m)
        stack.append(d)
        stack.append(m // d)
    return out


def factorize(n: int, table: SieveTable | None = None) -> Factorization:
    """Canonical factorization of n >= 1; n = 1 gives the empty product.

    Uses the smallest-prime-factor table when it covers n, otherwise trial
    division with a deterministic Miller-Rabin / Pollard-Brent fallback.
    """
    if n < 1:
        raise ValueError(f"factorize requires n >= 1, got {n}")
    if n == 1:
        return Factorization(1, ())
    if table is not None and n <= table.limit:
        out: dict[int, int] = {}
        m = n
        while m > 1:
            p = int(table.spf[m])
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out[p] = e
        return Factorization(n, tuple(sorted(out.items())))
    return Factorization(n, tuple(sorted(_factor_general(n).items())))


def is_m_full(n: int, m: int, table: SieveTable | None = None) -> bool:
    """True iff every prime exponent in n is at least m. 1 is m-full for all m."""
    if n < 1:
        raise ValueError(f"is_m_full requires n >= 1, got {n}")
    if m < 1:
        raise ValueError(f"is_m_full requires m >= 1, got {m}")
    if n == 1 or m == 1:
        return True
    return all(e >= m for _, e in factorize(n, table).factors)


def m_full_list(limit: int, m: int) -> list[int]:
    """All m-full integers in [1, limit], ascending.

    Generated as products of k-th powers for m <= k <= 2m-1: every exponent
    e >= m decomposes over that range, so the candidate set is exactly the
    m-full numbers after deduplication.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return list(range(1, limit + 1))
    vals: set[int] = set()

    def extend(k: int, cur: int) -> None:
        if k == 2 * m:
            vals.add(cur)
            return
        a = 1
        while cur * a**k <= limit:
            extend(k + 1, cur * a**k)
            a += 1

    extend(m, 1)
    return sorted(vals)


def m_full_table(limit: int, m: int) -> np.ndarray:
    """Boolean membership table t[0..limit] with t[n] = (n is m-full); t[0] = False."""
    t = np.zeros(limit + 1, dtype=bool)
    if m == 1:
        t[1:] = True
    else:
        idx = np.fromiter(m_full_list(limit, m), dtype=np.int64)
        t[idx] = True
    t.setflags(write=False)
    return t


def squarefree_divisors(q: int, table: SieveTable | None = None) -> list[tuple[int, int]]:
    """(d, mu(d)) for every squarefree divisor d of rad(q)."""
    if q < 1:
        raise ValueError("q must be >= 1")
    divs = [(1, 1)]
    for p in factorize(q, table).primes:
        divs += [(d * p, -s) for d, s in divs]
    return divs


def coprime_count(bound: int, q: int, table: SieveTable | None = None) -> int:
    """#{1 <= k <= bound : gcd(k, q) = 1} by inclusion-exclusion over rad(q)."""
    if bound < 0:
        raise ValueError("bound must be >= 0")
    if bound == 0:
        return 0
    return sum(s * (bound // d) for d, s in squarefree_divisors(q, table))


def mobius_sieve(limit: int) -> np.ndarray:
    """mu(n) for 0 <= n <= limit via a linear sieve."""
    mu = np.zeros(limit + 1, dtype=np.int8)
    if limit >= 1:
        mu[1] = 1
    primes: list[int] = []
    composite = bytearray(limit + 1)
    for i in range(2, limit + 1):
        if not composite[i]:
            primes.append(i)
            mu[i] = -1
        for p in primes:
            ip = i * p
            if ip > limit:
                break
            composite[ip] = 1
            if i % p == 0:
                mu[ip] = 0
                break
            mu[ip] = -mu[i]
    return mu


def is_perfect_square(n: int) -> bool:
    if n < 0:
        return False
    r = isqrt(n)
    return r * r == n
