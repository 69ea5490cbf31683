"""Exact integer and modular arithmetic shared by every other module.

Everything here is pure and safe to call concurrently.  The lookup-table
caches (small primes, smallest-prime-factor, per-prime quadratic residue
and square-root tables) are filled once per process and only ever grow.
"""

import math
from functools import lru_cache

import numpy as np


class NonResidue(Exception):
    """Square root requested for a quadratic non-residue."""


class SqufofFailed(Exception):
    """All SQUFOF multipliers exhausted without a proper factor."""


# ---------------------------------------------------------------------------
# prime tables

_primes: list[int] = []
_prime_bound = 0
_spf: np.ndarray | None = None
_spf_bound = 0


def primes_up_to(n: int) -> list[int]:
    """All primes <= n, cached and extended on demand."""
    global _primes, _prime_bound
    if n > _prime_bound:
        bound = max(n, 2 * _prime_bound, 1 << 10)
        sieve = np.ones(bound + 1, dtype=bool)
        sieve[:2] = False
        for p in range(2, math.isqrt(bound) + 1):
            if sieve[p]:
                sieve[p * p :: p] = False
        _primes = [int(p) for p in np.nonzero(sieve)[0]]
        _prime_bound = bound
    if n == _prime_bound:
        return _primes
    import bisect

    return _primes[: bisect.bisect_right(_primes, n)]


def spf_table(limit: int) -> np.ndarray:
    """Smallest-prime-factor table for 0..limit (spf[0] = spf[1] = 0)."""
    global _spf, _spf_bound
    if limit > _spf_bound:
        bound = max(limit, 1 << 16)
        t = np.zeros(bound + 1, dtype=np.int64)
        t[2::2] = 2
        for p in range(3, math.isqrt(bound) + 1, 2):
            if t[p] == 0:
                t[p * p :: 2 * p][t[p * p :: 2 * p] == 0] = p
        odd = np.arange(1, bound + 1, 2)
        rest = t[1::2] == 0
        t[1::2][rest] = odd[rest]
        t[1] = 0
        _spf, _spf_bound = t, bound
    return _spf


def factorize(n: int) -> dict[int, int]:
    """Full factorization of n >= 1 as {prime: exponent}.  Desk scale only."""
    assert n >= 1
    out: dict[int, int] = {}
    if n == 1:
        return out
    if n <= _spf_bound or n <= (1 << 22):
        spf = spf_table(max(n, 1))
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
        return out
    for p in primes_up_to(1 << 16):
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n == 1:
        return out
    stack = [n]
    while stack:
        m = stack.pop()
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        r = math.isqrt(m)
        if r * r == m:
            stack += [r, r]
            continue
        d = split_composite(m)
        stack += [d, m // d]
    return out


# ---------------------------------------------------------------------------
# Kronecker symbol and modular square roots

def kronecker(n: int, m: int) -> int:
    """Kronecker symbol (n/m) for m >= 1."""
    if m < 1:
        raise ValueError("modulus must be positive")
    if m == 1:
        return 1
    result = 1
    # factor of 2 in m: (n/2) is 0 for even n, +-1 by n mod 8
    while m % 2 == 0:
        m //= 2
        if n % 2 == 0:
            return 0
        if n % 8 in (3, 5):
            result = -result
    # Jacobi symbol for the remaining odd m
    n %= m
    while n:
        while n % 2 == 0:
            n //= 2
            if m % 8 in (3, 5):
                result = -result
        n, m = m, n
        if n % 4 == 3 and m % 4 == 3:
            result = -result
        n %= m
    return result if m == 1 else 0


@lru_cache(maxsize=None)
def qr_table(p: int) -> bytes:
    """Lookup table of Legendre symbols mod an odd prime p <= 2**14.

    Entry a holds (a/p) encoded as 0 -> 0, 1 -> +1, 2 -> -1.
    """
    assert p <= (1 << 14)
    t = bytearray([2]) * p
    t[0] = 0
    sq = np.unique((np.arange(1, p, dtype=np.int64) ** 2) % p)
    for a in sq:
        t[int(a)] = 1
    return bytes(t)


_QR_DECODE = (0, 1, -1)


def kronecker_odd_prime(n: int, p: int) -> int:
    """(n/p) for odd prime p, via cached tables when p is small."""
    if p <= (1 << 14):
        return _QR_DECODE[qr_table(p)[n % p]]
    return kronecker(n, p)


@lru_cache(maxsize=None)
def sqrt_table(p: int) -> np.ndarray:
    """Table of square roots mod an odd prime p <= 2**13.

    Entry a is the smallest r with r*r = a (mod p), or p when a is a
    non-residue.
    """
    assert p <= (1 << 13)
    t = np.full(p, p, dtype=np.int32)
    r = np.arange((p + 1) // 2, dtype=np.int64)
    t[(r * r) % p] = r
    return t


def sqrt_mod_p(n: int, p: int) -> int:
    """Some r in [0, p) with r*r = n (mod p); raises NonResidue otherwise."""
    if p == 2:
        return n % 2
    a = n % p
    if a == 0:
        return 0
    if p <= (1 << 13):
        r = int(sqrt_table(p)[a])
        if r == p:
            raise NonResidue(f"{n} is not a square mod {p}")
        return r
    if kronecker(a, p) == -1:
        raise NonResidue(f"{n} is not a square mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    if p % 8 == 5:
        r = pow(a, (p + 3) // 8, p)
        if r * r % p != a:
            r = r * pow(2, (p - 1) // 4, p) % p
        return r
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while kronecker(z, p) != -1:
        z += 1
    c = pow(z, q, p)
    r = pow(a, (q + 1) // 2, p)
    t = pow(a, q, p)
    m = s
    while t != 1:
        t2 = t
        i = 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        r = r * b % p
        c = b * b % p
        t = t * c % p
        m = i
    return r


# ---------------------------------------------------------------------------
# primality

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_SMALL_PRIME_SET = frozenset(primes_up_to(1 << 10))


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n < 3.3e24."""
    if n < 2:
        return False
    if n < (1 << 10):
        return n in _SMALL_PRIME_SET
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# SQUFOF and Pollard rho

_SQUFOF_MULTIPLIERS = (1, 3, 5, 7, 11)


def _squfof_inverse_walk(n: int, d: int, p0: int, p: int, r: int, cap: int) -> int | None:
    """Walk the inverse square-root cycle to the symmetry point."""
    b = (p0 - p) // r
    p = b * r + p
    q_prev = r
    q = (d - p * p) // q_prev
    for _ in range(cap):
        quo = (p0 + p) // q
        p_next = quo * q - p
        if p_next == p:
            g = q if q % 2 else q // 2
            g = math.gcd(g, n)
            return g if 1 < g < n else None
        q_prev, q = q, q_prev + quo * (p - p_next)
        p = p_next
    return None


def _squfof_one(n: int, mult: int, cap: int) -> int | None:
    d = mult * n
    p0 = math.isqrt(d)
    if p0 * p0 == d:
        g = math.gcd(p0, n)
        return g if 1 < g < n else None
    p = p0
    q_prev, q = 1, d - p0 * p0
    if q == 0:
        return None
    for i in range(2, cap):
        quo = (p0 + p) // q
        p_next = quo * q - p
        q_next = q_prev + quo * (p - p_next)
        q_prev, q = q, q_next
        p = p_next
        if i % 2 == 0:
            r = math.isqrt(q)
            if r * r == q:
                # try this square form; improper ones give a trivial gcd,
                # in which case the forward cycle simply continues
                if r == 1:
                    return None
                g = _squfof_inverse_walk(n, d, p0, p, r, 2 * cap)
                if g is not None:
                    return g
    return None


def squfof(n: int) -> int:
    """A nontrivial factor of an odd composite n < 2**62.

    Races a handful of square-free multipliers with a bounded iteration
    budget; raises SqufofFailed when none of them produces a proper
    square form (the caller is expected to fall back to Pollard rho).
    """
    if n % 2 == 0:
        raise ValueError("squfof needs odd input")
    r = math.isqrt(n)
    if r * r == n:
        return r
    cap = 6 * math.isqrt(2 * math.isqrt(n)) + 64
    for mult in _SQUFOF_MULTIPLIERS:
        if mult > 1 and n % mult == 0:
            return mult
        g = _squfof_one(n, mult, cap)
        if g is not None:
            return g
    raise SqufofFailed(f"no square form found for {n}")


def pollard_rho(n: int) -> int:
    """Brent-cycle Pollard rho; n must be composite and > 1."""
    if n % 2 == 0:
        return 2
    c = 1
    while True:
        x = y = 2
        d = 1
        f = lambda v: (v * v + c) % n
        count = 0
        while d == 1:
            x = f(x)
            y = f(f(y))
            d = math.gcd(abs(x - y), n)
            count += 1
            if count > (1 << 20):
                break
        if 1 < d < n:
            return d
        c += 1


def split_composite(n: int) -> int:
    """Nontrivial factor of composite n: SQUFOF first, rho on failure."""
    if n % 2 == 0:
        return 2
    try:
        return squfof(n)
    except SqufofFailed:
        return pollard_rho(n)


def is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n
