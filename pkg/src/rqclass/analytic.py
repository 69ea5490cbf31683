"""Analytic side: the h* approximation of h*R and Bach's bound.

h* anchors the termination certificate h* < h*R < 2h*.  We take the
truncated Euler product E(Q) = (sqrt(delta)/2) * prod_{p<=Q} (1-chi(p)/p)^-1
and return E(Q)/sqrt(2), so the certificate window is symmetric around
E(Q) on a log scale and tolerates a truncation error up to ln(2)/2.
The window property is validated empirically on the oracle corpus.
"""

import math
from dataclasses import dataclass

import gmpy2

from . import arith, fixed


FRAC_BITS = 160          # >= 128 fractional bits for values up to desk scale
_DEFAULT_Q_FLOOR = 10_000


class InsufficientPrecision(Exception):
    """The configured Euler product cutoff cannot certify the window."""


@dataclass(frozen=True)
class HStar:
    value: int               # fixed point, FRAC_BITS fractional bits
    euler_prime_bound: int

    def to_float(self) -> float:
        return self.value / (1 << FRAC_BITS)


def chi(delta: int, p: int) -> int:
    """The quadratic character (delta/p)."""
    if p == 2:
        if delta % 2 == 0:
            return 0
        return 1 if delta % 8 == 1 else -1
    return arith.kronecker_odd_prime(delta, p)


def default_prime_bound(delta: int) -> int:
    return max(int(2 * math.log(delta) ** 2), _DEFAULT_Q_FLOOR)


def approx_h_star(delta: int, prime_bound: int | None = None) -> HStar:
    """h* with h* < h_delta * R_delta < 2 h* (validated on the oracle corpus)."""
    q = default_prime_bound(delta) if prime_bound is None else prime_bound
    if q < 2:
        raise InsufficientPrecision("prime bound must be at least 2")
    if q < 2 * math.log(delta) ** 2:
        raise InsufficientPrecision(
            f"prime bound {q} below the 2*ln(delta)^2 design minimum")
    with gmpy2.local_context(precision=FRAC_BITS + delta.bit_length() + 32):
        acc = int(gmpy2.mul_2exp(gmpy2.sqrt(gmpy2.mpz(delta)) / 2, FRAC_BITS))
    c = chi(delta, 2)
    if c:
        acc = acc * 2 // (2 - c)
    for p in arith.primes_up_to(q):
        if p == 2:
            continue
        c = _QR_DECODE[arith.qr_table(p)[delta % p]] if p <= (1 << 14) \
            else arith.kronecker(delta, p)
        if c:
            acc = acc * p // (p - c)
    h_star = acc * _INV_SQRT2 >> FRAC_BITS
    if h_star <= 0:
        raise InsufficientPrecision("Euler product underflowed")
    return HStar(h_star, q)


_QR_DECODE = (0, 1, -1)
with gmpy2.local_context(precision=FRAC_BITS + 32):
    _INV_SQRT2 = int(gmpy2.mul_2exp(1 / gmpy2.sqrt(gmpy2.mpfr(2)), FRAC_BITS))


def bach_bound(delta: int) -> int:
    """floor(6 * ln(delta)^2): prime ideals of norm below this generate the
    class group under GRH."""
    with gmpy2.local_context(precision=delta.bit_length() + 96):
        ln = gmpy2.log(gmpy2.mpz(delta))
        return int(gmpy2.floor(6 * ln * ln))
