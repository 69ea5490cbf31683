"""Smoothness certification and large-prime classification.

Residues of sieve candidates are split into a factor-base smooth part and
a cofactor, either by plain trial division or by Bernstein's batch method
(product tree + remainder tree + repeated squaring).  Cofactors are then
classified into full / one large prime / two large primes / discard.
"""

import math
from dataclasses import dataclass
from enum import Enum

from . import arith
from .field import FactorBase


class DiscardReason(Enum):
    TOO_BIG = "TooBig"                  # m > B2^2
    PRIME_TOO_BIG = "PrimeTooBig"       # m prime, m > B2
    FACTOR_TOO_BIG = "FactorTooBig"     # m = p*p' with a factor > B2
    TOO_MANY_FACTORS = "TooManyFactors"
    FACTOR_FAILED = "FactorFailed"      # SQUFOF and rho both gave up


@dataclass(frozen=True)
class RemainderClass:
    kind: str                           # 'full' | 'one_lp' | 'two_lp' | 'discard'
    primes: tuple[int, ...] = ()
    reason: DiscardReason | None = None

    @property
    def usable(self) -> bool:
        return self.kind != "discard"


FULL = RemainderClass("full")


@dataclass
class CandidateBatch:
    """Sieve survivors waiting for a batched smoothness test."""
    entries: list[tuple[object, int, int]]      # (poly, x, |phi(x,1)|)
    capacity: int = 100

    def add(self, poly, x: int, value: int) -> bool:
        assert value >= 1
        self.entries.append((poly, x, value))
        return len(self.entries) >= self.capacity

    def values(self) -> list[int]:
        return [v for _, _, v in self.entries]


def trial_divide(v: int, fb: FactorBase) -> tuple[dict[int, int], int]:
    """v = m * prod p^e over factor-base primes, m coprime to all of them.

    Returns ({fb index: e}, m).
    """
    assert v >= 1
    exps: dict[int, int] = {}
    if 1 < v <= 4_000_000:
        spf = arith.spf_table(4_000_000)
        m = 1
        while v > 1:
            p = int(spf[v])
            e = 0
            while v % p == 0:
                v //= p
                e += 1
            idx = fb.index.get(p)
            if idx is None:
                m *= p**e
            else:
                exps[idx] = e
        return exps, m
    for idx, entry in enumerate(fb.entries):
        p = entry.p
        if p * p > v:
            break
        if v % p == 0:
            e = 1
            v //= p
            while v % p == 0:
                v //= p
                e += 1
            exps[idx] = e
    if v > 1 and v <= fb.b1:
        idx = fb.index.get(v)
        if idx is not None:
            exps[idx] = exps.get(idx, 0) + 1
            v = 1
    return exps, v


def prime_product(fb: FactorBase) -> int:
    """Product of all factor-base primes, computed once per run."""
    return _balanced_product([e.p for e in fb.entries])


def _balanced_product(vals: list[int]) -> int:
    if not vals:
        return 1
    while len(vals) > 1:
        vals = [vals[i] * vals[i + 1] for i in range(0, len(vals) - 1, 2)] + \
            (vals[-1:] if len(vals) % 2 else [])
    return vals[0]


def batch_cofactors(values, fb_product: int) -> list[int]:
    """Cofactor of each value after removing its factor-base smooth part.

    Matches trial_divide's cofactor exactly: a product tree gives
    fb_product mod v for every v at once, then repeated squaring pulls the
    whole smooth part out in a single gcd.
    """
    if isinstance(values, CandidateBatch):
        values = values.values()
    assert values, "batch must be non-empty"
    tree = [list(values)]
    while len(tree[-1]) > 1:
        level = tree[-1]
        tree.append([level[i] * level[i + 1] for i in range(0, len(level) - 1, 2)]
                    + (level[-1:] if len(level) % 2 else []))
    rems = [fb_product % tree[-1][0]]
    for level in reversed(tree[:-1]):
        nxt = []
        for i, v in enumerate(level):
            nxt.append(rems[i // 2] % v)
        rems = nxt
    out = []
    for v, r in zip(values, rems):
        if v == 1:
            out.append(1)
            continue
        # r^(2^k) mod v captures p^e for every fb prime p once 2^k >= e
        k = max(v.bit_length().bit_length(), 1)
        s = r % v
        for _ in range(k):
            s = s * s % v
        g = math.gcd(s, v)
        out.append(v // g)
    return out


def classify(m: int, b1: int, b2: int) -> RemainderClass:
    """The four-way cofactor classification plus discard bookkeeping."""
    assert m >= 1 and b2 < b1 * b1
    if m == 1:
        return FULL
    if m > b2 * b2:
        return RemainderClass("discard", reason=DiscardReason.TOO_BIG)
    if arith.is_prime(m):
        if m > b2:
            return RemainderClass("discard", reason=DiscardReason.PRIME_TOO_BIG)
        assert m > b1, "cofactor has a factor-base prime factor"
        return RemainderClass("one_lp", (m,))
    # composite coprime to everything <= B1, so it is > B1^2
    if m <= b1 * b1:
        # unreachable under the precondition; counted, never fatal
        return RemainderClass("discard", reason=DiscardReason.TOO_MANY_FACTORS)
    try:
        d = arith.split_composite(m)
    except arith.SqufofFailed:
        return RemainderClass("discard", reason=DiscardReason.FACTOR_FAILED)
    p, q = min(d, m // d), max(d, m // d)
    if not (arith.is_prime(p) and arith.is_prime(q)):
        return RemainderClass("discard", reason=DiscardReason.TOO_MANY_FACTORS)
    if q > b2:
        return RemainderClass("discard", reason=DiscardReason.FACTOR_TOO_BIG)
    assert p > b1
    return RemainderClass("two_lp", (p, q))
