"""Brute-force ground truth for desk-scale discriminants.

Independent of the sieving pipeline on purpose: this module carries its own
binary-form arithmetic.  The regulator comes from walking the cycle of
reduced principal forms with the relating element tracked exactly; the
class group comes from enumerating every reduced primitive form,
partitioning them into rho-cycles, and identifying each wide ideal class
with a cycle paired to its negation.
"""

import math
from functools import lru_cache

import numpy as np

from . import arith, fixed


DESK_BOUND_REGULATOR = 10**12
DESK_BOUND_FORMS = 10**10


class DeskBoundExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# regulator via the principal cycle

def _principal_form(delta: int, root: int) -> tuple[int, int]:
    b0 = root - ((root - delta) % 2)
    return 1, b0


def _rho(a: int, b: int, delta: int, root: int) -> tuple[int, int]:
    """Ideal reduction step on (a, b), a > 0; same windowing as the classics."""
    a2 = abs((b * b - delta) // (4 * a))
    b2 = (-b) % (2 * a2)
    if a2 > root:
        if b2 > a2:
            b2 -= 2 * a2
    else:
        b2 += ((root - b2) // (2 * a2)) * 2 * a2
    return a2, b2


def fundamental_unit(delta: int) -> tuple[int, int, int]:
    """The fundamental unit of the order of discriminant delta as
    (x, y, z) standing for (x + y*sqrt(delta))/z, with z in {1, 2}."""
    root = math.isqrt(delta)
    start = _principal_form(delta, root)
    a, b = start
    x, y, z = 1, 0, 1
    while True:
        x, y = x * b - y * delta, y * b - x
        z *= 2 * a
        g = math.gcd(math.gcd(abs(x), abs(y)), z)
        if g > 1:
            x, y, z = x // g, y // g, z // g
        a, b = _rho(a, b, delta, root)
        if (a, b) == start:
            break
    norm = x * x - y * y * delta
    assert abs(norm) == z * z, "cycle element is not a unit"
    return x, y, z


def cf_regulator(delta: int, prec: int = 64) -> int:
    """ln of the fundamental unit, as fixed point with prec fractional bits.

    Walks the principal cycle.  For prec <= 30 the log is accumulated in
    compensated double precision (plenty for a 1e-6 comparison and much
    faster once regulators reach the thousands); otherwise the unit is
    accumulated exactly and taken ln of once.
    """
    if delta > DESK_BOUND_REGULATOR:
        raise DeskBoundExceeded(f"delta={delta} above desk bound")
    root = math.isqrt(delta)
    if prec > 30:
        x, y, z = fundamental_unit(delta)
        return abs(fixed.ln_quadratic_abs(x, y, z, delta, prec))
    sqrt_d = math.sqrt(delta)
    start = _principal_form(delta, root)
    a, b = start
    total = 0.0
    comp = 0.0
    while True:
        c = abs((b * b - delta) // (4 * a))
        # ln|gamma| = ln(2|c|) - ln(b + sqrt(delta)), no cancellation
        term = math.log(2 * c) - math.log(b + sqrt_d)
        t = total + term
        if abs(total) >= abs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t
        a, b = _rho(a, b, delta, root)
        if (a, b) == start:
            break
    return fixed.to_fixed(abs(total + comp), prec)


# ---------------------------------------------------------------------------
# reduced-form enumeration

def _divisors_in_window(factors: dict[int, int], lo: int, hi: int) -> list[int]:
    """All divisors d with lo <= d <= hi, from a factorization dict."""
    divs = [1]
    for p, e in factors.items():
        if p > hi:
            continue
        cur = list(divs)
        pk = 1
        for _ in range(e):
            pk *= p
            if pk > hi:
                break
            divs.extend(d * pk for d in cur if d * pk <= hi)
    return [d for d in divs if lo <= d <= hi]


def _factored_midvalues(delta: int) -> tuple[np.ndarray, list[dict[int, int]]]:
    """For each admissible b, the factorization of (delta - b^2)/4.

    Small deltas walk a smallest-prime-factor table; larger ones are
    stride-sieved over the b grid (p | (delta-b^2)/4 happens exactly on the
    two arithmetic progressions b = +-sqrt(delta) mod p).
    """
    root = math.isqrt(delta)
    b_start = 1 if delta % 2 else 2
    bs = np.arange(b_start, root + 1, 2, dtype=np.int64)
    m_vals = (delta - bs * bs) // 4
    n = len(bs)
    if delta <= 4_000_000:
        spf = arith.spf_table(max(int(m_vals.max(initial=1)), 1))
        facts = []
        for m in m_vals.tolist():
            f: dict[int, int] = {}
            while m > 1:
                p = int(spf[m])
                e = 0
                while m % p == 0:
                    m //= p
                    e += 1
                f[p] = e
            facts.append(f)
        return bs, facts
    facts = [dict() for _ in range(n)]
    residual = m_vals.tolist()
    # powers of two by hand, odd primes along strides
    for i, m in enumerate(residual):
        e = 0
        while m % 2 == 0:
            m //= 2
            e += 1
        if e:
            facts[i][2] = e
            residual[i] = m
    inv2 = {}
    for p in arith.primes_up_to(10_000):
        if p == 2:
            continue
        chi = arith.kronecker_odd_prime(delta, p)
        if chi == -1:
            continue
        r = arith.sqrt_mod_p(delta, p)
        roots = {r % p, (-r) % p}
        ip2 = pow(2, -1, p)
        for rr in roots:
            k0 = ((rr - int(bs[0])) * ip2) % p
            for i in range(k0, n, p):
                m = residual[i]
                e = 0
                while m % p == 0:
                    m //= p
                    e += 1
                if e:
                    facts[i][p] = e
                    residual[i] = m
    for i, m in enumerate(residual):
        if m == 1:
            continue
        for p, e in arith.factorize(m).items():
            facts[i][p] = facts[i].get(p, 0) + e
    return bs, facts


def reduced_forms(delta: int) -> list[tuple[int, int, int]]:
    """Every reduced primitive form (a, b, c) of positive discriminant delta."""
    root = math.isqrt(delta)
    check_content = delta % 4 == 0 and (delta // 4) % 4 == 1
    forms = []
    bs, facts = _factored_midvalues(delta)
    for b, fac in zip(bs.tolist(), facts):
        lo = (root - b) // 2 + 1
        hi = (root + b) // 2
        m = (delta - b * b) // 4
        for a in _divisors_in_window(fac, max(lo, 1), hi):
            c = -(m // a)
            if check_content and a % 2 == 0 and b % 2 == 0 and c % 2 == 0:
                continue
            forms.append((a, b, c))
            forms.append((-a, b, -c))
    return forms


# ---------------------------------------------------------------------------
# cycles, classes, group structure

def _rho_form(f: tuple[int, int, int], delta: int, root: int) -> tuple[int, int, int]:
    a, b, c = f
    ac = abs(c)
    b2 = (-b) % (2 * ac)
    if ac > root:
        if b2 > ac:
            b2 -= 2 * ac
    else:
        b2 += ((root - b2) // (2 * ac)) * 2 * ac
    return c, b2, (b2 * b2 - delta) // (4 * c)


def _compose_forms(f1, f2, delta: int):
    a1, b1 = f1[0], f1[1]
    a2, b2 = f2[0], f2[1]
    s = (b1 + b2) // 2
    g0, u, v = _xgcd3(a1, a2)
    g, k, w = _xgcd3(g0, s)
    x, y = u * k, v * k
    a3 = (a1 * a2) // (g * g)
    b3 = (x * a1 * b2 + y * a2 * b1 + w * (b1 * b2 + delta) // 2) // g
    b3 %= 2 * a3
    return a3, b3, (b3 * b3 - delta) // (4 * a3)


def _xgcd3(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


class FormClassGroup:
    """The wide class group of the order of discriminant delta, realized on
    rho-cycles of reduced forms paired with their negations."""

    def __init__(self, delta: int):
        if delta > DESK_BOUND_FORMS:
            raise DeskBoundExceeded(f"delta={delta} above desk bound")
        self.delta = delta
        self.root = math.isqrt(delta)
        forms = reduced_forms(delta)
        self.cycle_of: dict[tuple[int, int, int], int] = {}
        n_cycles = 0
        for f in forms:
            if f in self.cycle_of:
                continue
            cid = n_cycles
            n_cycles += 1
            g = f
            while g not in self.cycle_of:
                self.cycle_of[g] = cid
                g = _rho_form(g, delta, self.root)
            assert g == f, "rho walk left the starting cycle"
        # pair each cycle with the cycle of its negation
        pair_of_cycle: dict[int, int] = {}
        for f, cid in self.cycle_of.items():
            if cid in pair_of_cycle:
                continue
            neg = (-f[0], f[1], -f[2])
            pair_of_cycle[cid] = min(cid, self.cycle_of[neg])
        self.pair_of_cycle = pair_of_cycle
        self.rep_of_pair: dict[int, tuple[int, int, int]] = {}
        for f, cid in self.cycle_of.items():
            pid = pair_of_cycle[cid]
            if f[0] > 0 and pid not in self.rep_of_pair:
                self.rep_of_pair[pid] = f
        self.pairs = sorted(set(pair_of_cycle.values()))
        self.h = len(self.pairs)
        principal = _principal_form(delta, self.root)
        pf = (1, principal[1], (principal[1] ** 2 - delta) // 4)
        self.identity = self._pair_of_form(pf)

    def _pair_of_form(self, f: tuple[int, int, int]) -> int:
        root = self.root
        steps = 0
        while f not in self.cycle_of:
            f = _rho_form(f, self.delta, root)
            steps += 1
            assert steps < 4 * self.delta.bit_length() + 64
        return self.pair_of_cycle[self.cycle_of[f]]

    def compose(self, p1: int, p2: int) -> int:
        f = _compose_forms(self.rep_of_pair[p1], self.rep_of_pair[p2], self.delta)
        return self._pair_of_form(f)

    def power(self, p: int, e: int) -> int:
        result = self.identity
        base = p
        while e:
            if e & 1:
                result = self.compose(result, base)
            base = self.compose(base, base)
            e >>= 1
        return result

    def prime_class(self, q: int) -> int:
        """Class of a prime form (q, b, c); q must be non-inert."""
        d = self.delta
        if q == 2:
            if d % 8 == 1:
                b = 1
            elif d % 4 == 0 and (d // 4) % 4 in (2, 3):
                b = 0 if d % 8 == 0 else 2
            else:
                raise ValueError("no invertible prime above 2")
        else:
            b = arith.sqrt_mod_p(d, q)
            if (b - d) % 2:
                b += q
        return self._pair_of_form((q, b, (b * b - d) // (4 * q)))

    def elementary_divisors(self) -> tuple[int, ...]:
        """Divisor chain (m_1, ..., m_l), each > 1, with m_{i+1} | m_i."""
        h = self.h
        if h == 1:
            return ()
        partitions = []
        for p, k in sorted(arith.factorize(h).items()):
            # count p-power torsion: N_j = #{x : x^(p^j) = e}; the ratio
            # N_j / N_{j-1} is p^(number of cyclic factors of order >= p^j).
            # Projecting every element through x^(h/p^k) covers the p-Sylow
            # subgroup with uniform multiplicity, which cancels in the ratio.
            cur = [self.power(x, h // p**k) for x in self.pairs]
            n_prev = sum(1 for v in cur if v == self.identity)
            lam = []
            for _ in range(k):
                cur = [self.power(v, p) for v in cur]
                n_j = sum(1 for v in cur if v == self.identity)
                parts = round(math.log(n_j / n_prev, p))
                if parts == 0:
                    break
                lam.append(parts)
                n_prev = n_j
            # lam[j-1] = number of cyclic factors of order >= p^j
            sizes: list[int] = []
            for j, parts in enumerate(lam, start=1):
                while len(sizes) < parts:
                    sizes.append(0)
                for i in range(parts):
                    sizes[i] = j
            partitions.append((p, sizes))
        width = max(len(s) for _, s in partitions)
        chain = []
        for i in range(width):
            m = 1
            for p, sizes in partitions:
                if i < len(sizes):
                    m *= p ** sizes[i]
            chain.append(m)
        chain.sort(reverse=True)
        assert math.prod(chain) == h
        for i in range(len(chain) - 1):
            assert chain[i + 1] > 1 and chain[i] % chain[i + 1] == 0
        return tuple(chain)


def class_group_by_forms(delta: int) -> tuple[int, tuple[int, ...]]:
    g = FormClassGroup(delta)
    return g.h, g.elementary_divisors()


# ---------------------------------------------------------------------------
# corpus helpers

def squarefree_mask(limit: int) -> np.ndarray:
    mask = np.ones(limit + 1, dtype=bool)
    mask[0] = False
    for p in arith.primes_up_to(math.isqrt(limit)):
        mask[p * p :: p * p] = False
    return mask


def fundamental_discriminants(limit: int) -> list[int]:
    """All fundamental discriminants 1 < delta <= limit, ascending."""
    mask = squarefree_mask(limit)
    out = [int(d) for d in np.nonzero(mask[: limit + 1])[0] if d % 4 == 1 and d > 1]
    m_hi = limit // 4
    for m in np.nonzero(mask[: m_hi + 1])[0]:
        if m % 4 in (2, 3):
            out.append(int(4 * m))
    out.sort()
    return out


def is_fundamental(d: int) -> bool:
    if d <= 1:
        return False
    if d % 4 == 1:
        return not any(e > 1 for e in arith.factorize(d).values())
    if d % 4 == 0:
        m = d // 4
        if m % 4 not in (2, 3):
            return False
        return not any(e > 1 for e in arith.factorize(m).values())
    return False
