"""Self-initialized sieving of phi(x,1) = a x^2 + b x + c.

The a coefficients are products of t distinct odd split factor-base primes
aimed at a window around sqrt(delta)/M; for each a the 2^(t-1) admissible
b values are enumerated in Gray-code order, with the per-prime sieve roots
updated by precomputed increments between consecutive polynomials.
Sieving accumulates scaled 8-bit logs and reports every x whose sum clears
ln|phi(x,1)| - T*ln(B1).
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .field import FactorBase


class Exhausted(Exception):
    """No further a-ideal selections are available."""


@dataclass(frozen=True)
class SieveConfig:
    m: int                  # sieve radius: x in [-m, m]
    tolerance: float
    b1: int
    b2: int
    t: int = 0              # preferred number of a factors (0 = auto)

    def __post_init__(self):
        assert self.m >= 2
        assert self.tolerance > 0
        assert self.b1 < self.b2 < self.b1 * self.b1, \
            f"need B1 < B2 < B1^2, got B1={self.b1}, B2={self.b2}"


@dataclass
class SievePolynomial:
    a: int
    b: int
    c: int
    gray_index: int
    a_factor_idx: tuple[int, ...]       # factor-base indices of the a primes
    roots1: np.ndarray                  # roots of phi mod p; -1 when absent
    roots2: np.ndarray
    power_hits: list[tuple[int, int, tuple[int, ...]]]  # (p^k, p, roots mod p^k)

    def value(self, x: int) -> int:
        return self.a * x * x + self.b * x + self.c

    def beta(self, x: int) -> int:
        """2ax + b: the second coefficient of the cofactor ideal at x."""
        return 2 * self.a * x + self.b


class PolynomialStream:
    """Serial iterator over sieving polynomials for one discriminant.

    next_a() never repeats an a-factor subset; family() yields all 2^(t-1)
    b choices for one subset in Gray-code order.
    """

    def __init__(self, delta: int, fb: FactorBase, cfg: SieveConfig):
        self.delta = delta
        self.fb = fb
        self.cfg = cfg
        self._ps = np.array([e.p for e in fb.entries], dtype=np.int64)
        self._bp_mod_p = np.array([e.b_p % e.p for e in fb.entries], dtype=np.int64)
        self.pool = [i for i, e in enumerate(fb.entries)
                     if e.p > 2 and not e.ramified]
        self._selection_iter = self._selections()

    def __iter__(self):
        while True:
            yield from self.family(self.next_a())

    # -- a selection -------------------------------------------------------

    def _selections(self):
        target = max(math.isqrt(self.delta) // self.cfg.m, 1)
        lo, hi = max(target // 2, 1), max(2 * target, 2)
        if target < 3 or not self.pool:
            yield ()
        tried: set[int] = set()
        t0 = self.cfg.t
        if not t0:
            smallest = self.fb.entries[self.pool[0]].p if self.pool else 3
            t0 = max(1, round(math.log(max(target, 2)) / math.log(max(smallest, 3))))
        for t in (t0, t0 + 1, t0 - 1, t0 + 2, t0 - 2, t0 + 3):
            if t < 1 or t > len(self.pool) or t in tried:
                continue
            tried.add(t)
            ideal_p = target ** (1.0 / t)
            band = sorted(self.pool,
                          key=lambda i: abs(self.fb.entries[i].p - ideal_p))[:24]
            combos = []
            for sub in itertools.combinations(sorted(band), t):
                prod = math.prod(self.fb.entries[i].p for i in sub)
                combos.append((abs(math.log(prod / target)), prod, sub))
            combos.sort()
            for _, prod, sub in (c for c in combos if lo <= c[1] <= hi):
                yield sub
            for _, prod, sub in (c for c in combos if not lo <= c[1] <= hi):
                yield sub

    def next_a(self) -> tuple[int, ...]:
        try:
            return next(self._selection_iter)
        except StopIteration:
            raise Exhausted("a-factor subsets exhausted") from None

    # -- polynomial family for one a ----------------------------------------

    def family(self, selection: tuple[int, ...]):
        delta = self.delta
        entries = [self.fb.entries[i] for i in selection]
        t = len(entries)
        if t == 0:
            yield self._fresh_poly(1, delta % 2, 0, ())
            return
        a = math.prod(e.p for e in entries)
        # CRT pieces: big_b[i] = b_{p_i} mod p_i, 0 mod the other a-primes
        big_b = []
        for e in entries:
            rest = a // e.p
            big_b.append(rest * ((pow(rest % e.p, -1, e.p) * e.b_p) % e.p))
        b = sum(big_b)
        if (b - delta) % 2:
            big_b[0] += a          # a is odd, so this flips the parity only
            b += a
        assert (b * b - delta) % (4 * a) == 0
        poly = self._fresh_poly(a, b, 0, tuple(selection))
        yield poly
        if t == 1:
            return
        ps = self._ps
        inv2a = _invmod_vec(np.mod(2 * a, ps), ps)
        shifts = [np.mod(2 * bi, ps) * inv2a % ps for bi in big_b]
        gray_prev = 0
        r1, r2 = poly.roots1, poly.roots2
        # the sign of big_b[0] stays fixed; gray bit j toggles big_b[j+1]
        for k in range(1, 1 << (t - 1)):
            gray = k ^ (k >> 1)
            bit = (gray ^ gray_prev).bit_length() - 1
            gray_prev = gray
            s = 1 if gray & (1 << bit) else -1     # newly set: sign + -> -
            b -= 2 * s * big_b[bit + 1]
            r1 = np.where(r1 >= 0, (r1 + s * shifts[bit + 1]) % ps, -1)
            r2 = np.where(r2 >= 0, (r2 + s * shifts[bit + 1]) % ps, -1)
            poly = self._poly_from_roots(a, b, k, tuple(selection), r1, r2)
            yield poly

    def _fresh_poly(self, a, b, gray_index, selection) -> SievePolynomial:
        delta = self.delta
        c = (b * b - delta) // (4 * a)
        ps = self._ps
        n = len(ps)
        r1 = np.full(n, -1, dtype=np.int64)
        r2 = np.full(n, -1, dtype=np.int64)
        for i in range(n):
            p = int(ps[i])
            if p == 2:
                roots = [x for x in (0, 1) if (a * x * x + b * x + c) % 2 == 0]
                if roots:
                    r1[i] = roots[0]
                    if len(roots) > 1:
                        r2[i] = roots[1]
                continue
            am = a % p
            bm = b % p
            if am == 0:
                if bm:
                    r1[i] = (-c * pow(bm, -1, p)) % p
                continue
            inv2a = pow(2 * am % p, -1, p)
            rt = int(self._bp_mod_p[i])
            r1[i] = ((rt - bm) * inv2a) % p
            if rt:
                r2[i] = ((-rt - bm) * inv2a) % p
        return SievePolynomial(a, b, c, gray_index, selection, r1, r2,
                               self._power_roots(a, b, c, r1, r2))

    def _poly_from_roots(self, a, b, gray_index, selection, r1, r2) -> SievePolynomial:
        c = (b * b - self.delta) // (4 * a)
        # entries for p | a and p = 2 do not follow the generic shift; redo them
        r1 = r1.copy()
        r2 = r2.copy()
        for i in selection:
            p = int(self._ps[i])
            bm = b % p
            r1[i] = (-c * pow(bm, -1, p)) % p if bm else -1
            r2[i] = -1
        if int(self._ps[0]) == 2:
            roots = [x for x in (0, 1) if (a * x * x + b * x + c) % 2 == 0]
            r1[0] = roots[0] if roots else -1
            r2[0] = roots[1] if len(roots) > 1 else -1
        return SievePolynomial(a, b, c, gray_index, selection, r1, r2,
                               self._power_roots(a, b, c, r1, r2))

    def _power_roots(self, a, b, c, r1, r2) -> list[tuple[int, int, tuple[int, ...]]]:
        """phi roots mod p^k for p < 100, p^k <= B1: powers of two by scanning,
        odd primes by Hensel lifting the simple roots."""
        out = []
        b1 = self.cfg.b1
        if self.fb.entries and self.fb.entries[0].p == 2:
            for q in (4, 8):
                if q > b1:
                    break
                roots = tuple(x for x in range(q) if (a * x * x + b * x + c) % q == 0)
                if roots:
                    out.append((q, 2, roots))
        for i, e in enumerate(self.fb.entries):
            p = e.p
            if p == 2 or p >= 100 or p * p > b1 or e.ramified or a % p == 0:
                continue
            roots = tuple(int(r) for r in (r1[i], r2[i]) if r >= 0)
            pk = p
            while pk * p <= b1 and roots:
                pk *= p
                lifted = []
                for r in roots:
                    der = (2 * a * r + b) % p
                    if der == 0:
                        continue
                    r_new = (r - (a * r * r + b * r + c) *
                             pow((2 * a * r + b) % pk, -1, pk)) % pk
                    assert (a * r_new * r_new + b * r_new + c) % pk == 0
                    lifted.append(r_new)
                roots = tuple(lifted)
                if roots:
                    out.append((pk, p, roots))
        return out


def _invmod_vec(vals: np.ndarray, mods: np.ndarray) -> np.ndarray:
    out = np.empty_like(mods)
    for i in range(len(mods)):
        m = int(mods[i])
        v = int(vals[i]) % m
        out[i] = pow(v, -1, m) if m > 1 and math.gcd(v, m) == 1 else 0
    return out


def sieve_interval(poly: SievePolynomial, cfg: SieveConfig, fb: FactorBase
                   ) -> list[int]:
    """All x in [-M, M] whose accumulated log sum reaches
    ln|phi(x,1)| - T*ln(B1)."""
    m = cfg.m
    size = 2 * m + 1
    # pick the log scale so per-x sums (bounded by sigma*ln|phi(x)|) fit a byte
    phi_bound = max(abs(poly.value(-m)), abs(poly.value(m)), abs(poly.c), cfg.b2 + 2)
    sigma = 251.0 / math.log(phi_bound)
    acc = np.zeros(size, dtype=np.uint8)
    for i, e in enumerate(fb.entries):
        p = e.p
        lp = np.uint8(max(round(math.log(p) * sigma), 1))
        for r in (int(poly.roots1[i]), int(poly.roots2[i])):
            if r < 0:
                continue
            acc[(r + m) % p :: p] += lp
    for q, p, roots in poly.power_hits:
        lp = np.uint8(max(round(math.log(p) * sigma), 1))
        for r in roots:
            acc[(r + m) % q :: q] += lp
    slack = cfg.tolerance * math.log(cfg.b1)
    xs = np.arange(-m, m + 1, dtype=np.float64)
    vals = np.abs((poly.a * xs + poly.b) * xs + poly.c)
    targets = np.maximum(np.floor((np.log(vals) - slack) * sigma), 0.0)
    return [int(x) - m for x in np.nonzero(acc >= targets)[0]]
