"""Real quadratic field objects.

Primitive integral ideals of the order of discriminant delta are stored as
pairs (a, b) with 4a | b^2 - delta, standing for a*Z + ((b+sqrt(delta))/2)*Z.
Multiplication is Gauss composition; reduction is the usual rho operator
for indefinite forms, with the distance ln|gamma| tracked exactly.
"""

import math
from dataclasses import dataclass

from . import arith, fixed


class NotFundamental(Exception):
    pass


class PerfectSquare(Exception):
    pass


class Inert(Exception):
    """No invertible prime ideal above p (inert, or p divides the conductor)."""


class NotSmooth(Exception):
    pass


@dataclass(frozen=True)
class Discriminant:
    delta: int

    @property
    def isqrt(self) -> int:
        return math.isqrt(self.delta)

    def __int__(self) -> int:
        return self.delta


def make_discriminant(d0: int) -> Discriminant:
    """Validate d0 as a positive quadratic discriminant (delta or delta/4 square-free)."""
    if d0 <= 0:
        raise NotFundamental(f"{d0} is not positive")
    if arith.is_square(d0):
        raise PerfectSquare(f"{d0} is a perfect square")
    if d0 % 4 == 1:
        core = d0
    elif d0 % 4 == 0:
        core = d0 // 4
    else:
        raise NotFundamental(f"{d0} is 2 or 3 mod 4")
    if any(e > 1 for e in arith.factorize(core).values()):
        raise NotFundamental(f"{'d0' if core == d0 else 'd0/4'} = {core} is not square-free")
    return Discriminant(d0)


# ---------------------------------------------------------------------------
# prime ideals and the factor base

@dataclass(frozen=True)
class PrimeIdealEntry:
    p: int
    b_p: int          # 0 <= b_p < 2p, b_p^2 = delta (mod 4p), b_p = delta (mod 2)
    ramified: bool
    log_p: int        # ln p in fixed point, 16 fractional bits

    def conjugate_b(self) -> int:
        return (-self.b_p) % (2 * self.p)


def make_prime_ideal(p: int, delta: Discriminant) -> PrimeIdealEntry:
    d = int(delta)
    if p == 2:
        if d % 8 == 1:
            b = 1
            ram = False
        elif d % 4 == 0 and (d // 4) % 4 in (2, 3):
            b = 0 if d % 8 == 0 else 2
            ram = True
        else:
            # inert (d = 5 mod 8) or 2 divides the conductor (d/4 = 1 mod 4)
            raise Inert(f"no invertible prime above 2 for delta={d}")
    else:
        chi = arith.kronecker_odd_prime(d, p)
        if chi == -1:
            raise Inert(f"{p} is inert for delta={d}")
        if chi == 0:
            ram = True
            b = p if d % 2 else 0
        else:
            ram = False
            r = arith.sqrt_mod_p(d, p)
            b = r if (r - d) % 2 == 0 else r + p
            b = min(b, 2 * p - b)
    assert (b * b - d) % (4 * p) == 0 and (b - d) % 2 == 0
    return PrimeIdealEntry(p, b, ram, fixed.to_fixed(math.log(p), 16))


class FactorBase:
    """Prime ideals of norm <= b1, ordered by norm, with an index map."""

    def __init__(self, delta: Discriminant, b1: int):
        self.delta = delta
        self.b1 = b1
        self.entries: list[PrimeIdealEntry] = []
        for p in arith.primes_up_to(b1):
            try:
                self.entries.append(make_prime_ideal(p, delta))
            except Inert:
                continue
        self.index = {e.p: i for i, e in enumerate(self.entries)}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int) -> PrimeIdealEntry:
        return self.entries[i]


# ---------------------------------------------------------------------------
# primitive ideals

@dataclass(frozen=True)
class PrimitiveIdeal:
    a: int
    b: int            # normalized to -a < b <= a

    def c(self, delta: int) -> int:
        return (self.b * self.b - delta) // (4 * self.a)

    @property
    def is_unit(self) -> bool:
        return self.a == 1


def make_ideal(a: int, b: int, delta: Discriminant | int) -> PrimitiveIdeal:
    d = int(delta)
    assert a > 0, "ideal norm must be positive"
    b = b % (2 * a)
    if b > a:
        b -= 2 * a
    assert (b * b - d) % (4 * a) == 0, f"4a does not divide b^2-delta ({a=}, {b=})"
    return PrimitiveIdeal(a, b)


def unit_ideal(delta: Discriminant | int) -> PrimitiveIdeal:
    return make_ideal(1, int(delta) % 2, delta)


def prime_to_ideal(e: PrimeIdealEntry, delta: Discriminant | int) -> PrimitiveIdeal:
    return make_ideal(e.p, e.b_p, delta)


def multiply(i1: PrimitiveIdeal, i2: PrimitiveIdeal, delta: Discriminant | int
             ) -> tuple[int, PrimitiveIdeal]:
    """Gauss composition.  Returns (s, i3) with i1*i2 = s * i3 and
    N(i1)*N(i2) = s^2 * N(i3)."""
    d = int(delta)
    a1, b1 = i1.a, i1.b
    a2, b2 = i2.a, i2.b
    s = (b1 + b2) // 2
    g0, u, v = _xgcd(a1, a2)
    g, k, w = _xgcd(g0, s)
    x, y = u * k, v * k
    a3 = (a1 * a2) // (g * g)
    b3 = (x * a1 * b2 + y * a2 * b1 + w * (b1 * b2 + d) // 2) // g
    return g, make_ideal(a3, b3, d)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
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


# ---------------------------------------------------------------------------
# reduction

def is_reduced(a: int, b: int, delta: int, root: int) -> bool:
    # |sqrt(delta) - 2|a|| < b < sqrt(delta), in exact arithmetic
    if b <= 0 or b > root:
        return False
    twoa = 2 * abs(a)
    return b + twoa > root and twoa - b <= root


def _rho_step(a: int, b: int, delta: int, root: int) -> tuple[int, int]:
    """One ideal reduction step (a, b) -> (|c|, b') with b' = -b mod 2|c|
    normalized into the standard window."""
    a2 = abs((b * b - delta) // (4 * a))
    b2 = (-b) % (2 * a2)
    if a2 > root:
        if b2 > a2:
            b2 -= 2 * a2
    else:
        b2 += ((root - b2) // (2 * a2)) * 2 * a2
    return a2, b2


def reduce_ideal(i: PrimitiveIdeal, delta: Discriminant | int, prec: int = 64
                 ) -> tuple[PrimitiveIdeal, int]:
    """Reduce i, returning (reduced ideal, |ln gamma|) with reduced = gamma*i.

    The relating element gamma is accumulated exactly as (x + y*sqrt(delta))/z
    so the reported distance is correct to 2**(1-prec).  The reduced ideal
    keeps its reduced-window b rather than the (-a, a] normalization.
    """
    d = int(delta)
    root = math.isqrt(d)
    a, b = i.a, i.b
    if is_reduced(a, b, d, root):
        return PrimitiveIdeal(a, b), 0
    # each step multiplies the ideal by gamma_step = (b - sqrt(d)) / (2a),
    # tracked exactly as (x + y sqrt(d)) / z
    x, y, z = 1, 0, 1
    steps = 0
    while not is_reduced(a, b, d, root):
        x, y = x * b - y * d, y * b - x
        z = z * 2 * a
        g = math.gcd(math.gcd(abs(x), abs(y)), z)
        if g > 1:
            x, y, z = x // g, y // g, z // g
        a, b = _rho_step(a, b, d, root)
        steps += 1
        assert steps < 4 * d.bit_length() + 64, "reduction did not terminate"
    assert (b * b - d) % (4 * a) == 0
    dist = fixed.ln_quadratic_abs(x, y, z, d, prec)
    return PrimitiveIdeal(a, b), abs(dist)


# ---------------------------------------------------------------------------
# factoring smooth ideals over the factor base

def exponent_sign(beta: int, e: PrimeIdealEntry) -> int:
    """+1 if the ideal with second coefficient beta is divisible by the stored
    prime ideal, -1 for its conjugate."""
    if e.ramified:
        return 1
    two_p = 2 * e.p
    if (beta - e.b_p) % two_p == 0:
        return 1
    if (beta + e.b_p) % two_p == 0:
        return -1
    raise ValueError(f"beta={beta} is not a square root of delta mod {two_p}")


def factor_ideal(i: PrimitiveIdeal, fb: FactorBase) -> dict[int, int]:
    """Signed exponent vector of i over fb columns; NotSmooth if impossible."""
    vec: dict[int, int] = {}
    n = i.a
    for idx, e in enumerate(fb.entries):
        if n == 1:
            break
        cnt = 0
        while n % e.p == 0:
            n //= e.p
            cnt += 1
        if cnt:
            vec[idx] = cnt * exponent_sign(i.b, e)
    if n != 1:
        raise NotSmooth(f"norm has a factor outside the factor base (cofactor {n})")
    return vec
