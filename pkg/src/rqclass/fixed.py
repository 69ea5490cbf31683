"""Fixed-point real arithmetic backed by MPFR.

Logs and regulator multiples are carried around as plain integers scaled
by 2**frac_bits.  All transcendental evaluations go through gmpy2 with a
32-bit guard so the returned integer is within one unit in the last
place of the true value.
"""

import gmpy2

GUARD_BITS = 32


def _ctx(frac_bits: int, magnitude_bits: int = 96):
    return gmpy2.local_context(precision=frac_bits + magnitude_bits + GUARD_BITS)


def to_fixed(x, frac_bits: int) -> int:
    """Round an mpfr (or int/float) to an integer scaled by 2**frac_bits."""
    with _ctx(frac_bits):
        return int(gmpy2.rint_round(gmpy2.mul_2exp(gmpy2.mpfr(x), frac_bits)))


def from_fixed(v: int, frac_bits: int) -> float:
    return v / (1 << frac_bits)


def ln_fixed(n: int, frac_bits: int) -> int:
    """ln(n) for a positive integer n, as fixed point."""
    assert n > 0
    with _ctx(frac_bits, magnitude_bits=n.bit_length() + 8):
        return int(gmpy2.rint_round(gmpy2.mul_2exp(gmpy2.log(gmpy2.mpz(n)), frac_bits)))


_sqrt_cache: dict[tuple[int, int], gmpy2.mpfr] = {}


def sqrt_delta(delta: int, frac_bits: int):
    """sqrt(delta) as an mpfr with enough precision for frac_bits logs."""
    key = (delta, frac_bits)
    r = _sqrt_cache.get(key)
    if r is None:
        with _ctx(frac_bits, magnitude_bits=delta.bit_length() + 8):
            r = gmpy2.sqrt(gmpy2.mpz(delta))
        if len(_sqrt_cache) > 64:
            _sqrt_cache.clear()
        _sqrt_cache[key] = r
    return r


def ln_quadratic_abs(x: int, y: int, den: int, delta: int, frac_bits: int) -> int:
    """ln |(x + y*sqrt(delta)) / den| as fixed point.

    The argument must be nonzero; den > 0.  When x and y*sqrt(delta) nearly
    cancel, the value is rewritten as |x^2 - y^2*delta| / |x - y*sqrt(delta)|
    so no precision is lost to the subtraction.
    """
    assert den > 0
    bits = max(abs(x).bit_length(), abs(y).bit_length() + delta.bit_length() // 2,
               den.bit_length()) + 16
    with _ctx(frac_bits, magnitude_bits=2 * bits):
        s = gmpy2.sqrt(gmpy2.mpz(delta))
        if x == 0 or y == 0 or (x > 0) == (y > 0):
            val = abs(gmpy2.mpfr(x) + gmpy2.mpfr(y) * s) / den
        else:
            norm = x * x - y * y * delta
            assert norm != 0, "argument is zero"
            val = abs(gmpy2.mpfr(norm)) / (abs(gmpy2.mpfr(x) - gmpy2.mpfr(y) * s) * den)
        return int(gmpy2.rint_round(gmpy2.mul_2exp(gmpy2.log(val), frac_bits)))
