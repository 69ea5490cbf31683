"""Regulator assembly: kernel vectors -> regulator multiples -> real gcd,
and the (h*, 2h*) window certificate.

All reals are fixed-point integers with `prec` fractional bits.  Error
bounds are carried in units of one ulp (2**-prec) and propagated through
every subtraction, so a PrecisionExhausted signal is raised before a
zero test could ever be ambiguous.
"""

import math
from dataclasses import dataclass

from . import analytic, fixed


class PrecisionExhausted(Exception):
    """Propagated error bounds reached the zero threshold; the caller
    should recompute the logs at doubled precision."""


@dataclass(frozen=True)
class RegulatorEstimate:
    value: int                  # fixed point, prec fractional bits
    error_ulps: int             # |true - value| <= error_ulps * 2**-prec
    prec: int
    multiples_used: int

    def to_float(self) -> float:
        return self.value / (1 << self.prec)

    def error_bound(self) -> float:
        return self.error_ulps / (1 << self.prec)


def multiple_from_vector(vec: dict[int, int], logs: list[int],
                         prec: int) -> tuple[int, int]:
    """Sum k_i * log_alpha_i for an integer kernel vector.

    Returns (|value|, error_ulps) with error <= sum |k_i| * 2**(1-prec).
    """
    total = 0
    err = 0
    for i, k in vec.items():
        total += k * logs[i]
        err += 2 * abs(k)
    if total < 0:
        total = -total
    assert total >= -err, "regulator multiple is significantly negative"
    return total, err


def zero_threshold(delta: int, prec: int) -> int:
    """theta = min(0.2, ln(sqrt(delta) - 1) / 4): safely below any regulator."""
    root = math.isqrt(delta)
    theta = min(0.2, math.log(max(root - 1, 2)) / 4)
    return fixed.to_fixed(theta, prec)


def real_gcd(multiples: list[tuple[int, int]], delta: int, prec: int,
             theta: int | None = None) -> RegulatorEstimate | None:
    """Euclidean reduction of regulator multiples with interval tracking.

    Residues below theta count as zero.  Returns None when no multiple
    survives (nothing is known yet); raises PrecisionExhausted when the
    propagated error reaches theta.
    """
    if theta is None:
        theta = zero_threshold(delta, prec)
    vals = [(v, e) for v, e in multiples if v > theta]
    used = len(multiples)
    if not vals:
        return None
    while True:
        m, em = min(vals)
        if em >= theta:
            raise PrecisionExhausted(f"error {em} ulps reached the threshold")
        nxt = [(m, em)]
        changed = False
        for v, e in vals:
            if (v, e) == (m, em):
                continue
            q = (2 * v + m) // (2 * m)          # round(v / m)
            r = v - q * m
            if r < 0:
                r = -r
            e_new = e + q * em
            if r <= theta:
                if e_new >= theta:
                    raise PrecisionExhausted("ambiguous zero residue")
                continue
            changed = True
            nxt.append((r, e_new))
        # collapse duplicates of the minimum
        if not changed and all(abs(v - m) <= theta for v, _ in nxt):
            return RegulatorEstimate(m, em, prec, used)
        if not changed:
            # distinct survivors that do not reduce further: keep smallest
            return RegulatorEstimate(m, em, prec, used)
        vals = nxt


@dataclass(frozen=True)
class CertifyOutcome:
    status: str                 # 'done' | 'more' | 'below'
    h: int
    regulator: RegulatorEstimate | None
    product: float
    window: tuple[float, float]


def certify_and_finish(h_candidate: int, reg: RegulatorEstimate | None,
                       h_star: analytic.HStar) -> CertifyOutcome:
    """Done exactly when h_cand * R_cand certainly lies below 2 h* (and
    above h*, else the lattice cannot be the full relation lattice).

    Error bounds are folded in conservatively: a window boundary inside
    the uncertainty interval reports NeedMoreRelations.
    """
    hs_float = h_star.to_float()
    window = (hs_float, 2 * hs_float)
    if reg is None:
        return CertifyOutcome("more", h_candidate, None, math.inf, window)
    prec = reg.prec
    shift = analytic.FRAC_BITS - prec
    hstar_p = h_star.value >> shift if shift >= 0 else h_star.value << -shift
    lo = h_candidate * (reg.value - reg.error_ulps)
    hi = h_candidate * (reg.value + reg.error_ulps)
    product = h_candidate * reg.to_float()
    if hi < 2 * hstar_p and lo > hstar_p and reg.error_ulps < (1 << max(prec - 20, 0)):
        return CertifyOutcome("done", h_candidate, reg, product, window)
    if hi <= hstar_p:
        # an honest sublattice determinant can never fall below h*
        return CertifyOutcome("below", h_candidate, reg, product, window)
    return CertifyOutcome("more", h_candidate, reg, product, window)
