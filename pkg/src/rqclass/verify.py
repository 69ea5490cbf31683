"""GRH factor-base verification.

Every non-inert prime q with B1 < q <= bach_bound(delta), and every
factor-base prime whose column ended empty, must be expressible over the
generators actually used.  Most targets come for free: any stored relation
(partial ones included) with exactly one unverified prime verifies it.
The stragglers are sieved directly with the a-ideal set to the target
prime, optionally times a few factor-base primes for fresh polynomials.
"""

import math
from dataclasses import dataclass, field as dfield

from . import analytic, arith, relations, sieve, smooth
from .field import FactorBase, Inert, make_prime_ideal


@dataclass
class VerifyReport:
    verified: bool
    per_prime: list          # (q, "free" | "sieved" | "unverified")
    free: int = 0
    sieved: int = 0
    unverified: list = dfield(default_factory=list)
    extra_relations: int = 0

    def as_dict(self) -> dict:
        return {
            "verified": self.verified,
            "targets": len(self.per_prime),
            "free": self.free,
            "sieved": self.sieved,
            "unverified": list(self.unverified),
            "extra_relations": self.extra_relations,
            "per_prime": [[q, s] for q, s in self.per_prime],
        }


def verification_targets(delta: int, fb: FactorBase,
                         empty_fb_columns: list[int]) -> list[int]:
    """Empty-column factor-base primes plus non-inert primes in
    (B1, bach_bound]."""
    targets = [fb.entries[c].p for c in empty_fb_columns]
    bound = analytic.bach_bound(delta)
    for q in arith.primes_up_to(bound):
        if q <= fb.b1:
            continue
        try:
            make_prime_ideal(q, delta)
        except Inert:
            continue
        targets.append(q)
    return sorted(set(targets))


def _closure(store: relations.RelationStore, fb: FactorBase,
             verified: set[int], targets: set[int]) -> None:
    """Mark every target expressible through stored relations whose other
    primes are already verified; iterate to a fixed point."""
    rels = [
        ([fb.entries[i].p for i, _ in r.fb_vec] + [q for q, _ in r.lp_vec])
        for r in store.relations
    ]
    changed = True
    while changed:
        changed = False
        for primes in rels:
            unknown = [p for p in primes if p not in verified]
            if len(unknown) == 1 and unknown[0] in targets:
                verified.add(unknown[0])
                changed = True


def _verify_polys(q: int, entry, delta: int, fb: FactorBase,
                  cfg: sieve.SieveConfig, budget: int):
    """Sieving polynomials with the a-ideal q, then q times factor-base
    primes, up to the polynomial budget."""
    stream = sieve.PolynomialStream(delta, fb, cfg)
    emitted = 0

    def build(selection: tuple[int, ...]):
        entries = [fb.entries[i] for i in selection]
        a = q * math.prod(e.p for e in entries)
        # CRT moduli: 4 for the prime 2 (b = b_2 mod 4 forces b^2 = delta
        # mod 8), p for odd primes; parity fixes the mod-4 part otherwise
        parts = [(q, entry.b_p)] + [(e.p, e.b_p) for e in entries]
        mods = [(4 if p == 2 else p, bp % (4 if p == 2 else p))
                for p, bp in parts]
        big_m = math.prod(m for m, _ in mods)
        pieces = []
        for m, r in mods:
            rest = big_m // m
            pieces.append(rest * ((pow(rest % m, -1, m) * r) % m))
        has_two = any(p == 2 for p, _ in parts)
        for mask in range(1 << len(entries)):
            bb = pieces[0]
            for i in range(len(entries)):
                bb += -pieces[i + 1] if mask >> i & 1 else pieces[i + 1]
            if not has_two and (bb - delta) % 2:
                bb += a        # a is odd: flips parity, keeps CRT residues
            assert (bb * bb - delta) % (4 * a) == 0
            yield stream._fresh_poly(a, bb, mask, tuple(selection))

    for poly in build(()):
        yield poly
        emitted += 1
        if emitted >= budget:
            return
    for i in stream.pool:
        for poly in build((i,)):
            yield poly
            emitted += 1
            if emitted >= budget:
                return
        for j in stream.pool:
            if j <= i:
                continue
            for poly in build((i, j)):
                yield poly
                emitted += 1
                if emitted >= budget:
                    return


def verify_factor_base(delta: int, fb: FactorBase,
                       store: relations.RelationStore,
                       empty_fb_columns: list[int],
                       cfg: sieve.SieveConfig, prec: int,
                       budget_scale: int = 50) -> VerifyReport:
    targets = verification_targets(delta, fb, empty_fb_columns)
    if not targets:
        return VerifyReport(True, [])
    target_set = set(targets)
    verified = {fb.entries[i].p for i in range(len(fb))
                if i not in set(empty_fb_columns)}
    _closure(store, fb, verified, target_set)
    per_prime = {}
    stragglers = []
    for q in targets:
        if q in verified:
            per_prime[q] = "free"
        else:
            stragglers.append(q)
    extra = 0
    for q in stragglers:
        entry = make_prime_ideal(q, delta)
        budget = budget_scale * max(1, q // fb.b1 + 1)
        found = False
        for poly in _verify_polys(q, entry, delta, fb, cfg, budget):
            for x in sieve.sieve_interval(poly, cfg, fb):
                v = abs(poly.value(x))
                exps, m = smooth.trial_divide(v, fb)
                if m != 1:
                    continue
                rel = relations.relation_from_hit(
                    poly, x, exps, (), delta, fb, prec,
                    lp_entries=store.lp_entries, a_lp=((q, entry),),
                    tag="verify")
                if store.add(rel):
                    extra += 1
                found = True
                break
            if found:
                break
        if found:
            verified.add(q)
            per_prime[q] = "sieved"
        else:
            per_prime[q] = "unverified"
    _closure(store, fb, verified, target_set)
    for q in stragglers:
        if per_prime[q] == "unverified" and q in verified:
            per_prime[q] = "free"
    listing = [(q, per_prime[q]) for q in targets]
    unverified = [q for q, s in listing if s == "unverified"]
    report = VerifyReport(not unverified, listing,
                          free=sum(1 for _, s in listing if s == "free"),
                          sieved=sum(1 for _, s in listing if s == "sieved"),
                          unverified=unverified, extra_relations=extra)
    return report
