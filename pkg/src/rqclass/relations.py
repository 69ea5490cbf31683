"""Relations: principal ideals factored over the factor base plus large
primes, with generator data and a fixed-point log of the generator.

A sieve hit (poly, x) yields alpha = a*x + (b + sqrt(delta))/2, so with
beta = 2ax + b we have alpha = (beta + sqrt(delta))/2 and
(alpha) = a-ideal * cofactor-ideal, the cofactor having norm |phi(x,1)|
and second coefficient beta.  Exponent signs follow the b = +-b_p rule,
one column per prime ideal, conjugates as negative exponents.
"""

from dataclasses import dataclass

from . import fixed
from .field import FactorBase, PrimeIdealEntry, make_prime_ideal, exponent_sign
from .sieve import SievePolynomial


STRATEGIES = ("base", "0lp", "1lp", "2lp", "2lp-batch")


class InconsistentNorm(Exception):
    """Exponent vector does not reproduce the norm: a sign-rule bug."""


@dataclass(frozen=True)
class Relation:
    fb_vec: tuple[tuple[int, int], ...]     # (factor-base index, exponent)
    lp_vec: tuple[tuple[int, int], ...]     # (large prime, exponent)
    gen_a: int
    gen_b: int
    gen_d: int
    gen_x: int
    log_alpha: int                          # ln|alpha| >= 0, fixed point
    tag: str = ""

    @property
    def beta(self) -> int:
        return 2 * self.gen_a * self.gen_x + self.gen_b

    @property
    def is_full(self) -> bool:
        return not self.lp_vec

    @property
    def is_zero(self) -> bool:
        return not self.fb_vec and not self.lp_vec

    def lp_count(self) -> int:
        return len(self.lp_vec)


def relation_from_hit(poly: SievePolynomial, x: int, fb_exps: dict[int, int],
                      large_primes: tuple[tuple[int, int], ...], delta: int,
                      fb: FactorBase, prec: int,
                      lp_entries: dict[int, PrimeIdealEntry] | None = None,
                      a_lp: tuple[tuple[int, PrimeIdealEntry], ...] = (),
                      tag: str = "") -> Relation:
    """Build the signed relation for a sieve hit.

    fb_exps holds the exponents of |phi(x,1)| over factor-base primes,
    large_primes the classified cofactor primes with exponents.  a_lp
    lists primes outside the factor base that divide the a-ideal (used by
    the verification sieve, where a = q * factor-base primes).
    """
    beta = poly.beta(x)
    value = poly.value(x)
    # norm bookkeeping: a * |phi| must equal the unsigned reconstruction
    recon = 1
    for i in poly.a_factor_idx:
        recon *= fb.entries[i].p
    for q, _ in a_lp:
        recon *= q
    for i, e in fb_exps.items():
        recon *= fb.entries[i].p ** e
    for q, e in large_primes:
        recon *= q**e
    if recon != poly.a * abs(value):
        raise InconsistentNorm(
            f"norm mismatch at x={x}: {recon} != {poly.a}*|{value}|")
    vec: dict[int, int] = {}
    m_conj = 1          # product of conjugate prime-ideal norms in (alpha)
    m_plus = 1          # product of split direct prime-ideal norms

    def note(p: int, ramified: bool, sign: int, e: int) -> None:
        nonlocal m_conj, m_plus
        if not ramified:
            if sign < 0:
                m_conj *= p**e
            else:
                m_plus *= p**e

    for i in poly.a_factor_idx:
        entry = fb.entries[i]
        try:
            s = exponent_sign(poly.b, entry)
        except ValueError as exc:
            raise InconsistentNorm(str(exc)) from None
        vec[i] = vec.get(i, 0) + s
        note(entry.p, entry.ramified, s, 1)
    for i, e in fb_exps.items():
        entry = fb.entries[i]
        try:
            s = exponent_sign(beta, entry)
        except ValueError as exc:
            raise InconsistentNorm(str(exc)) from None
        vec[i] = vec.get(i, 0) + e * s
        note(entry.p, entry.ramified, s, e)
    lp_signed: dict[int, int] = {}
    for q, entry in a_lp:
        try:
            s = exponent_sign(poly.b, entry)
        except ValueError as exc:
            raise InconsistentNorm(str(exc)) from None
        lp_signed[q] = lp_signed.get(q, 0) + s
        note(q, entry.ramified, s, 1)
    for q, e in large_primes:
        entry = lp_entries.get(q) if lp_entries is not None else None
        if entry is None:
            entry = make_prime_ideal(q, delta)
            if lp_entries is not None:
                lp_entries[q] = entry
        try:
            s = exponent_sign(beta, entry)
        except ValueError as exc:
            raise InconsistentNorm(str(exc)) from None
        lp_signed[q] = lp_signed.get(q, 0) + e * s
        note(q, entry.ramified, s, e)
    # (alpha) = prod p^u * pbar^v * (ramified): the generator matching the
    # signed vector is alpha / prod p^v, its conjugate matches the flipped
    # vector with alpha-bar / prod p^u; their absolute values multiply to
    # the ramified part >= 1, so one of the two logs is always >= 0.
    log_alpha = fixed.ln_quadratic_abs(beta, 1, 2, delta, prec)
    if m_conj > 1:
        log_alpha -= fixed.ln_fixed(m_conj, prec)
    if log_alpha < 0:
        log_alpha = fixed.ln_quadratic_abs(beta, -1, 2, delta, prec)
        if m_plus > 1:
            log_alpha -= fixed.ln_fixed(m_plus, prec)
        for i in list(vec):
            if not fb.entries[i].ramified:
                vec[i] = -vec[i]
        for q in list(lp_signed):
            if delta % q:
                lp_signed[q] = -lp_signed[q]
    assert log_alpha >= 0, "both conjugate logs negative: sign-rule bug"
    fb_vec = tuple(sorted((i, e) for i, e in vec.items() if e))
    lp_vec = tuple(sorted((q, e) for q, e in lp_signed.items() if e))
    return Relation(fb_vec, lp_vec, poly.a, poly.b, 1, x, log_alpha, tag)


class RelationStore:
    """Accumulates relations; deduplicates by generator; tracks large-prime
    columns in first-seen order (ids starting at len(fb))."""

    def __init__(self, delta: int, fb: FactorBase, b2: int, strategy: str,
                 prec: int):
        assert strategy in STRATEGIES
        self.delta = delta
        self.fb = fb
        self.b2 = b2
        self.strategy = strategy
        self.prec = prec
        self.relations: list[Relation] = []
        self.lp_index: dict[int, int] = {}      # prime -> column id
        self.lp_primes: list[int] = []
        self._seen: set[int] = set()
        self.lp_entries: dict[int, PrimeIdealEntry] = {}
        self.dropped_duplicates = 0

    def __len__(self) -> int:
        return len(self.relations)

    def add(self, rel: Relation) -> bool:
        key = rel.beta
        if key in self._seen:
            self.dropped_duplicates += 1
            return False
        self._seen.add(key)
        self.relations.append(rel)
        for q, _ in rel.lp_vec:
            if q not in self.lp_index:
                self.lp_index[q] = len(self.fb) + len(self.lp_primes)
                self.lp_primes.append(q)
        return True

    # -- matrix-facing views ------------------------------------------------

    def max_lp(self) -> int:
        if self.strategy in ("base", "0lp"):
            return 0
        return 1 if self.strategy == "1lp" else 2

    def usable(self, rel: Relation) -> bool:
        return rel.lp_count() <= self.max_lp()

    def matrix_rows(self) -> list[int]:
        """Indices of stored relations that enter the relation matrix:
        usable for the strategy and not the zero vector."""
        return [i for i, r in enumerate(self.relations)
                if self.usable(r) and not r.is_zero]

    def row_columns(self, rel: Relation) -> list[tuple[int, int]]:
        cols = [(i, e) for i, e in rel.fb_vec]
        cols += [(self.lp_index[q], e) for q, e in rel.lp_vec]
        return cols

    def unit_logs(self) -> list[int]:
        """Logs of stored zero-vector relations: direct regulator multiples."""
        return [r.log_alpha for r in self.relations
                if r.is_zero and self.usable(r)]

    def ready(self) -> bool:
        rows = self.matrix_rows()
        if self.strategy in ("base", "0lp"):
            return len(rows) >= len(self.fb) + 100
        cols = set()
        for i in rows:
            r = self.relations[i]
            cols.update(c for c, _ in r.fb_vec)
            cols.update(self.lp_index[q] for q, _ in r.lp_vec)
        return len(rows) > len(cols)

    # -- persistence ---------------------------------------------------------

    def dump(self, path: str) -> None:
        """Append-friendly text dump; columns written as prime norms."""
        with open(path, "w") as fh:
            fh.write(f"# rqclass-relations v1 delta={self.delta} "
                     f"b1={self.fb.b1} b2={self.b2} strategy={self.strategy} "
                     f"prec={self.prec}\n")
            for r in self.relations:
                cols = [f"{self.fb.entries[i].p}:{e}" for i, e in r.fb_vec]
                cols += [f"{q}:{e}" for q, e in r.lp_vec]
                line = (f"{r.gen_a} {r.gen_b} {r.gen_d} {r.gen_x} | "
                        f"{','.join(cols)} | {hex(r.log_alpha)}")
                if r.tag:
                    line += f" | {r.tag}"
                fh.write(line + "\n")

    @classmethod
    def load(cls, path: str, fb: FactorBase) -> "RelationStore":
        with open(path) as fh:
            header = fh.readline().strip()
            assert header.startswith("# rqclass-relations v1 "), "bad header"
            kv = dict(part.split("=") for part in header.split()[2:])
            store = cls(int(kv["delta"]), fb, int(kv["b2"]), kv["strategy"],
                        int(kv["prec"]))
            assert fb.b1 == int(kv["b1"]), "factor base mismatch"
            for line in fh:
                parts = [s.strip() for s in line.strip().split("|")]
                a, b, d, x = map(int, parts[0].split())
                fb_vec, lp_vec = [], []
                if parts[1]:
                    for item in parts[1].split(","):
                        p_s, e_s = item.split(":")
                        p, e = int(p_s), int(e_s)
                        idx = fb.index.get(p)
                        if idx is not None:
                            fb_vec.append((idx, e))
                        else:
                            lp_vec.append((p, e))
                tag = parts[3] if len(parts) > 3 else ""
                store.add(Relation(tuple(fb_vec), tuple(lp_vec), a, b, d, x,
                                   int(parts[2], 16), tag))
        return store
