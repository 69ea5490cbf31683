"""Exact sparse integer linear algebra for the relation matrix.

Structured Gaussian elimination performs k-way merges on light columns,
choosing the pivot sequence by a minimum spanning tree under a row cost
function, and keeps a full trace: every surviving row as an integer
combination of the original rows, plus each removed (root) row with its
pivot column and coefficient so systems can be solved by descent later.

Eliminating a column whose entries have gcd c divides the order of the
cokernel by exactly c, so the trace accumulates the product of those
contents; the class number candidate is that product times the HNF
determinant of the surviving core.  Pivot multipliers are gcd-normalized
(c2/g, c1/g), which keeps every row operation inside the row lattice:
the candidate can only be an integer multiple of the true order, never a
proper divisor, and the h* window certifies exactness.
"""

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction


class RankDeficient(Exception):
    pass


class Inconsistent(Exception):
    pass


@dataclass(frozen=True)
class CostParams:
    q: int = 8
    small_weight: int = 1
    large_weight: int = 100
    large_term: str = "magnitude"       # "magnitude" or "count"
    strip_content: bool = False

    def __post_init__(self):
        assert self.q >= 1 and self.small_weight > 0 and self.large_weight > 0
        assert self.large_term in ("magnitude", "count")


DEFAULT_COST = CostParams()


def row_cost(row, params: CostParams = DEFAULT_COST) -> int:
    """Cost of a row: small entries count 1, entries above q count
    large_weight (times the magnitude in the default variant)."""
    vals = row.values() if isinstance(row, dict) else row
    total = 0
    for v in vals:
        a = v if v >= 0 else -v
        if a == 0:
            continue
        if a <= params.q:
            total += params.small_weight
        elif params.large_term == "magnitude":
            total += params.large_weight * a
        else:
            total += params.large_weight
    return total


def pivot(r1: dict, r2: dict, j: int,
          params: CostParams = DEFAULT_COST) -> tuple[dict, int]:
    """(c2/g)*r1 - (c1/g)*r2 with g = gcd(c1, c2): column j cancels exactly.

    Returns (row, content) where content is 1 unless params.strip_content
    divided a common factor out of the result.
    """
    c1, c2 = r1[j], r2[j]
    g = math.gcd(c1, c2)
    m1, m2 = c2 // g, c1 // g
    out = {}
    for col, v in r1.items():
        out[col] = m1 * v
    for col, v in r2.items():
        nv = out.get(col, 0) - m2 * v
        if nv:
            out[col] = nv
        else:
            out.pop(col, None)
    assert j not in out
    content = 1
    if params.strip_content and out:
        content = math.gcd(*out.values()) if len(out) > 1 else abs(next(iter(out.values())))
        if content > 1:
            for col in out:
                out[col] //= content
        else:
            content = 1
    return out, content


# ---------------------------------------------------------------------------
# sparse matrix with occupancy index

class SparseIntMat:
    def __init__(self, rows: list[dict], ncols: int):
        self.rows: list[dict | None] = [dict(r) for r in rows]
        self.ncols = ncols
        self.col_rows: dict[int, set[int]] = defaultdict(set)
        for i, r in enumerate(self.rows):
            for col in r:
                self.col_rows[col].add(i)

    @classmethod
    def from_rows(cls, rows, ncols):
        return cls(rows, ncols)

    def alive_rows(self) -> list[int]:
        return [i for i, r in enumerate(self.rows) if r is not None]

    def alive_cols(self) -> list[int]:
        return [c for c, s in self.col_rows.items() if s]

    def col_weight(self, col: int) -> int:
        return len(self.col_rows.get(col, ()))

    def remove_row(self, i: int) -> None:
        for col in self.rows[i]:
            self.col_rows[col].discard(i)
        self.rows[i] = None

    def set_row(self, i: int, new: dict) -> None:
        old = self.rows[i]
        for col in old:
            if col not in new:
                self.col_rows[col].discard(i)
        for col in new:
            if col not in old:
                self.col_rows[col].add(i)
        self.rows[i] = new

    def check_occupancy(self) -> None:
        index = defaultdict(set)
        for i, r in enumerate(self.rows):
            if r:
                for col, v in r.items():
                    assert v != 0
                    index[col].add(i)
        assert {c: s for c, s in self.col_rows.items() if s} == dict(index)


# ---------------------------------------------------------------------------
# elimination trace

@dataclass
class ElimStep:
    col: int
    coef: int              # pivot coefficient of the removed root row
    row: dict              # root row contents at removal time
    combo: dict            # over original row ids
    den: int               # 1 unless content stripping scaled the row


@dataclass
class EliminationTrace:
    n_orig: int
    combos: dict = field(default_factory=dict)       # row id -> (combo, den)
    steps: list = field(default_factory=list)        # ElimStep, in order
    zero_combos: list = field(default_factory=list)  # (combo, den): kernel rows
    empty_columns: list = field(default_factory=list)
    content_product: int = 1            # product of removed column contents

    @classmethod
    def identity(cls, n: int) -> "EliminationTrace":
        return cls(n, {i: ({i: 1}, 1) for i in range(n)})

    @property
    def diagonal_ones(self) -> list[int]:
        return [k for k, s in enumerate(self.steps) if abs(s.coef) == 1]

    def row_order(self):
        """(surviving row ids, removed root ids in elimination order):
        together the row permutation of the pseudo-triangular form."""
        removed = [s.combo for s in self.steps]
        return list(self.combos.keys()), removed


def _combine_combo(c1, d1, m1, c2, d2, m2, content):
    """(m1*(c1/d1) + m2*(c2/d2)) / content as (combo, den), gcd-normalized."""
    den = d1 * d2 * content
    out = {}
    for k, v in c1.items():
        out[k] = m1 * v * d2
    for k, v in c2.items():
        nv = out.get(k, 0) + m2 * v * d1
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    if not out:
        return {}, 1
    g = math.gcd(den, math.gcd(*out.values()) if len(out) > 1
                 else abs(next(iter(out.values()))))
    if g > 1:
        out = {k: v // g for k, v in out.items()}
        den //= g
    if den < 0:
        den = -den
        out = {k: -v for k, v in out.items()}
    return out, den


# ---------------------------------------------------------------------------
# k-way merges

def _mst_edges(keys: list[int], weight) -> list[tuple[int, int]]:
    """Prim's MST on the complete graph over keys; weight(i, j) callable."""
    n = len(keys)
    in_tree = [False] * n
    best = [math.inf] * n
    best_from = [0] * n
    in_tree[0] = True
    for j in range(1, n):
        best[j] = weight(keys[0], keys[j])
        best_from[j] = 0
    edges = []
    for _ in range(n - 1):
        pick, pick_w = -1, math.inf
        for j in range(n):
            if not in_tree[j] and best[j] < pick_w:
                pick, pick_w = j, best[j]
        in_tree[pick] = True
        edges.append((keys[best_from[pick]], keys[pick]))
        for j in range(n):
            if not in_tree[j]:
                w = weight(keys[pick], keys[j])
                if w < best[j]:
                    best[j] = w
                    best_from[j] = pick
    return edges


def merge_column(mat: SparseIntMat, trace: EliminationTrace, j: int,
                 params: CostParams = DEFAULT_COST) -> None:
    """Eliminate column j by a k-way merge.

    k = 1 removes the supporting row together with the column; k >= 2
    combines each row with its MST parent (leaves inward) and removes the
    root.  The removed column's entry gcd multiplies the trace's content
    product; the matrix loses exactly one row and one column.
    """
    support = sorted(mat.col_rows.get(j, ()))
    k = len(support)
    assert k >= 1, f"column {j} is empty"
    col_content = math.gcd(*(mat.rows[i][j] for i in support)) if k > 1 \
        else abs(mat.rows[support[0]][j])
    trace.content_product *= col_content
    if k == 1:
        i = support[0]
        combo, den = trace.combos.pop(i)
        trace.steps.append(ElimStep(j, mat.rows[i][j], dict(mat.rows[i]), combo, den))
        mat.remove_row(i)
        return
    cache: dict[tuple[int, int], int] = {}

    def weight(i1, i2):
        key = (i1, i2) if i1 < i2 else (i2, i1)
        w = cache.get(key)
        if w is None:
            merged, _ = pivot(mat.rows[key[0]], mat.rows[key[1]], j, params)
            w = row_cost(merged, params)
            cache[key] = w
        return w

    edges = _mst_edges(support, weight)
    children = defaultdict(list)
    parent_of = {}
    root = support[-1]
    adj = defaultdict(list)
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    order = [root]
    seen = {root}
    qi = 0
    while qi < len(order):
        u = order[qi]
        qi += 1
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                parent_of[v] = u
                order.append(v)
    # leaves inward: children merge against the still-unmodified parent
    for child in reversed(order[1:]):
        par = parent_of[child]
        merged, content = pivot(mat.rows[child], mat.rows[par], j, params)
        c_child, d_child = trace.combos[child]
        c_par, d_par = trace.combos[par]
        cc, cp = mat.rows[child][j], mat.rows[par][j]
        g = math.gcd(cc, cp)
        combo, den = _combine_combo(c_child, d_child, cp // g,
                                    c_par, d_par, -(cc // g), content)
        if not merged:
            trace.zero_combos.append((combo, den))
            trace.combos.pop(child)
            mat.remove_row(child)
        else:
            trace.combos[child] = (combo, den)
            mat.set_row(child, merged)
    combo, den = trace.combos.pop(root)
    trace.steps.append(ElimStep(j, mat.rows[root][j], dict(mat.rows[root]), combo, den))
    mat.remove_row(root)


def structured_eliminate(mat: SparseIntMat, trace: EliminationTrace, w: int,
                         params: CostParams = DEFAULT_COST,
                         unit_content_only: bool = False,
                         snapshot=None) -> None:
    """k-way merges on columns of weight k = 1..w in increasing order.

    Within one weight class the column with the smallest fill-in (sum of
    supporting row weights) goes first, ties by column id.  Runs until no
    column of weight <= w remains.

    With unit_content_only, columns whose entries share a common factor are
    left alone: eliminating such a column divides the cokernel order by
    that gcd and scrambles its divisor structure, so the class group
    pipeline keeps them for the dense core instead."""
    assert w >= 1
    while True:
        best = None
        for col, rows_ in mat.col_rows.items():
            k = len(rows_)
            if not 1 <= k <= w:
                continue
            if unit_content_only:
                g = math.gcd(*(mat.rows[i][col] for i in rows_)) if k > 1 \
                    else abs(mat.rows[next(iter(rows_))][col])
                if g != 1:
                    continue
            fill = sum(len(mat.rows[i]) for i in rows_)
            key = (k, fill, col)
            if best is None or key < best:
                best = key
        if best is None:
            break
        merge_column(mat, trace, best[2], params)
        if snapshot is not None:
            snapshot(mat, best[0])
    trace.empty_columns = sorted(c for c in range(mat.ncols)
                                 if not mat.col_rows.get(c))


# ---------------------------------------------------------------------------
# determinants, HNF, SNF on the dense core

def _det_mod(rows: list[list[int]], p: int) -> int:
    n = len(rows)
    m = [[v % p for v in row] for row in rows]
    det = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return 0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        inv = pow(m[col][col], -1, p)
        det = det * m[col][col] % p
        for r in range(col + 1, n):
            f = m[r][col] * inv % p
            if f:
                m[r] = [(a - f * b) % p for a, b in zip(m[r], m[col])]
    return det % p


_DET_PRIMES: list[int] = []


def _det_primes():
    global _DET_PRIMES
    if not _DET_PRIMES:
        from . import arith
        p = (1 << 30)
        out = []
        n = p + 1
        while len(out) < 64:
            if arith.is_prime(n):
                out.append(n)
            n += 2
        _DET_PRIMES = out
    return _DET_PRIMES


def det_exact(rows: list[list[int]]) -> int:
    """Exact determinant by CRT over word-size primes, stopping early once
    the symmetric-range reconstruction stabilizes twice (with the Hadamard
    bound as the rigorous cap)."""
    n = len(rows)
    if n == 0:
        return 1
    hadamard = 1
    for row in rows:
        hadamard *= math.isqrt(sum(v * v for v in row)) + 1
    value, modulus = 0, 1
    centered_prev = None
    stable = 0
    for p in _det_primes():
        d = _det_mod(rows, p)
        t = ((d - value) * pow(modulus % p, -1, p)) % p
        value += modulus * t
        modulus *= p
        centered = value if 2 * value <= modulus else value - modulus
        if centered == centered_prev:
            stable += 1
        else:
            stable = 0
        centered_prev = centered
        if stable >= 2 or modulus > 2 * hadamard:
            return centered
    raise RankDeficient("determinant prime pool exhausted")


def det_gcd(mat: SparseIntMat, rng) -> int:
    """gcd of the determinants of two random full-rank square row
    submatrices of the reduced matrix."""
    rows_ids = mat.alive_rows()
    cols = sorted(mat.alive_cols())
    n = len(cols)
    if n == 0:
        return 1
    if len(rows_ids) < n:
        raise RankDeficient(f"{len(rows_ids)} rows for {n} columns")
    col_pos = {c: i for i, c in enumerate(cols)}
    dets = []
    attempts = 0
    while len(dets) < 2 and attempts < 24:
        attempts += 1
        sel = sorted(rng.sample(rows_ids, n)) if len(rows_ids) > n else rows_ids
        dense = [[0] * n for _ in range(n)]
        for r, i in enumerate(sel):
            for col, v in mat.rows[i].items():
                dense[r][col_pos[col]] = v
        d = det_exact(dense)
        if d:
            dets.append(abs(d))
        if len(rows_ids) == n:
            break
    if not dets:
        raise RankDeficient("no full-rank square submatrix found")
    return math.gcd(*dets) if len(dets) > 1 else dets[0]


def hnf_mod(rows: list[list[int]], g: int) -> list[list[int]]:
    """Row-lattice HNF of full-column-rank rows, working modulo g (a
    positive multiple of the lattice determinant).

    Lower-triangular convention: positive diagonal, entries below the
    diagonal reduced into [0, diagonal)."""
    assert g >= 1
    n = len(rows[0]) if rows else 0
    work = [[v % g for v in r] for r in rows]
    work = [r for r in work if any(r)]
    basis = [None] * n
    for j in range(n - 1, -1, -1):
        # g*e_j is always in the lattice; having it present both guarantees a
        # pivot and licenses the mod-g reduction of the leftovers below
        work.append([g if t == j else 0 for t in range(n)])
        piv = None
        for r in work:
            if r[j]:
                piv = r
                break
        for r in work:
            if r is piv or not r[j]:
                continue
            while r[j]:
                if abs(r[j]) < abs(piv[j]):
                    piv, r = r, piv
                q = r[j] // piv[j]
                for t in range(j + 1):
                    r[t] -= q * piv[t]
        work.remove(piv)
        if piv[j] < 0:
            piv = [-v for v in piv]
        basis[j] = piv
        work = [[v % g for v in r] for r in work]
        work = [r for r in work if any(r)]
    _reduce_below_diagonal(basis)
    return [row[:n] for row in basis]


def _reduce_below_diagonal(basis: list[list[int]]) -> None:
    # per row, right to left: reducing column j only perturbs columns <= j
    for i in range(len(basis)):
        for j in range(i - 1, -1, -1):
            q = basis[i][j] // basis[j][j]
            if q:
                for t in range(j + 1):
                    basis[i][t] -= q * basis[j][t]


def hnf_integer(rows: list[list[int]]) -> list[list[int]]:
    """Naive fraction-free row HNF (same convention as hnf_mod), for
    cross-checking and tiny cores."""
    n = len(rows[0]) if rows else 0
    work = [list(r) for r in rows]
    basis = []
    for j in range(n - 1, -1, -1):
        piv = None
        for r in work:
            if r[j]:
                piv = r
                break
        assert piv is not None, "rows are not full column rank"
        for r in work:
            if r is piv or not r[j]:
                continue
            while r[j]:
                if abs(r[j]) < abs(piv[j]):
                    piv, r = r, piv
                q = r[j] // piv[j]
                for t in range(j + 1):
                    r[t] -= q * piv[t]
        work.remove(piv)
        if piv[j] < 0:
            piv = [-v for v in piv]
        basis.append(piv)
    basis.reverse()
    _reduce_below_diagonal(basis)
    return basis


def snf(h: list[list[int]]) -> tuple[int, ...]:
    """Elementary divisors of a nonsingular square integer matrix, in the
    chain convention m_{i+1} | m_i with trivial divisors omitted."""
    n = len(h)
    m = [list(r) for r in h]
    divisors = []
    for k in range(n):
        while True:
            # move the smallest nonzero entry of the block to (k, k)
            best = None
            for i in range(k, n):
                for j in range(k, n):
                    v = abs(m[i][j])
                    if v and (best is None or v < abs(m[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                raise ValueError("matrix is singular")
            bi, bj = best
            if bi != k:
                m[k], m[bi] = m[bi], m[k]
            if bj != k:
                for row in m:
                    row[k], row[bj] = row[bj], row[k]
            piv = m[k][k]
            progressed = False
            for i in range(k + 1, n):
                q = m[i][k] // piv
                if q:
                    for t in range(k, n):
                        m[i][t] -= q * m[k][t]
                if m[i][k]:
                    progressed = True
            for j in range(k + 1, n):
                q = m[k][j] // piv
                if q:
                    for row in m:
                        row[j] -= q * row[k]
                if m[k][j]:
                    progressed = True
            if progressed:
                continue
            # block cleared; enforce that the pivot divides the remainder
            offender = None
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    if m[i][j] % piv:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            for t in range(k, n):
                m[k][t] += m[offender][t]
        divisors.append(abs(m[k][k]))
    out = tuple(sorted((d for d in divisors if d > 1), reverse=True))
    for a, b in zip(out, out[1:]):
        assert a % b == 0
    return out


# ---------------------------------------------------------------------------
# solving against the trace (pseudo-lower-triangular descent)

def solve_left(a_rows: list[dict], cols: list[int], b: dict) -> dict:
    """Exact rational x with x * A = b, where A is given by sparse rows over
    the listed columns.  Raises Inconsistent when b is outside the row span.

    The returned dict maps row indices to Fractions.  To keep coefficients
    small the lightest rows (by cost) are preferred as pivots, standing in
    for the reduced solutions the dense solver of the reference approach
    returns.
    """
    col_pos = {c: i for i, c in enumerate(cols)}
    n = len(cols)
    order = sorted(range(len(a_rows)),
                   key=lambda i: (row_cost(a_rows[i]), i))
    if len(order) > n + 24:
        try:
            return solve_left([a_rows[i] for i in order[: n + 24]], cols, b) \
                and {order[i]: f for i, f in solve_left(
                    [a_rows[i] for i in order[: n + 24]], cols, b).items()}
        except Inconsistent:
            pass
    r = len(order)
    # dense transpose solve: A^T y = b^T with y the row coefficients
    at = [[Fraction(0)] * r for _ in range(n)]
    for k, i in enumerate(order):
        for c, v in a_rows[i].items():
            at[col_pos[c]][k] = Fraction(v)
    rhs = [Fraction(b.get(c, 0)) for c in cols]
    aug = [at[i] + [rhs[i]] for i in range(n)]
    pivots = []
    row_i = 0
    for col in range(r):
        piv = next((k for k in range(row_i, n) if aug[k][col]), None)
        if piv is None:
            continue
        aug[row_i], aug[piv] = aug[piv], aug[row_i]
        pv = aug[row_i][col]
        aug[row_i] = [v / pv for v in aug[row_i]]
        for k in range(n):
            if k != row_i and aug[k][col]:
                f = aug[k][col]
                aug[k] = [v - f * w for v, w in zip(aug[k], aug[row_i])]
        pivots.append(col)
        row_i += 1
        if row_i == n:
            break
    for k in range(row_i, n):
        if aug[k][r]:
            raise Inconsistent("target not in the row span")
    x = {}
    for k, col in enumerate(pivots):
        if aug[k][r]:
            x[order[col]] = aug[k][r]
    # verify (cheap, kept in production)
    check: dict[int, Fraction] = {}
    for i, f in x.items():
        for c, v in a_rows[i].items():
            check[c] = check.get(c, Fraction(0)) + f * v
    for c in set(check) | set(b):
        if check.get(c, Fraction(0)) != b.get(c, 0):
            raise Inconsistent("verification of solve_left failed")
    return x


def kernel_basis(a_rows: list[dict], cols: list[int],
                 max_vectors: int | None = None) -> list[dict]:
    """Left kernel vectors {x : x*A = 0} as integer row-coefficient dicts
    (denominators cleared, content removed).

    Rows are processed lightest first so the emitted combinations stay
    small; max_vectors truncates the basis (regulator work only ever needs
    a handful of independent dependencies)."""
    col_pos = {c: i for i, c in enumerate(cols)}
    order = sorted(range(len(a_rows)),
                   key=lambda i: (row_cost(a_rows[i]), i))
    r = len(order)
    n = len(cols)
    # row-reduce [A | I] over Q; rows whose A-part vanishes give kernel
    # combinations in the I-part
    aug = []
    for k, i in enumerate(order):
        dense = [Fraction(0)] * n
        for c, v in a_rows[i].items():
            dense[col_pos[c]] = Fraction(v)
        tail = [Fraction(0)] * r
        tail[k] = Fraction(1)
        aug.append(dense + tail)
    row_i = 0
    for col in range(n):
        piv = next((k for k in range(row_i, r) if aug[k][col]), None)
        if piv is None:
            continue
        aug[row_i], aug[piv] = aug[piv], aug[row_i]
        pv = aug[row_i][col]
        aug[row_i] = [v / pv for v in aug[row_i]]
        for k in range(r):
            if k != row_i and aug[k][col]:
                f = aug[k][col]
                aug[k] = [v - f * w for v, w in zip(aug[k], aug[row_i])]
        row_i += 1
        if row_i == r:
            break
    out = []
    for k in range(row_i, r):
        if any(aug[k][:n]):
            continue
        coeffs = aug[k][n:]
        den = math.lcm(*(f.denominator for f in coeffs if f)) if any(coeffs) else 1
        vec = {order[i]: int(f * den) for i, f in enumerate(coeffs) if f}
        if vec:
            g = math.gcd(*vec.values()) if len(vec) > 1 else abs(next(iter(vec.values())))
            if g > 1:
                vec = {i: v // g for i, v in vec.items()}
            out.append(vec)
            if max_vectors is not None and len(out) >= max_vectors:
                break
    return out


def descend_through_trace(trace: EliminationTrace, target: dict
                          ) -> tuple[dict, dict]:
    """Peel the eliminated columns off target using the removed root rows.

    Returns (coefficients {step index: Fraction}, remainder row supported
    only on surviving columns)."""
    cur = {c: Fraction(v) for c, v in target.items()}
    coeffs: dict[int, Fraction] = {}
    for idx, step in enumerate(trace.steps):
        u = cur.get(step.col)
        if not u:
            continue
        f = u / step.coef
        coeffs[idx] = f
        for c, v in step.row.items():
            nv = cur.get(c, Fraction(0)) - f * v
            if nv:
                cur[c] = nv
            else:
                cur.pop(c, None)
        assert step.col not in cur
    return coeffs, cur


def augment_kernel_vectors(trace: EliminationTrace, mat: SparseIntMat,
                           original_rows: list[dict],
                           extras: list[dict]) -> list[dict]:
    """For each extra relation r (not a row of the matrix), solve x*M = r
    through the pseudo-triangular structure and emit the integer kernel
    vector (x | 0..0, -1, 0..0) of the augmented matrix.

    Vector keys: original row ids, and len(original_rows)+i for extra i.
    Each returned vector is verified to annihilate the augmented rows."""
    core_ids = sorted(trace.combos.keys() & set(mat.alive_rows()))
    core_rows = [mat.rows[i] for i in core_ids]
    cols = sorted(mat.alive_cols())
    out = []
    n_orig = len(original_rows)
    for idx_extra, target in enumerate(extras):
        coeffs, remainder = descend_through_trace(trace, target)
        core_x = solve_left(core_rows, cols, remainder)
        over_orig: dict[int, Fraction] = {}

        def add_combo(combo, den, factor):
            for orig_id, num in combo.items():
                nv = over_orig.get(orig_id, Fraction(0)) + factor * Fraction(num, den)
                if nv:
                    over_orig[orig_id] = nv
                else:
                    over_orig.pop(orig_id, None)

        for step_idx, f in coeffs.items():
            step = trace.steps[step_idx]
            add_combo(step.combo, step.den, f)
        for k, f in core_x.items():
            combo, den = trace.combos[core_ids[k]]
            add_combo(combo, den, f)
        den = 1
        for f in over_orig.values():
            den = math.lcm(den, f.denominator)
        vec = {i: int(f * den) for i, f in over_orig.items()}
        vec[n_orig + idx_extra] = -den
        # exact verification over the augmented matrix
        acc: dict[int, int] = {}
        for i, coef in vec.items():
            row = original_rows[i] if i < n_orig else extras[i - n_orig]
            for c, v in row.items():
                nv = acc.get(c, 0) + coef * v
                if nv:
                    acc[c] = nv
                else:
                    acc.pop(c, None)
        if acc:
            raise Inconsistent("augmented kernel vector check failed")
        out.append(vec)
    return out


def kernel_vectors_of_reduced(trace: EliminationTrace, mat: SparseIntMat,
                              n_orig: int) -> list[dict]:
    """Integer kernel vectors of the original matrix obtained from the left
    kernel of the reduced core plus rows that cancelled to zero."""
    core_ids = sorted(trace.combos.keys() & set(mat.alive_rows()))
    core_rows = [mat.rows[i] for i in core_ids]
    cols = sorted(mat.alive_cols())
    vecs = []
    for combo, den in trace.zero_combos:
        vecs.append(dict(combo))
    for base in kernel_basis(core_rows, cols):
        over: dict[int, Fraction] = {}
        for k, coef in base.items():
            combo, den = trace.combos[core_ids[k]]
            for orig_id, num in combo.items():
                nv = over.get(orig_id, Fraction(0)) + coef * Fraction(num, den)
                if nv:
                    over[orig_id] = nv
                else:
                    over.pop(orig_id, None)
        if not over:
            continue
        den = 1
        for f in over.values():
            den = math.lcm(den, f.denominator)
        vec = {i: int(f * den) for i, f in over.items()}
        g = math.gcd(*vec.values()) if len(vec) > 1 else abs(next(iter(vec.values())))
        if g > 1:
            vec = {i: v // g for i, v in vec.items()}
        vecs.append(vec)
    return vecs
