"""Driver and command line: configuration defaults, the full pipeline
(factor base -> relations -> elimination -> HNF/SNF -> regulator ->
certificate -> verification), benchmarking, and JSON reports.
"""

import argparse
import json
import math
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict, replace

from . import analytic, arith, fixed, linalg, oracle, regulator, relations, \
    sieve, smooth, verify
from . import field as fieldmod


TOLERANCE_DEFAULTS = {"base": 2.0, "0lp": 2.0, "1lp": 2.3, "2lp": 2.8,
                      "2lp-batch": 3.0}


class PipelineError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    delta: int
    strategy: str = "2lp-batch"
    b1: int | None = None
    b2_ratio: int = 12
    tolerance: float | None = None
    merge_bound: int = 150              # w
    batch_size: int = 100
    extra_relations: int = 7            # d
    seed: int = 0
    threads: int = 1
    precision: int = 96
    sieve_radius: int | None = None     # M; derived from delta when unset
    euler_bound: int | None = None      # Q for h*
    check_window: bool = False          # cross-check h* window vs the oracle

    def __post_init__(self):
        assert self.strategy in relations.STRATEGIES
        assert self.b2_ratio >= 2
        assert self.tolerance is None or self.tolerance > 0
        assert self.merge_bound >= 1 and self.batch_size >= 1
        assert self.extra_relations >= 1 and self.precision >= 16


def auto_fb_size(delta: int) -> int:
    """Factor-base size when b1 is not given: sqrt(L(delta)) at desk scale,
    capped and spliced into an exponential fit of the large-scale optima."""
    ln_d = math.log(delta)
    s = math.sqrt(ln_d * math.log(ln_d))
    desk = min(math.ceil(math.exp(s / 2)), 251)
    fit = math.ceil(2.14 * math.exp(0.2332 * s))
    return max(20, desk, fit if fit > 251 else 0)


def b1_for_size(delta: int, size: int) -> int:
    count = 0
    bound = 64
    while True:
        for p in arith.primes_up_to(bound):
            if analytic.chi(delta, p) != -1:
                count += 1
                if count >= size:
                    return max(p, 17)
        count = 0
        bound *= 2


def sieve_radius(delta: int) -> int:
    return max(48, min(4096, round(delta ** 0.25)))


@dataclass
class Resolved:
    b1: int
    b2: int
    m: int
    tolerance: float
    fb: fieldmod.FactorBase


def _resolve(cfg: RunConfig, b1_override: int | None = None) -> Resolved:
    delta = cfg.delta
    b1 = b1_override or cfg.b1 or b1_for_size(delta, auto_fb_size(delta))
    fb = fieldmod.FactorBase(delta, b1)
    while len(fb) < 4:
        b1 *= 2
        fb = fieldmod.FactorBase(delta, b1)
    tol = cfg.tolerance if cfg.tolerance is not None \
        else TOLERANCE_DEFAULTS[cfg.strategy]
    return Resolved(b1, cfg.b2_ratio * b1, cfg.sieve_radius or sieve_radius(delta),
                    tol, fb)


# ---------------------------------------------------------------------------
# relation collection

class Collector:
    """Drives the polynomial stream, certifies candidates, fills the store."""

    def __init__(self, cfg: RunConfig, res: Resolved,
                 store: relations.RelationStore):
        self.cfg = cfg
        self.res = res
        self.store = store
        self.delta = cfg.delta
        self.scfg = sieve.SieveConfig(res.m, res.tolerance, res.b1, res.b2)
        self.stream = sieve.PolynomialStream(self.delta, res.fb, self.scfg)
        self._families = None
        self.fb_product = smooth.prime_product(res.fb) \
            if cfg.strategy == "2lp-batch" else None
        self.conductor_two = self.delta % 4 == 0 and (self.delta // 4) % 4 == 1 \
            and 2 not in res.fb.index
        self.stats = {"polynomials": 0, "candidates": 0, "full": 0,
                      "one_lp": 0, "two_lp": 0, "units": 0, "discarded": {},
                      "batches": 0}
        self.pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None

    def _next_polys(self, n: int) -> list[sieve.SievePolynomial]:
        out = []
        while len(out) < n:
            if self._families is None:
                self._families = self.stream.family(self.stream.next_a())
            poly = next(self._families, None)
            if poly is None:
                self._families = None
                continue
            out.append(poly)
        return out

    def _discard(self, reason: str) -> None:
        d = self.stats["discarded"]
        d[reason] = d.get(reason, 0) + 1

    def _certify(self, poly, x: int, value: int, m: int,
                 exps: dict[int, int] | None) -> None:
        """Classify cofactor m of |phi(x,1)| and store the relation."""
        if m > 1 and self.conductor_two and m % 2 == 0:
            self._discard("NonInvertible")
            return
        cls = smooth.classify(m, self.res.b1, self.res.b2)
        if not cls.usable:
            self._discard(cls.reason.value)
            return
        if cls.kind == "one_lp":
            lps = ((cls.primes[0], 1),)
        elif cls.kind == "two_lp":
            p, q = cls.primes
            lps = ((p, 2),) if p == q else ((p, 1), (q, 1))
        else:
            lps = ()
        if exps is None:
            exps, m2 = smooth.trial_divide(value, self.res.fb)
            assert m2 == m
        rel = relations.relation_from_hit(poly, x, exps, lps, self.delta,
                                          self.res.fb, self.cfg.precision,
                                          lp_entries=self.store.lp_entries)
        if self.store.add(rel):
            key = {0: "full", 1: "one_lp", 2: "two_lp"}[len(lps)]
            self.stats[key] += 1
            if rel.is_zero:
                self.stats["units"] += 1

    def _process_poly(self, poly, cands) -> None:
        self.stats["polynomials"] += 1
        self.stats["candidates"] += len(cands)
        if self.fb_product is None:
            for x in cands:
                v = abs(poly.value(x))
                exps, m = smooth.trial_divide(v, self.res.fb)
                self._certify(poly, x, v, m, exps)
            return
        # batched cofactor extraction, chunks of batch_size
        for lo in range(0, len(cands), self.cfg.batch_size):
            chunk = cands[lo: lo + self.cfg.batch_size]
            values = [abs(poly.value(x)) for x in chunk]
            self.stats["batches"] += 1
            for x, v, m in zip(chunk, values,
                               smooth.batch_cofactors(values, self.fb_product)):
                self._certify(poly, x, v, m, None)

    def collect_until(self, predicate, max_polys: int = 1 << 20) -> None:
        while not predicate():
            if self.stats["polynomials"] >= max_polys:
                raise PipelineError("polynomial budget exhausted")
            group = self._next_polys(max(self.cfg.threads, 1))
            if self.pool is not None:
                scans = list(self.pool.map(
                    lambda q: sieve.sieve_interval(q, self.scfg, self.res.fb),
                    group))
            else:
                scans = [sieve.sieve_interval(q, self.scfg, self.res.fb)
                         for q in group]
            for poly, cands in zip(group, scans):
                self._process_poly(poly, cands)

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


# ---------------------------------------------------------------------------
# one linear-algebra + regulator round

def _matrix_stats(rows: list[dict]) -> dict:
    if not rows:
        return {"rows": 0, "cols": 0, "avg_weight": 0.0, "max_coeff": 0,
                "min_coeff": 0}
    cols = set()
    weight = 0
    mx, mn = 0, 0
    for r in rows:
        cols.update(r)
        weight += len(r)
        for v in r.values():
            mx = max(mx, v)
            mn = min(mn, v)
    return {"rows": len(rows), "cols": len(cols),
            "avg_weight": round(weight / len(rows), 2),
            "max_coeff": mx, "min_coeff": mn}


@dataclass
class RoundResult:
    status: str                  # 'done' | 'more' | 'below' | 'rank'
    h: int = 1
    divisors: tuple = ()
    reg: regulator.RegulatorEstimate | None = None
    trace: linalg.EliminationTrace | None = None
    mat: linalg.SparseIntMat | None = None
    stats: dict | None = None


def _linear_round(cfg: RunConfig, res: Resolved, store: relations.RelationStore,
                  h_star: analytic.HStar, rng: random.Random,
                  collector: Collector) -> RoundResult:
    row_ids = store.matrix_rows()
    rows = [dict(store.row_columns(store.relations[i])) for i in row_ids]
    logs = [store.relations[i].log_alpha for i in row_ids]
    ncols = len(res.fb) + len(store.lp_primes)
    mat = linalg.SparseIntMat(rows, ncols)
    trace = linalg.EliminationTrace.identity(len(rows))
    before = _matrix_stats(rows)
    linalg.structured_eliminate(mat, trace, cfg.merge_bound,
                                unit_content_only=True)
    assert trace.content_product == 1
    core_rows = [mat.rows[i] for i in mat.alive_rows()]
    after = _matrix_stats(core_rows)
    cols = sorted(mat.alive_cols())
    stats = {"before": before, "after": after,
             "eliminated": len(trace.steps)}
    try:
        if cols:
            g = linalg.det_gcd(mat, rng)
            col_pos = {c: i for i, c in enumerate(cols)}
            dense = []
            for r in core_rows:
                row = [0] * len(cols)
                for c, v in r.items():
                    row[col_pos[c]] = v
                dense.append(row)
            h_basis = linalg.hnf_mod(dense, g)
            h_cand = math.prod(h_basis[i][i] for i in range(len(cols)))
            divisors = linalg.snf(h_basis)
        else:
            h_cand, divisors = 1, ()
    except linalg.RankDeficient:
        return RoundResult("rank", stats=stats)

    prec = cfg.precision
    multiples = [(lg, 2) for lg in store.unit_logs()]
    extra_rows: list[dict] = []
    extra_logs: list[int] = []

    def vec_multiples(vectors):
        out = []
        for vec in vectors:
            v, e = regulator.multiple_from_vector(vec, logs + extra_logs, prec)
            out.append((v, e))
        return out

    if cfg.strategy == "base":
        kvecs = linalg.kernel_vectors_of_reduced(trace, mat, len(rows))
        multiples += vec_multiples(kvecs)
        reg = regulator.real_gcd(multiples, cfg.delta, prec)
        outcome = regulator.certify_and_finish(h_cand, reg, h_star)
        return RoundResult(outcome.status, h_cand, divisors, reg, trace, mat,
                           stats)

    matrix_cols = set()
    for r in rows:
        matrix_cols.update(r)
    in_matrix = {store.relations[i].beta for i in row_ids}

    def draw_extras(n: int) -> list[dict]:
        found = []
        scanned = set()

        def try_pool():
            for rel in store.relations:
                if len(found) >= n:
                    return
                if rel.beta in in_matrix or rel.beta in scanned:
                    continue
                scanned.add(rel.beta)
                if not store.usable(rel) or rel.is_zero:
                    continue
                cols_r = dict(store.row_columns(rel))
                if set(cols_r) <= matrix_cols:
                    found.append((cols_r, rel.log_alpha))

        try_pool()
        while len(found) < n:
            have = len(store.relations)
            collector.collect_until(lambda: len(store.relations) > have,
                                    max_polys=1 << 20)
            try_pool()
        for r, lg in found:
            extra_rows.append(r)
            extra_logs.append(lg)
        return [r for r, _ in found]

    for attempt in range(4):
        new = draw_extras(cfg.extra_relations)
        try:
            vecs = linalg.augment_kernel_vectors(
                trace, mat, rows, extra_rows[len(extra_rows) - len(new):])
        except linalg.Inconsistent:
            # an extra relation is independent of the lattice: need more rows
            return RoundResult("more", h_cand, divisors, None, trace, mat, stats)
        # reindex the -1 slots of this batch after previously drawn extras
        base_len = len(rows) + len(extra_rows) - len(new)
        fixed_vecs = []
        for k, vec in enumerate(vecs):
            nv = {}
            for i, val in vec.items():
                nv[i if i < len(rows) else base_len + (i - len(rows))] = val
            fixed_vecs.append(nv)
        multiples += vec_multiples(fixed_vecs)
        reg = regulator.real_gcd(multiples, cfg.delta, prec)
        outcome = regulator.certify_and_finish(h_cand, reg, h_star)
        if outcome.status != "more":
            return RoundResult(outcome.status, h_cand, divisors, reg, trace,
                               mat, stats)
    return RoundResult("more", h_cand, divisors, reg, trace, mat, stats)


# ---------------------------------------------------------------------------
# the full pipeline

def run(cfg: RunConfig, dump_relations: str | None = None,
        dump_matrix: str | None = None) -> dict:
    try:
        return _run(cfg, dump_relations, dump_matrix)
    except regulator.PrecisionExhausted:
        if cfg.precision >= 4096:
            raise
        return _run(replace(cfg, precision=2 * cfg.precision),
                    dump_relations, dump_matrix)


def _run(cfg: RunConfig, dump_relations: str | None,
         dump_matrix: str | None) -> dict:
    t0 = time.monotonic()
    timings: dict[str, float] = {}
    delta = int(fieldmod.make_discriminant(cfg.delta).delta)
    rng = random.Random(cfg.seed)
    h_star = analytic.approx_h_star(delta, cfg.euler_bound)
    report: dict = {"delta": delta, "strategy": cfg.strategy,
                    "seed": cfg.seed}
    b1_override = None
    for enlargement in range(3):
        res = _resolve(cfg, b1_override)
        store = relations.RelationStore(delta, res.fb, res.b2, cfg.strategy,
                                        cfg.precision)
        collector = Collector(cfg, res, store)
        t = time.monotonic()
        collector.collect_until(store.ready)
        timings["relations"] = time.monotonic() - t
        result = None
        t = time.monotonic()
        for round_no in range(10):
            result = _linear_round(cfg, res, store, h_star, rng, collector)
            if result.status == "done":
                break
            if result.status == "below":
                break
            # rank deficiency or an unfinished window: widen the matrix
            target = max(len(store.matrix_rows()) // 8, 10)
            have = len(store.matrix_rows())
            collector.collect_until(
                lambda: len(store.matrix_rows()) >= have + target)
        timings["linear_algebra"] = time.monotonic() - t
        collector.close()
        if result is not None and result.status == "done":
            break
        if result is not None and result.status == "below":
            # determinant below h*: the factor base cannot generate the
            # class group; enlarge B1 and start over
            b1_override = res.b1 * 2
            continue
        raise PipelineError(
            f"window did not close after 10 rounds (status {result.status})")
    else:
        raise PipelineError("factor base enlargement failed to certify")

    empty_fb = [c for c in result.trace.empty_columns if c < len(res.fb)]
    t = time.monotonic()
    vreport = verify.verify_factor_base(delta, res.fb, store, empty_fb,
                                        collector.scfg, cfg.precision)
    timings["verification"] = time.monotonic() - t
    timings["total"] = time.monotonic() - t0

    if dump_relations:
        store.dump(dump_relations)
    if dump_matrix:
        with open(dump_matrix, "w") as fh:
            mat = result.mat
            alive = mat.alive_rows()
            fh.write(f"{len(alive)} {len(mat.alive_cols())}\n")
            for i in alive:
                cells = " ".join(f"{c}:{v}" for c, v in sorted(mat.rows[i].items()))
                fh.write(f"{i}: {cells}\n")

    reg = result.reg
    window_product = result.h * reg.to_float()
    report.update({
        "config": {
            "b1": res.b1, "b2": res.b2, "sieve_radius": res.m,
            "tolerance": res.tolerance, "merge_bound": cfg.merge_bound,
            "batch_size": cfg.batch_size, "extra_relations": cfg.extra_relations,
            "precision": cfg.precision, "threads": cfg.threads,
            "factor_base_size": len(res.fb),
            "euler_prime_bound": h_star.euler_prime_bound,
        },
        "h": result.h,
        "divisors": list(result.divisors),
        "regulator": {
            "value": reg.to_float(),
            "hex": hex(reg.value),
            "prec": reg.prec,
            "error_bound": reg.error_bound(),
            "multiples_used": reg.multiples_used,
        },
        "h_star": h_star.to_float(),
        "window": [h_star.to_float(), 2 * h_star.to_float()],
        "window_product": window_product,
        "verified": vreport.verified,
        "verification": vreport.as_dict(),
        "relations": dict(collector.stats),
        "matrix": result.stats,
        "store": {"relations": len(store.relations),
                  "lp_columns": len(store.lp_primes),
                  "duplicates": store.dropped_duplicates},
        "timings": {k: round(v, 6) for k, v in timings.items()},
    })
    if cfg.check_window:
        h_o, div_o = oracle.class_group_by_forms(delta)
        r_o = oracle.cf_regulator(delta, 30)
        report["oracle"] = {"h": h_o, "divisors": list(div_o),
                            "regulator": fixed.from_fixed(r_o, 30)}
    assert h_star.to_float() < window_product < 2 * h_star.to_float()
    return report


def _strip_timings(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timings"}


# ---------------------------------------------------------------------------
# bench

def bench(deltas: list[int], strategies: list[str], seed: int = 0,
          overrides: dict | None = None) -> dict:
    """Per-(delta, strategy) phase numbers in the comparative-table shape,
    with a built-in cross-strategy agreement check."""
    table = []
    agree = True
    speedup_ok = 0
    for delta in deltas:
        row = {"delta": delta, "entries": {}}
        results = {}
        for strat in strategies:
            cfg = RunConfig(delta=delta, strategy=strat, seed=seed,
                            **(overrides or {}))
            rep = run(cfg)
            results[strat] = rep
            row["entries"][strat] = {
                "relations_time": rep["timings"]["relations"],
                "linear_algebra_time": rep["timings"]["linear_algebra"],
                "verification_time": rep["timings"]["verification"],
                "total_time": rep["timings"]["total"],
                "relations": rep["store"]["relations"],
                "h": rep["h"],
                "regulator": rep["regulator"]["value"],
            }
        base = next(iter(results.values()))
        for rep in results.values():
            if rep["h"] != base["h"] or rep["divisors"] != base["divisors"] \
                    or abs(rep["regulator"]["value"]
                           - base["regulator"]["value"]) > 1e-6:
                agree = False
        order = [s for s in ("2lp-batch", "2lp", "1lp", "0lp")
                 if s in row["entries"]]
        times = [row["entries"][s]["relations_time"] for s in order]
        if times == sorted(times):
            speedup_ok += 1
        table.append(row)
    return {"table": table, "strategies": strategies,
            "cross_strategy_agreement": agree,
            "relation_time_ordering_holds": speedup_ok,
            "deltas": len(deltas)}


def _bench_text(result: dict) -> str:
    lines = []
    strategies = result["strategies"]
    header = f"{'delta':>14} | " + " | ".join(f"{s:>10}" for s in strategies)
    lines.append(header)
    lines.append("-" * len(header))
    for row in result["table"]:
        cells = " | ".join(
            f"{row['entries'][s]['total_time']:10.2f}" for s in strategies)
        lines.append(f"{row['delta']:>14} | " + cells)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# command line

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rqclass",
        description="Class group and regulator of real quadratic fields")
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("compute", help="run the full pipeline")
    pc.add_argument("--delta", type=int, required=True)
    pc.add_argument("--strategy", choices=relations.STRATEGIES,
                    default="2lp-batch")
    pc.add_argument("--b1", type=int)
    pc.add_argument("--b2-ratio", type=int, default=12)
    pc.add_argument("--tolerance", type=float)
    pc.add_argument("--w", type=int, default=150, dest="merge_bound")
    pc.add_argument("--batch-size", type=int, default=100)
    pc.add_argument("--extra-relations", type=int, default=7)
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--threads", type=int, default=1)
    pc.add_argument("--precision", type=int, default=96)
    pc.add_argument("--check-window", action="store_true",
                    help="also run the brute-force oracle and attach it")
    pc.add_argument("--json", metavar="PATH")
    pc.add_argument("--dump-relations", metavar="PATH")
    pc.add_argument("--dump-matrix", metavar="PATH")

    po = sub.add_parser("oracle", help="brute-force h, divisors, regulator")
    po.add_argument("--delta", type=int)
    po.add_argument("--corpus", metavar="SPEC",
                    help="'fund:LIMIT' or 'random:COUNT:LO:HI:SEED'")

    pb = sub.add_parser("bench", help="strategy comparison table")
    pb.add_argument("--config", metavar="FILE", required=True,
                    help="JSON: {deltas: [...], strategies: [...], seed}")

    args = parser.parse_args(argv)

    if args.command == "compute":
        cfg = RunConfig(delta=args.delta, strategy=args.strategy, b1=args.b1,
                        b2_ratio=args.b2_ratio, tolerance=args.tolerance,
                        merge_bound=args.merge_bound,
                        batch_size=args.batch_size,
                        extra_relations=args.extra_relations, seed=args.seed,
                        threads=args.threads, precision=args.precision,
                        check_window=args.check_window)
        try:
            report = run(cfg, dump_relations=args.dump_relations,
                         dump_matrix=args.dump_matrix)
        except (PipelineError, fieldmod.NotFundamental,
                fieldmod.PerfectSquare) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        text = json.dumps(report, indent=2, sort_keys=True)
        if args.json:
            with open(args.json, "w") as fh:
                fh.write(text + "\n")
        print(text)
        return 0 if report["verified"] else 2

    if args.command == "oracle":
        out = []
        if args.delta:
            h, divs = oracle.class_group_by_forms(args.delta)
            r = oracle.cf_regulator(args.delta, 53)
            out.append({"delta": args.delta, "h": h, "divisors": list(divs),
                        "regulator": fixed.from_fixed(r, 53)})
        elif args.corpus:
            parts = args.corpus.split(":")
            if parts[0] == "fund":
                deltas = oracle.fundamental_discriminants(int(parts[1]))
            elif parts[0] == "random":
                count, lo, hi = int(parts[1]), int(parts[2]), int(parts[3])
                rng = random.Random(int(parts[4]) if len(parts) > 4 else 0)
                deltas = []
                while len(deltas) < count:
                    d = rng.randrange(lo, hi)
                    if oracle.is_fundamental(d):
                        deltas.append(d)
            else:
                print("bad corpus spec", file=sys.stderr)
                return 1
            for d in deltas:
                h, divs = oracle.class_group_by_forms(d)
                r = oracle.cf_regulator(d, 53)
                out.append({"delta": d, "h": h, "divisors": list(divs),
                            "regulator": fixed.from_fixed(r, 53)})
        else:
            print("need --delta or --corpus", file=sys.stderr)
            return 1
        for item in out:
            print(json.dumps(item, sort_keys=True))
        return 0

    if args.command == "bench":
        with open(args.config) as fh:
            spec = json.load(fh)
        result = bench(spec["deltas"], spec.get("strategies",
                                                list(relations.STRATEGIES)),
                       seed=spec.get("seed", 0),
                       overrides=spec.get("overrides"))
        print(json.dumps(result, indent=2, sort_keys=True))
        print(_bench_text(result), file=sys.stderr)
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())
