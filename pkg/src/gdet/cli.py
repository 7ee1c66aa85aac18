"""Command-line front end.

Subcommands: terms, group-terms, partitions, check, scan, verify, catalog.
Exit codes: 0 success, 1 verification failure, 2 usage error,
3 resource exhaustion.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from typing import List, Optional

from . import cache as cache_mod
from . import detengine, groups, partitions, wolstenholme
from .sparsepoly import EXACT, CoefficientMode, MemoryBudgetExceeded

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

MIN_BUDGET = 64 << 20


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _mode_of(args) -> Optional[CoefficientMode]:
    if args.mode == "exact":
        return EXACT
    if args.mode == "modprime":
        return CoefficientMode.mod_prime()
    return None


def _emit_table(rows: List[tuple], k_max: int, fmt: str,
                exact: bool) -> None:
    """rows: list of (n, [value-or-None per k])."""
    if fmt == "csv":
        print("n\\k," + ",".join(str(k) for k in range(1, k_max + 1)))
        for n, vals in rows:
            cells = ["*" if v is None else str(v) for v in vals]
            cells += ["*"] * (k_max - len(cells))
            print(f"{n}," + ",".join(cells))
    elif fmt == "json":
        out = [{"n": n, "k": j, "value": v, "exact": exact}
               for n, vals in rows
               for j, v in enumerate(vals, start=1) if v is not None]
        print(json.dumps(out))
    else:
        width = max([len(str(v)) for _, vals in rows for v in vals if v
                     is not None] + [4])
        head = "n\\k " + " ".join(f"{k:>{width}}" for k in range(1, k_max + 1))
        print(head)
        for n, vals in rows:
            cells = ["*" if v is None else str(v) for v in vals]
            cells += ["*"] * (k_max - len(cells))
            print(f"{n:>3} " + " ".join(f"{c:>{width}}" for c in cells))


def _the_cache(args) -> Optional[cache_mod.Cache]:
    return cache_mod.Cache(args.cache) if args.cache else None


def cmd_terms(args) -> int:
    mode = _mode_of(args)
    exact = mode is None or mode.modulus is None
    store = _the_cache(args)
    g = groups.make_cyclic(args.n)
    vals: List[Optional[int]] = []
    cached = []
    if store is not None:
        cached = [store.get_count(g.name, g.gap_id, j, exact)
                  for j in range(1, args.k_max + 1)]
        if all(c is not None for c in cached):
            vals = cached
    if not vals:
        try:
            counts = detengine.term_count_power(
                g, args.k_max, mode, args.budget,
                progress=_progress if args.progress else None)
            vals = list(counts)
        except MemoryBudgetExceeded as err:
            vals = list(getattr(err, "completed_counts", []))
            _progress(f"budget exhausted after k={len(vals)}: {err}")
            if store is not None and vals:
                store.put_counts(g.name, g.gap_id, vals, exact)
            _emit_table([(args.n, vals)], args.k_max, args.format, exact)
            return EXIT_RESOURCE
        if store is not None:
            store.put_counts(g.name, g.gap_id, vals, exact)
    _emit_table([(args.n, vals)], args.k_max, args.format, exact)
    return EXIT_OK


def cmd_group_terms(args) -> int:
    if (args.gap is None) == (args.name is None):
        print("exactly one of --gap/--name is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        g = groups.resolve_group(args.gap or args.name)
    except (KeyError, ValueError) as err:
        print(f"unknown group: {err}", file=sys.stderr)
        return EXIT_USAGE
    mode = _mode_of(args)
    if mode is None:
        mode = (CoefficientMode.mod_prime()
                if g.order >= detengine.MODPRIME_DEFAULT_ORDER and
                not g.is_cyclic() else EXACT)
    exact = mode.modulus is None
    store = _the_cache(args)
    value = None
    if store is not None:
        value = store.get_count(g.name, g.gap_id, 1, exact)
    if value is None:
        try:
            poly = detengine.group_determinant(
                g, mode, args.budget,
                progress=_progress if args.progress else None)
        except MemoryBudgetExceeded as err:
            print(f"budget exhausted: {err}", file=sys.stderr)
            return EXIT_RESOURCE
        value = poly.term_count
        if store is not None:
            store.put_counts(g.name, g.gap_id, [value], exact)
    method = "character-product" if g.is_cyclic() else "subset-dp"
    label = "exact" if exact else "monte-carlo (mod 2^61-1)"
    if args.format == "json":
        print(json.dumps({"group": g.name, "gap_id": list(g.gap_id or ()),
                          "order": g.order, "terms": value,
                          "method": method, "exact": exact}))
    elif args.format == "csv":
        print("group,order,terms,method,mode")
        print(f"{g.name},{g.order},{value},{method},{label}")
    else:
        print(f"{g.name} (order {g.order}): {value} terms "
              f"[{method}, {label}]")
    return EXIT_OK


def cmd_partitions(args) -> int:
    rows = [(n, [partitions.card_lambda(n, j).value
                 for j in range(1, args.k_max + 1)])
            for n in range(1, args.n_max + 1)]
    _emit_table(rows, args.k_max, args.format, exact=True)
    return EXIT_OK


def cmd_check(args) -> int:
    if args.p is not None:
        ps = [args.p]
    else:
        lo, hi = args.range
        ps = wolstenholme.primes_in(lo, hi)
    out = []
    failures = 0
    for p in ps:
        try:
            r = wolstenholme.classify_prime(p)
        except ValueError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_USAGE
        out.append(r)
        if not r.satisfies_wolstenholme_theorem and p >= 5:
            failures += 1
    if args.format == "json":
        print(json.dumps([r.to_json_dict() for r in out]))
    else:
        for r in out:
            w = "yes" if r.is_wolstenholme_prime else "no"
            print(f"p={r.p}: Wolstenholme prime: {w}  "
                  f"C(2p-1,p-1) mod p^4 = {r.residue_p4}"
                  + (f"  [{r.note}]" if r.note else ""))
    return EXIT_VERIFY if failures else EXIT_OK


def cmd_scan(args) -> int:
    result = wolstenholme.scan_range(
        args.lo, args.hi, checkpoint_path=args.checkpoint,
        progress=_progress if args.progress else None,
        keep_reports=False)
    if args.format == "json":
        print(json.dumps({"lo": args.lo, "hi": args.hi,
                          "primes_scanned": result.scanned,
                          "wolstenholme_primes": result.wolstenholme_primes}))
    else:
        print(f"scanned {result.scanned} primes in "
              f"[{args.lo}, {args.hi}]")
        if result.wolstenholme_primes:
            for p in result.wolstenholme_primes:
                print(f"Wolstenholme prime: {p}")
        else:
            print("no Wolstenholme primes found")
    return EXIT_OK


def _verify_oracle() -> List[str]:
    bad = []
    pairs = [(n, k) for n in range(1, 7) for k in range(1, 4)]
    pairs += [(n, 1) for n in range(7, 11)]
    for n, k in pairs:
        formula = partitions.card_lambda(n, k).value
        enum = partitions.enumerate_lambda(n, k)
        if formula != enum:
            bad.append(f"lambda({n},{k}): formula {formula} != "
                       f"enumeration {enum}")
    return bad


def _verify_crossval(budget: int) -> List[str]:
    bad = []
    for n in range(1, 9):
        g = groups.make_cyclic(n)
        a = detengine.det_subset_dp(detengine.group_matrix(g),
                                    budget=budget)
        b = detengine.det_circulant_character(n, budget=budget)
        if a.terms != b.terms:
            bad.append(f"C_{n}: subset-dp and character product disagree")
    return bad


def _verify_theorems() -> List[str]:
    bad = []
    for p in (5, 7, 11, 13):
        nt = detengine.term_count_power(groups.make_cyclic(p), 1)[0]
        lam = partitions.card_lambda(p, 1).value
        ident = wolstenholme.n_theta_via_identity(p)
        if not (nt == lam == ident):
            bad.append(f"p={p}: N(Theta)={nt}, |Lambda|={lam}, "
                       f"identity={ident}")
        if nt % p**2 != 1:
            bad.append(f"p={p}: N(Theta(C_p)) mod p^2 = {nt % p**2} != 1")
    for p in wolstenholme.primes_in(5, 499):
        if wolstenholme.central_binom_mod(p, 3) != 1:
            bad.append(f"p={p}: C(2p-1,p-1) mod p^3 != 1")
    if wolstenholme.central_binom_mod(5, 4) != 126:
        bad.append("p=5: residue mod 625 != 126")
    return bad


def _verify_questions(budget: int) -> List[str]:
    bad = []
    for n in range(1, 9):
        for k in (1, 2) if n <= 6 else (1,):
            nt = detengine.term_count_power(groups.make_cyclic(n), k,
                                            budget=budget)[-1]
            lam = partitions.card_lambda(n, k).value
            if nt > lam:
                bad.append(f"(n={n},k={k}): N={nt} > |Lambda|={lam}")
            if (lam - nt) % n != 0:
                bad.append(f"(n={n},k={k}): N !== |Lambda| (mod n)")
            is_pp = len({f for f in range(2, n + 1) if n % f == 0 and
                         wolstenholme.is_prime(f)}) <= 1
            if is_pp and nt != lam:
                bad.append(f"(n={n},k={k}): prime power but N != |Lambda|")
            if not is_pp and nt == lam:
                bad.append(f"(n={n},k={k}): composite but N == |Lambda|")
    return bad


def cmd_verify(args) -> int:
    suites = {
        "oracle": lambda: _verify_oracle(),
        "crossval": lambda: _verify_crossval(args.budget),
        "theorems": lambda: _verify_theorems(),
        "questions": lambda: _verify_questions(args.budget),
    }
    if args.suite not in suites:
        print(f"unknown suite: {args.suite!r} (choose from "
              f"{sorted(suites)})", file=sys.stderr)
        return EXIT_USAGE
    t0 = time.time()
    failures = suites[args.suite]()
    dt = time.time() - t0
    for line in failures:
        print(f"FAIL {line}")
    status = "FAIL" if failures else "PASS"
    print(f"{status} suite={args.suite} failures={len(failures)} "
          f"({dt:.1f}s)")
    return EXIT_VERIFY if failures else EXIT_OK


def cmd_catalog(args) -> int:
    cat = groups.catalog_order16()
    if args.format == "json":
        print(json.dumps([{"name": g.name, "gap_id": list(g.gap_id),
                           "order": g.order,
                           "abelian": g.is_abelian()} for g in cat]))
    else:
        print("name,gap_id,order,abelian")
        for g in cat:
            gi = f"({g.gap_id[0]};{g.gap_id[1]})"
            print(f"{g.name},{gi},{g.order},{g.is_abelian()}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gdet",
        description="Group-determinant term counts, restricted-partition "
                    "cardinalities, and Wolstenholme prime checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--mode", choices=["exact", "modprime"], default=None)
        p.add_argument("--budget", type=int, default=8 << 30,
                       help="memory budget in bytes")
        p.add_argument("--cache", default=None, help="cache directory")
        p.add_argument("--format", choices=["csv", "json", "human"],
                       default="human")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker hint; results are schedule-independent")
        p.add_argument("--progress", action="store_true",
                       help="print progress to stderr")

    p = sub.add_parser("terms", help="N(Theta(C_n)^k) for k = 1..k_max")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k-max", type=int, default=1)
    common(p)
    p.set_defaults(fn=cmd_terms)

    p = sub.add_parser("group-terms", help="N(Theta(G)) for one group")
    p.add_argument("--gap", help="GAP id, e.g. 16,9")
    p.add_argument("--name", help="group name, e.g. D_16")
    common(p)
    p.set_defaults(fn=cmd_group_terms)

    p = sub.add_parser("partitions", help="table of |Lambda~_n^k|")
    p.add_argument("--n-max", type=int, default=9)
    p.add_argument("--k-max", type=int, default=10)
    common(p)
    p.set_defaults(fn=cmd_partitions)

    p = sub.add_parser("check", help="classify primes")
    p.add_argument("--p", type=int)
    p.add_argument("--range", type=int, nargs=2, metavar=("LO", "HI"))
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("scan", help="scan a range for Wolstenholme primes")
    p.add_argument("lo", type=int)
    p.add_argument("hi", type=int)
    p.add_argument("--checkpoint", default=None)
    common(p)
    p.set_defaults(fn=cmd_scan)

    p = sub.add_parser("verify", help="run an invariant suite")
    p.add_argument("suite",
                   choices=["theorems", "questions", "oracle", "crossval"])
    common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("catalog", help="list the order-16 group catalog")
    common(p)
    p.set_defaults(fn=cmd_catalog)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code else EXIT_OK
    if args.budget < MIN_BUDGET:
        print("budget must be at least 64 MiB", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "check" and (args.p is None) == (args.range is None):
        print("exactly one of --p/--range is required", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "n", None) is not None and not (1 <= args.n <= 16):
        print("n must be in 1..16", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except MemoryBudgetExceeded as err:
        print(f"budget exhausted: {err}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
