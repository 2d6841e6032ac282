"""Command-line driver: one subcommand per experiment, CSV artifacts out.

Runs are reproducible: identical configuration (seed included) yields
byte-identical output.  Exit codes are stable for shell harnesses:
0 success, 2 precondition failure, 3 budget exhausted, 64 usage error,
65 pattern parse failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import behrend, containers, supersat
from .cache import RNumberCache, cache_dir_from_env
from .copies import GridSet, codegree_stats, enumerate_copies
from .errors import BudgetExceededError, PatternError, PreconditionError
from .patterns import Pattern, normalize, parse_pattern, pattern_hash
from .solver import count_xfree_subsets, solve_rx_exact

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_BUDGET = 3
EXIT_USAGE = 64
EXIT_PARSE = 65

COMMANDS = (
    "solve-rx", "count-free", "enum-copies", "stats", "behrend", "lift",
    "supersat-sample", "supersat-exact", "pnt-check", "sequence-filter",
    "container-params", "budget-report",
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt(x) -> str:
    """CSV cell: 12 significant digits for reals, plain text otherwise."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return f"{float(x):.12g}"


def _write_csv(out: str | None, header: list[str], rows: list[list]):
    text = ",".join(header) + "\n"
    for row in rows:
        text += ",".join(_fmt(c) for c in row) + "\n"
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_pattern(path: str) -> Pattern:
    return normalize(parse_pattern(Path(path).read_text()))


def _parse_range(spec: str) -> range:
    lo, _, hi = spec.partition(":")
    try:
        a, b = int(lo), int(hi)
    except ValueError:
        raise _UsageError(f"bad range {spec!r}, expected A:B") from None
    if a > b:
        raise _UsageError(f"bad range {spec!r}: start exceeds end")
    return range(a, b + 1)


def _open_cache(args) -> RNumberCache | None:
    directory = cache_dir_from_env(getattr(args, "cache", None))
    return RNumberCache(directory) if directory else None


def _exact_from_cache_or_solve(pattern, n, cache, budget, workers=1):
    pid = pattern_hash(pattern)
    if cache is not None:
        rec = cache.load().get((pid, n))
        if rec is not None and rec.exact:
            return rec
    rec = solve_rx_exact(pattern, n, budget=budget, workers=workers)
    if cache is not None and rec.exact:
        cache.store(rec, pattern)
    return rec


def _r_provider(pattern, cache, budget):
    """Extremal values for the schedule: exact cache first, then a fresh
    construction lower bound."""
    pid = pattern_hash(pattern)
    cached = cache.load() if cache is not None else {}

    def provider(n):
        rec = cached.get((pid, n))
        if rec is not None and rec.exact:
            return rec.value, "exact"
        cert = behrend.behrend_lift(pattern, n)
        return cert.result.size, "behrend"

    return provider


# --- subcommand handlers -----------------------------------------------

def _cmd_solve_rx(args):
    pattern = _load_pattern(args.pattern)
    cache = _open_cache(args)
    rec = _exact_from_cache_or_solve(pattern, args.n, cache, args.budget, args.workers)
    if rec.exact:
        print(rec.value)
        return EXIT_OK
    print(f"{rec.lower} {rec.upper}")
    return EXIT_BUDGET


def _cmd_count_free(args):
    pattern = _load_pattern(args.pattern)
    rec = count_xfree_subsets(pattern, args.n, vertex_cap=args.cap, budget=args.budget)
    print(rec.count)
    return EXIT_OK


def _cmd_enum_copies(args):
    pattern = _load_pattern(args.pattern)
    header = ["r"] + [f"b{i+1}" for i in range(pattern.d)]
    rows = [[c.ratio, *c.base] for c in enumerate_copies(pattern, args.n)]
    _write_csv(args.out, header, rows)
    return EXIT_OK


def _cmd_stats(args):
    pattern = _load_pattern(args.pattern)
    s = codegree_stats(pattern, args.n, vertex_cap=args.cap, edge_cap=args.cap)
    header = ["n", "d", "k", "edges", "vertices", "avg_degree", "gamma_estimate"]
    row = [s.n, s.d, s.k, s.edge_count, s.vertex_count,
           float(s.avg_degree), float(s.gamma_estimate)]
    for j in range(2, s.k + 1):
        header.append(f"delta_{j}")
        row.append(s.codegrees[j])
    _write_csv(args.out, header, [row])
    return EXIT_OK


def _write_certificate(out: str | None, text: str, result: GridSet):
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
        with open(out + ".set", "w", newline="\n") as fh:
            fh.write(result.to_text())
    else:
        sys.stdout.write(text)
        sys.stdout.write(result.to_text())


def _cmd_behrend(args):
    pattern = _load_pattern(args.pattern)
    if pattern.d != 1:
        raise PreconditionError("the 1-D construction needs a one-dimensional pattern")
    cert = behrend.behrend_lift(pattern, args.n, all_triples=args.all_triples)
    _write_certificate(args.out, cert.base_certificate.to_text(), cert.result)
    return EXIT_OK


def _cmd_lift(args):
    pattern = _load_pattern(args.pattern)
    if args.n_range:
        rows = behrend.lower_bound_table(pattern, list(_parse_range(args.n_range)),
                                         all_triples=args.all_triples)
        _write_csv(args.out,
                   ["n", "effective_n", "set_size", "density", "empirical_c", "verified"],
                   [[r.n, r.effective_n, r.set_size, r.density, r.empirical_c, r.verified]
                    for r in rows])
        return EXIT_OK
    if args.n is None:
        raise _UsageError("lift needs --n or --n-range")
    cert = behrend.behrend_lift(pattern, args.n, all_triples=args.all_triples)
    _write_certificate(args.out, cert.to_text(), cert.result)
    return EXIT_OK


def _grid_argument(args, pattern) -> GridSet:
    if args.set:
        return GridSet.from_text(Path(args.set).read_text())
    if args.n is None:
        raise _UsageError("need --n (full grid) or --set FILE")
    return GridSet.full(args.n, pattern.d)


def _cmd_supersat_sample(args):
    pattern = _load_pattern(args.pattern)
    grid = _grid_argument(args, pattern)
    rows = []
    for i in range(args.samples):
        s = supersat.sample_subgrid(grid, pattern, args.m, args.seed, index=i)
        rows.append([s.prime, *s.base, s.restricted_size, s.copy_count])
    header = ["p"] + [f"b{i+1}" for i in range(pattern.d)] + ["size_ab", "gamma_ab"]
    _write_csv(args.out, header, rows)
    return EXIT_OK


def _cmd_supersat_exact(args):
    pattern = _load_pattern(args.pattern)
    grid = _grid_argument(args, pattern)
    audit = supersat.exact_expected_gamma(grid, pattern, args.m, budget=args.budget)
    rows = [[a.prime, float(a.mean_size), float(a.mean_gamma)] for a in audit.per_prime]
    _write_csv(args.out, ["prime", "exact_mean_ab", "exact_mean_gamma"], rows)
    print(f"mean_gamma={float(audit.mean_gamma):.12g} mean_ab={float(audit.mean_size):.12g}")
    return EXIT_OK


def _cmd_pnt_check(args):
    result = supersat.verify_pnt_constant(args.l0, args.lmax, cap=args.cap)
    if result.ok:
        print("OK")
    else:
        print(f"violation at l={result.first_violation}")
    return EXIT_OK


def _cmd_sequence_filter(args):
    pattern = _load_pattern(args.pattern)
    cache = _open_cache(args)
    ns = list(_parse_range(args.n_range))
    if args.m_mode == "half":
        m_map = {n: (n + 1) // 2 for n in ns}
    else:
        table_for_m = {}

        def r_int(n):
            rec = _exact_from_cache_or_solve(pattern, n, cache, args.budget)
            if not rec.exact:
                raise BudgetExceededError(f"could not solve n={n} exactly within budget")
            return rec.value, rec.provenance

        m_map = {n: supersat.m_of_n(pattern, n, r_int) for n in ns}
    needed = sorted(set(ns) | set(m_map.values()))
    table = {}
    provenance = {}
    for n in needed:
        rec = _exact_from_cache_or_solve(pattern, n, cache, args.budget)
        if not rec.exact:
            raise BudgetExceededError(f"could not solve n={n} exactly within budget")
        table[n] = rec.value
        provenance[n] = rec.provenance
    report = supersat.filter_sequence(table, m_map, args.alpha, pattern.d, ns,
                                      provenance=provenance)
    rows = [[n, report.m_values[n], table[n], table[report.m_values[n]],
             n in report.accepted] for n in ns]
    _write_csv(args.out, ["n", "m_n", "r_n", "r_mn", "accepted"], rows)
    return EXIT_OK


def _container_rows(args, with_counts: bool):
    pattern = _load_pattern(args.pattern)
    cache = _open_cache(args)
    ns = list(_parse_range(args.n_range))
    gamma = containers.estimate_gamma_const(pattern, ns).gamma
    provider = _r_provider(pattern, cache, args.budget)
    alpha = Fraction(args.alpha)
    rows = []
    for n in ns:
        vertices = n**pattern.d
        summary = None
        if vertices <= args.cap:
            try:
                summary = codegree_stats(pattern, n, vertex_cap=args.cap, edge_cap=args.cap)
                if summary.edge_count == 0:
                    summary = None
            except BudgetExceededError:
                summary = None
        params = containers.build_container_params(pattern, n, provider, gamma, alpha,
                                                   summary=summary)
        count = None
        if with_counts and vertices <= 36:
            count = count_xfree_subsets(pattern, n).count
        rows.append((params, count))
    return rows


def _cmd_container_params(args):
    rows = _container_rows(args, with_counts=True)
    out_rows = []
    for params, count in rows:
        budget_row = containers.counting_budget(params, {params.n: count} if count else {})[0]
        out_rows.append([
            params.n, params.k, params.r_value, params.r_provenance,
            float(params.gamma), float(params.epsilon), float(params.tau),
            params.delta_mode, float(params.delta_value),
            params.hyp_tau, params.hyp_delta, float(params.logC_budget),
            float(params.size_cap), float(params.total_exponent_budget),
            budget_row.true_exponent,
        ])
    _write_csv(args.out, [
        "n", "k", "r_value", "r_provenance", "gamma", "epsilon", "tau",
        "delta_mode", "delta_value", "hyp_tau", "hyp_delta", "logC_budget",
        "size_cap", "total_exponent_budget", "true_exponent",
    ], out_rows)
    return EXIT_OK


def _cmd_budget_report(args):
    rows = _container_rows(args, with_counts=True)
    out_rows = []
    for params, count in rows:
        budget_row = containers.counting_budget(params, {params.n: count} if count else {})[0]
        out_rows.append([
            params.n, float(params.logC_budget), float(params.size_cap),
            budget_row.total_budget, budget_row.true_exponent, budget_row.ratio,
        ])
    _write_csv(args.out, [
        "n", "logC_budget", "size_cap", "total_exponent_budget",
        "true_exponent", "ratio",
    ], out_rows)
    return EXIT_OK


HANDLERS = {
    "solve-rx": _cmd_solve_rx,
    "count-free": _cmd_count_free,
    "enum-copies": _cmd_enum_copies,
    "stats": _cmd_stats,
    "behrend": _cmd_behrend,
    "lift": _cmd_lift,
    "supersat-sample": _cmd_supersat_sample,
    "supersat-exact": _cmd_supersat_exact,
    "pnt-check": _cmd_pnt_check,
    "sequence-filter": _cmd_sequence_filter,
    "container-params": _cmd_container_params,
    "budget-report": _cmd_budget_report,
}


def build_parser() -> _Parser:
    parser = _Parser(prog="xfree", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    def common(p, pattern=True, n=True, n_range=False):
        if pattern:
            p.add_argument("--pattern", required=True, help="pattern file")
        if n:
            p.add_argument("--n", type=int, default=None, help="grid side")
        if n_range:
            p.add_argument("--n-range", dest="n_range", default=None, help="A:B inclusive")
        p.add_argument("--cache", default=None, help="cache dir (default $XFREE_CACHE)")
        p.add_argument("--out", default=None, help="output file (default stdout)")

    p = sub.add_parser("solve-rx")
    common(p)
    p.add_argument("--budget", type=int, default=5_000_000)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("count-free")
    common(p)
    p.add_argument("--cap", type=int, default=36)
    p.add_argument("--budget", type=int, default=50_000_000)

    p = sub.add_parser("enum-copies")
    common(p)

    p = sub.add_parser("stats")
    common(p)
    p.add_argument("--cap", type=int, default=10**6)

    p = sub.add_parser("behrend")
    common(p)
    p.add_argument("--all-triples", action="store_true")

    p = sub.add_parser("lift")
    common(p, n_range=True)
    p.add_argument("--all-triples", action="store_true")

    for name in ("supersat-sample", "supersat-exact"):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--set", default=None, help="grid-set file (default: full grid)")
        p.add_argument("--m", type=int, required=True, help="sub-grid side")
        if name == "supersat-sample":
            p.add_argument("--samples", type=int, default=1)
            p.add_argument("--seed", type=int, default=0)
        else:
            p.add_argument("--budget", type=int, default=2_000_000)

    p = sub.add_parser("pnt-check")
    p.add_argument("--l0", type=int, required=True)
    p.add_argument("--lmax", type=int, required=True)
    p.add_argument("--cap", type=int, default=10**8)

    p = sub.add_parser("sequence-filter")
    common(p, n=False, n_range=True)
    p.add_argument("--alpha", default="1/2")
    p.add_argument("--m-mode", choices=("half", "formula"), default="half")
    p.add_argument("--budget", type=int, default=5_000_000)

    for name in ("container-params", "budget-report"):
        p = sub.add_parser(name)
        common(p, n=False, n_range=True)
        p.add_argument("--alpha", default="1/2")
        p.add_argument("--cap", type=int, default=10**5)
        p.add_argument("--budget", type=int, default=5_000_000)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        print("usage: xfree <subcommand> [options]; subcommands: " + ", ".join(COMMANDS),
              file=sys.stderr)
        return EXIT_USAGE
    if argv[0] in ("-h", "--help"):
        build_parser().print_help()
        return EXIT_OK
    if argv[0] not in COMMANDS:
        print(f"unknown subcommand {argv[0]!r}; expected one of: " + ", ".join(COMMANDS),
              file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command in ("sequence-filter", "container-params", "budget-report") \
                and getattr(args, "n_range", None) is None:
            raise _UsageError(f"{args.command} needs --n-range")
        if args.command in ("solve-rx", "count-free", "enum-copies", "stats", "behrend") \
                and args.n is None:
            raise _UsageError(f"{args.command} needs --n")
        return HANDLERS[args.command](args)
    except SystemExit as exc:  # argparse -h inside a subcommand
        return int(exc.code or 0)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PatternError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except BudgetExceededError as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
