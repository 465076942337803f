"""Command-line interface: ``twpart <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or malformed
input), 3 cap or parameter infeasibility.  Results go to stdout as JSON (or
CSV for ``bench``); diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction

from .apps import PROBLEMS, PROPERTIES, CapExceededError, estimate_optimum, test_property
from .forest import stronger_tree_partition
from .generators import FAMILIES, GeneratorError, GenSpec, generate
from .graph import GraphParseError, Probe, QueryLedger, is_isolated_neighborhood, parse_graph, serialize_graph
from .neighborhood import SearchBudget, find_neighborhood
from .oracle import (OracleParams, OracleSession, derive_parameters, global_partition, local_partition,
                     stats_record)
from .treedecomp import (DecompositionError, decomposition_partition, exact_treewidth, normalize,
                         parse_decomposition, serialize_decomposition, validate)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def rational(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    return value


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, text: str):
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from None


def _load_graph(path: str):
    try:
        return parse_graph(_read(path))
    except GraphParseError as exc:
        raise DataError(f"{path}: {exc}") from None


def _emit(record: dict):
    print(json.dumps(record, sort_keys=True, default=str))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TWPART_THREADS", "1")))
    except ValueError:
        raise UsageError("TWPART_THREADS must be an integer") from None


def _add_oracle_args(p, need_epsilon=False):
    p.add_argument("--k", type=int, help="component size bound (practical mode)")
    p.add_argument("--delta", type=rational, help="conductance bound as p/q (practical mode)")
    p.add_argument("--h", type=int, default=1, help="treewidth bound; c = 2(h+1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theoretical", action="store_true",
                   help="derive k and delta from epsilon, d, h instead of --k/--delta")
    p.add_argument("--epsilon", type=rational, default=None if need_epsilon else Fraction(1, 10))
    p.add_argument("--d", type=int, default=None, help="degree bound (default: graph maximum degree)")


def _params(args, G=None) -> OracleParams:
    d = args.d if args.d is not None else (max(G.d_max, 2) if G is not None else 2)
    if args.theoretical:
        return derive_parameters(args.epsilon, d, args.h, args.seed)
    if args.k is None or args.delta is None:
        raise UsageError("practical mode needs --k and --delta (or pass --theoretical)")
    return OracleParams.practical(args.k, args.delta, args.h, args.seed, args.epsilon, d)


def _config(args) -> dict:
    return {k: (str(v) if isinstance(v, Fraction) else v)
            for k, v in sorted(vars(args).items()) if k != "func"}


# -- subcommands ------------------------------------------------------------------------


def cmd_gen(args):
    spec = GenSpec(args.family, args.n, args.d, args.h, args.seed, args.noise)
    G, witness = generate(spec)
    _write(args.out, serialize_graph(G))
    if args.witness_out:
        if witness is None:
            raise GeneratorError(f"no witness decomposition for family {args.family} with noise")
        _write(args.witness_out, serialize_decomposition(witness))
    _emit({"config": _config(args), "n": G.n, "m": G.m, "d_max": G.d_max,
           "witness_width": witness.width if witness else None})


def cmd_partition(args):
    G = _load_graph(args.input)
    if args.mode == "forest":
        eps = args.epsilon
        if args.delta is None:
            raise UsageError("forest mode needs --delta")
        d = args.d if args.d is not None else max(G.d_max, 2)
        fp = stronger_tree_partition(G, eps, args.delta, d)
        partition = fp.partition
        record = {"n": G.n, "m": G.m, "cut_edges": partition.cut_edges,
                  "max_component": max((len(S) for S in partition.components), default=0),
                  "good_vertices": len(fp.good), "k": str(fp.k), "delta": str(args.delta), "c": 2,
                  "seed": args.seed, "queries_total": 0, "max_queries_per_call": 0}
    else:
        params = _params(args, G)
        if args.mode == "global":
            partition = global_partition(G, params)
            record = stats_record(G, partition, params)
        else:
            session = OracleSession(G, params)
            partition = local_partition(G, params, session, threads=_threads())
            record = stats_record(G, partition, params, session.ledger)
    record["config"] = _config(args)
    if args.out:
        _write(args.out, partition.to_text())
    else:
        sys.stdout.write(partition.to_text())
    _emit(record)


def cmd_oracle_query(args):
    G = _load_graph(args.input)
    if not 0 <= args.vertex < G.n:
        raise DataError(f"vertex {args.vertex} out of range [0, {G.n})")
    params = _params(args, G)
    session = OracleSession(G, params)
    part = session.query(args.vertex)
    _emit({"config": _config(args), "vertex": args.vertex, "component": sorted(part),
           "queries": session.ledger.total, "k": params.k, "delta": str(params.delta), "c": params.c,
           "seed": params.seed})


def cmd_find(args):
    G = _load_graph(args.input)
    if not 0 <= args.vertex < G.n:
        raise DataError(f"vertex {args.vertex} out of range [0, {G.n})")
    budget = SearchBudget(args.k, args.delta, args.c)
    ledger = QueryLedger()
    S = find_neighborhood(G, args.vertex, budget, probe=Probe(G, ledger))
    _emit({"config": _config(args), "vertex": args.vertex, "neighborhood": sorted(S),
           "isolated": is_isolated_neighborhood(G, args.vertex, S, args.k, args.delta, args.c),
           "queries": ledger.total})


def cmd_estimate(args):
    G = _load_graph(args.input)
    params = _params(args, G)
    report = estimate_optimum(G, params, args.problem, args.epsilon, args.seed)
    _emit({"config": _config(args), **report.as_dict(), "k": params.k, "delta": str(params.delta),
           "c": params.c})


def cmd_test(args):
    G = _load_graph(args.input)
    params = _params(args, G)
    verdict = test_property(G, params, args.property, args.epsilon, args.seed, param=args.param, d=args.d)
    _emit({"config": _config(args), **verdict.as_dict(), "k": params.k, "delta": str(params.delta),
           "c": params.c})


def cmd_bench(args):
    try:
        sizes = [int(x) for x in args.sizes.split(",") if x]
    except ValueError:
        raise UsageError(f"bad --sizes {args.sizes!r}") from None
    d = args.d if args.d is not None else 3
    params = OracleParams.practical(args.k, args.delta, args.h, args.seed, args.epsilon, d)
    print("n,max_queries_per_call")
    for n in sizes:
        G, _ = generate(GenSpec(args.family, n, d, args.h, args.seed))
        session = OracleSession(G, params)
        rng = random.Random(args.seed)
        for _ in range(min(args.samples, G.n)):
            session.query(rng.randrange(G.n))
        print(f"{n},{session.ledger.max_per_call}", flush=True)


def cmd_decomp(args):
    G = _load_graph(args.input)
    if args.action == "treewidth":
        tw, witness = exact_treewidth(G, cap=args.cap)
        if args.out:
            _write(args.out, serialize_decomposition(witness))
        _emit({"config": _config(args), "treewidth": tw})
        return
    if not args.decomposition:
        raise UsageError(f"{args.action} needs --decomposition")
    try:
        D = parse_decomposition(_read(args.decomposition))
    except (DecompositionError, ValueError) as exc:
        raise DataError(f"{args.decomposition}: {exc}") from None
    report = validate(G, D)
    if args.action == "validate":
        _emit({"config": _config(args), "valid": report.ok, "violation": report.violation,
               "witness": report.witness, "width": D.width})
        return
    if not report:
        raise DataError(f"invalid decomposition: {report.violation} at {report.witness}")
    if args.action == "normalize":
        N = normalize(G, D)
        if args.out:
            _write(args.out, serialize_decomposition(N))
        else:
            sys.stdout.write(serialize_decomposition(N))
        _emit({"config": _config(args), "bags": len(N.bags), "width": N.width})
        return
    result = decomposition_partition(G, D, args.epsilon, args.delta, args.d)
    _emit({"config": _config(args), "k_bound": result.k_bound, "good": len(result.good_set),
           "n": G.n, "width": result.width, "max_part": max((len(s) for s in result.g), default=0)})


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twpart", description="Partitioning oracle for bounded-treewidth graphs")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a seeded instance")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=int, default=0, help="extra random edges")
    p.add_argument("--out", required=True, help="graph output path")
    p.add_argument("--witness-out", help="witness decomposition output path")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("partition", help="partition a graph (global, local-sweep, or forest)")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=("global", "local-sweep", "forest"), default="local-sweep")
    p.add_argument("--out", help="partition output path (default: stdout, before the stats line)")
    _add_oracle_args(p)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("oracle-query", help="answer one oracle query")
    p.add_argument("--input", required=True)
    p.add_argument("--vertex", type=int, required=True)
    _add_oracle_args(p)
    p.set_defaults(func=cmd_oracle_query)

    p = sub.add_parser("find-neighborhood", help="run the isolated-neighborhood search at one vertex")
    p.add_argument("--input", required=True)
    p.add_argument("--vertex", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--delta", type=rational, required=True)
    p.add_argument("--c", type=int, required=True)
    p.set_defaults(func=cmd_find)

    p = sub.add_parser("estimate", help="estimate matching / vertex cover / dominating set size")
    p.add_argument("--input", required=True)
    p.add_argument("--problem", choices=PROBLEMS, required=True)
    _add_oracle_args(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("test", help="test a hereditary property")
    p.add_argument("--input", required=True)
    p.add_argument("--property", choices=PROPERTIES, required=True)
    p.add_argument("--param", type=int, help="h for treewidth_le_h, colors for k_colorable")
    _add_oracle_args(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("bench", help="max queries per oracle call against n")
    p.add_argument("--family", choices=FAMILIES, default="forest")
    p.add_argument("--sizes", required=True, help="comma-separated n values")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--delta", type=rational, default=Fraction(1, 5))
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--epsilon", type=rational, default=Fraction(3, 10))
    p.add_argument("--samples", type=int, default=30, help="query vertices per size")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("decomp", help="validate / normalize / exact treewidth / neighborhood map")
    p.add_argument("--input", required=True)
    p.add_argument("--action", choices=("validate", "normalize", "treewidth", "partition"), required=True)
    p.add_argument("--decomposition")
    p.add_argument("--out")
    p.add_argument("--cap", type=int, default=25)
    p.add_argument("--epsilon", type=rational, default=Fraction(3, 10))
    p.add_argument("--delta", type=rational, default=Fraction(3, 10))
    p.add_argument("--d", type=int, default=None)
    p.set_defaults(func=cmd_decomp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("missing subcommand")
        args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (CapExceededError, GeneratorError, ValueError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
