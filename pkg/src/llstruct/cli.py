"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 cap or guard
exceeded, 4 internal invariant violation (e.g. oracle mismatch).
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
import warnings

from . import evaluation, oracle
from .algebra import fc_cardinality
from .comparator import (
    DEFAULT_MAX_UNION_TERMS,
    CapExceeded,
    ComparatorConfig,
    DomainMismatch,
    confusion_matrix,
    dependence_features,
)
from .model import (
    DomainSpec,
    ModelError,
    load_model,
    model_to_dict,
    random_model,
    serialize_model,
)
from .partition import partition

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_LIMIT = 3
EXIT_INTERNAL = 4

CAP_ENV = "LLSTRUCT_MAX_UNION_TERMS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None:
        return DEFAULT_MAX_UNION_TERMS
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{CAP_ENV} must be an integer, got {raw!r}") from None


def cmd_compare(args) -> int:
    a, b = load_model(args.model_a), load_model(args.model_b)
    if a.domain != b.domain:
        raise DomainMismatch(
            f"variables differ: {list(a.domain.cardinalities)} vs {list(b.domain.cardinalities)}"
        )
    cap = args.max_union_terms if args.max_union_terms is not None else _default_cap()
    cfg = ComparatorConfig(max_union_terms=cap, emit_per_pair=args.per_pair, workers=args.workers)

    if args.check:
        fast = confusion_matrix(a, b, cfg)
        brute = oracle.brute_confusion_matrix(a, b, per_pair=args.per_pair)
        match = fast.counts() == brute.counts() and (
            not args.per_pair or fast.per_pair == brute.per_pair
        )
        cm, method = fast, "efficient+oracle"
    elif args.oracle:
        cm, method, match = oracle.brute_confusion_matrix(a, b, per_pair=args.per_pair), "oracle", None
    else:
        cm, method, match = confusion_matrix(a, b, cfg), "efficient", None

    if args.format == "json":
        doc = cm.to_dict(method)
        if match is not None:
            doc["verdict"] = "MATCH" if match else "MISMATCH"
        print(json.dumps(doc, indent=2))
    else:
        sys.stdout.write(cm.to_csv())
        if match is not None:
            print(f"# verdict: {'MATCH' if match else 'MISMATCH'}")
    if match is False:
        print("efficient and brute-force matrices differ", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def cmd_partition(args) -> int:
    m = load_model(args.model)
    i, j = args.pair
    n = m.domain.n
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ModelError(f"invalid pair ({i}, {j}) for {n} variables")
    hs = dependence_features(m, (i, j))
    part = partition(hs, (i, j), m.domain)
    print(f"pair: ({i}, {j})")
    print(f"input ({len(hs)}):")
    for h in hs:
        print(f"  {h}  |X|={fc_cardinality(h, m.domain)}")
    print(f"partition ({len(part.members)}):")
    for p in part.members:
        print(f"  {p}  |X|={fc_cardinality(p, m.domain)}")
    print(f"coverage: {part.cardinality(m.domain)}")
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.card < 2 or args.vars < 2:
        raise UsageError("--vars and --card must be >= 2")
    if args.features < 0:
        raise UsageError("--features must be >= 0")
    max_arity = args.vars if args.max_arity is None else args.max_arity
    if not 1 <= max_arity <= args.vars:
        raise UsageError("--max-arity must be between 1 and --vars")
    m = random_model(
        DomainSpec((args.card,) * args.vars), args.features, max_arity, random.Random(args.seed)
    )
    _write(args.out, serialize_model(m) + "\n")
    return EXIT_OK


def cmd_census(args) -> int:
    if args.card < 2 or args.vars < 2:
        raise UsageError("--vars and --card must be >= 2")
    rows = oracle.complete_triplet_census(DomainSpec((args.card,) * args.vars))
    print("|U|\t|W|\tassertions")
    for (u, w), count in rows.items():
        print(f"{u}\t{w}\t{count}")
    print(f"total\t\t{sum(rows.values())}")
    return EXIT_OK


def cmd_reference(args) -> int:
    m = evaluation.make_reference_model(args.others, args.magnitude, args.seed, args.card)
    _write(args.out, json.dumps(model_to_dict(m)) + "\n")
    return EXIT_OK


def cmd_perturb(args) -> int:
    m = load_model(args.model)
    if args.mode == "fn" and args.count > len(m.features):
        raise UsageError(f"--count {args.count} exceeds the {len(m.features)} features")
    out = evaluation.perturb(m, args.mode, args.count, args.seed)
    _write(args.out, serialize_model(out) + "\n")
    return EXIT_OK


def cmd_kl_experiment(args) -> int:
    ref = load_model(args.reference)
    if ref.weights is None:
        raise ModelError("reference model needs weights")
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    modes = ("fp", "fn") if args.mode == "both" else (args.mode,)
    params = evaluation.FitParams(args.tol, args.max_iters, args.sample_size)
    records = evaluation.run_kl_experiment(
        ref, args.n, args.seed, params, modes, workers=args.workers
    )
    _write(args.out, evaluation.records_to_csv(records))
    summary = evaluation.summarize(records)
    for mode in modes:
        s = summary.get(mode)
        if s is None:
            print(f"{mode}: n=0")
        else:
            print(f"{mode}: n={s['n']} spearman={s['spearman']:.4f} max_kl={s['max_kl']:.3e}")
    return EXIT_OK


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="llstruct", description="Compare independence structures of log-linear models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compare", help="FC confusion matrix and distance between two models")
    c.add_argument("model_a")
    c.add_argument("model_b")
    c.add_argument("--oracle", action="store_true", help="use brute-force enumeration")
    c.add_argument("--check", action="store_true", help="run both paths and report MATCH/MISMATCH")
    c.add_argument("--per-pair", action="store_true")
    c.add_argument("--max-union-terms", type=int, default=None)
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.add_argument("--workers", type=int, default=1)
    c.set_defaults(func=cmd_compare)

    c = sub.add_parser("partition", help="dump the partition model of one pair")
    c.add_argument("model")
    c.add_argument("--pair", type=int, nargs=2, required=True, metavar=("I", "J"))
    c.set_defaults(func=cmd_partition)

    c = sub.add_parser("gen", help="write a random model")
    c.add_argument("--vars", type=int, required=True)
    c.add_argument("--card", type=int, default=2)
    c.add_argument("--features", type=int, required=True)
    c.add_argument("--max-arity", type=int, default=None)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_gen)

    c = sub.add_parser("census", help="count all contextualized triplets")
    c.add_argument("--vars", type=int, required=True)
    c.add_argument("--card", type=int, default=2)
    c.set_defaults(func=cmd_census)

    c = sub.add_parser("reference", help="write the two-context reference model")
    c.add_argument("--others", type=int, default=5)
    c.add_argument("--card", type=int, default=2)
    c.add_argument("--magnitude", type=float, default=1.0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_reference)

    c = sub.add_parser("perturb", help="add false positives or remove dependencies")
    c.add_argument("model")
    c.add_argument("--mode", choices=("fp", "fn"), required=True)
    c.add_argument("--count", type=int, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_perturb)

    c = sub.add_parser("kl-experiment", help="KL divergence vs structural error experiment")
    c.add_argument("reference")
    c.add_argument("--n", type=int, default=30)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--mode", choices=("fp", "fn", "both"), default="both")
    c.add_argument("--out", default="-")
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--max-iters", type=int, default=10_000)
    c.add_argument("--sample-size", type=int, default=None,
                   help="fit against a multinomial sample of this size instead of the exact table")
    c.add_argument("--workers", type=int, default=1)
    c.set_defaults(func=cmd_kl_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return args.func(args)
    except UsageError as exc:
        print(f"llstruct: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, DomainMismatch, OSError) as exc:
        print(f"llstruct: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CapExceeded, oracle.GuardExceeded, evaluation.GuardExceeded) as exc:
        print(f"llstruct: {exc}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
