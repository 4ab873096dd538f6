"""Command line entry point: ``cascade-dtw <subcommand>``.

Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import evaluation, ingest, synth
from .belief import RULES, ConflictError
from .dtw import DtwConfig
from .knn import EvidentialParams, LabeledCorpus, classify_evidential, classify_probabilistic
from .prnet import StructureError, dump_networks, load_networks, validate

EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _gamma(text):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"gamma must be 'auto' or a number, got {text!r}")


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_classifier_args(p, k_required=True):
    p.add_argument("--classifier", choices=["prob", "evid"], default="evid")
    if k_required:
        p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha0", type=float, default=0.95)
    p.add_argument("--beta", type=int, default=1)
    p.add_argument("--gamma", type=_gamma, default="auto")
    p.add_argument("--rule", choices=sorted(RULES), default="dempster")
    p.add_argument("--symmetrize", action="store_true")
    p.add_argument("--distance", choices=["euclidean", "manhattan"], default="euclidean")
    p.add_argument("--discretize", action="store_true", help="binarize arc weights before comparing")


def _add_eval_args(p):
    p.add_argument("--data", required=True)
    p.add_argument("--split", type=float, default=0.9)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stratified", action="store_true")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--report")
    p.add_argument("--format", choices=["json", "table"], default="json")


def build_parser():
    parser = _Parser(prog="cascade-dtw", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="build networks from an event log")
    p.add_argument("--log", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--wf-mode", choices=["reciprocal", "literal"], default="reciprocal")
    p.add_argument("--tree-mode", action="store_true")
    p.add_argument("--stats", action="store_true", help="print per-class statistics")

    p = sub.add_parser("generate", help="generate a synthetic labeled corpus")
    p.add_argument("--profiles", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--merge-prob", type=float, default=0.0)

    p = sub.add_parser("classify", help="classify query networks against a training set")
    p.add_argument("--train", required=True)
    p.add_argument("--query", required=True)
    _add_classifier_args(p)
    p.add_argument("--explain", action="store_true")
    p.add_argument("--format", choices=["json", "table"], default="json")

    p = sub.add_parser("evaluate", help="repeated holdout accuracy")
    _add_classifier_args(p)
    _add_eval_args(p)

    p = sub.add_parser("sweep-k", help="accuracy for several k on paired splits")
    _add_classifier_args(p, k_required=False)
    p.add_argument("--k-values", type=_int_list, default=[1, 3, 5, 7, 9, 11])
    _add_eval_args(p)
    return parser


def _spec(args) -> evaluation.ClassifierSpec:
    try:
        cfg = DtwConfig(element_distance=args.distance, symmetrize=args.symmetrize)
        params = EvidentialParams(args.alpha0, args.beta, args.gamma)
        return evaluation.ClassifierSpec(args.classifier, cfg, params, args.rule)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load(path, discretize=False):
    nets = load_networks(path)
    if discretize:
        nets = [n.discretized() for n in nets]
    return nets


def _emit(text, path=None):
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_ingest(args):
    log = ingest.read_log(args.log)
    labels = [s for s in args.labels.split(",") if s]
    nets = ingest.ingest(log, labels, wf_mode=args.wf_mode, tree_mode=args.tree_mode)
    for n in nets:
        if validate(n):
            raise AssertionError(f"ingested network from {n.source!r} is invalid: {validate(n)}")
    dump_networks(nets, args.out)
    if args.stats:
        print(ingest.dataset_stats(nets).format_table())


def cmd_generate(args):
    profiles = synth.load_profiles(args.profiles)
    corpus = synth.generate(profiles, args.n, args.seed, args.merge_prob)
    dump_networks(corpus.networks, args.out)


def cmd_classify(args):
    spec = _spec(args)
    train = LabeledCorpus(_load(args.train, args.discretize))
    queries = _load(args.query, args.discretize)
    results = []
    for i, q in enumerate(queries):
        if spec.kind == "prob":
            res = classify_probabilistic(q, train, args.k, spec.cfg)
        else:
            res = classify_evidential(q, train, args.k, spec.cfg, spec.params, spec.rule)
        row = res.to_dict() if args.explain else {"predicted": res.predicted, "scores": res.scores}
        row["query_index"] = i
        row["query_source"] = q.source
        results.append(row)
    if args.format == "json":
        print("\n".join(json.dumps(r) for r in results))
        return
    for r in results:
        scores = " ".join(f"{c}={v:.4f}" for c, v in r["scores"].items())
        print(f"query {r['query_index']} ({r['query_source']}): {r['predicted']}  [{scores}]")
        for n in r.get("neighbors", []):
            print(f"    #{n['train_index']:<6} {n['label']:<12} {n['distance']:.6f}")


def _eval_common(args, ks):
    corpus = LabeledCorpus(_load(args.data, args.discretize))
    reports = evaluation.sweep_k(corpus, _spec(args), ks, args.repeats, args.seed, args.split,
                                 args.stratified, args.strict)
    if args.format == "table":
        text = evaluation.format_reports(reports)
    elif len(reports) == 1 and args.command == "evaluate":
        text = json.dumps(reports[0].to_dict(), indent=2)
    else:
        text = json.dumps([r.to_dict() for r in reports], indent=2)
    _emit(text, args.report)


def cmd_evaluate(args):
    _eval_common(args, [args.k])


def cmd_sweep_k(args):
    _eval_common(args, args.k_values)


COMMANDS = {
    "ingest": cmd_ingest,
    "generate": cmd_generate,
    "classify": cmd_classify,
    "evaluate": cmd_evaluate,
    "sweep-k": cmd_sweep_k,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"cascade-dtw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"cascade-dtw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"cascade-dtw: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (OSError, ValueError, StructureError, ConflictError, TypeError) as exc:
        print(f"cascade-dtw: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
