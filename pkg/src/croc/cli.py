"""Command-line front end.

    croc simulate --preset setting1 --seed 7 --out data/run7
    croc analyze --input data/run7.csv --truth data/run7.truth.json --score oracle --out report.json
    croc coverage --preset setting1 --score oracle --reps 300 --out coverage.json

Exit codes: 0 success, 2 validation error, 3 I/O error, 4 enumeration cap.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .errors import EnumerationTooLarge, ValidationError
from .engine import ALGORITHMS, run
from .simgen import PRESETS, generate
from .study import SCORE_NAMES, default_partition, make_score, run_coverage

log = logging.getLogger("croc")

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_CAP = 0, 2, 3, 4


def _spec_from_args(args):
    overrides = {}
    for name in ("n", "K", "early", "late"):
        if getattr(args, name, None) is not None:
            overrides[name] = getattr(args, name)
    if getattr(args, "root", None) is not None:
        overrides["root"] = args.root - 1
    if getattr(args, "delta0", None) is not None:
        overrides["delta_root"] = args.delta0
    if getattr(args, "delta1", None) is not None:
        overrides["delta_other"] = args.delta1
    if getattr(args, "rho", None) is not None:
        overrides["rho"] = args.rho
    return PRESETS[args.preset](**overrides)


def cmd_simulate(args):
    spec = _spec_from_args(args).with_seed(args.seed)
    X, xi, model, _ = generate(spec)
    stem = Path(args.out)
    stem.parent.mkdir(parents=True, exist_ok=True)
    panel_path = stem.with_suffix(".json") if args.format == "json" else stem.with_suffix(".csv")
    if args.format == "json":
        io.write_panel_json(X, panel_path)
    else:
        io.write_panel_csv(X, panel_path, header=args.header)
    truth_path = stem.with_suffix(".truth.json")
    io.write_json(io.truth_record(spec, xi, model), truth_path)
    print(f"wrote {panel_path} and {truth_path}")
    return EXIT_OK


def _resolve_score(args, X, truth):
    name = args.score
    if name.startswith("logits:") or args.logits:
        path = args.logits or name.split(":", 1)[1]
        logits = io.read_logits_csv(path)
        if logits.n != X.n or logits.K != X.K:
            raise ValidationError(f"logit table is {logits.n}x{logits.K}, panel is {X.n}x{X.K}")
        return logits, make_score("logits", K=X.K)
    model = xi = None
    if truth is not None:
        model = io.model_from_truth(truth) if "model" in truth else None
        xi = truth.get("xi")
    return X, make_score(name, model, xi, X.K)


def cmd_analyze(args):
    X = io.read_panel(args.input, header=args.header)
    truth = io.read_truth(args.truth) if args.truth else None
    if args.debug_constant:
        args.score = "constant"
    data, S = _resolve_score(args, X, truth)
    R = io.parse_constraint(args.constraint, X.n, X.K)
    partition = None
    if args.algo == "croc-dep":
        if args.partition:
            partition = io.parse_partition(args.partition, X.K)
        elif truth and "partition" in truth:
            partition = io.parse_partition(";".join(",".join(map(str, g)) for g in truth["partition"]), X.K)
        else:
            raise ValidationError("croc-dep needs --partition (e.g. 1,3,5;2,4,6)")
    res = run(args.algo, data, R, S, args.alpha, args.mc, args.seed, partition=partition,
              n_jobs=args.jobs)
    report = res.to_dict()
    report["input"] = str(args.input)
    report["constraint"] = args.constraint
    if truth is not None and "k_star" in truth:
        report["k_star"] = truth["k_star"]
        report["covered"] = truth["k_star"] in report["confidence_set"]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.format == "csv":
        io.write_report_csv(res, out)
    else:
        io.write_json(report, out)
    log.info("set=%s elapsed=%.3fs", report["confidence_set"], res.elapsed)
    print(f"confidence set: {report['confidence_set']}")
    return EXIT_OK


def cmd_coverage(args):
    if args.reps < 50:
        raise ValidationError(f"coverage studies need --reps >= 50, got {args.reps}")
    spec = _spec_from_args(args)
    partition = io.parse_partition(args.partition, spec.K) if args.partition else None
    if args.algo == "croc-dep" and partition is None:
        partition = default_partition(spec)
    summary = run_coverage(spec, args.score, args.algo, args.alpha, args.mc, args.reps,
                           args.seed, partition, n_jobs=args.jobs)
    summary["preset"] = args.preset
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_json(summary, out)
    print(f"coverage {summary['coverage']:.3f}  mean set size {summary['mean_set_size']:.2f}")
    return EXIT_OK


def _add_common(p):
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--mc", type=int, default=100, help="Monte Carlo draws M (0 = exact)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algo", choices=ALGORITHMS, default="croc")
    p.add_argument("--score", default="oracle",
                   help=f"one of {', '.join(SCORE_NAMES)} or logits:PATH")
    p.add_argument("--partition", help="1-based groups, e.g. 1,3,5;2,4,6")
    p.add_argument("--jobs", type=int, default=1)


def _add_generator(p):
    p.add_argument("--preset", choices=sorted(PRESETS), default="setting1")
    p.add_argument("--n", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--root", type=int, help="1-based root stream")
    p.add_argument("--early", type=int)
    p.add_argument("--late", type=int)
    p.add_argument("--delta0", type=float)
    p.add_argument("--delta1", type=float)
    p.add_argument("--rho", type=float)


def build_parser():
    parser = argparse.ArgumentParser(prog="croc", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a panel and its truth file")
    _add_generator(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output path stem")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--header", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="confidence set for one panel")
    _add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--header", action="store_true", help="CSV input has a header row")
    p.add_argument("--truth")
    p.add_argument("--logits")
    p.add_argument("--constraint", default="one-early:20,50",
                   help="grid | common | one-early:EARLY,LATE | file:PATH")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--debug-constant", action="store_true", help="use a constant score")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("coverage", help="replicated coverage study")
    _add_common(p)
    _add_generator(p)
    p.add_argument("--reps", type=int, default=300)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_coverage)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except EnumerationTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValidationError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
