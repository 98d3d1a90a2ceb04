"""Command-line interface.

Each subcommand does one step; calibration recipes are pipelines of them.
For example temperature scaling fitted on the target language's own dev data
followed by evaluation::

    xlcalib fit-temp --dev sw.dev.jsonl --out sw.temp.json
    xlcalib apply --test sw.test.jsonl --model sw.temp.json --out sw.ts.jsonl
    xlcalib ece --test sw.ts.jsonl --out reports/sw.json

Exit status is 0 on success, 2 on usage errors and 1 on data or runtime
errors. Logs go to stderr, results to stdout or ``--out``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from . import io
from .core import BinningSpec, aggregate, calibration_report
from .langfeatures import build_vocab, correlate_factors, subword_overlap
from .smoothing import FEWSHOT_BUDGET, LinearSoftmaxModel, SmoothingSpec, TrainConfig, TrainingDivergedError, \
    continue_finetune, train
from .synthetic import generate_synthetic
from .temperature import TemperatureModel, apply_temperature, fit_temperature

logger = logging.getLogger("xlcalib.cli")


def _fmt(x: float, percent: bool = False) -> str:
    return f"{100 * x:.2f}" if percent else repr(float(x))


def _binning_args(p):
    p.add_argument("--bins", type=int, default=10, help="number of bins (default 10)")
    p.add_argument("--scheme", choices=["equal-width", "equal-mass"], default="equal-width")
    p.add_argument("--temp", type=float, default=1.0, help="temperature applied before the softmax")
    p.add_argument("--language", help="language tag (default: from the file)")


def _train_args(p, alpha_default):
    p.add_argument("--alpha", type=float, default=alpha_default, help="label smoothing alpha")
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--optimizer", choices=["adam", "gd"], default="adam")
    p.add_argument("--out", required=True, help="model JSON path")


def _config(args) -> TrainConfig:
    return TrainConfig(learning_rate=args.lr, epochs=args.epochs, batch_size=args.batch_size, seed=args.seed,
                       optimizer=args.optimizer, smoothing=SmoothingSpec(args.alpha))


def _report_for(args):
    pset = io.load_predictions(args.test, args.language)
    spec = BinningSpec(args.bins, args.scheme)
    report = calibration_report(pset, spec, args.temp)
    config = {"test": Path(args.test).name, "bins": args.bins, "scheme": args.scheme, "temperature": args.temp}
    return report, config


def cmd_ece(args):
    report, config = _report_for(args)
    print(f"language\t{report.language}")
    print(f"n\t{report.n}")
    print(f"ece\t{_fmt(report.ece, args.percent)}")
    print(f"accuracy\t{_fmt(report.accuracy, args.percent)}")
    print(f"nll\t{_fmt(report.nll)}")
    if args.out:
        io.save_report(report, args.out, config)


def cmd_reliability(args):
    report, _ = _report_for(args)
    io.export_reliability(report, args.csv, args.svg)
    print(f"ece\t{_fmt(report.ece)}")


def cmd_fit_temp(args):
    dev = io.load_predictions(args.dev, args.language)
    model = fit_temperature(dev, init_T=args.init, max_iter=args.max_iter, tol=args.tol)
    if not model.converged:
        logger.warning("temperature fit did not converge after %d iterations", model.iterations)
    Path(args.out).write_text(model.to_json(), encoding="utf-8")
    print(f"T\t{_fmt(model.T)}")


def cmd_apply(args):
    pset = io.load_predictions(args.test, args.language)
    model = TemperatureModel.from_json(Path(args.model).read_text(encoding="utf-8"))
    io.save_predictions(apply_temperature(pset, model), args.out)


def cmd_train(args):
    data = io.load_features(args.data, args.classes, args.language)
    model = train(data, _config(args))
    Path(args.out).write_text(model.to_json(), encoding="utf-8")


def cmd_finetune(args):
    model = LinearSoftmaxModel.from_json(Path(args.model).read_text(encoding="utf-8"))
    data = io.load_features(args.data, model.num_classes, args.language)
    budget = args.budget if args.budget > 0 else None
    if budget is not None and len(data) > budget:
        logger.info("using the first %d of %d few-shot examples", budget, len(data))
    model = continue_finetune(model, data, _config(args), budget=budget)
    Path(args.out).write_text(model.to_json(), encoding="utf-8")


def cmd_predict(args):
    model = LinearSoftmaxModel.from_json(Path(args.model).read_text(encoding="utf-8"))
    data = io.load_features(args.data, model.num_classes, args.language)
    io.save_predictions(model.predictions(data), args.out)


def cmd_swo(args):
    with open(args.corpus_a, encoding="utf-8") as a, open(args.corpus_b, encoding="utf-8") as b:
        va = build_vocab(a, args.min_count, source=Path(args.corpus_a).name)
        vb = build_vocab(b, args.min_count, source=Path(args.corpus_b).name)
    print(f"swo\t{_fmt(subword_overlap(va, vb))}")


def cmd_correlate(args):
    reports = io.load_report_dir(args.reports)
    profiles = io.load_profiles(args.profiles, args.syn, args.corpora, args.min_count)
    results = correlate_factors({lang: r.ece for lang, r in reports.items()}, profiles, args.pivot)
    for factor, res in results.items():
        value = _fmt(res.r) if res.available else f"unavailable ({res.reason})"
        print(f"{factor}\t{value}\tn={len(res.languages)}\tdropped={len(res.dropped)}")


def cmd_report(args):
    reports = io.load_report_dir(args.reports)
    agg = aggregate(reports, args.pivot)
    print(f"ECE({agg.pivot})\t{_fmt(agg.pivot_ece, args.percent)}")
    print(f"mean ECE over {len(agg.other_languages)} languages\t{_fmt(agg.mean_ece, args.percent)}")
    print(f"max ECE\t{_fmt(agg.max_ece, args.percent)} ({agg.max_language})")
    if args.out:
        io.save_report(agg, args.out, {"pivot": args.pivot})


def cmd_synth(args):
    feats, preds = generate_synthetic(args.n, args.k, args.dim, args.shift, args.scale, args.seed,
                                      args.task_seed, args.language)
    io.save_predictions(preds, args.out)
    if args.features:
        io.save_features(feats, args.features)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xlcalib", description="Calibration analysis of classifier predictions across languages.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ece", help="ECE, accuracy and NLL of a prediction file")
    p.add_argument("--test", required=True)
    _binning_args(p)
    p.add_argument("--percent", action="store_true", help="show ECE and accuracy as percentages")
    p.add_argument("--out", help="write the report JSON here")
    p.set_defaults(func=cmd_ece)

    p = sub.add_parser("reliability", help="export reliability diagram data")
    p.add_argument("--test", required=True)
    p.add_argument("--csv", required=True)
    p.add_argument("--svg")
    _binning_args(p)
    p.set_defaults(func=cmd_reliability)

    p = sub.add_parser("fit-temp", help="fit a temperature on dev predictions")
    p.add_argument("--dev", required=True)
    p.add_argument("--init", type=float, default=1.5)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--language")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit_temp)

    p = sub.add_parser("apply", help="divide logits by a fitted temperature")
    p.add_argument("--test", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--language")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("train", help="train a linear softmax classifier")
    p.add_argument("--data", required=True, help="CSV with header label,f0,f1,...")
    p.add_argument("--classes", type=int, help="number of classes (default: max label + 1)")
    p.add_argument("--language")
    _train_args(p, alpha_default=0.1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("finetune", help="continue training on few-shot target data")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--budget", type=int, default=FEWSHOT_BUDGET, help="max examples used; 0 for all")
    p.add_argument("--language")
    _train_args(p, alpha_default=0.0)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("predict", help="write a trained model's logits as a prediction file")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--language")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("swo", help="subword overlap of two corpora")
    p.add_argument("--corpus-a", required=True)
    p.add_argument("--corpus-b", required=True)
    p.add_argument("--min-count", type=int, default=10)
    p.set_defaults(func=cmd_swo)

    p = sub.add_parser("correlate", help="Pearson r of per-language ECE with SIZE, SYN and SWO")
    p.add_argument("--reports", required=True, help="directory of report JSON files")
    p.add_argument("--profiles", help="CSV language,size_tokens")
    p.add_argument("--syn", help="CSV language,f0,f1,... of syntactic features")
    p.add_argument("--corpora", help="directory of <language>.txt corpora")
    p.add_argument("--min-count", type=int, default=10)
    p.add_argument("--pivot", default="en")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("report", help="pivot ECE, mean and max over the other languages")
    p.add_argument("--reports", required=True)
    p.add_argument("--pivot", default="en")
    p.add_argument("--percent", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="generate synthetic prediction and feature files")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--scale", type=float, default=1.0, help="logit scale (true temperature)")
    p.add_argument("--shift", type=float, default=0.0, help="feature domain shift")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--task-seed", type=int, default=0)
    p.add_argument("--language", default="")
    p.add_argument("--out", required=True, help="prediction JSONL path")
    p.add_argument("--features", help="also write the feature CSV here")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    pkg_logger = logging.getLogger("xlcalib.cli")
    pkg_logger.addHandler(handler)
    pkg_logger.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (ValueError, KeyError, OSError, TrainingDivergedError) as exc:
        logger.error("%s", exc)
        return 1
    finally:
        pkg_logger.removeHandler(handler)
    return 0


if __name__ == "__main__":
    sys.exit(main())
