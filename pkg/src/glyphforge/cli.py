"""Command-line entry point: extract / train / eval / crossval / predict / synth.

Exit codes: 0 success, 1 domain error (training/evaluation), 2 usage or
IO error. GLYPHFORGE_SEED sets the default --seed for every subcommand.
"""

import argparse
import os
import sys

import numpy as np

from . import dataset_io, ensemble, evaluation, mlp, pipeline
from .errors import (
    CorpusError,
    FormatError,
    GlyphforgeError,
    IoError,
)


def _default_seed() -> int:
    return int(os.environ.get("GLYPHFORGE_SEED", "0"))


def _add_seed(parser):
    parser.add_argument(
        "--seed", type=int, default=_default_seed(), help="RNG seed (default: $GLYPHFORGE_SEED or 0)"
    )


def _add_train_flags(parser):
    parser.add_argument("--hidden", type=int, default=None, help="hidden layer size (default 50 chain / 45 moment)")
    parser.add_argument("--lr", type=float, default=0.8, help="learning rate")
    parser.add_argument("--momentum", type=float, default=0.7, help="momentum term")
    parser.add_argument("--epochs", type=int, default=1000, help="max training epochs")
    parser.add_argument("--target-mse", type=float, default=1e-3, help="early-stop epoch MSE")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glyphforge",
        description="Handwritten-glyph recognition: chain-code and moment "
        "features, MLP classifiers, weighted-majority fusion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic benchmark corpus")
    p.add_argument("--classes", type=int, default=20)
    p.add_argument("--per-class", type=int, default=75)
    p.add_argument("--out", required=True, help="corpus output directory")
    _add_seed(p)

    p = sub.add_parser("extract", help="extract a feature table from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--extractor", choices=("chain200", "moment63"), required=True)
    p.add_argument("--out", required=True, help="feature CSV path")
    p.add_argument("--normalize", action="store_true", help="normalize chain histograms by total move count")
    p.add_argument("--log-moments", action="store_true", help="signed-log scale moment features")
    p.add_argument("--strict", action="store_true", help="fail on malformed images instead of skipping")
    p.add_argument("--dump-stages", metavar="DIR", help="write intermediate binary images as PGM")

    p = sub.add_parser("train", help="train an MLP (or an ensemble) from feature tables")
    p.add_argument("--features", required=True, help="feature CSV")
    p.add_argument("--features2", help="second feature CSV (ensemble mode)")
    p.add_argument("--ensemble", action="store_true", help="train both MLPs plus fusion weights")
    p.add_argument("--calibration-fraction", type=float, default=0.2)
    p.add_argument("--out", required=True, help="model file path")
    _add_train_flags(p)
    _add_seed(p)

    p = sub.add_parser("eval", help="evaluate a trained model on a feature table")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--features2", help="second feature CSV (ensemble models)")
    p.add_argument("--report", help="write the text report to this path too")
    p.add_argument("--confusion-csv", help="write the confusion matrix as CSV")

    p = sub.add_parser("crossval", help="k-fold cross-validation on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument(
        "--extractor",
        choices=("chain200", "moment63", "ensemble"),
        default="ensemble",
    )
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--log-moments", action="store_true")
    p.add_argument("--calibration-fraction", type=float, default=0.2)
    p.add_argument("--out", help="write the structured report to this path")
    _add_train_flags(p)
    _add_seed(p)

    p = sub.add_parser("predict", help="rank classes for one image or a directory")
    p.add_argument("--model", required=True)
    p.add_argument("--image", help="single PGM image")
    p.add_argument("--dir", help="directory of PGM images")
    p.add_argument("-k", type=int, default=5, help="ranks to print")
    return parser


def _load_any_model(path):
    with open(path) as fh:
        magic = fh.readline().strip()
    if magic == ensemble.ENSEMBLE_MAGIC:
        return ensemble.load_ensemble(path)
    return mlp.load_model(path)


def _rank_image(model, image):
    if isinstance(model, ensemble.EnsembleModel):
        x1 = pipeline.extract_features(
            image, "chain200",
            normalize=model.model1.extractor_flags.get("normalize", False),
        )
        x2 = pipeline.extract_features(
            image, "moment63",
            log_moments=model.model2.extractor_flags.get("log_moments", False),
        )
        return model.predict(x1, x2)
    x = pipeline.extract_features(
        image,
        model.extractor_id,
        normalize=model.extractor_flags.get("normalize", False),
        log_moments=model.extractor_flags.get("log_moments", False),
    )
    return mlp.predict(model, x)


def cmd_synth(args) -> int:
    samples = dataset_io.synth_corpus(args.classes, args.per_class, seed=args.seed)
    dataset_io.save_corpus(samples, args.out)
    print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def cmd_extract(args) -> int:
    samples = dataset_io.load_corpus(args.corpus, strict=args.strict)
    if args.dump_stages:
        os.makedirs(args.dump_stages, exist_ok=True)
        for s in samples:
            stages = pipeline.preprocess_stages(s.image)
            stem = s.id.replace("/", "_").removesuffix(".pgm")
            for name, img in stages.items():
                dataset_io.write_binary_pgm(
                    os.path.join(args.dump_stages, f"{stem}.{name}.pgm"), img
                )
    table = pipeline.extract_table(
        samples, args.extractor, normalize=args.normalize, log_moments=args.log_moments
    )
    dataset_io.save_features(table, args.out)
    print(f"extracted {len(table.rows)} x {table.dim} features to {args.out}")
    return 0


def cmd_train(args) -> int:
    table = dataset_io.load_features(args.features)
    labels = sorted({lab for _, lab, _ in table.rows})
    kwargs = dict(
        hidden_size=args.hidden,
        learning_rate=args.lr,
        momentum=args.momentum,
        max_epochs=args.epochs,
        target_mse=args.target_mse,
    )
    if args.ensemble:
        if not args.features2:
            raise CorpusError("--ensemble needs --features2")
        table2 = dataset_io.load_features(args.features2)
        ens, rep1, rep2 = pipeline.train_ensemble_on_tables(
            table,
            table2,
            labels,
            calibration_fraction=args.calibration_fraction,
            seed=args.seed,
            **kwargs,
        )
        ensemble.save_ensemble(ens, args.out)
        w = ens.weights
        print(f"member 1 ({table.extractor_id}): final MSE {rep1.final_mse:.6f}, calibration accuracy {w.d1:.4f}")
        print(f"member 2 ({table2.extractor_id}): final MSE {rep2.final_mse:.6f}, calibration accuracy {w.d2:.4f}")
        print(f"fusion weights: w1={w.w1:.4f} w2={w.w2:.4f}")
    else:
        model, report = pipeline.train_mlp_on_table(table, labels, seed=args.seed, **kwargs)
        mlp.save_model(model, args.out)
        print(f"trained {report.epochs_run} epochs, final MSE {report.final_mse:.6f}")
    print(f"wrote {args.out}")
    return 0


def _eval_tables(model, table, table2):
    if isinstance(model, ensemble.EnsembleModel):
        if table2 is None:
            raise CorpusError("ensemble evaluation needs --features2")
        if [r[0] for r in table.rows] != [r[0] for r in table2.rows]:
            raise FormatError("feature tables do not cover the same samples")
        rankings = [
            [lab for lab, _ in model.predict(v1, v2)]
            for (_, _, v1), (_, _, v2) in zip(table.rows, table2.rows)
        ]
        labels = model.labels
    else:
        rankings = [[lab for lab, _ in mlp.predict(model, vec)] for _, _, vec in table.rows]
        labels = model.labels
    truth = [lab for _, lab, _ in table.rows]
    return evaluation.evaluate_rankings(rankings, truth, labels)


def cmd_eval(args) -> int:
    model = _load_any_model(args.model)
    table = dataset_io.load_features(args.features)
    table2 = dataset_io.load_features(args.features2) if args.features2 else None
    report = _eval_tables(model, table, table2)
    text = evaluation.format_report(report)
    print(text)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    if args.confusion_csv:
        with open(args.confusion_csv, "w") as fh:
            fh.write(evaluation.confusion_csv(report))
    return 0


def cmd_crossval(args) -> int:
    samples = dataset_io.load_corpus(args.corpus)
    labels = [s.label for s in samples]
    class_table = sorted(set(labels))
    table1 = pipeline.extract_table(samples, "chain200", normalize=args.normalize)
    table2 = pipeline.extract_table(samples, "moment63", log_moments=args.log_moments)
    plan = evaluation.SplitPlan(mode="kfold", folds=args.folds, seed=args.seed)
    kwargs = dict(
        hidden_size=args.hidden,
        learning_rate=args.lr,
        momentum=args.momentum,
        max_epochs=args.epochs,
        target_mse=args.target_mse,
    )

    def subset(table, idxs):
        return dataset_io.FeatureTable(table.extractor_id, table.dim, [table.rows[i] for i in idxs])

    def fold_fn(train_idx, test_idx):
        if args.extractor == "ensemble":
            ens, _, _ = pipeline.train_ensemble_on_tables(
                subset(table1, train_idx),
                subset(table2, train_idx),
                class_table,
                calibration_fraction=args.calibration_fraction,
                seed=args.seed,
                **kwargs,
            )
            return [
                [lab for lab, _ in ens.predict(table1.rows[i][2], table2.rows[i][2])]
                for i in test_idx
            ]
        table = table1 if args.extractor == "chain200" else table2
        model, _ = pipeline.train_mlp_on_table(
            subset(table, train_idx), class_table, seed=args.seed, **kwargs
        )
        return [[lab for lab, _ in mlp.predict(model, table.rows[i][2])] for i in test_idx]

    report = evaluation.cross_validate(labels, plan, fold_fn)
    lines = [f"crossval extractor={args.extractor} folds={args.folds} seed={args.seed}"]
    for f, rep in enumerate(report.fold_reports):
        accs = " ".join(
            f"top{k}={rep.top_k_accuracy[k]!r}" for k in evaluation.TOP_KS
        )
        lines.append(f"fold {f}: n={rep.n_samples} {accs}")
    mean = " ".join(f"top{k}={report.mean_top_k[k]!r}" for k in evaluation.TOP_KS)
    std = " ".join(f"top{k}={report.std_top_k[k]!r}" for k in evaluation.TOP_KS)
    lines.append(f"mean: {mean}")
    lines.append(f"stddev: {std}")
    text = "\n".join(lines)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return 0


def cmd_predict(args) -> int:
    model = _load_any_model(args.model)
    if bool(args.image) == bool(args.dir):
        raise CorpusError("predict needs exactly one of --image or --dir")
    paths = (
        [args.image]
        if args.image
        else sorted(
            os.path.join(args.dir, n)
            for n in os.listdir(args.dir)
            if n.endswith(".pgm")
        )
    )
    for path in paths:
        image = dataset_io.read_pgm(path)
        ranked = _rank_image(model, image)[: args.k]
        listing = "  ".join(f"{lab}:{score:.4f}" for lab, score in ranked)
        print(f"{path}  {listing}")
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "extract": cmd_extract,
    "train": cmd_train,
    "eval": cmd_eval,
    "crossval": cmd_crossval,
    "predict": cmd_predict,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (CorpusError, IoError, FormatError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GlyphforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
