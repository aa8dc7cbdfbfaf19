"""Command line entry points for the session-analysis stage flow.

Every subcommand shares the same flag vocabulary (--config, --seed, --task,
--feature-mode, --out).  Failures exit nonzero with one machine-readable
JSON line on stderr: {"error": ..., "message": ...}.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .classifiers import (
    FeatureMatrix,
    ModelFamily,
    group_majority_accuracy,
    save_model,
    select_best,
    train,
)
from .config import load_config
from .core import Task
from .csp import fit_csp, save_csp
from .evaluate import (
    FeatureMode,
    build_feature_matrix,
    corpus_epochs,
    group_cv_folds,
    group_split,
    render_table,
    report_from_json,
    report_to_json,
    resolve_feature_mode,
    run_task_pipeline,
)
from .io import (
    load_corpus,
    load_features,
    load_markers,
    load_recording,
    save_corpus,
    save_features,
    save_markers,
    save_recording,
)
from .preprocess import clean_with_markers
from .recorder import record_session
from .synth import TASK_ORDER, SynthConfig, gen_background, gen_corpus


def _parse_tasks(raw: str | None) -> tuple[Task, ...] | None:
    if raw is None:
        return None
    return tuple(Task(token.strip()) for token in raw.split(",") if token.strip())


def _cmd_synth(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    synth_cfg = SynthConfig(
        seed=args.seed,
        snr=args.snr,
        wifi_wavelets=args.wifi_wavelets,
        noisy_channel=args.noisy_channel,
    )
    corpus = gen_corpus(
        synth_cfg,
        tasks=_parse_tasks(args.tasks),
        runs=args.runs,
        trials_per_task=args.trials,
    )
    save_corpus(
        corpus,
        args.out,
        meta={
            "config_sha256": config.sha256(),
            "seed": args.seed,
            "snr": args.snr,
        },
    )
    return 0


def _cmd_preprocess(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    rec = load_recording(args.in_rec)
    log = load_markers(args.markers)
    cleaned, shifted = clean_with_markers(rec, log, config.filter)
    save_recording(cleaned, args.out_rec)
    save_markers(shifted, args.out_markers)
    return 0


def _split_feature_matrices(args: argparse.Namespace):
    """Shared front half of features/evaluate: clean, slice, split, featurize."""
    config = load_config(args.config)
    task = Task(args.task)
    mode = resolve_feature_mode(task, args.feature_mode)
    corpus = load_corpus(args.corpus)
    epoch_set = corpus_epochs(corpus, task, config)
    labels = epoch_set.group_labels()
    split = group_split(labels, config.split.train_ratio, args.seed)
    train_epochs = epoch_set.subset(split.train_groups)
    test_epochs = epoch_set.subset(split.test_groups)
    csp_model = None
    if mode is FeatureMode.CSP:
        csp_model = fit_csp(train_epochs, config.csp.n_components, config.csp.shrinkage)
    train_fm = build_feature_matrix(train_epochs, mode, config, csp_model)
    test_fm = build_feature_matrix(test_epochs, mode, config, csp_model)
    return config, task, mode, train_fm, test_fm, csp_model


def _cmd_features(args: argparse.Namespace) -> int:
    config, task, mode, train_fm, test_fm, csp_model = _split_feature_matrices(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for role, fm in (("train", train_fm), ("test", test_fm)):
        save_features(
            fm.rows,
            [l.value for l in fm.labels],
            list(fm.group_ids),
            out / f"{role}.bcifeat",
            meta={
                "config_sha256": config.sha256(),
                "feature_mode": mode.value,
                "role": role,
                "seed": args.seed,
                "task": task.value,
            },
        )
    if csp_model is not None:
        save_csp(csp_model, out / "csp_model.json")
    return 0


def _loadbuild_feature_matrix(path: Path) -> tuple[FeatureMatrix, dict]:
    rows, labels, group_ids, meta = load_features(path)
    return FeatureMatrix(rows=rows, labels=labels, group_ids=group_ids), meta


def _cmd_train(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    features_path = Path(args.features)
    if features_path.is_dir():
        features_path = features_path / "train.bcifeat"
    fm, meta = _loadbuild_feature_matrix(features_path)
    if args.family is not None:
        family = ModelFamily(args.family)
        model = train(fm, family, seed=args.seed)
        cv_acc = None
    else:
        labels_by_group = {}
        for label, gid in zip(fm.labels, fm.group_ids):
            labels_by_group.setdefault(gid, label)
        folds = group_cv_folds(labels_by_group, config.split.cv_folds, args.seed)
        family, model, cv_acc = select_best(fm, folds, config.classifier, seed=args.seed)
    save_model(model, args.out)
    summary = {
        "cv_acc": cv_acc,
        "family": family.value,
        "train_acc": group_majority_accuracy(model, fm),
    }
    print(json.dumps(summary, sort_keys=True, separators=(",", ":")))
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    corpus = load_corpus(args.corpus)
    report = run_task_pipeline(
        corpus,
        Task(args.task),
        feature_mode=args.feature_mode,
        seed=args.seed,
        config=config,
    )
    text = report_to_json(report)
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    reports = []
    for path in args.reports:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"report file not found: {path}")
        reports.append(report_from_json(path.read_text(encoding="utf-8")))
    table = render_table(reports)
    if args.out is None:
        sys.stdout.write(table)
    else:
        Path(args.out).write_text(table, encoding="utf-8")
    return 0


def _cmd_record(args: argparse.Namespace) -> int:
    if args.replay is not None:
        source = load_recording(args.replay)
    else:
        source = gen_background(SynthConfig(seed=args.seed), seconds=args.synth_seconds)

    def announce(host: str, port: int) -> None:
        print(json.dumps({"listening": host, "port": port}, sort_keys=True), flush=True)

    _rec, log = record_session(
        source,
        host=args.host,
        port=args.port,
        out_rec=args.out_rec,
        out_markers=args.out_markers,
        timeout_s=args.timeout,
        on_listen=announce,
    )
    print(json.dumps({"accepted_markers": len(log)}, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcikit", description="Offline EEG yes/no session analysis toolkit."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    task_values = [t.value for t in TASK_ORDER]
    mode_values = [m.value for m in FeatureMode]

    p = sub.add_parser("synth", help="generate a synthetic session corpus")
    p.add_argument("--out", required=True, help="output corpus directory")
    p.add_argument("--config", default=None, help="INI config file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snr", type=float, default=1.0)
    p.add_argument("--tasks", default=None, help="comma-separated task subset")
    p.add_argument("--runs", type=int, default=6)
    p.add_argument("--trials", type=int, default=10, help="trials per task per run")
    p.add_argument("--wifi-wavelets", action="store_true")
    p.add_argument("--noisy-channel", action="store_true")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("preprocess", help="trim, filter, and standardize one recording")
    p.add_argument("--in", dest="in_rec", required=True, help="input .bcirec recording")
    p.add_argument("--markers", required=True, help="input marker log (.jsonl)")
    p.add_argument("--out-rec", required=True)
    p.add_argument("--out-markers", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("features", help="extract split train/test feature files")
    p.add_argument("--corpus", required=True, help="corpus directory")
    p.add_argument("--task", required=True, choices=task_values)
    p.add_argument("--feature-mode", default=None, choices=mode_values)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("train", help="train (or select) a classifier on feature rows")
    p.add_argument("--features", required=True, help="feature directory or train.bcifeat")
    p.add_argument("--family", default=None, choices=[f.value for f in ModelFamily])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="output model JSON")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="end-to-end task pipeline to a report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--task", required=True, choices=task_values)
    p.add_argument("--feature-mode", default=None, choices=mode_values)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None, help="report JSON path (stdout when omitted)")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("report", help="render report JSONs as a summary table")
    p.add_argument("reports", nargs="+", help="report JSON files")
    p.add_argument("--out", default=None, help="table path (stdout when omitted)")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("record", help="record a marker session over TCP")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0, help="0 picks a free port")
    p.add_argument("--replay", default=None, help="recording to replay as sample source")
    p.add_argument("--synth-seconds", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--out-rec", default=None)
    p.add_argument("--out-markers", default=None)
    p.set_defaults(func=_cmd_record)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(json.dumps({"error": "not_found", "message": str(exc)}), file=sys.stderr)
        return 1
    except ValueError as exc:
        print(json.dumps({"error": "invalid_input", "message": str(exc)}), file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": "io_error", "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
