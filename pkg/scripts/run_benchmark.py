#!/usr/bin/env python3
"""Run every canonical task/feature pipeline on one corpus and print the
summary table.

Synthesizes a fresh session corpus unless --corpus points at an existing
directory.  Every pipeline is seeded, so repeated runs print identical
tables.

    python3 scripts/run_benchmark.py --runs 3 --seed 11
    python3 scripts/run_benchmark.py --corpus out/session01 --out table.txt
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bcikit.core import Task
from bcikit.evaluate import render_table, report_to_json, run_task_pipeline
from bcikit.io import load_corpus
from bcikit.synth import SynthConfig, gen_corpus

BENCH_JOBS = (
    (Task.SSVEP, "spectrogram"),
    (Task.MOTOR_ACTIVITY, "csp"),
    (Task.MOTOR_IMAGERY, "csp"),
    (Task.LARYNGEAL_ACTIVITY, "csp"),
    (Task.LARYNGEAL_IMAGERY, "csp"),
    (Task.LARYNGEAL_ACTIVITY, "spectrogram"),
    (Task.LARYNGEAL_IMAGERY, "spectrogram"),
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--corpus", default=None, help="existing corpus directory")
    parser.add_argument("--runs", type=int, default=3, help="runs to synthesize")
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--snr", type=float, default=1.0)
    parser.add_argument("--out", default=None, help="write the table here too")
    parser.add_argument(
        "--reports-dir", default=None, help="also dump one report JSON per row"
    )
    args = parser.parse_args()

    if args.corpus is not None:
        corpus = load_corpus(args.corpus)
    else:
        tasks = tuple(dict.fromkeys(task for task, _ in BENCH_JOBS))
        corpus = gen_corpus(
            SynthConfig(seed=args.seed, snr=args.snr), tasks=tasks, runs=args.runs
        )

    reports = []
    for task, mode in BENCH_JOBS:
        report = run_task_pipeline(corpus, task, feature_mode=mode, seed=args.seed)
        reports.append(report)
        print(
            f"  {task.value:20s} {mode:12s} test {report.test_acc:.3f} "
            f"(nir {report.nir:.3f}, {report.n_test_groups} groups)",
            file=sys.stderr,
        )

    table = render_table(reports)
    print(table, end="")
    if args.out is not None:
        Path(args.out).write_text(table, encoding="utf-8")
    if args.reports_dir is not None:
        out = Path(args.reports_dir)
        out.mkdir(parents=True, exist_ok=True)
        for report in reports:
            name = f"{report.task.value}_{report.feature_mode.value}.json"
            (out / name).write_text(report_to_json(report), encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
