#!/usr/bin/env python3
"""Fit CSP on one task's training split and export the spatial patterns.

Writes <prefix>.csv (one row per channel, one column per kept component) and
<prefix>.json (the full model, reloadable with bcikit.csp.load_csp).  The
patterns are the columns of the pseudo-inverse of the filter matrix, i.e. the
forward projections suitable for topographic inspection.

    python3 scripts/export_csp_patterns.py --corpus out/session01 \
        --task motor_imagery --prefix out/motor_csp
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bcikit.config import load_config
from bcikit.core import Task
from bcikit.csp import fit_csp, patterns_to_csv, save_csp
from bcikit.evaluate import corpus_epochs, group_split
from bcikit.io import load_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--task", default=Task.MOTOR_IMAGERY.value,
                        choices=[t.value for t in Task])
    parser.add_argument("--components", type=int, default=4)
    parser.add_argument("--shrinkage", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--config", default=None)
    parser.add_argument("--prefix", required=True, help="output path prefix")
    args = parser.parse_args()

    config = load_config(args.config)
    corpus = load_corpus(args.corpus)
    epochs = corpus_epochs(corpus, Task(args.task), config)
    split = group_split(epochs.group_labels(), config.split.train_ratio, args.seed)
    model = fit_csp(
        epochs.subset(split.train_groups), args.components, args.shrinkage
    )

    prefix = Path(args.prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    prefix.with_suffix(".csv").write_text(patterns_to_csv(model), encoding="utf-8")
    save_csp(model, prefix.with_suffix(".json"))
    lams = ", ".join(f"{v:.3f}" for v in model.eigenvalues)
    print(f"fit on {len(split.train_groups)} training groups; eigenvalues [{lams}]")
    print(f"wrote {prefix.with_suffix('.csv')} and {prefix.with_suffix('.json')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
