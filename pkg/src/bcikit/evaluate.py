"""Leakage-safe evaluation: grouped splits, grouped CV, majority-vote scoring.

The unit of splitting is the trial group, never the feature row: every row
of a 5 s trial lands on one side of the train/test boundary, and the same
goes for cross-validation folds.  ``evaluate`` additionally refuses to score
rows whose group id appeared in the model's training data, so accidental
leakage fails loudly instead of inflating accuracy.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .classifiers import (
    FeatureMatrix,
    ModelFamily,
    TrainedModel,
    group_majority_accuracy,
    group_majority_votes,
    predict,
    select_best,
)
from .config import PipelineConfig
from .core import OCCIPITAL_CHANNELS, MarkerLog, Recording, Task, Truth
from .csp import epoch_set_csp_features, fit_csp
from .epochs import concat_epoch_sets, slice_epochs
from .preprocess import clean_with_markers
from .spectral import epoch_set_features

Corpus = Sequence[tuple[Recording, MarkerLog]]


class FeatureMode(str, Enum):
    SPECTROGRAM = "spectrogram"
    CSP = "csp"


#: which feature modes make sense per task (first entry is the default)
TASK_FEATURE_MODES: dict[Task, tuple[FeatureMode, ...]] = {
    Task.EYES_OPEN_CLOSED: (FeatureMode.SPECTROGRAM,),
    Task.SSVEP: (FeatureMode.SPECTROGRAM,),
    Task.MOTOR_ACTIVITY: (FeatureMode.CSP,),
    Task.MOTOR_IMAGERY: (FeatureMode.CSP,),
    Task.LARYNGEAL_ACTIVITY: (FeatureMode.CSP, FeatureMode.SPECTROGRAM),
    Task.LARYNGEAL_IMAGERY: (FeatureMode.CSP, FeatureMode.SPECTROGRAM),
}

#: tasks whose spectral signal is occipital; others use every channel
_OCCIPITAL_TASKS = frozenset({Task.EYES_OPEN_CLOSED, Task.SSVEP})


@dataclass(frozen=True)
class GroupSplit:
    """Disjoint train/test group ids plus the seed that produced them."""

    train_groups: tuple[int, ...]
    test_groups: tuple[int, ...]
    seed: int

    def __post_init__(self) -> None:
        train = tuple(int(g) for g in self.train_groups)
        test = tuple(int(g) for g in self.test_groups)
        object.__setattr__(self, "train_groups", train)
        object.__setattr__(self, "test_groups", test)
        if not train or not test:
            raise ValueError("split must leave groups on both sides")
        if set(train) & set(test):
            raise ValueError("train and test groups overlap")


GroupFolds = tuple[tuple[int, ...], ...]


def _classed(labels_by_group: Mapping[int, Truth]) -> tuple[list[int], list[int]]:
    yes = sorted(int(g) for g, t in labels_by_group.items() if Truth(t) is Truth.YES)
    no = sorted(int(g) for g, t in labels_by_group.items() if Truth(t) is Truth.NO)
    return yes, no


def group_split(
    labels_by_group: Mapping[int, Truth],
    train_ratio: float = 0.8,
    seed: int = 0,
) -> GroupSplit:
    """Stratified train/test split over whole groups.

    The train side receives ``floor(train_ratio * n_groups)`` groups overall,
    allocated to the classes by largest remainder of their exact quotas, then
    clamped so each class keeps at least one group on each side.  Shuffling
    is seeded; the same inputs always produce the same split.
    """
    if not (0.0 < train_ratio < 1.0):
        raise ValueError(f"train_ratio must be in (0, 1), got {train_ratio}")
    yes, no = _classed(labels_by_group)
    if len(yes) < 2 or len(no) < 2:
        raise ValueError("need at least 2 groups per class to split")
    rng = np.random.default_rng([int(seed), 101])
    yes = [yes[i] for i in rng.permutation(len(yes))]
    no = [no[i] for i in rng.permutation(len(no))]

    n = len(yes) + len(no)
    train_total = int(np.floor(train_ratio * n))
    quotas = {Truth.YES: train_ratio * len(yes), Truth.NO: train_ratio * len(no)}
    take = {c: int(np.floor(q)) for c, q in quotas.items()}
    leftover = train_total - sum(take.values())
    remainders = sorted(
        quotas, key=lambda c: (quotas[c] - np.floor(quotas[c]), c is Truth.YES), reverse=True
    )
    for c in remainders[:leftover]:
        take[c] += 1
    sizes = {Truth.YES: len(yes), Truth.NO: len(no)}
    for c in (Truth.YES, Truth.NO):
        take[c] = min(max(take[c], 1), sizes[c] - 1)

    train = sorted(yes[: take[Truth.YES]] + no[: take[Truth.NO]])
    test = sorted(yes[take[Truth.YES] :] + no[take[Truth.NO] :])
    return GroupSplit(train_groups=tuple(train), test_groups=tuple(test), seed=int(seed))


def group_cv_folds(
    labels_by_group: Mapping[int, Truth], k: int = 3, seed: int = 0
) -> GroupFolds:
    """Deal groups into k label-stratified folds (seeded, deterministic).

    Folds partition the groups; no group straddles folds.  Every fold must
    end up non-empty, so k cannot exceed the group count, and k=1 is not a
    cross-validation.
    """
    if k < 2:
        raise ValueError(f"cross-validation needs k >= 2, got {k}")
    yes, no = _classed(labels_by_group)
    if k > len(yes) + len(no):
        raise ValueError(f"k={k} exceeds the {len(yes) + len(no)} available groups")
    rng = np.random.default_rng([int(seed), 202])
    yes = [yes[i] for i in rng.permutation(len(yes))]
    no = [no[i] for i in rng.permutation(len(no))]
    folds: list[list[int]] = [[] for _ in range(k)]
    for i, g in enumerate(yes):
        folds[i % k].append(g)
    for i, g in enumerate(no):
        folds[(len(yes) + i) % k].append(g)
    if any(not f for f in folds):
        raise ValueError("a cross-validation fold came out empty; lower k")
    return tuple(tuple(sorted(f)) for f in folds)


@dataclass(frozen=True)
class EvalReport:
    """Outcome of one task pipeline run.

    Group-level accuracies come from majority votes over each trial group's
    rows (ties vote yes).  ``nir`` is the no-information rate: the best
    accuracy available by always answering the test set's most common label.
    Confusion counts groups as ((yes->yes, yes->no), (no->yes, no->no)).
    """

    task: Task
    family: ModelFamily
    test_acc: float
    test_acc_windows: float
    nir: float
    confusion: tuple[tuple[int, int], tuple[int, int]]
    n_test_groups: int
    feature_mode: FeatureMode | None = None
    seed: int | None = None
    train_acc: float | None = None
    train_acc_windows: float | None = None
    cv_acc: float | None = None
    n_train_groups: int | None = None
    config_sha256: str | None = None

    def __post_init__(self) -> None:
        for name in ("test_acc", "test_acc_windows", "nir", "train_acc", "train_acc_windows", "cv_acc"):
            v = getattr(self, name)
            if v is not None and not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        (a, b), (c, d) = self.confusion
        if min(a, b, c, d) < 0 or a + b + c + d != self.n_test_groups:
            raise ValueError("confusion counts must be non-negative and sum to n_test_groups")

    def to_dict(self) -> dict:
        return {
            "config_sha256": self.config_sha256,
            "confusion": [list(r) for r in self.confusion],
            "cv_acc": self.cv_acc,
            "family": self.family.value,
            "feature_mode": self.feature_mode.value if self.feature_mode else None,
            "n_test_groups": self.n_test_groups,
            "n_train_groups": self.n_train_groups,
            "nir": self.nir,
            "seed": self.seed,
            "task": self.task.value,
            "test_acc": self.test_acc,
            "test_acc_windows": self.test_acc_windows,
            "train_acc": self.train_acc,
            "train_acc_windows": self.train_acc_windows,
        }


def report_to_json(report: EvalReport) -> str:
    """Canonical JSON rendering (sorted keys, no whitespace, trailing newline)."""
    return json.dumps(report.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def report_from_json(text: str) -> EvalReport:
    d = json.loads(text)
    return EvalReport(
        task=Task(d["task"]),
        family=ModelFamily(d["family"]),
        test_acc=d["test_acc"],
        test_acc_windows=d["test_acc_windows"],
        nir=d["nir"],
        confusion=tuple(tuple(int(x) for x in row) for row in d["confusion"]),  # type: ignore[arg-type]
        n_test_groups=int(d["n_test_groups"]),
        feature_mode=FeatureMode(d["feature_mode"]) if d.get("feature_mode") else None,
        seed=d.get("seed"),
        train_acc=d.get("train_acc"),
        train_acc_windows=d.get("train_acc_windows"),
        cv_acc=d.get("cv_acc"),
        n_train_groups=d.get("n_train_groups"),
        config_sha256=d.get("config_sha256"),
    )


def evaluate(model: TrainedModel, test: FeatureMatrix, task: Task) -> EvalReport:
    """Score a trained model on held-out rows, aggregated per group.

    Refuses rows whose group id appeared in the model's training data.
    """
    leaked = set(test.group_ids) & set(model.train_group_ids)
    if leaked:
        raise ValueError(
            f"test rows share {len(leaked)} group(s) with the model's training data: "
            f"{sorted(leaked)[:5]}"
        )
    preds = predict(model, test.rows)
    window_hits = sum(1 for p, t in zip(preds, test.labels) if p is t)
    votes = group_majority_votes(preds, test.group_ids)
    truth_by_group: dict[int, Truth] = {}
    for label, gid in zip(test.labels, test.group_ids):
        truth_by_group.setdefault(gid, label)
    confusion = [[0, 0], [0, 0]]
    for gid, truth in truth_by_group.items():
        confusion[0 if truth is Truth.YES else 1][0 if votes[gid] is Truth.YES else 1] += 1
    n_groups = len(truth_by_group)
    group_hits = confusion[0][0] + confusion[1][1]
    n_yes = confusion[0][0] + confusion[0][1]
    nir = max(n_yes, n_groups - n_yes) / n_groups
    return EvalReport(
        task=Task(task),
        family=model.family,
        test_acc=group_hits / n_groups,
        test_acc_windows=window_hits / test.n_rows,
        nir=nir,
        confusion=tuple(tuple(r) for r in confusion),  # type: ignore[arg-type]
        n_test_groups=n_groups,
    )


def corpus_epochs(corpus: Corpus, task: Task, config: PipelineConfig | None = None):
    """Clean every run, cut the task's epochs, and merge them corpus-wide."""
    config = config or PipelineConfig()
    sets = []
    for rec, log in corpus:
        cleaned, shifted = clean_with_markers(rec, log, config.filter)
        sets.append(slice_epochs(cleaned, shifted, task, config.epoch_seconds))
    return concat_epoch_sets(sets)


def build_feature_matrix(epoch_set, mode: FeatureMode, config: PipelineConfig, csp_model=None):
    if mode is FeatureMode.SPECTROGRAM:
        channels = OCCIPITAL_CHANNELS if epoch_set.task in _OCCIPITAL_TASKS else None
        sc = config.spectrogram
        rows, labels, groups = epoch_set_features(
            epoch_set,
            channels=channels,
            window_samples=sc.window_samples,
            hop_samples=sc.hop_samples,
            band=(sc.band_lo_hz, sc.band_hi_hz),
        )
    else:
        assert csp_model is not None
        rows, labels, groups = epoch_set_csp_features(csp_model, epoch_set)
    return FeatureMatrix(rows=rows, labels=labels, group_ids=groups)


def resolve_feature_mode(task: Task, feature_mode: FeatureMode | str | None) -> FeatureMode:
    """Default or validate the feature mode for a task."""
    allowed = TASK_FEATURE_MODES[Task(task)]
    if feature_mode is None:
        return allowed[0]
    mode = FeatureMode(feature_mode)
    if mode not in allowed:
        raise ValueError(
            f"feature mode {mode.value!r} is not supported for task {Task(task).value!r} "
            f"(allowed: {[m.value for m in allowed]})"
        )
    return mode


def run_task_pipeline(
    corpus: Corpus,
    task: Task,
    feature_mode: FeatureMode | str | None = None,
    seed: int = 0,
    config: PipelineConfig | None = None,
) -> EvalReport:
    """End-to-end: clean, epoch, split by groups, fit, select, evaluate.

    Spatial filters (csp mode) are fit on training epochs only; spectrogram
    features involve no cross-epoch fitting.  The returned report is a pure
    function of (corpus, task, feature_mode, seed, config).
    """
    task = Task(task)
    config = config or PipelineConfig()
    mode = resolve_feature_mode(task, feature_mode)
    epoch_set = corpus_epochs(corpus, task, config)
    labels_by_group = epoch_set.group_labels()
    split = group_split(labels_by_group, config.split.train_ratio, seed)
    train_epochs = epoch_set.subset(split.train_groups)
    test_epochs = epoch_set.subset(split.test_groups)

    csp_model = None
    if mode is FeatureMode.CSP:
        csp_model = fit_csp(train_epochs, config.csp.n_components, config.csp.shrinkage)
    train_fm = build_feature_matrix(train_epochs, mode, config, csp_model)
    test_fm = build_feature_matrix(test_epochs, mode, config, csp_model)

    folds = group_cv_folds(
        {g: labels_by_group[g] for g in split.train_groups}, config.split.cv_folds, seed
    )
    family, model, cv_acc = select_best(train_fm, folds, config.classifier, seed=seed)

    report = evaluate(model, test_fm, task)
    train_preds = predict(model, train_fm.rows)
    train_window_acc = sum(1 for p, t in zip(train_preds, train_fm.labels) if p is t) / train_fm.n_rows
    return dataclasses.replace(
        report,
        feature_mode=mode,
        seed=int(seed),
        train_acc=group_majority_accuracy(model, train_fm),
        train_acc_windows=train_window_acc,
        cv_acc=cv_acc,
        n_train_groups=len(split.train_groups),
        config_sha256=config.sha256(),
    )


def permute_truths(corpus: Corpus, task: Task, seed: int = 0) -> tuple[tuple[Recording, MarkerLog], ...]:
    """Shuffle the trial truths of one task corpus-wide (calibration control).

    Signal content stays untouched, so labels become independent of the data
    and any pipeline evaluated on the permuted corpus should score at chance.
    Deterministic in ``seed``.
    """
    task = Task(task)
    keys: list[tuple[int, int]] = []
    truths: list[Truth] = []
    for run_idx, (_rec, log) in enumerate(corpus):
        for m in log:
            if m.task is task and (run_idx, m.trial) not in keys:
                keys.append((run_idx, m.trial))
                truths.append(m.truth)
    if not keys:
        raise ValueError(f"no trials of task {task.value!r} in corpus")
    rng = np.random.default_rng([int(seed), 303])
    shuffled = [truths[i] for i in rng.permutation(len(truths))]
    new_truth = dict(zip(keys, shuffled))
    out = []
    for run_idx, (rec, log) in enumerate(corpus):
        markers = tuple(
            dataclasses.replace(m, truth=new_truth[(run_idx, m.trial)])
            if m.task is task
            else m
            for m in log
        )
        out.append((rec, MarkerLog(markers)))
    return tuple(out)


#: display labels for the summary table, in session order with the laryngeal
#: tasks shown once per feature mode
_TABLE_ROWS: tuple[tuple[Task, FeatureMode], ...] = (
    (Task.SSVEP, FeatureMode.SPECTROGRAM),
    (Task.MOTOR_ACTIVITY, FeatureMode.CSP),
    (Task.MOTOR_IMAGERY, FeatureMode.CSP),
    (Task.LARYNGEAL_ACTIVITY, FeatureMode.CSP),
    (Task.LARYNGEAL_IMAGERY, FeatureMode.CSP),
    (Task.LARYNGEAL_ACTIVITY, FeatureMode.SPECTROGRAM),
    (Task.LARYNGEAL_IMAGERY, FeatureMode.SPECTROGRAM),
)


def _row_label(task: Task, mode: FeatureMode | None) -> str:
    label = task.value.replace("_", " ")
    if mode is not None:
        label += f" ({mode.value} features)"
    return label


def render_table(reports: Sequence[EvalReport]) -> str:
    """Fixed-width summary table: task/features, winner, train%, test%, NIR%."""
    header = f"{'task':44s}  {'model':14s}  {'train%':>7s}  {'test%':>7s}  {'nir%':>6s}"
    lines = [header, "-" * len(header)]

    def pct(v: float | None) -> str:
        return f"{100.0 * v:.1f}" if v is not None else "-"

    def key(r: EvalReport) -> tuple[int, int]:
        try:
            primary = _TABLE_ROWS.index((r.task, r.feature_mode))
        except ValueError:
            primary = len(_TABLE_ROWS)
        return (primary, list(Task).index(r.task))

    for r in sorted(reports, key=key):
        lines.append(
            f"{_row_label(r.task, r.feature_mode):44s}  {r.family.value:14s}  "
            f"{pct(r.train_acc):>7s}  {pct(r.test_acc):>7s}  {pct(r.nir):>6s}"
        )
    return "\n".join(lines) + "\n"
