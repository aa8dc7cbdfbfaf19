"""Grouped splitting, cross-validation folds, scoring, and report rendering."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcikit.classifiers import FeatureMatrix, ModelFamily, train
from bcikit.core import Task, Truth
from bcikit.evaluate import (
    EvalReport,
    FeatureMode,
    corpus_epochs,
    evaluate,
    group_cv_folds,
    group_split,
    permute_truths,
    render_table,
    report_from_json,
    report_to_json,
    resolve_feature_mode,
    run_task_pipeline,
)


def _labels(n_yes, n_no):
    out = {g: Truth.YES for g in range(n_yes)}
    out.update({g: Truth.NO for g in range(n_yes, n_yes + n_no)})
    return out


# ------------------------------------------------------------------- splits


def test_split_60_groups_is_48_12_stratified():
    split = group_split(_labels(30, 30), train_ratio=0.8, seed=0)
    labels = _labels(30, 30)
    assert len(split.train_groups) == 48
    assert len(split.test_groups) == 12
    train_yes = sum(labels[g] is Truth.YES for g in split.train_groups)
    assert train_yes == 24  # exact stratification on balanced classes


def test_split_53_groups_is_42_11():
    labels = _labels(27, 26)
    split = group_split(labels, train_ratio=0.8, seed=0)
    assert len(split.train_groups) == 42  # floor(0.8 * 53)
    assert len(split.test_groups) == 11
    train_yes = sum(labels[g] is Truth.YES for g in split.train_groups)
    train_no = len(split.train_groups) - train_yes
    # largest-remainder allocation: quotas 21.6 / 20.8 -> 21 + 21
    assert (train_yes, train_no) == (21, 21)


def test_split_determinism_and_seed_sensitivity():
    labels = _labels(10, 10)
    a = group_split(labels, seed=4)
    b = group_split(labels, seed=4)
    assert a == b
    seeds = {group_split(labels, seed=s).train_groups for s in range(8)}
    assert len(seeds) > 1


def test_split_validation():
    with pytest.raises(ValueError, match="train_ratio"):
        group_split(_labels(5, 5), train_ratio=1.0)
    with pytest.raises(ValueError, match="at least 2 groups per class"):
        group_split(_labels(1, 5))


@given(
    n_yes=st.integers(min_value=2, max_value=40),
    n_no=st.integers(min_value=2, max_value=40),
    ratio=st.floats(min_value=0.1, max_value=0.9),
    seed=st.integers(min_value=0, max_value=2**31 - 1),
)
@settings(max_examples=80, deadline=None)
def test_split_properties(n_yes, n_no, ratio, seed):
    labels = _labels(n_yes, n_no)
    split = group_split(labels, train_ratio=ratio, seed=seed)
    train, test = set(split.train_groups), set(split.test_groups)
    assert train.isdisjoint(test)
    assert train | test == set(labels)
    for side in (train, test):
        side_labels = {labels[g] for g in side}
        assert side_labels == {Truth.YES, Truth.NO}  # both classes on both sides
    # overall size honors the floor rule, up to the per-class clamping
    assert abs(len(train) - math.floor(ratio * (n_yes + n_no))) <= 2


def test_folds_deal_48_groups_into_16s():
    folds = group_cv_folds(_labels(24, 24), k=3, seed=0)
    assert [len(f) for f in folds] == [16, 16, 16]
    labels = _labels(24, 24)
    for fold in folds:
        yes = sum(labels[g] is Truth.YES for g in fold)
        assert yes == 8  # stratified deal


@given(
    n_yes=st.integers(min_value=2, max_value=30),
    n_no=st.integers(min_value=2, max_value=30),
    k=st.integers(min_value=2, max_value=5),
    seed=st.integers(min_value=0, max_value=2**31 - 1),
)
@settings(max_examples=80, deadline=None)
def test_folds_partition_groups(n_yes, n_no, k, seed):
    labels = _labels(n_yes, n_no)
    if k > n_yes + n_no:
        with pytest.raises(ValueError):
            group_cv_folds(labels, k=k, seed=seed)
        return
    folds = group_cv_folds(labels, k=k, seed=seed)
    flat = [g for f in folds for g in f]
    assert sorted(flat) == sorted(labels)  # no straddling, no duplication
    assert all(folds)
    assert max(len(f) for f in folds) - min(len(f) for f in folds) <= 2


def test_folds_validation():
    with pytest.raises(ValueError, match="k >= 2"):
        group_cv_folds(_labels(5, 5), k=1)
    with pytest.raises(ValueError, match="exceeds"):
        group_cv_folds(_labels(2, 2), k=9)


# ----------------------------------------------------------------- evaluate


def _knn_fixture():
    """A k=1 model trained on two far-apart groups, plus test rows whose
    predictions are forced by proximity."""
    train_fm = FeatureMatrix(
        rows=np.array([[0.0], [10.0]]),
        labels=[Truth.YES, Truth.NO],
        group_ids=[0, 1],
    )
    model = train(train_fm, ModelFamily.KNN, {"k": 1})
    test_fm = FeatureMatrix(
        rows=np.array([[0.1], [0.2], [9.9], [0.3]]),
        labels=[Truth.YES, Truth.YES, Truth.NO, Truth.NO],
        group_ids=[2, 2, 3, 4],
    )
    return model, test_fm


def test_evaluate_scores_groups_and_confusion():
    model, test_fm = _knn_fixture()
    report = evaluate(model, test_fm, Task.SSVEP)
    # group 2 votes yes (correct), group 3 votes no (correct), group 4 votes
    # yes (wrong): 2/3 groups right, 3/4 windows right
    assert report.test_acc == pytest.approx(2 / 3)
    assert report.test_acc_windows == pytest.approx(3 / 4)
    assert report.confusion == ((1, 0), (1, 1))
    assert report.n_test_groups == 3
    assert report.nir == pytest.approx(2 / 3)  # 2 of 3 test groups are labelled no


def test_evaluate_rejects_group_leakage():
    model, _ = _knn_fixture()
    leaky = FeatureMatrix(
        rows=np.array([[0.0], [1.0]]),
        labels=[Truth.YES, Truth.NO],
        group_ids=[1, 2],  # group 1 was trained on
    )
    with pytest.raises(ValueError, match="training data"):
        evaluate(model, leaky, Task.SSVEP)


def test_report_json_round_trip():
    report = EvalReport(
        task=Task.SSVEP,
        family=ModelFamily.KNN,
        test_acc=0.75,
        test_acc_windows=0.7,
        nir=0.5,
        confusion=((3, 1), (1, 3)),
        n_test_groups=8,
        feature_mode=FeatureMode.SPECTROGRAM,
        seed=3,
        train_acc=1.0,
        train_acc_windows=0.95,
        cv_acc=0.9,
        n_train_groups=24,
        config_sha256="ab" * 32,
    )
    text = report_to_json(report)
    assert text.endswith("\n")
    assert report_from_json(text) == report
    assert report_to_json(report) == text  # canonical: stable bytes


def test_report_validation():
    with pytest.raises(ValueError, match="test_acc"):
        EvalReport(
            task=Task.SSVEP, family=ModelFamily.KNN, test_acc=1.5, test_acc_windows=0.5,
            nir=0.5, confusion=((1, 0), (0, 1)), n_test_groups=2,
        )
    with pytest.raises(ValueError, match="confusion"):
        EvalReport(
            task=Task.SSVEP, family=ModelFamily.KNN, test_acc=0.5, test_acc_windows=0.5,
            nir=0.5, confusion=((1, 0), (0, 1)), n_test_groups=5,
        )


# ----------------------------------------------------------- feature modes


@pytest.mark.parametrize(
    "task,default",
    [
        (Task.EYES_OPEN_CLOSED, FeatureMode.SPECTROGRAM),
        (Task.SSVEP, FeatureMode.SPECTROGRAM),
        (Task.MOTOR_ACTIVITY, FeatureMode.CSP),
        (Task.MOTOR_IMAGERY, FeatureMode.CSP),
        (Task.LARYNGEAL_ACTIVITY, FeatureMode.CSP),
        (Task.LARYNGEAL_IMAGERY, FeatureMode.CSP),
    ],
)
def test_default_feature_modes(task, default):
    assert resolve_feature_mode(task, None) is default


def test_feature_mode_compatibility():
    # the laryngeal tasks answer to either mode; the others are fixed
    assert resolve_feature_mode(Task.LARYNGEAL_IMAGERY, "spectrogram") is FeatureMode.SPECTROGRAM
    with pytest.raises(ValueError, match="not supported"):
        resolve_feature_mode(Task.SSVEP, FeatureMode.CSP)
    with pytest.raises(ValueError, match="not supported"):
        resolve_feature_mode(Task.MOTOR_IMAGERY, "spectrogram")


# ----------------------------------------------------------- whole pipeline


def test_corpus_epochs_merges_runs_with_unique_groups(ssvep_corpus):
    es = corpus_epochs(ssvep_corpus, Task.SSVEP)
    assert len(es) == 30  # 3 runs x 10 trials
    gids = [e.group_id for e in es]
    assert len(set(gids)) == 30
    labels = list(es.group_labels().values())
    assert labels.count(Truth.YES) == 15


def test_run_task_pipeline_is_deterministic(ssvep_corpus):
    a = run_task_pipeline(ssvep_corpus, Task.SSVEP, seed=1)
    b = run_task_pipeline(ssvep_corpus, Task.SSVEP, seed=1)
    assert a == b
    assert a.feature_mode is FeatureMode.SPECTROGRAM
    assert a.seed == 1
    assert a.n_test_groups == 6
    assert a.n_train_groups == 24
    assert a.config_sha256 is not None and len(a.config_sha256) == 64
    assert a.cv_acc is not None and a.train_acc is not None


def test_permute_truths_shuffles_labels_only(ssvep_corpus):
    permuted = permute_truths(ssvep_corpus, Task.SSVEP, seed=5)
    assert permute_truths(ssvep_corpus, Task.SSVEP, seed=5) == permuted
    for (rec_a, log_a), (rec_b, log_b) in zip(ssvep_corpus, permuted):
        assert rec_a is rec_b  # signal untouched
        assert [m.t_sample for m in log_a] == [m.t_sample for m in log_b]
        assert [m.phase for m in log_a] == [m.phase for m in log_b]
    before = sorted(
        m.truth.value for _, log in ssvep_corpus for m in log.stimulus_starts(Task.SSVEP)
    )
    after = sorted(
        m.truth.value for _, log in permuted for m in log.stimulus_starts(Task.SSVEP)
    )
    assert before == after  # a permutation, not a relabeling
    changed = any(
        tuple(m.truth for m in log_a) != tuple(m.truth for m in log_b)
        for (_, log_a), (_, log_b) in zip(ssvep_corpus, permuted)
    )
    assert changed
    with pytest.raises(ValueError, match="no trials"):
        permute_truths(ssvep_corpus, Task.MOTOR_IMAGERY)


# -------------------------------------------------------------------- table


def _mk_report(task, mode, family=ModelFamily.KNN, test=0.625, train=1.0, nir=0.5):
    return EvalReport(
        task=task,
        family=family,
        test_acc=test,
        test_acc_windows=test,
        nir=nir,
        confusion=((3, 1), (2, 2)),
        n_test_groups=8,
        feature_mode=mode,
        train_acc=train,
    )


def test_render_table_row_structure():
    rows = [
        (Task.SSVEP, FeatureMode.SPECTROGRAM),
        (Task.MOTOR_ACTIVITY, FeatureMode.CSP),
        (Task.MOTOR_IMAGERY, FeatureMode.CSP),
        (Task.LARYNGEAL_ACTIVITY, FeatureMode.CSP),
        (Task.LARYNGEAL_IMAGERY, FeatureMode.CSP),
        (Task.LARYNGEAL_ACTIVITY, FeatureMode.SPECTROGRAM),
        (Task.LARYNGEAL_IMAGERY, FeatureMode.SPECTROGRAM),
    ]
    reports = [_mk_report(t, m) for t, m in rows]
    # feed them shuffled; the renderer must restore the canonical order
    table = render_table(list(reversed(reports)))
    lines = table.strip().splitlines()
    assert len(lines) == 2 + 7  # header, rule, one line per report
    assert lines[0].split() == ["task", "model", "train%", "test%", "nir%"]
    assert set(lines[1]) == {"-"}
    expected_labels = [
        "ssvep (spectrogram features)",
        "motor activity (csp features)",
        "motor imagery (csp features)",
        "laryngeal activity (csp features)",
        "laryngeal imagery (csp features)",
        "laryngeal activity (spectrogram features)",
        "laryngeal imagery (spectrogram features)",
    ]
    for line, label in zip(lines[2:], expected_labels):
        assert line.startswith(label)
        assert "62.5" in line and "100.0" in line and "50.0" in line


def test_render_table_handles_missing_train_acc():
    table = render_table([_mk_report(Task.SSVEP, FeatureMode.SPECTROGRAM, train=None)])
    row = table.strip().splitlines()[-1]
    assert " - " in row or row.split()[-3] == "-"
