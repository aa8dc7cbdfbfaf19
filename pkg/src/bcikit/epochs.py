"""Cutting labelled, group-tagged epochs out of recordings."""
from __future__ import annotations

import dataclasses

from .core import Epoch, EpochSet, MarkerLog, Recording, Task


def slice_epochs(
    rec: Recording,
    log: MarkerLog,
    task: Task,
    epoch_seconds: float = 5.0,
) -> EpochSet:
    """Cut one fixed-length epoch per stimulus onset of ``task``.

    Each stimulus_start marker of the task yields one epoch of
    ``epoch_seconds * rec.rate_hz`` samples beginning at the marker, labelled
    with the marker's truth and tagged with a sequential group id (0, 1, ...)
    in marker order.  Windows must lie fully inside the recording and must not
    overlap each other; either condition failing is an error, as is a task
    with no stimulus markers in the log.
    """
    task = Task(task)
    if not (epoch_seconds > 0):
        raise ValueError("epoch_seconds must be positive")
    window = int(round(epoch_seconds * rec.rate_hz))
    if window <= 0:
        raise ValueError("epoch window is empty at this sampling rate")
    starts = log.stimulus_starts(task)
    if not starts:
        raise ValueError(f"no stimulus markers for task {task.value!r} in log")
    epochs: list[Epoch] = []
    prev_end = -1
    for group_id, marker in enumerate(starts):
        begin = marker.t_sample
        end = begin + window
        if end > rec.n_samples:
            raise ValueError(
                f"stimulus at sample {begin} runs past end of recording "
                f"({end} > {rec.n_samples})"
            )
        if begin < prev_end:
            raise ValueError(
                f"overlapping stimulus windows: window at {begin} starts before "
                f"previous window ends at {prev_end}"
            )
        prev_end = end
        epochs.append(
            Epoch(
                data=rec.data[:, begin:end].copy(),
                label=marker.truth,
                group_id=group_id,
                task=task,
            )
        )
    return EpochSet(tuple(epochs), rate_hz=rec.rate_hz, layout=rec.layout)


def concat_epoch_sets(sets: list[EpochSet] | tuple[EpochSet, ...]) -> EpochSet:
    """Merge epoch sets from several recordings of the same task.

    Group ids are re-based with a running offset so that trials from different
    recordings never collide; within each input set the relative order of
    groups is preserved.
    """
    sets = list(sets)
    if not sets:
        raise ValueError("no epoch sets to concatenate")
    first = sets[0]
    merged: list[Epoch] = []
    offset = 0
    for es in sets:
        if es.task is not first.task:
            raise ValueError("cannot concatenate epoch sets from different tasks")
        if es.layout != first.layout or es.rate_hz != first.rate_hz:
            raise ValueError("cannot concatenate epoch sets with different layouts or rates")
        if es.window_samples != first.window_samples:
            raise ValueError("cannot concatenate epoch sets with different window lengths")
        for e in es:
            merged.append(dataclasses.replace(e, group_id=e.group_id + offset))
        offset = max(m.group_id for m in merged) + 1
    return EpochSet(tuple(merged), rate_hz=first.rate_hz, layout=first.layout)
