"""Core domain types: channel layouts, recordings, event markers, epochs.

Everything in here is immutable after construction and validated eagerly, so
downstream stages can assume well-formed inputs.  Signal data is stored as
float64 ``(channels, samples)`` arrays; timestamps are integer sample indices
into the recording they refer to.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np


class Task(str, Enum):
    """The six session paradigms."""

    EYES_OPEN_CLOSED = "eyes_open_closed"
    SSVEP = "ssvep"
    MOTOR_ACTIVITY = "motor_activity"
    MOTOR_IMAGERY = "motor_imagery"
    LARYNGEAL_ACTIVITY = "laryngeal_activity"
    LARYNGEAL_IMAGERY = "laryngeal_imagery"


class Truth(str, Enum):
    """Binary ground-truth label of a trial."""

    YES = "yes"
    NO = "no"


class Phase(str, Enum):
    """Protocol phase an event marker belongs to."""

    PROMPT_SHOWN = "prompt_shown"
    RESPONSE_KEY = "response_key"
    STIMULUS_START = "stimulus_start"
    STIMULUS_END = "stimulus_end"


#: 16-electrode montage used by default throughout the toolkit.
DEFAULT_CHANNEL_NAMES: tuple[str, ...] = (
    "Fp1", "Fp2", "CP1", "CP2", "FC1", "FC2", "O1", "O2",
    "F7", "F8", "Fz", "Cz", "T3", "T4", "P3", "P4",
)

#: Occipital/parietal subset used for alpha and flicker-response analysis.
OCCIPITAL_CHANNELS: tuple[str, ...] = ("O1", "O2", "P3", "P4")


@dataclass(frozen=True)
class ChannelLayout:
    """Ordered, unique electrode names; row i of a recording is names[i]."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        names = tuple(str(n) for n in self.names)
        object.__setattr__(self, "names", names)
        if len(names) == 0:
            raise ValueError("channel layout must name at least one channel")
        if len(set(names)) != len(names):
            raise ValueError("channel layout contains duplicate names")

    @classmethod
    def default16(cls) -> "ChannelLayout":
        return cls(DEFAULT_CHANNEL_NAMES)

    @property
    def count(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError(f"unknown channel name: {name!r}") from None

    def indices(self, names: Sequence[str]) -> list[int]:
        return [self.index(n) for n in names]


def _as_signal_array(data: object) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"signal data must be 2-D (channels, samples), got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("signal data contains non-finite samples")
    return arr


@dataclass(frozen=True)
class Recording:
    """A continuous multichannel signal plus acquisition metadata.

    data
        float64 array of shape ``(n_channels, n_samples)``, channel-major.
    rate_hz
        sampling rate in Hz, strictly positive.
    layout
        channel names; ``layout.count`` must equal ``data.shape[0]``.
    meta
        free-form JSON-compatible provenance (generator settings, source file).
    """

    data: np.ndarray
    rate_hz: float
    layout: ChannelLayout
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        arr = _as_signal_array(self.data)
        object.__setattr__(self, "data", arr)
        if not (float(self.rate_hz) > 0.0):
            raise ValueError(f"rate_hz must be positive, got {self.rate_hz}")
        object.__setattr__(self, "rate_hz", float(self.rate_hz))
        if arr.shape[0] != self.layout.count:
            raise ValueError(
                f"data has {arr.shape[0]} channels but layout names {self.layout.count}"
            )
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def n_channels(self) -> int:
        return int(self.data.shape[0])

    @property
    def n_samples(self) -> int:
        return int(self.data.shape[1])

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.rate_hz


@dataclass(frozen=True)
class EventMarker:
    """One timestamped protocol event, aligned to a recording's sample axis."""

    t_sample: int
    task: Task
    trial: int
    truth: Truth
    phase: Phase

    def __post_init__(self) -> None:
        object.__setattr__(self, "t_sample", int(self.t_sample))
        object.__setattr__(self, "trial", int(self.trial))
        if self.t_sample < 0:
            raise ValueError(f"marker t_sample must be >= 0, got {self.t_sample}")
        if self.trial < 0:
            raise ValueError(f"marker trial must be >= 0, got {self.trial}")
        if not isinstance(self.task, Task):
            object.__setattr__(self, "task", Task(self.task))
        if not isinstance(self.truth, Truth):
            object.__setattr__(self, "truth", Truth(self.truth))
        if not isinstance(self.phase, Phase):
            object.__setattr__(self, "phase", Phase(self.phase))

    def to_dict(self) -> dict[str, object]:
        return {
            "t_sample": self.t_sample,
            "task": self.task.value,
            "trial": self.trial,
            "truth": self.truth.value,
            "phase": self.phase.value,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, object]) -> "EventMarker":
        missing = {"t_sample", "task", "trial", "truth", "phase"} - set(d)
        if missing:
            raise ValueError(f"marker record missing fields: {sorted(missing)}")
        return cls(
            t_sample=int(d["t_sample"]),  # type: ignore[arg-type]
            task=Task(d["task"]),
            trial=int(d["trial"]),  # type: ignore[arg-type]
            truth=Truth(d["truth"]),
            phase=Phase(d["phase"]),
        )


@dataclass(frozen=True)
class MarkerLog:
    """An ordered sequence of event markers for one recording.

    Construction validates that timestamps are non-decreasing and that, for
    every (task, trial) with both stimulus markers present, the stimulus start
    strictly precedes its end.
    """

    markers: tuple[EventMarker, ...]

    def __post_init__(self) -> None:
        markers = tuple(self.markers)
        object.__setattr__(self, "markers", markers)
        last = -1
        for m in markers:
            if m.t_sample < last:
                raise ValueError(
                    f"marker log not sorted: t_sample {m.t_sample} after {last}"
                )
            last = m.t_sample
        starts: dict[tuple[Task, int], int] = {}
        for m in markers:
            key = (m.task, m.trial)
            if m.phase is Phase.STIMULUS_START:
                starts[key] = m.t_sample
            elif m.phase is Phase.STIMULUS_END:
                if key in starts and not (starts[key] < m.t_sample):
                    raise ValueError(
                        f"stimulus end at {m.t_sample} does not follow its start "
                        f"for task={m.task.value} trial={m.trial}"
                    )

    def __len__(self) -> int:
        return len(self.markers)

    def __iter__(self) -> Iterator[EventMarker]:
        return iter(self.markers)

    def for_task(self, task: Task) -> tuple[EventMarker, ...]:
        return tuple(m for m in self.markers if m.task is task)

    def tasks(self) -> tuple[Task, ...]:
        seen: list[Task] = []
        for m in self.markers:
            if m.task not in seen:
                seen.append(m.task)
        return tuple(seen)

    def shifted(self, offset_samples: int) -> "MarkerLog":
        """Shift all timestamps by ``-offset_samples``, dropping markers that
        land before sample 0 (events that happened in a trimmed-away head)."""
        offset = int(offset_samples)
        kept = [
            dataclasses.replace(m, t_sample=m.t_sample - offset)
            for m in self.markers
            if m.t_sample - offset >= 0
        ]
        return MarkerLog(tuple(kept))

    def stimulus_starts(self, task: Task) -> tuple[EventMarker, ...]:
        return tuple(
            m for m in self.markers if m.task is task and m.phase is Phase.STIMULUS_START
        )


@dataclass(frozen=True)
class Epoch:
    """A fixed-length window cut from a recording at a stimulus onset.

    ``group_id`` ties every feature vector derived from this epoch back to its
    source trial segment so that evaluation splits can keep whole trials on
    one side of a train/test boundary.
    """

    data: np.ndarray
    label: Truth
    group_id: int
    task: Task

    def __post_init__(self) -> None:
        arr = _as_signal_array(self.data)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "group_id", int(self.group_id))
        if self.group_id < 0:
            raise ValueError("group_id must be >= 0")
        if not isinstance(self.label, Truth):
            object.__setattr__(self, "label", Truth(self.label))
        if not isinstance(self.task, Task):
            object.__setattr__(self, "task", Task(self.task))

    @property
    def n_channels(self) -> int:
        return int(self.data.shape[0])

    @property
    def n_samples(self) -> int:
        return int(self.data.shape[1])


@dataclass(frozen=True)
class EpochSet:
    """A homogeneous, non-empty collection of epochs from one task.

    All epochs share the window length, channel count, and task; group ids are
    unique per epoch because each epoch is one trial segment.
    """

    epochs: tuple[Epoch, ...]
    rate_hz: float
    layout: ChannelLayout

    def __post_init__(self) -> None:
        epochs = tuple(self.epochs)
        object.__setattr__(self, "epochs", epochs)
        object.__setattr__(self, "rate_hz", float(self.rate_hz))
        if not epochs:
            raise ValueError("epoch set must contain at least one epoch")
        if not (self.rate_hz > 0):
            raise ValueError("rate_hz must be positive")
        first = epochs[0]
        for e in epochs:
            if e.task is not first.task:
                raise ValueError("epoch set mixes tasks")
            if e.data.shape != first.data.shape:
                raise ValueError("epoch set mixes window shapes")
        if first.n_channels != self.layout.count:
            raise ValueError(
                f"epochs have {first.n_channels} channels but layout names {self.layout.count}"
            )
        gids = [e.group_id for e in epochs]
        if len(set(gids)) != len(gids):
            raise ValueError("duplicate group_id in epoch set")

    def __len__(self) -> int:
        return len(self.epochs)

    def __iter__(self) -> Iterator[Epoch]:
        return iter(self.epochs)

    @property
    def task(self) -> Task:
        return self.epochs[0].task

    @property
    def window_samples(self) -> int:
        return self.epochs[0].n_samples

    def group_labels(self) -> dict[int, Truth]:
        return {e.group_id: e.label for e in self.epochs}

    def subset(self, group_ids: Iterable[int]) -> "EpochSet":
        wanted = set(int(g) for g in group_ids)
        kept = tuple(e for e in self.epochs if e.group_id in wanted)
        if not kept:
            raise ValueError("subset selects no epochs")
        return EpochSet(kept, self.rate_hz, self.layout)
