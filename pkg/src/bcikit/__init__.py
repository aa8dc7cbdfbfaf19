"""Offline analysis toolkit for yes/no EEG brain-computer-interface sessions."""

from .core import (
    DEFAULT_CHANNEL_NAMES,
    OCCIPITAL_CHANNELS,
    ChannelLayout,
    Epoch,
    EpochSet,
    EventMarker,
    MarkerLog,
    Phase,
    Recording,
    Task,
    Truth,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CHANNEL_NAMES",
    "OCCIPITAL_CHANNELS",
    "ChannelLayout",
    "Epoch",
    "EpochSet",
    "EventMarker",
    "MarkerLog",
    "Phase",
    "Recording",
    "Task",
    "Truth",
    "__version__",
]
