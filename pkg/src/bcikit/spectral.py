"""Windowed spectral analysis: spectrograms, band features, alpha/flicker scores.

Power convention
----------------
For one Hann-windowed segment ``s`` of length N, the one-sided power at bin k
is ``c_k * |rfft(s)_k|^2 / N`` with ``c_k = 1`` at DC and Nyquist and 2
elsewhere.  Under this scaling the bins of a full spectrum sum exactly to
``sum(s**2)`` (Parseval), which pins the convention testably; spectrograms
then keep only the bins inside the analysis band.
"""
from __future__ import annotations

import io as _io
from dataclasses import dataclass

import numpy as np

from .core import OCCIPITAL_CHANNELS, ChannelLayout, Epoch, EpochSet, Truth


@dataclass(frozen=True)
class PsdScore:
    """Per-target flicker-response evidence: fundamental plus harmonic power."""

    target_hz: float
    fundamental_power: float
    harmonic_powers: tuple[float, ...]
    total_score: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "harmonic_powers", tuple(float(p) for p in self.harmonic_powers))
        if self.fundamental_power < 0 or any(p < 0 for p in self.harmonic_powers):
            raise ValueError("band powers must be non-negative")
        expected = self.fundamental_power + sum(self.harmonic_powers)
        if not np.isclose(self.total_score, expected, rtol=1e-12, atol=1e-12):
            raise ValueError("total_score must equal fundamental plus harmonic power")

    @classmethod
    def compute(cls, target_hz: float, fundamental: float, harmonics: tuple[float, ...]) -> "PsdScore":
        return cls(
            target_hz=float(target_hz),
            fundamental_power=float(fundamental),
            harmonic_powers=tuple(float(p) for p in harmonics),
            total_score=float(fundamental) + float(sum(harmonics)),
        )


@dataclass(frozen=True)
class Spectrogram:
    """Band-restricted per-channel power over time windows.

    values
        non-negative array of shape ``(n_channels, n_bins, n_windows)``.
    freqs_hz
        increasing bin centres, one per bin.
    """

    values: np.ndarray
    freqs_hz: np.ndarray
    window_samples: int
    hop_samples: int
    channel_names: tuple[str, ...]
    group_id: int

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        freqs = np.asarray(self.freqs_hz, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "freqs_hz", freqs)
        object.__setattr__(self, "channel_names", tuple(self.channel_names))
        if values.ndim != 3:
            raise ValueError("spectrogram values must be (channels, bins, windows)")
        if values.shape[0] != len(self.channel_names):
            raise ValueError("channel_names must match values' first axis")
        if values.shape[1] != freqs.shape[0]:
            raise ValueError("freqs_hz must match values' bin axis")
        if np.any(values < 0):
            raise ValueError("spectrogram values must be non-negative")
        if freqs.size > 1 and not np.all(np.diff(freqs) > 0):
            raise ValueError("freqs_hz must be strictly increasing")

    @property
    def n_windows(self) -> int:
        return int(self.values.shape[2])

    @property
    def n_bins(self) -> int:
        return int(self.values.shape[1])


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window of length n."""
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / n))


def power_spectrum(segment: np.ndarray, rate_hz: float) -> tuple[np.ndarray, np.ndarray]:
    """Full one-sided power spectrum of one (already windowed) segment.

    Returns (freqs_hz, power); power sums exactly to ``sum(segment**2)``.
    """
    segment = np.asarray(segment, dtype=np.float64)
    if segment.ndim != 1 or segment.size < 2:
        raise ValueError("segment must be a 1-D array with at least 2 samples")
    n = segment.size
    spectrum = np.fft.rfft(segment)
    power = np.abs(spectrum) ** 2 / n
    scale = np.full(power.shape, 2.0)
    scale[0] = 1.0
    if n % 2 == 0:
        scale[-1] = 1.0
    return np.fft.rfftfreq(n, d=1.0 / rate_hz), power * scale


def spectrogram(
    epoch: Epoch,
    rate_hz: float,
    layout: ChannelLayout,
    channels: tuple[str, ...] | list[str] | None = None,
    window_samples: int = 2000,
    hop_samples: int = 1000,
    band: tuple[float, float] = (5.0, 50.0),
) -> Spectrogram:
    """Hann-windowed power spectrogram of an epoch, restricted to ``band``.

    Parameters
    ----------
    epoch : Epoch
        source signal; must be at least ``window_samples`` long.
    rate_hz, layout
        acquisition context of the epoch's rows.
    channels
        subset of channel names to analyze (None keeps all, in layout order).
    window_samples, hop_samples
        segment length and stride; a 5 s epoch at 1 kHz with the defaults
        yields 4 windows.
    band
        inclusive frequency range of bins to keep (defaults keep 91 bins at
        0.5 Hz spacing).
    """
    if window_samples < 2:
        raise ValueError("window_samples must be >= 2")
    if hop_samples < 1:
        raise ValueError("hop_samples must be >= 1")
    if epoch.n_samples < window_samples:
        raise ValueError(
            f"epoch of {epoch.n_samples} samples is shorter than the "
            f"{window_samples}-sample analysis window"
        )
    lo, hi = band
    if not (0 <= lo < hi):
        raise ValueError(f"band must satisfy 0 <= lo < hi, got {band}")
    names = tuple(channels) if channels is not None else layout.names
    rows = layout.indices(names)
    if epoch.n_channels != layout.count:
        raise ValueError("epoch channel count does not match layout")

    freqs = np.fft.rfftfreq(window_samples, d=1.0 / rate_hz)
    keep = np.flatnonzero((freqs >= lo) & (freqs <= hi))
    if keep.size == 0:
        raise ValueError(f"band {band} contains no spectral bins at rate {rate_hz}")
    n_windows = 1 + (epoch.n_samples - window_samples) // hop_samples
    window = hann_window(window_samples)
    values = np.empty((len(rows), keep.size, n_windows))
    for ci, row in enumerate(rows):
        for wi in range(n_windows):
            start = wi * hop_samples
            seg = epoch.data[row, start : start + window_samples] * window
            _, power = power_spectrum(seg, rate_hz)
            values[ci, :, wi] = power[keep]
    return Spectrogram(
        values=values,
        freqs_hz=freqs[keep],
        window_samples=window_samples,
        hop_samples=hop_samples,
        channel_names=names,
        group_id=epoch.group_id,
    )


def features_from_spectrogram(spec: Spectrogram) -> list[tuple[np.ndarray, int]]:
    """One flat feature vector per time window, tagged with the epoch's group.

    Vectors are channel-major (all bins of channel 0, then channel 1, ...).
    Every spectrogram value appears in exactly one vector position.
    """
    out: list[tuple[np.ndarray, int]] = []
    for wi in range(spec.n_windows):
        out.append((spec.values[:, :, wi].reshape(-1).copy(), spec.group_id))
    return out


def epoch_set_features(
    epoch_set: EpochSet,
    channels: tuple[str, ...] | list[str] | None = None,
    window_samples: int = 2000,
    hop_samples: int = 1000,
    band: tuple[float, float] = (5.0, 50.0),
) -> tuple[np.ndarray, list[Truth], list[int]]:
    """Spectrogram feature rows for a whole epoch set.

    Returns (rows, labels, group_ids) with one row per (epoch, window); every
    row derived from one epoch carries that epoch's label and group id.
    """
    rows: list[np.ndarray] = []
    labels: list[Truth] = []
    groups: list[int] = []
    for epoch in epoch_set:
        spec = spectrogram(
            epoch, epoch_set.rate_hz, epoch_set.layout,
            channels=channels, window_samples=window_samples,
            hop_samples=hop_samples, band=band,
        )
        for vec, gid in features_from_spectrogram(spec):
            rows.append(vec)
            labels.append(epoch.label)
            groups.append(gid)
    return np.stack(rows), labels, groups


def detect_alpha(
    epoch: Epoch,
    rate_hz: float,
    layout: ChannelLayout,
    channels: tuple[str, ...] = OCCIPITAL_CHANNELS,
    alpha_band: tuple[float, float] = (8.0, 12.0),
    window_samples: int = 2000,
    hop_samples: int = 1000,
    band: tuple[float, float] = (5.0, 50.0),
) -> float:
    """Alpha-dominance score in [0, 1]: fraction of in-band occipital power
    that falls in the alpha band.

    A score above 0.5 reads as eyes closed.  Zero signal scores 0.  The epoch
    must be at least one analysis window long (2 s at the defaults).
    """
    spec = spectrogram(
        epoch, rate_hz, layout, channels=channels,
        window_samples=window_samples, hop_samples=hop_samples, band=band,
    )
    total = float(spec.values.sum())
    if total <= 0.0:
        return 0.0
    lo, hi = alpha_band
    mask = (spec.freqs_hz >= lo) & (spec.freqs_hz <= hi)
    return float(spec.values[:, mask, :].sum()) / total


def ssvep_score(
    epoch: Epoch,
    rate_hz: float,
    layout: ChannelLayout,
    targets: dict[float, Truth] | None = None,
    n_harmonics: int = 2,
    channels: tuple[str, ...] = OCCIPITAL_CHANNELS,
    window_samples: int = 2000,
    hop_samples: int = 1000,
    band: tuple[float, float] = (5.0, 50.0),
) -> tuple[Truth, dict[float, PsdScore]]:
    """Decide which flicker target an epoch follows.

    Each target frequency f is scored by the summed occipital power at f and
    its harmonics 2f .. (n_harmonics+1)f, all weighted equally; the decision
    is the truth mapped to the highest-scoring target, and an exact tie goes
    to the yes target.  Every scored frequency must lie inside ``band``.

    Returns (decision, per-target PsdScore).
    """
    if targets is None:
        targets = {10.0: Truth.YES, 15.0: Truth.NO}
    if n_harmonics < 0:
        raise ValueError("n_harmonics must be >= 0")
    if not targets:
        raise ValueError("at least one target frequency is required")
    lo, hi = band
    for f in targets:
        top = f * (n_harmonics + 1)
        if f < lo or top > hi:
            raise ValueError(
                f"target {f} Hz with {n_harmonics} harmonics spans up to {top} Hz, "
                f"outside the analysis band {band}"
            )
    spec = spectrogram(
        epoch, rate_hz, layout, channels=channels,
        window_samples=window_samples, hop_samples=hop_samples, band=band,
    )

    def bin_power(freq: float) -> float:
        k = int(np.argmin(np.abs(spec.freqs_hz - freq)))
        return float(spec.values[:, k, :].sum())

    scores: dict[float, PsdScore] = {}
    for f, _truth in targets.items():
        fundamental = bin_power(f)
        harmonics = tuple(bin_power(f * (m + 2)) for m in range(n_harmonics))
        scores[float(f)] = PsdScore.compute(f, fundamental, harmonics)

    best = max(scores.values(), key=lambda s: s.total_score).total_score
    winners = sorted(f for f, s in scores.items() if s.total_score == best)
    if any(targets[f] is Truth.YES for f in winners):
        decision = Truth.YES
    else:
        decision = targets[winners[0]]
    return decision, scores


def spectrogram_to_csv(spec: Spectrogram) -> str:
    """Render a spectrogram as CSV: one row per (channel, frequency bin), one
    column per time window."""
    buf = _io.StringIO()
    cols = ",".join(f"w{w:03d}" for w in range(spec.n_windows))
    buf.write(f"channel,freq_hz,{cols}\n")
    for ci, name in enumerate(spec.channel_names):
        for bi, f in enumerate(spec.freqs_hz):
            row = ",".join(repr(float(v)) for v in spec.values[ci, bi, :])
            buf.write(f"{name},{float(f)!r},{row}\n")
    return buf.getvalue()
