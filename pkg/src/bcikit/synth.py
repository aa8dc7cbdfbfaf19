"""Synthetic EEG with known ground truth.

Everything is generated from a seeded ``numpy.random.Generator``; the same
``SynthConfig`` always reproduces the same samples, and per-trial generators
derive independent seeds from (seed, run, task, trial) so trials could be
generated in any order or in parallel without changing the output.

Background activity is pink (1/f power) noise, normalized to unit standard
deviation per channel.  On top of that, trials inject:

* flicker responses: sinusoids at a target frequency and its second harmonic
  into the occipital channels,
* eyes-closed alpha: a 10 Hz sinusoid into the occipital channels,
* lateralized activity: two orthonormal 16-channel mixing vectors carrying
  white sources whose variances swap between the yes and no classes,
* optional artifacts: periodic 25 Hz wavelet bursts on Cz and a high-variance
  noisy channel (P4).

``snr`` is the linear power ratio of an injected component to the unit-power
background of one channel.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
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

Corpus = tuple[tuple[Recording, MarkerLog], ...]

#: protocol order of the six paradigms within a session
TASK_ORDER: tuple[Task, ...] = (
    Task.EYES_OPEN_CLOSED,
    Task.SSVEP,
    Task.MOTOR_ACTIVITY,
    Task.MOTOR_IMAGERY,
    Task.LARYNGEAL_ACTIVITY,
    Task.LARYNGEAL_IMAGERY,
)

# seed-stream tags so independent draws never collide
_TAG_BACKGROUND = 11
_TAG_TRIAL = 13
_TAG_MIXING = 17
_TAG_NOISY = 19
_TAG_TRUTHS = 23

_ARTIFACT_CHANNEL = "Cz"
_NOISY_CHANNEL = "P4"


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for the generator; seed fixes every sample."""

    rate_hz: float = 1000.0
    layout: ChannelLayout = field(default_factory=ChannelLayout.default16)
    snr: float = 1.0
    seed: int = 0
    wifi_wavelets: bool = False
    noisy_channel: bool = False

    def __post_init__(self) -> None:
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        if self.snr < 0:
            raise ValueError("snr must be >= 0")


def pink_noise(n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-std 1/f-power noise via spectral shaping of white noise."""
    if n_samples < 8:
        raise ValueError("pink noise needs at least 8 samples")
    white = rng.standard_normal(n_samples)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n_samples)
    spectrum[1:] /= np.sqrt(freqs[1:])
    spectrum[0] = 0.0
    x = np.fft.irfft(spectrum, n=n_samples)
    std = x.std()
    return x / std if std > 0 else x


def _pink_block(n_channels: int, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    return np.stack([pink_noise(n_samples, rng) for _ in range(n_channels)])


def _rng(config: SynthConfig, *tags: int) -> np.random.Generator:
    return np.random.default_rng([int(config.seed)] + [int(t) for t in tags])


def _task_index(task: Task) -> int:
    return TASK_ORDER.index(task)


def _sine(n_samples: int, rate_hz: float, freq_hz: float, phase: float) -> np.ndarray:
    t = np.arange(n_samples) / rate_hz
    return np.sin(2.0 * np.pi * freq_hz * t + phase)


def gen_background(config: SynthConfig, seconds: float, rng: np.random.Generator | None = None) -> Recording:
    """Pink-noise background across all channels for ``seconds``."""
    n = int(round(seconds * config.rate_hz))
    rng = rng if rng is not None else _rng(config, _TAG_BACKGROUND)
    data = _pink_block(config.layout.count, n, rng)
    return Recording(
        data=data,
        rate_hz=config.rate_hz,
        layout=config.layout,
        meta={"generator": "pink_background", "seed": int(config.seed)},
    )


def _inject_flicker(
    data: np.ndarray,
    sl: slice,
    config: SynthConfig,
    target_hz: float,
    harmonic_gain: float,
    rng: np.random.Generator,
) -> None:
    """Add target + second-harmonic sinusoids to occipital rows of data[:, sl]."""
    n = sl.stop - sl.start
    amp_f = np.sqrt(2.0 * config.snr)
    amp_h = np.sqrt(2.0 * config.snr * harmonic_gain)
    phase_f, phase_h = rng.uniform(0.0, 2.0 * np.pi, size=2)
    wave = amp_f * _sine(n, config.rate_hz, target_hz, phase_f)
    wave += amp_h * _sine(n, config.rate_hz, 2.0 * target_hz, phase_h)
    for name in OCCIPITAL_CHANNELS:
        data[config.layout.index(name), sl] += wave


def _inject_alpha(
    data: np.ndarray, sl: slice, config: SynthConfig, rng: np.random.Generator
) -> None:
    """Add a 10 Hz eyes-closed alpha sinusoid to occipital rows."""
    n = sl.stop - sl.start
    amp = np.sqrt(2.0 * config.snr)
    wave = amp * _sine(n, config.rate_hz, 10.0, rng.uniform(0.0, 2.0 * np.pi))
    for name in OCCIPITAL_CHANNELS:
        data[config.layout.index(name), sl] += wave


def lateralized_mixing(config: SynthConfig, task: Task) -> np.ndarray:
    """The fixed 2-source mixing matrix for a task, shape (channels, 2).

    Columns are orthonormal, so the matrix's pseudoinverse rows (the true
    unmixing directions) equal the columns themselves.  Deterministic in
    (seed, task).
    """
    rng = _rng(config, _TAG_MIXING, _task_index(task))
    m1 = rng.standard_normal(config.layout.count)
    m2 = rng.standard_normal(config.layout.count)
    m1 /= np.linalg.norm(m1)
    m2 -= (m2 @ m1) * m1
    m2 /= np.linalg.norm(m2)
    return np.stack([m1, m2], axis=1)


def _inject_lateralized(
    data: np.ndarray,
    sl: slice,
    config: SynthConfig,
    task: Task,
    label: Truth,
    variance_ratio: float,
    rng: np.random.Generator,
) -> None:
    """Add the two mixed white sources; yes boosts source 1, no boosts source 2."""
    n = sl.stop - sl.start
    mixing = lateralized_mixing(config, task)
    strong = np.sqrt(config.snr * variance_ratio)
    weak = np.sqrt(config.snr)
    std1, std2 = (strong, weak) if label is Truth.YES else (weak, strong)
    s1 = std1 * rng.standard_normal(n)
    s2 = std2 * rng.standard_normal(n)
    data[:, sl] += np.outer(mixing[:, 0], s1) + np.outer(mixing[:, 1], s2)


def gen_ssvep_trial(
    config: SynthConfig,
    target_hz: float,
    harmonic_gain: float | None = None,
    epoch_seconds: float = 5.0,
    group_id: int = 0,
    rng: np.random.Generator | None = None,
) -> Epoch:
    """One flicker-response epoch: pink background + target and 2x-target sines.

    The default harmonic gain is 1.5 for the 10 Hz target (second harmonic
    stronger than the fundamental) and 0.5 otherwise.  Label is yes for 10 Hz,
    no for any other target.
    """
    if harmonic_gain is None:
        harmonic_gain = 1.5 if target_hz == 10.0 else 0.5
    n = int(round(epoch_seconds * config.rate_hz))
    rng = rng if rng is not None else _rng(config, _TAG_TRIAL, 0, group_id)
    data = _pink_block(config.layout.count, n, rng)
    _inject_flicker(data, slice(0, n), config, target_hz, harmonic_gain, rng)
    label = Truth.YES if target_hz == 10.0 else Truth.NO
    return Epoch(data=data, label=label, group_id=group_id, task=Task.SSVEP)


def gen_alpha_trial(
    config: SynthConfig,
    closed: bool,
    epoch_seconds: float = 5.0,
    group_id: int = 0,
    rng: np.random.Generator | None = None,
) -> Epoch:
    """One eyes-open/closed epoch; closed adds occipital alpha (label yes)."""
    n = int(round(epoch_seconds * config.rate_hz))
    rng = rng if rng is not None else _rng(config, _TAG_TRIAL, 1, group_id)
    data = _pink_block(config.layout.count, n, rng)
    if closed:
        _inject_alpha(data, slice(0, n), config, rng)
    label = Truth.YES if closed else Truth.NO
    return Epoch(data=data, label=label, group_id=group_id, task=Task.EYES_OPEN_CLOSED)


def gen_lateralized_trial(
    config: SynthConfig,
    label: Truth,
    task: Task = Task.MOTOR_IMAGERY,
    variance_ratio: float = 4.0,
    epoch_seconds: float = 5.0,
    group_id: int = 0,
    rng: np.random.Generator | None = None,
) -> Epoch:
    """One lateralized-activity epoch over pink background."""
    if variance_ratio <= 0:
        raise ValueError("variance_ratio must be positive")
    n = int(round(epoch_seconds * config.rate_hz))
    rng = rng if rng is not None else _rng(config, _TAG_TRIAL, 2 + _task_index(task), group_id)
    data = _pink_block(config.layout.count, n, rng)
    _inject_lateralized(data, slice(0, n), config, task, Truth(label), variance_ratio, rng)
    return Epoch(data=data, label=Truth(label), group_id=group_id, task=Task(task))


def _balanced_truths(n_trials: int, rng: np.random.Generator) -> list[Truth]:
    half = (n_trials + 1) // 2
    truths = [Truth.YES] * half + [Truth.NO] * (n_trials - half)
    order = rng.permutation(len(truths))
    return [truths[i] for i in order]


def gen_ssvep_epochs(config: SynthConfig, n_trials: int = 60) -> EpochSet:
    """A bare epoch set of flicker trials (balanced 10/15 Hz targets)."""
    truths = _balanced_truths(n_trials, _rng(config, _TAG_TRUTHS, 0))
    epochs = [
        gen_ssvep_trial(config, 10.0 if t is Truth.YES else 15.0, group_id=i)
        for i, t in enumerate(truths)
    ]
    return EpochSet(tuple(epochs), rate_hz=config.rate_hz, layout=config.layout)


def gen_lateralized_epochs(
    config: SynthConfig,
    n_trials: int = 60,
    task: Task = Task.MOTOR_IMAGERY,
    variance_ratio: float = 4.0,
) -> EpochSet:
    """A bare epoch set of lateralized trials (balanced yes/no)."""
    truths = _balanced_truths(n_trials, _rng(config, _TAG_TRUTHS, 1 + _task_index(task)))
    epochs = [
        gen_lateralized_trial(config, t, task=task, variance_ratio=variance_ratio, group_id=i)
        for i, t in enumerate(truths)
    ]
    return EpochSet(tuple(epochs), rate_hz=config.rate_hz, layout=config.layout)


def _morlet_burst(rate_hz: float, carrier_hz: float = 25.0, sigma_s: float = 0.05) -> np.ndarray:
    half = int(round(3.0 * sigma_s * rate_hz))
    t = np.arange(-half, half + 1) / rate_hz
    return np.cos(2.0 * np.pi * carrier_hz * t) * np.exp(-(t**2) / (2.0 * sigma_s**2))


def gen_artifacts(rec: Recording, config: SynthConfig) -> Recording:
    """Overlay configured artifacts; with both toggles off, returns ``rec``.

    wifi_wavelets adds a 25 Hz wavelet burst on Cz once per second, strong
    enough to dominate that channel's variance; noisy_channel adds broadband
    white noise (std 5) to P4.
    """
    if not (config.wifi_wavelets or config.noisy_channel):
        return rec
    data = rec.data.copy()
    if config.wifi_wavelets:
        burst = 10.0 * _morlet_burst(rec.rate_hz)
        row = rec.layout.index(_ARTIFACT_CHANNEL)
        period = int(round(rec.rate_hz))
        start = period // 2
        for begin in range(start, rec.n_samples - len(burst), period):
            data[row, begin : begin + len(burst)] += burst
    if config.noisy_channel:
        rng = _rng(config, _TAG_NOISY)
        row = rec.layout.index(_NOISY_CHANNEL)
        data[row] += 5.0 * rng.standard_normal(rec.n_samples)
    return Recording(data=data, rate_hz=rec.rate_hz, layout=rec.layout, meta=rec.meta)


def _head_transient(n_samples: int, rate_hz: float) -> np.ndarray:
    """Damped low-frequency oscillation standing in for an amplifier settle spike."""
    t = np.arange(n_samples) / rate_hz
    return 30.0 * np.sin(2.0 * np.pi * 7.0 * t) * np.exp(-t / 0.3)


def gen_corpus(
    config: SynthConfig,
    tasks: tuple[Task, ...] | None = None,
    runs: int = 6,
    trials_per_task: int = 10,
    laryngeal_imagery_last_run: int = 3,
    variance_ratio: float = 4.0,
    head_seconds: float = 2.0,
) -> Corpus:
    """Generate a full multi-run session corpus with marker logs.

    Each run is one continuous recording: a settling head (with a transient,
    meant to be trimmed), then every requested task in protocol order.  The
    eyes task runs as contiguous alternating closed/open 5 s segments with
    stimulus markers only; every other task runs discrete trials with prompt,
    response-key, and stimulus markers.  Trial truths are balanced per task
    per run.  The last run's laryngeal imagery block is shortened to
    ``laryngeal_imagery_last_run`` trials (an aborted final block), so the
    default 6x10 corpus carries 53 laryngeal imagery trials.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if trials_per_task < 1:
        raise ValueError("trials_per_task must be >= 1")
    task_list = tuple(t for t in TASK_ORDER if tasks is None or t in tuple(tasks))
    if not task_list:
        raise ValueError("no tasks selected")
    rate = config.rate_hz
    epoch_n = int(round(5.0 * rate))
    lead_n = int(round(1.0 * rate))  # prompt precedes stimulus by 1 s
    gap_n = int(round(0.5 * rate))
    task_gap_n = int(round(1.0 * rate))
    head_n = int(round(head_seconds * rate))

    corpus: list[tuple[Recording, MarkerLog]] = []
    for run in range(runs):
        # first pass: timing plan
        plan: list[tuple[Task, int, Truth, int]] = []  # (task, trial, truth, start_sample)
        t = head_n
        for task in task_list:
            n_trials = trials_per_task
            if task is Task.LARYNGEAL_IMAGERY and run == runs - 1:
                n_trials = min(laryngeal_imagery_last_run, trials_per_task)
            if task is Task.EYES_OPEN_CLOSED:
                truths = [Truth.YES if i % 2 == 0 else Truth.NO for i in range(n_trials)]
            else:
                truths = _balanced_truths(
                    trials_per_task, _rng(config, _TAG_TRUTHS, run, _task_index(task))
                )[:n_trials]
            for i in range(n_trials):
                if task is Task.EYES_OPEN_CLOSED:
                    plan.append((task, i, truths[i], t))
                    t += epoch_n
                else:
                    plan.append((task, i, truths[i], t + lead_n))
                    t += lead_n + epoch_n + gap_n
            t += task_gap_n
        total_n = t + gap_n

        bg_rng = _rng(config, _TAG_BACKGROUND, run)
        data = _pink_block(config.layout.count, total_n, bg_rng)
        data[:, :head_n] += _head_transient(head_n, rate)

        markers: list[EventMarker] = []
        for task, trial, truth, start in plan:
            sl = slice(start, start + epoch_n)
            trial_rng = _rng(config, _TAG_TRIAL, run, _task_index(task), trial)
            if task is Task.SSVEP:
                target = 10.0 if truth is Truth.YES else 15.0
                gain = 1.5 if truth is Truth.YES else 0.5
                _inject_flicker(data, sl, config, target, gain, trial_rng)
            elif task is Task.EYES_OPEN_CLOSED:
                if truth is Truth.YES:
                    _inject_alpha(data, sl, config, trial_rng)
            else:
                _inject_lateralized(data, sl, config, task, truth, variance_ratio, trial_rng)
            if task is not Task.EYES_OPEN_CLOSED:
                markers.append(EventMarker(start - lead_n, task, trial, truth, Phase.PROMPT_SHOWN))
                markers.append(
                    EventMarker(start - lead_n + int(0.4 * rate), task, trial, truth, Phase.RESPONSE_KEY)
                )
            markers.append(EventMarker(start, task, trial, truth, Phase.STIMULUS_START))
            markers.append(EventMarker(start + epoch_n, task, trial, truth, Phase.STIMULUS_END))

        markers.sort(key=lambda m: m.t_sample)
        rec = Recording(
            data=data,
            rate_hz=rate,
            layout=config.layout,
            meta={
                "generator": "session_corpus",
                "run": run,
                "seed": int(config.seed),
                "snr": float(config.snr),
                "tasks": [task.value for task in task_list],
            },
        )
        rec = gen_artifacts(rec, config)
        corpus.append((rec, MarkerLog(tuple(markers))))
    return tuple(corpus)
