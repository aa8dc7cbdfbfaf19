"""Synthetic signal generation: spectra, determinism, session structure."""
import numpy as np
import pytest

from bcikit.core import OCCIPITAL_CHANNELS, Phase, Task, Truth
from bcikit.spectral import power_spectrum
from bcikit.synth import (
    TASK_ORDER,
    SynthConfig,
    gen_alpha_trial,
    gen_artifacts,
    gen_background,
    gen_corpus,
    gen_lateralized_epochs,
    gen_lateralized_trial,
    gen_ssvep_epochs,
    gen_ssvep_trial,
    lateralized_mixing,
    pink_noise,
)


def test_pink_noise_has_unit_std_and_inverse_f_power():
    rng = np.random.default_rng(0)
    x = pink_noise(2**14, rng)
    assert x.std() == pytest.approx(1.0)
    assert abs(x.mean()) < 0.1

    freqs, power = power_spectrum(x, rate_hz=1000.0)
    band = (freqs >= 1.0) & (freqs <= 400.0)
    slope = np.polyfit(np.log(freqs[band]), np.log(power[band]), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.3)

    with pytest.raises(ValueError, match="at least 8"):
        pink_noise(4, rng)


def test_background_is_deterministic_per_seed():
    a = gen_background(SynthConfig(seed=1), seconds=2.0)
    b = gen_background(SynthConfig(seed=1), seconds=2.0)
    c = gen_background(SynthConfig(seed=2), seconds=2.0)
    np.testing.assert_array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)
    assert a.data.shape == (16, 2000)


def test_ssvep_trial_concentrates_power_at_target_and_harmonic():
    cfg = SynthConfig(seed=4)
    ep = gen_ssvep_trial(cfg, 10.0)
    assert ep.label is Truth.YES
    o1 = cfg.layout.index("O1")
    freqs, power = power_spectrum(ep.data[o1], rate_hz=cfg.rate_hz)

    def at(frequency):
        return power[int(np.argmin(np.abs(freqs - frequency)))]

    background = np.median(power[(freqs > 3) & (freqs < 45)])
    assert at(10.0) > 30 * background
    assert at(20.0) > 30 * background  # second harmonic, boosted for 10 Hz
    # a frontal channel sees no flicker response
    fz = cfg.layout.index("Fz")
    _, power_fz = power_spectrum(ep.data[fz], rate_hz=cfg.rate_hz)
    assert power_fz[int(np.argmin(np.abs(freqs - 10.0)))] < 10 * background

    assert gen_ssvep_trial(cfg, 15.0).label is Truth.NO


def test_ssvep_trial_snr_scales_tone_power():
    quiet = gen_ssvep_trial(SynthConfig(seed=4, snr=0.25), 10.0)
    loud = gen_ssvep_trial(SynthConfig(seed=4, snr=4.0), 10.0)
    o1 = 6  # O1 row in the default montage

    def tone_power(ep):
        freqs, power = power_spectrum(ep.data[o1], rate_hz=1000.0)
        return power[int(np.argmin(np.abs(freqs - 10.0)))]

    assert tone_power(loud) > 4 * tone_power(quiet)


def test_alpha_trial_is_occipital_and_labelled():
    cfg = SynthConfig(seed=4)
    closed = gen_alpha_trial(cfg, closed=True)
    opened = gen_alpha_trial(cfg, closed=False)
    assert closed.label is Truth.YES and opened.label is Truth.NO
    o2 = cfg.layout.index("O2")
    freqs, p_closed = power_spectrum(closed.data[o2], rate_hz=cfg.rate_hz)
    _, p_open = power_spectrum(opened.data[o2], rate_hz=cfg.rate_hz)
    k10 = int(np.argmin(np.abs(freqs - 10.0)))
    assert p_closed[k10] > 10 * p_open[k10]


def test_lateralized_mixing_is_orthonormal_and_task_specific():
    cfg = SynthConfig(seed=4)
    m1 = lateralized_mixing(cfg, Task.MOTOR_IMAGERY)
    m2 = lateralized_mixing(cfg, Task.MOTOR_IMAGERY)
    m3 = lateralized_mixing(cfg, Task.LARYNGEAL_IMAGERY)
    np.testing.assert_array_equal(m1, m2)
    assert not np.array_equal(m1, m3)
    np.testing.assert_allclose(m1.T @ m1, np.eye(2), atol=1e-12)


def test_lateralized_trial_boosts_the_labelled_source():
    cfg = SynthConfig(seed=4)
    mixing = lateralized_mixing(cfg, Task.MOTOR_IMAGERY)
    yes_ep = gen_lateralized_trial(cfg, Truth.YES, variance_ratio=4.0)
    no_ep = gen_lateralized_trial(cfg, Truth.NO, variance_ratio=4.0)
    var_yes_src = (mixing[:, 0] @ yes_ep.data).var()
    var_yes_src_no = (mixing[:, 0] @ no_ep.data).var()
    assert var_yes_src > 1.5 * var_yes_src_no
    with pytest.raises(ValueError, match="variance_ratio"):
        gen_lateralized_trial(cfg, Truth.YES, variance_ratio=0.0)


def test_bare_epoch_sets_are_balanced():
    es = gen_ssvep_epochs(SynthConfig(seed=9), n_trials=20)
    labels = [e.label for e in es]
    assert labels.count(Truth.YES) == 10
    assert [e.group_id for e in es] == list(range(20))

    lat = gen_lateralized_epochs(SynthConfig(seed=9), n_trials=21)
    labs = [e.label for e in lat]
    assert labs.count(Truth.YES) == 11  # odd count rounds toward yes


def test_artifact_toggles():
    cfg_off = SynthConfig(seed=2)
    rec = gen_background(cfg_off, seconds=4.0)
    assert gen_artifacts(rec, cfg_off) is rec

    wl = gen_artifacts(rec, SynthConfig(seed=2, wifi_wavelets=True))
    cz = rec.layout.index("Cz")
    others = [i for i in range(16) if i != cz]
    assert wl.data[cz].var() > 2 * np.median([wl.data[i].var() for i in others])
    np.testing.assert_array_equal(wl.data[others], rec.data[others])

    noisy = gen_artifacts(rec, SynthConfig(seed=2, noisy_channel=True))
    p4 = rec.layout.index("P4")
    assert noisy.data[p4].std() > 3 * rec.data[p4].std()


def test_corpus_is_byte_deterministic():
    kwargs = dict(tasks=(Task.SSVEP, Task.MOTOR_IMAGERY), runs=2)
    a = gen_corpus(SynthConfig(seed=6), **kwargs)
    b = gen_corpus(SynthConfig(seed=6), **kwargs)
    assert len(a) == len(b) == 2
    for (rec_a, log_a), (rec_b, log_b) in zip(a, b):
        np.testing.assert_array_equal(rec_a.data, rec_b.data)
        assert log_a == log_b
    c = gen_corpus(SynthConfig(seed=7), **kwargs)
    assert not np.array_equal(a[0][0].data, c[0][0].data)


@pytest.fixture(scope="module")
def full_corpus():
    return gen_corpus(SynthConfig(seed=1), runs=6, trials_per_task=10)


def test_full_corpus_trial_counts(full_corpus):
    assert len(full_corpus) == 6
    counts = {task: 0 for task in TASK_ORDER}
    for _, log in full_corpus:
        for task in TASK_ORDER:
            counts[task] += len(log.stimulus_starts(task))
    # every task runs 6 x 10 trials except the aborted final block
    for task in TASK_ORDER:
        assert counts[task] == (53 if task is Task.LARYNGEAL_IMAGERY else 60)


def test_full_corpus_run_layout(full_corpus):
    rec, log = full_corpus[0]
    assert rec.rate_hz == 1000.0
    assert rec.layout.count == 16
    assert rec.meta["run"] == 0
    assert rec.meta["seed"] == 1
    assert log.tasks() == TASK_ORDER  # session order preserved

    # eyes segments are contiguous 5 s blocks, alternating truths, yes first
    eyes = log.stimulus_starts(Task.EYES_OPEN_CLOSED)
    assert [m.truth for m in eyes[:4]] == [Truth.YES, Truth.NO, Truth.YES, Truth.NO]
    starts = [m.t_sample for m in eyes]
    assert all(b - a == 5000 for a, b in zip(starts, starts[1:]))
    eyes_all = log.for_task(Task.EYES_OPEN_CLOSED)
    assert {m.phase for m in eyes_all} == {Phase.STIMULUS_START, Phase.STIMULUS_END}

    # cued tasks carry the full prompt/response/stimulus sequence
    ssvep = log.for_task(Task.SSVEP)
    first = [m for m in ssvep if m.trial == 0]
    phases = [m.phase for m in first]
    assert phases == [
        Phase.PROMPT_SHOWN,
        Phase.RESPONSE_KEY,
        Phase.STIMULUS_START,
        Phase.STIMULUS_END,
    ]
    t = {m.phase: m.t_sample for m in first}
    assert t[Phase.STIMULUS_START] - t[Phase.PROMPT_SHOWN] == 1000
    assert t[Phase.RESPONSE_KEY] - t[Phase.PROMPT_SHOWN] == 400
    assert t[Phase.STIMULUS_END] - t[Phase.STIMULUS_START] == 5000

    # consecutive cued trials leave the 500 ms gap plus the 1 s prompt lead
    ssvep_starts = [m.t_sample for m in log.stimulus_starts(Task.SSVEP)]
    assert all(b - a == 6500 for a, b in zip(ssvep_starts, ssvep_starts[1:]))


def test_full_corpus_balances_truths_per_run(full_corpus):
    for _, log in full_corpus[:-1]:
        starts = log.stimulus_starts(Task.MOTOR_IMAGERY)
        truths = [m.truth for m in starts]
        assert truths.count(Truth.YES) == 5


def test_corpus_task_subset_and_validation():
    corpus = gen_corpus(SynthConfig(seed=0), tasks=(Task.SSVEP,), runs=1)
    _, log = corpus[0]
    assert log.tasks() == (Task.SSVEP,)
    with pytest.raises(ValueError, match="runs"):
        gen_corpus(SynthConfig(seed=0), runs=0)
    with pytest.raises(ValueError, match="trials_per_task"):
        gen_corpus(SynthConfig(seed=0), trials_per_task=0)
    with pytest.raises(ValueError, match="no tasks"):
        gen_corpus(SynthConfig(seed=0), tasks=())


def test_head_transient_is_trimmed_away(full_corpus):
    from bcikit.preprocess import trim_head

    rec, _ = full_corpus[0]
    head_std = rec.data[:, :2000].std()
    trimmed = trim_head(rec, 2.0)
    assert head_std > 2 * trimmed.data[:, :2000].std()
