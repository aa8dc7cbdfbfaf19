"""Container formats: round trips, byte determinism, malformed-input errors."""
import json

import numpy as np
import pytest

from bcikit.core import ChannelLayout, EventMarker, MarkerLog, Phase, Recording, Task, Truth
from bcikit.io import (
    FEATURES_MAGIC,
    RECORDING_MAGIC,
    load_corpus,
    load_features,
    load_markers,
    load_recording,
    read_recording_csv,
    save_corpus,
    save_features,
    save_markers,
    save_recording,
)


@pytest.fixture
def small_rec():
    rng = np.random.default_rng(11)
    return Recording(
        data=rng.normal(size=(3, 40)),
        rate_hz=20.0,
        layout=ChannelLayout(("O1", "O2", "Cz")),
        meta={"source": "unit-test"},
    )


def test_recording_round_trip(tmp_path, small_rec):
    path = tmp_path / "r.bcirec"
    save_recording(small_rec, path)
    back = load_recording(path)
    # payload is float32, so exact at float32 resolution
    np.testing.assert_allclose(back.data, small_rec.data, rtol=0, atol=1e-6)
    assert back.rate_hz == small_rec.rate_hz
    assert back.layout == small_rec.layout
    assert back.meta == small_rec.meta


def test_recording_file_layout_and_determinism(tmp_path, small_rec):
    p1, p2 = tmp_path / "a.bcirec", tmp_path / "b.bcirec"
    save_recording(small_rec, p1)
    save_recording(small_rec, p2)
    b1, b2 = p1.read_bytes(), p2.read_bytes()
    assert b1 == b2  # no timestamps, sorted keys
    header, _, payload = b1.partition(b"\n")
    assert header.startswith(RECORDING_MAGIC + b" ")
    meta = json.loads(header[len(RECORDING_MAGIC) + 1 :])
    assert meta["n_samples"] == 40
    assert len(payload) == 3 * 40 * 4


def test_recording_load_errors(tmp_path, small_rec):
    with pytest.raises(FileNotFoundError):
        load_recording(tmp_path / "missing.bcirec")

    bad = tmp_path / "bad.bcirec"
    bad.write_bytes(b"NOPE {}\n")
    with pytest.raises(ValueError, match="magic"):
        load_recording(bad)

    bad.write_bytes(RECORDING_MAGIC + b" not-json\n")
    with pytest.raises(ValueError, match="header JSON"):
        load_recording(bad)

    # header claims more channels than the payload holds
    path = tmp_path / "trunc.bcirec"
    save_recording(small_rec, path)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) - 40 * 4])
    with pytest.raises(ValueError, match="channel count mismatch"):
        load_recording(path)


def test_csv_import(tmp_path):
    path = tmp_path / "fixture.csv"
    path.write_text("O1,O2\n1.0,2.0\n3.0,4.0\n5.0,6.0\n")
    rec = read_recording_csv(path, rate_hz=10.0)
    assert rec.layout.names == ("O1", "O2")
    np.testing.assert_array_equal(rec.data, [[1.0, 3.0, 5.0], [2.0, 4.0, 6.0]])

    path.write_text("O1,O2\n1.0,2.0,3.0\n")
    with pytest.raises(ValueError, match="columns"):
        read_recording_csv(path, rate_hz=10.0)


def test_marker_round_trip_and_line_errors(tmp_path):
    log = MarkerLog((
        EventMarker(0, Task.SSVEP, 0, Truth.YES, Phase.PROMPT_SHOWN),
        EventMarker(1000, Task.SSVEP, 0, Truth.YES, Phase.STIMULUS_START),
        EventMarker(6000, Task.SSVEP, 0, Truth.YES, Phase.STIMULUS_END),
    ))
    path = tmp_path / "m.jsonl"
    save_markers(log, path)
    assert load_markers(path) == log
    assert len(path.read_text().strip().splitlines()) == 3

    path.write_text('{"t_sample": 0, "task": "ssvep", "trial": 0, "truth": "yes", "phase": "prompt_shown"}\nnot json\n')
    with pytest.raises(ValueError, match=r":2: invalid JSON"):
        load_markers(path)

    path.write_text('{"t_sample": 0}\n')
    with pytest.raises(ValueError, match=r":1: .*missing fields"):
        load_markers(path)

    with pytest.raises(FileNotFoundError):
        load_markers(tmp_path / "missing.jsonl")


def test_feature_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    rows = rng.normal(size=(6, 4))
    labels = ["yes", "no", "yes", "no", "yes", "no"]
    groups = [0, 0, 1, 1, 2, 2]
    path = tmp_path / "f.bcifeat"
    save_features(rows, labels, groups, path, meta={"task": "ssvep"})
    back_rows, back_labels, back_groups, meta = load_features(path)
    np.testing.assert_allclose(back_rows, rows, atol=1e-6)
    assert back_labels == labels
    assert back_groups == groups
    assert meta == {"task": "ssvep"}
    assert path.read_bytes().startswith(FEATURES_MAGIC + b" ")


def test_feature_errors(tmp_path):
    with pytest.raises(ValueError, match="align"):
        save_features(np.zeros((2, 3)), ["yes"], [0, 1], tmp_path / "x.bcifeat")
    bad = tmp_path / "bad.bcifeat"
    bad.write_bytes(b"WRONG {}\n")
    with pytest.raises(ValueError, match="magic"):
        load_features(bad)


def test_corpus_round_trip(tmp_path, ssvep_corpus):
    out = tmp_path / "corpus"
    save_corpus(ssvep_corpus, out, meta={"seed": 7})
    names = sorted(p.name for p in out.iterdir())
    assert names == [
        "corpus.json",
        "run_00.bcirec",
        "run_00.markers.jsonl",
        "run_01.bcirec",
        "run_01.markers.jsonl",
        "run_02.bcirec",
        "run_02.markers.jsonl",
    ]
    back = load_corpus(out)
    assert len(back) == 3
    for (rec_a, log_a), (rec_b, log_b) in zip(ssvep_corpus, back):
        np.testing.assert_allclose(rec_b.data, rec_a.data, atol=1e-5)
        assert log_b == log_a

    with pytest.raises(FileNotFoundError):
        load_corpus(tmp_path / "nowhere")
    (out / "run_01.markers.jsonl").unlink()
    with pytest.raises(FileNotFoundError, match="run_01"):
        load_corpus(out)
