"""File formats: recordings, marker logs, feature matrices, corpora.

Recordings are stored as a single file with a one-line JSON header and a raw
float32 little-endian channel-major payload::

    BCIREC1 {"layout": [...], "meta": {...}, "n_samples": 5000, "rate_hz": 1000.0}\\n
    <n_channels * n_samples * 4 bytes>

Marker logs are newline-delimited JSON, one event object per line.  Feature
matrices use the same header-plus-payload envelope (magic ``BCIFEAT1``).  All
writers emit canonical, byte-reproducible output: JSON keys are sorted and no
wall-clock timestamps are embedded.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .core import ChannelLayout, EventMarker, MarkerLog, Recording

RECORDING_MAGIC = b"BCIREC1"
FEATURES_MAGIC = b"BCIFEAT1"

Corpus = tuple[tuple[Recording, MarkerLog], ...]


def _canonical_json(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def save_recording(rec: Recording, path: str | Path) -> None:
    """Write ``rec`` to ``path`` in the header-plus-float32 container format."""
    path = Path(path)
    header = {
        "layout": list(rec.layout.names),
        "meta": rec.meta,
        "n_samples": rec.n_samples,
        "rate_hz": rec.rate_hz,
    }
    payload = np.ascontiguousarray(rec.data, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(RECORDING_MAGIC + b" " + _canonical_json(header).encode("utf-8") + b"\n")
        fh.write(payload)


def load_recording(path: str | Path) -> Recording:
    """Read a recording written by :func:`save_recording`.

    Raises FileNotFoundError for a missing path and ValueError for a malformed
    header, an inconsistent channel count, or non-finite samples.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"recording file not found: {path}")
    with open(path, "rb") as fh:
        first = fh.readline()
        payload = fh.read()
    if not first.startswith(RECORDING_MAGIC + b" "):
        raise ValueError(f"{path}: malformed header, expected leading {RECORDING_MAGIC.decode()} magic")
    try:
        header = json.loads(first[len(RECORDING_MAGIC) + 1 :].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: malformed header JSON: {exc}") from exc
    try:
        names = [str(n) for n in header["layout"]]
        n_samples = int(header["n_samples"])
        rate_hz = float(header["rate_hz"])
        meta = dict(header.get("meta", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: malformed header fields: {exc}") from exc
    expected = len(names) * n_samples * 4
    if len(payload) != expected:
        have_rows = len(payload) // (4 * n_samples) if n_samples else 0
        raise ValueError(
            f"{path}: channel count mismatch, header names {len(names)} channels "
            f"({expected} payload bytes) but file holds {len(payload)} bytes "
            f"(~{have_rows} channels)"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(len(names), n_samples)
    try:
        return Recording(
            data=data.astype(np.float64),
            rate_hz=rate_hz,
            layout=ChannelLayout(tuple(names)),
            meta=meta,
        )
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def read_recording_csv(path: str | Path, rate_hz: float) -> Recording:
    """Import a hand-made CSV fixture: header row of channel names, one row
    per sample, one column per channel."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"csv file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path}: empty CSV")
        names = tuple(col.strip() for col in header.split(","))
        body = np.loadtxt(fh, delimiter=",", ndmin=2)
    if body.shape[1] != len(names):
        raise ValueError(
            f"{path}: header names {len(names)} columns but rows have {body.shape[1]}"
        )
    return Recording(
        data=body.T,
        rate_hz=rate_hz,
        layout=ChannelLayout(names),
        meta={"source": str(path)},
    )


def save_markers(log: MarkerLog, path: str | Path) -> None:
    """Write a marker log as newline-delimited JSON."""
    path = Path(path)
    lines = [json.dumps(m.to_dict(), separators=(",", ":")) for m in log]
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def load_markers(path: str | Path) -> MarkerLog:
    """Read a newline-delimited JSON marker log written by :func:`save_markers`."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"marker file not found: {path}")
    markers: list[EventMarker] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise ValueError(f"{path}:{lineno}: marker line is not an object")
            try:
                markers.append(EventMarker.from_dict(record))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    try:
        return MarkerLog(tuple(markers))
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def save_features(
    rows: np.ndarray,
    labels: Sequence[str],
    group_ids: Sequence[int],
    path: str | Path,
    meta: Mapping[str, object] | None = None,
) -> None:
    """Write a feature matrix in the ``BCIFEAT1`` header-plus-float32 format."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise ValueError("feature rows must be 2-D")
    if len(labels) != rows.shape[0] or len(group_ids) != rows.shape[0]:
        raise ValueError("labels/group_ids must align with feature rows")
    header = {
        "group_ids": [int(g) for g in group_ids],
        "labels": [str(l) for l in labels],
        "meta": dict(meta or {}),
        "n_features": int(rows.shape[1]),
        "n_rows": int(rows.shape[0]),
    }
    with open(path, "wb") as fh:
        fh.write(FEATURES_MAGIC + b" " + _canonical_json(header).encode("utf-8") + b"\n")
        fh.write(np.ascontiguousarray(rows, dtype="<f4").tobytes())


def load_features(path: str | Path) -> tuple[np.ndarray, list[str], list[int], dict[str, object]]:
    """Read a feature file; returns (rows, labels, group_ids, meta)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"feature file not found: {path}")
    with open(path, "rb") as fh:
        first = fh.readline()
        payload = fh.read()
    if not first.startswith(FEATURES_MAGIC + b" "):
        raise ValueError(f"{path}: malformed header, expected {FEATURES_MAGIC.decode()} magic")
    try:
        header = json.loads(first[len(FEATURES_MAGIC) + 1 :].decode("utf-8"))
        n_rows = int(header["n_rows"])
        n_features = int(header["n_features"])
        labels = [str(l) for l in header["labels"]]
        group_ids = [int(g) for g in header["group_ids"]]
        meta = dict(header.get("meta", {}))
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: malformed feature header: {exc}") from exc
    if len(payload) != n_rows * n_features * 4:
        raise ValueError(f"{path}: payload size does not match header shape")
    rows = np.frombuffer(payload, dtype="<f4").reshape(n_rows, n_features).astype(np.float64)
    return rows, labels, group_ids, meta


def _run_stem(index: int) -> str:
    return f"run_{index:02d}"


def save_corpus(corpus: Corpus, out_dir: str | Path, meta: Mapping[str, object] | None = None) -> None:
    """Write a corpus as run_XX.bcirec / run_XX.markers.jsonl pairs plus a
    corpus.json manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, (rec, log) in enumerate(corpus):
        save_recording(rec, out / f"{_run_stem(i)}.bcirec")
        save_markers(log, out / f"{_run_stem(i)}.markers.jsonl")
    manifest = {"format": "bcikit-corpus", "meta": dict(meta or {}), "runs": len(corpus), "version": 1}
    with open(out / "corpus.json", "w", encoding="utf-8") as fh:
        fh.write(_canonical_json(manifest) + "\n")


def load_corpus(corpus_dir: str | Path) -> Corpus:
    """Load every run_XX.bcirec / run_XX.markers.jsonl pair under a directory."""
    root = Path(corpus_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    rec_paths = sorted(root.glob("run_*.bcirec"))
    if not rec_paths:
        raise ValueError(f"{root}: no run_*.bcirec files found")
    pairs: list[tuple[Recording, MarkerLog]] = []
    for rec_path in rec_paths:
        marker_path = rec_path.parent / (rec_path.stem + ".markers.jsonl")
        if not marker_path.is_file():
            raise FileNotFoundError(f"marker file not found for {rec_path.name}: {marker_path}")
        pairs.append((load_recording(rec_path), load_markers(marker_path)))
    return tuple(pairs)
