"""Common spatial patterns for two-class epoch sets.

Per-epoch covariances are trace-normalized, averaged per class, and shrunk
toward a scaled identity; the spatial filters are the generalized
eigenvectors of (C_yes, C_yes + C_no).  Eigenvalues live in (0, 1) and give
the share of composite variance each filtered component carries for the yes
class, so the most discriminative components sit at both ends of the
spectrum: the model keeps the n/2 largest and n/2 smallest, ordered by
eigenvalue descending.
"""
from __future__ import annotations

import io as _io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import linalg

from .core import ChannelLayout, Epoch, EpochSet, Truth


@dataclass(frozen=True)
class CspModel:
    """Fitted spatial filters plus everything needed to audit them.

    filters
        (n_components, n_channels); row i projects a multichannel epoch onto
        component i.  Rows are sign-fixed so each row's largest-magnitude
        entry is positive.
    patterns
        (n_channels, n_components); column i is the activation pattern
        (forward model) of component i, from the pseudoinverse of the full
        filter matrix.
    eigenvalues
        (n_components,) strictly inside (0, 1), descending.
    class_covariances
        the shrunk, averaged (yes, no) covariances the filters were fit from.
    """

    filters: np.ndarray
    patterns: np.ndarray
    eigenvalues: np.ndarray
    class_covariances: tuple[np.ndarray, np.ndarray]
    channel_names: tuple[str, ...]
    shrinkage: float

    def __post_init__(self) -> None:
        filters = np.asarray(self.filters, dtype=np.float64)
        patterns = np.asarray(self.patterns, dtype=np.float64)
        eig = np.asarray(self.eigenvalues, dtype=np.float64)
        object.__setattr__(self, "filters", filters)
        object.__setattr__(self, "patterns", patterns)
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "channel_names", tuple(self.channel_names))
        cov = tuple(np.asarray(c, dtype=np.float64) for c in self.class_covariances)
        object.__setattr__(self, "class_covariances", cov)
        n_comp, n_ch = filters.shape
        if patterns.shape != (n_ch, n_comp):
            raise ValueError("patterns must be (n_channels, n_components)")
        if eig.shape != (n_comp,):
            raise ValueError("need one eigenvalue per kept component")
        if np.any(eig <= 0.0) or np.any(eig >= 1.0):
            raise ValueError("eigenvalues must lie strictly inside (0, 1)")
        if np.any(np.diff(eig) > 0):
            raise ValueError("eigenvalues must be ordered descending")
        if len(self.channel_names) != n_ch:
            raise ValueError("channel_names must match filter columns")

    @property
    def n_components(self) -> int:
        return int(self.filters.shape[0])


def _epoch_covariance(data: np.ndarray) -> np.ndarray:
    """Trace-normalized covariance of one (channels, samples) epoch."""
    centered = data - data.mean(axis=1, keepdims=True)
    cov = centered @ centered.T / max(data.shape[1] - 1, 1)
    trace = np.trace(cov)
    if not trace > 0:
        raise ValueError("epoch covariance not computable: zero variance")
    return cov / trace


def fit_csp(train: EpochSet, n_components: int = 4, shrinkage: float = 0.05) -> CspModel:
    """Fit spatial filters separating the yes/no classes of an epoch set.

    Parameters
    ----------
    train : EpochSet
        epochs of both classes; every epoch needs nonzero variance.
    n_components : int
        number of filters to keep; even, at least 2, at most the channel
        count.  Half come from each end of the eigenvalue spectrum.
    shrinkage : float
        weight in [0, 1] pulling each class covariance toward a scaled
        identity before the eigendecomposition.
    """
    n_ch = train.layout.count
    if n_components < 2 or n_components % 2 != 0:
        raise ValueError(f"n_components must be even and >= 2, got {n_components}")
    if n_components > n_ch:
        raise ValueError(f"n_components {n_components} exceeds channel count {n_ch}")
    if not (0.0 <= shrinkage <= 1.0):
        raise ValueError(f"shrinkage must be in [0, 1], got {shrinkage}")

    by_class: dict[Truth, list[np.ndarray]] = {Truth.YES: [], Truth.NO: []}
    for epoch in train:
        by_class[epoch.label].append(_epoch_covariance(epoch.data))
    if not by_class[Truth.YES] or not by_class[Truth.NO]:
        raise ValueError("fit_csp needs epochs from both classes")

    def class_cov(covs: list[np.ndarray]) -> np.ndarray:
        mean = np.mean(covs, axis=0)
        target = (np.trace(mean) / n_ch) * np.eye(n_ch)
        return (1.0 - shrinkage) * mean + shrinkage * target

    cov_yes = class_cov(by_class[Truth.YES])
    cov_no = class_cov(by_class[Truth.NO])
    composite = cov_yes + cov_no
    if np.linalg.eigvalsh(composite)[0] <= 1e-12:
        raise ValueError("composite covariance is singular; need more data or shrinkage")

    eigvals, eigvecs = linalg.eigh(cov_yes, composite)
    order = np.argsort(eigvals)[::-1]
    lam = eigvals[order]
    w_full = eigvecs[:, order].T  # rows are filters, eigenvalue descending
    # sign convention: largest-magnitude coefficient of each filter positive
    for row in w_full:
        peak = np.argmax(np.abs(row))
        if row[peak] < 0:
            row *= -1.0
    patterns_full = np.linalg.pinv(w_full)  # columns are forward models

    half = n_components // 2
    kept = list(range(half)) + list(range(n_ch - half, n_ch))
    return CspModel(
        filters=w_full[kept],
        patterns=patterns_full[:, kept],
        eigenvalues=lam[kept],
        class_covariances=(cov_yes, cov_no),
        channel_names=train.layout.names,
        shrinkage=float(shrinkage),
    )


def apply_csp(model: CspModel, epoch: Epoch, layout: ChannelLayout | None = None) -> np.ndarray:
    """Project an epoch through the filters and take normalized log-variance.

    Feature i is ``log(var_i / sum_j var_j)``, which makes the vector exactly
    invariant to positive rescaling of the whole epoch.  If a layout is given
    its names must match the layout the model was fit on.
    """
    if layout is not None and tuple(layout.names) != model.channel_names:
        raise ValueError("epoch layout does not match the layout the model was fit on")
    if epoch.n_channels != model.filters.shape[1]:
        raise ValueError(
            f"epoch has {epoch.n_channels} channels, model expects {model.filters.shape[1]}"
        )
    projected = model.filters @ epoch.data
    variances = projected.var(axis=1)
    total = variances.sum()
    ratio = variances / total if total > 0 else np.full_like(variances, np.nan)
    # clip keeps features finite for pathological near-zero components
    return np.log(np.clip(ratio, 1e-300, None))


def csp_patterns(model: CspModel) -> np.ndarray:
    """Activation patterns, shape (n_channels, n_components)."""
    return model.patterns.copy()


def epoch_set_csp_features(
    model: CspModel, epoch_set: EpochSet
) -> tuple[np.ndarray, list[Truth], list[int]]:
    """One log-variance feature row per epoch; returns (rows, labels, groups)."""
    rows = [apply_csp(model, e, layout=epoch_set.layout) for e in epoch_set]
    return (
        np.stack(rows),
        [e.label for e in epoch_set],
        [e.group_id for e in epoch_set],
    )


def patterns_to_csv(model: CspModel) -> str:
    """CSV of activation patterns: one named row per channel, one column per
    component."""
    buf = _io.StringIO()
    header = ",".join(f"comp_{i + 1}" for i in range(model.n_components))
    buf.write(f"channel,{header}\n")
    for ci, name in enumerate(model.channel_names):
        row = ",".join(repr(float(v)) for v in model.patterns[ci])
        buf.write(f"{name},{row}\n")
    return buf.getvalue()


def save_csp(model: CspModel, path: str | Path) -> None:
    """Serialize a fitted model as canonical JSON."""
    doc = {
        "channel_names": list(model.channel_names),
        "class_covariances": [c.tolist() for c in model.class_covariances],
        "eigenvalues": model.eigenvalues.tolist(),
        "filters": model.filters.tolist(),
        "format": "bcikit-csp",
        "patterns": model.patterns.tolist(),
        "shrinkage": model.shrinkage,
        "version": 1,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")


def load_csp(path: str | Path) -> CspModel:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"csp model file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != "bcikit-csp" or doc.get("version") != 1:
        raise ValueError(f"{path}: not a csp model file")
    return CspModel(
        filters=np.asarray(doc["filters"]),
        patterns=np.asarray(doc["patterns"]),
        eigenvalues=np.asarray(doc["eigenvalues"]),
        class_covariances=(
            np.asarray(doc["class_covariances"][0]),
            np.asarray(doc["class_covariances"][1]),
        ),
        channel_names=tuple(doc["channel_names"]),
        shrinkage=float(doc["shrinkage"]),
    )
