"""Pipeline configuration: defaults, INI file loading, content hashing.

The config file is plain INI (stdlib configparser), one section per stage::

    [filter]
    trim_s = 2.0
    lo_hz = 5.0
    ...

Any omitted key falls back to its default, so an empty file is a valid
config.  ``PipelineConfig.sha256()`` hashes the canonical rendering of the
effective values; artifacts embed it so results can be traced to the exact
settings that produced them.
"""
from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path


@dataclass(frozen=True)
class FilterConfig:
    trim_s: float = 2.0
    lo_hz: float | None = 5.0
    hi_hz: float | None = 50.0
    notch_hz: float | None = 60.0
    notch_q: float = 30.0
    order: int = 4
    standardize: bool = True


@dataclass(frozen=True)
class SpectrogramConfig:
    window_samples: int = 2000
    hop_samples: int = 1000
    band_lo_hz: float = 5.0
    band_hi_hz: float = 50.0


@dataclass(frozen=True)
class CspConfig:
    n_components: int = 4
    shrinkage: float = 0.05


@dataclass(frozen=True)
class ClassifierConfig:
    logreg_lambda: float = 1.0
    svm_c: float = 1.0
    knn_k: int = 5
    qda_shrinkage: float = 0.1
    tree_max_depth: int = 5


@dataclass(frozen=True)
class SplitConfig:
    train_ratio: float = 0.8
    cv_folds: int = 3


@dataclass(frozen=True)
class PipelineConfig:
    filter: FilterConfig = field(default_factory=FilterConfig)
    spectrogram: SpectrogramConfig = field(default_factory=SpectrogramConfig)
    csp: CspConfig = field(default_factory=CspConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    epoch_seconds: float = 5.0

    def render(self) -> str:
        """Canonical INI rendering of every effective value."""
        out: list[str] = []
        sections = [
            ("filter", self.filter),
            ("spectrogram", self.spectrogram),
            ("csp", self.csp),
            ("classifier", self.classifier),
            ("split", self.split),
        ]
        for name, section in sections:
            out.append(f"[{name}]")
            for f in fields(section):
                value = getattr(section, f.name)
                out.append(f"{f.name} = {'' if value is None else value}")
            out.append("")
        out.append("[epoch]")
        out.append(f"seconds = {self.epoch_seconds}")
        out.append("")
        return "\n".join(out)

    def sha256(self) -> str:
        return hashlib.sha256(self.render().encode("utf-8")).hexdigest()


def _get(parser: configparser.ConfigParser, section: str, key: str, conv, default):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key).strip()
    if raw == "" or raw.lower() == "none" or raw.lower() == "off":
        return None
    return conv(raw)


def _get_bool(parser: configparser.ConfigParser, section: str, key: str, default: bool) -> bool:
    if not parser.has_option(section, key):
        return default
    return parser.getboolean(section, key)


def load_config(path: str | Path | None) -> PipelineConfig:
    """Load a PipelineConfig from an INI file; ``None`` gives pure defaults."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read_string(path.read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as exc:
        raise ValueError(f"{path}: invalid config: {exc}") from exc

    d = PipelineConfig()
    try:
        filt = FilterConfig(
            trim_s=_get(parser, "filter", "trim_s", float, d.filter.trim_s),
            lo_hz=_get(parser, "filter", "lo_hz", float, d.filter.lo_hz),
            hi_hz=_get(parser, "filter", "hi_hz", float, d.filter.hi_hz),
            notch_hz=_get(parser, "filter", "notch_hz", float, d.filter.notch_hz),
            notch_q=_get(parser, "filter", "notch_q", float, d.filter.notch_q),
            order=_get(parser, "filter", "order", int, d.filter.order),
            standardize=_get_bool(parser, "filter", "standardize", d.filter.standardize),
        )
        spec = SpectrogramConfig(
            window_samples=_get(parser, "spectrogram", "window_samples", int, d.spectrogram.window_samples),
            hop_samples=_get(parser, "spectrogram", "hop_samples", int, d.spectrogram.hop_samples),
            band_lo_hz=_get(parser, "spectrogram", "band_lo_hz", float, d.spectrogram.band_lo_hz),
            band_hi_hz=_get(parser, "spectrogram", "band_hi_hz", float, d.spectrogram.band_hi_hz),
        )
        csp = CspConfig(
            n_components=_get(parser, "csp", "n_components", int, d.csp.n_components),
            shrinkage=_get(parser, "csp", "shrinkage", float, d.csp.shrinkage),
        )
        clf = ClassifierConfig(
            logreg_lambda=_get(parser, "classifier", "logreg_lambda", float, d.classifier.logreg_lambda),
            svm_c=_get(parser, "classifier", "svm_c", float, d.classifier.svm_c),
            knn_k=_get(parser, "classifier", "knn_k", int, d.classifier.knn_k),
            qda_shrinkage=_get(parser, "classifier", "qda_shrinkage", float, d.classifier.qda_shrinkage),
            tree_max_depth=_get(parser, "classifier", "tree_max_depth", int, d.classifier.tree_max_depth),
        )
        split = SplitConfig(
            train_ratio=_get(parser, "split", "train_ratio", float, d.split.train_ratio),
            cv_folds=_get(parser, "split", "cv_folds", int, d.split.cv_folds),
        )
        epoch_seconds = _get(parser, "epoch", "seconds", float, d.epoch_seconds)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{path}: invalid config value: {exc}") from exc
    return PipelineConfig(
        filter=filt,
        spectrogram=spec,
        csp=csp,
        classifier=clf,
        split=split,
        epoch_seconds=epoch_seconds,
    )
