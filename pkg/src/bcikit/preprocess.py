"""Signal conditioning: head trim, zero-phase IIR filtering, standardization.

All stages are pure Recording -> Recording functions.  Filtering runs each
channel forward and backward (sosfiltfilt) so the net phase response is zero;
``FilterSpec.order`` counts the poles of the designed filter, and the default
band filter (order 4) is a cascade of two biquads.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import signal

from .config import FilterConfig
from .core import MarkerLog, Recording


class FilterKind(str, Enum):
    BANDPASS = "bandpass"
    NOTCH = "notch"


@dataclass(frozen=True)
class FilterSpec:
    """Design parameters for one zero-phase IIR stage.

    Bandpass uses ``lo_hz``/``hi_hz`` (Butterworth, ``order`` poles, so order
    must be even and at least 2).  Notch uses ``f0_hz``/``q`` and is always a
    single biquad (order 2).
    """

    kind: FilterKind
    lo_hz: float | None = None
    hi_hz: float | None = None
    f0_hz: float | None = None
    q: float = 30.0
    order: int = 4

    def __post_init__(self) -> None:
        if not isinstance(self.kind, FilterKind):
            object.__setattr__(self, "kind", FilterKind(self.kind))
        if self.kind is FilterKind.BANDPASS:
            if self.lo_hz is None or self.hi_hz is None:
                raise ValueError("bandpass spec needs lo_hz and hi_hz")
            if not (0 < self.lo_hz < self.hi_hz):
                raise ValueError(
                    f"bandpass needs 0 < lo_hz < hi_hz, got ({self.lo_hz}, {self.hi_hz})"
                )
            if self.order < 2 or self.order % 2 != 0:
                raise ValueError(f"bandpass order must be even and >= 2, got {self.order}")
        else:
            if self.f0_hz is None or self.f0_hz <= 0:
                raise ValueError("notch spec needs a positive f0_hz")
            if self.q <= 0:
                raise ValueError("notch q must be positive")
            object.__setattr__(self, "order", 2)

    def sos(self, rate_hz: float) -> np.ndarray:
        """Second-order sections for this spec at a given sampling rate."""
        nyquist = rate_hz / 2.0
        if self.kind is FilterKind.BANDPASS:
            assert self.lo_hz is not None and self.hi_hz is not None
            if self.hi_hz >= nyquist:
                raise ValueError(
                    f"bandpass hi_hz {self.hi_hz} must be below the Nyquist rate {nyquist}"
                )
            return signal.butter(
                self.order // 2, [self.lo_hz, self.hi_hz], btype="bandpass",
                fs=rate_hz, output="sos",
            )
        assert self.f0_hz is not None
        if self.f0_hz >= nyquist:
            raise ValueError(f"notch f0_hz {self.f0_hz} must be below the Nyquist rate {nyquist}")
        b, a = signal.iirnotch(self.f0_hz, self.q, fs=rate_hz)
        return signal.tf2sos(b, a)

    def apply(self, rec: Recording) -> Recording:
        """Zero-phase filter every channel; length and layout preserved."""
        sos = self.sos(rec.rate_hz)
        padlen = 3 * self.order
        if rec.n_samples <= padlen:
            raise ValueError(
                f"recording too short to filter: {rec.n_samples} samples, need > {padlen}"
            )
        filtered = signal.sosfiltfilt(sos, rec.data, axis=1, padtype="even", padlen=padlen)
        return dataclasses.replace(rec, data=filtered)


def trim_head(rec: Recording, seconds: float = 2.0) -> Recording:
    """Drop the first ``seconds`` of signal (settling/setup transient)."""
    if seconds < 0:
        raise ValueError("trim seconds must be >= 0")
    n_drop = int(round(seconds * rec.rate_hz))
    if n_drop >= rec.n_samples:
        raise ValueError(
            f"trim of {n_drop} samples would consume the whole recording "
            f"({rec.n_samples} samples)"
        )
    if n_drop == 0:
        return rec
    return dataclasses.replace(rec, data=rec.data[:, n_drop:].copy())


def bandpass(rec: Recording, lo_hz: float = 5.0, hi_hz: float = 50.0, order: int = 4) -> Recording:
    """Zero-phase Butterworth bandpass (default 5-50 Hz, 4 poles)."""
    return FilterSpec(FilterKind.BANDPASS, lo_hz=lo_hz, hi_hz=hi_hz, order=order).apply(rec)


def notch(rec: Recording, f0_hz: float = 60.0, q: float = 30.0) -> Recording:
    """Zero-phase notch at a mains frequency (default 60 Hz)."""
    return FilterSpec(FilterKind.NOTCH, f0_hz=f0_hz, q=q).apply(rec)


def standardize(rec: Recording) -> Recording:
    """Scale each channel to zero mean, unit standard deviation.

    A constant channel (zero variance) maps to all zeros.  The operation is
    idempotent up to floating point: standardizing twice gives the same data.
    """
    data = rec.data
    mean = data.mean(axis=1, keepdims=True)
    std = data.std(axis=1, keepdims=True)
    centered = data - mean
    out = np.divide(centered, std, out=np.zeros_like(centered), where=std > 0)
    return dataclasses.replace(rec, data=out)


def clean_pipeline(rec: Recording, cfg: FilterConfig | None = None) -> Recording:
    """Run trim -> bandpass -> notch -> standardize per the filter config.

    Setting ``lo_hz``/``hi_hz`` to None skips the bandpass, ``notch_hz`` None
    skips the notch, ``standardize=False`` skips scaling, and ``trim_s=0``
    keeps the head; with everything disabled the output equals the input.
    """
    cfg = cfg or FilterConfig()
    out = trim_head(rec, cfg.trim_s)
    if cfg.lo_hz is not None and cfg.hi_hz is not None:
        out = bandpass(out, cfg.lo_hz, cfg.hi_hz, cfg.order)
    elif (cfg.lo_hz is None) != (cfg.hi_hz is None):
        raise ValueError("bandpass needs both lo_hz and hi_hz (or neither)")
    if cfg.notch_hz is not None:
        out = notch(out, cfg.notch_hz, cfg.notch_q)
    if cfg.standardize:
        out = standardize(out)
    return out


def clean_with_markers(
    rec: Recording, log: MarkerLog, cfg: FilterConfig | None = None
) -> tuple[Recording, MarkerLog]:
    """clean_pipeline plus the matching marker shift for the trimmed head."""
    cfg = cfg or FilterConfig()
    cleaned = clean_pipeline(rec, cfg)
    n_drop = int(round(cfg.trim_s * rec.rate_hz))
    return cleaned, log.shifted(n_drop)
