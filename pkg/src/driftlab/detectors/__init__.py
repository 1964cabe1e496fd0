"""Streaming drift detectors behind one uniform stepwise contract.

Ten detector kinds are available; `make_detector` builds one from a
:class:`DetectorConfig`, `run_detector` folds it over the non-missing
entries of a residual series and collects every drift emission as a
:class:`DetectionEvent`. Detector parameter defaults are configuration
calibrated on synthetic streams, not ground truth; see each detector's
module docstring for its reference description.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from ..ensemble import ResidualSeries
from ..errors import ConfigError, EmptyInputError, FormatError
from ..timestamps import format_rfc3339, parse_rfc3339
from .adwin import Adwin
from .base import DriftDetector, Status
from .cusum import Cusum
from .geometric_ma import GeometricMovingAverage
from .hddm import HddmA, HddmW
from .page_hinkley import PageHinkley
from .seed import Seed
from .seqdrift import SeqDrift1, SeqDrift2
from .stepd import Stepd

EVENTS_CSV_HEADER = "detector,timestamp,sample_index,statistic"

DETECTOR_CLASSES: dict[str, type[DriftDetector]] = {
    cls.kind: cls
    for cls in (
        Adwin,
        Cusum,
        GeometricMovingAverage,
        HddmA,
        HddmW,
        PageHinkley,
        Seed,
        SeqDrift1,
        SeqDrift2,
        Stepd,
    )
}

DETECTOR_KINDS = tuple(sorted(DETECTOR_CLASSES))


@dataclass(frozen=True)
class DetectorConfig:
    """A detector kind plus its named parameters and input transform."""

    kind: str
    params: dict = field(default_factory=dict)
    transform: str = "standardized"

    def __post_init__(self):
        if self.kind not in DETECTOR_CLASSES:
            raise ConfigError(
                f"unknown detector kind {self.kind!r}; expected one of {DETECTOR_KINDS}"
            )


@dataclass(frozen=True)
class DetectionEvent:
    """One drift trigger: when, at which consumed sample, at what statistic."""

    detector: str
    timestamp: int
    sample_index: int
    statistic: float


def make_detector(config: DetectorConfig) -> DriftDetector:
    """Instantiate a fresh detector; bad parameters raise ConfigError."""
    cls = DETECTOR_CLASSES[config.kind]
    try:
        return cls(transform=config.transform, **config.params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {config.kind}: {exc}") from exc


def default_configs(transform: str = "standardized") -> list[DetectorConfig]:
    """All ten detector kinds at their documented defaults."""
    return [DetectorConfig(kind=k, transform=transform) for k in DETECTOR_KINDS]


def stream_indices(detector: DriftDetector, values: Iterable[float]) -> list[int]:
    """Feed raw values; return the 0-based indices that produced drift."""
    hits = []
    for i, v in enumerate(values):
        if detector.step(float(v)) is Status.DRIFT:
            hits.append(i)
    return hits


def run_detector(
    config: DetectorConfig, residuals: ResidualSeries
) -> list[DetectionEvent]:
    """Fold a detector over the non-missing residuals in time order.

    Missing entries are skipped, never zero-filled; sample indices count
    consumed values only. The detector re-arms itself after each emission.
    """
    ts, values = residuals.observed()
    if len(values) == 0:
        raise EmptyInputError("residual series has no non-missing values")
    detector = make_detector(config)
    events = []
    for i in range(len(values)):
        status = detector.step(float(values[i]))
        if status is Status.DRIFT:
            events.append(
                DetectionEvent(
                    detector=config.kind,
                    timestamp=int(ts[i]),
                    sample_index=i,
                    statistic=float(detector.last_statistic),
                )
            )
    return events


def run_detectors(
    configs: Sequence[DetectorConfig], residuals: ResidualSeries
) -> dict[str, list[DetectionEvent]]:
    """Run several detectors over one residual series, keyed by kind."""
    return {cfg.kind: run_detector(cfg, residuals) for cfg in configs}


def write_events_csv(events: Sequence[DetectionEvent], stream: IO[str]) -> None:
    stream.write(EVENTS_CSV_HEADER + "\n")
    for ev in events:
        stream.write(
            f"{ev.detector},{format_rfc3339(ev.timestamp)},"
            f"{ev.sample_index},{ev.statistic!r}\n"
        )


def events_csv_text(events: Sequence[DetectionEvent]) -> str:
    buf = io.StringIO()
    write_events_csv(events, buf)
    return buf.getvalue()


def parse_events_csv(source: IO[str] | str) -> list[DetectionEvent]:
    text = source if isinstance(source, str) else source.read()
    lines = text.splitlines()
    if not lines or lines[0].strip() != EVENTS_CSV_HEADER:
        raise FormatError(f"expected header {EVENTS_CSV_HEADER!r}")
    events = []
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise FormatError(f"bad event row: {line!r}")
        events.append(
            DetectionEvent(
                detector=parts[0],
                timestamp=parse_rfc3339(parts[1]),
                sample_index=int(parts[2]),
                statistic=float(parts[3]),
            )
        )
    return events


def load_detector_configs(source: IO[str] | str) -> list[DetectorConfig]:
    """Parse the detector config file: a JSON object keyed by kind.

    Each value is an object of named parameters; the optional `transform`
    key selects the input transform (default `standardized`).
    """
    text = source if isinstance(source, str) else source.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"detector config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("detector config must be a JSON object keyed by kind")
    configs = []
    for kind, params in doc.items():
        if not isinstance(params, dict):
            raise FormatError(f"parameters for {kind!r} must be an object")
        params = dict(params)
        transform = params.pop("transform", "standardized")
        configs.append(DetectorConfig(kind=kind, params=params, transform=transform))
    return configs


__all__ = [
    "Adwin",
    "Cusum",
    "DETECTOR_CLASSES",
    "DETECTOR_KINDS",
    "DetectionEvent",
    "DetectorConfig",
    "DriftDetector",
    "GeometricMovingAverage",
    "HddmA",
    "HddmW",
    "PageHinkley",
    "Seed",
    "SeqDrift1",
    "SeqDrift2",
    "Status",
    "Stepd",
    "default_configs",
    "events_csv_text",
    "load_detector_configs",
    "make_detector",
    "parse_events_csv",
    "run_detector",
    "run_detectors",
    "stream_indices",
    "write_events_csv",
]
