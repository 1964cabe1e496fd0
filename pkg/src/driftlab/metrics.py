"""Quantitative drift characterization over a residual series.

A concept is summarized as the empirical histogram of the monitored signal
over a time window; drift between two instants is measured as a statistical
distance between the histograms before and after. Three measures are
provided: magnitude (distance between the start and end concepts), duration
(elapsed seconds) and path length (accumulated magnitude along intermediate
steps). Compared histograms always share bin edges, computed from the pooled
range of the samples involved.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ensemble import ResidualSeries
from .errors import (
    ConfigError,
    InsufficientSamplesError,
    OrderingError,
    ShapeMismatchError,
)
from .timestamps import format_rfc3339

DEFAULT_BINS = 20
DEFAULT_MIN_SAMPLES = 50
METRICS = ("hellinger", "tv")

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ConceptWindow:
    """Histogram summary of the monitored signal over [start, end)."""

    start: int
    end: int
    edges: np.ndarray
    masses: np.ndarray  # sums to 1
    n_samples: int


@dataclass(frozen=True)
class DriftCharacterization:
    """Magnitude, duration and path length of one drift period."""

    magnitude: float
    duration_s: float
    path_length: float
    n_steps: int
    metric: str
    window_s: float

    def __post_init__(self):
        if self.duration_s <= 0:
            raise OrderingError("duration must be positive")
        if self.path_length < self.magnitude - 1e-9:
            raise ConfigError("path length cannot undercut magnitude")

    def to_json(self, start: int | None = None, end: int | None = None) -> str:
        doc = {
            "magnitude": self.magnitude,
            "duration_s": self.duration_s,
            "path_length": self.path_length,
            "n_steps": self.n_steps,
            "metric": self.metric,
            "window_s": self.window_s,
        }
        if start is not None:
            doc["start"] = format_rfc3339(start)
        if end is not None:
            doc["end"] = format_rfc3339(end)
        return json.dumps(doc, separators=(",", ":"))


def empirical_distribution(
    values: Sequence[float], edges: np.ndarray, min_samples: int = DEFAULT_MIN_SAMPLES
) -> np.ndarray:
    """Probability masses of `values` over the bins defined by `edges`.

    Values outside the edge range are clipped into the end bins, so masses
    always sum to one.
    """
    values = np.asarray(values, dtype=np.float64)
    edges = np.asarray(edges, dtype=np.float64)
    if np.any(np.diff(edges) <= 0):
        raise ConfigError("edges must be strictly increasing")
    if len(values) < min_samples:
        raise InsufficientSamplesError(
            f"{len(values)} samples, need at least {min_samples}"
        )
    clipped = np.clip(values, edges[0], edges[-1])
    counts, _ = np.histogram(clipped, bins=edges)
    return counts / counts.sum()


def _check_masses(p, q) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ShapeMismatchError(f"mass vectors differ in shape: {p.shape} vs {q.shape}")
    return p, q


def hellinger_distance(p, q) -> float:
    """Hellinger distance between two probability mass vectors, in [0, 1]."""
    p, q = _check_masses(p, q)
    return float(np.linalg.norm(np.sqrt(p) - np.sqrt(q)) / _SQRT2)


def total_variation_distance(p, q) -> float:
    """Total variation distance: half the L1 difference, in [0, 1]."""
    p, q = _check_masses(p, q)
    return float(0.5 * np.abs(p - q).sum())


def _distance(metric: str, p, q) -> float:
    if metric == "hellinger":
        return hellinger_distance(p, q)
    if metric == "tv":
        return total_variation_distance(p, q)
    raise ConfigError(f"metric must be one of {METRICS}")


def shared_edges(samples: Sequence[np.ndarray], bins: int = DEFAULT_BINS) -> np.ndarray:
    """Equal-width bin edges spanning the pooled range of all samples."""
    lo = min(float(s.min()) for s in samples if len(s))
    hi = max(float(s.max()) for s in samples if len(s))
    if lo == hi:  # all values identical: a single degenerate-width span
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, bins + 1)


def window_values(series: ResidualSeries, lo: float, hi: float) -> np.ndarray:
    """Non-missing residuals with timestamps in [lo, hi)."""
    ts, res = series.observed()
    mask = (ts >= lo) & (ts < hi)
    return res[mask]


def concept_window(
    series: ResidualSeries,
    start: int,
    end: int,
    bins: int = DEFAULT_BINS,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    edges: np.ndarray | None = None,
) -> ConceptWindow:
    """Histogram summary of the residual over [start, end)."""
    values = window_values(series, start, end)
    if len(values) < min_samples:
        raise InsufficientSamplesError(
            f"window holds {len(values)} samples, need {min_samples}"
        )
    if edges is None:
        edges = shared_edges([values], bins)
    masses = empirical_distribution(values, edges, min_samples)
    return ConceptWindow(
        start=start, end=end, edges=edges, masses=masses, n_samples=len(values)
    )


def characterization_jsonl(
    series: ResidualSeries,
    periods: Sequence[tuple[int, int]],
    n_steps: int = 1,
    window: float = 86400.0,
    metric: str = "hellinger",
    bins: int = DEFAULT_BINS,
    min_samples: int = DEFAULT_MIN_SAMPLES,
) -> str:
    """One line-delimited JSON characterization record per labelled period."""
    lines = []
    for start, end in periods:
        record = characterize_drift(
            series, start, end, n_steps=n_steps, window=window,
            metric=metric, bins=bins, min_samples=min_samples,
        )
        lines.append(record.to_json(start=start, end=end))
    return "\n".join(lines) + ("\n" if lines else "")


def _concept_samples(
    series: ResidualSeries, t: int, u: int, n_steps: int, window: float
) -> list[np.ndarray]:
    """Samples at the n_steps + 1 path points from t to u.

    The start concept looks back over [t - window, t); the end concept looks
    forward over [u, u + window); interior points use a centered window of
    the same width.
    """
    points = [t + k * (u - t) / n_steps for k in range(n_steps + 1)]
    samples = []
    for k, p in enumerate(points):
        if k == 0:
            lo, hi = p - window, p
        elif k == n_steps:
            lo, hi = p, p + window
        else:
            lo, hi = p - window / 2, p + window / 2
        samples.append(window_values(series, lo, hi))
    return samples


def drift_magnitude(
    series: ResidualSeries,
    t: int,
    u: int,
    window: float,
    metric: str = "hellinger",
    bins: int = DEFAULT_BINS,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    edges: np.ndarray | None = None,
) -> float:
    """Distance between the concepts just before t and just after u.

    Compares the histograms of [t - window, t) and [u, u + window) on shared
    bin edges (pooled range unless `edges` is supplied).
    """
    if u < t:
        raise OrderingError("u must not precede t")
    pre = window_values(series, t - window, t)
    post = window_values(series, u, u + window)
    for side, sample in (("pre", pre), ("post", post)):
        if len(sample) < min_samples:
            raise InsufficientSamplesError(
                f"{side}-drift window has {len(sample)} samples, need {min_samples}"
            )
    if edges is None:
        edges = shared_edges([pre, post], bins)
    p = empirical_distribution(pre, edges, min_samples)
    q = empirical_distribution(post, edges, min_samples)
    return _distance(metric, p, q)


def drift_duration(t: int, u: int) -> float:
    """Elapsed seconds of the drift period; u must follow t."""
    if u <= t:
        raise OrderingError("drift end must follow its start")
    return float(u - t)


def drift_path_length(
    series: ResidualSeries,
    t: int,
    u: int,
    n_steps: int,
    window: float,
    metric: str = "hellinger",
    bins: int = DEFAULT_BINS,
    min_samples: int = DEFAULT_MIN_SAMPLES,
) -> float:
    """Accumulated magnitude along n_steps consecutive concept pairs.

    All histograms share one edge set pooled over every sub-window, so with
    n_steps = 1 this equals drift_magnitude on the same windows, and the
    metric triangle inequality makes it never smaller.
    """
    if n_steps < 1:
        raise ConfigError("n_steps must be >= 1")
    if u <= t:
        raise OrderingError("drift end must follow its start")
    samples = _concept_samples(series, t, u, n_steps, window)
    for k, sample in enumerate(samples):
        if len(sample) < min_samples:
            raise InsufficientSamplesError(
                f"sub-window at step {k} has {len(sample)} samples, need {min_samples}"
            )
    edges = shared_edges(samples, bins)
    masses = [empirical_distribution(s, edges, min_samples) for s in samples]
    return float(
        sum(_distance(metric, masses[k], masses[k + 1]) for k in range(n_steps))
    )


def characterize_drift(
    series: ResidualSeries,
    t: int,
    u: int,
    n_steps: int = 1,
    window: float = 86400.0,
    metric: str = "hellinger",
    bins: int = DEFAULT_BINS,
    min_samples: int = DEFAULT_MIN_SAMPLES,
) -> DriftCharacterization:
    """Magnitude, duration and path length for one labelled period.

    Magnitude and path length are evaluated on the same pooled bin edges,
    keeping the two mutually consistent.
    """
    samples = _concept_samples(series, t, u, n_steps, window)
    for k, sample in enumerate(samples):
        if len(sample) < min_samples:
            raise InsufficientSamplesError(
                f"sub-window at step {k} has {len(sample)} samples, need {min_samples}"
            )
    edges = shared_edges(samples, bins)
    masses = [empirical_distribution(s, edges, min_samples) for s in samples]
    path = float(
        sum(_distance(metric, masses[k], masses[k + 1]) for k in range(n_steps))
    )
    magnitude = drift_magnitude(
        series, t, u, window, metric, bins, min_samples, edges=edges
    )
    return DriftCharacterization(
        magnitude=magnitude,
        duration_s=drift_duration(t, u),
        path_length=path,
        n_steps=n_steps,
        metric=metric,
        window_s=window,
    )
