"""Score detector triggers against labelled drift periods.

Matching is period-level: a labelled period counts as detected (one true
positive) when at least one trigger falls inside it, widened by a tolerance
on both sides; triggers inside no widened period are false positives;
undetected periods are false negatives. Precision and sensitivity follow,
with undefined ratios kept explicit rather than coerced to zero.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import IO, Sequence

from .detectors import DetectionEvent, DetectorConfig, run_detector
from .ensemble import ResidualSeries
from .errors import EmptyInputError, OverlappingPeriodsError, ValidationError

MATCHING_POLICY = "period_hit_v1"

RESULTS_CSV_HEADER = "detector,precision,sensitivity,tp,fp,fn,tolerance_s"

PERIOD_SOURCES = ("expert", "consensus", "injected_ground_truth")


@dataclass(frozen=True)
class LabelledPeriod:
    """A ground-truth drift interval [start, end] with its provenance."""

    start: int
    end: int
    source: str = "expert"

    def __post_init__(self):
        if self.start >= self.end:
            raise ValidationError("period start must precede end", field="end")
        if self.source not in PERIOD_SOURCES:
            raise ValidationError(f"source must be one of {PERIOD_SOURCES}")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tolerance_s: float
    policy: str = MATCHING_POLICY

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        if other.tolerance_s != self.tolerance_s or other.policy != self.policy:
            raise ValidationError("cannot pool counts across policies/tolerances")
        return ConfusionCounts(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            fn=self.fn + other.fn,
            tolerance_s=self.tolerance_s,
            policy=self.policy,
        )


@dataclass(frozen=True)
class EvalResult:
    """Precision/sensitivity for one detector; None marks undefined ratios."""

    detector: str
    precision: float | None
    sensitivity: float | None
    counts: ConfusionCounts


def match_triggers(
    periods: Sequence[LabelledPeriod],
    events: Sequence[DetectionEvent] | Sequence[float],
    tolerance: float = 0.0,
) -> ConfusionCounts:
    """Count tp/fp/fn for triggers against non-overlapping periods.

    A period is detected iff >= 1 event lies in [start - tolerance,
    end + tolerance]; duplicate hits inside one period do not inflate tp.
    Overlapping periods are rejected: merge them through consensus first.
    """
    if tolerance < 0:
        raise ValidationError("tolerance must be >= 0")
    ordered = sorted(periods, key=lambda p: (p.start, p.end))
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.start <= prev.end:
            raise OverlappingPeriodsError(
                "labelled periods overlap; merge them via consensus before scoring"
            )
    times = sorted(
        ev.timestamp if isinstance(ev, DetectionEvent) else float(ev) for ev in events
    )
    tp = 0
    matched = [False] * len(times)
    for period in ordered:
        lo, hi = period.start - tolerance, period.end + tolerance
        hit = False
        for i, t in enumerate(times):
            if lo <= t <= hi:
                matched[i] = True
                hit = True
        tp += hit
    fp = matched.count(False)
    fn = len(ordered) - tp
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tolerance_s=float(tolerance))


def precision_sensitivity(counts: ConfusionCounts, detector: str = "") -> EvalResult:
    """Ratios from counts; undefined stays None, never 0."""
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else None
    sensitivity = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else None
    return EvalResult(
        detector=detector, precision=precision, sensitivity=sensitivity, counts=counts
    )


@dataclass
class BenchmarkTable:
    """Pooled per-detector results plus per-series breakdowns."""

    pooled: list[EvalResult]
    per_series: dict[tuple[str, str], EvalResult]  # (series id, detector) ->


def benchmark_detectors(
    corpus: Sequence[tuple[ResidualSeries, Sequence[LabelledPeriod]]],
    configs: Sequence[DetectorConfig],
    tolerance: float = 0.0,
) -> BenchmarkTable:
    """Run every configured detector over every series and pool the counts.

    Counts are micro-averaged across the corpus (one pooled row per
    detector); per-series results are kept for diagnosis.
    """
    if not corpus:
        raise EmptyInputError("benchmark corpus is empty")
    pooled: list[EvalResult] = []
    per_series: dict[tuple[str, str], EvalResult] = {}
    for config in configs:
        total = ConfusionCounts(tp=0, fp=0, fn=0, tolerance_s=float(tolerance))
        for idx, (series, periods) in enumerate(corpus):
            events = run_detector(config, series)
            counts = match_triggers(periods, events, tolerance)
            series_id = series.turbine_id or f"series_{idx}"
            per_series[(series_id, config.kind)] = precision_sensitivity(
                counts, config.kind
            )
            total = total + counts
        pooled.append(precision_sensitivity(total, config.kind))
    return BenchmarkTable(pooled=pooled, per_series=per_series)


def merge_overlapping(periods: Sequence[LabelledPeriod]) -> list[LabelledPeriod]:
    """Union any overlapping/touching periods so scoring preconditions hold.

    Used for ground-truth and consensus sources, where residual overlaps are
    an artifact of construction rather than an expert disagreement.
    """
    ordered = sorted(periods, key=lambda p: (p.start, p.end))
    merged: list[LabelledPeriod] = []
    for period in ordered:
        if merged and period.start <= merged[-1].end:
            last = merged[-1]
            merged[-1] = LabelledPeriod(
                start=last.start, end=max(last.end, period.end), source=last.source
            )
        else:
            merged.append(period)
    return merged


def write_results_csv(results: Sequence[EvalResult], stream: IO[str]) -> None:
    """Emit `detector,precision,sensitivity,tp,fp,fn,tolerance_s` rows.

    Undefined ratios become empty fields.
    """
    stream.write(RESULTS_CSV_HEADER + "\n")
    for r in results:
        prec = "" if r.precision is None else f"{r.precision:.6f}"
        sens = "" if r.sensitivity is None else f"{r.sensitivity:.6f}"
        c = r.counts
        stream.write(
            f"{r.detector},{prec},{sens},{c.tp},{c.fp},{c.fn},{c.tolerance_s:g}\n"
        )


def results_csv_text(results: Sequence[EvalResult]) -> str:
    buf = io.StringIO()
    write_results_csv(results, buf)
    return buf.getvalue()
