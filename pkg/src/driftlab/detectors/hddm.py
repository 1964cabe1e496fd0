"""Hoeffding-bound drift detectors, averaged (A) and weighted (W) tests.

Reference: I. Frias-Blanco, J. del Campo-Avila, G. Ramos-Jimenez,
R. Morales-Bueno, A. Ortiz-Diaz, Y. Caballero-Mota, "Online and
non-parametric drift detection methods based on Hoeffding's bounds", IEEE
TKDE 27(3), 2015.

HDDM_A compares the cumulative mean against the best (lowest/highest
bound-adjusted) cut point seen so far, using Hoeffding's inequality for the
difference of nested sample means. HDDM_W replaces sample means with
exponentially weighted moving averages and applies McDiarmid's inequality,
tracking the post-cut estimate separately so the compared spans are
disjoint. Both require inputs bounded in [0, 1]; this implementation
squashes its input to (0, 1) with a logistic map.
"""

from __future__ import annotations

import math

from .base import DriftDetector, Status, require_unit_interval


def _nested_bound(n_cut: int, n_total: int, confidence: float) -> float:
    """Hoeffding bound for |prefix mean - total mean| of [0,1] variables."""
    m = (n_total - n_cut) / (n_cut * float(n_total))
    return math.sqrt(m / 2.0 * math.log(2.0 / confidence))


class HddmA(DriftDetector):
    kind = "hddm_a"
    MIN_SAMPLES = 30
    BOUNDED_INPUT = True

    def __init__(
        self,
        drift_confidence: float = 0.001,
        warning_confidence: float = 0.005,
        transform: str = "standardized",
    ):
        self.drift_confidence = require_unit_interval(
            "drift_confidence", drift_confidence
        )
        self.warning_confidence = require_unit_interval(
            "warning_confidence", warning_confidence
        )
        super().__init__(transform)
        self._reset()

    def _reset(self) -> None:
        self._n = 0
        self._total = 0.0
        self._n_min = 0
        self._total_min = 0.0
        self._n_max = 0
        self._total_max = 0.0

    def _update(self, x: float) -> tuple[Status, float]:
        self._n += 1
        self._total += x
        mean = self._total / self._n
        bound = math.sqrt(
            1.0 / (2.0 * self._n) * math.log(1.0 / self.drift_confidence)
        )
        if self._n_min == 0 or mean + bound < self._total_min / self._n_min + math.sqrt(
            1.0 / (2.0 * self._n_min) * math.log(1.0 / self.drift_confidence)
        ):
            self._n_min, self._total_min = self._n, self._total
        if self._n_max == 0 or mean - bound > self._total_max / self._n_max - math.sqrt(
            1.0 / (2.0 * self._n_max) * math.log(1.0 / self.drift_confidence)
        ):
            self._n_max, self._total_max = self._n, self._total

        stat = 0.0
        status = Status.STABLE
        # upward shift: total mean rose above the minimising cut point
        if 0 < self._n_min < self._n:
            gap = mean - self._total_min / self._n_min
            stat = max(stat, gap)
            if gap >= _nested_bound(self._n_min, self._n, self.drift_confidence):
                return Status.DRIFT, gap
            if gap >= _nested_bound(self._n_min, self._n, self.warning_confidence):
                status = Status.WARNING
        # downward shift: total mean fell below the maximising cut point
        if 0 < self._n_max < self._n:
            gap = self._total_max / self._n_max - mean
            stat = max(stat, gap)
            if gap >= _nested_bound(self._n_max, self._n, self.drift_confidence):
                return Status.DRIFT, gap
            if gap >= _nested_bound(self._n_max, self._n, self.warning_confidence):
                status = Status.WARNING
        return status, stat


class _EwmaSample:
    """EWMA estimate plus its sum of squared normalized weights."""

    __slots__ = ("mean", "weight_sq")

    def __init__(self):
        self.mean = -1.0  # negative marks "no data yet"
        self.weight_sq = 1.0

    def add(self, x: float, lam: float) -> None:
        if self.mean < 0:
            self.mean = x
            self.weight_sq = 1.0
        else:
            self.mean = lam * x + (1 - lam) * self.mean
            self.weight_sq = lam**2 + (1 - lam) ** 2 * self.weight_sq

    def copy(self) -> "_EwmaSample":
        out = _EwmaSample()
        out.mean = self.mean
        out.weight_sq = self.weight_sq
        return out

    def bound(self, confidence: float) -> float:
        return math.sqrt(self.weight_sq / 2.0 * math.log(1.0 / confidence))


def _mcdiarmid_gap_bound(a: _EwmaSample, b: _EwmaSample, confidence: float) -> float:
    return math.sqrt(
        (a.weight_sq + b.weight_sq) / 2.0 * math.log(1.0 / confidence)
    )


class HddmW(DriftDetector):
    kind = "hddm_w"
    MIN_SAMPLES = 30
    BOUNDED_INPUT = True

    def __init__(
        self,
        drift_confidence: float = 0.001,
        warning_confidence: float = 0.005,
        ewma_lambda: float = 0.05,
        transform: str = "standardized",
    ):
        self.drift_confidence = require_unit_interval(
            "drift_confidence", drift_confidence
        )
        self.warning_confidence = require_unit_interval(
            "warning_confidence", warning_confidence
        )
        self.ewma_lambda = require_unit_interval("ewma_lambda", ewma_lambda)
        super().__init__(transform)
        self._reset()

    def _reset(self) -> None:
        self._total = _EwmaSample()
        self._incr_cut = math.inf
        self._incr_before: _EwmaSample | None = None
        self._incr_after = _EwmaSample()
        self._decr_cut = -math.inf
        self._decr_before: _EwmaSample | None = None
        self._decr_after = _EwmaSample()

    def _update(self, x: float) -> tuple[Status, float]:
        lam = self.ewma_lambda
        self._total.add(x, lam)
        warn_bound = self._total.bound(self.warning_confidence)

        # refresh the upward cut point when the bound-adjusted mean improves
        if self._total.mean + warn_bound < self._incr_cut:
            self._incr_cut = self._total.mean + warn_bound
            self._incr_before = self._total.copy()
            self._incr_after = _EwmaSample()
        else:
            self._incr_after.add(x, lam)

        if self._total.mean - warn_bound > self._decr_cut:
            self._decr_cut = self._total.mean - warn_bound
            self._decr_before = self._total.copy()
            self._decr_after = _EwmaSample()
        else:
            self._decr_after.add(x, lam)

        stat = 0.0
        status = Status.STABLE
        if self._incr_before is not None and self._incr_after.mean >= 0:
            gap = self._incr_after.mean - self._incr_before.mean
            stat = max(stat, gap)
            if gap > _mcdiarmid_gap_bound(
                self._incr_before, self._incr_after, self.drift_confidence
            ):
                return Status.DRIFT, gap
            if gap > _mcdiarmid_gap_bound(
                self._incr_before, self._incr_after, self.warning_confidence
            ):
                status = Status.WARNING
        if self._decr_before is not None and self._decr_after.mean >= 0:
            gap = self._decr_before.mean - self._decr_after.mean
            stat = max(stat, gap)
            if gap > _mcdiarmid_gap_bound(
                self._decr_before, self._decr_after, self.drift_confidence
            ):
                return Status.DRIFT, gap
            if gap > _mcdiarmid_gap_bound(
                self._decr_before, self._decr_after, self.warning_confidence
            ):
                status = Status.WARNING
        return status, stat
