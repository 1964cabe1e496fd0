"""Geometric moving average control chart.

Reference: S. W. Roberts, "Control chart tests based on geometric moving
averages", Technometrics 1(3), 1959. An exponentially weighted moving
average of the input is compared against control limits `limit` standard
errors wide; the EWMA standard error uses the exact finite-sample factor
sqrt(s/(2-s) * (1 - (1-s)^(2n))). Center and scale are estimated online from
the stream itself.
"""

from __future__ import annotations

import math

from .base import DriftDetector, Status, require_positive, require_unit_interval


class GeometricMovingAverage(DriftDetector):
    kind = "gma"
    MIN_SAMPLES = 30

    def __init__(
        self,
        smoothing: float = 0.1,
        limit: float = 4.5,
        transform: str = "standardized",
    ):
        self.smoothing = require_unit_interval("smoothing", smoothing)
        self.limit = require_positive("limit", limit)
        super().__init__(transform)
        self._reset()

    def _reset(self) -> None:
        self._n = 0
        self._mean = 0.0
        self._m2 = 0.0
        self._ewma = 0.0

    def _update(self, x: float) -> tuple[Status, float]:
        self._n += 1
        delta = x - self._mean
        self._mean += delta / self._n
        self._m2 += delta * (x - self._mean)
        s = self.smoothing
        self._ewma = (1 - s) * self._ewma + s * x
        if self._n < 2:
            return Status.STABLE, 0.0
        sd = math.sqrt(self._m2 / (self._n - 1))
        if sd < 1e-12:
            return Status.STABLE, 0.0
        se = sd * math.sqrt(s / (2 - s) * (1 - (1 - s) ** (2 * self._n)))
        stat = abs(self._ewma - self._mean) / se
        if stat > self.limit:
            return Status.DRIFT, stat
        return Status.STABLE, stat
