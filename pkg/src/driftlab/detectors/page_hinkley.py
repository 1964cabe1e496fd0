"""Two-sided Page-Hinkley test.

Reference: D. V. Hinkley, "Inference about the change-point from cumulative
sum tests", Biometrika 58(3), 1971 (the sequential form popularised for data
streams by Gama et al., "A survey on concept drift adaptation", 2014).
Cumulative deviations from the running mean, less a tolerance `delta`, are
tracked against their running extremum; drift is declared when the gap
exceeds `threshold`. `alpha` applies exponential forgetting to the
cumulative sums.
"""

from __future__ import annotations

from ..errors import ConfigError
from .base import DriftDetector, Status, require_positive


class PageHinkley(DriftDetector):
    kind = "ph"
    MIN_SAMPLES = 30

    def __init__(
        self,
        threshold: float = 150.0,
        delta: float = 0.01,
        alpha: float = 0.9999,
        transform: str = "standardized",
    ):
        self.threshold = require_positive("threshold", threshold)
        if delta < 0:
            raise ConfigError("parameter 'delta' must be >= 0")
        if not (0 < alpha <= 1):
            raise ConfigError("parameter 'alpha' must lie in (0, 1]")
        self.delta = delta
        self.alpha = alpha
        super().__init__(transform)
        self._reset()

    def _reset(self) -> None:
        self._n = 0
        self._mean = 0.0
        self._m_up = 0.0
        self._min_up = 0.0
        self._m_down = 0.0
        self._max_down = 0.0

    def _update(self, x: float) -> tuple[Status, float]:
        self._n += 1
        self._mean += (x - self._mean) / self._n
        self._m_up = self.alpha * self._m_up + (x - self._mean - self.delta)
        self._min_up = min(self._min_up, self._m_up)
        self._m_down = self.alpha * self._m_down + (x - self._mean + self.delta)
        self._max_down = max(self._max_down, self._m_down)
        stat = max(self._m_up - self._min_up, self._max_down - self._m_down)
        if stat > self.threshold:
            return Status.DRIFT, stat
        return Status.STABLE, stat
