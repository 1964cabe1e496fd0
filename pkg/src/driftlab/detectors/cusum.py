"""Two-sided CUSUM change detector.

Reference: E. S. Page, "Continuous inspection schemes", Biometrika 41(1/2),
1954. Cumulative sums of deviations beyond an allowance `drift_allowance`
(the classic k) are accumulated separately for upward and downward shifts
and reset at zero; a shift is declared when either sum exceeds `threshold`
(the classic h). Means are taken against a zero target, which the
`standardized` input transform provides.
"""

from __future__ import annotations

from ..errors import ConfigError
from .base import DriftDetector, Status, require_positive


class Cusum(DriftDetector):
    kind = "cusum"
    MIN_SAMPLES = 30

    def __init__(
        self,
        threshold: float = 10.0,
        drift_allowance: float = 0.5,
        transform: str = "standardized",
    ):
        self.threshold = require_positive("threshold", threshold)
        if drift_allowance < 0:
            raise ConfigError("parameter 'drift_allowance' must be >= 0")
        self.drift_allowance = drift_allowance
        super().__init__(transform)
        self._reset()

    def _reset(self) -> None:
        self._g_up = 0.0
        self._g_down = 0.0

    def _update(self, x: float) -> tuple[Status, float]:
        self._g_up = max(0.0, self._g_up + x - self.drift_allowance)
        self._g_down = max(0.0, self._g_down - x - self.drift_allowance)
        stat = max(self._g_up, self._g_down)
        if stat > self.threshold:
            return Status.DRIFT, stat
        return Status.STABLE, stat
