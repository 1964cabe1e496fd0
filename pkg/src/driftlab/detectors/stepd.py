"""STEPD: statistical test of equal proportions between two windows.

Reference: K. Nishida and K. Yamauchi, "Detecting concept drift using
statistical testing", Discovery Science 2007. The mean of the most recent
`window` values is compared with the mean of everything older via a
two-sample z statistic with continuity correction and pooled variance;
small p-values raise a warning (`alpha_warning`) or drift (`alpha_drift`).
Inputs are squashed to (0, 1), matching the proportion-style statistic.
"""

from __future__ import annotations

from collections import deque

from scipy.stats import norm

from ..errors import ConfigError
from .base import DriftDetector, Status, require_unit_interval


class Stepd(DriftDetector):
    kind = "stepd"
    BOUNDED_INPUT = True

    def __init__(
        self,
        window: int = 30,
        alpha_drift: float = 0.003,
        alpha_warning: float = 0.05,
        transform: str = "standardized",
    ):
        if window < 2:
            raise ConfigError("parameter 'window' must be >= 2")
        self.window = int(window)
        self.alpha_drift = require_unit_interval("alpha_drift", alpha_drift)
        self.alpha_warning = require_unit_interval("alpha_warning", alpha_warning)
        self.MIN_SAMPLES = 2 * self.window
        super().__init__(transform)
        self._reset()

    def _reset(self) -> None:
        self._recent: deque[float] = deque()
        self._recent_sum = 0.0
        self._older_sum = 0.0
        self._older_n = 0

    def _update(self, x: float) -> tuple[Status, float]:
        if len(self._recent) == self.window:
            moved = self._recent.popleft()
            self._recent_sum -= moved
            self._older_sum += moved
            self._older_n += 1
        self._recent.append(x)
        self._recent_sum += x

        n_recent = len(self._recent)
        if self._older_n < self.window:
            return Status.STABLE, 0.0
        n0, r0 = self._older_n, self._older_sum
        nr, rr = n_recent, self._recent_sum
        p_hat = (r0 + rr) / (n0 + nr)
        pooled = p_hat * (1 - p_hat) * (1.0 / n0 + 1.0 / nr)
        if pooled <= 0:
            return Status.STABLE, 0.0
        t = (abs(r0 / n0 - rr / nr) - 0.5 * (1.0 / n0 + 1.0 / nr)) / pooled**0.5
        p_value = float(norm.sf(t))
        if p_value < self.alpha_drift:
            return Status.DRIFT, t
        if p_value < self.alpha_warning:
            return Status.WARNING, t
        return Status.STABLE, t
