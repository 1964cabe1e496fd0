"""ADWIN adaptive-windowing change detector.

Reference: A. Bifet and R. Gavalda, "Learning from time-changing data with
adaptive windowing", SDM 2007 (the bucket-compressed ADWIN2 variant, with
the variance-sensitive cut bound and check cadence of the reference MOA
implementation). The window of recent values is kept as exponential
histogram buckets; every `clock` samples each bucket boundary is tested as
a split into old/new sub-windows, and a significant mean difference signals
drift. Inputs are squashed to (0, 1) so the concentration bound's
bounded-support assumption holds.

Unlike the adaptive variant that repeatedly shrinks the window, a drift
signal here re-arms the detector completely (fresh window), per the uniform
stepwise contract of this package.
"""

from __future__ import annotations

import math

from .base import DriftDetector, Status, require_unit_interval

_MAX_BUCKETS = 5  # per row, before the two oldest merge upward
_MIN_SUBWINDOW = 5
_MIN_WINDOW = 10
_CLOCK = 32


class _Bucket:
    __slots__ = ("n", "total", "m2")

    def __init__(self, n: int, total: float, m2: float):
        self.n = n
        self.total = total
        self.m2 = m2


class Adwin(DriftDetector):
    kind = "adwin"
    MIN_SAMPLES = _MIN_WINDOW
    BOUNDED_INPUT = True

    def __init__(self, delta: float = 0.002, transform: str = "standardized"):
        self.delta = require_unit_interval("delta", delta)
        super().__init__(transform)
        self._reset()

    def _reset(self) -> None:
        # rows[i] holds buckets of 2^i values, newest at index 0
        self._rows: list[list[_Bucket]] = [[]]
        self._width = 0
        self._total = 0.0
        self._m2 = 0.0
        self._ticks = 0

    def _insert(self, x: float) -> None:
        if self._width > 0:
            mean = self._total / self._width
            delta = x - mean
            self._m2 += delta * delta * self._width / (self._width + 1)
        self._width += 1
        self._total += x
        self._rows[0].insert(0, _Bucket(1, x, 0.0))
        # cascade merges: two oldest of an overfull row combine one row up
        level = 0
        while len(self._rows[level]) > _MAX_BUCKETS:
            if level + 1 == len(self._rows):
                self._rows.append([])
            old1 = self._rows[level].pop()  # oldest
            old2 = self._rows[level].pop()  # second oldest
            u1, u2 = old1.total / old1.n, old2.total / old2.n
            m2 = (
                old1.m2
                + old2.m2
                + old1.n * old2.n / (old1.n + old2.n) * (u1 - u2) ** 2
            )
            self._rows[level + 1].insert(
                0, _Bucket(old1.n + old2.n, old1.total + old2.total, m2)
            )
            level += 1

    def _buckets_oldest_first(self):
        for level in range(len(self._rows) - 1, -1, -1):
            for bucket in reversed(self._rows[level]):
                yield bucket

    def _check_cut(self) -> float | None:
        """Return |mean difference| at the first significant split, if any."""
        n = self._width
        if n < _MIN_WINDOW:
            return None
        variance = self._m2 / n
        dd = math.log(2.0 * math.log(n) / self.delta)
        n0 = 0
        sum0 = 0.0
        buckets = list(self._buckets_oldest_first())
        for bucket in buckets[:-1]:
            n0 += bucket.n
            sum0 += bucket.total
            n1 = n - n0
            if n0 < _MIN_SUBWINDOW or n1 < _MIN_SUBWINDOW:
                continue
            diff = abs(sum0 / n0 - (self._total - sum0) / n1)
            m_recip = 1.0 / (n0 - _MIN_SUBWINDOW + 1) + 1.0 / (n1 - _MIN_SUBWINDOW + 1)
            eps = math.sqrt(2.0 * m_recip * variance * dd) + (2.0 / 3.0) * m_recip * dd
            if diff > eps:
                return diff
        return None

    def _update(self, x: float) -> tuple[Status, float]:
        self._insert(x)
        self._ticks += 1
        if self._ticks % _CLOCK != 0:
            return Status.STABLE, 0.0
        diff = self._check_cut()
        if diff is not None:
            return Status.DRIFT, diff
        return Status.STABLE, 0.0
