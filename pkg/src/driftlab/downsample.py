"""Largest-triangle bucketing for chart pages.

Downsampling used by the residual endpoint: one point per bucket, chosen to
maximize the triangle area against the previously selected point and the
next bucket's average, which preserves the visual extremes experts label
by. Endpoints are always kept. Missing values (NaN) stay in the page as
explicit gaps: a bucket whose values are all missing contributes one gap
row instead of a fabricated value.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError


def lttb_indices(timestamps: np.ndarray, values: np.ndarray, max_points: int) -> np.ndarray:
    """Indices of the rows to keep, at most max_points of them, sorted.

    `values` may contain NaN for gaps; those rows can be selected (to keep
    the gap visible) but never win on area against finite candidates.
    """
    n = len(timestamps)
    if max_points < 2:
        raise ConfigError("max_points must be >= 2")
    if n <= max_points:
        return np.arange(n)
    if max_points == 2:
        return np.array([0, n - 1])

    ts = np.asarray(timestamps, dtype=np.float64)
    ys = np.asarray(values, dtype=np.float64)
    n_buckets = max_points - 2
    # interior rows 1..n-2 split into equal buckets
    bounds = np.linspace(1, n - 1, n_buckets + 1).astype(int)

    selected = [0]
    prev = 0
    prev_y = ys[0] if np.isfinite(ys[0]) else 0.0
    for b in range(n_buckets):
        lo, hi = bounds[b], bounds[b + 1]
        if hi <= lo:
            continue
        # average of the next bucket (or the final point) as the third vertex
        nlo, nhi = (bounds[b + 1], bounds[b + 2]) if b + 1 < n_buckets else (n - 1, n)
        next_ts = ts[nlo:nhi].mean()
        next_chunk = ys[nlo:nhi]
        finite_next = next_chunk[np.isfinite(next_chunk)]
        next_y = finite_next.mean() if len(finite_next) else prev_y

        chunk = ys[lo:hi]
        finite = np.isfinite(chunk)
        if not finite.any():
            # all-gap bucket: keep one row so the gap survives downsampling
            pick = lo + (hi - lo) // 2
            selected.append(pick)
            continue
        cand_ts = ts[lo:hi][finite]
        cand_ys = chunk[finite]
        area = np.abs(
            (ts[prev] - next_ts) * (cand_ys - prev_y)
            - (ts[prev] - cand_ts) * (next_y - prev_y)
        )
        pick = (lo + np.flatnonzero(finite)[int(np.argmax(area))]).item()
        selected.append(pick)
        prev = pick
        prev_y = ys[pick]
    selected.append(n - 1)
    return np.array(sorted(set(selected)))
