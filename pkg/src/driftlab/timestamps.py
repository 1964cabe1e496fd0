"""RFC 3339 UTC timestamps and the 10-minute SCADA grid.

All series data is kept internally as integer epoch seconds; these helpers
are the single place where wire/text representations are produced or parsed.
"""

from __future__ import annotations

from datetime import datetime, timezone

from .errors import FormatError

GRID_SECONDS = 600


def parse_rfc3339(text: str) -> int:
    """Parse an RFC 3339 UTC timestamp to integer epoch seconds.

    Accepts both the `Z` suffix and an explicit numeric offset. Sub-second
    precision is rejected: the platform operates on whole seconds.
    """
    raw = text.strip()
    if not raw:
        raise FormatError("empty timestamp")
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise FormatError(f"invalid RFC 3339 timestamp: {text!r}") from exc
    if dt.tzinfo is None:
        raise FormatError(f"timestamp missing UTC offset: {text!r}")
    if dt.microsecond != 0:
        raise FormatError(f"sub-second timestamps not supported: {text!r}")
    return int(dt.timestamp())


def format_rfc3339(epoch_s: int) -> str:
    """Format integer epoch seconds as `YYYY-MM-DDTHH:MM:SSZ`."""
    dt = datetime.fromtimestamp(int(epoch_s), tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def snap_to_grid(epoch_s: float, grid: int = GRID_SECONDS) -> int:
    """Round an instant to the nearest grid point (ties round up)."""
    return int((epoch_s + grid / 2) // grid) * grid
