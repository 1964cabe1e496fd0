/** RFC 3339 UTC parsing/formatting and the 10-minute measurement grid. */

export const GRID_SECONDS = 600;

/** Parse an RFC 3339 UTC timestamp to epoch seconds. */
export function parseTime(text: string): number {
  const ms = Date.parse(text);
  if (Number.isNaN(ms)) {
    throw new Error(`invalid timestamp: ${text}`);
  }
  return Math.floor(ms / 1000);
}

/** Format epoch seconds as YYYY-MM-DDTHH:MM:SSZ (no milliseconds). */
export function formatTime(epochS: number): string {
  return new Date(epochS * 1000).toISOString().replace(/\.\d{3}Z$/, "Z");
}

/** Round an instant to the nearest grid point; ties round up. */
export function snapToGrid(epochS: number, grid: number = GRID_SECONDS): number {
  return Math.floor((epochS + grid / 2) / grid) * grid;
}

export interface Period {
  start: number;
  end: number;
}

/**
 * Turn a raw drag interval into a grid-snapped selection.
 *
 * Endpoints are snapped to the grid and swapped if dragged right-to-left;
 * a selection narrower than one grid step clears to null.
 */
export function normalizeSelection(
  a: number,
  b: number,
  grid: number = GRID_SECONDS,
): Period | null {
  let start = snapToGrid(a, grid);
  let end = snapToGrid(b, grid);
  if (start > end) {
    [start, end] = [end, start];
  }
  if (end - start < grid) {
    return null;
  }
  return { start, end };
}
