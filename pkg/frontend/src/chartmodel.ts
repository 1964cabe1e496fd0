/** Pure chart geometry: scales, the residual path, label bands, event ticks. */

import type { DetectionEvent, DriftLabel, ResidualPoint } from "./types.js";
import { parseTime } from "./timegrid.js";

export interface TimeScale {
  t0: number;
  t1: number;
  x0: number;
  x1: number;
}

export function toX(scale: TimeScale, t: number): number {
  return scale.x0 + ((t - scale.t0) / (scale.t1 - scale.t0)) * (scale.x1 - scale.x0);
}

export function fromX(scale: TimeScale, x: number): number {
  return scale.t0 + ((x - scale.x0) / (scale.x1 - scale.x0)) * (scale.t1 - scale.t0);
}

export interface ValueScale {
  v0: number;
  v1: number;
  y0: number; // pixel for v0 (bottom)
  y1: number; // pixel for v1 (top)
}

export function toY(scale: ValueScale, v: number): number {
  return scale.y0 + ((v - scale.v0) / (scale.v1 - scale.v0)) * (scale.y1 - scale.y0);
}

/** Symmetric residual range covering the data with a small margin. */
export function residualRange(points: ResidualPoint[]): [number, number] {
  let extreme = 1.0;
  for (const p of points) {
    if (p.residual !== null && p.residual !== undefined) {
      extreme = Math.max(extreme, Math.abs(p.residual));
    }
  }
  const pad = extreme * 1.1;
  return [-pad, pad];
}

/**
 * SVG path for the residual line; gaps (missing residuals) break the path
 * so no line is drawn across uncovered stretches.
 */
export function residualPath(
  points: ResidualPoint[],
  ts: TimeScale,
  vs: ValueScale,
): string {
  const parts: string[] = [];
  let pen = false;
  for (const p of points) {
    if (p.residual === null || p.residual === undefined) {
      pen = false;
      continue;
    }
    const x = toX(ts, parseTime(p.t)).toFixed(2);
    const y = toY(vs, p.residual).toFixed(2);
    parts.push(`${pen ? "L" : "M"}${x},${y}`);
    pen = true;
  }
  return parts.join(" ");
}

export const CAUSE_COLORS: Record<string, string> = {
  sensor_miscalibration: "#d95f02",
  maintenance_action: "#7570b3",
  power_limitation: "#1b9e77",
  wear: "#e7298a",
  other: "#666666",
};

export const DETECTOR_COLORS: Record<string, string> = {
  adwin: "#1f77b4",
  cusum: "#d62728",
  gma: "#2ca02c",
  hddm_a: "#9467bd",
  hddm_w: "#8c564b",
  ph: "#e377c2",
  seed: "#7f7f7f",
  seqdrift1: "#bcbd22",
  seqdrift2: "#17becf",
  stepd: "#ff7f0e",
};

export interface Band {
  labelId: string;
  x0: number;
  x1: number;
  color: string;
  title: string;
  lane: number;
}

/**
 * Label intervals as chart bands; overlapping labels stack into lanes so
 * several experts' marks stay individually visible.
 */
export function labelBands(labels: DriftLabel[], ts: TimeScale): Band[] {
  const sorted = [...labels].sort(
    (a, b) => parseTime(a.start) - parseTime(b.start) || a.label_id.localeCompare(b.label_id),
  );
  const laneEnds: number[] = [];
  const bands: Band[] = [];
  for (const label of sorted) {
    const start = parseTime(label.start);
    const end = parseTime(label.end);
    let lane = laneEnds.findIndex((e) => e <= start);
    if (lane === -1) {
      lane = laneEnds.length;
      laneEnds.push(end);
    } else {
      laneEnds[lane] = end;
    }
    bands.push({
      labelId: label.label_id,
      x0: toX(ts, start),
      x1: toX(ts, end),
      color: CAUSE_COLORS[label.cause] ?? CAUSE_COLORS.other,
      title: `${label.cause} (sev ${label.severity}, ${label.confidence}) by ${label.expert_id}`,
      lane,
    });
  }
  return bands;
}

export interface Tick {
  x: number;
  color: string;
  detector: string;
  t: string;
}

/** Detector events as vertical tick marks, colored by kind. */
export function eventTicks(events: DetectionEvent[], ts: TimeScale): Tick[] {
  return events.map((ev) => ({
    x: toX(ts, parseTime(ev.t)),
    color: DETECTOR_COLORS[ev.detector] ?? "#333333",
    detector: ev.detector,
    t: ev.t,
  }));
}

export interface ConsensusBand {
  x0: number;
  x1: number;
  start: number;
  end: number;
  support: number; // distinct experts
  labelIds: string[];
}

function jaccard(aStart: number, aEnd: number, bStart: number, bEnd: number): number {
  const inter = Math.max(0, Math.min(aEnd, bEnd) - Math.max(aStart, bStart));
  const union = aEnd - aStart + (bEnd - bStart) - inter;
  return union > 0 ? inter / union : 0;
}

/**
 * Display grouping of overlapping labels into consensus bands, rendered
 * hatched. Mirrors the server's label-store merge policy (interval Jaccard
 * at `threshold`, merged until no pair still clears it, support counting
 * distinct experts); purely presentational, computed from GET /labels.
 */
export function consensusBands(
  labels: DriftLabel[],
  ts: TimeScale,
  threshold = 0.5,
): ConsensusBand[] {
  interface Group {
    start: number;
    end: number;
    experts: Set<string>;
    labelIds: string[];
  }
  const groups: Group[] = labels.map((lb) => ({
    start: parseTime(lb.start),
    end: parseTime(lb.end),
    experts: new Set([lb.expert_id]),
    labelIds: [lb.label_id],
  }));
  let merged = true;
  while (merged) {
    merged = false;
    outer: for (let i = 0; i < groups.length; i++) {
      for (let j = i + 1; j < groups.length; j++) {
        const a = groups[i];
        const b = groups[j];
        if (jaccard(a.start, a.end, b.start, b.end) >= threshold) {
          a.start = Math.min(a.start, b.start);
          a.end = Math.max(a.end, b.end);
          for (const e of b.experts) a.experts.add(e);
          a.labelIds.push(...b.labelIds);
          groups.splice(j, 1);
          merged = true;
          break outer;
        }
      }
    }
  }
  return groups
    .sort((a, b) => a.start - b.start || a.end - b.end)
    .map((g) => ({
      x0: toX(ts, g.start),
      x1: toX(ts, g.end),
      start: g.start,
      end: g.end,
      support: g.experts.size,
      labelIds: [...g.labelIds].sort(),
    }));
}
