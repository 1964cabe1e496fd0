/** Wire types for the labelling service API. Timestamps are RFC 3339 UTC strings. */

export interface TurbineInfo {
  turbine_id: string;
  models: string[];
}

export interface ResidualPoint {
  t: string;
  actual: number;
  predicted?: number | null;
  residual?: number | null;
  n_members: number;
}

export interface DriftLabel {
  label_id: string;
  turbine_id: string;
  model_id: string;
  start: string;
  end: string;
  drift_type: string;
  cause: string;
  severity: number;
  confidence: string;
  expert_id: string;
  created_at: string;
  note?: string;
  supersedes?: string | null;
}

export interface DetectionEvent {
  detector: string;
  t: string;
  sample_index: number;
  statistic: number;
}

export interface ResidualPage {
  turbine_id: string;
  model_id: string;
  from?: string;
  to?: string;
  total_points: number;
  points: ResidualPoint[];
  labels?: DriftLabel[];
  events?: DetectionEvent[];
}

export interface ExpertInfo {
  expert_id: string;
  display_name: string;
}

export interface LabelDraft {
  drift_type: string;
  cause: string;
  severity: number;
  confidence: string;
  note: string;
}

export interface DetectResponse {
  run_id: string;
  turbine_id: string;
  model_id: string;
  events: Record<string, DetectionEvent[]>;
}

export const DRIFT_TYPES = ["sudden", "gradual", "recurring", "unknown"] as const;
export const CAUSES = [
  "sensor_miscalibration",
  "maintenance_action",
  "power_limitation",
  "wear",
  "other",
] as const;
export const CONFIDENCE_LEVELS = ["low", "medium", "high"] as const;
