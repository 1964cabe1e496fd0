/** Typed client for the labelling service; fetch is injectable for tests. */

import type {
  DetectResponse,
  DriftLabel,
  ExpertInfo,
  LabelDraft,
  ResidualPage,
  TurbineInfo,
} from "./types.js";
import type { Period } from "./timegrid.js";
import { formatTime } from "./timegrid.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ApiError {
  code: string;
  message: string;
  correlation_id: string;
  field?: string | null;
}

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiError,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiRequestError(response.status, body as ApiError);
    }
    return body as T;
  }

  listTurbines(): Promise<TurbineInfo[]> {
    return this.request("/turbines");
  }

  async listExperts(): Promise<ExpertInfo[]> {
    const body = await this.request<{ experts: ExpertInfo[] }>("/experts");
    return body.experts;
  }

  residualPage(
    turbineId: string,
    modelId: string,
    options: {
      from?: string;
      to?: string;
      maxPoints?: number;
      overlay?: string[];
      runId?: string;
    } = {},
  ): Promise<ResidualPage> {
    const params = new URLSearchParams();
    if (options.from) params.set("from", options.from);
    if (options.to) params.set("to", options.to);
    if (options.maxPoints) params.set("max_points", String(options.maxPoints));
    if (options.overlay?.length) params.set("overlay", options.overlay.join(","));
    if (options.runId) params.set("run_id", options.runId);
    const query = params.toString();
    return this.request(
      `/turbines/${encodeURIComponent(turbineId)}/models/${encodeURIComponent(modelId)}` +
        `/residuals${query ? "?" + query : ""}`,
    );
  }

  async listLabels(turbineId: string, modelId: string): Promise<DriftLabel[]> {
    const params = new URLSearchParams({ turbine_id: turbineId, model_id: modelId });
    const body = await this.request<{ labels: DriftLabel[] }>(`/labels?${params}`);
    return body.labels;
  }

  postLabel(
    turbineId: string,
    modelId: string,
    expertId: string,
    period: Period,
    draft: LabelDraft,
    idempotencyKey: string,
  ): Promise<DriftLabel> {
    return this.request("/labels", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        turbine_id: turbineId,
        model_id: modelId,
        start: formatTime(period.start),
        end: formatTime(period.end),
        drift_type: draft.drift_type,
        cause: draft.cause,
        severity: draft.severity,
        confidence: draft.confidence,
        expert_id: expertId,
        note: draft.note,
        idempotency_key: idempotencyKey,
      }),
    });
  }

  detect(
    turbineId: string,
    modelId: string,
    detectors: Record<string, Record<string, unknown>>,
  ): Promise<DetectResponse> {
    return this.request("/detect", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        turbine_id: turbineId,
        model_id: modelId,
        detectors,
      }),
    });
  }
}
