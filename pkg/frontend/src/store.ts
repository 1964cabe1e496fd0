/** Application state and actions; DOM-free so the logic is unit-testable. */

import { ApiClient, ApiRequestError } from "./api.js";
import type {
  DetectionEvent,
  DriftLabel,
  ExpertInfo,
  LabelDraft,
  ResidualPage,
  TurbineInfo,
} from "./types.js";
import type { Period } from "./timegrid.js";
import { normalizeSelection } from "./timegrid.js";

export interface OverlayState {
  labels: boolean;
  events: boolean;
  consensus: boolean;
}

export interface LabellerState {
  turbines: TurbineInfo[];
  experts: ExpertInfo[];
  turbineId: string | null;
  modelId: string | null;
  expertId: string | null;
  page: ResidualPage | null;
  labels: DriftLabel[];
  events: DetectionEvent[];
  runId: string | null;
  overlays: OverlayState;
  selection: Period | null;
  dragOrigin: number | null;
  dragCurrent: number | null;
  draft: LabelDraft;
  submitError: string | null;
  submitErrorField: string | null;
  overlayError: string | null;
}

const EMPTY_DRAFT: LabelDraft = {
  drift_type: "",
  cause: "",
  severity: 3,
  confidence: "",
  note: "",
};

function defaultKeygen(): string {
  const rand = Math.random().toString(36).slice(2);
  return `lbl-${Date.now().toString(36)}-${rand}`;
}

export class LabellerStore {
  readonly state: LabellerState = {
    turbines: [],
    experts: [],
    turbineId: null,
    modelId: null,
    expertId: null,
    page: null,
    labels: [],
    events: [],
    runId: null,
    overlays: { labels: true, events: false, consensus: false },
    selection: null,
    dragOrigin: null,
    dragCurrent: null,
    draft: { ...EMPTY_DRAFT },
    submitError: null,
    submitErrorField: null,
    overlayError: null,
  };

  private listeners: Array<(s: LabellerState) => void> = [];
  private pendingKey: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly keygen: () => string = defaultKeygen,
  ) {}

  subscribe(listener: (s: LabellerState) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  async init(): Promise<void> {
    this.state.turbines = await this.api.listTurbines();
    this.state.experts = await this.api.listExperts();
    const first = this.state.turbines[0];
    if (first && first.models.length) {
      this.state.turbineId = first.turbine_id;
      this.state.modelId = first.models[0];
    }
    this.emit();
  }

  setExpert(expertId: string): void {
    this.state.expertId = expertId;
    this.emit();
  }

  setTurbineModel(turbineId: string, modelId: string): void {
    this.state.turbineId = turbineId;
    this.state.modelId = modelId;
    this.state.page = null;
    this.state.labels = [];
    this.state.events = [];
    this.state.runId = null;
    this.emit();
  }

  async loadResiduals(maxPoints = 2000): Promise<void> {
    if (!this.state.turbineId || !this.state.modelId) return;
    this.state.page = await this.api.residualPage(
      this.state.turbineId,
      this.state.modelId,
      { maxPoints },
    );
    if (this.state.overlays.labels) {
      await this.refreshLabels();
    }
    this.emit();
  }

  async refreshLabels(): Promise<void> {
    if (!this.state.turbineId || !this.state.modelId) return;
    this.state.labels = await this.api.listLabels(
      this.state.turbineId,
      this.state.modelId,
    );
    this.emit();
  }

  // --- brush selection (time domain; the view converts pixels to time) ----

  beginDrag(t: number): void {
    this.state.dragOrigin = t;
    this.state.dragCurrent = t;
    this.emit();
  }

  updateDrag(t: number): void {
    if (this.state.dragOrigin === null) return;
    this.state.dragCurrent = t;
    this.emit();
  }

  endDrag(): Period | null {
    if (this.state.dragOrigin === null || this.state.dragCurrent === null) {
      return null;
    }
    // right-to-left drags swap; sub-grid drags clear the selection
    this.state.selection = normalizeSelection(
      this.state.dragOrigin,
      this.state.dragCurrent,
    );
    this.state.dragOrigin = null;
    this.state.dragCurrent = null;
    this.emit();
    return this.state.selection;
  }

  clearSelection(): void {
    this.state.selection = null;
    this.emit();
  }

  setDraft(update: Partial<LabelDraft>): void {
    this.state.draft = { ...this.state.draft, ...update };
    this.emit();
  }

  canSubmit(): boolean {
    const { selection, expertId, draft } = this.state;
    return Boolean(
      selection &&
        expertId &&
        draft.drift_type &&
        draft.cause &&
        draft.confidence &&
        draft.severity >= 1 &&
        draft.severity <= 5,
    );
  }

  /**
   * Post the current selection + form as a label. Network failures keep the
   * idempotency key so a retry cannot duplicate the record; server-side
   * validation errors surface per field and reset the key.
   */
  async submitLabel(): Promise<DriftLabel | null> {
    if (!this.canSubmit()) {
      this.state.submitError = "selection and all classification fields are required";
      this.state.submitErrorField = null;
      this.emit();
      return null;
    }
    const key = this.pendingKey ?? this.keygen();
    this.pendingKey = key;
    try {
      const stored = await this.api.postLabel(
        this.state.turbineId!,
        this.state.modelId!,
        this.state.expertId!,
        this.state.selection!,
        this.state.draft,
        key,
      );
      this.pendingKey = null;
      this.state.submitError = null;
      this.state.submitErrorField = null;
      // render the new band immediately, no reload round-trip needed
      this.state.labels = [...this.state.labels, stored];
      this.state.selection = null;
      this.state.draft = { ...EMPTY_DRAFT };
      this.emit();
      return stored;
    } catch (err) {
      if (err instanceof ApiRequestError) {
        this.pendingKey = null;
        this.state.submitError = err.body.message;
        this.state.submitErrorField = err.body.field ?? null;
      } else {
        // network failure: keep the key, the retry reuses it
        this.state.submitError = "network error, retry submits the same label";
        this.state.submitErrorField = null;
      }
      this.emit();
      return null;
    }
  }

  async toggleOverlay(layer: keyof OverlayState): Promise<void> {
    this.state.overlays[layer] = !this.state.overlays[layer];
    this.state.overlayError = null;
    try {
      // the consensus view derives from the same label records
      const wantsLabels =
        (layer === "labels" && this.state.overlays.labels) ||
        (layer === "consensus" && this.state.overlays.consensus);
      if (wantsLabels) {
        await this.refreshLabels();
      }
    } catch (err) {
      this.state.overlayError = String(err);
      this.state.overlays[layer] = false;
    }
    this.emit();
  }

  /** Run detectors server-side and overlay the returned events. */
  async runDetectors(
    detectors: Record<string, Record<string, unknown>>,
  ): Promise<void> {
    if (!this.state.turbineId || !this.state.modelId) return;
    const response = await this.api.detect(
      this.state.turbineId,
      this.state.modelId,
      detectors,
    );
    this.state.runId = response.run_id;
    this.state.events = Object.values(response.events).flat();
    this.state.overlays.events = true;
    this.emit();
  }
}
