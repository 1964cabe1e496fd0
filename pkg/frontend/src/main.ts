/** Bootstrap: wire the store, the chart and the classification form. */

import { ApiClient } from "./api.js";
import { ChartView } from "./render.js";
import { LabellerStore } from "./store.js";
import { CAUSES, CONFIDENCE_LEVELS, DRIFT_TYPES } from "./types.js";
import { formatTime } from "./timegrid.js";

function option(value: string, text?: string): HTMLOptionElement {
  const opt = document.createElement("option");
  opt.value = value;
  opt.textContent = text ?? value;
  return opt;
}

function fillSelect(select: HTMLSelectElement, values: readonly string[]): void {
  select.replaceChildren(option("", "--"));
  for (const value of values) {
    select.appendChild(option(value));
  }
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const store = new LabellerStore(api);

  const chartHost = document.getElementById("chart")!;
  const chart = new ChartView(chartHost, store);

  const expertSelect = document.getElementById("expert") as HTMLSelectElement;
  const turbineSelect = document.getElementById("turbine") as HTMLSelectElement;
  const typeSelect = document.getElementById("drift-type") as HTMLSelectElement;
  const causeSelect = document.getElementById("cause") as HTMLSelectElement;
  const severityInput = document.getElementById("severity") as HTMLInputElement;
  const confidenceSelect = document.getElementById("confidence") as HTMLSelectElement;
  const noteInput = document.getElementById("note") as HTMLInputElement;
  const submitButton = document.getElementById("submit") as HTMLButtonElement;
  const selectionSpan = document.getElementById("selection")!;
  const statusSpan = document.getElementById("status")!;
  const labelsToggle = document.getElementById("toggle-labels") as HTMLInputElement;
  const eventsToggle = document.getElementById("toggle-events") as HTMLInputElement;
  const consensusToggle = document.getElementById("toggle-consensus") as HTMLInputElement;
  const detectButton = document.getElementById("run-detectors") as HTMLButtonElement;

  fillSelect(typeSelect, DRIFT_TYPES);
  fillSelect(causeSelect, CAUSES);
  fillSelect(confidenceSelect, CONFIDENCE_LEVELS);

  store.subscribe((state) => {
    chart.render(state);
    selectionSpan.textContent = state.selection
      ? `${formatTime(state.selection.start)} .. ${formatTime(state.selection.end)}`
      : "none (drag on the chart)";
    submitButton.disabled = !store.canSubmit();
    statusSpan.textContent = state.submitError
      ? `error: ${state.submitError}${state.submitErrorField ? ` (${state.submitErrorField})` : ""}`
      : state.overlayError
        ? `overlay error: ${state.overlayError}`
        : "";
    labelsToggle.checked = state.overlays.labels;
    eventsToggle.checked = state.overlays.events;
    consensusToggle.checked = state.overlays.consensus;
  });

  await store.init();

  expertSelect.replaceChildren(option("", "-- choose expert --"));
  for (const expert of store.state.experts) {
    expertSelect.appendChild(
      option(expert.expert_id, expert.display_name || expert.expert_id),
    );
  }
  turbineSelect.replaceChildren();
  for (const turbine of store.state.turbines) {
    for (const model of turbine.models) {
      turbineSelect.appendChild(option(`${turbine.turbine_id}/${model}`));
    }
  }

  expertSelect.addEventListener("change", () => store.setExpert(expertSelect.value));
  turbineSelect.addEventListener("change", async () => {
    const [turbineId, modelId] = turbineSelect.value.split("/");
    store.setTurbineModel(turbineId, modelId);
    await store.loadResiduals();
  });
  typeSelect.addEventListener("change", () => store.setDraft({ drift_type: typeSelect.value }));
  causeSelect.addEventListener("change", () => store.setDraft({ cause: causeSelect.value }));
  severityInput.addEventListener("change", () =>
    store.setDraft({ severity: Number(severityInput.value) }),
  );
  confidenceSelect.addEventListener("change", () =>
    store.setDraft({ confidence: confidenceSelect.value }),
  );
  noteInput.addEventListener("change", () => store.setDraft({ note: noteInput.value }));
  submitButton.addEventListener("click", () => void store.submitLabel());
  labelsToggle.addEventListener("change", () => void store.toggleOverlay("labels"));
  eventsToggle.addEventListener("change", () => void store.toggleOverlay("events"));
  consensusToggle.addEventListener("change", () => void store.toggleOverlay("consensus"));
  detectButton.addEventListener("click", () =>
    void store.runDetectors({
      cusum: { threshold: 5.0, drift_allowance: 0.5 },
      ph: { threshold: 50.0, delta: 0.005 },
      adwin: { delta: 0.002 },
    }),
  );

  if (store.state.turbineId) {
    await store.loadResiduals();
  }
}

void boot();
