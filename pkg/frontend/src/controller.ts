// Session flow: start -> (suggest -> observe)* with no optimistic UI;
// after every mutation the view re-renders from a fresh GET snapshot.

import { ApiError, Client } from "./api.js";
import type { ModelInfo, Snapshot, Suggestion } from "./api.js";
import {
  cardView,
  chartView,
  gridView,
  observationFromEntries,
  validateEntries,
  type TriState,
} from "./state.js";
import {
  el,
  readTriStateTable,
  renderCard,
  renderChart,
  renderError,
  renderGrid,
  renderModelOptions,
  renderStatus,
  renderTriStateTable,
} from "./ui.js";

export interface ConsoleElements {
  modelSelect: HTMLSelectElement;
  policySelect: HTMLSelectElement;
  modeSelect: HTMLSelectElement;
  semanticsSelect: HTMLSelectElement;
  controlsInput: HTMLInputElement;
  seedInput: HTMLInputElement;
  observationTable: HTMLElement;
  startButton: HTMLButtonElement;
  startError: HTMLElement;
  sessionPanel: HTMLElement;
  status: HTMLElement;
  grid: HTMLElement;
  card: HTMLElement;
  observeTable: HTMLElement;
  suggestButton: HTMLButtonElement;
  observeButton: HTMLButtonElement;
  sessionError: HTMLElement;
  chart: HTMLElement;
}

export class ConsoleController {
  models: ModelInfo[] = [];
  snapshot: Snapshot | null = null;
  pending: Suggestion | null = null;

  constructor(
    private client: Client,
    private dom: ConsoleElements,
  ) {}

  async init(): Promise<void> {
    this.models = await this.client.listModels();
    renderModelOptions(this.dom.modelSelect, this.models);
    this.renderObservationForm();
    this.dom.modelSelect.addEventListener("change", () => this.renderObservationForm());
    this.dom.startButton.addEventListener("click", () => void this.start());
    this.dom.suggestButton.addEventListener("click", () => void this.requestSuggestion());
    this.dom.observeButton.addEventListener("click", () => void this.submitObservation());
  }

  currentModel(): ModelInfo | undefined {
    return this.models.find((m) => m.name === this.dom.modelSelect.value);
  }

  renderObservationForm(): void {
    const model = this.currentModel();
    if (!model) return;
    renderTriStateTable(
      this.dom.observationTable,
      [...model.inputs, ...model.outputs, ...model.internals],
      "obs",
    );
  }

  async start(): Promise<void> {
    const model = this.currentModel();
    if (!model) return;
    const entries = readTriStateTable(this.dom.observationTable);
    const known = new Set([...model.inputs, ...model.outputs, ...model.internals]);
    const invalid = validateEntries(entries, known);
    if (invalid) {
      renderError(this.dom.startError, invalid);
      return;
    }
    const controls = this.dom.controlsInput.value
      .split(",")
      .map((s) => s.trim())
      .filter(Boolean);
    try {
      const snapshot = await this.client.createSession({
        model: model.name,
        observation: observationFromEntries(entries),
        mode: this.dom.modeSelect.value as "operator" | "simulated",
        policy: this.dom.policySelect.value,
        semantics: this.dom.semanticsSelect.value as "weak" | "strong",
        seed: Number(this.dom.seedInput.value || "0"),
        controls: controls.length ? controls : undefined,
      });
      renderError(this.dom.startError, null);
      this.snapshot = snapshot;
      this.pending = snapshot.pending;
      this.dom.sessionPanel.hidden = false;
      this.renderSession();
    } catch (err) {
      renderError(this.dom.startError, describeError(err));
    }
  }

  async requestSuggestion(): Promise<void> {
    if (!this.snapshot) return;
    try {
      this.pending = await this.client.suggest(this.snapshot.id);
      renderError(this.dom.sessionError, null);
    } catch (err) {
      renderError(this.dom.sessionError, describeError(err));
      return;
    }
    await this.refresh();
  }

  async submitObservation(): Promise<void> {
    if (!this.snapshot || !this.pending) return;
    const entries = readTriStateTable(this.dom.observeTable);
    try {
      await this.client.observe(this.snapshot.id, observationFromEntries(entries));
      this.pending = null;
      renderError(this.dom.sessionError, null);
    } catch (err) {
      // keep the entered values; just surface the rejection
      renderError(this.dom.sessionError, describeError(err));
      return;
    }
    await this.refresh();
  }

  async refresh(): Promise<void> {
    if (!this.snapshot) return;
    this.snapshot = await this.client.getSession(this.snapshot.id);
    this.renderSession();
  }

  renderSession(): void {
    if (!this.snapshot) return;
    const grid = gridView(this.snapshot);
    renderGrid(this.dom.grid, grid);
    renderStatus(this.dom.status, grid);
    renderChart(this.dom.chart, chartView(this.snapshot.history, this.snapshot.fit));
    const suggestion = this.pending ?? this.snapshot.pending;
    if (this.snapshot.outcome !== null) {
      renderCard(this.dom.card, null);
      this.dom.observeTable.replaceChildren();
      return;
    }
    if (suggestion) {
      const card = cardView(suggestion, this.snapshot.policy);
      renderCard(this.dom.card, card);
      const model = this.models.find((m) => m.name === this.snapshot?.model);
      const readable =
        suggestion.kind === "probe"
          ? card.variables
          : model
            ? [...model.outputs, ...model.inputs]
            : [];
      renderTriStateTable(this.dom.observeTable, readable, "read");
    } else {
      renderCard(this.dom.card, null);
      this.dom.observeTable.replaceChildren();
    }
  }
}

export function describeError(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

export function bindDefaultElements(root: Document): ConsoleElements {
  const byId = <T extends HTMLElement>(id: string): T => {
    const node = root.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
  };
  return {
    modelSelect: byId<HTMLSelectElement>("model"),
    policySelect: byId<HTMLSelectElement>("policy"),
    modeSelect: byId<HTMLSelectElement>("mode"),
    semanticsSelect: byId<HTMLSelectElement>("semantics"),
    controlsInput: byId<HTMLInputElement>("controls"),
    seedInput: byId<HTMLInputElement>("seed"),
    observationTable: byId("observation-table"),
    startButton: byId<HTMLButtonElement>("start"),
    startError: byId("start-error"),
    sessionPanel: byId("session"),
    status: byId("status"),
    grid: byId("grid"),
    card: byId("card"),
    observeTable: byId("observe-table"),
    suggestButton: byId<HTMLButtonElement>("suggest"),
    observeButton: byId<HTMLButtonElement>("observe"),
    sessionError: byId("session-error"),
    chart: byId("chart"),
  };
}
