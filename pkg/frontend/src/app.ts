/** Browser wiring: model picker, evidence form, ranking view, diagnostics. */

import { ApiClient, ApiError } from "./api.js";
import { dotToSvg, extractCurves, extractRankingScores, parseDot } from "./diagnostics.js";
import { applyFactorSelection, buildFormGroups, type FormGroup } from "./form.js";
import { buildRankingViewModel, toggleConfirmed, type RankingViewModel } from "./ranking.js";
import {
  cycleSelection,
  initialState,
  restoreState,
  serializeState,
  toPredictRequest,
  type EvidenceFormState,
} from "./state.js";
import { PredictScheduler } from "./scheduler.js";
import {
  renderCurves,
  renderErrorBanner,
  renderForm,
  renderRanking,
  renderRankingScores,
} from "./render.js";
import type { VariableGroups } from "./types.js";

const STORAGE_KEY = "causenet-evidence-form";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export class App {
  private api: ApiClient;
  private state: EvidenceFormState = initialState("");
  private groups: FormGroup[] = [];
  private variables: VariableGroups | null = null;
  private vm: RankingViewModel | null = null;
  private scheduler: PredictScheduler;

  constructor(baseUrl: string) {
    this.api = new ApiClient(baseUrl);
    this.scheduler = new PredictScheduler((request, signal) =>
      this.api.predict(this.state.modelId, request, signal),
    );
  }

  async start(): Promise<void> {
    try {
      const models = await this.api.listModels();
      const picker = el<HTMLSelectElement>("model-picker");
      picker.innerHTML = models
        .map(
          (m) =>
            `<option value="${m.model_id}">${m.model_id} (${m.architecture}, ${m.use_case})</option>`,
        )
        .join("");
      picker.onchange = () => void this.selectModel(picker.value);
      this.bindControls();
      if (models.length > 0 && models[0]) {
        await this.selectModel(models[0].model_id);
      }
    } catch (error) {
      this.showError(error, () => void this.start());
    }
  }

  private bindControls(): void {
    el<HTMLInputElement>("k-input").onchange = (ev) => {
      this.state = { ...this.state, k: Number((ev.target as HTMLInputElement).value) || 5 };
      void this.submit();
    };
    const threshold = el<HTMLInputElement>("threshold-input");
    threshold.oninput = () => {
      el("threshold-value").textContent = `${Math.round(Number(threshold.value) * 100)}%`;
    };
    threshold.onchange = () => {
      this.state = { ...this.state, threshold: Number(threshold.value) };
      void this.submit();
    };
    el("evidence-form").addEventListener("click", (ev) => {
      const target = ev.target as HTMLElement;
      if (target.classList.contains("tri-toggle")) {
        const variable = target.dataset["variable"];
        if (variable) {
          this.state = cycleSelection(this.state, variable);
          this.redrawForm();
          void this.submit();
        }
      }
    });
    el("evidence-form").addEventListener("change", (ev) => {
      const target = ev.target as HTMLSelectElement;
      const factor = target.dataset["factor"];
      if (factor) {
        const control = this.groups
          .flatMap((g) => g.controls)
          .find((c) => c.kind === "factor-select" && c.factor === factor);
        if (control && control.kind === "factor-select") {
          this.state = applyFactorSelection(this.state, control, target.value || null);
          void this.submit();
        }
      }
    });
    el("ranking-view").addEventListener("click", (ev) => {
      const target = ev.target as HTMLElement;
      if (target.classList.contains("confirm-toggle") && this.vm) {
        const name = target.dataset["name"];
        if (name) {
          this.vm = toggleConfirmed(this.vm, name);
          el("ranking-view").innerHTML = renderRanking(this.vm);
        }
      }
    });
  }

  private async selectModel(modelId: string): Promise<void> {
    try {
      const stored = window.localStorage.getItem(`${STORAGE_KEY}:${modelId}`);
      this.state = stored ? restoreState(stored) : initialState(modelId);
      this.variables = await this.api.variables(modelId);
      this.groups = buildFormGroups(this.variables);
      this.redrawForm();
      await this.submit();
      await this.loadDiagnostics(modelId);
    } catch (error) {
      this.showError(error, () => void this.selectModel(modelId));
    }
  }

  private redrawForm(): void {
    el("evidence-form").innerHTML = renderForm(this.groups, this.state);
  }

  private async submit(): Promise<void> {
    if (!this.state.modelId) return;
    window.localStorage.setItem(
      `${STORAGE_KEY}:${this.state.modelId}`,
      serializeState(this.state),
    );
    try {
      const response = await this.scheduler.submit(toPredictRequest(this.state));
      if (response === null) {
        return; // superseded by a newer submission
      }
      this.vm = buildRankingViewModel(response);
      el("ranking-view").innerHTML = renderRanking(this.vm);
      el("banner").innerHTML = "";
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        el("banner").innerHTML = renderErrorBanner(`Evidence rejected: ${error.detail}`);
        const match = error.detail.match(/'([^']+)'/);
        if (match && match[1]) {
          document
            .querySelector(`[data-variable="${CSS.escape(match[1])}"]`)
            ?.classList.add("invalid");
        }
        return;
      }
      this.showError(error, () => void this.submit());
    }
  }

  private async loadDiagnostics(modelId: string): Promise<void> {
    const metrics = await this.api.metrics(modelId);
    if (metrics && typeof metrics === "object" && "evaluation" in metrics) {
      const evaluation = (metrics as { evaluation: unknown }).evaluation;
      el("metrics-view").innerHTML =
        renderCurves(extractCurves(evaluation)) + renderRankingScores(extractRankingScores(evaluation));
    } else {
      el("metrics-view").innerHTML = "<p class='muted'>No stored evaluation for this model.</p>";
    }
    try {
      const dot = await this.api.graphDot(modelId);
      el("graph-view").innerHTML = dotToSvg(parseDot(dot));
    } catch {
      el("graph-view").innerHTML = "<p class='muted'>Graph unavailable.</p>";
    }
  }

  private showError(error: unknown, retry: () => void): void {
    const message = error instanceof Error ? error.message : String(error);
    el("banner").innerHTML = renderErrorBanner(`Service unreachable: ${message}`);
    const button = el("banner").querySelector(".retry");
    if (button) {
      (button as HTMLButtonElement).onclick = retry;
    }
  }
}

declare global {
  interface Window {
    causenetApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("model-picker")) {
  const base = new URLSearchParams(window.location.search).get("service") ?? "";
  const app = new App(base);
  window.causenetApp = app;
  void app.start();
}
