/** Evidence form state and its mapping to prediction requests.
 *
 * Every variable defaults to "unknown" (unchecked is not observed-false);
 * only explicit present/absent selections travel to the service. State
 * serializes losslessly, so a restored session produces the identical
 * request.
 */

import type { PredictRequest, TriState } from "./types.js";

export interface EvidenceFormState {
  modelId: string;
  selections: Record<string, TriState>;
  k: number;
  threshold: number;
  seed?: number;
}

export const DEFAULT_K = 5;
export const DEFAULT_THRESHOLD = 0.3;

export function initialState(modelId: string): EvidenceFormState {
  return { modelId, selections: {}, k: DEFAULT_K, threshold: DEFAULT_THRESHOLD };
}

export function selectionOf(state: EvidenceFormState, variable: string): TriState {
  return state.selections[variable] ?? "unknown";
}

export function setSelection(
  state: EvidenceFormState,
  variable: string,
  value: TriState,
): EvidenceFormState {
  const selections = { ...state.selections };
  if (value === "unknown") {
    delete selections[variable];
  } else {
    selections[variable] = value;
  }
  return { ...state, selections };
}

/** Cycle unknown -> present -> absent -> unknown (tri-state toggle clicks). */
export function cycleSelection(state: EvidenceFormState, variable: string): EvidenceFormState {
  const next: Record<TriState, TriState> = {
    unknown: "present",
    present: "absent",
    absent: "unknown",
  };
  return setSelection(state, variable, next[selectionOf(state, variable)]);
}

export function toPredictRequest(state: EvidenceFormState): PredictRequest {
  const evidence = Object.entries(state.selections)
    .filter(([, tri]) => tri !== "unknown")
    .map(([variable, tri]) => ({ variable, value: tri === "present" }))
    .sort((a, b) => (a.variable < b.variable ? -1 : a.variable > b.variable ? 1 : 0));
  const request: PredictRequest = { evidence, k: state.k, threshold: state.threshold };
  if (state.seed !== undefined) {
    request.seed = state.seed;
  }
  return request;
}

export function serializeState(state: EvidenceFormState): string {
  return JSON.stringify({
    modelId: state.modelId,
    selections: state.selections,
    k: state.k,
    threshold: state.threshold,
    seed: state.seed ?? null,
  });
}

export function restoreState(payload: string): EvidenceFormState {
  const raw = JSON.parse(payload) as {
    modelId: string;
    selections: Record<string, TriState>;
    k: number;
    threshold: number;
    seed: number | null;
  };
  const state: EvidenceFormState = {
    modelId: raw.modelId,
    selections: { ...raw.selections },
    k: raw.k,
    threshold: raw.threshold,
  };
  if (raw.seed !== null && raw.seed !== undefined) {
    state.seed = raw.seed;
  }
  return state;
}
