/**
 * End-to-end acceptance: entering the case-study-style evidence (five
 * observed problems plus eight observed effects) and submitting must render
 * a top-5 ranking identical in order and rounded percentages to the raw
 * service response, and raising the threshold above the top probability
 * must empty the list with an explanatory notice.
 *
 * The default run replays JSON bodies captured from the real service
 * (scripts/capture_fixtures.py). Set CAUSENET_SERVICE_URL to run the same
 * scenario against a live service instead.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { buildFormGroups } from "../src/form.js";
import { buildRankingViewModel } from "../src/ranking.js";
import { renderForm, renderRanking } from "../src/render.js";
import { initialState, setSelection, toPredictRequest } from "../src/state.js";
import type { PredictRequest, PredictResponse, VariableGroups } from "../src/types.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

const EVIDENCE_PROBLEMS = [
  "Unclear requirements",
  "Requirements keep changing",
  "Slow stakeholder feedback",
  "Team communication gaps",
  "Scope never agreed",
];
const EVIDENCE_EFFECTS = [
  "Rework of finished features",
  "Missed deadlines",
  "Budget overrun",
  "Team frustration",
  "Growing defect backlog",
  "Customer distrust",
  "Features cut late",
  "Overtime spikes",
];

function stubbedClient(): ApiClient {
  const request = fixture<PredictRequest>("predict_request.json");
  const byThreshold: Record<string, PredictResponse> = {
    "0.3": fixture<PredictResponse>("predict_response.json"),
    "0.99": fixture<PredictResponse>("predict_response_t99.json"),
  };
  return new ApiClient("http://fixture", async (input, init) => {
    const respond = (body: unknown) =>
      new Response(JSON.stringify(body), { status: 200, headers: { "content-type": "application/json" } });
    if (input.endsWith("/variables")) {
      return respond(fixture("variables.json"));
    }
    if (input.endsWith("/predict")) {
      const body = JSON.parse(String(init?.body)) as PredictRequest;
      expect(body.evidence).toEqual(request.evidence);
      const canned = byThreshold[String(body.threshold)];
      if (!canned) throw new Error(`no canned response for threshold ${body.threshold}`);
      return respond(canned);
    }
    throw new Error(`unexpected request ${input}`);
  });
}

function liveClient(): ApiClient | null {
  const base = process.env["CAUSENET_SERVICE_URL"];
  return base ? new ApiClient(base) : null;
}

describe("acceptance: evidence entry to rendered ranking", () => {
  const client = liveClient() ?? stubbedClient();
  const modelId = "re-survey-diagnostic";

  it("renders the top-5 ranking exactly as the service ordered it", async () => {
    const variables = await client.variables(modelId);
    const groups = buildFormGroups(variables as VariableGroups);
    expect(groups.some((g) => g.tag === "C")).toBe(false); // outputs are not evidence

    let state = initialState(modelId);
    for (const p of EVIDENCE_PROBLEMS) {
      state = setSelection(state, `P:${p}`, "present");
    }
    for (const e of EVIDENCE_EFFECTS) {
      state = setSelection(state, `E:${e}`, "present");
    }
    // the form offers every clamped variable
    const formHtml = renderForm(groups, state);
    for (const p of EVIDENCE_PROBLEMS) {
      expect(formHtml).toContain(`data-variable="P:${p}"`);
    }

    const request = toPredictRequest(state);
    expect(request.evidence).toHaveLength(13);
    const response = await client.predict(modelId, request);
    const vm = buildRankingViewModel(response);

    expect(vm.entries).toHaveLength(5);
    expect(vm.entries.map((e) => e.name)).toEqual(response.ranking.map((r) => r.variable));
    expect(vm.entries.map((e) => e.percent)).toEqual(
      response.ranking.map((r) => Math.round(r.probability * 100)),
    );

    const html = renderRanking(vm);
    const rendered = [...html.matchAll(/class="rank-name">([^<]+)</g)].map((m) => m[1]);
    expect(rendered).toEqual(response.ranking.map((r) => r.variable));
    const percents = [...html.matchAll(/class="rank-pct">(\d+)%</g)].map((m) => Number(m[1]));
    expect(percents).toEqual(response.ranking.map((r) => Math.round(r.probability * 100)));
  });

  it("empties the list with a notice when the threshold tops the best probability", async () => {
    let state = initialState(modelId);
    for (const p of EVIDENCE_PROBLEMS) {
      state = setSelection(state, `P:${p}`, "present");
    }
    for (const e of EVIDENCE_EFFECTS) {
      state = setSelection(state, `E:${e}`, "present");
    }
    state = { ...state, threshold: 0.99 };
    const response = await client.predict(modelId, toPredictRequest(state));
    const vm = buildRankingViewModel(response);
    expect(vm.entries).toEqual([]);
    expect(vm.cutoffNotice).toMatch(/No prediction exceeds/);
    const html = renderRanking(vm);
    expect(html).toContain("cutoff-notice");
    expect(html).not.toContain("rank-entry");
  });
});
