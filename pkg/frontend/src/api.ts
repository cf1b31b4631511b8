/** Thin fetch wrapper over the prediction service. */

import type { ModelInfo, PredictRequest, PredictResponse, VariableGroups } from "./types.js";

export class ApiError extends Error {
  status: number;
  detail: string;

  constructor(status: number, detail: string) {
    super(`service error ${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: string; error?: string };
    return body.detail ?? body.error ?? response.statusText;
  } catch {
    return response.statusText;
  }
}

export class ApiClient {
  private base: string;
  private fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as T;
  }

  listModels(): Promise<ModelInfo[]> {
    return this.getJson<ModelInfo[]>("/models");
  }

  variables(modelId: string): Promise<VariableGroups> {
    return this.getJson<VariableGroups>(`/models/${encodeURIComponent(modelId)}/variables`);
  }

  async metrics(modelId: string): Promise<Record<string, unknown> | null> {
    const response = await this.fetchImpl(`${this.base}/models/${encodeURIComponent(modelId)}/metrics`);
    if (response.status === 404) {
      return null;
    }
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as Record<string, unknown>;
  }

  async graphDot(modelId: string): Promise<string> {
    const response = await this.fetchImpl(`${this.base}/models/${encodeURIComponent(modelId)}/graph.dot`);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return response.text();
  }

  async predict(
    modelId: string,
    request: PredictRequest,
    signal?: AbortSignal,
  ): Promise<PredictResponse> {
    const init: RequestInit = {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    };
    if (signal) {
      init.signal = signal;
    }
    const response = await this.fetchImpl(
      `${this.base}/models/${encodeURIComponent(modelId)}/predict`,
      init,
    );
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as PredictResponse;
  }
}
