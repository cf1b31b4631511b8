/** Keeps at most one predict request in flight; newer submissions cancel older ones. */

import type { PredictRequest, PredictResponse } from "./types.js";

type Poster = (request: PredictRequest, signal: AbortSignal) => Promise<PredictResponse>;

export class PredictScheduler {
  private post: Poster;
  private controller: AbortController | null = null;
  private generation = 0;

  constructor(post: Poster) {
    this.post = post;
  }

  /** Resolves with the response, or with null when a newer submission superseded this one. */
  async submit(request: PredictRequest): Promise<PredictResponse | null> {
    if (this.controller) {
      this.controller.abort();
    }
    const controller = new AbortController();
    this.controller = controller;
    const generation = ++this.generation;
    try {
      const response = await this.post(request, controller.signal);
      return generation === this.generation ? response : null;
    } catch (error) {
      if (controller.signal.aborted && generation !== this.generation) {
        return null;
      }
      throw error;
    }
  }
}
