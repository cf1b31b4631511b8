import { describe, expect, it } from "vitest";

import { PredictScheduler } from "../src/scheduler.js";
import type { PredictRequest, PredictResponse } from "../src/types.js";

function response(tag: string): PredictResponse {
  return {
    model_id: tag,
    dataset_digest: "d",
    ranking: [],
    cutoff: { k: 5, t: 0.3 },
    diagnostics: {},
  };
}

const request: PredictRequest = { evidence: [], k: 5, threshold: 0.3 };

describe("predict scheduler", () => {
  it("resolves a lone submission", async () => {
    const scheduler = new PredictScheduler(async () => response("only"));
    const result = await scheduler.submit(request);
    expect(result?.model_id).toBe("only");
  });

  it("a newer submission supersedes the older one", async () => {
    const resolvers: ((r: PredictResponse) => void)[] = [];
    const signals: AbortSignal[] = [];
    const scheduler = new PredictScheduler((_, signal) => {
      signals.push(signal);
      return new Promise((resolve) => resolvers.push(resolve));
    });
    const first = scheduler.submit(request);
    const second = scheduler.submit(request);
    expect(signals[0]?.aborted).toBe(true);
    expect(signals[1]?.aborted).toBe(false);
    resolvers[0]?.(response("stale"));
    resolvers[1]?.(response("fresh"));
    expect(await first).toBeNull();
    expect((await second)?.model_id).toBe("fresh");
  });

  it("propagates real errors from the current submission", async () => {
    const scheduler = new PredictScheduler(async () => {
      throw new Error("boom");
    });
    await expect(scheduler.submit(request)).rejects.toThrow("boom");
  });

  it("swallows abort errors from superseded submissions", async () => {
    const scheduler = new PredictScheduler(
      (_, signal) =>
        new Promise((resolve, reject) => {
          signal.addEventListener("abort", () => reject(new Error("aborted")));
          setTimeout(() => resolve(response("late")), 50);
        }),
    );
    const first = scheduler.submit(request);
    const second = scheduler.submit(request);
    expect(await first).toBeNull();
    expect((await second)?.model_id).toBe("late");
  });
});
