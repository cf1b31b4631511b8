/** Ranked prediction list as shown to the user.
 *
 * Entries keep the service's order, probabilities are displayed as whole
 * percentages, and nothing at or below the active threshold is ever
 * rendered. When the threshold suppressed entries (fewer than k shown while
 * the threshold is active), the view model carries an explanatory notice so
 * a short list is not misread as "nothing else could apply".
 */

import type { PredictResponse } from "./types.js";

export interface RankingEntry {
  name: string;
  probability: number;
  percent: number;
  confirmed: boolean;
}

export interface RankingViewModel {
  entries: RankingEntry[];
  cutoffNotice: string | null;
  k: number;
  threshold: number;
}

export function buildRankingViewModel(response: PredictResponse): RankingViewModel {
  const { k, t } = response.cutoff;
  const entries = response.ranking
    .filter((item) => item.probability > t)
    .map((item) => ({
      name: item.variable,
      probability: item.probability,
      percent: Math.round(item.probability * 100),
      confirmed: false,
    }));
  let cutoffNotice: string | null = null;
  if (t > 0 && entries.length < k) {
    const pct = Math.round(t * 100);
    cutoffNotice =
      entries.length === 0
        ? `No prediction exceeds the ${pct}% probability threshold.`
        : `List cut off at the ${pct}% probability threshold (${entries.length} of up to ${k} shown).`;
  }
  return { entries, cutoffNotice, k, threshold: t };
}

export function toggleConfirmed(vm: RankingViewModel, name: string): RankingViewModel {
  return {
    ...vm,
    entries: vm.entries.map((e) => (e.name === name ? { ...e, confirmed: !e.confirmed } : e)),
  };
}
