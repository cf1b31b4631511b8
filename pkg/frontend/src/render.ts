/** HTML string rendering for the form, the ranking, and the error banner.
 *
 * Rendering to strings keeps the view logic testable without a DOM; app.ts
 * mounts the strings and wires events by delegation.
 */

import type { FormControl, FormGroup } from "./form.js";
import type { RankingViewModel } from "./ranking.js";
import type { EvidenceFormState } from "./state.js";
import { selectionOf } from "./state.js";
import type { CurvePoint, RankingScore } from "./diagnostics.js";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const TAG_TITLES: Record<string, string> = {
  P: "Problems",
  C: "Causes",
  E: "Effects",
  CC: "Cause categories",
  EC: "Effect categories",
};

function controlHtml(control: FormControl, state: EvidenceFormState): string {
  if (control.kind === "tri-state") {
    const tri = selectionOf(state, control.variable);
    return (
      `<label class="tri tri-${tri}" data-variable="${escapeHtml(control.variable)}">` +
      `<button type="button" class="tri-toggle" data-variable="${escapeHtml(control.variable)}">` +
      `${tri === "present" ? "present" : tri === "absent" ? "absent" : "unknown"}</button>` +
      `<span>${escapeHtml(control.label)}</span></label>`
    );
  }
  const options = control.options
    .map((o) => {
      const selected = selectionOf(state, o.variable) === "present" ? " selected" : "";
      return `<option value="${escapeHtml(o.variable)}"${selected}>${escapeHtml(o.label)}</option>`;
    })
    .join("");
  return (
    `<label class="factor"><span>${escapeHtml(control.factor)}</span>` +
    `<select data-factor="${escapeHtml(control.factor)}">` +
    `<option value="">unknown</option>${options}</select></label>`
  );
}

export function renderForm(groups: FormGroup[], state: EvidenceFormState): string {
  const sections = groups.map((group) => {
    const title = TAG_TITLES[group.tag] ?? `Context: ${group.tag}`;
    const controls = group.controls.map((c) => controlHtml(c, state)).join("\n");
    return `<fieldset data-tag="${escapeHtml(group.tag)}"><legend>${escapeHtml(title)}</legend>\n${controls}\n</fieldset>`;
  });
  return sections.join("\n");
}

export function renderRanking(vm: RankingViewModel): string {
  const rows = vm.entries.map((entry, i) => {
    return (
      `<li class="rank-entry${entry.confirmed ? " confirmed" : ""}" data-name="${escapeHtml(entry.name)}">` +
      `<span class="rank-pos">${i + 1}</span>` +
      `<span class="rank-pct">${entry.percent}%</span>` +
      `<span class="rank-name">${escapeHtml(entry.name)}</span>` +
      `<button type="button" class="confirm-toggle" data-name="${escapeHtml(entry.name)}">` +
      `${entry.confirmed ? "confirmed" : "confirm"}</button></li>`
    );
  });
  const notice = vm.cutoffNotice
    ? `<p class="cutoff-notice">${escapeHtml(vm.cutoffNotice)}</p>`
    : "";
  return `<ol class="ranking">\n${rows.join("\n")}\n</ol>${notice}`;
}

export function renderErrorBanner(message: string): string {
  return (
    `<div class="error-banner" role="alert"><span>${escapeHtml(message)}</span>` +
    `<button type="button" class="retry">retry</button></div>`
  );
}

export function renderCurves(points: CurvePoint[]): string {
  const fmt = (v: number | null) => (v === null ? "n/a" : v.toFixed(3));
  const rows = points.map(
    (p) =>
      `<tr><td>${p.threshold.toFixed(1)}</td><td>${p.accuracy.toFixed(3)}</td>` +
      `<td>${fmt(p.recall)}</td><td>${fmt(p.precision)}</td></tr>`,
  );
  return (
    `<table class="curves"><thead><tr><th>t</th><th>accuracy</th><th>recall</th><th>precision</th></tr></thead>` +
    `<tbody>${rows.join("")}</tbody></table>`
  );
}

export function renderRankingScores(scores: RankingScore[]): string {
  const fmt = (v: number | null) => (v === null ? "n/a" : v.toFixed(3));
  const rows = scores.map(
    (s) => `<tr><td>${s.k}</td><td>${s.precision.toFixed(3)}</td><td>${fmt(s.recall)}</td></tr>`,
  );
  return (
    `<table class="ranking-scores"><thead><tr><th>k</th><th>ranking precision</th><th>ranking recall</th></tr></thead>` +
    `<tbody>${rows.join("")}</tbody></table>`
  );
}
