/** Evidence form structure derived from a model's variable groups.
 *
 * Output-tag variables are never offered as evidence. Problem/effect/answer
 * indicators and binary context factors become tri-state toggles; each
 * categorical, ordinal, or interval context factor collapses into a single
 * select whose options are its level indicators (choosing one level clamps
 * that indicator present and its siblings absent, "unknown" releases all of
 * them).
 */

import type { EvidenceFormState } from "./state.js";
import { setSelection } from "./state.js";
import type { VariableGroups, VariableInfo } from "./types.js";

export interface TriStateControl {
  kind: "tri-state";
  variable: string;
  label: string;
}

export interface FactorSelectOption {
  variable: string;
  label: string;
}

export interface FactorSelectControl {
  kind: "factor-select";
  factor: string;
  ordered: boolean;
  options: FactorSelectOption[];
}

export type FormControl = TriStateControl | FactorSelectControl;

export interface FormGroup {
  tag: string;
  controls: FormControl[];
}

function labelOf(v: VariableInfo): string {
  if (v.answer) return v.answer;
  if (v.category) return v.category;
  if (v.level) return v.level;
  const colon = v.name.indexOf(":");
  return colon >= 0 ? v.name.slice(colon + 1) : v.name;
}

function levelLabel(v: VariableInfo): string {
  if (v.level) return v.level;
  if (v.bounds) return `${v.bounds[0]} to ${v.bounds[1]}`;
  const eq = v.name.indexOf("=");
  return eq >= 0 ? v.name.slice(eq + 1) : v.name;
}

export function buildFormGroups(groups: VariableGroups): FormGroup[] {
  const out: FormGroup[] = [];
  for (const group of groups.groups) {
    if (group.tag === groups.output_tag) {
      continue;
    }
    const controls: FormControl[] = [];
    const factorVars = new Map<string, VariableInfo[]>();
    for (const v of group.variables) {
      if (
        v.kind === "context-categorical-level" ||
        v.kind === "context-ordinal-level" ||
        v.kind === "context-interval"
      ) {
        const list = factorVars.get(v.factor ?? v.name) ?? [];
        list.push(v);
        factorVars.set(v.factor ?? v.name, list);
      } else {
        controls.push({ kind: "tri-state", variable: v.name, label: labelOf(v) });
      }
    }
    for (const [factor, vars] of factorVars) {
      controls.push({
        kind: "factor-select",
        factor,
        ordered: vars.some((v) => v.kind !== "context-categorical-level"),
        options: vars.map((v) => ({ variable: v.name, label: levelLabel(v) })),
      });
    }
    out.push({ tag: group.tag, controls });
  }
  return out;
}

/** Clamp one level of a factor present and its siblings absent; null releases the factor. */
export function applyFactorSelection(
  state: EvidenceFormState,
  control: FactorSelectControl,
  chosenVariable: string | null,
): EvidenceFormState {
  let next = state;
  for (const option of control.options) {
    if (chosenVariable === null) {
      next = setSelection(next, option.variable, "unknown");
    } else {
      next = setSelection(next, option.variable, option.variable === chosenVariable ? "present" : "absent");
    }
  }
  return next;
}

export function controlCount(groups: FormGroup[]): number {
  return groups.reduce((acc, g) => acc + g.controls.length, 0);
}
