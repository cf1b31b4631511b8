/** Wire types mirroring the prediction service's JSON bodies. */

export interface VariableInfo {
  name: string;
  tag: string;
  kind: string;
  answer?: string;
  category?: string;
  factor?: string;
  level?: string;
  bounds?: [number, number];
}

export interface VariableGroups {
  model_id: string;
  dataset_digest: string;
  output_tag: string;
  groups: { tag: string; variables: VariableInfo[] }[];
}

export interface ModelInfo {
  model_id: string;
  architecture: string;
  use_case: string;
  output_tag: string;
  dataset_digest: string;
  created_at: string;
  baseline: boolean;
  metrics_summary: Record<string, unknown> | null;
}

export interface RankingItem {
  variable: string;
  probability: number;
}

export interface PredictResponse {
  model_id: string;
  dataset_digest: string;
  ranking: RankingItem[];
  cutoff: { k: number; t: number };
  diagnostics: Record<string, unknown>;
}

export interface EvidenceItem {
  variable: string;
  value: boolean;
}

export interface PredictRequest {
  evidence: EvidenceItem[];
  k: number;
  threshold: number;
  seed?: number;
}

/** Tri-state evidence selection: unknown means "do not clamp". */
export type TriState = "present" | "absent" | "unknown";
