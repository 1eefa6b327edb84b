// Payload shapes of the detection-service API. The client renders these
// verbatim; it never derives selections or thresholds on its own.

export interface RunSummary {
  run_id: string;
  source_id: string;
  kind: 'video' | 'text';
  created_at: string;
  threshold: number | null;
  unit_count: number;
}

export interface RunListResponse {
  schema_version: number;
  runs: RunSummary[];
}

export interface RunDetail extends RunSummary {
  config: Record<string, unknown>;
  artifacts: Record<string, string>;
}

export interface TracePoint {
  i: number;
  t: number;
  sim: number;
}

export interface TraceHeader {
  source_id: string;
  query: string;
  correction: number;
  threshold: number;
  n: number;
  multi_word_query: boolean;
}

export interface TraceResponse {
  schema_version: number;
  header: TraceHeader;
  points: TracePoint[];
}

export interface PreviewResponse {
  schema_version: number;
  run_id: string;
  correction: number;
  threshold: number;
  indices: number[];
}

export interface VerdictPayload {
  unit: number;
  predicted_label: boolean;
  human_label: boolean;
  reviewer: string;
}

export interface StoredVerdict extends VerdictPayload {
  run_id: string;
  decided_at: string;
}

export interface VerdictsResponse {
  schema_version: number;
  latest: Record<string, StoredVerdict>;
  history_length: number;
}

export interface UnitRef {
  run_id: string;
  unit: number;
}

export interface FeedbackResponse {
  schema_version: number;
  generated_at: string;
  false_positives: UnitRef[];
  false_negatives: UnitRef[];
}

export interface CorrectionResponse {
  schema_version: number;
  value: number;
  version: number;
}
