/**
 * Document shapes as the REST API serves them.
 *
 * These mirror the backend's wire format field for field; nothing here is
 * invented client-side. Optional keys are optional on the wire too.
 */

export type DeidStatus = "raw" | "masked" | "verified";

export interface Utterance {
  index: number;
  speaker_id: string;
  timestamp?: string;
  text: string;
}

export interface SessionDoc {
  id: string;
  title: string;
  deid_status: DeidStatus;
  participants: { speaker_id: string; role?: string }[];
  utterances: Utterance[];
  metadata: Record<string, string>;
}

export interface SessionSummary {
  id: string;
  title: string;
  deid_status: DeidStatus;
  utterance_count?: number;
}

// -- coding schemas ---------------------------------------------------------

export type FieldType = "string" | "boolean" | "enum" | "number" | "array";

export interface FieldDoc {
  name: string;
  type: FieldType;
  required?: boolean;
  values?: string[]; // enum only
  min?: number; // number only
  max?: number;
  element?: Omit<FieldDoc, "name" | "required">; // array only
}

export interface SchemaDoc {
  name: string;
  fields: FieldDoc[];
}

export interface PromptVersionDoc {
  version: number;
  instructions: string;
  schema: SchemaDoc;
  created_at: string;
  frozen: boolean;
  content_hash: string;
}

export interface PromptDoc {
  id: string;
  name: string;
  versions: PromptVersionDoc[];
}

// -- runs ---------------------------------------------------------------------

export type RunState =
  | "queued"
  | "running"
  | "completed"
  | "completed_with_errors"
  | "failed"
  | "cancelled";

export interface RunCounts {
  total_items: number;
  succeeded: number;
  failed_items: number;
}

export interface RunItemDoc {
  session_id: string;
  utterance_index: number;
  status: string;
  attempts: number;
  message?: string;
}

export interface RunDoc {
  id: string;
  state: RunState;
  prompt_id: string;
  prompt_version: number;
  model_id: string;
  session_ids: string[];
  counts: RunCounts;
  created_at: string;
  started_at: string | null;
  finished_at: string | null;
  error: string | null;
  token_usage: number;
  items: RunItemDoc[];
}

// -- annotations and the chat view -------------------------------------------

export type LabelDocument = Record<string, unknown>;

export interface AnnotationDoc {
  session_id: string;
  utterance_index: number;
  source: string; // "run:<id>" or "human:<coder>"
  document: LabelDocument;
  created_at: string;
}

export interface ChatUtterance extends Utterance {
  annotations: Record<string, LabelDocument>; // keyed by source
}

export interface ChatView {
  session_id: string;
  title: string;
  deid_status: DeidStatus;
  sources: string[];
  utterances: ChatUtterance[];
}

// -- de-identification ---------------------------------------------------------

export interface DeidHit {
  category: string;
  utterance_index: number;
  char_start: number;
  char_end: number;
}

export interface DeidReport {
  session_id: string;
  deid_status: DeidStatus;
  status: "clean" | "findings";
  residual_hits: DeidHit[];
  leaked_originals: DeidHit[];
  counts_by_category: Record<string, number>;
  masked_spans: DeidHit[];
}

// -- evaluation ----------------------------------------------------------------

export type Cell = number | null;

export interface PerCodeRow {
  code: string;
  tp: number;
  fp: number;
  fn: number;
  precision: number;
  recall: number;
  support: number;
}

export interface ConfusionDoc {
  codes: string[];
  counts: number[][];
}

export interface EvaluationReport {
  runset_id: string;
  name: string;
  target_field: string;
  members: string[];
  reference: string | null;
  generated_at: string;
  labeled_items: Record<string, number>;
  agreement: Cell[][];
  kappa: Cell[][];
  coverage: number[][];
  per_code?: Record<string, PerCodeRow[]>;
  confusion?: Record<string, ConfusionDoc>;
  macro?: Record<string, { precision: number; recall: number }>;
}

export interface RunsetDoc {
  id: string;
  name: string;
  members: string[];
  target_field: string;
  reference: string | null;
}

// -- errors ----------------------------------------------------------------------

export interface ApiErrorBody {
  error: {
    http_status: number;
    code: string;
    message: string;
    details: Record<string, unknown>;
  };
}
