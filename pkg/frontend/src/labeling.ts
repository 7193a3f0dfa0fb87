/**
 * Labeling panel: hand-entering one label document for one utterance.
 *
 * The panel validates against the prompt's schema on every edit and will
 * not POST while violations exist; the API is only reached with input the
 * server is going to accept. A panel with unsaved edits reports itself
 * dirty so background refreshes leave it alone.
 */

import type { ApiClient } from "./api.js";
import { coerceInput, validateDocument, type Violation } from "./schema.js";
import type { AnnotationDoc, FieldDoc, LabelDocument, SchemaDoc } from "./types.js";

export interface LabelTarget {
  sessionId: string;
  utteranceIndex: number;
  coderId: string;
  promptId: string;
  promptVersion: number;
}

export type SubmitResult =
  | { ok: true; annotation: AnnotationDoc }
  | { ok: false; problems: Violation[] };

export class LabelingPanel {
  private readonly api: ApiClient;
  private readonly schema: SchemaDoc;
  private readonly target: LabelTarget;
  private values: LabelDocument;
  private edited = false;

  constructor(api: ApiClient, schema: SchemaDoc, target: LabelTarget, initial?: LabelDocument) {
    this.api = api;
    this.schema = schema;
    this.target = target;
    this.values = { ...(initial ?? {}) };
  }

  get dirty(): boolean {
    return this.edited;
  }

  get document(): LabelDocument {
    return { ...this.values };
  }

  field(name: string): FieldDoc | undefined {
    return this.schema.fields.find((f) => f.name === name);
  }

  /** Record raw input for one field, coerced to the field's type. */
  edit(name: string, raw: string): void {
    const field = this.field(name);
    this.values[name] = field ? coerceInput(raw, field) : raw;
    this.edited = true;
  }

  clear(name: string): void {
    delete this.values[name];
    this.edited = true;
  }

  problems(): Violation[] {
    return validateDocument(this.values, this.schema);
  }

  problemsFor(name: string): Violation[] {
    const prefix = `/${name}`;
    return this.problems().filter((v) => v.path === prefix || v.path.startsWith(`${prefix}/`));
  }

  /** POST the document, unless validation says the server would refuse it. */
  async submit(): Promise<SubmitResult> {
    const problems = this.problems();
    if (problems.length > 0) {
      return { ok: false, problems };
    }
    const annotation = await this.api.postAnnotation({
      session_id: this.target.sessionId,
      utterance_index: this.target.utteranceIndex,
      human_coder_id: this.target.coderId,
      document: this.document,
      prompt_id: this.target.promptId,
      prompt_version: this.target.promptVersion,
    });
    this.edited = false;
    return { ok: true, annotation };
  }
}

/** Background polls must not clobber a panel the researcher is typing in. */
export function safeToRefresh(panel: LabelingPanel | null): boolean {
  return panel === null || !panel.dirty;
}
