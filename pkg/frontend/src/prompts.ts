/**
 * Prompt editor model: read-only version history plus one draft.
 *
 * Saved versions are immutable; "editing" one copies it into a draft and
 * saving the draft posts the next version. Versions frozen by a run refuse
 * even that entry point with an explanation, steering the researcher to
 * branch from the latest instead.
 */

import type { ApiClient } from "./api.js";
import { schemaProblems, type SchemaProblem } from "./schema.js";
import type { FieldDoc, PromptDoc, PromptVersionDoc, SchemaDoc } from "./types.js";

export interface Draft {
  basedOn: number;
  instructions: string;
  schema: SchemaDoc;
}

export type EditAttempt = { ok: true; draft: Draft } | { ok: false; reason: string };

export type SaveResult =
  | { ok: true; prompt: PromptDoc }
  | { ok: false; problems: SchemaProblem[] };

function cloneSchema(schema: SchemaDoc): SchemaDoc {
  return JSON.parse(JSON.stringify(schema)) as SchemaDoc;
}

export class PromptEditor {
  private readonly api: ApiClient;
  prompt: PromptDoc | null = null;
  draft: Draft | null = null;

  constructor(api: ApiClient) {
    this.api = api;
  }

  async load(promptId: string): Promise<void> {
    this.prompt = await this.api.getPrompt(promptId);
    this.draft = null;
  }

  get versions(): PromptVersionDoc[] {
    return this.prompt?.versions ?? [];
  }

  version(n: number): PromptVersionDoc | undefined {
    return this.versions.find((v) => v.version === n);
  }

  /** Open a version for editing; the result is a draft for version n+1. */
  editVersion(n: number): EditAttempt {
    const base = this.version(n);
    if (!base) return { ok: false, reason: `no version ${n}` };
    if (base.frozen) {
      return {
        ok: false,
        reason:
          `version ${n} is frozen because runs reference it; ` +
          `start a new version from the latest instead`,
      };
    }
    this.draft = {
      basedOn: n,
      instructions: base.instructions,
      schema: cloneSchema(base.schema),
    };
    return { ok: true, draft: this.draft };
  }

  /** Same as editVersion but for frozen prompts: branches without editing. */
  branchFromLatest(): Draft {
    const latest = this.versions[this.versions.length - 1];
    this.draft = latest
      ? { basedOn: latest.version, instructions: latest.instructions, schema: cloneSchema(latest.schema) }
      : { basedOn: 0, instructions: "", schema: { name: "", fields: [] } };
    return this.draft;
  }

  setInstructions(text: string): void {
    if (this.draft) this.draft.instructions = text;
  }

  setSchemaName(name: string): void {
    if (this.draft) this.draft.schema.name = name;
  }

  addField(field: FieldDoc): void {
    if (this.draft) this.draft.schema.fields.push(field);
  }

  updateField(index: number, field: FieldDoc): void {
    if (this.draft && index >= 0 && index < this.draft.schema.fields.length) {
      this.draft.schema.fields[index] = field;
    }
  }

  removeField(index: number): void {
    if (this.draft) this.draft.schema.fields.splice(index, 1);
  }

  /** Field-level problems that would block a save, e.g. an empty enum. */
  problems(): SchemaProblem[] {
    if (!this.draft) return [];
    const out = schemaProblems(this.draft.schema);
    if (this.draft.instructions.trim() === "") {
      out.push({ path: "/instructions", message: "instructions must not be empty" });
    }
    return out;
  }

  async save(): Promise<SaveResult> {
    if (!this.prompt || !this.draft) {
      return { ok: false, problems: [{ path: "", message: "nothing to save" }] };
    }
    const problems = this.problems();
    if (problems.length > 0) {
      return { ok: false, problems };
    }
    this.prompt = await this.api.addPromptVersion(
      this.prompt.id,
      this.draft.instructions,
      this.draft.schema,
    );
    this.draft = null;
    return { ok: true, prompt: this.prompt };
  }
}
