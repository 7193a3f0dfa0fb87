/**
 * Client-side mirror of the server's document validation.
 *
 * The server stays authoritative; this exists so the labeling panel can
 * refuse bad input before it ever leaves the browser. Error kinds, paths
 * and "expected" texts are kept identical to the backend's validator, and
 * tests/fixtures/validation_cases.json (generated from the backend) pins
 * the two against each other.
 */

import type { FieldDoc, LabelDocument, SchemaDoc } from "./types.js";

export interface Violation {
  path: string; // slash-separated; "" for document-level problems
  kind: string;
  expected: string;
  found: string;
  message: string;
}

type Spec = Omit<FieldDoc, "name" | "required">;

function renderValue(v: unknown): string {
  if (typeof v === "string") return v;
  return JSON.stringify(v) ?? "undefined";
}

function renderNumber(x: number): string {
  return String(x); // integers already print without a trailing .0
}

function violation(path: string, kind: string, expected: string, found: string): Violation {
  const where = path === "" ? "document" : path;
  return { path, kind, expected, found, message: `${where}: expected ${expected}, found ${found}` };
}

export function describeSpec(spec: Spec): string {
  switch (spec.type) {
    case "string":
      return "a string";
    case "boolean":
      return "a boolean (true or false)";
    case "enum":
      return "one of " + (spec.values ?? []).join("|");
    case "number": {
      const parts = ["a number"];
      if (spec.min !== undefined) parts.push(`≥ ${renderNumber(spec.min)}`);
      if (spec.max !== undefined) parts.push(`≤ ${renderNumber(spec.max)}`);
      return parts.join(" ");
    }
    case "array":
      return `an array where each element is ${describeSpec(spec.element ?? { type: "string" })}`;
  }
}

function checkValue(value: unknown, spec: Spec, path: string): Violation[] {
  switch (spec.type) {
    case "string":
      return typeof value === "string" ? [] : [violation(path, "type_mismatch", "a string", renderValue(value))];

    case "boolean":
      return typeof value === "boolean"
        ? []
        : [violation(path, "type_mismatch", "a boolean (true or false)", renderValue(value))];

    case "enum": {
      const values = spec.values ?? [];
      if (typeof value !== "string" || !values.includes(value)) {
        return [violation(path, "enum_violation", "one of " + values.join("|"), renderValue(value))];
      }
      return [];
    }

    case "number": {
      if (typeof value !== "number" || Number.isNaN(value)) {
        return [violation(path, "type_mismatch", "a number", renderValue(value))];
      }
      const out: Violation[] = [];
      if (spec.min !== undefined && value < spec.min) {
        out.push(violation(path, "range_violation", `≥ ${renderNumber(spec.min)}`, renderValue(value)));
      }
      if (spec.max !== undefined && value > spec.max) {
        out.push(violation(path, "range_violation", `≤ ${renderNumber(spec.max)}`, renderValue(value)));
      }
      return out;
    }

    case "array": {
      if (!Array.isArray(value)) {
        return [violation(path, "type_mismatch", "an array", renderValue(value))];
      }
      const element = spec.element ?? { type: "string" as const };
      const out: Violation[] = [];
      value.forEach((el, i) => out.push(...checkValue(el, element, `${path}/${i}`)));
      return out;
    }
  }
}

export function validateDocument(value: unknown, schema: SchemaDoc): Violation[] {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    return [violation("", "not_an_object", "a JSON object", renderValue(value))];
  }
  const doc = value as LabelDocument;
  const out: Violation[] = [];

  for (const field of schema.fields) {
    if (!(field.name in doc)) {
      if (field.required !== false) {
        out.push(violation(`/${field.name}`, "missing_required", describeSpec(field), "nothing"));
      }
      continue;
    }
    out.push(...checkValue(doc[field.name], field, `/${field.name}`));
  }

  const known = new Set(schema.fields.map((f) => f.name));
  for (const key of Object.keys(doc)) {
    if (!known.has(key)) {
      out.push(violation(`/${key}`, "unknown_field", "no such field", renderValue(doc[key])));
    }
  }
  return out;
}

// -- authoring checks for the schema field builder ---------------------------
//
// The server accepts any parseable schema document; shape mistakes a
// researcher can make in the builder are caught here with a field-level
// path so the editor can point at the exact input.

export interface SchemaProblem {
  path: string;
  message: string;
}

const KNOWN_TYPES = new Set(["string", "boolean", "enum", "number", "array"]);

function specProblems(spec: Spec, path: string): SchemaProblem[] {
  const out: SchemaProblem[] = [];
  if (!KNOWN_TYPES.has(spec.type)) {
    out.push({ path: `${path}/type`, message: `unknown field type "${spec.type}"` });
    return out;
  }
  if (spec.type === "enum") {
    if (!spec.values || spec.values.length === 0) {
      out.push({ path: `${path}/values`, message: "an enum needs at least one value" });
    } else if (new Set(spec.values).size !== spec.values.length) {
      out.push({ path: `${path}/values`, message: "enum values must be distinct" });
    } else if (spec.values.some((v) => v.trim() === "")) {
      out.push({ path: `${path}/values`, message: "enum values must be non-empty" });
    }
  }
  if (spec.type === "number" && spec.min !== undefined && spec.max !== undefined && spec.min > spec.max) {
    out.push({ path: `${path}/min`, message: "min must not exceed max" });
  }
  if (spec.type === "array") {
    if (!spec.element) {
      out.push({ path: `${path}/element`, message: "an array needs an element type" });
    } else {
      out.push(...specProblems(spec.element, `${path}/element`));
    }
  }
  return out;
}

export function schemaProblems(schema: SchemaDoc): SchemaProblem[] {
  const out: SchemaProblem[] = [];
  if (schema.name.trim() === "") {
    out.push({ path: "/name", message: "the schema needs a name" });
  }
  if (schema.fields.length === 0) {
    out.push({ path: "/fields", message: "at least one field is required" });
  }
  const seen = new Set<string>();
  schema.fields.forEach((field, i) => {
    const path = `/fields/${i}`;
    if (field.name.trim() === "") {
      out.push({ path: `${path}/name`, message: "the field needs a name" });
    } else if (seen.has(field.name)) {
      out.push({ path: `${path}/name`, message: `duplicate field name "${field.name}"` });
    }
    seen.add(field.name);
    out.push(...specProblems(field, path));
  });
  return out;
}

// -- input coercion for the labeling panel -----------------------------------

/** Turn raw <input> text into the typed value a field expects. Unparseable
 * input is returned as the raw string so validation reports it naturally. */
export function coerceInput(raw: string, field: FieldDoc): unknown {
  switch (field.type) {
    case "string":
    case "enum":
      return raw;
    case "boolean":
      if (raw === "true") return true;
      if (raw === "false") return false;
      return raw;
    case "number": {
      const trimmed = raw.trim();
      if (trimmed === "") return raw;
      const n = Number(trimmed);
      return Number.isNaN(n) ? raw : n;
    }
    case "array": {
      try {
        return JSON.parse(raw);
      } catch {
        return raw;
      }
    }
  }
}
