"""Validation of annotation documents against a CodingSchema.

The validator is closed-world: unknown fields are errors. It reports every
violation it finds, not just the first, because the error list doubles as
the feedback message sent back to a model that produced a malformed reply.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .errors import InvalidInput
from .model import CodingSchema, FieldSpec, ValueSpec

ERROR_KINDS = (
    "missing_required",
    "unknown_field",
    "type_mismatch",
    "enum_violation",
    "range_violation",
    "not_an_object",
    "parse_failure",
)


@dataclass(frozen=True)
class ValidationError:
    """One violation: where it is, what was expected, what was found."""

    path: str  # slash-separated, e.g. "/confidence"; "" for document-level kinds
    kind: str
    expected: str
    found: str
    message: str

    def to_doc(self) -> dict:
        return {
            "path": self.path,
            "kind": self.kind,
            "expected": self.expected,
            "found": self.found,
            "message": self.message,
        }


def _error(path: str, kind: str, expected: str, found: str) -> ValidationError:
    where = path if path else "document"
    return ValidationError(
        path=path,
        kind=kind,
        expected=expected,
        found=found,
        message=f"{where}: expected {expected}, found {found}",
    )


def _render_number(x: float) -> str:
    if isinstance(x, bool):  # defensive; bools never reach here via specs
        return json.dumps(x)
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return str(x)


def _render_value(v) -> str:
    if isinstance(v, str):
        return v
    return json.dumps(v, ensure_ascii=False)


def _snippet(text: str, limit: int = 60) -> str:
    text = text.strip()
    return text if len(text) <= limit else text[: limit - 1] + "…"


def describe_spec(spec: ValueSpec) -> str:
    """One-line human/LLM-readable description of a value constraint."""
    if spec.type == "string":
        return "a string"
    if spec.type == "boolean":
        return "a boolean (true or false)"
    if spec.type == "enum":
        return "one of " + "|".join(spec.values)
    if spec.type == "number":
        parts = ["a number"]
        if spec.minimum is not None:
            parts.append(f"≥ {_render_number(spec.minimum)}")
        if spec.maximum is not None:
            parts.append(f"≤ {_render_number(spec.maximum)}")
        return " ".join(parts)
    if spec.type == "array":
        return f"an array where each element is {describe_spec(spec.element)}"
    raise InvalidInput(f"unknown field type {spec.type!r}")


def _check_value(value, spec: ValueSpec, path: str) -> list[ValidationError]:
    if spec.type == "string":
        if not isinstance(value, str):
            return [_error(path, "type_mismatch", "a string", _render_value(value))]
        return []

    if spec.type == "boolean":
        if not isinstance(value, bool):
            return [_error(path, "type_mismatch", "a boolean (true or false)", _render_value(value))]
        return []

    if spec.type == "enum":
        if not isinstance(value, str) or value not in spec.values:
            return [_error(path, "enum_violation", "one of " + "|".join(spec.values), _render_value(value))]
        return []

    if spec.type == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return [_error(path, "type_mismatch", "a number", _render_value(value))]
        errors = []
        if spec.minimum is not None and value < spec.minimum:
            errors.append(_error(path, "range_violation", f"≥ {_render_number(spec.minimum)}", _render_value(value)))
        if spec.maximum is not None and value > spec.maximum:
            errors.append(_error(path, "range_violation", f"≤ {_render_number(spec.maximum)}", _render_value(value)))
        return errors

    if spec.type == "array":
        if not isinstance(value, list):
            return [_error(path, "type_mismatch", "an array", _render_value(value))]
        errors = []
        for i, element in enumerate(value):
            errors.extend(_check_value(element, spec.element, f"{path}/{i}"))
        return errors

    raise InvalidInput(f"unknown field type {spec.type!r}")


def validate_object(value, schema: CodingSchema) -> list[ValidationError]:
    """Validate an already-parsed value against the schema."""
    if not isinstance(value, dict):
        return [_error("", "not_an_object", "a JSON object", _render_value(value))]

    errors: list[ValidationError] = []
    for fs in schema.fields:
        if fs.name not in value:
            if fs.required:
                errors.append(_error(f"/{fs.name}", "missing_required", describe_spec(fs.spec), "nothing"))
            continue
        errors.extend(_check_value(value[fs.name], fs.spec, f"/{fs.name}"))

    known = {f.name for f in schema.fields}
    for key in value:
        if key not in known:
            errors.append(_error(f"/{key}", "unknown_field", "no such field", _render_value(value[key])))
    return errors


def validate(document_text: str, schema: CodingSchema) -> list[ValidationError]:
    """Validate raw reply text against the schema; [] means conforming.

    Total over arbitrary text: parse failures come back as errors, never
    exceptions.
    """
    try:
        value = json.loads(document_text)
    except (json.JSONDecodeError, RecursionError):
        return [_error("", "parse_failure", "a parseable JSON document", _snippet(document_text))]
    return validate_object(value, schema)


def extract_candidate(raw_reply: str) -> str:
    """Pull the first balanced top-level ``{...}`` block out of a reply.

    Models tend to wrap structured output in prose or code fences; this
    strips all of that. Brace matching is string-aware so braces inside JSON
    strings do not confuse it. Returns the reply unchanged when no balanced
    block exists.
    """
    start = raw_reply.find("{")
    while start != -1:
        end = _match_balanced(raw_reply, start)
        if end is not None:
            return raw_reply[start : end + 1]
        start = raw_reply.find("{", start + 1)
    return raw_reply


def _match_balanced(text: str, start: int) -> int | None:
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return i
    return None


def render_schema(schema: CodingSchema) -> str:
    """Deterministic rendering of the schema for prompts and feedback."""
    lines = [f'A JSON object for schema "{schema.name}" with exactly these fields:']
    for fs in schema.fields:
        requirement = "required" if fs.required else "optional"
        lines.append(f'- "{fs.name}" ({requirement}): {describe_spec(fs.spec)}')
    return "\n".join(lines)


def render_feedback(errors: list[ValidationError], schema: CodingSchema) -> str:
    """Build the re-prompt message for a malformed reply.

    Lists every violation in path order, restates the schema, and instructs
    the model to answer with only a conforming document.
    """
    if not errors:
        raise InvalidInput("render_feedback requires a non-empty error list")
    lines = ["Your reply did not conform to the required format. Problems found:"]
    for e in sorted(errors, key=lambda e: (e.path, e.kind, e.expected, e.found)):
        where = e.path if e.path else "(document)"
        lines.append(f"- {where} [{e.kind}]: expected {e.expected}, found {e.found}")
    lines.append("")
    lines.append("The required format is:")
    lines.append(render_schema(schema))
    lines.append("")
    lines.append("Reply with only one conforming JSON document and nothing else.")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# authoring format & digests
# --------------------------------------------------------------------------


def _spec_to_doc(spec: ValueSpec) -> dict:
    doc: dict = {"type": spec.type}
    if spec.values is not None:
        doc["values"] = list(spec.values)
    if spec.minimum is not None:
        doc["min"] = spec.minimum
    if spec.maximum is not None:
        doc["max"] = spec.maximum
    if spec.element is not None:
        doc["element"] = _spec_to_doc(spec.element)
    return doc


def _spec_from_doc(doc, where: str) -> ValueSpec:
    if not isinstance(doc, dict):
        raise InvalidInput(f"{where}: expected an object")
    if "type" not in doc:
        raise InvalidInput(f"{where}/type: missing")
    values = doc.get("values")
    element = doc.get("element")
    return ValueSpec(
        type=doc["type"],
        values=tuple(values) if values is not None else None,
        minimum=doc.get("min"),
        maximum=doc.get("max"),
        element=_spec_from_doc(element, f"{where}/element") if element is not None else None,
    )


def schema_to_doc(schema: CodingSchema) -> dict:
    fields = []
    for fs in schema.fields:
        doc = {"name": fs.name}
        doc.update(_spec_to_doc(fs.spec))
        doc["required"] = fs.required
        fields.append(doc)
    return {"name": schema.name, "fields": fields}


def schema_from_doc(doc) -> CodingSchema:
    """Parse the authoring format; raises InvalidInput naming the bad path."""
    if not isinstance(doc, dict):
        raise InvalidInput("schema document must be an object")
    if not isinstance(doc.get("name"), str) or not doc["name"]:
        raise InvalidInput("/name: expected a non-empty string")
    raw_fields = doc.get("fields")
    if not isinstance(raw_fields, list) or not raw_fields:
        raise InvalidInput("/fields: expected a non-empty array")
    fields = []
    for i, fdoc in enumerate(raw_fields):
        where = f"/fields/{i}"
        if not isinstance(fdoc, dict):
            raise InvalidInput(f"{where}: expected an object")
        name = fdoc.get("name")
        if not isinstance(name, str) or not name:
            raise InvalidInput(f"{where}/name: expected a non-empty string")
        spec = _spec_from_doc({k: v for k, v in fdoc.items() if k not in ("name", "required")}, where)
        fields.append(FieldSpec(name=name, spec=spec, required=bool(fdoc.get("required", True))))
    return CodingSchema(name=doc["name"], fields=tuple(fields))


def canonical_json(value) -> str:
    """Stable serialization used for digests: sorted keys, no whitespace."""
    return json.dumps(value, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def content_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def version_content_hash(instructions: str, schema: CodingSchema) -> str:
    """Stable content hash of a prompt version (instructions + schema)."""
    return content_digest(canonical_json({"instructions": instructions, "schema": schema_to_doc(schema)}))
