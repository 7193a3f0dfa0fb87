"""Regenerate the dashboard's cross-language test fixtures.

Writes frontend/tests/fixtures/*.json: evaluation reports produced by the
real engine and document-validation cases with the backend's verdicts. The
dashboard suite replays these so client rendering and client validation
stay pinned to server behavior.

    python3 scripts/export_dashboard_fixtures.py
"""

import json
import sys
from pathlib import Path

from sandpiper.config import AppConfig
from sandpiper.schema import schema_from_doc, validate_object
from sandpiper.service import Service

FIXTURES = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"

SCHEMA = {
    "name": "codes",
    "fields": [
        {"name": "code", "type": "enum",
         "values": ["question", "explanation", "other"]},
    ],
}

Q, E, O = "question", "explanation", "other"

S1 = "a: one\nb: two\na: three\nb: four\n"
S2 = "c: five\nd: six\nc: seven\nd: eight\n"

REF = [Q, Q, E, E, O, O, Q, E]
RUN_A = [Q, E, E, E, O, Q, Q, E]
RUN_B = [Q, Q, E, O, O, O, Q, Q]


def big_report(service: Service) -> dict:
    """Three members over eight items, with a human reference."""
    s1 = service.ingest(S1.encode(), "plaintext", "fixture one")["id"]
    s2 = service.ingest(S2.encode(), "plaintext", "fixture two")["id"]
    prompt = service.create_prompt("codes", "Code each utterance.", SCHEMA)

    members = []
    for labels in (RUN_A, RUN_B):
        script = [json.dumps({"code": label}) for label in labels]
        run = service.create_run(prompt["id"], 1, "mock", [s1, s2],
                                 mock_script=script)
        service.execute_run_sync(run["id"])
        members.append(f"run:{run['id']}")
    for pos, label in enumerate(REF):
        sid = s1 if pos < 4 else s2
        service.add_human_annotation(sid, pos % 4, "ref", {"code": label},
                                     prompt["id"], 1)
    members.append("human:ref")

    runset = service.create_runset("fixture benchmark", members, "code",
                                   reference="human:ref")
    return service.evaluate(runset["id"])


def small_report(service: Service) -> dict:
    """The worked 4-item kappa example plus one non-overlapping member."""
    s1 = service.ingest(S1.encode(), "plaintext", "kappa fixture")["id"]
    s2 = service.ingest(S2.encode(), "plaintext", "elsewhere")["id"]
    prompt = service.create_prompt("codes", "Code each utterance.", SCHEMA)

    for pos, label in enumerate([Q, Q, E, E]):
        service.add_human_annotation(s1, pos, "a", {"code": label}, prompt["id"], 1)
    for pos, label in enumerate([Q, E, E, E]):
        service.add_human_annotation(s1, pos, "b", {"code": label}, prompt["id"], 1)
    # labels only on the other session: zero coverage against a and b
    service.add_human_annotation(s2, 0, "c", {"code": Q}, prompt["id"], 1)

    runset = service.create_runset("kappa fixture",
                                   ["human:a", "human:b", "human:c"], "code")
    return service.evaluate(runset["id"])


VALIDATION_SCHEMA = {
    "name": "fixture",
    "fields": [
        {"name": "code", "type": "enum",
         "values": ["question", "explanation", "other"]},
        {"name": "confidence", "type": "number", "min": 0, "max": 1,
         "required": False},
        {"name": "tags", "type": "array", "element": {"type": "string"},
         "required": False},
        {"name": "verified", "type": "boolean", "required": False},
        {"name": "note", "type": "string", "required": False},
    ],
}

VALIDATION_DOCS = [
    {"code": "question"},
    {"code": "question", "confidence": 0.5, "tags": ["x"], "verified": True,
     "note": "fine"},
    {"code": "musing"},
    {"code": 7},
    {"code": "question", "confidence": 1.5},
    {"code": "question", "confidence": -0.25},
    {"code": "question", "confidence": "high"},
    {"code": "question", "tags": "not-a-list"},
    {"code": "question", "tags": ["ok", 3, True]},
    {"code": "question", "verified": "yes"},
    {"code": "question", "note": 5},
    {"code": "question", "extra": True},
    {},
    {"confidence": 0.5},
    ["not", "an", "object"],
    "plain text",
    None,
]


def validation_cases() -> dict:
    schema = schema_from_doc(VALIDATION_SCHEMA)
    cases = []
    for value in VALIDATION_DOCS:
        errors = [e.to_doc() for e in validate_object(value, schema)]
        cases.append({"value": value, "errors": errors})
    return {"schema": VALIDATION_SCHEMA, "cases": cases}


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    service = Service(AppConfig(db_path=":memory:"))
    out = {
        "evaluation_report.json": big_report(service),
        "evaluation_small.json": small_report(service),
        "validation_cases.json": validation_cases(),
    }
    for name, payload in out.items():
        path = FIXTURES / name
        path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
                        encoding="utf-8")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
