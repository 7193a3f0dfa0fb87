"""Converters between domain values and stored JSON documents.

Run documents carry operational extras (timestamps, per-item outcomes,
token usage) beyond the frozen Run value; those keys live only here and
in the orchestrator, which owns run-state updates.
"""

from __future__ import annotations

from .errors import InvalidInput
from .model import (
    Annotation,
    Prompt,
    PromptVersion,
    Run,
    RunCounts,
    RunParams,
    RunSet,
)
from .schema import schema_from_doc, schema_to_doc


def prompt_to_doc(p: Prompt) -> dict:
    return {
        "id": p.id,
        "name": p.name,
        "versions": [
            {
                "version": v.version,
                "instructions": v.instructions,
                "schema": schema_to_doc(v.schema),
                "created_at": v.created_at,
                "frozen": v.frozen,
                "content_hash": v.content_hash,
            }
            for v in p.versions
        ],
    }


def prompt_from_doc(doc: dict) -> Prompt:
    try:
        versions = tuple(
            PromptVersion(
                version=v["version"],
                instructions=v["instructions"],
                schema=schema_from_doc(v["schema"]),
                created_at=v["created_at"],
                frozen=v.get("frozen", False),
                content_hash=v.get("content_hash", ""),
            )
            for v in doc["versions"]
        )
        return Prompt(id=doc["id"], name=doc["name"], versions=versions)
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed prompt document: {exc}") from exc


def run_to_doc(r: Run, *, created_at: str) -> dict:
    return {
        "id": r.id,
        "prompt_id": r.prompt_id,
        "prompt_version": r.prompt_version,
        "model_id": r.model_id,
        "session_ids": list(r.session_ids),
        "granularity": r.granularity,
        "params": {
            "temperature": r.params.temperature,
            "max_retries": r.params.max_retries,
            "context_window": r.params.context_window,
            "concurrency": r.params.concurrency,
        },
        "state": r.state,
        "counts": {
            "total_items": r.counts.total_items,
            "succeeded": r.counts.succeeded,
            "failed_items": r.counts.failed_items,
        },
        "created_at": created_at,
        "started_at": None,
        "finished_at": None,
        "error": None,
        "token_usage": 0,
        "items": [],
    }


def run_from_doc(doc: dict) -> Run:
    try:
        return Run(
            id=doc["id"],
            prompt_id=doc["prompt_id"],
            prompt_version=doc["prompt_version"],
            model_id=doc["model_id"],
            session_ids=tuple(doc["session_ids"]),
            granularity=doc.get("granularity", "utterance"),
            params=RunParams(**doc.get("params", {})),
            state=doc["state"],
            counts=RunCounts(**doc.get("counts", {})),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed run document: {exc}") from exc


def annotation_to_doc(a: Annotation) -> dict:
    doc = {
        "id": a.id,
        "session_id": a.session_id,
        "utterance_index": a.utterance_index,
        "source": a.source,
        "document": dict(a.document),
        "attempts": a.attempts,
        "created_at": a.created_at,
    }
    if a.raw_response_digest is not None:
        doc["raw_response_digest"] = a.raw_response_digest
    return doc


def annotation_from_doc(doc: dict) -> Annotation:
    try:
        return Annotation(
            id=doc["id"],
            session_id=doc["session_id"],
            utterance_index=doc["utterance_index"],
            source=doc["source"],
            document=dict(doc["document"]),
            attempts=doc["attempts"],
            created_at=doc["created_at"],
            raw_response_digest=doc.get("raw_response_digest"),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed annotation document: {exc}") from exc


def runset_to_doc(rs: RunSet) -> dict:
    return {
        "id": rs.id,
        "name": rs.name,
        "members": list(rs.members),
        "target_field": rs.target_field,
        "reference": rs.reference,
    }


def runset_from_doc(doc: dict) -> RunSet:
    try:
        return RunSet(
            id=doc["id"],
            name=doc["name"],
            members=tuple(doc["members"]),
            target_field=doc["target_field"],
            reference=doc.get("reference"),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed run-set document: {exc}") from exc
