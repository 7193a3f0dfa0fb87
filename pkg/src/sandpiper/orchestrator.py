"""Annotation runs: prompt assembly, the validate-and-retry loop, and
run execution over a bounded worker pool.

The loop contract: call the model, extract a JSON candidate from the
reply, validate it against the coding schema. A conforming reply ends the
loop; a malformed one is answered with structured feedback naming every
violation, up to max_retries times. Only conforming documents are ever
persisted, so the store never holds an invalid annotation.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .docs import annotation_to_doc, prompt_from_doc, run_from_doc
from .errors import GatewayError, InvalidInput, NotFound, PermissionDenied, StateError
from .gateway import ChatMessage, ChatRequest
from .ingest import session_from_doc
from .model import (
    DEID_RAW,
    RUN_CANCELLED,
    RUN_COMPLETED,
    RUN_COMPLETED_WITH_ERRORS,
    RUN_FAILED,
    RUN_QUEUED,
    RUN_RUNNING,
    Annotation,
    PromptVersion,
    RunParams,
    Session,
    new_id,
    now_iso,
    source_key,
)
from .schema import (
    CodingSchema,
    ValidationError,
    content_digest,
    extract_candidate,
    render_feedback,
    render_schema,
    validate,
    validate_object,
)

MAX_TOKENS_UTTERANCE = 1024
MAX_TOKENS_SESSION = 4096

# Item outcomes. "skipped" only appears when a run is cancelled mid-flight.
ITEM_OK = "ok"
ITEM_FAILED_SCHEMA = "failed_schema"
ITEM_FAILED_GATEWAY = "failed_gateway"
ITEM_SKIPPED = "skipped"

_FATAL_GATEWAY_CODES = ("model_not_allowed", "auth_failure")


@dataclass(frozen=True)
class ItemResult:
    """Outcome of annotating one work item.

    Utterance-granularity items fill ``document``; session-granularity
    items fill ``documents`` (one conforming object per utterance index).
    """

    session_id: str
    utterance_index: int | None
    status: str
    attempts: int
    document: dict | None = None
    documents: dict | None = None
    errors: tuple = ()
    reply_digest: str | None = None
    token_usage: int = 0
    message: str = ""


def _line(session: Session, index: int) -> str:
    u = session.utterances[index]
    return f"{u.speaker_id}: {u.text}"


def build_messages(pv: PromptVersion, session: Session, focal_index: int,
                   context_window: int) -> tuple[ChatMessage, ...]:
    """Messages for one utterance-granularity request: instructions plus
    schema in the system turn, transcript context plus the focal utterance
    in the user turn."""
    if not (0 <= focal_index < len(session.utterances)):
        raise InvalidInput(f"focal index {focal_index} outside session {session.id}")
    system = (
        f"{pv.instructions}\n\n{render_schema(pv.schema)}\n\n"
        "Reply with only one conforming JSON document and nothing else."
    )
    parts = []
    start = max(0, focal_index - context_window)
    if focal_index > start:
        parts.append("Transcript context:")
        parts.extend(_line(session, i) for i in range(start, focal_index))
        parts.append("")
    parts.append("Annotate this utterance:")
    parts.append(_line(session, focal_index))
    return (
        ChatMessage(role="system", content=system),
        ChatMessage(role="user", content="\n".join(parts)),
    )


def build_session_messages(pv: PromptVersion, session: Session) -> tuple[ChatMessage, ...]:
    """Messages for one session-granularity request covering the whole
    transcript; the reply wraps per-utterance objects in an items array."""
    system = (
        f"{pv.instructions}\n\n"
        "For every utterance produce one object of this form:\n"
        f"{render_schema(pv.schema)}\n\n"
        'Reply with only one JSON document shaped as {"items": [{"index": '
        "<utterance index>, ...}, ...]} covering each utterance index exactly "
        "once, and nothing else."
    )
    lines = ["Transcript:"]
    lines.extend(f"[{u.index}] {u.speaker_id}: {u.text}" for u in session.utterances)
    lines.append("")
    lines.append("Annotate every utterance.")
    return (
        ChatMessage(role="system", content=system),
        ChatMessage(role="user", content="\n".join(lines)),
    )


def _reprefix(errors: list[ValidationError], prefix: str) -> list[ValidationError]:
    out = []
    for e in errors:
        path = f"{prefix}{e.path}"
        out.append(ValidationError(
            path=path, kind=e.kind, expected=e.expected, found=e.found,
            message=f"{path}: expected {e.expected}, found {e.found}",
        ))
    return out


def _validate_items_reply(text: str, session: Session,
                          schema: CodingSchema) -> tuple[list[ValidationError], dict | None]:
    """Check a session-granularity reply: an {"items": [...]} wrapper whose
    elements each carry an utterance index plus one conforming document.
    Returns (errors, {index: document}) with documents only when clean."""
    def err(path, kind, expected, found):
        where = path if path else "(document)"
        return ValidationError(path=path, kind=kind, expected=expected, found=found,
                               message=f"{where}: expected {expected}, found {found}")

    try:
        value = json.loads(text)
    except (json.JSONDecodeError, RecursionError):
        snippet = text.strip().replace("\n", " ")
        if len(snippet) > 60:
            snippet = snippet[:59] + "…"
        return [err("", "parse_failure", "a parseable JSON document", snippet)], None
    if not isinstance(value, dict):
        return [err("", "not_an_object", "a JSON object", type(value).__name__)], None

    errors: list[ValidationError] = []
    for key in sorted(value):
        if key != "items":
            errors.append(err(f"/{key}", "unknown_field", "no such field", "a value"))
    if "items" not in value:
        return errors + [err("/items", "missing_required", "an array of per-utterance objects", "nothing")], None
    items = value["items"]
    if not isinstance(items, list):
        return errors + [err("/items", "type_mismatch", "an array", type(items).__name__)], None

    valid_indexes = {u.index for u in session.utterances}
    seen: set[int] = set()
    documents: dict[int, dict] = {}
    for pos, element in enumerate(items):
        base = f"/items/{pos}"
        if not isinstance(element, dict):
            errors.append(err(base, "not_an_object", "a JSON object", type(element).__name__))
            continue
        idx = element.get("index")
        if "index" not in element:
            errors.append(err(f"{base}/index", "missing_required", "an utterance index", "nothing"))
            continue
        if not isinstance(idx, int) or isinstance(idx, bool):
            errors.append(err(f"{base}/index", "type_mismatch", "an integer utterance index",
                              json.dumps(idx)))
            continue
        if idx not in valid_indexes:
            errors.append(err(f"{base}/index", "range_violation",
                              f"an utterance index between 0 and {len(session.utterances) - 1}",
                              str(idx)))
            continue
        if idx in seen:
            errors.append(err(f"{base}/index", "range_violation",
                              "each utterance index exactly once", f"duplicate {idx}"))
            continue
        seen.add(idx)
        body = {k: v for k, v in element.items() if k != "index"}
        element_errors = validate_object(body, schema)
        if element_errors:
            errors.extend(_reprefix(element_errors, base))
        else:
            documents[idx] = body
    missing = sorted(valid_indexes - seen)
    if missing:
        errors.append(err("/items", "missing_required",
                          f"entries for utterance indexes {missing}", "nothing"))
    if errors:
        return errors, None
    return [], documents


def _retry_loop(provider, model_id: str, base_messages: tuple[ChatMessage, ...],
                schema: CodingSchema, params: RunParams, max_tokens: int,
                check) -> dict:
    """Shared call/validate/feedback loop.

    ``check(reply_text) -> (errors, payload)``; a clean check ends the
    loop. Total attempts never exceed 1 + max_retries.
    """
    messages = list(base_messages)
    usage = 0
    last_errors: list[ValidationError] = []
    reply_digest = None
    attempts = 0
    for attempt in range(1, params.max_retries + 2):
        attempts = attempt
        request = ChatRequest(
            model=model_id,
            messages=tuple(messages),
            temperature=params.temperature,
            max_tokens=max_tokens,
        )
        try:
            reply = provider.complete(request)
        except GatewayError as exc:
            return {
                "status": ITEM_FAILED_GATEWAY,
                "attempts": attempts,
                "payload": None,
                "errors": last_errors,
                "reply_digest": reply_digest,
                "token_usage": usage,
                "message": f"{exc.code}: {exc.message}",
                "gateway_code": exc.code,
            }
        usage += reply.token_usage
        reply_digest = content_digest(reply.content)
        errors, payload = check(reply.content)
        if not errors:
            return {
                "status": ITEM_OK,
                "attempts": attempts,
                "payload": payload,
                "errors": [],
                "reply_digest": reply_digest,
                "token_usage": usage,
                "message": "",
                "gateway_code": None,
            }
        last_errors = errors
        if attempt <= params.max_retries:
            messages.append(ChatMessage(role="assistant", content=reply.content))
            messages.append(ChatMessage(role="user", content=render_feedback(errors, schema)))
    return {
        "status": ITEM_FAILED_SCHEMA,
        "attempts": attempts,
        "payload": None,
        "errors": last_errors,
        "reply_digest": reply_digest,
        "token_usage": usage,
        "message": "reply never conformed to the schema",
        "gateway_code": None,
    }


def _guard_privacy(session: Session, provider) -> None:
    if session.deid_status == DEID_RAW and not getattr(provider, "is_mock", False):
        raise PermissionDenied(
            f"session {session.id} is raw; mask it before sending text to a provider"
        )


def annotate_item(provider, model_id: str, pv: PromptVersion, session: Session,
                  focal_index: int, params: RunParams) -> ItemResult:
    """Annotate a single utterance, retrying on schema violations."""
    _guard_privacy(session, provider)
    base = build_messages(pv, session, focal_index, params.context_window)

    def check(text: str):
        candidate = extract_candidate(text)
        errors = validate(candidate, pv.schema)
        return errors, (json.loads(candidate) if not errors else None)

    out = _retry_loop(provider, model_id, base, pv.schema, params,
                      MAX_TOKENS_UTTERANCE, check)
    return ItemResult(
        session_id=session.id,
        utterance_index=focal_index,
        status=out["status"],
        attempts=out["attempts"],
        document=out["payload"],
        errors=tuple(e.to_doc() for e in out["errors"]),
        reply_digest=out["reply_digest"],
        token_usage=out["token_usage"],
        message=out["message"],
    )


def annotate_session(provider, model_id: str, pv: PromptVersion, session: Session,
                     params: RunParams) -> ItemResult:
    """Annotate a whole session in one request (session granularity)."""
    _guard_privacy(session, provider)
    base = build_session_messages(pv, session)

    def check(text: str):
        candidate = extract_candidate(text)
        return _validate_items_reply(candidate, session, pv.schema)

    out = _retry_loop(provider, model_id, base, pv.schema, params,
                      MAX_TOKENS_SESSION, check)
    return ItemResult(
        session_id=session.id,
        utterance_index=None,
        status=out["status"],
        attempts=out["attempts"],
        documents=out["payload"],
        errors=tuple(e.to_doc() for e in out["errors"]),
        reply_digest=out["reply_digest"],
        token_usage=out["token_usage"],
        message=out["message"],
    )


class RunExecutor:
    """Executes one queued run against a provider, persisting progress
    after every item so observers always see consistent, monotone counts."""

    def __init__(self, store, provider, run_id: str,
                 cancel_event: threading.Event | None = None,
                 on_progress=None):
        self.store = store
        self.provider = provider
        self.run_id = run_id
        self.cancel_event = cancel_event or threading.Event()
        self.on_progress = on_progress
        self._doc_lock = threading.Lock()
        self._fatal: str | None = None

    # -- run-document bookkeeping -------------------------------------

    def _update(self, **changes) -> dict:
        with self._doc_lock:
            doc = self.store.require("runs", self.run_id)
            doc.update(changes)
            self.store.put("runs", self.run_id, doc)
            return doc

    def _record_item(self, result: ItemResult) -> None:
        with self._doc_lock:
            doc = self.store.require("runs", self.run_id)
            counts = doc["counts"]
            if result.status == ITEM_OK:
                counts["succeeded"] += 1
            elif result.status in (ITEM_FAILED_SCHEMA, ITEM_FAILED_GATEWAY):
                counts["failed_items"] += 1
            doc["token_usage"] += result.token_usage
            item = {
                "session_id": result.session_id,
                "utterance_index": result.utterance_index,
                "status": result.status,
                "attempts": result.attempts,
            }
            if result.message:
                item["message"] = result.message
            if result.errors:
                item["errors"] = list(result.errors)
            doc["items"].append(item)
            self.store.put("runs", self.run_id, doc)
        if self.on_progress is not None:
            self.on_progress(item)

    def _persist_annotations(self, result: ItemResult) -> None:
        source = source_key(run_id=self.run_id)
        produced: list[tuple[int, dict]] = []
        if result.document is not None and result.utterance_index is not None:
            produced.append((result.utterance_index, result.document))
        if result.documents:
            produced.extend(sorted(result.documents.items()))
        for index, document in produced:
            ann = Annotation(
                id=new_id("ann_"),
                session_id=result.session_id,
                utterance_index=index,
                source=source,
                document=document,
                attempts=result.attempts,
                created_at=now_iso(),
                raw_response_digest=result.reply_digest,
            )
            self.store.put_annotation(annotation_to_doc(ann))

    # -- execution ------------------------------------------------------

    def _work_item(self, pv: PromptVersion, session: Session, params: RunParams,
                   model_id: str, granularity: str, index: int | None) -> None:
        if self.cancel_event.is_set() or self._fatal:
            result = ItemResult(
                session_id=session.id,
                utterance_index=index,
                status=ITEM_SKIPPED,
                attempts=1,
                message="cancelled before dispatch",
            )
            self._record_item(result)
            return
        if granularity == "utterance":
            result = annotate_item(self.provider, model_id, pv, session, index, params)
        else:
            result = annotate_session(self.provider, model_id, pv, session, params)
        if result.status == ITEM_OK:
            self._persist_annotations(result)
        elif result.status == ITEM_FAILED_GATEWAY and any(
            code in result.message for code in _FATAL_GATEWAY_CODES
        ):
            self._fatal = result.message
        self._record_item(result)

    def execute(self) -> dict:
        doc = self.store.require("runs", self.run_id)
        if doc["state"] != RUN_QUEUED:
            raise StateError(f"run {self.run_id} is {doc['state']}, not {RUN_QUEUED}")
        run = run_from_doc(doc)

        prompt_doc = self.store.require("prompts", run.prompt_id)
        prompt = prompt_from_doc(prompt_doc)
        pv = prompt.version(run.prompt_version)
        if pv is None:
            raise NotFound(f"prompt {run.prompt_id} has no version {run.prompt_version}")

        sessions = []
        for sid in run.session_ids:
            sess = session_from_doc(self.store.require("sessions", sid))
            _guard_privacy(sess, self.provider)
            sessions.append(sess)

        # A version that has driven a run is frozen; later edits must be
        # saved as a new version, keeping old runs reproducible.
        if not pv.frozen:
            for v in prompt_doc["versions"]:
                if v["version"] == run.prompt_version:
                    v["frozen"] = True
            self.store.put("prompts", run.prompt_id, prompt_doc)

        items: list[tuple[Session, int | None]] = []
        if run.granularity == "utterance":
            for sess in sessions:
                items.extend((sess, u.index) for u in sess.utterances)
        else:
            items.extend((sess, None) for sess in sessions)

        self._update(
            state=RUN_RUNNING,
            started_at=now_iso(),
            counts={"total_items": len(items), "succeeded": 0, "failed_items": 0},
        )

        try:
            with ThreadPoolExecutor(max_workers=run.params.concurrency) as pool:
                futures = [
                    pool.submit(self._work_item, pv, sess, run.params,
                                run.model_id, run.granularity, index)
                    for sess, index in items
                ]
                for future in futures:
                    future.result()
        except Exception as exc:  # defensive: worker bugs must not wedge the run
            self._update(state=RUN_FAILED, finished_at=now_iso(), error=str(exc))
            raise

        doc = self.store.require("runs", self.run_id)
        skipped = sum(1 for item in doc["items"] if item["status"] == ITEM_SKIPPED)
        if self._fatal:
            final = RUN_FAILED
        elif self.cancel_event.is_set() and skipped:
            final = RUN_CANCELLED
        elif doc["counts"]["failed_items"]:
            final = RUN_COMPLETED_WITH_ERRORS
        else:
            final = RUN_COMPLETED
        return self._update(
            state=final,
            finished_at=now_iso(),
            error=self._fatal,
        )


def execute_run(store, provider, run_id: str,
                cancel_event: threading.Event | None = None,
                on_progress=None) -> dict:
    return RunExecutor(store, provider, run_id,
                       cancel_event=cancel_event,
                       on_progress=on_progress).execute()
