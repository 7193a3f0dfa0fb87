"""Workbench operations shared by the REST API and the CLI.

This layer is trusted: it may read privileged collections internally, but
everything it *returns* for ordinary consumption is already redacted.
Only deid_report and approve ever touch mask maps on behalf of a caller,
and neither exposes an original-to-surrogate pairing.
"""

from __future__ import annotations

import threading

from .config import AppConfig
from .deid import (
    DetectionRuleSet,
    detect_pii,
    mask_session,
    maskmap_from_doc,
    maskmap_to_doc,
    surrogate_spans,
    verify_masking,
)
from .docs import (
    annotation_to_doc,
    prompt_from_doc,
    prompt_to_doc,
    run_to_doc,
    runset_to_doc,
)
from .errors import GatewayError, InvalidInput, NotFound, StateError
from .gateway import HttpProvider, MockProvider, ProviderConfig
from .ingest import (
    parse_csv,
    parse_plaintext,
    parse_session_json,
    session_from_doc,
    session_to_doc,
)
from .model import (
    DEID_MASKED,
    DEID_RAW,
    DEID_VERIFIED,
    RUN_CANCELLED,
    RUN_FAILED,
    RUN_QUEUED,
    RUN_RUNNING,
    SOURCE_FORMATS,
    Annotation,
    Prompt,
    PromptVersion,
    Run,
    RunParams,
    RunSet,
    new_id,
    now_iso,
    source_key,
)
from .orchestrator import execute_run
from .schema import schema_from_doc, validate_object, version_content_hash
from .store import Store
from . import evalengine


class Service:
    def __init__(self, config: AppConfig, store: Store | None = None):
        self.config = config
        self.store = store if store is not None else Store(config.db_path)
        self._runs_lock = threading.Lock()
        self._cancel_events: dict[str, threading.Event] = {}
        self._run_threads: dict[str, threading.Thread] = {}

    # -- sessions -----------------------------------------------------

    def ingest(self, data: bytes, source_format: str, title: str) -> dict:
        """Parse one input file and persist the session. Returns the
        session document plus the parse report under "ingest_report"."""
        if source_format not in SOURCE_FORMATS:
            raise InvalidInput(f"unknown source format {source_format!r}")
        if source_format == "plaintext":
            session, report = parse_plaintext(data, title)
            report_doc = report.to_doc()
        elif source_format == "csv":
            session, report = parse_csv(data, title)
            report_doc = report.to_doc()
        else:
            session = parse_session_json(data)
            report_doc = {"sessions_created": 1, "lines_skipped": [], "warnings": []}
            if self.store.exists("sessions", session.id):
                raise StateError(f"session {session.id} already exists")
        self.store.put("sessions", session.id, session_to_doc(session))
        out = session_to_doc(session)
        out["ingest_report"] = report_doc
        return out

    def get_session(self, session_id: str) -> dict:
        return self.store.require("sessions", session_id)

    def list_sessions(self) -> list[dict]:
        return self.store.query("sessions")

    # -- de-identification ---------------------------------------------

    def mask(self, session_id: str, roster: tuple[str, ...] = (),
             institutions: tuple[str, ...] = ()) -> dict:
        """Detect PII, substitute surrogates, overwrite the stored session
        with the masked text, and file the mask map in the privileged
        collection. Raw text survives only inside the mask map, which also
        keeps a full original snapshot so a rejected mask can be undone."""
        raw_doc = self.store.require("sessions", session_id)
        session = session_from_doc(raw_doc)
        if session.deid_status != DEID_RAW:
            raise StateError(f"session {session_id} is already {session.deid_status}")
        rules = DetectionRuleSet(roster=tuple(roster),
                                 institutions=tuple(institutions))
        detections = detect_pii(session, rules)
        masked, mask_map = mask_session(session, detections,
                                        seed=self.config.surrogate_seed)
        map_doc = maskmap_to_doc(mask_map)
        map_doc["rules"] = {"roster": list(roster), "institutions": list(institutions)}
        map_doc["original"] = raw_doc
        self.store.put("maskmaps", session_id, map_doc)
        self.store.put("sessions", session_id, session_to_doc(masked))
        out = session_to_doc(masked)
        out["masked_spans"] = len(detections)
        return out

    def _load_masked(self, session_id: str):
        session = session_from_doc(self.store.require("sessions", session_id))
        if session.deid_status == DEID_RAW:
            raise StateError(f"session {session_id} has not been masked")
        map_doc = self.store.require("maskmaps", session_id, privileged=True)
        rules_doc = map_doc.get("rules", {})
        rules = DetectionRuleSet(
            roster=tuple(rules_doc.get("roster", ())),
            institutions=tuple(rules_doc.get("institutions", ())),
        )
        return session, maskmap_from_doc(map_doc), rules

    def deid_report(self, session_id: str) -> dict:
        """Verification summary safe for ordinary eyes: where surrogates
        sit and whether anything suspicious remains, but leaked-original
        locations come without the text itself."""
        session, mask_map, rules = self._load_masked(session_id)
        report = verify_masking(session, mask_map, rules)
        doc = report.to_doc()
        # Residual hits are possible PII by definition, so neither list may
        # carry the matched text, only its location.
        for hit in doc["leaked_originals"] + doc["residual_hits"]:
            hit.pop("surface", None)
        doc["deid_status"] = session.deid_status
        doc["masked_spans"] = surrogate_spans(session, mask_map)
        return doc

    def export_maskmap(self, session_id: str) -> dict:
        """Privileged: the full original-to-surrogate mapping."""
        return self.store.require("maskmaps", session_id, privileged=True)

    def deid_verify(self, session_id: str, approve: bool, notes: str = "") -> dict:
        """Operator sign-off after reviewing the deid report. Approve flips
        the session from masked to verified; reject restores the original
        text from the mask map snapshot and discards the map so the session
        can be re-masked with better rules. Approve is idempotent on an
        already verified session."""
        doc = self.store.require("sessions", session_id)
        if approve:
            if doc["deid_status"] == DEID_VERIFIED:
                return doc
            if doc["deid_status"] != DEID_MASKED:
                raise StateError(
                    f"session {session_id} is {doc['deid_status']}, not masked")
            doc["deid_status"] = DEID_VERIFIED
            if notes:
                doc.setdefault("metadata", {})["deid_notes"] = notes
            self.store.put("sessions", session_id, doc)
            return doc
        if doc["deid_status"] == DEID_RAW:
            raise StateError(f"session {session_id} has not been masked")
        map_doc = self.store.require("maskmaps", session_id, privileged=True)
        original = map_doc.get("original")
        if original is None:
            raise StateError(
                f"mask map for session {session_id} has no original snapshot")
        original["deid_status"] = DEID_RAW
        if notes:
            original.setdefault("metadata", {})["deid_notes"] = notes
        self.store.put("sessions", session_id, original)
        self.store.delete("maskmaps", session_id, privileged=True)
        return original

    # -- prompts --------------------------------------------------------

    def create_prompt(self, name: str, instructions: str, schema_doc: dict) -> dict:
        if not name.strip():
            raise InvalidInput("prompt name must be non-empty")
        schema = schema_from_doc(schema_doc)
        version = PromptVersion(
            version=1,
            instructions=instructions,
            schema=schema,
            created_at=now_iso(),
            frozen=False,
            content_hash=version_content_hash(instructions, schema),
        )
        prompt = Prompt(id=new_id("prm_"), name=name, versions=(version,))
        doc = prompt_to_doc(prompt)
        self.store.put("prompts", prompt.id, doc)
        return doc

    def add_prompt_version(self, prompt_id: str, instructions: str,
                           schema_doc: dict) -> dict:
        doc = self.store.require("prompts", prompt_id)
        prompt = prompt_from_doc(doc)
        schema = schema_from_doc(schema_doc)
        number = max(v.version for v in prompt.versions) + 1
        version = PromptVersion(
            version=number,
            instructions=instructions,
            schema=schema,
            created_at=now_iso(),
            frozen=False,
            content_hash=version_content_hash(instructions, schema),
        )
        updated = Prompt(id=prompt.id, name=prompt.name,
                         versions=prompt.versions + (version,))
        out = prompt_to_doc(updated)
        self.store.put("prompts", prompt.id, out)
        return out

    def get_prompt(self, prompt_id: str) -> dict:
        return self.store.require("prompts", prompt_id)

    def list_prompts(self) -> list[dict]:
        return self.store.query("prompts")

    def _require_version(self, prompt_id: str, version: int) -> PromptVersion:
        prompt = prompt_from_doc(self.store.require("prompts", prompt_id))
        pv = prompt.version(version)
        if pv is None:
            raise NotFound(f"prompt {prompt_id} has no version {version}")
        return pv

    # -- runs -------------------------------------------------------------

    def list_models(self) -> list[str]:
        """The configured gateway allowlist, plus the always-available
        offline mock model."""
        models = [m for m in self.config.allowed_models if m != "mock"]
        return sorted(models) + ["mock"]

    def _provider(self, model_id: str, mock_script: list | None):
        if mock_script is not None:
            return MockProvider(list(mock_script), model=model_id)
        if not self.config.gateway_base_url:
            raise GatewayError(
                "no gateway configured; set gateway_base_url or use a mock script",
                code="transport_failure",
            )
        allowed = self.config.allowed_models or (model_id,)
        return HttpProvider(ProviderConfig(
            base_url=self.config.gateway_base_url,
            allowed_models=tuple(allowed),
            api_key_env=self.config.gateway_key_env,
        ))

    def create_run(self, prompt_id: str, prompt_version: int, model_id: str,
                   session_ids: list[str], params: RunParams | None = None,
                   granularity: str = "utterance",
                   mock_script: list | None = None) -> dict:
        self._require_version(prompt_id, prompt_version)
        params = params or RunParams()
        if mock_script is not None and params.concurrency != 1:
            # Scripted replies are consumed in call order; parallel workers
            # would make that order racy.
            params = RunParams(
                temperature=params.temperature,
                max_retries=params.max_retries,
                context_window=params.context_window,
                concurrency=1,
            )
        for sid in session_ids:
            sess = session_from_doc(self.store.require("sessions", sid))
            if sess.deid_status == DEID_RAW and mock_script is None:
                raise StateError(
                    f"session {sid} is raw; mask it before running a model over it"
                )
        run = Run(
            id=new_id("run_"),
            prompt_id=prompt_id,
            prompt_version=prompt_version,
            model_id=model_id,
            session_ids=tuple(session_ids),
            granularity=granularity,
            params=params,
        )
        doc = run_to_doc(run, created_at=now_iso())
        if mock_script is not None:
            doc["mock_script"] = [str(entry) for entry in mock_script]
        self.store.put("runs", run.id, doc)
        return doc

    def execute_run_sync(self, run_id: str, on_progress=None) -> dict:
        doc = self.store.require("runs", run_id)
        provider = self._provider(doc["model_id"], doc.get("mock_script"))
        event = threading.Event()
        with self._runs_lock:
            self._cancel_events[run_id] = event
        try:
            return execute_run(self.store, provider, run_id,
                               cancel_event=event, on_progress=on_progress)
        finally:
            with self._runs_lock:
                self._cancel_events.pop(run_id, None)

    def start_run(self, run_id: str) -> None:
        """Kick off execution on a background thread (API path)."""
        doc = self.store.require("runs", run_id)
        if doc["state"] != RUN_QUEUED:
            raise StateError(f"run {run_id} is {doc['state']}, not {RUN_QUEUED}")

        def _go():
            try:
                self.execute_run_sync(run_id)
            except Exception as exc:
                # Failure state is already persisted by the executor for
                # run-level errors; anything else lands here.
                failed = self.store.get("runs", run_id)
                if failed and failed["state"] in (RUN_QUEUED, RUN_RUNNING):
                    failed["state"] = RUN_FAILED
                    failed["error"] = str(exc)
                    failed["finished_at"] = now_iso()
                    self.store.put("runs", run_id, failed)

        thread = threading.Thread(target=_go, name=f"run-{run_id}", daemon=True)
        with self._runs_lock:
            self._run_threads[run_id] = thread
        thread.start()

    def wait_for_run(self, run_id: str, timeout: float | None = None) -> None:
        with self._runs_lock:
            thread = self._run_threads.get(run_id)
        if thread is not None:
            thread.join(timeout)

    def cancel_run(self, run_id: str) -> dict:
        doc = self.store.require("runs", run_id)
        if doc["state"] == RUN_QUEUED:
            doc["state"] = RUN_CANCELLED
            doc["finished_at"] = now_iso()
            self.store.put("runs", run_id, doc)
            return doc
        if doc["state"] == RUN_RUNNING:
            with self._runs_lock:
                event = self._cancel_events.get(run_id)
            if event is not None:
                event.set()
            return self.store.require("runs", run_id)
        raise StateError(f"run {run_id} is already {doc['state']}")

    def get_run(self, run_id: str) -> dict:
        doc = self.store.require("runs", run_id)
        doc.pop("mock_script", None)
        return doc

    def list_runs(self) -> list[dict]:
        out = []
        for doc in self.store.query("runs"):
            doc.pop("mock_script", None)
            out.append(doc)
        return out

    # -- annotations ------------------------------------------------------

    def add_human_annotation(self, session_id: str, utterance_index: int,
                             coder_id: str, document: dict,
                             prompt_id: str, prompt_version: int) -> dict:
        """Store a human label after checking it against the same schema
        the model is held to."""
        if not coder_id.strip():
            raise InvalidInput("coder id must be non-empty")
        session = session_from_doc(self.store.require("sessions", session_id))
        if not (0 <= utterance_index < len(session.utterances)):
            raise InvalidInput(
                f"utterance index {utterance_index} outside session {session_id}"
            )
        pv = self._require_version(prompt_id, prompt_version)
        errors = validate_object(document, pv.schema)
        if errors:
            raise InvalidInput(
                "document does not conform to the schema",
                details={"errors": [e.to_doc() for e in errors]},
            )
        ann = Annotation(
            id=new_id("ann_"),
            session_id=session_id,
            utterance_index=utterance_index,
            source=source_key(human_coder_id=coder_id),
            document=dict(document),
            attempts=1,
            created_at=now_iso(),
        )
        doc = annotation_to_doc(ann)
        self.store.put_annotation(doc)
        return doc

    def list_annotations(self, session_id: str | None = None,
                         source: str | None = None) -> list[dict]:
        where = {}
        if session_id is not None:
            where["session_id"] = session_id
        if source is not None:
            where["source"] = source
        return self.store.query("annotations", where or None)

    def session_annotations(self, session_id: str,
                            sources: list[str] | None = None) -> dict:
        """Chat-view payload: every utterance of the session with its
        annotations grouped by source, optionally restricted to the given
        sources. Only documents that already passed schema validation live
        in the store, so everything here is clean by construction."""
        session = session_from_doc(self.store.require("sessions", session_id))
        wanted = set(sources) if sources else None
        by_index: dict[int, dict[str, dict]] = {}
        seen_sources: set[str] = set()
        for doc in self.store.query("annotations", {"session_id": session_id}):
            source = doc["source"]
            if wanted is not None and source not in wanted:
                continue
            seen_sources.add(source)
            by_index.setdefault(doc["utterance_index"], {})[source] = doc["document"]
        utterances = []
        for utt in session.utterances:
            entry = {
                "index": utt.index,
                "speaker_id": utt.speaker_id,
                "text": utt.text,
                "annotations": by_index.get(utt.index, {}),
            }
            if utt.timestamp is not None:
                entry["timestamp"] = utt.timestamp
            utterances.append(entry)
        return {
            "session_id": session_id,
            "title": session.title,
            "deid_status": session.deid_status,
            "sources": sorted(seen_sources),
            "utterances": utterances,
        }

    # -- run-sets & evaluation ---------------------------------------------

    def create_runset(self, name: str, members: list[str], target_field: str,
                      reference: str | None = None) -> dict:
        for member in members:
            if member.startswith("run:"):
                run_id = member.split(":", 1)[1]
                if not self.store.exists("runs", run_id):
                    raise NotFound(f"run {run_id} not found")
            elif not member.startswith("human:"):
                raise InvalidInput(
                    f"member {member!r} must look like run:<id> or human:<coder>"
                )
        runset = RunSet(
            id=new_id("rst_"),
            name=name,
            members=tuple(members),
            target_field=target_field,
            reference=reference,
        )
        doc = runset_to_doc(runset)
        self.store.put("runsets", runset.id, doc)
        return doc

    def get_runset(self, runset_id: str) -> dict:
        return self.store.require("runsets", runset_id)

    def list_runsets(self) -> list[dict]:
        return self.store.query("runsets")

    def evaluate(self, runset_id: str) -> dict:
        return evalengine.evaluate_runset(self.store, self.get_runset(runset_id))

    def evaluate_csv(self, runset_id: str) -> dict[str, str]:
        return evalengine.report_to_csv(self.evaluate(runset_id))

    # -- maintenance --------------------------------------------------------

    def dump(self, path: str) -> int:
        return self.store.dump(path)

    def load(self, path: str) -> int:
        return self.store.load(path)
