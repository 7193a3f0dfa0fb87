"""REST surface over the service layer.

All routes live under /api. Auth is a static bearer token (empty token
disables the check, for local single-user setups); mask-map export
additionally requires the second X-Maskmap-Token header, so ordinary API
access can never reach re-identification data.

Errors use one shape everywhere:
{"error": {"http_status", "code", "message", "details"}}.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .errors import (
    GatewayError,
    InvalidInput,
    NotFound,
    PermissionDenied,
    SandpiperError,
    StateError,
    StoreError,
)
from .ingest import export_session_json, session_from_doc
from .model import RunParams
from .service import Service

_STATUS_BY_TYPE = [
    (NotFound, 404),
    (PermissionDenied, 403),
    (StateError, 409),
    (InvalidInput, 400),
    (GatewayError, 502),
    (StoreError, 500),
]


class AuthError(Exception):
    def __init__(self, message: str):
        self.message = message


def _error_body(status: int, code: str, message: str, details: dict | None = None) -> dict:
    return {
        "error": {
            "http_status": status,
            "code": code,
            "message": message,
            "details": details or {},
        }
    }


def _status_for(exc: SandpiperError) -> int:
    for cls, status in _STATUS_BY_TYPE:
        if isinstance(exc, cls):
            return status
    return 500


def create_app(service: Service) -> FastAPI:
    app = FastAPI(title="sandpiper", docs_url=None, redoc_url=None, openapi_url=None)
    config = service.config

    # One response replayed per (path, Idempotency-Key) for the process
    # lifetime. Only successful responses are cached: a failed POST had no
    # effect, so retrying it for real is the right thing.
    idem_lock = threading.Lock()
    idem_cache: dict[tuple[str, str], tuple[int, bytes, str | None]] = {}

    # -- errors ----------------------------------------------------------

    @app.exception_handler(SandpiperError)
    async def _domain_error(request: Request, exc: SandpiperError):
        status = _status_for(exc)
        return JSONResponse(
            status_code=status,
            content=_error_body(status, exc.code, exc.message, exc.details),
        )

    @app.exception_handler(AuthError)
    async def _auth_error(request: Request, exc: AuthError):
        return JSONResponse(
            status_code=401,
            content=_error_body(401, "auth_failure", exc.message),
        )

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content=_error_body(400, "invalid_input", "malformed request body",
                                {"errors": [str(e.get("msg", e)) for e in exc.errors()]}),
        )

    # -- middleware ---------------------------------------------------------
    # Starlette runs the last-registered middleware first, so auth is
    # registered after idempotency: unauthorized requests never touch the
    # replay cache.

    @app.middleware("http")
    async def _idempotency(request: Request, call_next):
        key = request.headers.get("idempotency-key")
        if request.method != "POST" or not key:
            return await call_next(request)
        cache_key = (request.url.path, key)
        with idem_lock:
            cached = idem_cache.get(cache_key)
        if cached is not None:
            status, body, media_type = cached
            return Response(content=body, status_code=status, media_type=media_type)
        response = await call_next(request)
        chunks = [chunk async for chunk in response.body_iterator]
        body = b"".join(chunks)
        media_type = response.headers.get("content-type")
        if 200 <= response.status_code < 300:
            with idem_lock:
                idem_cache[cache_key] = (response.status_code, body, media_type)
        return Response(content=body, status_code=response.status_code,
                        media_type=media_type)

    @app.middleware("http")
    async def _bearer_auth(request: Request, call_next):
        path = request.url.path
        if path != "/api/healthz" and path.startswith("/api") and config.api_token:
            header = request.headers.get("authorization", "")
            if header != f"Bearer {config.api_token}":
                return JSONResponse(
                    status_code=401,
                    content=_error_body(401, "auth_failure",
                                        "missing or invalid bearer token"),
                )
        return await call_next(request)

    async def _json_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise InvalidInput("request body must be a JSON object")
        if not isinstance(body, dict):
            raise InvalidInput("request body must be a JSON object")
        return body

    def _need(body: dict, key: str):
        if key not in body:
            raise InvalidInput(f"missing required field {key!r}")
        return body[key]

    # -- health ------------------------------------------------------------

    @app.get("/api/healthz")
    async def healthz():
        return {"status": "ok"}

    # -- sessions ------------------------------------------------------------

    @app.post("/api/sessions/import", status_code=201)
    async def import_session(request: Request,
                             fmt: str | None = Query(default=None, alias="format"),
                             title: str | None = None):
        # Two ways in: raw file bytes with ?format=..., or a JSON body
        # carrying format/content/title keys.
        if fmt is not None:
            data = await request.body()
            return service.ingest(data, fmt, title or "untitled")
        body = await _json_body(request)
        content = _need(body, "content")
        if not isinstance(content, str):
            raise InvalidInput("'content' must be a string")
        return service.ingest(content.encode("utf-8"), _need(body, "format"),
                              body.get("title", "untitled"))

    @app.get("/api/sessions")
    async def list_sessions():
        return service.list_sessions()

    @app.get("/api/sessions/{session_id}")
    async def get_session(session_id: str):
        return service.get_session(session_id)

    @app.get("/api/sessions/{session_id}/export")
    async def export_session(session_id: str):
        session = session_from_doc(service.get_session(session_id))
        return Response(content=export_session_json(session),
                        media_type="application/json")

    @app.post("/api/sessions/{session_id}/deidentify")
    async def deidentify_session(session_id: str, request: Request):
        body = await _json_body(request) if await request.body() else {}
        roster = body.get("roster", [])
        institutions = body.get("institutions", [])
        if not isinstance(roster, list) or not isinstance(institutions, list):
            raise InvalidInput("'roster' and 'institutions' must be arrays")
        return service.mask(session_id, tuple(roster), tuple(institutions))

    @app.get("/api/sessions/{session_id}/deid-report")
    async def deid_report(session_id: str):
        return service.deid_report(session_id)

    @app.post("/api/sessions/{session_id}/deid-verify")
    async def deid_verify(session_id: str, request: Request):
        body = await _json_body(request)
        action = _need(body, "action")
        if action not in ("approve", "reject"):
            raise InvalidInput("'action' must be \"approve\" or \"reject\"")
        notes = body.get("notes", "")
        if not isinstance(notes, str):
            raise InvalidInput("'notes' must be a string")
        return service.deid_verify(session_id, action == "approve", notes)

    @app.get("/api/sessions/{session_id}/annotations")
    async def session_annotations(session_id: str,
                                  source: list[str] | None = Query(default=None)):
        return service.session_annotations(session_id, source)

    @app.get("/api/sessions/{session_id}/maskmap")
    async def export_maskmap(session_id: str, request: Request):
        supplied = request.headers.get("x-maskmap-token", "")
        if not config.maskmap_token or supplied != config.maskmap_token:
            raise PermissionDenied(
                "mask-map export requires a valid X-Maskmap-Token header"
            )
        return service.export_maskmap(session_id)

    # -- prompts ---------------------------------------------------------------

    @app.post("/api/prompts", status_code=201)
    async def create_prompt(request: Request):
        body = await _json_body(request)
        return service.create_prompt(
            name=_need(body, "name"),
            instructions=_need(body, "instructions"),
            schema_doc=_need(body, "schema"),
        )

    @app.get("/api/prompts")
    async def list_prompts():
        return service.list_prompts()

    @app.get("/api/prompts/{prompt_id}")
    async def get_prompt(prompt_id: str):
        return service.get_prompt(prompt_id)

    @app.post("/api/prompts/{prompt_id}/versions", status_code=201)
    async def add_version(prompt_id: str, request: Request):
        body = await _json_body(request)
        return service.add_prompt_version(
            prompt_id,
            instructions=_need(body, "instructions"),
            schema_doc=_need(body, "schema"),
        )

    # -- runs ----------------------------------------------------------------

    @app.get("/api/models")
    async def list_models():
        return {"models": service.list_models()}

    @app.post("/api/runs", status_code=202)
    async def create_run(request: Request):
        body = await _json_body(request)
        params_doc = body.get("params", {})
        if not isinstance(params_doc, dict):
            raise InvalidInput("'params' must be an object")
        try:
            params = RunParams(**params_doc)
        except TypeError as exc:
            raise InvalidInput(f"bad run params: {exc}")
        mock_script = body.get("mock_script")
        if mock_script is not None and not isinstance(mock_script, list):
            raise InvalidInput("'mock_script' must be an array of replies")
        doc = service.create_run(
            prompt_id=_need(body, "prompt_id"),
            prompt_version=_need(body, "prompt_version"),
            model_id=_need(body, "model"),
            session_ids=_need(body, "sessions"),
            params=params,
            granularity=body.get("granularity", "utterance"),
            mock_script=mock_script,
        )
        service.start_run(doc["id"])
        return JSONResponse(status_code=202,
                            content={"id": doc["id"], "state": "queued"})

    @app.get("/api/runs")
    async def list_runs():
        return service.list_runs()

    @app.get("/api/runs/{run_id}")
    async def get_run(run_id: str):
        return service.get_run(run_id)

    @app.post("/api/runs/{run_id}/cancel")
    async def cancel_run(run_id: str):
        return service.cancel_run(run_id)

    # -- annotations -------------------------------------------------------

    @app.post("/api/annotations", status_code=201)
    async def add_annotation(request: Request):
        body = await _json_body(request)
        document = _need(body, "document")
        if not isinstance(document, dict):
            raise InvalidInput("'document' must be an object")
        return service.add_human_annotation(
            session_id=_need(body, "session_id"),
            utterance_index=_need(body, "utterance_index"),
            coder_id=_need(body, "human_coder_id"),
            document=document,
            prompt_id=_need(body, "prompt_id"),
            prompt_version=_need(body, "prompt_version"),
        )

    @app.get("/api/annotations")
    async def list_annotations(session_id: str | None = None,
                               source: str | None = None):
        return service.list_annotations(session_id=session_id, source=source)

    # -- run-sets -------------------------------------------------------------

    @app.post("/api/runsets", status_code=201)
    async def create_runset(request: Request):
        body = await _json_body(request)
        members = _need(body, "members")
        if not isinstance(members, list):
            raise InvalidInput("'members' must be an array")
        return service.create_runset(
            name=_need(body, "name"),
            members=members,
            target_field=_need(body, "target_field"),
            reference=body.get("reference"),
        )

    @app.get("/api/runsets")
    async def list_runsets():
        return service.list_runsets()

    @app.get("/api/runsets/{runset_id}")
    async def get_runset(runset_id: str):
        return service.get_runset(runset_id)

    @app.get("/api/runsets/{runset_id}/evaluation")
    async def evaluation(runset_id: str):
        return service.evaluate(runset_id)

    @app.get("/api/runsets/{runset_id}/evaluation.csv")
    async def evaluation_csv(runset_id: str, file: str = "agreement.csv"):
        files = service.evaluate_csv(runset_id)
        if file not in files:
            raise NotFound(f"no CSV file {file!r} in this report",
                           details={"available": sorted(files)})
        return Response(content=files[file], media_type="text/csv")

    return app
