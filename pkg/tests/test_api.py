import json
import time

import pytest
from fastapi.testclient import TestClient

from sandpiper.api import create_app
from sandpiper.config import AppConfig
from sandpiper.service import Service

TOKEN = "secret-token"
MM_TOKEN = "mm-token"
AUTH = {"Authorization": f"Bearer {TOKEN}"}

PLAINTEXT = (
    "alice: My name is Devon Park and my email is devon.park82@campus.edu\n"
    "bob: You can reach Devon Park at (415) 555-0137\n"
    "alice: Sounds good, see you then\n"
)

SCHEMA_DOC = {
    "name": "codes",
    "fields": [
        {"name": "code", "type": "enum",
         "values": ["question", "explanation", "other"]},
    ],
}

GOOD = json.dumps({"code": "question"})


@pytest.fixture()
def client():
    service = Service(AppConfig(db_path=":memory:", api_token=TOKEN,
                                maskmap_token=MM_TOKEN))
    with TestClient(create_app(service)) as c:
        c.headers.update(AUTH)
        yield c


@pytest.fixture()
def open_client():
    service = Service(AppConfig(db_path=":memory:"))
    with TestClient(create_app(service)) as c:
        yield c


def import_session(client, text=PLAINTEXT, title="office hours"):
    r = client.post("/api/sessions/import",
                    json={"format": "plaintext", "content": text, "title": title})
    assert r.status_code == 201
    return r.json()


def create_prompt(client):
    r = client.post("/api/prompts", json={
        "name": "codes", "instructions": "Code each utterance.",
        "schema": SCHEMA_DOC})
    assert r.status_code == 201
    return r.json()


def finished_run(client, session_id, prompt_id, script=None):
    r = client.post("/api/runs", json={
        "prompt_id": prompt_id, "prompt_version": 1, "model": "mock",
        "sessions": [session_id], "mock_script": script or [GOOD]})
    assert r.status_code == 202
    run_id = r.json()["id"]
    deadline = time.monotonic() + 10
    while time.monotonic() < deadline:
        doc = client.get(f"/api/runs/{run_id}").json()
        if doc["state"] not in ("queued", "running"):
            return doc
        time.sleep(0.02)
    raise AssertionError("run never finished")


class TestAuth:
    def test_healthz_needs_no_token(self, client):
        r = client.get("/api/healthz", headers={"Authorization": ""})
        assert r.status_code == 200
        assert r.json() == {"status": "ok"}

    def test_missing_token_rejected(self, client):
        r = client.get("/api/sessions", headers={"Authorization": ""})
        assert r.status_code == 401
        body = r.json()["error"]
        assert body["code"] == "auth_failure"
        assert body["http_status"] == 401

    def test_wrong_token_rejected(self, client):
        r = client.get("/api/sessions", headers={"Authorization": "Bearer nope"})
        assert r.status_code == 401

    def test_good_token_accepted(self, client):
        assert client.get("/api/sessions").status_code == 200

    def test_empty_config_token_disables_auth(self, open_client):
        assert open_client.get("/api/sessions").status_code == 200


class TestErrorShape:
    def test_not_found_is_structured(self, client):
        r = client.get("/api/sessions/ghost")
        assert r.status_code == 404
        body = r.json()["error"]
        assert body["http_status"] == 404
        assert body["code"] == "not_found"
        assert "ghost" in body["message"]
        assert body["details"] == {}

    def test_malformed_body(self, client):
        r = client.post("/api/prompts", content=b"{not json",
                        headers={"Content-Type": "application/json"})
        assert r.status_code == 400
        assert r.json()["error"]["code"] == "invalid_input"

    def test_missing_field(self, client):
        r = client.post("/api/prompts", json={"name": "x"})
        assert r.status_code == 400
        assert "instructions" in r.json()["error"]["message"]

    def test_conflict_maps_to_409(self, client):
        sid = import_session(client)["id"]
        r = client.post(f"/api/sessions/{sid}/deid-verify",
                        json={"action": "approve"})
        assert r.status_code == 409
        assert r.json()["error"]["code"] == "state_error"


class TestSessionRoutes:
    def test_import_json_body(self, client):
        doc = import_session(client)
        assert doc["title"] == "office hours"
        assert doc["ingest_report"]["sessions_created"] == 1
        assert len(doc["utterances"]) == 3

    def test_import_raw_bytes_with_format_param(self, client):
        r = client.post("/api/sessions/import?format=plaintext&title=raw+mode",
                        content=PLAINTEXT.encode("utf-8"))
        assert r.status_code == 201
        assert r.json()["title"] == "raw mode"

    def test_import_bad_format(self, client):
        r = client.post("/api/sessions/import",
                        json={"format": "docx", "content": "x"})
        assert r.status_code == 400

    def test_list_and_get(self, client):
        sid = import_session(client)["id"]
        listed = client.get("/api/sessions").json()
        assert [s["id"] for s in listed] == [sid]
        assert client.get(f"/api/sessions/{sid}").json()["id"] == sid

    def test_export_round_trips(self, client):
        sid = import_session(client)["id"]
        r = client.get(f"/api/sessions/{sid}/export")
        assert r.status_code == 200
        assert r.headers["content-type"].startswith("application/json")
        r2 = client.post("/api/sessions/import?format=session-json",
                         content=r.content)
        assert r2.status_code == 409  # same id already present


class TestDeidRoutes:
    def masked(self, client):
        sid = import_session(client)["id"]
        r = client.post(f"/api/sessions/{sid}/deidentify",
                        json={"roster": ["Devon Park"]})
        assert r.status_code == 200
        return sid, r.json()

    def test_deidentify_masks_text(self, client):
        sid, doc = self.masked(client)
        assert doc["deid_status"] == "masked"
        assert doc["masked_spans"] == 4
        assert "devon" not in json.dumps(doc).casefold()

    def test_deidentify_accepts_empty_body(self, client):
        sid = import_session(client)["id"]
        r = client.post(f"/api/sessions/{sid}/deidentify")
        assert r.status_code == 200

    def test_report_available_to_ordinary_callers(self, client):
        sid, _ = self.masked(client)
        r = client.get(f"/api/sessions/{sid}/deid-report")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "clean"
        assert body["masked_spans"]

    def test_maskmap_needs_second_token(self, client):
        sid, _ = self.masked(client)
        assert client.get(f"/api/sessions/{sid}/maskmap").status_code == 403
        r = client.get(f"/api/sessions/{sid}/maskmap",
                       headers={"X-Maskmap-Token": "wrong"})
        assert r.status_code == 403
        r = client.get(f"/api/sessions/{sid}/maskmap",
                       headers={"X-Maskmap-Token": MM_TOKEN})
        assert r.status_code == 200
        assert r.json()["entries"]

    def test_maskmap_locked_when_unconfigured(self, open_client):
        sid = import_session(open_client)["id"]
        open_client.post(f"/api/sessions/{sid}/deidentify",
                         json={"roster": ["Devon Park"]})
        r = open_client.get(f"/api/sessions/{sid}/maskmap",
                            headers={"X-Maskmap-Token": ""})
        assert r.status_code == 403

    def test_verify_approve(self, client):
        sid, _ = self.masked(client)
        r = client.post(f"/api/sessions/{sid}/deid-verify",
                        json={"action": "approve", "notes": "ok"})
        assert r.status_code == 200
        assert r.json()["deid_status"] == "verified"

    def test_verify_reject_restores(self, client):
        sid, _ = self.masked(client)
        r = client.post(f"/api/sessions/{sid}/deid-verify",
                        json={"action": "reject"})
        assert r.status_code == 200
        assert r.json()["deid_status"] == "raw"
        r = client.get(f"/api/sessions/{sid}/maskmap",
                       headers={"X-Maskmap-Token": MM_TOKEN})
        assert r.status_code == 404

    def test_verify_bad_action(self, client):
        sid, _ = self.masked(client)
        r = client.post(f"/api/sessions/{sid}/deid-verify",
                        json={"action": "maybe"})
        assert r.status_code == 400

    def test_originals_absent_from_every_ordinary_response(self, client):
        sid, _ = self.masked(client)
        pid = create_prompt(client)["id"]
        run = finished_run(client, sid, pid)
        client.post("/api/runsets", json={
            "name": "rs", "members": [f"run:{run['id']}", "human:alice"],
            "target_field": "code"})
        rs_id = client.get("/api/runsets").json()[0]["id"]
        paths = [
            "/api/sessions",
            f"/api/sessions/{sid}",
            f"/api/sessions/{sid}/export",
            f"/api/sessions/{sid}/deid-report",
            f"/api/sessions/{sid}/annotations",
            "/api/annotations",
            "/api/runs",
            f"/api/runs/{run['id']}",
            f"/api/runsets/{rs_id}/evaluation",
        ]
        for path in paths:
            text = client.get(path).text.casefold()
            for original in ("devon", "park", "devon.park82@campus.edu",
                             "(415) 555-0137"):
                assert original not in text, path


class TestPromptRoutes:
    def test_create_get_list_version(self, client):
        doc = create_prompt(client)
        assert client.get(f"/api/prompts/{doc['id']}").json() == doc
        assert client.get("/api/prompts").json() == [doc]
        r = client.post(f"/api/prompts/{doc['id']}/versions",
                        json={"instructions": "v2", "schema": SCHEMA_DOC})
        assert r.status_code == 201
        assert [v["version"] for v in r.json()["versions"]] == [1, 2]


class TestRunRoutes:
    def test_models_lists_mock(self, client):
        assert client.get("/api/models").json() == {"models": ["mock"]}

    def test_run_is_queued_then_polled_to_completion(self, client):
        sid = import_session(client)["id"]
        pid = create_prompt(client)["id"]
        r = client.post("/api/runs", json={
            "prompt_id": pid, "prompt_version": 1, "model": "mock",
            "sessions": [sid], "mock_script": [GOOD]})
        assert r.status_code == 202
        assert r.json()["state"] == "queued"
        run_id = r.json()["id"]

        seen_done = 0
        deadline = time.monotonic() + 10
        while time.monotonic() < deadline:
            doc = client.get(f"/api/runs/{run_id}").json()
            done = doc["counts"]["succeeded"] + doc["counts"]["failed_items"]
            assert done >= seen_done, "progress counts went backwards"
            seen_done = done
            if doc["state"] not in ("queued", "running"):
                break
            time.sleep(0.01)
        assert doc["state"] == "completed"
        assert doc["counts"] == {"total_items": 3, "succeeded": 3,
                                 "failed_items": 0}
        assert "mock_script" not in doc

        anns = client.get("/api/annotations",
                          params={"session_id": sid,
                                  "source": f"run:{run_id}"}).json()
        assert len(anns) == 3

    def test_unknown_run_is_structured_404(self, client):
        r = client.get("/api/runs/ghost")
        assert r.status_code == 404
        assert r.json()["error"]["code"] == "not_found"

    def test_cancel_finished_run_conflicts(self, client):
        sid = import_session(client)["id"]
        pid = create_prompt(client)["id"]
        run = finished_run(client, sid, pid)
        r = client.post(f"/api/runs/{run['id']}/cancel")
        assert r.status_code == 409

    def test_bad_params_rejected(self, client):
        sid = import_session(client)["id"]
        pid = create_prompt(client)["id"]
        r = client.post("/api/runs", json={
            "prompt_id": pid, "prompt_version": 1, "model": "mock",
            "sessions": [sid], "params": {"warp_speed": 9}})
        assert r.status_code == 400
        assert "bad run params" in r.json()["error"]["message"]


class TestIdempotency:
    def test_same_key_replays_first_response(self, client):
        sid = import_session(client)["id"]
        pid = create_prompt(client)["id"]
        body = {"prompt_id": pid, "prompt_version": 1, "model": "mock",
                "sessions": [sid], "mock_script": [GOOD]}
        headers = {"Idempotency-Key": "abc-1"}
        first = client.post("/api/runs", json=body, headers=headers)
        second = client.post("/api/runs", json=body, headers=headers)
        assert first.status_code == second.status_code == 202
        assert first.json() == second.json()
        assert len(client.get("/api/runs").json()) == 1

    def test_different_key_creates_new_run(self, client):
        sid = import_session(client)["id"]
        pid = create_prompt(client)["id"]
        body = {"prompt_id": pid, "prompt_version": 1, "model": "mock",
                "sessions": [sid], "mock_script": [GOOD]}
        a = client.post("/api/runs", json=body,
                        headers={"Idempotency-Key": "k1"})
        b = client.post("/api/runs", json=body,
                        headers={"Idempotency-Key": "k2"})
        assert a.json()["id"] != b.json()["id"]
        assert len(client.get("/api/runs").json()) == 2

    def test_failures_are_not_cached(self, client):
        sid = import_session(client)["id"]
        pid = create_prompt(client)["id"]
        headers = {"Idempotency-Key": "retry-me"}
        bad = client.post("/api/runs", json={"prompt_id": pid},
                          headers=headers)
        assert bad.status_code == 400
        good = client.post("/api/runs", json={
            "prompt_id": pid, "prompt_version": 1, "model": "mock",
            "sessions": [sid], "mock_script": [GOOD]}, headers=headers)
        assert good.status_code == 202


class TestAnnotationRoutes:
    def test_human_label_round_trip(self, client):
        sid = import_session(client)["id"]
        pid = create_prompt(client)["id"]
        r = client.post("/api/annotations", json={
            "session_id": sid, "utterance_index": 0,
            "human_coder_id": "alice", "document": {"code": "other"},
            "prompt_id": pid, "prompt_version": 1})
        assert r.status_code == 201
        assert r.json()["source"] == "human:alice"
        view = client.get(f"/api/sessions/{sid}/annotations").json()
        assert view["sources"] == ["human:alice"]
        assert view["utterances"][0]["annotations"]["human:alice"] == {
            "code": "other"}

    def test_schema_violation_rejected_with_details(self, client):
        sid = import_session(client)["id"]
        pid = create_prompt(client)["id"]
        r = client.post("/api/annotations", json={
            "session_id": sid, "utterance_index": 0,
            "human_coder_id": "alice", "document": {"code": "nope"},
            "prompt_id": pid, "prompt_version": 1})
        assert r.status_code == 400
        details = r.json()["error"]["details"]
        assert details["errors"][0]["kind"] == "enum_violation"

    def test_source_filter_on_chat_view(self, client):
        sid = import_session(client)["id"]
        pid = create_prompt(client)["id"]
        for coder, code in (("alice", "other"), ("bob", "question")):
            client.post("/api/annotations", json={
                "session_id": sid, "utterance_index": 0,
                "human_coder_id": coder, "document": {"code": code},
                "prompt_id": pid, "prompt_version": 1})
        view = client.get(f"/api/sessions/{sid}/annotations",
                          params={"source": ["human:bob"]}).json()
        assert view["sources"] == ["human:bob"]


class TestRunsetRoutes:
    def seeded(self, client):
        sid = import_session(client)["id"]
        pid = create_prompt(client)["id"]
        run = finished_run(client, sid, pid)
        for i in range(3):
            client.post("/api/annotations", json={
                "session_id": sid, "utterance_index": i,
                "human_coder_id": "alice", "document": {"code": "question"},
                "prompt_id": pid, "prompt_version": 1})
        r = client.post("/api/runsets", json={
            "name": "rs", "members": [f"run:{run['id']}", "human:alice"],
            "target_field": "code", "reference": "human:alice"})
        assert r.status_code == 201
        return r.json()

    def test_member_validation(self, client):
        r = client.post("/api/runsets", json={
            "name": "rs", "members": ["run:ghost", "human:a"],
            "target_field": "code"})
        assert r.status_code == 404

    def test_evaluation_json(self, client):
        rs = self.seeded(client)
        report = client.get(f"/api/runsets/{rs['id']}/evaluation").json()
        assert report["members"] == rs["members"]
        assert report["kappa"][0][0] == 1.0
        assert report["agreement"][0][1] == 1.0
        assert "per_code" in report

    def test_evaluation_csv(self, client):
        rs = self.seeded(client)
        r = client.get(f"/api/runsets/{rs['id']}/evaluation.csv")
        assert r.status_code == 200
        assert r.headers["content-type"].startswith("text/csv")
        assert r.text.splitlines()[0].startswith("source,")
        r = client.get(f"/api/runsets/{rs['id']}/evaluation.csv",
                       params={"file": "kappa.csv"})
        assert r.status_code == 200
        missing = client.get(f"/api/runsets/{rs['id']}/evaluation.csv",
                             params={"file": "bogus.csv"})
        assert missing.status_code == 404
        assert "agreement.csv" in missing.json()["error"]["details"]["available"]
