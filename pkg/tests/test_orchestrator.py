import json
import threading

import pytest

from sandpiper.errors import GatewayError, InvalidInput, PermissionDenied, StateError
from sandpiper.gateway import ChatReply, MockProvider
from sandpiper.ingest import session_to_doc
from sandpiper.model import (
    CodingSchema,
    FieldSpec,
    PromptVersion,
    RunParams,
    ValueSpec,
    new_session,
    now_iso,
)
from sandpiper.orchestrator import (
    ITEM_FAILED_GATEWAY,
    ITEM_FAILED_SCHEMA,
    ITEM_OK,
    ITEM_SKIPPED,
    annotate_item,
    annotate_session,
    build_messages,
    build_session_messages,
    execute_run,
)
from sandpiper.schema import validate_object

SCHEMA = CodingSchema(
    name="codes",
    fields=(
        FieldSpec("code", ValueSpec(type="enum", values=("question", "explanation", "other"))),
    ),
)

PV = PromptVersion(version=1, instructions="Code each utterance.",
                   schema=SCHEMA, created_at=now_iso())

GOOD = json.dumps({"code": "question"})
BAD = json.dumps({"code": "musing"})

SESSION = new_session("t", ["a", "b"], [
    ("a", "u0"), ("b", "u1"), ("a", "u2"), ("b", "u3"), ("a", "u4"),
])


class TestBuildMessages:
    def test_system_carries_instructions_and_schema(self):
        system, user = build_messages(PV, SESSION, 0, 10)
        assert system.role == "system"
        assert "Code each utterance." in system.content
        assert '"code" (required): one of question|explanation|other' in system.content
        assert user.content.endswith("Annotate this utterance:\na: u0")

    def test_context_window_limits_history(self):
        _, user = build_messages(PV, SESSION, 4, 2)
        assert "Transcript context:\na: u2\nb: u3\n" in user.content
        assert "u0" not in user.content
        assert "u1" not in user.content

    def test_zero_window_has_no_context_block(self):
        _, user = build_messages(PV, SESSION, 3, 0)
        assert "Transcript context" not in user.content

    def test_bad_focal_index(self):
        with pytest.raises(InvalidInput):
            build_messages(PV, SESSION, 99, 10)

    def test_session_granularity_lists_indexed_lines(self):
        system, user = build_session_messages(PV, SESSION)
        assert '"items"' in system.content
        assert "[0] a: u0" in user.content
        assert "[4] a: u4" in user.content


class TestRetryLoop:
    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_fails_k_times_then_succeeds(self, k):
        provider = MockProvider([BAD] * k + [GOOD])
        result = annotate_item(provider, "mock", PV, SESSION, 0,
                               RunParams(max_retries=3))
        assert result.status == ITEM_OK
        assert result.attempts == k + 1
        assert len(provider.requests) == k + 1
        assert validate_object(result.document, SCHEMA) == []
        for i in range(1, k + 1):
            messages = provider.requests[i].messages
            assert len(messages) == 2 + 2 * i
            assert messages[-2].role == "assistant"
            assert messages[-2].content == BAD
            assert messages[-1].role == "user"
            assert messages[-1].content.startswith(
                "Your reply did not conform to the required format.")

    def test_exhaustion_fails_schema(self):
        provider = MockProvider([BAD])
        result = annotate_item(provider, "mock", PV, SESSION, 0,
                               RunParams(max_retries=3))
        assert result.status == ITEM_FAILED_SCHEMA
        assert result.attempts == 4
        assert len(provider.requests) == 4
        assert result.document is None
        assert result.errors and result.errors[0]["kind"] == "enum_violation"

    def test_zero_retries_is_single_shot(self):
        provider = MockProvider([BAD, GOOD])
        result = annotate_item(provider, "mock", PV, SESSION, 0,
                               RunParams(max_retries=0))
        assert result.status == ITEM_FAILED_SCHEMA
        assert result.attempts == 1

    def test_prose_wrapped_reply_accepted(self):
        provider = MockProvider([f"Here you go:\n```json\n{GOOD}\n```"])
        result = annotate_item(provider, "mock", PV, SESSION, 0, RunParams())
        assert result.status == ITEM_OK
        assert result.document == {"code": "question"}

    def test_gateway_error_recorded(self):
        provider = MockProvider([GatewayError("downstream sad", code="transport_failure")])
        result = annotate_item(provider, "mock", PV, SESSION, 0, RunParams())
        assert result.status == ITEM_FAILED_GATEWAY
        assert "transport_failure" in result.message
        assert result.document is None

    def test_token_usage_accumulates_across_attempts(self):
        provider = MockProvider([BAD, GOOD])
        result = annotate_item(provider, "mock", PV, SESSION, 0, RunParams())
        expected = max(1, len(BAD) // 4) + max(1, len(GOOD) // 4)
        assert result.token_usage == expected


class TestSessionGranularity:
    def wrap(self, entries):
        return json.dumps({"items": entries})

    def items(self, labels):
        return [{"index": i, "code": label} for i, label in enumerate(labels)]

    def test_clean_items_reply(self):
        reply = self.wrap(self.items(["question"] * 5))
        provider = MockProvider([reply])
        result = annotate_session(provider, "mock", PV, SESSION, RunParams())
        assert result.status == ITEM_OK
        assert sorted(result.documents) == [0, 1, 2, 3, 4]
        assert result.documents[3] == {"code": "question"}

    @pytest.mark.parametrize("mangle, fragment", [
        (lambda items: items[:4], "missing_required"),
        (lambda items: items + [{"index": 0, "code": "other"}], "duplicate"),
        (lambda items: items + [{"index": 99, "code": "other"}], "range_violation"),
        (lambda items: [{"code": "other"}] + items[1:], "missing_required"),
    ])
    def test_wrapper_violations_feed_back(self, mangle, fragment):
        bad = self.wrap(mangle(self.items(["question"] * 5)))
        good = self.wrap(self.items(["other"] * 5))
        provider = MockProvider([bad, good])
        result = annotate_session(provider, "mock", PV, SESSION,
                                  RunParams(max_retries=1))
        assert result.status == ITEM_OK
        assert result.attempts == 2
        feedback = provider.requests[1].messages[-1].content
        assert fragment in feedback

    def test_element_errors_carry_item_paths(self):
        entries = self.items(["question"] * 5)
        entries[2]["code"] = "musing"
        provider = MockProvider([self.wrap(entries)])
        result = annotate_session(provider, "mock", PV, SESSION,
                                  RunParams(max_retries=0))
        assert result.status == ITEM_FAILED_SCHEMA
        assert any(e["path"] == "/items/2/code" for e in result.errors)


class FakeHttpProvider:
    is_mock = False

    def complete(self, request):
        return ChatReply(content=GOOD, model=request.model,
                         token_usage=1, latency_ms=0.0)


class TestPrivacyGuard:
    def test_raw_text_never_reaches_a_real_provider(self):
        with pytest.raises(PermissionDenied, match="raw"):
            annotate_item(FakeHttpProvider(), "m", PV, SESSION, 0, RunParams())
        with pytest.raises(PermissionDenied, match="raw"):
            annotate_session(FakeHttpProvider(), "m", PV, SESSION, RunParams())

    def test_mock_provider_may_see_raw_text(self):
        result = annotate_item(MockProvider([GOOD]), "mock", PV, SESSION, 0, RunParams())
        assert result.status == ITEM_OK


STORED = new_session("t", ["a", "b"], [
    ("a", "u0"), ("b", "u1"), ("a", "u2"), ("b", "u3"), ("a", "u4"),
], session_id="s1")


@pytest.fixture()
def run_setup(service):
    service.store.put("sessions", "s1", session_to_doc(STORED))
    prompt = service.create_prompt("p", "Code each utterance.", {
        "name": "codes",
        "fields": [{"name": "code", "type": "enum",
                    "values": ["question", "explanation", "other"]}],
    })

    def make_run(**kw):
        args = dict(prompt_id=prompt["id"], prompt_version=1, model_id="mock",
                    session_ids=["s1"], mock_script=["placeholder"])
        args.update(kw)
        return service.create_run(**args)

    return service, prompt, make_run


class TestExecuteRun:
    def test_happy_path_persists_annotations(self, run_setup):
        service, prompt, make_run = run_setup
        run = make_run()
        provider = MockProvider([GOOD])
        final = execute_run(service.store, provider, run["id"])
        assert final["state"] == "completed"
        assert final["counts"] == {"total_items": 5, "succeeded": 5, "failed_items": 0}
        assert final["started_at"] and final["finished_at"]
        annotations = service.store.query("annotations")
        assert len(annotations) == 5
        assert {a["source"] for a in annotations} == {f"run:{run['id']}"}
        assert all(a["document"] == {"code": "question"} for a in annotations)

    def test_partial_failure_state(self, run_setup):
        service, _, make_run = run_setup
        run = make_run(params=RunParams(max_retries=0, concurrency=1))
        provider = MockProvider([GOOD, BAD, GOOD, GOOD, GOOD])
        final = execute_run(service.store, provider, run["id"])
        assert final["state"] == "completed_with_errors"
        assert final["counts"]["succeeded"] == 4
        assert final["counts"]["failed_items"] == 1
        failed = [i for i in final["items"] if i["status"] == ITEM_FAILED_SCHEMA]
        assert len(failed) == 1 and failed[0]["errors"]
        assert len(service.store.query("annotations")) == 4

    def test_fatal_gateway_code_fails_run_and_skips_rest(self, run_setup):
        service, _, make_run = run_setup
        run = make_run()
        provider = MockProvider([GatewayError("not on the list", code="model_not_allowed")])
        final = execute_run(service.store, provider, run["id"])
        assert final["state"] == "failed"
        assert "model_not_allowed" in final["error"]
        statuses = [i["status"] for i in final["items"]]
        assert statuses.count(ITEM_FAILED_GATEWAY) == 1
        assert statuses.count(ITEM_SKIPPED) == 4
        assert service.store.query("annotations") == []

    def test_cancel_before_start_skips_everything(self, run_setup):
        service, _, make_run = run_setup
        run = make_run()
        event = threading.Event()
        event.set()
        final = execute_run(service.store, MockProvider([GOOD]), run["id"],
                            cancel_event=event)
        assert final["state"] == "cancelled"
        assert all(i["status"] == ITEM_SKIPPED for i in final["items"])

    def test_version_frozen_after_first_run(self, run_setup):
        service, prompt, make_run = run_setup
        assert service.get_prompt(prompt["id"])["versions"][0]["frozen"] is False
        execute_run(service.store, MockProvider([GOOD]), make_run()["id"])
        assert service.get_prompt(prompt["id"])["versions"][0]["frozen"] is True

    def test_non_queued_run_refused(self, run_setup):
        service, _, make_run = run_setup
        run = make_run()
        execute_run(service.store, MockProvider([GOOD]), run["id"])
        with pytest.raises(StateError, match="not queued"):
            execute_run(service.store, MockProvider([GOOD]), run["id"])

    def test_progress_callback_sees_every_item(self, run_setup):
        service, _, make_run = run_setup
        seen = []
        execute_run(service.store, MockProvider([GOOD]), make_run()["id"],
                    on_progress=seen.append)
        assert len(seen) == 5
        assert all(item["status"] == ITEM_OK for item in seen)

    def test_session_granularity_one_request_many_annotations(self, run_setup):
        service, _, make_run = run_setup
        run = make_run(granularity="session")
        reply = json.dumps({"items": [
            {"index": i, "code": "other"} for i in range(5)]})
        provider = MockProvider([reply])
        final = execute_run(service.store, provider, run["id"])
        assert final["state"] == "completed"
        assert final["counts"]["total_items"] == 1
        assert len(provider.requests) == 1
        assert len(service.store.query("annotations")) == 5
