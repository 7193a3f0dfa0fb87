import csv
import io
import json
import random

import pytest

from sandpiper.errors import InvalidInput
from sandpiper.ingest import (
    SESSION_FORMAT_TAG,
    export_session_json,
    parse_csv,
    parse_plaintext,
    parse_session_json,
    session_from_doc,
    session_to_doc,
)
from sandpiper.model import new_session

import genlib


class TestPlaintext:
    def test_basic_dialogue(self):
        data = b"alice: Hello there.\nbob: Hi!\nalice: How are you?"
        session, report = parse_plaintext(data, "greeting")
        assert [u.speaker_id for u in session.utterances] == ["alice", "bob", "alice"]
        assert session.utterances[0].text == "Hello there."
        assert [p.speaker_id for p in session.participants] == ["alice", "bob"]
        assert session.title == "greeting"
        assert report.sessions_created == 1

    def test_continuation_lines_join_previous_turn(self):
        data = b"a: first line\nsecond line\nb: next turn"
        session, _ = parse_plaintext(data, "t")
        assert session.utterances[0].text == "first line\nsecond line"
        assert len(session.utterances) == 2

    def test_blank_lines_skipped_and_reported(self):
        data = b"a: one\n\n\nb: two"
        session, report = parse_plaintext(data, "t")
        assert len(session.utterances) == 2
        assert [n for n, _ in report.lines_skipped] == [2, 3]

    def test_orphan_lines_before_any_turn_reported(self):
        data = b"no prefix here\na: real turn"
        session, report = parse_plaintext(data, "t")
        assert len(session.utterances) == 1
        assert report.lines_skipped == [(1, "no speaker prefix")]

    def test_url_line_is_not_a_speaker(self):
        data = b"a: look at this\nhttps://example.org/path"
        session, _ = parse_plaintext(data, "t")
        assert len(session.utterances) == 1
        assert "https://example.org/path" in session.utterances[0].text

    def test_colon_in_text_preserved(self):
        session, _ = parse_plaintext(b"a: note: this matters", "t")
        assert session.utterances[0].text == "note: this matters"

    def test_nothing_parseable_raises(self):
        with pytest.raises(InvalidInput, match="zero parseable"):
            parse_plaintext(b"\n\n", "t")

    def test_invalid_utf8_raises(self):
        with pytest.raises(InvalidInput, match="UTF-8"):
            parse_plaintext(b"a: \xff\xfe", "t")


def csv_bytes(rows, header=("speaker", "text", "timestamp")) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


class TestCsv:
    def test_basic(self):
        data = csv_bytes([("a", "one", "1.5"), ("b", "two", "2.0")])
        session, _ = parse_csv(data, "t")
        assert [u.text for u in session.utterances] == ["one", "two"]
        assert session.utterances[0].timestamp == 1.5

    def test_text_preserved_verbatim(self):
        tricky = 'she said, "wait"\nthen left,, really'
        data = csv_bytes([("a", tricky, "")])
        session, _ = parse_csv(data, "t")
        assert session.utterances[0].text == tricky

    def test_missing_column_raises(self):
        with pytest.raises(InvalidInput, match="required column 'text'"):
            parse_csv(b"speaker,words\na,hi\n", "t")

    def test_missing_header_raises(self):
        with pytest.raises(InvalidInput, match="header"):
            parse_csv(b"", "t")

    def test_header_names_case_insensitive(self):
        session, _ = parse_csv(b"Speaker,Text\na,hi\n", "t")
        assert session.utterances[0].text == "hi"

    def test_bad_timestamps_dropped_with_warning(self):
        data = csv_bytes([
            ("a", "w", "soon"),
            ("a", "x", "-3"),
            ("a", "y", "10"),
            ("a", "z", "4"),
        ])
        session, report = parse_csv(data, "t")
        stamps = [u.timestamp for u in session.utterances]
        assert stamps == [None, None, 10.0, None]
        messages = [m for _, m in report.warnings]
        assert any("malformed" in m for m in messages)
        assert any("negative" in m for m in messages)
        assert any("non-monotone" in m for m in messages)

    def test_blank_and_speakerless_rows_skipped(self):
        data = csv_bytes([("a", "one", ""), ("", "", ""), ("", "orphan", "")])
        session, report = parse_csv(data, "t")
        assert len(session.utterances) == 1
        reasons = [r for _, r in report.lines_skipped]
        assert "blank row" in reasons
        assert "empty speaker cell" in reasons

    def test_all_rows_bad_raises(self):
        with pytest.raises(InvalidInput, match="zero parseable"):
            parse_csv(b"speaker,text\n,orphan\n", "t")


class TestCanonicalDocument:
    def session(self):
        return new_session(
            "study débrief",
            [("interviewer", "staff"), "p01"],
            [("interviewer", "So, how did it go?", 0.0),
             ("p01", "Pretty well,\nI think."),
             ("interviewer", "Great.", 14.25)],
            metadata={"wave": "2"},
        )

    def test_doc_round_trip_preserves_everything(self):
        s = self.session()
        back = session_from_doc(session_to_doc(s))
        assert back.id == s.id
        assert back.title == s.title
        assert back.participants == s.participants
        assert back.utterances == s.utterances
        assert back.metadata == s.metadata

    def test_doc_shape(self):
        doc = session_to_doc(self.session())
        assert doc["format"] == SESSION_FORMAT_TAG
        assert "timestamp" not in doc["utterances"][1]
        assert doc["participants"][1] == {"speaker_id": "p01"}

    def test_export_is_deterministic(self):
        s = self.session()
        assert export_session_json(s) == export_session_json(s)

    def test_export_parse_export_identity(self):
        s = self.session()
        first = export_session_json(s)
        second = export_session_json(parse_session_json(first))
        assert first == second

    def test_bad_documents_rejected(self):
        good = session_to_doc(self.session())
        for mutate, fragment in (
            (lambda d: d.update(format="v0"), "/format"),
            (lambda d: d.update(extra=1), "/extra"),
            (lambda d: d.pop("title"), "/title"),
            (lambda d: d.update(deid_status="gone"), "/deid_status"),
            (lambda d: d["utterances"][0].update(index=9), "invariant"),
            (lambda d: d["utterances"][0].update(speaker_id="ghost"), "invariant"),
            (lambda d: d.update(metadata={"k": 1}), "/metadata"),
        ):
            doc = json.loads(json.dumps(good))
            mutate(doc)
            with pytest.raises(InvalidInput, match=fragment):
                session_from_doc(doc)

    def test_not_json(self):
        with pytest.raises(InvalidInput, match="not valid JSON"):
            parse_session_json(b"{nope")


def test_random_sessions_round_trip():
    rng = random.Random(1234)
    for _ in range(60):
        title, speakers, utterances, metadata = genlib.random_session_parts(rng)
        s = new_session(title, speakers, utterances, metadata=metadata)
        first = export_session_json(s)
        second = export_session_json(parse_session_json(first))
        assert first == second
