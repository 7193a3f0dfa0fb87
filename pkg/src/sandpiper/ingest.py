"""Transcript ingestion: plaintext dialogue, CSV, and the canonical session
document format, plus the inverse export.

Parsing is lenient where a defect is recoverable (bad timestamp cell, stray
line) and records it in the IngestReport; only structural impossibilities
raise.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .errors import InvalidInput
from .model import (
    DEID_STATES,
    Participant,
    Session,
    Utterance,
    new_session,
    validate_session,
)

SESSION_FORMAT_TAG = "sandpiper.session.v1"

_DOC_KEYS = ("format", "id", "title", "participants", "deid_status", "utterances", "metadata")


@dataclass
class IngestReport:
    sessions_created: int = 0
    lines_skipped: list[tuple[int, str]] = field(default_factory=list)  # (line/row number, reason)
    warnings: list[tuple[str, str]] = field(default_factory=list)  # (location, message)

    def to_doc(self) -> dict:
        return {
            "sessions_created": self.sessions_created,
            "lines_skipped": [{"line": n, "reason": r} for n, r in self.lines_skipped],
            "warnings": [{"location": loc, "message": msg} for loc, msg in self.warnings],
        }


def _decode_utf8(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidInput(f"input is not valid UTF-8: {exc}") from None


def _split_speaker_line(line: str) -> tuple[str, str] | None:
    """Return (speaker, text) when the line looks like ``Speaker: text``."""
    if not line or line[0].isspace():
        return None
    idx = line.find(":")
    if idx <= 0:
        return None
    if line[idx + 1 : idx + 3] == "//":  # bare URL, not a speaker turn
        return None
    speaker = line[:idx].strip()
    if not speaker:
        return None
    return speaker, line[idx + 1 :].lstrip()


def parse_plaintext(data: bytes, title: str) -> tuple[Session, IngestReport]:
    """Parse ``Speaker: text`` dialogue; bare lines continue the previous turn."""
    text = _decode_utf8(data)
    report = IngestReport()
    turns: list[tuple[str, list[str]]] = []  # (speaker, text lines)

    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            report.lines_skipped.append((line_no, "blank line"))
            continue
        split = _split_speaker_line(line)
        if split is not None:
            speaker, first = split
            turns.append((speaker, [first]))
        elif turns:
            turns[-1][1].append(line.strip())
        else:
            report.lines_skipped.append((line_no, "no speaker prefix"))

    if not turns:
        raise InvalidInput("zero parseable utterances", details=report.to_doc())

    speakers: list[str] = []
    for speaker, _ in turns:
        if speaker not in speakers:
            speakers.append(speaker)

    session = new_session(
        title,
        speakers,
        [(speaker, "\n".join(lines)) for speaker, lines in turns],
        source_format="plaintext",
    )
    report.sessions_created = 1
    return session, report


def parse_csv(data: bytes, title: str) -> tuple[Session, IngestReport]:
    """Parse a CSV with ``speaker`` and ``text`` columns, optional ``timestamp``."""
    text = _decode_utf8(data)
    report = IngestReport()

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InvalidInput("missing header row") from None

    columns = {name.strip().casefold(): i for i, name in enumerate(header)}
    for required in ("speaker", "text"):
        if required not in columns:
            raise InvalidInput(f"missing required column '{required}'")
    ts_col = columns.get("timestamp")

    rows: list[tuple[str, str, float | None]] = []
    last_ts: float | None = None
    for row_no, row in enumerate(reader, start=2):
        if not any(cell.strip() for cell in row):
            report.lines_skipped.append((row_no, "blank row"))
            continue

        def cell(i: int | None) -> str:
            return row[i] if i is not None and i < len(row) else ""

        speaker = cell(columns["speaker"]).strip()
        if not speaker:
            report.lines_skipped.append((row_no, "empty speaker cell"))
            continue
        body = cell(columns["text"])

        timestamp: float | None = None
        raw_ts = cell(ts_col).strip()
        if raw_ts:
            try:
                timestamp = float(raw_ts)
            except ValueError:
                report.warnings.append((f"row {row_no}", f"malformed timestamp {raw_ts!r}, dropped"))
                timestamp = None
            if timestamp is not None and timestamp < 0:
                report.warnings.append((f"row {row_no}", f"negative timestamp {raw_ts!r}, dropped"))
                timestamp = None
            if timestamp is not None and last_ts is not None and timestamp < last_ts:
                report.warnings.append((f"row {row_no}", f"non-monotone timestamp {raw_ts!r}, dropped"))
                timestamp = None
        if timestamp is not None:
            last_ts = timestamp

        rows.append((speaker, body, timestamp))

    if not rows:
        raise InvalidInput("zero parseable utterances", details=report.to_doc())

    speakers: list[str] = []
    for speaker, _, _ in rows:
        if speaker not in speakers:
            speakers.append(speaker)

    session = new_session(title, speakers, rows, source_format="csv")
    report.sessions_created = 1
    return session, report


# --------------------------------------------------------------------------
# canonical session document
# --------------------------------------------------------------------------


def session_to_doc(s: Session) -> dict:
    """Canonical document form; optional fields are omitted, never null."""
    participants = []
    for p in s.participants:
        entry: dict = {"speaker_id": p.speaker_id}
        if p.role is not None:
            entry["role"] = p.role
        participants.append(entry)

    utterances = []
    for u in s.utterances:
        entry = {"index": u.index, "speaker_id": u.speaker_id}
        if u.timestamp is not None:
            entry["timestamp"] = u.timestamp
        entry["text"] = u.text
        utterances.append(entry)

    return {
        "format": SESSION_FORMAT_TAG,
        "id": s.id,
        "title": s.title,
        "participants": participants,
        "deid_status": s.deid_status,
        "utterances": utterances,
        "metadata": dict(s.metadata),
    }


def export_session_json(s: Session) -> bytes:
    """Deterministic serialization: same session, byte-identical output."""
    return (json.dumps(session_to_doc(s), ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def _fail(path: str, message: str):
    raise InvalidInput(f"{path}: {message}", details={"path": path})


def session_from_doc(doc) -> Session:
    """Parse the canonical document, checking structure and invariants.

    Structural violations raise InvalidInput with the path of the offending
    element; invariant violations cite the Session invariant.
    """
    if not isinstance(doc, dict):
        _fail("/", "expected an object")
    for key in _DOC_KEYS:
        if key not in doc:
            _fail(f"/{key}", "missing")
    for key in doc:
        if key not in _DOC_KEYS:
            _fail(f"/{key}", "unknown key")
    if doc["format"] != SESSION_FORMAT_TAG:
        _fail("/format", f"expected {SESSION_FORMAT_TAG!r}")
    if not isinstance(doc["id"], str) or not doc["id"]:
        _fail("/id", "expected a non-empty string")
    if not isinstance(doc["title"], str):
        _fail("/title", "expected a string")
    if doc["deid_status"] not in DEID_STATES:
        _fail("/deid_status", f"expected one of {'|'.join(DEID_STATES)}")

    if not isinstance(doc["participants"], list):
        _fail("/participants", "expected an array")
    participants = []
    for i, p in enumerate(doc["participants"]):
        where = f"/participants/{i}"
        if not isinstance(p, dict):
            _fail(where, "expected an object")
        if not isinstance(p.get("speaker_id"), str) or not p["speaker_id"]:
            _fail(f"{where}/speaker_id", "expected a non-empty string")
        role = p.get("role")
        if role is not None and not isinstance(role, str):
            _fail(f"{where}/role", "expected a string")
        if set(p) - {"speaker_id", "role"}:
            _fail(where, "unknown key")
        participants.append(Participant(speaker_id=p["speaker_id"], role=role))

    if not isinstance(doc["utterances"], list):
        _fail("/utterances", "expected an array")
    utterances = []
    for i, u in enumerate(doc["utterances"]):
        where = f"/utterances/{i}"
        if not isinstance(u, dict):
            _fail(where, "expected an object")
        if not isinstance(u.get("index"), int) or isinstance(u.get("index"), bool):
            _fail(f"{where}/index", "expected an integer")
        if not isinstance(u.get("speaker_id"), str):
            _fail(f"{where}/speaker_id", "expected a string")
        if not isinstance(u.get("text"), str):
            _fail(f"{where}/text", "expected a string")
        ts = u.get("timestamp")
        if ts is not None and (isinstance(ts, bool) or not isinstance(ts, (int, float))):
            _fail(f"{where}/timestamp", "expected a number")
        if set(u) - {"index", "speaker_id", "text", "timestamp"}:
            _fail(where, "unknown key")
        utterances.append(Utterance(index=u["index"], speaker_id=u["speaker_id"], text=u["text"], timestamp=ts))

    if not isinstance(doc["metadata"], dict) or any(
        not isinstance(k, str) or not isinstance(v, str) for k, v in doc["metadata"].items()
    ):
        _fail("/metadata", "expected a string-to-string map")

    session = Session(
        id=doc["id"],
        title=doc["title"],
        source_format="session-json",
        participants=tuple(participants),
        utterances=tuple(utterances),
        deid_status=doc["deid_status"],
        metadata=dict(doc["metadata"]),
    )
    violations = validate_session(session)
    if violations:
        raise InvalidInput(
            "session invariant violated: " + "; ".join(violations),
            details={"violations": violations},
        )
    return session


def parse_session_json(data: bytes) -> Session:
    text = _decode_utf8(data)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"/: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return session_from_doc(doc)
