"""Core domain types.

All types here are immutable value objects: constructors validate, and any
"mutation" produces a new value. Durable state lives in the store module.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import InvalidInput

SOURCE_FORMATS = ("plaintext", "csv", "session-json")

DEID_RAW = "raw"
DEID_MASKED = "masked"
DEID_VERIFIED = "verified"
DEID_STATES = (DEID_RAW, DEID_MASKED, DEID_VERIFIED)

RUN_QUEUED = "queued"
RUN_RUNNING = "running"
RUN_COMPLETED = "completed"
RUN_COMPLETED_WITH_ERRORS = "completed_with_errors"
RUN_FAILED = "failed"
RUN_CANCELLED = "cancelled"
RUN_STATES = (
    RUN_QUEUED,
    RUN_RUNNING,
    RUN_COMPLETED,
    RUN_COMPLETED_WITH_ERRORS,
    RUN_FAILED,
    RUN_CANCELLED,
)

PII_CATEGORIES = ("person", "email", "phone", "id_number", "url", "institution", "date")


# --------------------------------------------------------------------------
# ids & time
# --------------------------------------------------------------------------

_B32 = "0123456789abcdefghjkmnpqrstvwxyz"
_id_lock = threading.Lock()
_id_last_ms = 0
_id_counter = 0


def _b32_encode(value: int, width: int) -> str:
    chars = []
    for _ in range(width):
        chars.append(_B32[value & 31])
        value >>= 5
    return "".join(reversed(chars))


def new_id(prefix: str = "") -> str:
    """Opaque globally-unique id, lexicographically sortable by creation time.

    Layout: 10 chars of millisecond timestamp, 4 chars of an in-process
    sequence (so ids minted in the same millisecond still sort by creation
    order), 12 chars of randomness.
    """
    global _id_last_ms, _id_counter
    with _id_lock:
        ms = time.time_ns() // 1_000_000
        if ms <= _id_last_ms:
            ms = _id_last_ms
            _id_counter += 1
        else:
            _id_last_ms = ms
            _id_counter = 0
        seq = _id_counter
    rand = int.from_bytes(os.urandom(8), "big") & ((1 << 60) - 1)
    return f"{prefix}{_b32_encode(ms, 10)}{_b32_encode(seq, 4)}{_b32_encode(rand, 12)}"


def now_iso() -> str:
    """Current UTC time as an ISO-8601 string with millisecond precision."""
    stamp = datetime.now(timezone.utc).isoformat(timespec="milliseconds")
    return stamp.replace("+00:00", "Z")


# --------------------------------------------------------------------------
# sessions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Participant:
    speaker_id: str
    role: str | None = None


@dataclass(frozen=True)
class Utterance:
    index: int
    speaker_id: str
    text: str
    timestamp: float | None = None


@dataclass(frozen=True)
class Session:
    """Canonical ordered transcript: one record per speaker turn."""

    id: str
    title: str
    source_format: str
    participants: tuple[Participant, ...]
    utterances: tuple[Utterance, ...]
    deid_status: str = DEID_RAW
    metadata: dict = field(default_factory=dict)

    def speaker_ids(self) -> set[str]:
        return {p.speaker_id for p in self.participants}


def new_session(
    title: str,
    participants,
    utterances,
    *,
    source_format: str = "plaintext",
    session_id: str | None = None,
    metadata: dict | None = None,
) -> Session:
    """Build a Session from raw parts, renumbering utterances 0..n-1.

    ``participants`` items may be Participant, (speaker_id, role) pairs, or
    bare speaker_id strings. ``utterances`` items may be Utterance values
    (whose indices are ignored) or (speaker_id, text[, timestamp]) tuples.
    Input order is preserved; the result always satisfies validate_session.
    """
    parts: list[Participant] = []
    for p in participants:
        if isinstance(p, Participant):
            parts.append(p)
        elif isinstance(p, str):
            parts.append(Participant(speaker_id=p))
        else:
            sid, role = (p[0], p[1]) if len(p) > 1 else (p[0], None)
            parts.append(Participant(speaker_id=sid, role=role))

    utts: list[Utterance] = []
    for i, u in enumerate(utterances):
        if isinstance(u, Utterance):
            utts.append(Utterance(index=i, speaker_id=u.speaker_id, text=u.text, timestamp=u.timestamp))
        else:
            speaker_id, text = u[0], u[1]
            timestamp = u[2] if len(u) > 2 else None
            utts.append(Utterance(index=i, speaker_id=speaker_id, text=text, timestamp=timestamp))

    if not utts:
        raise InvalidInput("empty session: at least one utterance is required")

    known = {p.speaker_id for p in parts}
    for u in utts:
        if u.speaker_id not in known:
            raise InvalidInput(f"speaker {u.speaker_id!r} not in participants")

    last_ts = None
    for u in utts:
        if u.timestamp is None:
            continue
        if u.timestamp < 0:
            raise InvalidInput(f"negative timestamp at index {u.index}")
        if last_ts is not None and u.timestamp < last_ts:
            raise InvalidInput(f"non-monotone timestamp at index {u.index}")
        last_ts = u.timestamp

    if source_format not in SOURCE_FORMATS:
        raise InvalidInput(f"unknown source_format {source_format!r}")

    return Session(
        id=session_id or new_id("ses_"),
        title=title,
        source_format=source_format,
        participants=tuple(parts),
        utterances=tuple(utts),
        deid_status=DEID_RAW,
        metadata=dict(metadata or {}),
    )


def validate_session(s: Session) -> list[str]:
    """Return human-readable invariant violations, [] when well-formed."""
    violations: list[str] = []
    known = s.speaker_ids()

    for i, u in enumerate(s.utterances):
        if u.index != i:
            violations.append(f"utterance index mismatch at position {i}: found {u.index}")
        if u.speaker_id not in known:
            violations.append(f"unknown speaker {u.speaker_id!r} at index {i}")

    last_ts = None
    for u in s.utterances:
        if u.timestamp is None:
            continue
        if u.timestamp < 0:
            violations.append(f"negative timestamp at index {u.index}")
            continue
        if last_ts is not None and u.timestamp < last_ts:
            violations.append(f"non-monotone timestamp at index {u.index}")
        last_ts = u.timestamp

    if s.deid_status not in DEID_STATES:
        violations.append(f"unknown deid_status {s.deid_status!r}")
    if s.source_format not in SOURCE_FORMATS:
        violations.append(f"unknown source_format {s.source_format!r}")
    if not s.utterances:
        violations.append("empty session")

    return violations


# --------------------------------------------------------------------------
# coding schemas
# --------------------------------------------------------------------------

FIELD_TYPES = ("string", "boolean", "enum", "number", "array")


@dataclass(frozen=True)
class ValueSpec:
    """Type constraint for a single value position.

    ``values`` applies to enum, ``minimum``/``maximum`` to number, and
    ``element`` to array; all other combinations are rejected.
    """

    type: str
    values: tuple[str, ...] | None = None
    minimum: float | None = None
    maximum: float | None = None
    element: "ValueSpec | None" = None

    def __post_init__(self):
        if self.type not in FIELD_TYPES:
            raise InvalidInput(f"unknown field type {self.type!r}")
        if self.type == "enum":
            if not self.values:
                raise InvalidInput("enum requires a non-empty value list")
            if len(set(self.values)) != len(self.values):
                raise InvalidInput("enum values must be distinct")
            if any(not isinstance(v, str) or not v for v in self.values):
                raise InvalidInput("enum values must be non-empty strings")
        elif self.values is not None:
            raise InvalidInput(f"'values' is only valid for enum, not {self.type}")
        if self.type == "number":
            if self.minimum is not None and self.maximum is not None and self.minimum > self.maximum:
                raise InvalidInput("number min must be <= max")
        elif self.minimum is not None or self.maximum is not None:
            raise InvalidInput(f"'min'/'max' are only valid for number, not {self.type}")
        if self.type == "array":
            if self.element is None:
                raise InvalidInput("array requires an element spec")
        elif self.element is not None:
            raise InvalidInput(f"'element' is only valid for array, not {self.type}")


@dataclass(frozen=True)
class FieldSpec:
    name: str
    spec: ValueSpec
    required: bool = True

    def __post_init__(self):
        if not self.name:
            raise InvalidInput("field name must be non-empty")


@dataclass(frozen=True)
class CodingSchema:
    """A machine-checkable codebook: ordered named fields with value specs."""

    name: str
    fields: tuple[FieldSpec, ...]

    def __post_init__(self):
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise InvalidInput("field names must be distinct")

    def field(self, name: str) -> FieldSpec | None:
        for f in self.fields:
            if f.name == name:
                return f
        return None


# --------------------------------------------------------------------------
# prompts
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PromptVersion:
    version: int
    instructions: str
    schema: CodingSchema
    created_at: str
    frozen: bool = False
    content_hash: str = ""


@dataclass(frozen=True)
class Prompt:
    id: str
    name: str
    versions: tuple[PromptVersion, ...] = ()

    def version(self, number: int) -> PromptVersion | None:
        for v in self.versions:
            if v.version == number:
                return v
        return None


# --------------------------------------------------------------------------
# runs & annotations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RunParams:
    temperature: float = 0.0
    max_retries: int = 3
    context_window: int = 10
    concurrency: int = 4

    def __post_init__(self):
        if self.temperature < 0:
            raise InvalidInput("temperature must be >= 0")
        if self.max_retries < 0:
            raise InvalidInput("max_retries must be >= 0")
        if self.context_window < 0:
            raise InvalidInput("context_window must be >= 0")
        if self.concurrency < 1:
            raise InvalidInput("concurrency must be >= 1")


@dataclass(frozen=True)
class RunCounts:
    total_items: int = 0
    succeeded: int = 0
    failed_items: int = 0


@dataclass(frozen=True)
class Run:
    id: str
    prompt_id: str
    prompt_version: int
    model_id: str
    session_ids: tuple[str, ...]
    granularity: str = "utterance"  # or "session"
    params: RunParams = RunParams()
    state: str = RUN_QUEUED
    counts: RunCounts = RunCounts()

    def __post_init__(self):
        if not self.session_ids:
            raise InvalidInput("a run needs at least one session")
        if self.granularity not in ("utterance", "session"):
            raise InvalidInput(f"unknown granularity {self.granularity!r}")
        if self.state not in RUN_STATES:
            raise InvalidInput(f"unknown run state {self.state!r}")


def source_key(*, run_id: str | None = None, human_coder_id: str | None = None) -> str:
    """Canonical label-source key: 'run:<id>' or 'human:<coder>'."""
    if (run_id is None) == (human_coder_id is None):
        raise InvalidInput("exactly one of run_id / human_coder_id is required")
    return f"run:{run_id}" if run_id is not None else f"human:{human_coder_id}"


@dataclass(frozen=True)
class Annotation:
    id: str
    session_id: str
    utterance_index: int
    source: str  # source_key() form
    document: dict
    attempts: int
    created_at: str
    raw_response_digest: str | None = None  # absent for human labels

    def __post_init__(self):
        if self.attempts < 1:
            raise InvalidInput("attempts must be >= 1")
        if not (self.source.startswith("run:") or self.source.startswith("human:")):
            raise InvalidInput(f"malformed source {self.source!r}")


# --------------------------------------------------------------------------
# run-sets & agreement
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RunSet:
    id: str
    name: str
    members: tuple[str, ...]  # source_key() forms
    target_field: str
    reference: str | None = None  # one of members, designated ground truth

    def __post_init__(self):
        if len(self.members) < 2:
            raise InvalidInput("a run-set needs at least two members")
        if len(set(self.members)) != len(self.members):
            raise InvalidInput("run-set members must be distinct")
        if self.reference is not None and self.reference not in self.members:
            raise InvalidInput("reference must be one of the members")
        if not self.target_field:
            raise InvalidInput("target_field must be non-empty")


@dataclass(frozen=True)
class AgreementStats:
    """Chance-corrected pairwise agreement between two label sources."""

    observed_agreement: float  # p_o in [0, 1]
    expected_agreement: float  # p_e in [0, 1]
    kappa: float  # in [-1, 1]
    n_items: int


# --------------------------------------------------------------------------
# de-identification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MaskOccurrence:
    utterance_index: int
    char_start: int
    char_end: int


@dataclass(frozen=True)
class MaskEntry:
    category: str
    originals: tuple[str, ...]  # distinct surface forms sharing one normalized key
    surrogate: str
    occurrences: tuple[MaskOccurrence, ...]  # spans in the *original* text


@dataclass(frozen=True)
class MaskMap:
    """Re-identification key for one masked session. Never leaves the
    protected store collection without the privileged flag."""

    session_id: str
    entries: tuple[MaskEntry, ...]
