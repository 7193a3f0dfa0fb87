"""PII detection over session utterances.

Detection is rule based: fixed regex patterns for machine-readable
identifiers (emails, phones, URLs, id numbers, dates) plus name matching
driven by a participant roster and self-introduction cue phrases. The
detector is total over arbitrary text and never mutates the session.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import InvalidInput, StateError
from ..model import DEID_RAW, PII_CATEGORIES, Session

_EMAIL = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)+")

# Scheme-ful URLs plus bare www. hosts; trailing sentence punctuation is
# trimmed after the match so "see https://x.org." keeps its period.
_URL = re.compile(r"(?:https?://|www\.)[^\s<>\"')\]]+", re.IGNORECASE)
_URL_TRAILING = ".,;:!?"

_PHONE = re.compile(
    r"""
    (?<![\w.-])
    (?:\+?\d{1,3}[\s.-])?          # optional country prefix
    (?:\(\d{3}\)[\s.-]?|\d{3}[\s.-])
    \d{3}[\s.-]\d{4}
    (?![\w-])
    |
    (?<![\w.-])\d{3}[\s.-]\d{4}(?![\w-])   # local seven-digit form
    """,
    re.VERBOSE,
)

_ID_NUMBER = re.compile(r"\b\d{3}-\d{2}-\d{4}\b|\b[A-Za-z]{0,2}\d{6,}\b")

_MONTH_ALT = (
    "January|February|March|April|May|June|July|August|September|October|"
    "November|December|Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sept|Sep|Oct|Nov|Dec"
)
_DATE = re.compile(
    r"\b\d{4}-\d{2}-\d{2}\b"
    r"|\b\d{1,2}/\d{1,2}/\d{2,4}\b"
    rf"|\b(?:{_MONTH_ALT})\.?\s+\d{{1,2}}(?:st|nd|rd|th)?(?:,\s*\d{{4}})?\b"
)

DEFAULT_PATTERNS: tuple[tuple[str, re.Pattern], ...] = (
    ("email", _EMAIL),
    ("url", _URL),
    ("phone", _PHONE),
    ("id_number", _ID_NUMBER),
    ("date", _DATE),
)

# Phrases that typically introduce a personal name in speech.
DEFAULT_CUE_PHRASES = (
    "my name is",
    "i'm",
    "i am",
    "this is",
    "call me",
    "name's",
)

# One to four capitalized tokens following a cue phrase.
_NAME_TOKEN = r"[A-Z][a-zA-Z'’-]*"
_NAME_SEQ = rf"{_NAME_TOKEN}(?:[ ]{_NAME_TOKEN}){{0,3}}"

# Resolution order when overlapping spans tie on length and position.
_CATEGORY_RANK = {c: i for i, c in enumerate(PII_CATEGORIES)}


@dataclass(frozen=True)
class Detection:
    """One PII hit in one utterance, spans in original-text coordinates."""

    category: str
    utterance_index: int
    char_start: int
    char_end: int
    surface: str


@dataclass(frozen=True)
class DetectionRuleSet:
    """Configurable inputs to detection.

    roster: known participant full names, matched case-insensitively both
    as whole names and as individual tokens.
    institutions: dictionary of organization names to match verbatim.
    """

    roster: tuple[str, ...] = ()
    cue_phrases: tuple[str, ...] = DEFAULT_CUE_PHRASES
    institutions: tuple[str, ...] = ()
    patterns: tuple[tuple[str, re.Pattern], ...] = DEFAULT_PATTERNS

    def __post_init__(self):
        for name in self.roster:
            if not isinstance(name, str) or not name.strip():
                raise InvalidInput("roster entries must be non-empty strings")
        for cat, _ in self.patterns:
            if cat not in PII_CATEGORIES:
                raise InvalidInput(f"unknown pattern category {cat!r}")


def _roster_regexes(roster: tuple[str, ...]) -> list[re.Pattern]:
    pats = []
    seen = set()
    for name in roster:
        tokens = name.split()
        if not tokens:
            continue
        whole = r"\b" + r"\s+".join(re.escape(t) for t in tokens) + r"\b"
        if whole not in seen:
            seen.add(whole)
            pats.append(re.compile(whole, re.IGNORECASE))
        for tok in tokens:
            # Single-token aliases; skip very short tokens to avoid
            # swallowing ordinary words like initials or "Al".
            if len(tok) < 3:
                continue
            single = r"\b" + re.escape(tok) + r"\b"
            if single not in seen:
                seen.add(single)
                pats.append(re.compile(single, re.IGNORECASE))
    return pats


def _cue_regexes(cue_phrases: tuple[str, ...]) -> list[re.Pattern]:
    pats = []
    for phrase in cue_phrases:
        if not phrase.strip():
            continue
        lead = r"\s+".join(re.escape(t) for t in phrase.split())
        # Case-insensitivity is scoped to the cue itself; the name tokens
        # must be genuinely capitalized or anything would match.
        pats.append(re.compile(rf"(?:(?<=\W)|^)(?i:{lead})\s+({_NAME_SEQ})"))
    return pats


def _institution_regexes(institutions: tuple[str, ...]) -> list[re.Pattern]:
    pats = []
    for inst in institutions:
        tokens = inst.split()
        if not tokens:
            continue
        pats.append(
            re.compile(
                r"\b" + r"\s+".join(re.escape(t) for t in tokens) + r"\b",
                re.IGNORECASE,
            )
        )
    return pats


def _pattern_candidates(text: str, rules: DetectionRuleSet) -> list[tuple[str, int, int]]:
    found = []
    for category, pattern in rules.patterns:
        for m in pattern.finditer(text):
            start, end = m.start(), m.end()
            if category == "url":
                while end > start and text[end - 1] in _URL_TRAILING:
                    end -= 1
            if end > start:
                found.append((category, start, end))
    return found


def _person_candidates(text: str,
                       roster_pats: list[re.Pattern],
                       cue_pats: list[re.Pattern]) -> list[tuple[str, int, int]]:
    found = []
    for pat in roster_pats:
        for m in pat.finditer(text):
            found.append(("person", m.start(), m.end()))
    for pat in cue_pats:
        for m in pat.finditer(text):
            # Group 1 is the name; the cue itself stays in the text.
            found.append(("person", m.start(1), m.end(1)))
    return found


def _resolve(candidates: list[tuple[str, int, int]]) -> list[tuple[str, int, int]]:
    """Keep a non-overlapping subset: longest span wins, then earliest
    start, then fixed category order. Deterministic for any input."""
    unique = sorted(set(candidates),
                    key=lambda c: (-(c[2] - c[1]), c[1], _CATEGORY_RANK[c[0]]))
    taken: list[tuple[str, int, int]] = []
    for cand in unique:
        _, start, end = cand
        if any(start < t_end and t_start < end for _, t_start, t_end in taken):
            continue
        taken.append(cand)
    return sorted(taken, key=lambda c: (c[1], c[2]))


def detect_pii(session: Session, rules: DetectionRuleSet) -> list[Detection]:
    """Scan every utterance and return non-overlapping detections sorted
    by (utterance_index, char_start)."""
    if session.deid_status != DEID_RAW:
        raise StateError(
            f"session {session.id} is already {session.deid_status}; detection runs on raw text"
        )
    roster_pats = _roster_regexes(rules.roster)
    cue_pats = _cue_regexes(rules.cue_phrases)
    inst_pats = _institution_regexes(rules.institutions)

    detections: list[Detection] = []
    for utt in session.utterances:
        text = utt.text
        candidates = _pattern_candidates(text, rules)
        candidates += _person_candidates(text, roster_pats, cue_pats)
        for pat in inst_pats:
            for m in pat.finditer(text):
                candidates.append(("institution", m.start(), m.end()))
        for category, start, end in _resolve(candidates):
            detections.append(Detection(
                category=category,
                utterance_index=utt.index,
                char_start=start,
                char_end=end,
                surface=text[start:end],
            ))
    return detections


def detection_to_doc(d: Detection) -> dict:
    return {
        "category": d.category,
        "utterance_index": d.utterance_index,
        "char_start": d.char_start,
        "char_end": d.char_end,
        "surface": d.surface,
    }
