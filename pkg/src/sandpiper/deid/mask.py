"""Surrogate substitution over detected PII spans.

Masked text keeps its natural shape: names become other names, phones
become other phones, and so on. Every surrogate is a pure function of
(seed, session id, category, normalized original), so re-running a mask
with the same seed reproduces byte-identical output, and the same entity
always maps to the same surrogate within a session.
"""

from __future__ import annotations

import hashlib
import re

from ..errors import InvalidInput, StateError
from ..model import (
    DEID_MASKED,
    DEID_RAW,
    MaskEntry,
    MaskMap,
    MaskOccurrence,
    Participant,
    Session,
    Utterance,
)
from .pools import GIVEN_NAMES, INSTITUTIONS, MONTHS, SURNAMES
from .rules import Detection

_PATH_ALPHABET = "abcdefghjkmnpqrstuvwxyz23456789"


def normalize_original(text: str) -> str:
    """Canonical key for matching the same entity across mentions:
    case-insensitive with runs of whitespace collapsed to one space."""
    return " ".join(text.casefold().split())


class _Draw:
    """Deterministic value source seeded from the identity of one
    masked entity. Counter-extended SHA-256, no global RNG state."""

    def __init__(self, *parts: str | bytes):
        raw = [p.encode("utf-8") if isinstance(p, str) else p for p in parts]
        self._base = hashlib.sha256(b"\x1f".join(raw)).digest()
        self._counter = 0
        self._buf = b""

    def _take(self, n: int) -> bytes:
        while len(self._buf) < n:
            block = hashlib.sha256(self._base + self._counter.to_bytes(4, "big")).digest()
            self._counter += 1
            self._buf += block
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def randint(self, lo: int, hi: int) -> int:
        return lo + int.from_bytes(self._take(4), "big") % (hi - lo + 1)

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]


def _person_surrogate(draw: _Draw, normalized: str) -> str:
    given = draw.choice(GIVEN_NAMES)
    if len(normalized.split()) >= 2:
        return f"{given} {draw.choice(SURNAMES)}"
    return given


def _email_surrogate(draw: _Draw, normalized: str) -> str:
    local = f"{draw.choice(GIVEN_NAMES).lower()}.{draw.choice(SURNAMES).lower()}{draw.randint(1, 99)}"
    return f"{local}@example.{draw.choice(('org', 'net', 'com'))}"


def _digit_shape_surrogate(draw: _Draw, surface: str, lead_nonzero: bool) -> str:
    out = []
    i, n = 0, len(surface)
    while i < n:
        ch = surface[i]
        if ch.isdigit():
            j = i
            while j < n and surface[j].isdigit():
                j += 1
            for k in range(i, j):
                if k == i and lead_nonzero and j - i >= 3:
                    out.append(str(draw.randint(2, 9)))
                else:
                    out.append(str(draw.randint(0, 9)))
            i = j
        else:
            if ch.isalpha():
                pool = "ABCDEFGHJKLMNPRSTUVWXYZ"
                rep = draw.choice(pool)
                out.append(rep if ch.isupper() else rep.lower())
            else:
                out.append(ch)
            i += 1
    return "".join(out)


def _phone_surrogate(draw: _Draw, surface: str) -> str:
    return _digit_shape_surrogate(draw, surface, lead_nonzero=True)


def _id_surrogate(draw: _Draw, surface: str) -> str:
    return _digit_shape_surrogate(draw, surface, lead_nonzero=False)


def _url_surrogate(draw: _Draw, surface: str) -> str:
    token = "".join(draw.choice(_PATH_ALPHABET) for _ in range(8))
    host = f"www.example.{draw.choice(('org', 'net', 'com'))}"
    low = surface.lower()
    if low.startswith("https://"):
        return f"https://{host}/{token}"
    if low.startswith("http://"):
        return f"http://{host}/{token}"
    return f"{host}/{token}"


def _date_surrogate(draw: _Draw, surface: str) -> str:
    year = draw.randint(2015, 2024)
    month = draw.randint(1, 12)
    day = draw.randint(1, 28)
    if re.fullmatch(r"\d{4}-\d{2}-\d{2}", surface):
        return f"{year:04d}-{month:02d}-{day:02d}"
    m = re.fullmatch(r"\d{1,2}/\d{1,2}/(\d{2,4})", surface)
    if m:
        yr = str(year) if len(m.group(1)) == 4 else f"{year % 100:02d}"
        return f"{month}/{day}/{yr}"
    out = f"{MONTHS[month - 1]} {day}"
    if "," in surface or re.search(r"\d{4}", surface):
        out += f", {year}"
    return out


def _institution_surrogate(draw: _Draw, normalized: str) -> str:
    return draw.choice(INSTITUTIONS)


def _generate(category: str, draw: _Draw, surface: str, normalized: str) -> str:
    if category == "person":
        return _person_surrogate(draw, normalized)
    if category == "email":
        return _email_surrogate(draw, normalized)
    if category == "phone":
        return _phone_surrogate(draw, surface)
    if category == "id_number":
        return _id_surrogate(draw, surface)
    if category == "url":
        return _url_surrogate(draw, surface)
    if category == "date":
        return _date_surrogate(draw, surface)
    if category == "institution":
        return _institution_surrogate(draw, normalized)
    raise InvalidInput(f"no surrogate generator for category {category!r}")


def _check_bounds(session: Session, detections: list[Detection]) -> None:
    by_index: dict[int, list[Detection]] = {}
    texts = {u.index: u.text for u in session.utterances}
    for d in detections:
        if d.utterance_index not in texts:
            raise InvalidInput(f"detection references unknown utterance {d.utterance_index}")
        text = texts[d.utterance_index]
        if not (0 <= d.char_start < d.char_end <= len(text)):
            raise InvalidInput(
                f"detection span {d.char_start}..{d.char_end} outside utterance {d.utterance_index}"
            )
        if text[d.char_start:d.char_end] != d.surface:
            raise InvalidInput(
                f"detection surface mismatch at utterance {d.utterance_index}"
            )
        by_index.setdefault(d.utterance_index, []).append(d)
    for idx, group in by_index.items():
        group.sort(key=lambda d: d.char_start)
        for prev, cur in zip(group, group[1:]):
            if cur.char_start < prev.char_end:
                raise InvalidInput(f"overlapping detections in utterance {idx}")


def mask_session(session: Session, detections: list[Detection],
                 *, seed: str | bytes) -> tuple[Session, MaskMap]:
    """Replace every detected span with a deterministic surrogate.

    Returns the masked session (deid_status flipped to masked) and the
    MaskMap needed to audit or reverse the substitution. The input
    session is not modified.
    """
    if session.deid_status != DEID_RAW:
        raise StateError(f"session {session.id} is already {session.deid_status}")
    _check_bounds(session, detections)
    seed_b = seed.encode("utf-8") if isinstance(seed, str) else seed

    # Group mentions of the same entity (same category + normalized text).
    groups: dict[tuple[str, str], dict] = {}
    for d in detections:
        key = (d.category, normalize_original(d.surface))
        g = groups.setdefault(key, {"surfaces": set(), "occurrences": []})
        g["surfaces"].add(d.surface)
        g["occurrences"].append(d)

    # No surrogate may collide, under normalization, with any original in
    # the session or any surrogate already handed out; person surrogates
    # additionally keep each token clear of originals so that partial
    # mentions stay consistent and verification stays clean.
    taken = {norm for (_, norm) in groups}
    taken.update(normalize_original(p.speaker_id) for p in session.participants)

    def allocate(category: str, surface: str, normalized: str) -> str:
        for salt in range(64):
            draw = _Draw(seed_b, session.id, category, normalized, str(salt))
            cand = _generate(category, draw, surface, normalized)
            cand_norm = normalize_original(cand)
            if cand_norm == normalized or cand_norm in taken:
                continue
            if category == "person" and any(t in taken for t in cand_norm.split()):
                continue
            taken.add(cand_norm)
            if category == "person":
                taken.update(cand_norm.split())
            return cand
        raise StateError(f"could not allocate a distinct {category} surrogate")

    surrogate_by_key: dict[tuple[str, str], str] = {}
    person_token_map: dict[str, str] = {}

    # Multi-token person names first so single-token mentions of the same
    # person can reuse the matching token of the full surrogate.
    person_keys = sorted(k for k in groups if k[0] == "person")
    for key in [k for k in person_keys if len(k[1].split()) >= 2]:
        surrogate = allocate("person", next(iter(groups[key]["surfaces"])), key[1])
        surrogate_by_key[key] = surrogate
        for orig_tok, sur_tok in zip(key[1].split(), surrogate.split()):
            person_token_map.setdefault(orig_tok, sur_tok)
        # A longer original than surrogate maps leftovers to the surname.
        extra = key[1].split()[len(surrogate.split()):]
        for orig_tok in extra:
            person_token_map.setdefault(orig_tok, surrogate.split()[-1])
    for key in [k for k in person_keys if len(k[1].split()) < 2]:
        linked = person_token_map.get(key[1])
        if linked is not None:
            surrogate_by_key[key] = linked
        else:
            surrogate = allocate("person", next(iter(groups[key]["surfaces"])), key[1])
            surrogate_by_key[key] = surrogate
            person_token_map.setdefault(key[1], surrogate)

    for key in sorted(k for k in groups if k[0] != "person"):
        category, normalized = key
        # Shape-preserving categories key their surrogate off one
        # representative surface; pick deterministically.
        surface = sorted(groups[key]["surfaces"])[0]
        surrogate_by_key[key] = allocate(category, surface, normalized)

    # Splice replacements right to left so earlier spans keep their offsets.
    new_texts: dict[int, str] = {u.index: u.text for u in session.utterances}
    per_utt: dict[int, list[tuple[Detection, str]]] = {}
    for key, g in groups.items():
        for d in g["occurrences"]:
            per_utt.setdefault(d.utterance_index, []).append((d, surrogate_by_key[key]))
    for idx, items in per_utt.items():
        text = new_texts[idx]
        for d, surrogate in sorted(items, key=lambda p: -p[0].char_start):
            text = text[:d.char_start] + surrogate + text[d.char_end:]
        new_texts[idx] = text

    # Speaker ids that are themselves detected names get the same surrogate.
    speaker_map: dict[str, str] = {}
    for p in session.participants:
        norm = normalize_original(p.speaker_id)
        key = ("person", norm)
        if key in surrogate_by_key:
            speaker_map[p.speaker_id] = surrogate_by_key[key]
        elif norm in person_token_map:
            speaker_map[p.speaker_id] = person_token_map[norm]

    new_participants = []
    seen_ids = set()
    for p in session.participants:
        sid = speaker_map.get(p.speaker_id, p.speaker_id)
        if sid in seen_ids:
            continue
        seen_ids.add(sid)
        new_participants.append(Participant(speaker_id=sid, role=p.role))

    new_utterances = tuple(
        Utterance(
            index=u.index,
            speaker_id=speaker_map.get(u.speaker_id, u.speaker_id),
            text=new_texts[u.index],
            timestamp=u.timestamp,
        )
        for u in session.utterances
    )

    masked = Session(
        id=session.id,
        title=session.title,
        source_format=session.source_format,
        participants=tuple(new_participants),
        utterances=new_utterances,
        deid_status=DEID_MASKED,
        metadata=dict(session.metadata),
    )

    entries = []
    for key in sorted(groups):
        category, _ = key
        g = groups[key]
        occurrences = tuple(
            MaskOccurrence(
                utterance_index=d.utterance_index,
                char_start=d.char_start,
                char_end=d.char_end,
            )
            for d in sorted(g["occurrences"], key=lambda d: (d.utterance_index, d.char_start))
        )
        entries.append(MaskEntry(
            category=category,
            originals=tuple(sorted(g["surfaces"])),
            surrogate=surrogate_by_key[key],
            occurrences=occurrences,
        ))
    return masked, MaskMap(session_id=session.id, entries=tuple(entries))


def maskmap_to_doc(m: MaskMap) -> dict:
    return {
        "session_id": m.session_id,
        "entries": [
            {
                "category": e.category,
                "originals": list(e.originals),
                "surrogate": e.surrogate,
                "occurrences": [
                    {
                        "utterance_index": o.utterance_index,
                        "char_start": o.char_start,
                        "char_end": o.char_end,
                    }
                    for o in e.occurrences
                ],
            }
            for e in m.entries
        ],
    }


def maskmap_from_doc(doc: dict) -> MaskMap:
    try:
        entries = tuple(
            MaskEntry(
                category=e["category"],
                originals=tuple(e["originals"]),
                surrogate=e["surrogate"],
                occurrences=tuple(
                    MaskOccurrence(
                        utterance_index=o["utterance_index"],
                        char_start=o["char_start"],
                        char_end=o["char_end"],
                    )
                    for o in e["occurrences"]
                ),
            )
            for e in doc["entries"]
        )
        return MaskMap(session_id=doc["session_id"], entries=entries)
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed mask map document: {exc}") from exc
