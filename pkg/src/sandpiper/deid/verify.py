"""Post-mask verification.

Re-scans masked text with the same pattern rules, searches for any
original surface that survived substitution, and summarizes what was
masked. A clean report is the gate for marking a session verified.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import InvalidInput
from ..model import MaskMap, Session
from .rules import Detection, DetectionRuleSet, detect_pii


@dataclass(frozen=True)
class VerificationReport:
    session_id: str
    residual_hits: tuple[Detection, ...]
    leaked_originals: tuple[Detection, ...]
    counts_by_category: dict[str, int]
    status: str  # clean | findings

    def to_doc(self) -> dict:
        def hit_doc(d: Detection) -> dict:
            return {
                "category": d.category,
                "utterance_index": d.utterance_index,
                "char_start": d.char_start,
                "char_end": d.char_end,
                "surface": d.surface,
            }

        return {
            "session_id": self.session_id,
            "residual_hits": [hit_doc(d) for d in self.residual_hits],
            "leaked_originals": [hit_doc(d) for d in self.leaked_originals],
            "counts_by_category": dict(self.counts_by_category),
            "status": self.status,
        }


def _expected(surface: str, surrogates: list[str]) -> bool:
    s = surface.casefold()
    return any(s == g.casefold() or s in g.casefold() for g in surrogates)


def _leak_regex(surface: str) -> re.Pattern:
    tokens = surface.split()
    body = r"\s+".join(re.escape(t) for t in tokens) if tokens else re.escape(surface)
    return re.compile(rf"\b{body}\b", re.IGNORECASE)


def verify_masking(masked: Session, mask_map: MaskMap,
                   rules: DetectionRuleSet | None = None) -> VerificationReport:
    """Audit a masked session against its mask map.

    residual_hits: pattern (and, when rules are given, roster) matches in
    the masked text that are not accounted for by a known surrogate.
    leaked_originals: original surfaces from the map still present.
    """
    if masked.id != mask_map.session_id:
        raise InvalidInput(
            f"mask map is for session {mask_map.session_id}, not {masked.id}"
        )
    surrogates = [e.surrogate for e in mask_map.entries]

    scan_rules = DetectionRuleSet(
        roster=rules.roster if rules else (),
        cue_phrases=rules.cue_phrases if rules else ("my name is",),
        institutions=rules.institutions if rules else (),
    )
    # detect_pii only runs on raw sessions by contract; rescan a copy.
    rescan = Session(
        id=masked.id,
        title=masked.title,
        source_format=masked.source_format,
        participants=masked.participants,
        utterances=masked.utterances,
        deid_status="raw",
        metadata=dict(masked.metadata),
    )
    residual = tuple(
        d for d in detect_pii(rescan, scan_rules)
        if not _expected(d.surface, surrogates)
    )

    leaks = []
    texts = {u.index: u.text for u in masked.utterances}
    for entry in mask_map.entries:
        for original in entry.originals:
            pat = _leak_regex(original)
            for idx in sorted(texts):
                for m in pat.finditer(texts[idx]):
                    if _expected(m.group(0), surrogates):
                        continue
                    leaks.append(Detection(
                        category=entry.category,
                        utterance_index=idx,
                        char_start=m.start(),
                        char_end=m.end(),
                        surface=m.group(0),
                    ))
    leaks.sort(key=lambda d: (d.utterance_index, d.char_start, d.category))

    counts: dict[str, int] = {}
    for entry in mask_map.entries:
        counts[entry.category] = counts.get(entry.category, 0) + len(entry.occurrences)

    status = "clean" if not residual and not leaks else "findings"
    return VerificationReport(
        session_id=masked.id,
        residual_hits=residual,
        leaked_originals=tuple(leaks),
        counts_by_category=counts,
        status=status,
    )


def surrogate_spans(masked: Session, mask_map: MaskMap) -> list[dict]:
    """Locate each surrogate in the masked text. Safe to show without
    privilege: spans and categories only, no originals."""
    if masked.id != mask_map.session_id:
        raise InvalidInput(
            f"mask map is for session {mask_map.session_id}, not {masked.id}"
        )
    spans = []
    for entry in mask_map.entries:
        if not entry.surrogate:
            continue
        for utt in masked.utterances:
            start = utt.text.find(entry.surrogate)
            while start != -1:
                spans.append({
                    "category": entry.category,
                    "utterance_index": utt.index,
                    "char_start": start,
                    "char_end": start + len(entry.surrogate),
                })
                start = utt.text.find(entry.surrogate, start + len(entry.surrogate))
    spans.sort(key=lambda s: (s["utterance_index"], s["char_start"], s["category"]))
    return spans
