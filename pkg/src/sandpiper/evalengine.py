"""Inter-rater reliability over annotation sources.

A label source is any member of a run-set: an annotation run or a human
coder. Agreement is pairwise-complete: two sources are compared only on
items both labeled. Kappa is chance-corrected agreement computed from
integer marginal counts, so exactness down to float rounding is
preserved; precision/recall treat one source as reference and score each
code one-vs-rest.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass

from .docs import runset_from_doc
from .errors import InvalidInput
from .model import AgreementStats, RunSet, now_iso

ItemKey = tuple[str, int]  # (session_id, utterance_index)


def canonical_label(value) -> str | None:
    """Label equality is up to case and surrounding whitespace; booleans
    and integral numbers get stable spellings. None means the item has no
    usable label and drops out of alignment."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        f = float(value)
        return str(int(f)) if f.is_integer() else repr(f)
    if isinstance(value, str):
        out = " ".join(value.casefold().split())
        return out if out else None
    return None


def labels_for_source(store, source: str, target_field: str) -> dict[ItemKey, str]:
    """Pull one source's labels for the target field out of the store."""
    labels: dict[ItemKey, str] = {}
    for doc in store.query("annotations", {"source": source}):
        raw = doc["document"].get(target_field)
        if isinstance(raw, (list, dict)):
            raise InvalidInput(
                f"target field {target_field!r} holds structured values; "
                "agreement needs scalar labels"
            )
        label = canonical_label(raw)
        if label is not None:
            labels[(doc["session_id"], doc["utterance_index"])] = label
    return labels


def align(a: dict[ItemKey, str], b: dict[ItemKey, str]) -> list[tuple[str, str]]:
    """Pairwise-complete alignment: label pairs for items both sources
    labeled, in deterministic item order."""
    common = sorted(set(a) & set(b))
    return [(a[k], b[k]) for k in common]


def cohen_kappa(pairs: list[tuple[str, str]]) -> AgreementStats:
    """Chance-corrected agreement for two raters over the same items.

    kappa = (p_o - p_e) / (1 - p_e) with p_e from the label marginals.
    Marginal products are summed as integers and divided once, so there
    is no accumulation error to speak of.
    """
    n = len(pairs)
    if n == 0:
        raise InvalidInput("kappa needs at least one aligned item")
    agree = sum(1 for x, y in pairs if x == y)
    marg_a = Counter(x for x, _ in pairs)
    marg_b = Counter(y for _, y in pairs)
    expected_num = sum(marg_a[c] * marg_b[c] for c in marg_a.keys() | marg_b.keys())
    p_o = agree / n
    p_e = expected_num / (n * n)
    if expected_num == n * n:
        # Both raters constant on the same label: agreement is total and
        # the chance correction is degenerate.
        kappa = 1.0
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)
    return AgreementStats(
        observed_agreement=p_o,
        expected_agreement=p_e,
        kappa=kappa,
        n_items=n,
    )


@dataclass(frozen=True)
class PerCodeStats:
    """One-vs-rest counts for a single code, candidate scored against
    reference."""

    code: str
    tp: int
    fp: int
    fn: int
    precision: float  # 0.0 when tp + fp == 0
    recall: float  # 0.0 when tp + fn == 0
    support: int  # reference occurrences

    def to_doc(self) -> dict:
        return {
            "code": self.code,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "support": self.support,
        }


def precision_recall(pairs: list[tuple[str, str]]) -> list[PerCodeStats]:
    """Per-code one-vs-rest scores; pairs are (reference, candidate).
    Codes are every label either side used, in sorted order."""
    codes = sorted({x for x, _ in pairs} | {y for _, y in pairs})
    out = []
    for code in codes:
        tp = sum(1 for r, c in pairs if r == code and c == code)
        fp = sum(1 for r, c in pairs if r != code and c == code)
        fn = sum(1 for r, c in pairs if r == code and c != code)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        out.append(PerCodeStats(
            code=code, tp=tp, fp=fp, fn=fn,
            precision=precision, recall=recall,
            support=tp + fn,
        ))
    return out


def macro_scores(per_code: list[PerCodeStats]) -> tuple[float, float]:
    """Unweighted means over codes the reference actually used."""
    used = [s for s in per_code if s.support > 0]
    if not used:
        return 0.0, 0.0
    return (
        sum(s.precision for s in used) / len(used),
        sum(s.recall for s in used) / len(used),
    )


def confusion(pairs: list[tuple[str, str]]) -> dict:
    """Reference rows by candidate columns, integer counts."""
    codes = sorted({x for x, _ in pairs} | {y for _, y in pairs})
    index = {c: i for i, c in enumerate(codes)}
    counts = [[0] * len(codes) for _ in codes]
    for r, c in pairs:
        counts[index[r]][index[c]] += 1
    return {"codes": codes, "counts": counts}


def evaluate_runset(store, runset: RunSet | dict) -> dict:
    """Full reliability report for one run-set.

    Matrices are member-by-member in declared order, diagonal exactly 1,
    and a pair with no commonly labeled items gets null cells plus a zero
    in the coverage matrix. Reference-based tables (per-code scores and
    confusion matrices) appear only when the run-set designates a
    reference member.
    """
    rs = runset if isinstance(runset, RunSet) else runset_from_doc(runset)
    labels = {m: labels_for_source(store, m, rs.target_field) for m in rs.members}

    k = len(rs.members)
    agreement = [[None] * k for _ in range(k)]
    kappa = [[None] * k for _ in range(k)]
    coverage = [[0] * k for _ in range(k)]
    for i, a in enumerate(rs.members):
        agreement[i][i] = 1.0
        kappa[i][i] = 1.0
        coverage[i][i] = len(labels[a])
        for j in range(i + 1, k):
            b = rs.members[j]
            pairs = align(labels[a], labels[b])
            coverage[i][j] = coverage[j][i] = len(pairs)
            if not pairs:
                continue
            stats = cohen_kappa(pairs)
            agreement[i][j] = agreement[j][i] = stats.observed_agreement
            kappa[i][j] = kappa[j][i] = stats.kappa

    report = {
        "runset_id": rs.id,
        "name": rs.name,
        "target_field": rs.target_field,
        "members": list(rs.members),
        "reference": rs.reference,
        "generated_at": now_iso(),
        "labeled_items": {m: len(labels[m]) for m in rs.members},
        "agreement": agreement,
        "kappa": kappa,
        "coverage": coverage,
    }

    if rs.reference is not None:
        per_code = {}
        confusions = {}
        macros = {}
        for m in rs.members:
            if m == rs.reference:
                continue
            pairs = align(labels[rs.reference], labels[m])
            stats = precision_recall(pairs)
            per_code[m] = [s.to_doc() for s in stats]
            confusions[m] = confusion(pairs)
            macro_p, macro_r = macro_scores(stats)
            macros[m] = {"precision": macro_p, "recall": macro_r}
        report["per_code"] = per_code
        report["confusion"] = confusions
        report["macro"] = macros
    return report


# --------------------------------------------------------------------------
# CSV export
# --------------------------------------------------------------------------


def _matrix_csv(members: list[str], matrix: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source"] + members)
    for name, row in zip(members, matrix):
        writer.writerow([name] + ["" if v is None else v for v in row])
    return buf.getvalue()


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in name)


def report_to_csv(report: dict) -> dict[str, str]:
    """Flatten a report into CSV files keyed by file name."""
    members = report["members"]
    files = {
        "agreement.csv": _matrix_csv(members, report["agreement"]),
        "kappa.csv": _matrix_csv(members, report["kappa"]),
        "coverage.csv": _matrix_csv(members, report["coverage"]),
    }
    if "per_code" in report:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["member", "code", "tp", "fp", "fn",
                         "precision", "recall", "support"])
        for member in members:
            for row in report["per_code"].get(member, []):
                writer.writerow([member, row["code"], row["tp"], row["fp"],
                                 row["fn"], row["precision"], row["recall"],
                                 row["support"]])
        files["per_code.csv"] = buf.getvalue()
        for member, conf in report["confusion"].items():
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(["reference\\candidate"] + conf["codes"])
            for code, row in zip(conf["codes"], conf["counts"]):
                writer.writerow([code] + row)
            files[f"confusion_{_safe(member)}.csv"] = buf.getvalue()
    return files
