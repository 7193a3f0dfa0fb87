import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import kappa_reference, per_code_reference
from sandpiper.docs import annotation_to_doc
from sandpiper.errors import InvalidInput
from sandpiper.evalengine import (
    align,
    canonical_label,
    cohen_kappa,
    confusion,
    evaluate_runset,
    labels_for_source,
    macro_scores,
    precision_recall,
    report_to_csv,
)
from sandpiper.model import Annotation, RunSet, new_id, now_iso
from sandpiper.store import Store

CODES = ["question", "explanation", "other"]

pair_lists = st.lists(
    st.tuples(st.sampled_from(CODES), st.sampled_from(CODES)),
    min_size=1, max_size=60,
)


class TestCanonicalLabel:
    @pytest.mark.parametrize("value, expected", [
        (True, "true"),
        (False, "false"),
        (3, "3"),
        (3.0, "3"),
        (2.5, "2.5"),
        (-1, "-1"),
        ("Question", "question"),
        ("  two   Words \n", "two words"),
        ("", None),
        ("   ", None),
        (None, None),
        ([1], None),
        ({"a": 1}, None),
    ])
    def test_cases(self, value, expected):
        assert canonical_label(value) == expected

    def test_bool_is_not_treated_as_number(self):
        assert canonical_label(True) != canonical_label(1)


def put_ann(store, source, session_id, index, document):
    ann = Annotation(
        id=new_id("ann_"),
        session_id=session_id,
        utterance_index=index,
        source=source,
        document=document,
        attempts=1,
        created_at=now_iso(),
    )
    store.put_annotation(annotation_to_doc(ann))


class TestLabelsForSource:
    def test_pulls_and_canonicalizes(self):
        store = Store(":memory:")
        put_ann(store, "human:ann", "s1", 0, {"code": "  Question "})
        put_ann(store, "human:ann", "s1", 1, {"code": "other"})
        put_ann(store, "human:bob", "s1", 0, {"code": "ignored"})
        labels = labels_for_source(store, "human:ann", "code")
        assert labels == {("s1", 0): "question", ("s1", 1): "other"}

    def test_unlabeled_items_drop_out(self):
        store = Store(":memory:")
        put_ann(store, "human:ann", "s1", 0, {"other_field": "x"})
        put_ann(store, "human:ann", "s1", 1, {"code": ""})
        put_ann(store, "human:ann", "s1", 2, {"code": None})
        assert labels_for_source(store, "human:ann", "code") == {}

    def test_structured_values_rejected(self):
        store = Store(":memory:")
        put_ann(store, "human:ann", "s1", 0, {"code": ["a", "b"]})
        with pytest.raises(InvalidInput, match="scalar"):
            labels_for_source(store, "human:ann", "code")


class TestAlign:
    def test_only_common_items_in_sorted_order(self):
        a = {("s1", 1): "x", ("s1", 0): "y", ("s2", 0): "z"}
        b = {("s1", 0): "p", ("s1", 1): "q", ("s1", 9): "r"}
        assert align(a, b) == [("y", "p"), ("x", "q")]

    def test_disjoint_sources_give_nothing(self):
        assert align({("s1", 0): "x"}, {("s2", 0): "x"}) == []


class TestCohenKappa:
    def test_worked_fixture(self):
        pairs = [("q", "q"), ("q", "e"), ("e", "e"), ("e", "e")]
        stats = cohen_kappa(pairs)
        assert stats.observed_agreement == 0.75
        assert stats.expected_agreement == 0.5
        assert stats.kappa == 0.5
        assert stats.n_items == 4

    def test_fixture_matches_reference(self):
        pairs = [("q", "q"), ("q", "e"), ("e", "e"), ("e", "e")]
        p_o, p_e, kappa = kappa_reference(pairs)
        stats = cohen_kappa(pairs)
        assert stats.observed_agreement == p_o
        assert stats.expected_agreement == p_e
        assert stats.kappa == kappa

    def test_perfect_agreement(self):
        stats = cohen_kappa([("a", "a"), ("b", "b")])
        assert stats.kappa == 1.0

    def test_both_constant_same_label_is_degenerate(self):
        stats = cohen_kappa([("a", "a"), ("a", "a"), ("a", "a")])
        assert stats.expected_agreement == 1.0
        assert stats.kappa == 1.0

    def test_both_constant_different_labels(self):
        stats = cohen_kappa([("a", "b"), ("a", "b")])
        assert stats.observed_agreement == 0.0
        assert stats.expected_agreement == 0.0
        assert stats.kappa == 0.0

    def test_systematic_swap_hits_minus_one(self):
        stats = cohen_kappa([("a", "b"), ("b", "a")])
        assert stats.kappa == -1.0

    def test_empty_alignment_rejected(self):
        with pytest.raises(InvalidInput, match="at least one"):
            cohen_kappa([])

    @settings(max_examples=300, deadline=None)
    @given(pair_lists)
    def test_matches_exact_reference(self, pairs):
        p_o, p_e, kappa = kappa_reference(pairs)
        stats = cohen_kappa(pairs)
        assert math.isclose(stats.observed_agreement, p_o, abs_tol=1e-12)
        assert math.isclose(stats.expected_agreement, p_e, abs_tol=1e-12)
        assert math.isclose(stats.kappa, kappa, abs_tol=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(pair_lists)
    def test_bounded_and_symmetric(self, pairs):
        stats = cohen_kappa(pairs)
        assert -1.0 - 1e-12 <= stats.kappa <= 1.0 + 1e-12
        swapped = cohen_kappa([(y, x) for x, y in pairs])
        assert swapped.kappa == stats.kappa
        assert swapped.observed_agreement == stats.observed_agreement

    @settings(max_examples=200, deadline=None)
    @given(pair_lists, st.permutations(CODES))
    def test_relabeling_invariance(self, pairs, permuted):
        mapping = dict(zip(CODES, permuted))
        renamed = [(mapping[x], mapping[y]) for x, y in pairs]
        assert cohen_kappa(renamed).kappa == cohen_kappa(pairs).kappa


FIXTURE_PAIRS = [  # (reference, candidate)
    ("q", "q"), ("q", "e"), ("e", "e"), ("e", "e"), ("o", "q"),
]


class TestPrecisionRecall:
    def test_hand_counted_fixture(self):
        stats = {s.code: s for s in precision_recall(FIXTURE_PAIRS)}
        assert sorted(stats) == ["e", "o", "q"]
        e = stats["e"]
        assert (e.tp, e.fp, e.fn, e.support) == (2, 1, 0, 2)
        assert e.precision == 2 / 3 and e.recall == 1.0
        o = stats["o"]
        assert (o.tp, o.fp, o.fn, o.support) == (0, 0, 1, 1)
        assert o.precision == 0.0 and o.recall == 0.0
        q = stats["q"]
        assert (q.tp, q.fp, q.fn, q.support) == (1, 1, 1, 2)
        assert q.precision == 0.5 and q.recall == 0.5

    def test_candidate_only_code_scores_zero(self):
        stats = {s.code: s for s in precision_recall([("a", "b"), ("a", "a")])}
        b = stats["b"]
        assert b.support == 0
        assert b.precision == 0.0 and b.recall == 0.0

    def test_fixture_matches_reference(self):
        expected = per_code_reference(FIXTURE_PAIRS)
        for s in precision_recall(FIXTURE_PAIRS):
            ref = expected[s.code]
            assert (s.tp, s.fp, s.fn, s.support) == (
                ref["tp"], ref["fp"], ref["fn"], ref["support"])
            assert math.isclose(s.precision, ref["precision"], abs_tol=1e-12)
            assert math.isclose(s.recall, ref["recall"], abs_tol=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(pair_lists)
    def test_matches_exact_reference(self, pairs):
        expected = per_code_reference(pairs)
        got = precision_recall(pairs)
        assert {s.code for s in got} == set(expected)
        for s in got:
            ref = expected[s.code]
            assert (s.tp, s.fp, s.fn, s.support) == (
                ref["tp"], ref["fp"], ref["fn"], ref["support"])
            assert math.isclose(s.precision, ref["precision"], abs_tol=1e-12)
            assert math.isclose(s.recall, ref["recall"], abs_tol=1e-12)


class TestMacroScores:
    def test_averages_only_codes_the_reference_used(self):
        stats = precision_recall(FIXTURE_PAIRS)
        macro_p, macro_r = macro_scores(stats)
        assert math.isclose(macro_p, (2 / 3 + 0.0 + 0.5) / 3)
        assert math.isclose(macro_r, (1.0 + 0.0 + 0.5) / 3)

    def test_zero_support_codes_excluded(self):
        stats = precision_recall([("a", "a"), ("a", "b")])
        assert macro_scores(stats) == (1.0, 0.5)

    def test_empty_input(self):
        assert macro_scores([]) == (0.0, 0.0)


class TestConfusion:
    def test_reference_rows_candidate_columns(self):
        out = confusion(FIXTURE_PAIRS)
        assert out["codes"] == ["e", "o", "q"]
        # rows: e -> {e:2}; o -> {q:1}; q -> {q:1, e:1}
        assert out["counts"] == [[2, 0, 0], [0, 0, 1], [1, 0, 1]]

    def test_total_preserved(self):
        out = confusion(FIXTURE_PAIRS)
        assert sum(sum(row) for row in out["counts"]) == len(FIXTURE_PAIRS)


def seeded_store():
    """Three sources over four items; run:r2 labels a disjoint session."""
    store = Store(":memory:")
    ref = ["q", "q", "e", "e"]
    cand = ["q", "e", "e", "e"]
    for i, (r, c) in enumerate(zip(ref, cand)):
        put_ann(store, "human:ref", "s1", i, {"code": r})
        put_ann(store, "run:r1", "s1", i, {"code": c})
    put_ann(store, "run:r2", "s2", 0, {"code": "q"})
    return store


class TestEvaluateRunset:
    def runset(self, reference=None):
        return RunSet(
            id="rst_x", name="demo",
            members=("human:ref", "run:r1", "run:r2"),
            target_field="code", reference=reference,
        )

    def test_matrix_shape_and_diagonal(self):
        report = evaluate_runset(seeded_store(), self.runset())
        assert report["members"] == ["human:ref", "run:r1", "run:r2"]
        assert report["labeled_items"] == {"human:ref": 4, "run:r1": 4, "run:r2": 1}
        for m in ("agreement", "kappa"):
            assert report[m][0][0] == 1.0
            assert report[m][1][1] == 1.0
            assert report[m][2][2] == 1.0
        assert report["coverage"][0][0] == 4
        assert report["coverage"][2][2] == 1

    def test_pairwise_cells_match_direct_computation(self):
        report = evaluate_runset(seeded_store(), self.runset())
        assert report["agreement"][0][1] == 0.75
        assert report["kappa"][0][1] == 0.5
        assert report["coverage"][0][1] == 4
        assert report["kappa"][1][0] == report["kappa"][0][1]

    def test_uncovered_pair_has_null_cells(self):
        report = evaluate_runset(seeded_store(), self.runset())
        assert report["coverage"][0][2] == 0
        assert report["agreement"][0][2] is None
        assert report["kappa"][0][2] is None

    def test_reference_tables_only_when_reference_set(self):
        plain = evaluate_runset(seeded_store(), self.runset())
        assert "per_code" not in plain and "confusion" not in plain
        scored = evaluate_runset(seeded_store(), self.runset(reference="human:ref"))
        assert set(scored["per_code"]) == {"run:r1", "run:r2"}
        assert set(scored["confusion"]) == {"run:r1", "run:r2"}
        assert set(scored["macro"]) == {"run:r1", "run:r2"}

    def test_reference_scores_match_hand_counts(self):
        report = evaluate_runset(seeded_store(), self.runset(reference="human:ref"))
        by_code = {row["code"]: row for row in report["per_code"]["run:r1"]}
        # ref q,q,e,e vs cand q,e,e,e: q tp1 fp0 fn1; e tp2 fp1 fn0
        assert by_code["q"]["precision"] == 1.0 and by_code["q"]["recall"] == 0.5
        assert by_code["e"]["precision"] == 2 / 3 and by_code["e"]["recall"] == 1.0
        assert report["confusion"]["run:r1"]["codes"] == ["e", "q"]
        assert report["confusion"]["run:r1"]["counts"] == [[2, 0], [1, 1]]
        # run:r2 shares nothing with the reference
        assert report["per_code"]["run:r2"] == []

    def test_accepts_plain_doc(self):
        from sandpiper.docs import runset_to_doc
        report = evaluate_runset(seeded_store(), runset_to_doc(self.runset()))
        assert report["runset_id"] == "rst_x"


class TestReportToCsv:
    def report(self):
        return evaluate_runset(seeded_store(),
                               RunSet(id="rst_x", name="demo",
                                      members=("human:ref", "run:r1", "run:r2"),
                                      target_field="code",
                                      reference="human:ref"))

    def test_matrix_files_and_null_rendering(self):
        files = report_to_csv(self.report())
        lines = files["agreement.csv"].splitlines()
        assert lines[0] == "source,human:ref,run:r1,run:r2"
        assert lines[1] == "human:ref,1.0,0.75,"
        assert files["coverage.csv"].splitlines()[1] == "human:ref,4,4,0"

    def test_per_code_and_confusion_files(self):
        files = report_to_csv(self.report())
        per_code = files["per_code.csv"].splitlines()
        assert per_code[0] == "member,code,tp,fp,fn,precision,recall,support"
        assert "run:r1,q,1,0,1,1.0,0.5,2" in per_code
        conf = files["confusion_run_r1.csv"].splitlines()
        assert conf[0] == "reference\\candidate,e,q"
        assert conf[1] == "e,2,0"
        assert "confusion_run_r2.csv" in files

    def test_no_reference_no_extra_files(self):
        report = evaluate_runset(seeded_store(),
                                 RunSet(id="rst_x", name="demo",
                                        members=("human:ref", "run:r1"),
                                        target_field="code"))
        files = report_to_csv(report)
        assert sorted(files) == ["agreement.csv", "coverage.csv", "kappa.csv"]
