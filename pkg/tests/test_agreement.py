"""Agreement statistics: kappa, Pearson correlation, pairwise report."""

import math
import random

import pytest

from pddkit import (
    DataError,
    PddAnnotation,
    UndefinedCorrelationError,
    agreement_report,
    cohen_kappa,
    pairwise_correlation,
)

from oracles import kappa_oracle


def ann(sid, who, delegit=False, **kw):
    return PddAnnotation(sentence_id=sid, annotator_id=who, delegit=delegit, **kw)


class TestCohenKappa:

    def test_hand_case(self):
        # 10 items; rater A flags the first five and the last, rater B
        # flags the first five.  Observed agreement 9/10, chance 1/2.
        a = [True] * 5 + [False] * 4 + [True]
        b = [True] * 5 + [False] * 5
        assert cohen_kappa(a, b) == pytest.approx(0.8, abs=1e-12)

    def test_alternating_vs_constant_is_zero(self):
        a = [i % 2 == 0 for i in range(10)]
        b = [True] * 10
        assert cohen_kappa(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_perfect_agreement(self):
        a = [True, False, True, False]
        assert cohen_kappa(a, list(a)) == 1.0

    def test_perfect_disagreement(self):
        a = [True, False, True, False]
        b = [not x for x in a]
        assert cohen_kappa(a, b) == pytest.approx(-1.0, abs=1e-12)

    def test_identical_constant_sequences(self):
        assert cohen_kappa([True] * 6, [True] * 6) == 1.0

    def test_constant_vs_mixed_can_be_nonpositive(self):
        # p_e < 1 here, so the usual formula applies and is negative or zero.
        k = cohen_kappa([True] * 6, [True] * 5 + [False])
        assert k <= 0.0

    def test_symmetry(self):
        rng = random.Random(11)
        for _ in range(50):
            n = rng.randrange(2, 30)
            a = [rng.random() < 0.4 for _ in range(n)]
            b = [rng.random() < 0.6 for _ in range(n)]
            assert cohen_kappa(a, b) == pytest.approx(cohen_kappa(b, a), abs=1e-12)

    def test_label_relabeling_invariance(self):
        # Swapping the two label names everywhere leaves kappa unchanged.
        rng = random.Random(12)
        for _ in range(50):
            n = rng.randrange(2, 30)
            a = [rng.random() < 0.5 for _ in range(n)]
            b = [rng.random() < 0.5 for _ in range(n)]
            sa = [not x for x in a]
            sb = [not x for x in b]
            assert cohen_kappa(a, b) == pytest.approx(cohen_kappa(sa, sb), abs=1e-12)

    def test_matches_float_oracle(self):
        rng = random.Random(13)
        for _ in range(200):
            n = rng.randrange(1, 40)
            pairs = [(rng.random() < 0.5, rng.random() < 0.5) for _ in range(n)]
            a = [p[0] for p in pairs]
            b = [p[1] for p in pairs]
            assert cohen_kappa(a, b) == pytest.approx(kappa_oracle(pairs), abs=1e-9)

    def test_independent_raters_near_zero(self):
        rng = random.Random(14)
        n = 10000
        a = [rng.random() < 0.3 for _ in range(n)]
        b = [rng.random() < 0.7 for _ in range(n)]
        assert abs(cohen_kappa(a, b)) < 0.05

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            cohen_kappa([True], [True, False])

    def test_empty(self):
        with pytest.raises(DataError):
            cohen_kappa([], [])


class TestPairwiseCorrelation:

    def test_hand_case(self):
        r = pairwise_correlation([1, 1, 0, 0], [1, 0, 0, 0])
        assert r == pytest.approx(1 / math.sqrt(3), abs=1e-9)
        assert f"{r:.4f}" == "0.5774"

    def test_perfect_positive(self):
        assert pairwise_correlation([0, 1, 0, 1], [0, 1, 0, 1]) == pytest.approx(1.0)

    def test_perfect_negative(self):
        assert pairwise_correlation([0, 1, 0, 1], [1, 0, 1, 0]) == pytest.approx(-1.0)

    def test_accepts_booleans(self):
        r = pairwise_correlation([True, True, False, False],
                                 [True, False, False, False])
        assert r == pytest.approx(1 / math.sqrt(3), abs=1e-9)

    def test_constant_sequence_undefined(self):
        with pytest.raises(UndefinedCorrelationError):
            pairwise_correlation([1, 1, 1], [1, 0, 1])
        with pytest.raises(UndefinedCorrelationError):
            pairwise_correlation([1, 0, 1], [0, 0, 0])

    def test_symmetry(self):
        rng = random.Random(15)
        for _ in range(50):
            n = rng.randrange(2, 30)
            a = [rng.randrange(2) for _ in range(n)]
            b = [rng.randrange(2) for _ in range(n)]
            try:
                r_ab = pairwise_correlation(a, b)
            except UndefinedCorrelationError:
                with pytest.raises(UndefinedCorrelationError):
                    pairwise_correlation(b, a)
                continue
            assert r_ab == pytest.approx(pairwise_correlation(b, a), abs=1e-12)

    def test_bounded(self):
        rng = random.Random(16)
        for _ in range(200):
            n = rng.randrange(2, 30)
            a = [rng.randrange(2) for _ in range(n)]
            b = [rng.randrange(2) for _ in range(n)]
            try:
                r = pairwise_correlation(a, b)
            except UndefinedCorrelationError:
                continue
            assert -1.0 - 1e-12 <= r <= 1.0 + 1e-12

    def test_too_short(self):
        with pytest.raises(DataError):
            pairwise_correlation([1], [0])

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            pairwise_correlation([1, 0], [1, 0, 1])


class TestAgreementReport:

    def make_shared(self):
        # Three annotators over the same ten sentences.  Labels are chosen
        # so each pair has a known kappa.
        sids = [f"s{i}" for i in range(10)]
        la = [True] * 5 + [False] * 4 + [True]
        lb = [True] * 5 + [False] * 5
        lc = [True] * 5 + [False] * 5
        anns = []
        for sid, va, vb, vc in zip(sids, la, lb, lc):
            anns.append(ann(sid, "a", va))
            anns.append(ann(sid, "b", vb))
            anns.append(ann(sid, "c", vc))
        return anns

    def test_pairwise_values(self):
        rep = agreement_report(self.make_shared())
        assert rep.annotators == ("a", "b", "c")
        assert set(rep.kappa) == {("a", "b"), ("a", "c"), ("b", "c")}
        assert rep.kappa[("a", "b")] == pytest.approx(0.8, abs=1e-12)
        assert rep.kappa[("a", "c")] == pytest.approx(0.8, abs=1e-12)
        assert rep.kappa[("b", "c")] == 1.0
        assert rep.pair_counts[("a", "b")] == 10

    def test_averages_are_pair_means(self):
        rep = agreement_report(self.make_shared())
        assert rep.avg_kappa == pytest.approx(
            sum(rep.kappa.values()) / 3, abs=1e-12)
        defined = [r for r in rep.correlation.values() if r is not None]
        assert rep.avg_correlation == pytest.approx(
            sum(defined) / len(defined), abs=1e-12)

    def test_disagreements_listed_sorted(self):
        rep = agreement_report(self.make_shared())
        # Only s9 splits the raters (a says True, b and c say False).
        assert rep.disagreements == ("s9",)
        assert rep.n_shared == 10

    def test_constant_pair_gives_none_correlation(self):
        anns = []
        for i in range(4):
            anns.append(ann(f"s{i}", "a", True))
            anns.append(ann(f"s{i}", "b", i % 2 == 0))
        rep = agreement_report(anns)
        assert rep.correlation[("a", "b")] is None
        assert rep.avg_correlation is None
        # Kappa is still defined for the pair.
        assert ("a", "b") in rep.kappa

    def test_partial_overlap_counts(self):
        anns = [ann("s1", "a"), ann("s2", "a"), ann("s3", "a"),
                ann("s2", "b"), ann("s3", "b"), ann("s4", "b")]
        rep = agreement_report(anns)
        assert rep.pair_counts[("a", "b")] == 2
        assert rep.n_shared == 2

    def test_pair_without_overlap_skipped(self):
        anns = [ann("s1", "a"), ann("s1", "b"), ann("s2", "c")]
        rep = agreement_report(anns)
        assert ("a", "b") in rep.kappa
        assert ("a", "c") not in rep.kappa
        assert rep.pair_counts[("a", "c")] == 0

    def test_single_annotator_rejected(self):
        with pytest.raises(DataError):
            agreement_report([ann("s1", "a"), ann("s2", "a")])

    def test_no_overlap_at_all_rejected(self):
        with pytest.raises(DataError):
            agreement_report([ann("s1", "a"), ann("s2", "b")])
