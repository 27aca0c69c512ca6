"""Two-stage cascade orchestration and training-file export."""

import datetime as dt

import pytest

from pddkit import (
    ANSWER_SEPARATOR,
    BackendKind,
    Corpus,
    DEFAULT_LABEL_MAP,
    PddAnnotation,
    SchemaError,
    SentenceRecord,
    WireProtocolError,
    export_training_file,
    format_example,
    mock_backend,
    parse_training_file,
    run_pipeline,
)
from pddkit.backends import CountingBackend
from pddkit.pipeline import experiment_manifest

LM = DEFAULT_LABEL_MAP
TRUE, FALSE = LM.true_token, LM.false_token


def scripted_stage1(labels):
    """Stage-1 backend returning a fixed token sequence, one per call order."""
    outputs = list(labels)

    class Seq:
        descriptor = mock_backend(BackendKind.BINARY, "echo", LM).descriptor

        def infer(self, sentences):
            return [outputs.pop(0) for _ in sentences]

    return Seq()


def stages(stage1=None, stage2c=None, stage2s=None):
    return (stage1 or mock_backend(BackendKind.BINARY, "all-false", LM),
            stage2c or mock_backend(BackendKind.CHARACTERISTICS, "zero", LM),
            stage2s or mock_backend(BackendKind.SPAN, "echo", LM))


class TestCascade:

    def test_gating_counts(self):
        # Six sentences, alternating labels: stage 2 sees exactly the three
        # positives, each stage-2 backend once per batch.
        s1 = scripted_stage1([TRUE, FALSE, TRUE, FALSE, TRUE, FALSE])
        c2 = CountingBackend(mock_backend(BackendKind.CHARACTERISTICS, "zero", LM))
        s2 = CountingBackend(mock_backend(BackendKind.SPAN, "echo", LM))
        records = run_pipeline(s1, c2, s2, [f"sent {i}" for i in range(6)], LM)
        assert [r.delegit for r in records] == [True, False] * 3
        assert c2.sentences_seen == 3
        assert s2.sentences_seen == 3

    def test_no_positives_never_calls_stage2(self):
        c2 = CountingBackend(mock_backend(BackendKind.CHARACTERISTICS, "zero", LM))
        s2 = CountingBackend(mock_backend(BackendKind.SPAN, "echo", LM))
        stage1, _, _ = stages()
        records = run_pipeline(stage1, c2, s2, ["א", "ב"], LM)
        assert all(not r.delegit for r in records)
        assert c2.calls == 0 and s2.calls == 0

    def test_field_gating_invariant(self):
        s1 = scripted_stage1([TRUE, FALSE])
        _, c2, s2 = stages()
        pos, neg = run_pipeline(s1, c2, s2, ["א", "ב"], LM)
        assert pos.characteristics is not None and pos.target_spans is not None
        assert neg.characteristics is None and neg.target_spans is None

    def test_input_order_and_ids(self):
        recs = [SentenceRecord(id=f"x{i}", text=f"טקסט {i}", source="news",
                               date=dt.date(2021, 1, 1)) for i in range(5)]
        records = run_pipeline(*stages(), recs, LM)
        assert [r.sentence_id for r in records] == [f"x{i}" for i in range(5)]

    def test_plain_strings_get_positional_ids(self):
        records = run_pipeline(*stages(), ["א", "ב"], LM)
        assert [r.sentence_id for r in records] == ["s0", "s1"]

    def test_id_text_pairs_accepted(self):
        records = run_pipeline(*stages(), [("a", "א"), ("b", "ב")], LM)
        assert [r.sentence_id for r in records] == ["a", "b"]

    def test_undecodable_stage1_is_flagged_negative(self):
        s1 = scripted_stage1(["אין לי מושג", TRUE])
        flagged, pos = run_pipeline(s1, *stages()[1:], ["א", "ב"], LM)
        assert flagged.delegit is False
        assert "undecodable" in flagged.error
        assert pos.delegit is True and pos.error is None

    def test_stage2_failure_zeroes_and_continues(self):
        class Exploding:
            descriptor = mock_backend(BackendKind.CHARACTERISTICS, "zero", LM).descriptor

            def infer(self, sentences):
                raise RuntimeError("gpu on fire")

        s1 = scripted_stage1([TRUE, TRUE])
        records = run_pipeline(s1, Exploding(), stages()[2], ["א", "ב"], LM)
        assert len(records) == 2
        for r in records:
            assert r.delegit is True
            assert r.stage2_parse_ok is False
            assert r.characteristics.intensity == 0
            assert "stage-2 characteristics failure" in r.error

    def test_both_stage2_failures_concatenate_errors(self):
        class Exploding:
            def __init__(self, kind):
                self.descriptor = mock_backend(kind, "zero" if kind is
                                               BackendKind.CHARACTERISTICS
                                               else "echo", LM).descriptor

            def infer(self, sentences):
                raise RuntimeError("boom")

        s1 = scripted_stage1([TRUE])
        (record,) = run_pipeline(s1, Exploding(BackendKind.CHARACTERISTICS),
                                 Exploding(BackendKind.SPAN), ["א"], LM)
        assert "characteristics failure" in record.error
        assert "span failure" in record.error
        assert record.target_spans == ()

    def test_stage1_failure_flags_whole_batch(self):
        class Exploding:
            descriptor = mock_backend(BackendKind.BINARY, "echo", LM).descriptor

            def infer(self, sentences):
                raise RuntimeError("boom")

        records = run_pipeline(Exploding(), *stages()[1:], ["א", "ב"], LM)
        assert all("stage-1 backend failure" in r.error for r in records)
        assert all(not r.delegit for r in records)

    def test_wire_failure_aborts(self):
        class Dead:
            descriptor = mock_backend(BackendKind.BINARY, "echo", LM).descriptor

            def infer(self, sentences):
                raise WireProtocolError("backend unreachable")

        with pytest.raises(WireProtocolError):
            run_pipeline(Dead(), *stages()[1:], ["א"], LM)

    def test_kind_mismatch_rejected(self):
        stage1, stage2c, stage2s = stages()
        with pytest.raises(SchemaError):
            run_pipeline(stage2c, stage2c, stage2s, ["א"], LM)
        with pytest.raises(SchemaError):
            run_pipeline(stage1, stage1, stage2s, ["א"], LM)

    def test_threshold_bounds(self):
        with pytest.raises(SchemaError):
            run_pipeline(*stages(), ["א"], LM, threshold=1.5)

    def test_score_backend_respects_threshold(self):
        class Scorer:
            descriptor = mock_backend(BackendKind.BINARY, "echo", LM).descriptor

            def infer_scores(self, sentences):
                return [0.9, 0.2, 0.5]

            def infer(self, sentences):
                raise AssertionError("token path must not run")

        _, c2, s2 = stages()
        records = run_pipeline(Scorer(), c2, s2, ["א", "ב", "ג"], LM,
                               threshold=0.5)
        assert [r.delegit for r in records] == [True, False, True]
        assert [r.stage1_score for r in records] == [0.9, 0.2, 0.5]

    def test_model_id_combines_stages(self):
        (record,) = run_pipeline(*stages(), ["א"], LM)
        assert record.model_id == "mock:all-false|mock:zero|mock:echo"

    def test_batching_preserves_alignment(self):
        n = 23
        labels = [TRUE if i % 3 == 0 else FALSE for i in range(n)]
        s1 = scripted_stage1(list(labels))
        records = run_pipeline(s1, *stages()[1:], [f"s {i}" for i in range(n)],
                               LM, batch_size=4)
        assert [r.delegit for r in records] == [lab == TRUE for lab in labels]


def corpus_of(texts):
    rows = [SentenceRecord(id=f"s{i}", text=t, source="facebook",
                           date=dt.date(2021, 6, 1)) for i, t in enumerate(texts)]
    return Corpus(rows)


def gold(sid, delegit, **kw):
    return PddAnnotation(sentence_id=sid, annotator_id="gold", delegit=delegit, **kw)


class TestExport:

    def test_binary_file_byte_exact(self):
        corpus = corpus_of(["זה משפט רגיל", "זה משפט פוגעני"])
        anns = [gold("s0", False),
                gold("s1", True, intensity=1, incivility=True)]
        text, n, skipped = export_training_file(
            corpus, anns, ["s0", "s1"], BackendKind.BINARY, LM)
        assert n == 2 and skipped == 0
        assert text == (f"זה משפט רגיל\n{ANSWER_SEPARATOR}{FALSE}\n\n"
                        f"זה משפט פוגעני\n{ANSWER_SEPARATOR}{TRUE}\n")

    def test_characteristics_only_positives(self):
        corpus = corpus_of(["א", "ב"])
        anns = [gold("s0", False),
                gold("s1", True, intensity=2, group=True)]
        text, n, _ = export_training_file(
            corpus, anns, ["s0", "s1"], BackendKind.CHARACTERISTICS, LM)
        assert n == 1
        assert text.startswith(f"ב\n{ANSWER_SEPARATOR}" + '{"עוצמה": 2')
        assert text.endswith("\n")

    def test_span_file_marks_targets(self):
        corpus = corpus_of(["ראש הממשלה בוגד בנו"])
        anns = [gold("s0", True, intensity=1, person=True,
                     target_spans=((12, 16),))]
        text, n, skipped = export_training_file(
            corpus, anns, ["s0"], BackendKind.SPAN, LM)
        assert n == 1 and skipped == 0
        assert text == (f"ראש הממשלה בוגד בנו\n"
                        f"{ANSWER_SEPARATOR}ראש הממשלה ב%%%וגד %%%בנו\n")

    def test_span_requires_span_field(self):
        corpus = corpus_of(["א", "ב"])
        anns = [gold("s0", True, intensity=1, incivility=True),
                gold("s1", True, intensity=1, incivility=True,
                     target_spans=((0, 1),))]
        text, n, skipped = export_training_file(
            corpus, anns, ["s0", "s1"], BackendKind.SPAN, LM)
        assert n == 1 and skipped == 0
        assert "ב" in text

    def test_marker_collision_skipped_and_counted(self):
        corpus = corpus_of(["טקסט עם %%% בפנים"])
        anns = [gold("s0", True, intensity=1, incivility=True,
                     target_spans=((0, 4),))]
        text, n, skipped = export_training_file(
            corpus, anns, ["s0"], BackendKind.SPAN, LM)
        assert text == "" and n == 0 and skipped == 1

    def test_out_of_range_span_skipped_and_counted(self):
        corpus = corpus_of(["קצר"])
        anns = [gold("s0", True, intensity=1, incivility=True,
                     target_spans=((0, 50),))]
        text, n, skipped = export_training_file(
            corpus, anns, ["s0"], BackendKind.SPAN, LM)
        assert text == "" and n == 0 and skipped == 1

    def test_ids_without_gold_are_silently_absent(self):
        corpus = corpus_of(["א", "ב"])
        anns = [gold("s0", False)]
        text, n, skipped = export_training_file(
            corpus, anns, ["s0", "s1"], BackendKind.BINARY, LM)
        assert n == 1 and skipped == 0

    def test_order_follows_ids(self):
        corpus = corpus_of(["אחת", "שתיים"])
        anns = [gold("s0", False), gold("s1", False)]
        text, _, _ = export_training_file(
            corpus, anns, ["s1", "s0"], BackendKind.BINARY, LM)
        assert text.index("שתיים") < text.index("אחת")

    def test_empty_export(self):
        corpus = corpus_of(["א"])
        text, n, skipped = export_training_file(
            corpus, [], [], BackendKind.BINARY, LM)
        assert text == "" and n == 0 and skipped == 0

    def test_duplicate_gold_rejected(self):
        corpus = corpus_of(["א"])
        anns = [gold("s0", False), gold("s0", False)]
        with pytest.raises(SchemaError):
            export_training_file(corpus, anns, ["s0"], BackendKind.BINARY, LM)

    def test_newline_normalization_preserves_length(self):
        raw = "שורה אחת\r\nשורה שתיים"
        rendered = format_example(raw, "יעד")
        input_line = rendered.split("\n")[0]
        assert len(input_line) == len(raw)
        assert "\r" not in input_line

    def test_parse_inverse(self):
        corpus = corpus_of(["משפט ראשון", "משפט שני", "משפט שלישי"])
        anns = [gold("s0", False),
                gold("s1", True, intensity=1, outgroup=True),
                gold("s2", False)]
        text, n, _ = export_training_file(
            corpus, anns, ["s0", "s1", "s2"], BackendKind.BINARY, LM)
        pairs = parse_training_file(text)
        assert len(pairs) == n == 3
        assert pairs[0] == ("משפט ראשון", FALSE)
        assert pairs[1] == ("משפט שני", TRUE)

    def test_parse_empty(self):
        assert parse_training_file("") == []
        assert parse_training_file("\n\n") == []

    def test_parse_malformed_block(self):
        with pytest.raises(SchemaError):
            parse_training_file("שורה בלי יעד\n\n")
        with pytest.raises(SchemaError):
            parse_training_file("קלט\nתשובה בלי קידומת\n")

    def test_manifest_names_separator_and_tasks(self):
        manifest = experiment_manifest()
        assert manifest["separator"] == ANSWER_SEPARATOR
        assert manifest["tasks"] == ["binary", "characteristics", "span"]
        assert manifest["decoder"]["adapter"]["rank"] == 256
