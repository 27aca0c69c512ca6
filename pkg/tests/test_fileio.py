import datetime as dt

import pytest

from pddkit import (
    Bloc,
    Characteristics,
    Gender,
    PddAnnotation,
    PredictionRecord,
    SpeakerMeta,
    split_corpus,
)
from pddkit.errors import SchemaError
from pddkit.fileio import (
    annotation_from_row,
    annotation_to_row,
    read_annotations,
    read_events,
    read_predictions,
    read_sentences,
    read_speakers,
    read_split,
    write_annotations,
    write_predictions,
    write_sentences,
    write_speakers,
    write_split,
)
from synth import small_corpus


def test_sentence_round_trip(tmp_path):
    corpus, _ = small_corpus(n=40)
    path = tmp_path / "s.jsonl"
    write_sentences(path, corpus)
    loaded = read_sentences(path)
    assert list(loaded) == list(corpus)


def test_optional_fields_omitted(tmp_path):
    corpus, _ = small_corpus(n=5)
    path = tmp_path / "s.jsonl"
    write_sentences(path, corpus)
    for line in path.read_text(encoding="utf-8").splitlines():
        assert "null" not in line


def test_annotation_round_trip(tmp_path):
    _, annotations = small_corpus(n=60)
    path = tmp_path / "a.jsonl"
    write_annotations(path, annotations)
    assert read_annotations(path) == annotations


def test_annotation_unknown_field_rejected():
    with pytest.raises(SchemaError):
        annotation_from_row({"sentence_id": "s", "annotator_id": "a",
                             "delegit": False, "sentiment": 1})


def test_annotation_row_shape():
    row = annotation_to_row(PddAnnotation(sentence_id="s", annotator_id="a",
                                          delegit=False))
    assert row == {"sentence_id": "s", "annotator_id": "a", "delegit": False}


def test_split_round_trip(tmp_path):
    corpus, _ = small_corpus(n=80)
    split = split_corpus(corpus, seed=5)
    path = tmp_path / "split.jsonl"
    write_split(path, split)
    loaded = read_split(path)
    assert loaded.assignment() == split.assignment()
    assert loaded.seed == split.seed


def test_prediction_round_trip(tmp_path):
    preds = [
        PredictionRecord(sentence_id="s0", model_id="m", delegit=False,
                         stage1_score=0.2),
        PredictionRecord(sentence_id="s1", model_id="m", delegit=True,
                         stage1_score=0.9,
                         characteristics=Characteristics(intensity=1,
                                                         person=True),
                         target_spans=((2, 5),)),
        PredictionRecord(sentence_id="s2", model_id="m", delegit=False,
                         stage1_score=0.5, stage2_parse_ok=False,
                         error="stage-1 output undecodable"),
    ]
    path = tmp_path / "p.jsonl"
    write_predictions(path, preds)
    assert read_predictions(path) == preds


def test_speaker_csv_round_trip(tmp_path):
    speakers = [
        SpeakerMeta(speaker_id="a", gender=Gender.FEMALE, bloc=Bloc.LEFT,
                    party="x",
                    coalition_intervals=((dt.date(2020, 1, 1),
                                          dt.date(2020, 6, 30)),
                                         (dt.date(2021, 1, 1), None))),
        SpeakerMeta(speaker_id="b", gender=Gender.UNKNOWN, bloc=Bloc.UNKNOWN),
    ]
    path = tmp_path / "speakers.csv"
    write_speakers(path, speakers)
    loaded = read_speakers(path)
    assert set(loaded) == {"a", "b"}
    assert loaded["a"].coalition_intervals == speakers[0].coalition_intervals
    assert loaded["b"].gender is Gender.UNKNOWN


def test_events_sorted_and_validated(tmp_path):
    path = tmp_path / "events.json"
    path.write_text('[{"name": "b", "date": "2021-05-01", "kind": "election"},'
                    ' {"name": "a", "date": "2020-01-01"}]', encoding="utf-8")
    events = read_events(path)
    assert [e["name"] for e in events] == ["a", "b"]
    assert events[0]["kind"] == "other"
    bad = tmp_path / "bad.json"
    bad.write_text('[{"name": "x", "date": "2021-01-01", "kind": "coup"}]',
                   encoding="utf-8")
    with pytest.raises(SchemaError):
        read_events(bad)
