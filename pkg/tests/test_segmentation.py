import json
import random
import re
from pathlib import Path

from pddkit import segment_document, segment_text

FIXTURE = Path(__file__).parent / "fixtures" / "segmentation_he.json"


def test_hand_segmented_fixture():
    cases = json.loads(FIXTURE.read_text(encoding="utf-8"))["cases"]
    assert len(cases) == 20
    for case in cases:
        assert segment_text(case["text"]) == case["sentences"], case["text"]


def test_reconstruction_modulo_whitespace():
    # Joining the output and collapsing whitespace reproduces the input.
    rng = random.Random(5)
    words = ["שלום", "מה", "נשמע", "טוב", "מאוד", "היום", "אמר", "הוא"]
    for _ in range(300):
        parts = []
        for _s in range(rng.randrange(1, 5)):
            parts.append(" ".join(rng.choice(words)
                                  for _ in range(rng.randrange(1, 7))))
            parts.append(rng.choice([". ", "? ", "! ", "... ", ".\n"]))
        text = "".join(parts)
        joined = " ".join(segment_text(text))
        assert re.sub(r"\s+", " ", joined).strip() == \
            re.sub(r"\s+", " ", text).strip()


def test_abbreviation_not_split():
    sentences = segment_text("Dr. Cohen spoke first. Then he left.")
    assert sentences == ["Dr. Cohen spoke first.", "Then he left."]


def test_decimal_not_split():
    assert segment_text("העלות היא 3.5 מיליון שקל.") == \
        ["העלות היא 3.5 מיליון שקל."]


def test_closing_quote_attaches_left():
    # A terminal inside quotes ends the sentence; the closer stays with it.
    sentences = segment_text('הוא אמר "די!" ויצא מהאולם.')
    assert sentences == ['הוא אמר "די!"', 'ויצא מהאולם.']


def test_segment_document_ids():
    pairs = segment_document("doc3", "משפט ראשון. משפט שני!")
    assert [p[0] for p in pairs] == ["doc3#s1", "doc3#s2"]
    assert pairs[1][1] == "משפט שני!"


def test_whitespace_only_document():
    assert segment_document("d", "   \n  ") == []
