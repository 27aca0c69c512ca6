"""Synthetic corpus generators shared by the test suite.

released_shape() reproduces the published dataset's marginal counts so the
stats command can be checked against the printed table without shipping
the real data.
"""

import datetime as dt
import random

from pddkit import Characteristics, PddAnnotation, SentenceRecord, Source
from pddkit.corpus import Corpus

WORDS_NEUTRAL = ["תקציב", "חינוך", "בריאות", "ועדה", "נאום", "הצבעה",
                 "ממשלה", "כנסת", "עירייה", "תשתיות"]
WORDS_LOADED = ["בוגדים", "אויבים", "עבריינים", "שקרנים", "מסיתים"]


def _sentence(rng, positive):
    words = [rng.choice(WORDS_NEUTRAL) for _ in range(rng.randrange(4, 9))]
    span = None
    if positive:
        target = rng.choice(WORDS_LOADED)
        k = rng.randrange(len(words))
        words[k] = target
        start = sum(len(w) + 1 for w in words[:k])
        span = (start, start + len(target))
    return " ".join(words), span


def small_corpus(n=200, seed=7, positive_rate=0.3, n_speakers=8,
                 start=dt.date(2020, 1, 1), days=720):
    """General-purpose corpus + gold annotations, fully seeded."""
    rng = random.Random(seed)
    speakers = [f"spk{i}" for i in range(n_speakers)]
    corpus = Corpus()
    annotations = []
    for i in range(n):
        positive = rng.random() < positive_rate
        text, span = _sentence(rng, positive)
        corpus.add(SentenceRecord(
            id=f"s{i:05d}", text=text,
            source=rng.choice(list(Source)),
            date=start + dt.timedelta(days=rng.randrange(days)),
            speaker_id=rng.choice(speakers)))
        kwargs = {}
        if positive:
            kwargs = dict(intensity=rng.choice([0, 1, 2]),
                          incivility=rng.random() < 0.5,
                          outgroup=rng.random() < 0.3,
                          common_good=rng.random() < 0.2,
                          group=rng.random() < 0.4,
                          person=rng.random() < 0.6,
                          institute=rng.random() < 0.2,
                          target_spans=(span,))
        annotations.append(PddAnnotation(sentence_id=f"s{i:05d}",
                                         annotator_id="gold",
                                         delegit=positive, **kwargs))
    return corpus, annotations


def separable_corpus(n=400, seed=3):
    """Linearly separable binary corpus: positives always contain a loaded
    word, negatives never do."""
    rng = random.Random(seed)
    texts, labels = [], []
    for i in range(n):
        positive = i % 2 == 0
        text, _span = _sentence(rng, positive)
        texts.append(text)
        labels.append(int(positive))
    return texts, labels


# Published marginals the released-shape corpus must reproduce.
RELEASED_TOTAL = 10410
RELEASED_SOURCES = {"facebook": 6690, "knesset": 2504, "news": 1216}
RELEASED_POSITIVES = 1812
RELEASED_CHAR_SUBSET = 642
RELEASED_CHAR_COUNTS = {"incivility": 157, "common_good": 147, "outgroup": 147,
                        "group": 174, "person": 271, "institute": 163}
RELEASED_SPAN_SUBSET = 628
RELEASED_SPAN_POSITIVE = 345   # 345/628 = 54.94% -> prints as 54.9%
RELEASED_SPAN_TOTAL = 471


def released_shape(seed=20):
    """Corpus + single-annotator gold matching every published marginal."""
    rng = random.Random(seed)
    corpus = Corpus()
    annotations = []
    day0 = dt.date(2019, 1, 1)
    order = []
    for source, count in RELEASED_SOURCES.items():
        order.extend([source] * count)
    positives = set(rng.sample(range(RELEASED_TOTAL), RELEASED_POSITIVES))
    positive_list = sorted(positives)
    char_subset = set(positive_list[:RELEASED_CHAR_SUBSET])
    span_subset = positive_list[:RELEASED_SPAN_SUBSET]

    # Exact per-flag counts inside the characteristic subset.
    flag_sets = {}
    char_list = sorted(char_subset)
    for flag, count in RELEASED_CHAR_COUNTS.items():
        flag_sets[flag] = set(rng.sample(char_list, count))

    # 345 span-subset members get >= 1 span; 471 spans in total means 126
    # of them get a second span.
    with_span = set(span_subset[:RELEASED_SPAN_POSITIVE])
    double_span = set(span_subset[:RELEASED_SPAN_TOTAL - RELEASED_SPAN_POSITIVE])

    for i in range(RELEASED_TOTAL):
        positive = i in positives
        text, span = _sentence(rng, positive)
        sid = f"r{i:05d}"
        corpus.add(SentenceRecord(
            id=sid, text=text, source=Source(order[i]),
            date=day0 + dt.timedelta(days=rng.randrange(1460)),
            speaker_id=f"spk{rng.randrange(120):03d}"))
        if not positive:
            annotations.append(PddAnnotation(sentence_id=sid,
                                             annotator_id="gold",
                                             delegit=False))
            continue
        kwargs = {}
        if i in char_subset:
            kwargs.update(intensity=rng.choice([0, 1, 2]),
                          **{flag: i in flag_sets[flag]
                             for flag in RELEASED_CHAR_COUNTS})
        if i in set(span_subset):
            if i in with_span:
                spans = [span]
                if i in double_span:
                    # Second span: the first word that is not the loaded one.
                    offset = 0
                    for word in text.split(" "):
                        candidate = (offset, offset + len(word))
                        if candidate[1] <= span[0] or candidate[0] >= span[1]:
                            spans.append(candidate)
                            break
                        offset += len(word) + 1
                kwargs["target_spans"] = tuple(sorted(spans))
            else:
                kwargs["target_spans"] = ()
        annotations.append(PddAnnotation(sentence_id=sid, annotator_id="gold",
                                         delegit=True, **kwargs))
    return corpus, annotations
