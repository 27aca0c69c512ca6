"""
Corpus handling, sentence segmentation, and span markup
=======================================================

"""

import datetime as dt

# Build a corpus from raw rows. Each row needs an id, text, source, and
# ISO date; speaker and document ids are optional.
from pddkit import ingest

rows = [
    {"id": "d1#s1", "text": "חברי הכנסת, הדיון יתחיל מיד.",
     "source": "knesset", "date": "2021-03-01", "speaker_id": "mk-7"},
    {"id": "d1#s2", "text": "הם בוגדים בציבור ואין להם מקום בבית הזה!",
     "source": "knesset", "date": "2021-03-01", "speaker_id": "mk-7"},
    {"id": "fb-1", "text": "הממשלה הזו פועלת נגד טובת הכלל.",
     "source": "facebook", "date": "2021-03-02", "speaker_id": "mk-3"},
]
corpus = ingest(rows)
print(f"{len(corpus)} sentences from {len(set(r.speaker_id for r in corpus))} speakers")

# Documents arrive unsegmented; the segmenter cuts on terminal punctuation
# and hands back stable derived ids. Joining the sentences back together
# reproduces the document text modulo whitespace.
from pddkit import segment_document

doc = "השר דיבר ארוכות. האם מישהו הקשיב? קשה לדעת..."
for sent_id, sentence in segment_document("doc9", doc):
    print(sent_id, "->", sentence)

# Target spans mark who or what a sentence delegitimizes. On disk and on
# the wire they travel as %%% fences inside the text; parse and render are
# exact inverses.
from pddkit import parse_span_markup, render_span_markup

text = rows[1]["text"]
spans = [(3, 9)]
marked = render_span_markup(text, spans)
print(marked)
clean, recovered = parse_span_markup(marked)
assert clean == text and list(recovered) == spans

# Descriptive statistics summarize a corpus and its annotations: totals,
# per-source shares, the positive rate, and characteristic rates among the
# annotated positives.
from pddkit import PddAnnotation, corpus_stats, render_stats

annotations = [
    PddAnnotation(sentence_id="d1#s1", annotator_id="a1", delegit=False),
    PddAnnotation(sentence_id="d1#s2", annotator_id="a1", delegit=True,
                  intensity=2, incivility=True, person=True,
                  target_spans=(tuple(spans[0]),)),
    PddAnnotation(sentence_id="fb-1", annotator_id="a1", delegit=True,
                  intensity=1, common_good=True, institute=True),
]
print(render_stats(corpus_stats(corpus, annotations)))
