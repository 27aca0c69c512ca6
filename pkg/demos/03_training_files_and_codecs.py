"""
Training-file export and target codecs
======================================

"""

import datetime as dt

# Fine-tuning data is plain text: the input sentence, a newline, then the
# answer prefix and the target string. Blocks are separated by one blank
# line. The default label map keeps all keys and label tokens in Hebrew.
from pddkit import (
    DEFAULT_LABEL_MAP,
    PddAnnotation,
    ingest,
    export_training_file,
    parse_training_file,
)
from pddkit.backends import BackendKind

corpus = ingest([
    {"id": "s1", "text": "הדיון בוועדה היה ענייני.",
     "source": "knesset", "date": "2020-05-01"},
    {"id": "s2", "text": "ראש העיר הוא עבריין ושקרן.",
     "source": "news", "date": "2020-05-02"},
])
annotations = [
    PddAnnotation(sentence_id="s1", annotator_id="a", delegit=False),
    PddAnnotation(sentence_id="s2", annotator_id="a", delegit=True,
                  intensity=2, incivility=True, person=True,
                  target_spans=((13, 19),)),
]

text, n, skipped = export_training_file(corpus, annotations, ["s1", "s2"],
                                        BackendKind.BINARY, DEFAULT_LABEL_MAP)
print(f"binary file with {n} examples:")
print(text)

# The span task fences the target inside the sentence itself.
text, n, _ = export_training_file(corpus, annotations, ["s1", "s2"],
                                  BackendKind.SPAN, DEFAULT_LABEL_MAP)
print(f"span file with {n} example:")
print(text)

# parse_training_file is the exact inverse of the export.
pairs = parse_training_file(text)
print("parsed back:", pairs[0][1])

# Decoders accept arbitrary model output. Grammatical output round-trips;
# broken output is repaired where possible and flagged via parse_ok.
from pddkit import Characteristics, decode_stage2_output, encode_stage2_target

target = encode_stage2_target(Characteristics(intensity=2, incivility=True),
                              DEFAULT_LABEL_MAP)
print("stage-2 target:", target)

chars, ok = decode_stage2_output(target, DEFAULT_LABEL_MAP)
assert ok and chars.intensity == 2

# A model that rambles around a JSON object still decodes; one that emits
# garbage decodes to all-zeros with parse_ok False instead of crashing.
chars, ok = decode_stage2_output("בטח! הนี่ התשובה: " + target + " סוף.",
                                 DEFAULT_LABEL_MAP)
print("rambling output ok:", ok, "intensity:", chars.intensity)
chars, ok = decode_stage2_output("אין לי מושג", DEFAULT_LABEL_MAP)
print("garbage output ok:", ok, "->", chars == Characteristics.zeros())
