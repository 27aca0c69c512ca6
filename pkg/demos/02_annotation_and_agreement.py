"""
Annotation workflow, adjudication, and agreement
================================================

"""

import datetime as dt

# The workflow serves every sentence to every annotator, shared-sample
# sentences first, and promotes unanimous submissions to gold records.
from pddkit import AnnotationWorkflow, PddAnnotation, SentenceRecord, Source

sentences = [
    SentenceRecord(id=f"s{i}", text=f"משפט מספר {i} לדוגמה.",
                   source=Source.KNESSET, date=dt.date(2021, 1, 1 + i))
    for i in range(4)
]
flow = AnnotationWorkflow(sentences, annotators=["a1", "a2"],
                          shared_sample=["s0", "s1", "s2", "s3"])

task = flow.next_task("a1")
print("first task for a1:", task.sentence_id)

# a1 and a2 agree on s0..s2 and disagree on s3.
for annotator in ("a1", "a2"):
    for i in range(4):
        delegit = [False, True, False, annotator == "a1"][i]
        ann = PddAnnotation(sentence_id=f"s{i}", annotator_id=annotator,
                            delegit=delegit,
                            **({"intensity": 1} if delegit else {}))
        flow.submit_annotation(annotator, ann)

# Unanimous sentences became gold automatically; the conflict sits in the
# adjudication queue until a third party decides.
print("gold so far:", [g.sentence_id for g in flow.gold_records()])
print("queue:", flow.adjudication_queue())

final = PddAnnotation(sentence_id="s3", annotator_id="judge", delegit=False)
flow.adjudicate("s3", final, adjudicator_id="judge")
print("gold after adjudication:", [g.sentence_id for g in flow.gold_records()])

# Agreement mathematics work from the raw submissions: Cohen's kappa on
# the binary label per annotator pair, plus a Pearson correlation over the
# same 0/1 vectors.
report = flow.agreement()
pair = ("a1", "a2")
print(f"kappa({pair[0]}, {pair[1]}) = {report.kappa[pair]:.3f} "
      f"over {report.pair_counts[pair]} shared sentences")

# The same numbers are reachable over HTTP. The service wraps a workflow;
# here an in-process test client stands in for a real deployment.
from fastapi.testclient import TestClient
from pddkit.service import create_app

client = TestClient(create_app(flow))
print("GET /agreement ->", client.get("/agreement").json()["avg_kappa"])
