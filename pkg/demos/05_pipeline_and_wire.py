"""
Two-stage pipeline gating and the inference wire protocol
=========================================================

"""

# Stage 1 reads every sentence and outputs a true/false token. Only the
# positives go on to stage 2, which fills in characteristics and target
# spans. Negative records never carry stage-2 fields.
from pddkit import DEFAULT_LABEL_MAP, run_pipeline, mock_backend
from pddkit.backends import BackendKind, CountingBackend

sentences = [(f"s{i}", f"משפט {i} " + ("בוגדים" if i % 3 == 0 else "רגיל"))
             for i in range(9)]

stage1 = mock_backend(BackendKind.BINARY, "echo", DEFAULT_LABEL_MAP)


class KeywordStage1:
    """Toy stage 1: positive iff the sentence mentions the keyword."""

    descriptor = stage1.descriptor

    def infer(self, batch):
        true_token = "אמת"
        false_token = "שקר"
        return [true_token if "בוגדים" in s else false_token for s in batch]


stage2c = CountingBackend(mock_backend(BackendKind.CHARACTERISTICS, "zero",
                                       DEFAULT_LABEL_MAP))
stage2s = CountingBackend(mock_backend(BackendKind.SPAN, "echo",
                                       DEFAULT_LABEL_MAP))

predictions = run_pipeline(KeywordStage1(), stage2c, stage2s, sentences,
                           DEFAULT_LABEL_MAP)
positives = [p.sentence_id for p in predictions if p.delegit]
print("positives:", positives)
print("stage-2 saw", stage2c.sentences_seen, "sentences —",
      "exactly the positive set" if stage2c.sentences_seen == len(positives)
      else "GATING BROKEN")

# Remote backends speak a tiny JSON protocol: one POST /infer with a task
# name, a label-map id, and a batch of sentences; outputs come back
# aligned one-to-one. Here the server runs in-process via the test client.
from fastapi.testclient import TestClient
from pddkit import PROTOCOL, build_infer_request
from pddkit.backends import create_wire_app

app = create_wire_app({"binary": KeywordStage1()})
client = TestClient(app)

request = build_infer_request("binary", DEFAULT_LABEL_MAP.id,
                              [s for _sid, s in sentences[:4]])
response = client.post("/infer", json=request)
print("wire outputs:", response.json()["outputs"])

# Version skew is rejected loudly, not silently coerced.
stale = dict(request, protocol="pdd-infer/0")
response = client.post("/infer", json=stale)
print("stale protocol ->", response.status_code,
      response.json()["error"]["kind"])

# The same checks gate any third-party server: run_contract_checks returns
# an empty list when a server honors the protocol.
from pddkit import run_contract_checks

failures = run_contract_checks(
    lambda body: (client.post("/infer", json=body).status_code,
                  client.post("/infer", json=body).json()),
    task="binary", label_map_id=DEFAULT_LABEL_MAP.id)
print("contract failures:", failures or "none")
