"""
Speaker-level statistics: trends, contrasts, and term profiles
==============================================================

"""

import datetime as dt
import random

# Build a year of synthetic predictions: thirty speakers, each with a
# stable personal base rate that drifts upward in the second half.
from pddkit import Characteristics, PredictionRecord, SentenceRecord, Source, ingest

rng = random.Random(11)
speakers = [f"mk{i:02d}" for i in range(30)]
base_rate = {s: rng.uniform(0.05, 0.30) for s in speakers}

rows, predictions = [], []
for i in range(3000):
    speaker = rng.choice(speakers)
    day = dt.date(2021, 1, 1) + dt.timedelta(days=rng.randrange(365))
    lift = 0.10 if day.month > 6 else 0.0
    positive = rng.random() < base_rate[speaker] + lift
    rows.append({"id": f"s{i}", "text": f"משפט {i} של {speaker}",
                 "source": "knesset", "date": day.isoformat(),
                 "speaker_id": speaker})
    predictions.append(PredictionRecord(
        sentence_id=f"s{i}", model_id="demo", delegit=positive,
        stage1_score=0.9 if positive else 0.1,
        characteristics=Characteristics(intensity=1) if positive else None,
        target_spans=((6, 7 + len(str(i))),) if positive else None))
corpus = ingest(rows)

# Aggregation is always speaker-first: each speaker contributes one share
# per bin, and bins average speakers, so prolific speakers carry no extra
# weight.
from pddkit import speaker_aggregate, temporal_series

result = speaker_aggregate(predictions, corpus, binning="half_year")
points = temporal_series(result.shares, "half_year")
for point in points:
    print(point.period, f"mean share {point.mean_share:.3f} "
          f"over {point.n_speakers} speakers")

# Group contrasts use Welch's unequal-variance t-test over speaker shares.
from pddkit import compare_groups

overall = speaker_aggregate(predictions, corpus)
high_half = {s for s in speakers if base_rate[s] >= 0.175}
comparison = compare_groups(overall.shares,
                            lambda s: "high" if s in high_half else "low")
test = comparison.tests[("high", "low")]
print(f"high vs low: t={test.t:.2f} df={test.df:.1f} p={test.p_value:.2g}")

# Weighted log-odds with an informative Dirichlet prior surface the terms
# one group over-uses relative to the rest; z-scores shrink for rare terms.
from pddkit import weighted_log_odds

counts = {
    "right": {"בוגדים": 30, "אויבים": 12, "שמאלנים": 25, "הממשלה": 40},
    "left": {"בוגדים": 8, "פשיסטים": 22, "מסיתים": 18, "הממשלה": 45},
}
for group, entries in weighted_log_odds(counts, alpha0=50, top_k=3).items():
    print(group, "->", [(e.term, round(e.z, 2)) for e in entries])

# Density curves compare whole distributions, not just means. Bandwidth
# follows the usual rule of thumb and the curve integrates to one.
from pddkit import density_estimate

curve = density_estimate([share.pdd_share for share in overall.shares])
peak = max(zip(curve.ys, curve.xs))
print(f"speaker-share density peaks near {peak[1]:.3f} "
      f"(bandwidth {curve.bandwidth:.4f})")
