"""
Hashed-feature linear baseline with focal loss
==============================================

"""

import numpy as np

# Texts become sparse vectors by hashing unigrams and bigrams into a
# power-of-two space; no vocabulary is stored.
from pddkit.baseline.features import featurize_matrix

texts_pos = [f"הוא בוגד מספר {i} באומה" for i in range(40)]
texts_neg = [f"הדיון {i} עסק בתקציב החינוך" for i in range(40)]
texts = texts_pos + texts_neg
labels = [1] * 40 + [0] * 40
X = featurize_matrix(texts, dim=2 ** 12)
print("feature matrix:", X.shape, "with", X.nnz, "non-zeros")

# Class imbalance is the norm here (roughly one positive sentence in six),
# so the trainer supports plain, class-weighted, and focal cross-entropy.
from pddkit.baseline.linear import grad_check, train_linear
from pddkit.baseline.losses import LossConfig, LossKind

model = train_linear(X, labels, dim=2 ** 12,
                     loss=LossConfig(kind=LossKind.FOCAL, gamma=2.0),
                     epochs=120, seed=0)
print("loss fell from", round(model.loss_history[0], 4),
      "to", round(model.loss_history[-1], 6),
      "over", len(model.loss_history) - 1, "steps")

accuracy = float((model.predict(X) == np.array(labels)).mean())
print("training accuracy:", accuracy)

# The analytic gradient matches central finite differences; the check runs
# over every coordinate and reports the worst relative error.
worst = grad_check(model, X[:10], labels[:10])
print(f"worst gradient error: {worst:.2e}")

# Models serialize to a single npz with a format header, the task name,
# and the label-map id, so a loaded model refuses mismatched use.
import tempfile
from pathlib import Path

from pddkit.baseline.linear import load_model, save_model

path = Path(tempfile.mkdtemp()) / "binary.npz"
save_model(model, path, task="binary", label_map_id="he-default-1")
reloaded = load_model(path)
print("reload intact:",
      bool(np.array_equal(model.weights, reloaded.weights)),
      reloaded.file_header["task"])

# The seven-head model predicts all stage-2 characteristics at once: six
# binary heads plus the three-way intensity head, trained on a mean of
# per-head losses.
from pddkit import Characteristics
from pddkit.baseline.linear import train_multitask

chars = [Characteristics(intensity=2, incivility=True, person=True)
         if label else Characteristics.zeros() for label in labels]
multitask = train_multitask(X, chars, dim=2 ** 12, epochs=120, seed=0)
predicted = multitask.predict(X[:1])[0]
print("multitask prediction for a positive:", predicted.intensity,
      predicted.incivility, predicted.person)
