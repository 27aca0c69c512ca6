"""In-repo verifiable classifier: hashed features, linear models, the three
loss regimes, the multi-task head, and in-process pipeline backends.
"""

from __future__ import annotations

from typing import Sequence

from ..backends import BackendDescriptor, BackendKind, Transport
from ..codecs import encode_stage1_target, encode_stage2_target
from ..errors import SchemaError
from ..labelmap import LabelMap
from .features import (
    DEFAULT_DIM,
    FeatureVector,
    featurize,
    featurize_matrix,
    to_matrix,
    tokenize,
)
from .linear import (
    LinearModel,
    MultiTaskModel,
    grad_check,
    load_model,
    save_model,
    train_linear,
    train_multitask,
)
from .losses import (
    LossConfig,
    LossKind,
    cross_entropy,
    focal_loss,
    inverse_frequency_weights,
    multitask_loss,
    pointwise_loss,
    weighted_ce,
)

__all__ = [
    "DEFAULT_DIM", "FeatureVector", "featurize", "featurize_matrix", "to_matrix",
    "tokenize", "LinearModel", "MultiTaskModel", "grad_check", "load_model",
    "save_model", "train_linear", "train_multitask", "LossConfig", "LossKind",
    "cross_entropy", "focal_loss", "inverse_frequency_weights", "multitask_loss",
    "pointwise_loss", "weighted_ce", "model_backend", "BinaryModelBackend",
    "CharacteristicsModelBackend",
]


class BinaryModelBackend:
    """Stage-1 backend over a trained 2-class linear model.

    Class 1 is the positive class; ``infer_scores`` exposes its probability
    so the pipeline can apply a configurable threshold.
    """

    def __init__(self, model: LinearModel, label_map: LabelMap, model_id: str = ""):
        if model.n_classes != 2:
            raise SchemaError(f"stage-1 backend needs a 2-class model, "
                              f"got {model.n_classes}")
        self.model = model
        self.label_map = label_map
        self.descriptor = BackendDescriptor(
            id=model_id or "baseline:binary", kind=BackendKind.BINARY,
            transport=Transport.IN_PROCESS, label_map_id=label_map.id)

    def _scores(self, sentences: Sequence[str]):
        X = featurize_matrix(list(sentences), self.model.dim)
        return self.model.predict_proba(X)[:, 1]

    def infer_scores(self, sentences: Sequence[str]) -> list[float]:
        return [float(p) for p in self._scores(sentences)]

    def infer(self, sentences: Sequence[str]) -> list[str]:
        return [encode_stage1_target(bool(p >= 0.5), self.label_map)
                for p in self._scores(sentences)]


class CharacteristicsModelBackend:
    """Stage-2 characteristics backend over a trained multi-task model."""

    def __init__(self, model: MultiTaskModel, label_map: LabelMap, model_id: str = ""):
        self.model = model
        self.label_map = label_map
        self.descriptor = BackendDescriptor(
            id=model_id or "baseline:characteristics",
            kind=BackendKind.CHARACTERISTICS,
            transport=Transport.IN_PROCESS, label_map_id=label_map.id)

    def infer(self, sentences: Sequence[str]) -> list[str]:
        X = featurize_matrix(list(sentences), self.model.dim)
        return [encode_stage2_target(c, self.label_map)
                for c in self.model.predict(X)]


def model_backend(model, kind: BackendKind, label_map: LabelMap, model_id: str = ""):
    if kind is BackendKind.BINARY:
        if not isinstance(model, LinearModel):
            raise SchemaError("binary backend needs a LinearModel")
        return BinaryModelBackend(model, label_map, model_id)
    if kind is BackendKind.CHARACTERISTICS:
        if not isinstance(model, MultiTaskModel):
            raise SchemaError("characteristics backend needs a MultiTaskModel")
        return CharacteristicsModelBackend(model, label_map, model_id)
    raise SchemaError(f"no in-repo model for task kind {kind.value!r}")
