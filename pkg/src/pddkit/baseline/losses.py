"""Pointwise loss functions and their configuration.

All functions take the predicted probability of the true class and return
a non-negative loss.  Callers clamp probabilities to [1e-12, 1] before the
call; a non-positive probability is a domain error here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

from ..errors import DataError, SchemaError
from ..records import FLAG_FIELDS

EPSILON = 1e-12


class LossKind(str, Enum):
    DEFAULT = "default"
    CLASS_WEIGHTS = "class_weights"
    FOCAL = "focal"


@dataclass(frozen=True)
class LossConfig:
    kind: LossKind = LossKind.DEFAULT
    class_weights: Optional[tuple[float, ...]] = None
    gamma: float = 2.0
    alpha_t: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", LossKind(self.kind))
        if self.kind is LossKind.CLASS_WEIGHTS:
            if not self.class_weights:
                raise SchemaError("class_weights loss requires weights")
            if any(w <= 0 for w in self.class_weights):
                raise SchemaError("class weights must be positive")
            object.__setattr__(self, "class_weights",
                               tuple(float(w) for w in self.class_weights))
        if self.kind is LossKind.FOCAL:
            if self.gamma < 0:
                raise SchemaError(f"focal gamma must be >= 0, got {self.gamma}")
            if not 0 < self.alpha_t <= 1:
                raise SchemaError(f"focal alpha_t must be in (0, 1], got {self.alpha_t}")


def _check_probability(p: float) -> None:
    if p <= 0.0:
        raise DataError(f"probability {p} outside (0, 1]; clamp before the call")
    if p > 1.0:
        raise DataError(f"probability {p} exceeds 1")


def cross_entropy(p: float) -> float:
    _check_probability(p)
    return -math.log(p)


def focal_loss(p: float, gamma: float = 2.0, alpha_t: float = 1.0) -> float:
    """-alpha_t * (1 - p)^gamma * log(p); gamma = 0 is plain cross-entropy."""
    _check_probability(p)
    if gamma < 0:
        raise DataError(f"gamma must be >= 0, got {gamma}")
    return -alpha_t * (1.0 - p) ** gamma * math.log(p)


def weighted_ce(p: float, weight: float) -> float:
    """-w * log(p) for the true class's weight w."""
    _check_probability(p)
    if weight <= 0:
        raise DataError(f"class weight must be positive, got {weight}")
    return -weight * math.log(p)


def pointwise_loss(p: float, true_class: int, config: LossConfig) -> float:
    """One example's loss under any of the three regimes."""
    if config.kind is LossKind.DEFAULT:
        return cross_entropy(p)
    if config.kind is LossKind.CLASS_WEIGHTS:
        if true_class >= len(config.class_weights):
            raise SchemaError(f"no weight for class {true_class}")
        return weighted_ce(p, config.class_weights[true_class])
    return focal_loss(p, config.gamma, config.alpha_t)


def inverse_frequency_weights(labels: Sequence[int], n_classes: int) -> tuple[float, ...]:
    """Per-class weights N / (K * count_c); the default weighting choice."""
    counts = [0] * n_classes
    for y in labels:
        if not 0 <= y < n_classes:
            raise SchemaError(f"label {y} outside [0, {n_classes})")
        counts[y] += 1
    if any(c == 0 for c in counts):
        raise DataError(f"cannot weight by inverse frequency: class counts {counts}")
    n = len(labels)
    return tuple(n / (n_classes * c) for c in counts)


MULTITASK_HEADS = FLAG_FIELDS + ("intensity",)


def multitask_loss(head_probabilities: Mapping, gold: Mapping) -> float:
    """Unweighted mean of six binary cross-entropies and one 3-class one.

    Binary heads give the probability of the positive class; the intensity
    head gives a length-3 distribution.  Gold holds booleans/0-1 for the
    flags and 0/1/2 for intensity.
    """
    for head in MULTITASK_HEADS:
        if head not in head_probabilities:
            raise SchemaError(f"missing head {head!r}")
        if head not in gold:
            raise SchemaError(f"missing gold label for head {head!r}")
    total = 0.0
    for head in FLAG_FIELDS:
        p_pos = float(head_probabilities[head])
        if not 0.0 <= p_pos <= 1.0:
            raise DataError(f"head {head!r} probability {p_pos} outside [0, 1]")
        p_true = p_pos if gold[head] else 1.0 - p_pos
        total += cross_entropy(p_true)
    dist = head_probabilities["intensity"]
    if len(dist) != 3:
        raise SchemaError(f"intensity head must give 3 probabilities, got {len(dist)}")
    level = int(gold["intensity"])
    if not 0 <= level <= 2:
        raise SchemaError(f"gold intensity {level} outside {{0, 1, 2}}")
    total += cross_entropy(float(dist[level]))
    return total / len(MULTITASK_HEADS)
