"""Inter-annotator agreement: Cohen's kappa, Pearson correlation, and the
pairwise report over a shared sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .errors import DataError, UndefinedCorrelationError
from .records import PddAnnotation


def cohen_kappa(labels_a: Sequence, labels_b: Sequence) -> float:
    """Chance-corrected agreement between two aligned label sequences.

    kappa = (p_o - p_e) / (1 - p_e), computed in exact rational arithmetic;
    two identical constant sequences give kappa = 1 by convention.
    """
    if len(labels_a) != len(labels_b):
        raise DataError(f"label sequences differ in length: "
                        f"{len(labels_a)} vs {len(labels_b)}")
    n = len(labels_a)
    if n == 0:
        raise DataError("need at least one aligned label pair")
    matches = sum(1 for a, b in zip(labels_a, labels_b) if a == b)
    counts_a: dict = {}
    counts_b: dict = {}
    for a in labels_a:
        counts_a[a] = counts_a.get(a, 0) + 1
    for b in labels_b:
        counts_b[b] = counts_b.get(b, 0) + 1
    p_o = Fraction(matches, n)
    p_e = Fraction(sum(counts_a[c] * counts_b.get(c, 0) for c in counts_a), n * n)
    if p_e == 1:
        return 1.0 if p_o == 1 else 0.0
    return float((p_o - p_e) / (1 - p_e))


def pairwise_correlation(labels_a: Sequence, labels_b: Sequence) -> float:
    """Pearson correlation of two aligned 0/1 (or numeric) sequences."""
    if len(labels_a) != len(labels_b):
        raise DataError(f"label sequences differ in length: "
                        f"{len(labels_a)} vs {len(labels_b)}")
    n = len(labels_a)
    if n < 2:
        raise DataError("need at least two aligned pairs for correlation")
    xs = [int(a) if isinstance(a, bool) else a for a in labels_a]
    ys = [int(b) if isinstance(b, bool) else b for b in labels_b]
    sx, sy = sum(xs), sum(ys)
    sxx = sum(x * x for x in xs)
    syy = sum(y * y for y in ys)
    sxy = sum(x * y for x, y in zip(xs, ys))
    var_x = n * sxx - sx * sx
    var_y = n * syy - sy * sy
    if var_x == 0 or var_y == 0:
        raise UndefinedCorrelationError("correlation undefined for a constant sequence")
    return (n * sxy - sx * sy) / math.sqrt(var_x * var_y)


@dataclass(frozen=True)
class AgreementReport:
    """All pairwise agreement figures over a shared sample.

    ``correlation`` holds None for pairs where one side is constant; such
    pairs are excluded from ``avg_correlation``.  ``n_shared`` counts
    sentences annotated by at least two annotators.
    """

    annotators: tuple[str, ...]
    kappa: dict[tuple[str, str], float]
    correlation: dict[tuple[str, str], Optional[float]]
    pair_counts: dict[tuple[str, str], int]
    avg_kappa: float
    avg_correlation: Optional[float]
    n_shared: int
    disagreements: tuple[str, ...]


def agreement_report(annotations: Iterable[PddAnnotation]) -> AgreementReport:
    """Pairwise kappa and correlation on the binary labels of a shared sample.

    Each pair is scored on the sentences both its members annotated;
    averages are unweighted over pairs.  Disagreements are sentences whose
    multiply-annotated binary labels are not unanimous.
    """
    by_annotator: dict[str, dict[str, bool]] = {}
    for ann in annotations:
        by_annotator.setdefault(ann.annotator_id, {})[ann.sentence_id] = ann.delegit
    annotators = tuple(sorted(by_annotator))
    if len(annotators) < 2:
        raise DataError("agreement needs at least two annotators")

    kappas: dict[tuple[str, str], float] = {}
    correlations: dict[tuple[str, str], Optional[float]] = {}
    pair_counts: dict[tuple[str, str], int] = {}
    any_shared = False
    for a, b in combinations(annotators, 2):
        shared = sorted(set(by_annotator[a]) & set(by_annotator[b]))
        pair_counts[(a, b)] = len(shared)
        if not shared:
            continue
        any_shared = True
        va = [by_annotator[a][sid] for sid in shared]
        vb = [by_annotator[b][sid] for sid in shared]
        kappas[(a, b)] = cohen_kappa(va, vb)
        try:
            correlations[(a, b)] = pairwise_correlation(va, vb)
        except (UndefinedCorrelationError, DataError):
            correlations[(a, b)] = None
    if not any_shared:
        raise DataError("no sentence is shared by any annotator pair")

    sentence_labels: dict[str, set[bool]] = {}
    sentence_raters: dict[str, int] = {}
    for labels in by_annotator.values():
        for sid, value in labels.items():
            sentence_labels.setdefault(sid, set()).add(value)
            sentence_raters[sid] = sentence_raters.get(sid, 0) + 1
    multi = [sid for sid, k in sentence_raters.items() if k >= 2]
    disagreements = tuple(sorted(sid for sid in multi if len(sentence_labels[sid]) > 1))

    defined_r = [r for r in correlations.values() if r is not None]
    return AgreementReport(
        annotators=annotators,
        kappa=kappas,
        correlation=correlations,
        pair_counts=pair_counts,
        avg_kappa=sum(kappas.values()) / len(kappas),
        avg_correlation=(sum(defined_r) / len(defined_r)) if defined_r else None,
        n_shared=len(multi),
        disagreements=disagreements,
    )
