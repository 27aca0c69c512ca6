"""Hashed bag-of-tokens features: unigrams and token bigrams mapped into a
fixed dimension by a keyed stable hash.  No fitted vocabulary, so the same
text always yields the same vector.
"""

from __future__ import annotations

import hashlib
import re
from typing import Sequence

import numpy as np
from scipy import sparse

from ..errors import SchemaError

DEFAULT_DIM = 2 ** 18
_MIN_DIM = 2 ** 10
_WORD = re.compile(r"\w+")

FeatureVector = dict[int, float]


def tokenize(text: str) -> list[str]:
    return _WORD.findall(text.lower())


def _index(kind: str, token: str, dim: int) -> int:
    digest = hashlib.blake2b(f"{kind}\x00{token}".encode("utf-8"),
                             digest_size=8).digest()
    return int.from_bytes(digest, "big") & (dim - 1)


def check_dim(dim: int) -> int:
    if dim < _MIN_DIM or dim & (dim - 1) != 0:
        raise SchemaError(f"feature dimension must be a power of two >= {_MIN_DIM}, "
                          f"got {dim}")
    return dim


def featurize(text: str, dim: int = DEFAULT_DIM) -> FeatureVector:
    """Sparse counts of hashed unigrams and bigrams, indices in [0, dim)."""
    check_dim(dim)
    tokens = tokenize(text)
    vector: FeatureVector = {}
    for token in tokens:
        idx = _index("1", token, dim)
        vector[idx] = vector.get(idx, 0.0) + 1.0
    for left, right in zip(tokens, tokens[1:]):
        idx = _index("2", f"{left}\x00{right}", dim)
        vector[idx] = vector.get(idx, 0.0) + 1.0
    return vector


def to_matrix(vectors: Sequence[FeatureVector], dim: int) -> sparse.csr_matrix:
    """Stack sparse feature dicts into an N x dim CSR matrix."""
    check_dim(dim)
    data, indices, indptr = [], [], [0]
    for vec in vectors:
        for idx, value in sorted(vec.items()):
            if not 0 <= idx < dim:
                raise SchemaError(f"feature index {idx} outside [0, {dim})")
            if value < 0:
                raise SchemaError(f"negative feature count {value} at index {idx}")
            indices.append(idx)
            data.append(value)
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64),
         np.asarray(indices, dtype=np.int64),
         np.asarray(indptr, dtype=np.int64)),
        shape=(len(vectors), dim))


def featurize_matrix(texts: Sequence[str], dim: int = DEFAULT_DIM) -> sparse.csr_matrix:
    return to_matrix([featurize(t, dim) for t in texts], dim)
