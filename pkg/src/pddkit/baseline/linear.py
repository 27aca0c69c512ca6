"""Linear classifiers over hashed features.

LinearModel is a K-class softmax classifier trained under any of the three
loss regimes; MultiTaskModel carries six sigmoid heads plus one 3-class
softmax head on shared features.  Training is deterministic full-batch
gradient descent with backtracking halving, so the loss history is
monotone non-increasing.
"""

from __future__ import annotations

import io
import json
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.special import expit

from ..errors import DataError, DegenerateDataError, ModelFormatError, SchemaError
from ..records import FLAG_FIELDS, Characteristics
from .features import check_dim, to_matrix
from .losses import EPSILON, LossConfig, LossKind, inverse_frequency_weights

MODEL_FORMAT = "pdd-linear/1"


def _as_matrix(features, dim: int) -> sparse.csr_matrix:
    if sparse.issparse(features):
        if features.shape[1] != dim:
            raise SchemaError(f"feature matrix has dim {features.shape[1]}, expected {dim}")
        return features.tocsr()
    return to_matrix(list(features), dim)


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


class LinearModel:
    """Softmax linear classifier with sparse inputs."""

    def __init__(self, dim: int, n_classes: int, loss: LossConfig = LossConfig(),
                 seed: int = 0, weights: Optional[np.ndarray] = None,
                 bias: Optional[np.ndarray] = None):
        check_dim(dim)
        if n_classes < 2:
            raise SchemaError(f"need at least 2 classes, got {n_classes}")
        self.dim = dim
        self.n_classes = n_classes
        self.loss = loss
        self.seed = seed
        if weights is None:
            rng = np.random.RandomState(seed)
            weights = rng.normal(0.0, 0.01, size=(dim, n_classes))
        if bias is None:
            bias = np.zeros(n_classes)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = np.asarray(bias, dtype=np.float64)
        if self.weights.shape != (dim, n_classes) or self.bias.shape != (n_classes,):
            raise SchemaError("weight/bias shapes do not match (dim, n_classes)")
        self.loss_history: tuple[float, ...] = ()

    def parameters(self) -> list[np.ndarray]:
        return [self.weights, self.bias]

    def predict_proba(self, X) -> np.ndarray:
        X = _as_matrix(X, self.dim)
        return _softmax(X @ self.weights + self.bias)

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X).argmax(axis=1)

    def _loss_terms(self, p_true: np.ndarray, y: np.ndarray):
        """Per-example loss and d(loss)/d(p_true) under the configured regime."""
        p = np.clip(p_true, EPSILON, 1.0)
        kind = self.loss.kind
        if kind is LossKind.DEFAULT:
            return -np.log(p), -1.0 / p
        if kind is LossKind.CLASS_WEIGHTS:
            w = np.asarray(self.loss.class_weights)[y]
            return -w * np.log(p), -w / p
        gamma, alpha = self.loss.gamma, self.loss.alpha_t
        u = np.clip(1.0 - p, 0.0, 1.0)
        losses = -alpha * np.power(u, gamma) * np.log(p)
        if gamma == 0.0:
            dldp = -alpha / p
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                term1 = np.where(u > 0.0,
                                 alpha * gamma * np.power(u, gamma - 1.0) * np.log(p),
                                 0.0)
            dldp = term1 - alpha * np.power(u, gamma) / p
        return losses, dldp

    def loss_and_grad(self, X, y: Sequence[int]):
        X = _as_matrix(X, self.dim)
        y = np.asarray(y, dtype=np.int64)
        n = X.shape[0]
        if n == 0:
            raise DataError("empty batch")
        if y.min() < 0 or y.max() >= self.n_classes:
            raise SchemaError(f"labels outside [0, {self.n_classes})")
        P = _softmax(X @ self.weights + self.bias)
        p_true = P[np.arange(n), y]
        losses, dldp = self._loss_terms(p_true, y)
        onehot = np.zeros_like(P)
        onehot[np.arange(n), y] = 1.0
        # dL/dz_k = dL/dp_y * p_y * (1[k = y] - p_k), averaged over the batch
        dZ = (dldp * p_true)[:, None] * (onehot - P) / n
        grad_w = (X.T @ dZ)
        if sparse.issparse(grad_w):
            grad_w = np.asarray(grad_w.todense())
        grad_b = dZ.sum(axis=0)
        return float(losses.mean()), [np.asarray(grad_w), grad_b]

    def loss_only(self, X, y) -> float:
        return self.loss_and_grad(X, y)[0]


class MultiTaskModel:
    """Six sigmoid flag heads and one 3-class intensity head on shared features."""

    N_FLAGS = len(FLAG_FIELDS)
    N_HEADS = N_FLAGS + 1

    def __init__(self, dim: int, seed: int = 0,
                 flag_weights: Optional[np.ndarray] = None,
                 flag_bias: Optional[np.ndarray] = None,
                 intensity_weights: Optional[np.ndarray] = None,
                 intensity_bias: Optional[np.ndarray] = None):
        check_dim(dim)
        self.dim = dim
        self.seed = seed
        rng = np.random.RandomState(seed)
        self.flag_weights = (np.asarray(flag_weights, dtype=np.float64)
                             if flag_weights is not None
                             else rng.normal(0.0, 0.01, size=(dim, self.N_FLAGS)))
        self.flag_bias = (np.asarray(flag_bias, dtype=np.float64)
                          if flag_bias is not None else np.zeros(self.N_FLAGS))
        self.intensity_weights = (np.asarray(intensity_weights, dtype=np.float64)
                                  if intensity_weights is not None
                                  else rng.normal(0.0, 0.01, size=(dim, 3)))
        self.intensity_bias = (np.asarray(intensity_bias, dtype=np.float64)
                               if intensity_bias is not None else np.zeros(3))
        self.loss_history: tuple[float, ...] = ()

    def parameters(self) -> list[np.ndarray]:
        return [self.flag_weights, self.flag_bias,
                self.intensity_weights, self.intensity_bias]

    def head_probabilities(self, X):
        X = _as_matrix(X, self.dim)
        sig = expit(X @ self.flag_weights + self.flag_bias)
        soft = _softmax(X @ self.intensity_weights + self.intensity_bias)
        return sig, soft

    def predict(self, X) -> list[Characteristics]:
        sig, soft = self.head_probabilities(X)
        out = []
        for i in range(sig.shape[0]):
            flags = {name: bool(sig[i, k] >= 0.5) for k, name in enumerate(FLAG_FIELDS)}
            out.append(Characteristics(intensity=int(soft[i].argmax()), **flags))
        return out

    @staticmethod
    def targets_from_characteristics(items: Sequence[Characteristics]):
        flags = np.asarray([[float(getattr(c, name)) for name in FLAG_FIELDS]
                            for c in items])
        intensity = np.asarray([c.intensity for c in items], dtype=np.int64)
        return flags, intensity

    def loss_and_grad(self, X, targets):
        flags, intensity = targets
        X = _as_matrix(X, self.dim)
        flags = np.asarray(flags, dtype=np.float64)
        intensity = np.asarray(intensity, dtype=np.int64)
        n = X.shape[0]
        if n == 0:
            raise DataError("empty batch")
        sig, soft = self.head_probabilities(X)
        sig_c = np.clip(sig, EPSILON, 1.0 - EPSILON)
        bce = -(flags * np.log(sig_c) + (1.0 - flags) * np.log(1.0 - sig_c))
        p_int = np.clip(soft[np.arange(n), intensity], EPSILON, 1.0)
        loss = float((bce.sum(axis=1) - np.log(p_int)).mean() / self.N_HEADS)
        scale = 1.0 / (n * self.N_HEADS)
        d_flag = (sig - flags) * scale
        onehot = np.zeros_like(soft)
        onehot[np.arange(n), intensity] = 1.0
        d_int = (soft - onehot) * scale
        grad_fw = X.T @ d_flag
        grad_iw = X.T @ d_int
        if sparse.issparse(grad_fw):
            grad_fw = np.asarray(grad_fw.todense())
            grad_iw = np.asarray(grad_iw.todense())
        return loss, [np.asarray(grad_fw), d_flag.sum(axis=0),
                      np.asarray(grad_iw), d_int.sum(axis=0)]

    def loss_only(self, X, targets) -> float:
        return self.loss_and_grad(X, targets)[0]


def _descend(model, X, targets, epochs: int, learning_rate: float,
             tol: float = 1e-12, max_halvings: int = 50) -> None:
    """Full-batch descent; a step is only taken if it does not increase
    the loss, halving the rate until it does not."""
    params = model.parameters()
    loss, grads = model.loss_and_grad(X, targets)
    history = [loss]
    lr = learning_rate
    for _epoch in range(epochs):
        stalled = True
        for _try in range(max_halvings):
            for p, g in zip(params, grads):
                p -= lr * g
            new_loss, new_grads = model.loss_and_grad(X, targets)
            if new_loss <= loss:
                stalled = False
                break
            for p, g in zip(params, grads):
                p += lr * g
            lr /= 2.0
        if stalled:
            break
        improved = loss - new_loss
        loss, grads = new_loss, new_grads
        history.append(loss)
        if improved < tol:
            break
    model.loss_history = tuple(history)


def train_linear(features, labels: Sequence[int], *, dim: int,
                 n_classes: Optional[int] = None, loss: LossConfig = LossConfig(),
                 epochs: int = 200, learning_rate: float = 1.0,
                 seed: int = 0) -> LinearModel:
    """Train a softmax linear model; deterministic for a fixed seed."""
    X = _as_matrix(features, dim)
    y = list(labels)
    if X.shape[0] != len(y):
        raise SchemaError(f"{X.shape[0]} feature rows vs {len(y)} labels")
    if len(set(y)) < 2:
        raise DegenerateDataError("training data contains a single class")
    if n_classes is None:
        n_classes = max(y) + 1
    if loss.kind is LossKind.CLASS_WEIGHTS and loss.class_weights is None:
        loss = LossConfig(kind=LossKind.CLASS_WEIGHTS,
                          class_weights=inverse_frequency_weights(y, n_classes))
    model = LinearModel(dim=dim, n_classes=n_classes, loss=loss, seed=seed)
    _descend(model, X, y, epochs=epochs, learning_rate=learning_rate)
    return model


def train_multitask(features, characteristics: Sequence[Characteristics], *,
                    dim: int, epochs: int = 200, learning_rate: float = 1.0,
                    seed: int = 0) -> MultiTaskModel:
    """Train the seven-head model on attribute-annotated positives."""
    X = _as_matrix(features, dim)
    if X.shape[0] != len(characteristics):
        raise SchemaError(f"{X.shape[0]} feature rows vs {len(characteristics)} targets")
    if X.shape[0] == 0:
        raise DegenerateDataError("no training examples")
    targets = MultiTaskModel.targets_from_characteristics(list(characteristics))
    model = MultiTaskModel(dim=dim, seed=seed)
    _descend(model, X, targets, epochs=epochs, learning_rate=learning_rate)
    return model


def grad_check(model, X, targets, step: float = 1e-5) -> float:
    """Max relative deviation between analytic and central-difference
    gradients over every parameter coordinate."""
    X = _as_matrix(X, model.dim)
    _loss, grads = model.loss_and_grad(X, targets)
    worst = 0.0
    for param, grad in zip(model.parameters(), grads):
        flat_p = param.reshape(-1)
        flat_g = np.asarray(grad).reshape(-1)
        for idx in range(flat_p.size):
            saved = flat_p[idx]
            flat_p[idx] = saved + step
            up = model.loss_only(X, targets)
            flat_p[idx] = saved - step
            down = model.loss_only(X, targets)
            flat_p[idx] = saved
            numeric = (up - down) / (2.0 * step)
            analytic = flat_g[idx]
            denom = max(abs(analytic) + abs(numeric), 1e-8)
            worst = max(worst, abs(analytic - numeric) / denom)
    return worst


# -- model files ---------------------------------------------------------------

def save_model(model, path, task: str = "", label_map_id: str = "") -> None:
    """Weight dump with a self-describing header; exact path, no suffixing."""
    if isinstance(model, LinearModel):
        header = {"format": MODEL_FORMAT, "model": "linear", "dim": model.dim,
                  "classes": model.n_classes, "seed": model.seed,
                  "loss": {"kind": model.loss.kind.value,
                           "class_weights": list(model.loss.class_weights)
                           if model.loss.class_weights else None,
                           "gamma": model.loss.gamma, "alpha_t": model.loss.alpha_t},
                  "task": task, "label_map_id": label_map_id}
        arrays = {"weights": model.weights, "bias": model.bias}
    elif isinstance(model, MultiTaskModel):
        header = {"format": MODEL_FORMAT, "model": "multitask", "dim": model.dim,
                  "classes": 3, "seed": model.seed, "loss": {"kind": "default"},
                  "task": task, "label_map_id": label_map_id}
        arrays = {"flag_weights": model.flag_weights, "flag_bias": model.flag_bias,
                  "intensity_weights": model.intensity_weights,
                  "intensity_bias": model.intensity_bias}
    else:
        raise ModelFormatError(f"cannot save {type(model).__name__}")
    buffer = io.BytesIO()
    np.savez(buffer, header=np.frombuffer(
        json.dumps(header).encode("utf-8"), dtype=np.uint8), **arrays)
    with open(path, "wb") as fh:
        fh.write(buffer.getvalue())


def load_model(path):
    try:
        bundle = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from None
    if "header" not in bundle:
        raise ModelFormatError(f"{path}: missing model header")
    try:
        header = json.loads(bytes(bundle["header"]).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: bad model header: {exc}") from None
    if header.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{path}: format {header.get('format')!r}, "
                               f"expected {MODEL_FORMAT!r}")
    kind = header.get("model")
    if kind == "linear":
        loss_spec = header.get("loss", {})
        weights = loss_spec.get("class_weights")
        loss = LossConfig(kind=LossKind(loss_spec.get("kind", "default")),
                          class_weights=tuple(weights) if weights else None,
                          gamma=loss_spec.get("gamma", 2.0),
                          alpha_t=loss_spec.get("alpha_t", 1.0))
        model = LinearModel(dim=int(header["dim"]), n_classes=int(header["classes"]),
                            loss=loss, seed=int(header.get("seed", 0)),
                            weights=bundle["weights"], bias=bundle["bias"])
    elif kind == "multitask":
        model = MultiTaskModel(dim=int(header["dim"]), seed=int(header.get("seed", 0)),
                               flag_weights=bundle["flag_weights"],
                               flag_bias=bundle["flag_bias"],
                               intensity_weights=bundle["intensity_weights"],
                               intensity_bias=bundle["intensity_bias"])
    else:
        raise ModelFormatError(f"{path}: unknown model kind {kind!r}")
    model.file_header = header
    return model
