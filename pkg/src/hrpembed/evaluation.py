"""Linear-probe and similarity evaluation of float and binary embeddings.

Classification trains a softmax regression (zero-initialized, L2-penalized
mean cross-entropy) with RMSProp or AMSGrad on mini-batches drawn from a
seeded shuffle.  ``cross_validate`` holds out a slice of each training fold
for early stopping: training halts once validation accuracy has failed to
improve for more than ``tenacity`` consecutive epochs, and the best
validation-accuracy parameters are kept.
"""

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .binvec import unpack_rows
from .errors import InvalidArgumentError, ShapeError, TrainingDivergedError
from .projection import CompressionConfig, Method, as_embedding_matrix, init_projection, quantize_matrix
from .rng import MASK64
from .similarity import cosine_rows, estimate_cosine_rows, spearman


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    n_classes: int | None = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ShapeError(f"features {X.shape} and labels {y.shape} do not line up")
        if not np.issubdtype(y.dtype, np.integer):
            if y.size and not np.all(y == np.round(y)):
                raise InvalidArgumentError("labels must be integers")
        y = y.astype(np.int64)
        C = int(self.n_classes) if self.n_classes is not None else int(y.max()) + 1 if y.size else 0
        if C < 2 or X.shape[0] < C:
            raise InvalidArgumentError(f"need n >= C >= 2, got n={X.shape[0]} C={C}")
        if y.min() < 0 or y.max() >= C:
            raise InvalidArgumentError(f"labels must lie in [0, {C})")
        missing = np.setdiff1d(np.arange(C), y)
        if missing.size:
            raise InvalidArgumentError(f"class {missing[0]} has no examples")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "n_classes", C)

    def __len__(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    optimizer: str = "rmsprop"
    batch_size: int = 128
    epochs: int = 2
    tenacity: int = 3
    folds: int = 5
    seed: int = 0
    learning_rate: float = 1e-3
    l2: float = 0.0
    # fraction of each training fold held out for early stopping
    validation_split: float = 0.1

    def __post_init__(self):
        if self.optimizer not in OPTIMIZERS:
            raise InvalidArgumentError(f"unknown optimizer {self.optimizer!r}")
        if self.batch_size < 1 or self.epochs < 1 or self.folds < 1:
            raise InvalidArgumentError("batch_size, epochs and folds must be positive")
        if self.tenacity < 0 or self.l2 < 0 or self.learning_rate < 0:
            raise InvalidArgumentError("tenacity, l2 and learning_rate must be non-negative")
        if not 0.0 <= self.validation_split < 1.0:
            raise InvalidArgumentError("validation_split must lie in [0, 1)")

    @classmethod
    def senteval(cls, **overrides):
        return cls(**{"optimizer": "rmsprop", "batch_size": 128, "tenacity": 3, "epochs": 2, "folds": 5,
                      **overrides})

    @classmethod
    def seeg(cls, **overrides):
        # predefined train/test split, no early stopping
        return cls(**{"optimizer": "amsgrad", "batch_size": 128, "epochs": 500, "folds": 1,
                      "validation_split": 0.0, **overrides})

    def describe(self, protocol=None):
        if protocol == "seeg" or (protocol is None and self.optimizer == "amsgrad"):
            return f"optimizer={self.optimizer} batch={self.batch_size} epochs={self.epochs}"
        return (f"optimizer={self.optimizer} batch={self.batch_size} tenacity={self.tenacity} "
                f"epochs={self.epochs} folds={self.folds}")


@dataclass(eq=False)
class LinearModel:
    weights: np.ndarray
    bias: np.ndarray
    losses: list = field(default_factory=list)

    @classmethod
    def zeros(cls, dim, n_classes):
        return cls(np.zeros((dim, n_classes)), np.zeros(n_classes))

    def copy(self):
        return LinearModel(self.weights.copy(), self.bias.copy(), list(self.losses))

    def logits(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.weights.shape[0]:
            raise ShapeError(f"features have dimension {X.shape[-1]}, model expects {self.weights.shape[0]}")
        return X @ self.weights + self.bias


# -- loss and gradient -------------------------------------------------------

def softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss(model, batch, l2=0.0):
    """Mean cross-entropy plus ``l2/2 * ||W||^2`` (bias is not penalized)."""
    X, y = batch
    z = model.logits(X)
    z = z - z.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    ce = -logp[np.arange(len(y)), y].mean()
    return float(ce + 0.5 * l2 * np.sum(model.weights ** 2))


def gradient_of_loss(model, batch, l2=0.0):
    """Analytic gradient of :func:`loss`; returns ``(dW, db)``."""
    X, y = batch
    X = np.asarray(X, dtype=np.float64)
    if len(y) == 0:
        raise InvalidArgumentError("gradient needs a non-empty batch")
    resid = softmax(model.logits(X))
    resid[np.arange(len(y)), y] -= 1.0
    resid /= len(y)
    return X.T @ resid + l2 * model.weights, resid.sum(axis=0)


# -- optimizers --------------------------------------------------------------

class RMSProp:
    def __init__(self, lr=1e-3, decay=0.9, eps=1e-8):
        self.lr = lr
        self.decay = decay
        self.eps = eps
        self.v = None

    def step(self, params, grads):
        if self.v is None:
            self.v = [np.zeros_like(p) for p in params]
        for p, g, v in zip(params, grads, self.v):
            v *= self.decay
            v += (1 - self.decay) * g * g
            p -= self.lr * g / (np.sqrt(v) + self.eps)


class AMSGrad:
    """Adam with a running maximum of the second moment, no bias correction."""

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = self.v = self.v_max = None

    def step(self, params, grads):
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
            self.v_max = [np.zeros_like(p) for p in params]
        for p, g, m, v, vm in zip(params, grads, self.m, self.v, self.v_max):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            np.maximum(vm, v, out=vm)
            p -= self.lr * m / (np.sqrt(vm) + self.eps)


OPTIMIZERS = {"rmsprop": RMSProp, "amsgrad": AMSGrad}


# -- training ----------------------------------------------------------------

def accuracy(model, X, y):
    return float(np.mean(np.argmax(model.logits(X), axis=1) == y)) if len(y) else float("nan")


def _fit(X, y, n_classes, cfg, validation=None):
    # overflow is reported as TrainingDivergedError below
    with np.errstate(over="ignore", invalid="ignore"):
        return _fit_loop(X, y, n_classes, cfg, validation)


def _fit_loop(X, y, n_classes, cfg, validation):
    n = X.shape[0]
    rng = np.random.default_rng(cfg.seed)
    model = LinearModel.zeros(X.shape[1], n_classes)
    opt = OPTIMIZERS[cfg.optimizer](lr=cfg.learning_rate)
    model.losses.append(loss(model, (X, y), cfg.l2))

    best, best_acc, stale = None, -1.0, 0
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            gW, gb = gradient_of_loss(model, (X[idx], y[idx]), cfg.l2)
            opt.step([model.weights, model.bias], [gW, gb])
        epoch_loss = loss(model, (X, y), cfg.l2)
        if not np.isfinite(epoch_loss) or not np.isfinite(model.weights).all():
            raise TrainingDivergedError(epoch, epoch_loss)
        model.losses.append(epoch_loss)
        if validation is None:
            continue
        acc = accuracy(model, *validation)
        if acc > best_acc:
            best, best_acc, stale = model.copy(), acc, 0
        else:
            stale += 1
            if stale > cfg.tenacity:
                break
    if best is not None:
        best.losses = model.losses
        return best
    return model


def train(data, cfg, validation=None):
    """Fit a softmax classifier; ``validation`` is an optional ``(X, y)`` pair."""
    return _fit(data.features, data.labels, data.n_classes, cfg, validation)


def predict(model, x):
    """Index of the largest logit; ties go to the lowest class index."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"expected one feature vector, got shape {x.shape}")
    return int(np.argmax(model.logits(x)))


@dataclass(frozen=True)
class CVResult:
    fold_accuracies: tuple
    mean: float


def _fold_seed(seed, i):
    return (seed + 1000003 * (i + 1)) & MASK64


def cross_validate(data, cfg):
    if cfg.folds < 2:
        raise InvalidArgumentError("cross validation needs at least two folds")
    n = len(data)
    if n < cfg.folds:
        raise InvalidArgumentError(f"cannot split {n} samples into {cfg.folds} folds")
    X, y = data.features, data.labels
    perm = np.random.default_rng(cfg.seed).permutation(n)
    folds = np.array_split(perm, cfg.folds)
    accs = []
    for i, test_idx in enumerate(folds):
        train_idx = np.concatenate([f for j, f in enumerate(folds) if j != i])
        if np.unique(y[train_idx]).size < data.n_classes:
            warnings.warn(f"fold {i}: some classes are absent from the training split", stacklevel=2)
        n_val = int(cfg.validation_split * train_idx.size)
        validation = None
        if n_val:
            val_idx, train_idx = train_idx[-n_val:], train_idx[:-n_val]
            validation = (X[val_idx], y[val_idx])
        model = _fit(X[train_idx], y[train_idx], data.n_classes,
                     replace(cfg, seed=_fold_seed(cfg.seed, i)), validation)
        accs.append(accuracy(model, X[test_idx], y[test_idx]))
    return CVResult(tuple(accs), float(np.mean(accs)))


def holdout_evaluate(train_data, X_test, y_test, cfg):
    """Train on a predefined split and report accuracy on ``(X_test, y_test)``."""
    X_test = np.asarray(X_test, dtype=np.float64)
    y_test = np.asarray(y_test, dtype=np.int64)
    if X_test.ndim != 2 or X_test.shape[1] != train_data.dim or y_test.shape != (X_test.shape[0],):
        raise ShapeError(f"test split {X_test.shape} does not match training dimension {train_data.dim}")
    if y_test.size and (y_test.min() < 0 or y_test.max() >= train_data.n_classes):
        raise InvalidArgumentError(f"test labels must lie in [0, {train_data.n_classes})")
    model = _fit(train_data.features, train_data.labels, train_data.n_classes, cfg)
    return accuracy(model, X_test, y_test)


def binary_features(X, cfg, W=None):
    """Quantize float features and materialize the bits as 0.0/1.0."""
    return unpack_rows(quantize_matrix(X, cfg, W), cfg.d_t).astype(np.float64)


# -- similarity --------------------------------------------------------------

def sts_eval(pairs_a, pairs_b, gold, cfg):
    """Spearman correlation with gold scores for float cosine and binary estimate."""
    A = as_embedding_matrix(pairs_a)
    B = as_embedding_matrix(pairs_b)
    gold = np.asarray(gold, dtype=np.float64)
    if A.shape != B.shape:
        raise ShapeError(f"pair sides differ in shape: {A.shape} vs {B.shape}")
    if gold.shape != (A.shape[0],):
        raise ShapeError(f"{gold.size} gold scores for {A.shape[0]} pairs")
    if A.shape[0] < 2:
        raise InvalidArgumentError("need at least two pairs")
    rho_float = spearman(cosine_rows(A, B), gold)
    W = init_projection(cfg.seed, cfg.d_s, cfg.d_t) if cfg.method is Method.HRP else None
    est = estimate_cosine_rows(quantize_matrix(A, cfg, W), quantize_matrix(B, cfg, W), cfg.d_t)
    rho_binary = spearman(est, gold)
    return rho_float, rho_binary


def sts_sweep(pairs_a, pairs_b, gold, bits, seeds):
    """``{d_t: [rho_binary per seed]}`` plus the float correlation."""
    A = as_embedding_matrix(pairs_a)
    B = as_embedding_matrix(pairs_b)
    rows = {}
    rho_float = None
    for d_t in bits:
        rows[d_t] = []
        for s in seeds:
            rho_float, rho_bin = sts_eval(A, B, gold, CompressionConfig(Method.HRP, A.shape[1], d_t, s))
            rows[d_t].append(rho_bin)
    return rho_float, rows
