"""Softmax-regression training with AdaGrad, batch size 1.

The model is a flattened weight matrix [d x C] plus a bias [C]; training
minimizes a linear combination of features via their analytic gradients,
one shuffled example per step. Each completed run is summarized as an
:class:`~lossforge.losscore.Observation` whose validation error is the
validation log loss (the differentiable stand-in for accuracy-style
metrics).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .losscore import LinearLoss, Observation

if TYPE_CHECKING:  # pragma: no cover
    from .features import FeatureSet

__all__ = [
    "Dataset",
    "TrainState",
    "SoftmaxSpec",
    "init_state",
    "logloss_and_grad",
    "adagrad_step",
    "train_with_warm_start",
    "evaluate_observation",
    "load_dataset_csv",
    "save_checkpoint",
    "load_checkpoint",
]

ADAGRAD_DELTA = 1e-8
_SPLITS = ("train", "validation", "test")

_CKPT_MAGIC = b"LFCHKPT1"
_CKPT_VERSION = 1


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus integer class labels for one split."""

    X: np.ndarray
    y: np.ndarray
    split: str = "train"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-d, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("X must be finite")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("y must be one label per row of X")
        if not np.issubdtype(y.dtype, np.integer):
            yf = np.asarray(y, dtype=np.float64)
            if np.any(yf != np.round(yf)):
                raise ValueError("labels must be integers")
            y = yf.astype(np.int64)
        else:
            y = y.astype(np.int64)
        if np.any(y < 0):
            raise ValueError("labels must be >= 0")
        if self.split not in _SPLITS:
            raise ValueError(f"split must be one of {_SPLITS}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def num_examples(self) -> int:
        return self.X.shape[0]

    @property
    def num_features(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class SoftmaxSpec:
    """Shape of the softmax-regression model."""

    num_features: int
    num_classes: int

    def __post_init__(self):
        if self.num_features < 1 or self.num_classes < 2:
            raise ValueError("need num_features >= 1 and num_classes >= 2")

    @property
    def n(self) -> int:
        """Flattened parameter count: weights [d x C] plus bias [C]."""
        return (self.num_features + 1) * self.num_classes

    def unpack(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d, C = self.num_features, self.num_classes
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.n,):
            raise ValueError(f"theta must have shape ({self.n},), got {theta.shape}")
        return theta[: d * C].reshape(d, C), theta[d * C:]


def infer_spec(theta: np.ndarray, data: Dataset) -> SoftmaxSpec:
    """Recover the model shape from a flattened parameter vector and data."""
    d = data.num_features
    n = np.asarray(theta).shape[0]
    if n % (d + 1) != 0:
        raise ValueError(f"theta length {n} does not fit {d} input features")
    return SoftmaxSpec(d, n // (d + 1))


@dataclass(frozen=True)
class TrainState:
    """Model parameters plus AdaGrad accumulators; immutable snapshot."""

    theta: np.ndarray
    accumulators: np.ndarray
    epoch: int
    rng_seed: int

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        acc = np.asarray(self.accumulators, dtype=np.float64)
        if theta.shape != acc.shape or theta.ndim != 1:
            raise ValueError("theta and accumulators must be equal-length vectors")
        if np.any(acc < 0):
            raise ValueError("accumulators must be nonnegative")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "accumulators", acc)


def init_state(spec: SoftmaxSpec, seed: int) -> TrainState:
    return TrainState(
        theta=np.zeros(spec.n),
        accumulators=np.zeros(spec.n),
        epoch=0,
        rng_seed=int(seed),
    )


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def logloss_and_grad(theta: np.ndarray, data: Dataset) -> tuple[float, np.ndarray]:
    """Mean cross-entropy of softmax predictions and its exact gradient."""
    if data.num_examples == 0:
        raise ValueError("empty dataset")
    spec = infer_spec(theta, data)
    W, bias = spec.unpack(theta)
    logits = data.X @ W + bias
    p = softmax(logits)
    m = data.num_examples
    eps_rows = p[np.arange(m), data.y]
    loss = float(-np.log(np.maximum(eps_rows, 1e-300)).mean())
    gz = p.copy()
    gz[np.arange(m), data.y] -= 1.0
    gz /= m
    gW = data.X.T @ gz
    gb = gz.sum(axis=0)
    return loss, np.concatenate([gW.ravel(), gb])


def adagrad_step(state: TrainState, grad: np.ndarray, lr: float) -> TrainState:
    """One AdaGrad update: accumulate the squared gradient, then step by
    lr * grad / (sqrt(accumulators) + 1e-8). Epoch counter is unchanged."""
    grad = np.asarray(grad, dtype=np.float64)
    acc = state.accumulators + grad * grad
    theta = state.theta - lr * grad / (np.sqrt(acc) + ADAGRAD_DELTA)
    return replace(state, theta=theta, accumulators=acc)


def train_with_warm_start(
    loss: LinearLoss,
    features: "FeatureSet",
    start: TrainState,
    val_data: Dataset,
    epochs: int = 1,
    lr: float = 0.1,
    with_gradients: bool = False,
    model_id: str = "",
) -> tuple[TrainState, Observation]:
    """Continue AdaGrad from a checkpoint against the given linear loss.

    Runs ``epochs`` passes of batch-size-1 AdaGrad in a seeded shuffled
    order over the training examples bound into ``features`` (one epoch is
    the online schedule; more epochs make a full run). Returns the new
    state and the observation of the final model.
    """
    if loss.k != features.k:
        raise ValueError(f"loss has {loss.k} coefficients, features {features.k}")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    lam = loss.lam
    theta = start.theta.copy()
    acc = start.accumulators.copy()
    epoch = start.epoch
    steps = features.steps_per_epoch
    for _ in range(epochs):
        rng = np.random.default_rng([start.rng_seed, epoch])
        order = rng.permutation(steps) if steps > 1 else np.zeros(1, dtype=np.intp)
        for idx in order:
            g = features.training_gradient(lam, theta, int(idx), rng)
            if not np.all(np.isfinite(g)):
                raise RuntimeError(
                    f"non-finite training gradient at epoch {epoch}, "
                    f"example {int(idx)} (model {model_id or 'unnamed'})"
                )
            acc += g * g
            theta -= lr * g / (np.sqrt(acc) + ADAGRAD_DELTA)
        epoch += 1
    new_state = TrainState(theta=theta, accumulators=acc, epoch=epoch,
                           rng_seed=start.rng_seed)
    obs = evaluate_observation(theta, features, val_data, with_gradients,
                               model_id=model_id or f"epoch-{epoch}")
    return new_state, obs


def evaluate_observation(
    theta: np.ndarray,
    features: "FeatureSet",
    val_data: Dataset,
    with_gradients: bool = False,
    model_id: str = "",
) -> Observation:
    """Summarize a model: validation log loss, feature values, and (when
    requested) the validation gradient plus the per-feature Jacobian."""
    ve, gve = logloss_and_grad(theta, val_data)
    fv = features.values(theta)
    if with_gradients:
        return Observation(ve=ve, fv=fv, grad_ve=gve,
                           jacobian=features.jacobian(theta), model_id=model_id)
    return Observation(ve=ve, fv=fv, model_id=model_id)


# ---------------------------------------------------------------------------
# dataset ingestion and checkpoints
# ---------------------------------------------------------------------------


def load_dataset_csv(path, split: str = "train", normalize: bool = False) -> Dataset:
    """Load a headered CSV whose last column is the integer class label.

    With ``normalize`` the feature columns are z-scored (constant columns
    are left centered at zero).
    """
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if raw.shape[1] < 2:
        raise ValueError("need at least one feature column and a label column")
    X = raw[:, :-1]
    y = raw[:, -1]
    if np.any(y != np.round(y)):
        raise ValueError("label column must hold integers")
    if normalize:
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std[std == 0] = 1.0
        X = (X - mean) / std
    return Dataset(X=X, y=y.astype(np.int64), split=split)


def save_checkpoint(state: TrainState, path) -> None:
    """Flat binary checkpoint: 16-byte magic/version header, then the
    parameter and accumulator vectors, the epoch, and the seed."""
    n = state.theta.shape[0]
    with open(path, "wb") as fp:
        fp.write(_CKPT_MAGIC)
        fp.write(struct.pack("<II", _CKPT_VERSION, 0))
        fp.write(struct.pack("<Q", n))
        fp.write(state.theta.astype("<f8").tobytes())
        fp.write(state.accumulators.astype("<f8").tobytes())
        fp.write(struct.pack("<qq", state.epoch, state.rng_seed))


def load_checkpoint(path) -> TrainState:
    data = Path(path).read_bytes()
    if data[:8] != _CKPT_MAGIC:
        raise ValueError("not a checkpoint file (bad magic)")
    version, _ = struct.unpack_from("<II", data, 8)
    if version != _CKPT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    (n,) = struct.unpack_from("<Q", data, 16)
    off = 24
    theta = np.frombuffer(data, dtype="<f8", count=n, offset=off).copy()
    off += 8 * n
    acc = np.frombuffer(data, dtype="<f8", count=n, offset=off).copy()
    off += 8 * n
    epoch, seed = struct.unpack_from("<qq", data, off)
    return TrainState(theta=theta, accumulators=acc, epoch=epoch, rng_seed=seed)
