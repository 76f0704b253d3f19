"""Feature-vector builders for linear training losses.

Three families are provided: the standard regularizer set (L1, squared L2,
uniform-label loss, dropout loss, plus the data log loss), sums of hinge
functions over a fixed breakpoint grid (whose nonnegative combinations span
the convex piecewise-linear functions with kinks on that grid), and mixtures
of arbitrary component losses.

A :class:`FeatureSet` bundles per-feature value and gradient evaluators with
a fused per-example gradient used by the batch-size-1 training loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .trainer import Dataset, SoftmaxSpec, infer_spec, logloss_and_grad, softmax

__all__ = [
    "Feature",
    "FeatureSet",
    "Breakpoints",
    "standard_regularizer_features",
    "uniform_label_loss",
    "dropout_loss",
    "pwl_features",
    "select_breakpoints",
    "pwl_feature_set",
    "mixture_features",
    "normalize_mixture",
    "STANDARD_FEATURE_NAMES",
]

STANDARD_FEATURE_NAMES = ("l1", "l2sq", "uniform", "dropout", "logloss")


@dataclass(frozen=True)
class Feature:
    """One scalar feature of the model: a name, its value, and its gradient."""

    name: str
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FeatureSet:
    """Ordered feature definitions plus the training-loop gradient hook.

    ``primary_index`` marks the data-loss coordinate that hyperparameter
    tuning pins to one (None when no coordinate plays that role, as for
    mixtures). ``steps_per_epoch`` is the number of per-example steps a
    training epoch takes against this set.
    """

    features: tuple[Feature, ...]
    primary_index: int | None = None
    steps_per_epoch: int = 1
    sgd_gradient: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate feature names: {names}")
        if self.primary_index is not None and not (
            0 <= self.primary_index < len(self.features)
        ):
            raise ValueError("primary_index out of range")
        if self.steps_per_epoch < 1:
            raise ValueError("steps_per_epoch must be >= 1")
        object.__setattr__(self, "features", tuple(self.features))

    @property
    def k(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def values(self, theta: np.ndarray) -> np.ndarray:
        return np.array([f.value(theta) for f in self.features])

    def jacobian(self, theta: np.ndarray) -> np.ndarray:
        """Column j is the gradient of feature j at theta."""
        return np.column_stack([f.grad(theta) for f in self.features])

    def loss_value(self, lam: np.ndarray, theta: np.ndarray) -> float:
        return float(np.dot(lam, self.values(theta)))

    def training_gradient(
        self, lam: np.ndarray, theta: np.ndarray, example: int, rng
    ) -> np.ndarray:
        """Gradient of the combined loss for one training step. Uses the
        builder's fused per-example path when available, otherwise the sum
        of full analytic feature gradients."""
        if self.sgd_gradient is not None:
            return self.sgd_gradient(lam, theta, example, rng)
        g = np.zeros_like(np.asarray(theta, dtype=np.float64))
        for c, f in zip(lam, self.features):
            if c != 0.0:
                g += c * f.grad(theta)
        return g


# ---------------------------------------------------------------------------
# data-dependent losses
# ---------------------------------------------------------------------------


def uniform_label_loss(theta: np.ndarray, data: Dataset) -> float:
    """Cross-entropy against the uniform label distribution, averaged over
    the dataset: the loss a model pays for being confident anywhere."""
    return _uniform_label_loss_grad(theta, data)[0]


def _uniform_label_loss_grad(theta, data) -> tuple[float, np.ndarray]:
    if data.num_examples == 0:
        raise ValueError("empty dataset")
    spec = infer_spec(theta, data)
    W, bias = spec.unpack(theta)
    logits = data.X @ W + bias
    p = softmax(logits)
    m = data.num_examples
    C = spec.num_classes
    loss = float(-np.log(np.maximum(p, 1e-300)).sum(axis=1).mean() / C)
    gz = (p - 1.0 / C) / m
    gW = data.X.T @ gz
    return loss, np.concatenate([gW.ravel(), gz.sum(axis=0)])


def _dropout_masks(d: int, keep_prob: float, num_masks: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return (rng.random((num_masks, d)) < keep_prob) / keep_prob


def dropout_loss(
    theta: np.ndarray,
    data: Dataset,
    keep_prob: float = 0.5,
    num_masks: int = 64,
    seed: int = 0,
) -> float:
    """Log loss averaged over a fixed bank of input dropout masks.

    Masks are Bernoulli(keep_prob) with inverted scaling, drawn once from
    the seed and shared across examples, which makes the feature (and its
    gradient, the per-mask average) deterministic.
    """
    return _dropout_loss_grad(theta, data, keep_prob, num_masks, seed)[0]


def _dropout_loss_grad(theta, data, keep_prob, num_masks, seed):
    if not (0.0 < keep_prob <= 1.0):
        raise ValueError("keep_prob must be in (0, 1]")
    if num_masks < 1:
        raise ValueError("num_masks must be >= 1")
    spec = infer_spec(theta, data)
    W, bias = spec.unpack(theta)
    masks = _dropout_masks(data.num_features, keep_prob, num_masks, seed)
    m = data.num_examples
    rows = np.arange(m)
    total = 0.0
    gW = np.zeros_like(W)
    gb = np.zeros(spec.num_classes)
    for mask in masks:
        Xm = data.X * mask
        p = softmax(Xm @ W + bias)
        total += float(-np.log(np.maximum(p[rows, data.y], 1e-300)).mean())
        gz = p
        gz[rows, data.y] -= 1.0
        gz /= m
        gW += Xm.T @ gz
        gb += gz.sum(axis=0)
    inv = 1.0 / num_masks
    return total * inv, np.concatenate([(gW * inv).ravel(), gb * inv])


# ---------------------------------------------------------------------------
# piecewise-linear hinge features
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Breakpoints:
    """Strictly increasing grid of kink locations."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("need at least one breakpoint")
        if np.any(np.diff(v) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size


def pwl_features(theta: np.ndarray, breakpoints: Breakpoints) -> np.ndarray:
    """Hinge-sum features: for each breakpoint a, the rising block holds
    sum_i max(0, theta_i - a) and the falling block sum_i max(0, a - theta_i),
    rising block first, each ascending in a."""
    theta = np.asarray(theta, dtype=np.float64)
    diff = theta[:, None] - breakpoints.values[None, :]
    rising = np.maximum(diff, 0.0).sum(axis=0)
    falling = np.maximum(-diff, 0.0).sum(axis=0)
    return np.concatenate([rising, falling])


def select_breakpoints(theta: np.ndarray, count: int) -> Breakpoints:
    """Pick breakpoints as evenly spaced order statistics of the weights,
    so roughly equally many weights land between consecutive picks.
    Duplicate picks collapse, which can return fewer than ``count`` points."""
    theta = np.asarray(theta, dtype=np.float64)
    n = theta.size
    if count < 2:
        raise ValueError("count must be >= 2")
    if n < count:
        raise ValueError(f"need at least {count} weights, got {n}")
    ordered = np.sort(theta)
    idx = np.round(np.arange(count) * (n - 1) / (count - 1)).astype(int)
    return Breakpoints(np.unique(ordered[idx]))


def pwl_feature_set(spec: SoftmaxSpec, train: Dataset,
                    breakpoints: Breakpoints) -> FeatureSet:
    """Log loss (the pinned primary, first) plus the hinge-sum features.

    Nonnegative hinge coefficients make the induced per-weight penalty a
    convex piecewise-linear function with kinks only on the grid.
    """
    bp = breakpoints
    nbp = len(bp)

    def hinge_value(j):
        def value(theta):
            return float(pwl_features(theta, bp)[j])
        return value

    def hinge_grad(j):
        a = bp.values[j % nbp]
        if j < nbp:
            return lambda theta: (np.asarray(theta) >= a).astype(np.float64)
        return lambda theta: -(np.asarray(theta) < a).astype(np.float64)

    features = [Feature("logloss", lambda th: logloss_and_grad(th, train)[0],
                        lambda th: logloss_and_grad(th, train)[1])]
    for j in range(2 * nbp):
        sigma = "+" if j < nbp else "-"
        a = bp.values[j % nbp]
        features.append(Feature(f"hinge{sigma}@{a:.6g}", hinge_value(j),
                                hinge_grad(j)))

    X, y = train.X, train.y
    d, C = spec.num_features, spec.num_classes

    def sgd_gradient(lam, theta, example, rng):
        W = theta[: d * C].reshape(d, C)
        bias = theta[d * C:]
        x = X[example]
        p = softmax(x @ W + bias)
        gz = lam[0] * p
        gz[y[example]] -= lam[0]
        g = np.empty_like(theta)
        g[: d * C] = np.outer(x, gz).ravel()
        g[d * C:] = gz
        # slope of the combined hinge penalty at each weight, via prefix
        # sums over the (sorted) breakpoint grid
        rise = np.concatenate([[0.0], np.cumsum(lam[1: nbp + 1])])
        fall = np.concatenate([[0.0], np.cumsum(lam[nbp + 1:][::-1])])[::-1]
        pos = np.searchsorted(bp.values, theta, side="right")
        g += rise[pos] - fall[pos]
        return g

    return FeatureSet(
        features=tuple(features),
        primary_index=0,
        steps_per_epoch=train.num_examples,
        sgd_gradient=sgd_gradient,
    )


# ---------------------------------------------------------------------------
# standard regularizer set
# ---------------------------------------------------------------------------


def standard_regularizer_features(
    spec: SoftmaxSpec,
    train: Dataset,
    include: Sequence[str] | None = None,
    keep_prob: float = 0.5,
    num_masks: int = 64,
    mask_seed: int = 0,
) -> FeatureSet:
    """The hand-designed regularizer family: L1 and squared L2 norms, the
    uniform-label loss, the fixed-mask dropout loss, and the data log loss
    as the pinned primary (last coordinate).

    ``include`` selects a subset by name, keeping the canonical order.
    """
    if include is None:
        include = STANDARD_FEATURE_NAMES
    unknown = set(include) - set(STANDARD_FEATURE_NAMES)
    if unknown:
        raise ValueError(f"unknown feature names: {sorted(unknown)}")
    include = [n for n in STANDARD_FEATURE_NAMES if n in include]

    defs = {
        "l1": Feature(
            "l1",
            lambda th: float(np.abs(th).sum()),
            lambda th: np.sign(th),
        ),
        "l2sq": Feature(
            "l2sq",
            lambda th: float(np.dot(th, th)),
            lambda th: 2.0 * np.asarray(th, dtype=np.float64),
        ),
        "uniform": Feature(
            "uniform",
            lambda th: _uniform_label_loss_grad(th, train)[0],
            lambda th: _uniform_label_loss_grad(th, train)[1],
        ),
        "dropout": Feature(
            "dropout",
            lambda th: _dropout_loss_grad(th, train, keep_prob, num_masks,
                                          mask_seed)[0],
            lambda th: _dropout_loss_grad(th, train, keep_prob, num_masks,
                                          mask_seed)[1],
        ),
        "logloss": Feature(
            "logloss",
            lambda th: logloss_and_grad(th, train)[0],
            lambda th: logloss_and_grad(th, train)[1],
        ),
    }
    features = tuple(defs[name] for name in include)
    primary = include.index("logloss") if "logloss" in include else None

    pos = {name: i for i, name in enumerate(include)}
    X, y = train.X, train.y
    d, C = spec.num_features, spec.num_classes
    i_l1 = pos.get("l1")
    i_l2 = pos.get("l2sq")
    i_uni = pos.get("uniform")
    i_drop = pos.get("dropout")
    i_log = pos.get("logloss")

    def sgd_gradient(lam, theta, example, rng):
        x = X[example]
        label = y[example]
        W = theta[: d * C].reshape(d, C)
        bias = theta[d * C:]
        gz = np.zeros(C)
        if i_log is not None and lam[i_log] != 0.0 or (
            i_uni is not None and lam[i_uni] != 0.0
        ):
            p = softmax(x @ W + bias)
            if i_log is not None and lam[i_log] != 0.0:
                gz += lam[i_log] * p
                gz[label] -= lam[i_log]
            if i_uni is not None and lam[i_uni] != 0.0:
                gz += lam[i_uni] * (p - 1.0 / C)
        g = np.empty_like(theta)
        gW = np.outer(x, gz)
        gb = gz.copy()
        if i_drop is not None and lam[i_drop] != 0.0:
            # dropout trains with a fresh mask per step; only the feature
            # evaluation uses the fixed bank
            xm = x * ((rng.random(d) < keep_prob) / keep_prob)
            p2 = softmax(xm @ W + bias)
            gz2 = lam[i_drop] * p2
            gz2[label] -= lam[i_drop]
            gW += np.outer(xm, gz2)
            gb += gz2
        g[: d * C] = gW.ravel()
        g[d * C:] = gb
        if i_l1 is not None and lam[i_l1] != 0.0:
            g += lam[i_l1] * np.sign(theta)
        if i_l2 is not None and lam[i_l2] != 0.0:
            g += (2.0 * lam[i_l2]) * theta
        return g

    return FeatureSet(
        features=features,
        primary_index=primary,
        steps_per_epoch=train.num_examples,
        sgd_gradient=sgd_gradient,
    )


# ---------------------------------------------------------------------------
# mixtures of component losses
# ---------------------------------------------------------------------------


def mixture_features(components: Sequence[Feature],
                     steps_per_epoch: int = 1) -> FeatureSet:
    """One feature per component loss; the learned coefficients are meant
    to be rescaled by 1/||lam||_1 to read off a mixing distribution."""
    components = tuple(components)
    if len(components) < 2:
        raise ValueError("need at least two components")
    return FeatureSet(features=components, primary_index=None,
                      steps_per_epoch=steps_per_epoch)


def normalize_mixture(lam: np.ndarray) -> np.ndarray:
    lam = np.asarray(lam, dtype=np.float64)
    total = np.abs(lam).sum()
    if total == 0:
        raise ValueError("cannot normalize the zero vector")
    return lam / total
