"""Experiment runner: scenario configuration, synthetic data, baselines,
and plot-ready CSV emission.

Four scenarios are provided. Hyperparameter tuning trains full runs and
compares the loss learner against random search on identical data; the
online-regularizer scenario learns a convex piecewise-linear penalty during
a single training run; the mixture scenario learns component weights; and
the recovery scenario exercises exact coefficient recovery on planted
instances without any training.

Reports use the best-so-far convention: at step t the reported test metric
belongs to the model with the lowest validation metric among steps 1..t.
"""

from __future__ import annotations

import configparser
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import (
    STANDARD_FEATURE_NAMES,
    pwl_feature_set,
    select_breakpoints,
    standard_regularizer_features,
)
from .learnloss import learn_loss
from .losscore import CostParams, Hypercube, LinearLoss, Observation
from .trainer import (
    Dataset,
    SoftmaxSpec,
    init_state,
    load_dataset_csv,
    train_with_warm_start,
)
from .tuneloss import TuneConfig, tune_loss

__all__ = [
    "SyntheticSpec",
    "SplitData",
    "ScenarioConfig",
    "SeedRun",
    "RunReport",
    "make_synthetic",
    "run_scenario",
    "random_search_baseline",
    "emit_report",
    "read_curves",
    "load_config",
    "perfect_recovery_case",
]

SCENARIOS = (
    "hyperparam-tuning",
    "online-regularizer",
    "mixture-loss",
    "perfect-linear-recovery",
)


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian class-conditional generator with controllable overlap."""

    num_examples: int = 240
    num_features: int = 20
    num_classes: int = 3
    separation: float = 1.0
    label_noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.num_examples < 4 or self.num_features < 1 or self.num_classes < 2:
            raise ValueError("invalid synthetic spec")
        if not (0.0 <= self.label_noise < 1.0):
            raise ValueError("label_noise must be in [0, 1)")


@dataclass(frozen=True)
class SplitData:
    train: Dataset
    validation: Dataset
    test: Dataset


def make_synthetic(spec: SyntheticSpec) -> SplitData:
    """Deterministic class-conditional Gaussians split 50/25/25, the train
    split taking the rounding remainder."""
    rng = np.random.default_rng(spec.seed)
    m, d, C = spec.num_examples, spec.num_features, spec.num_classes
    centers = rng.standard_normal((C, d)) * spec.separation
    labels = rng.integers(0, C, m)
    X = centers[labels] + rng.standard_normal((m, d))
    if spec.label_noise > 0:
        flip = rng.random(m) < spec.label_noise
        labels = np.where(flip, rng.integers(0, C, m), labels)
    n_val = m // 4
    n_test = m // 4
    n_train = m - n_val - n_test
    return SplitData(
        train=Dataset(X=X[:n_train], y=labels[:n_train], split="train"),
        validation=Dataset(X=X[n_train:n_train + n_val],
                           y=labels[n_train:n_train + n_val],
                           split="validation"),
        test=Dataset(X=X[n_train + n_val:], y=labels[n_train + n_val:],
                     split="test"),
    )


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    feature_set: str = "l2sq,logloss"
    feasible: dict = field(default_factory=dict)  # name -> (lo, hi)
    budget: int = 3
    seeds: tuple[int, ...] = (0,)
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    csv_path: str | None = None
    csv_normalize: bool = True
    lr: float = 0.1
    epochs_per_run: int = 25
    use_gradients: bool = True
    epsilon: float | str = "auto"
    random_search_budget: int = 20
    dropout_keep_prob: float = 0.5
    dropout_num_masks: int = 64
    mixture_components: int = 3

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if not self.seeds:
            raise ValueError("need at least one seed")

    def to_dict(self) -> dict:
        rec = {
            "scenario": self.scenario,
            "feature_set": self.feature_set,
            "feasible": {k: list(v) for k, v in self.feasible.items()},
            "budget": self.budget,
            "seeds": list(self.seeds),
            "lr": self.lr,
            "epochs_per_run": self.epochs_per_run,
            "use_gradients": self.use_gradients,
            "epsilon": self.epsilon,
            "random_search_budget": self.random_search_budget,
            "dropout_keep_prob": self.dropout_keep_prob,
            "dropout_num_masks": self.dropout_num_masks,
            "mixture_components": self.mixture_components,
        }
        if self.csv_path is not None:
            rec["dataset"] = {"type": "csv", "path": self.csv_path,
                              "normalize": self.csv_normalize}
        else:
            s = self.synthetic
            rec["dataset"] = {
                "type": "synthetic",
                "num_examples": s.num_examples,
                "num_features": s.num_features,
                "num_classes": s.num_classes,
                "separation": s.separation,
                "label_noise": s.label_noise,
                "seed": s.seed,
            }
        return rec


def load_config(path) -> ScenarioConfig:
    """Parse the key/value scenario config (INI sections)."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError(f"cannot read config file {path}")
    if "scenario" not in parser:
        raise ValueError("config needs a [scenario] section")
    sc = parser["scenario"]
    kwargs: dict = {"scenario": sc.get("kind", fallback="")}
    if sc.get("feature_set"):
        kwargs["feature_set"] = sc.get("feature_set")
    if sc.get("budget"):
        kwargs["budget"] = sc.getint("budget")
    if sc.get("seeds"):
        kwargs["seeds"] = tuple(int(s) for s in sc.get("seeds").split(",") if s)
    if sc.get("use_gradients"):
        kwargs["use_gradients"] = sc.getboolean("use_gradients")
    if sc.get("epsilon"):
        raw = sc.get("epsilon")
        kwargs["epsilon"] = raw if raw == "auto" else float(raw)
    if sc.get("random_search_budget"):
        kwargs["random_search_budget"] = sc.getint("random_search_budget")
    if sc.get("mixture_components"):
        kwargs["mixture_components"] = sc.getint("mixture_components")

    if "feasible" in parser:
        ranges = {}
        for name, raw in parser["feasible"].items():
            parts = raw.split(":")
            if len(parts) == 1:
                v = float(parts[0])
                ranges[name] = (v, v)
            elif len(parts) == 2:
                ranges[name] = (float(parts[0]), float(parts[1]))
            else:
                raise ValueError(f"bad feasible range {raw!r} for {name}")
        kwargs["feasible"] = ranges

    if "dataset" in parser:
        ds = parser["dataset"]
        kind = ds.get("type", fallback="synthetic")
        if kind == "csv":
            kwargs["csv_path"] = ds.get("path")
            if ds.get("normalize"):
                kwargs["csv_normalize"] = ds.getboolean("normalize")
        elif kind == "synthetic":
            kwargs["synthetic"] = SyntheticSpec(
                num_examples=ds.getint("num_examples", fallback=240),
                num_features=ds.getint("num_features", fallback=20),
                num_classes=ds.getint("num_classes", fallback=3),
                separation=ds.getfloat("separation", fallback=1.0),
                label_noise=ds.getfloat("label_noise", fallback=0.0),
                seed=ds.getint("seed", fallback=0),
            )
        else:
            raise ValueError(f"unknown dataset type {kind!r}")

    if "trainer" in parser:
        tr = parser["trainer"]
        if tr.get("lr"):
            kwargs["lr"] = tr.getfloat("lr")
        if tr.get("epochs"):
            kwargs["epochs_per_run"] = tr.getint("epochs")
        if tr.get("dropout_keep_prob"):
            kwargs["dropout_keep_prob"] = tr.getfloat("dropout_keep_prob")
        if tr.get("dropout_num_masks"):
            kwargs["dropout_num_masks"] = tr.getint("dropout_num_masks")

    return ScenarioConfig(**kwargs)


# default feasible ranges for the standard regularizer coordinates
_DEFAULT_RANGES = {
    "l1": (0.1, 100.0),
    "l2sq": (0.1, 100.0),
    "uniform": (0.0, 0.1),
    "dropout": (0.0, 1.0),
    "logloss": (1.0, 1.0),
}


def _feasible_for(names, overrides) -> Hypercube:
    lo, hi = [], []
    for name in names:
        if name in overrides:
            a, b = overrides[name]
        elif name in _DEFAULT_RANGES:
            a, b = _DEFAULT_RANGES[name]
        elif name.startswith("hinge"):
            a, b = overrides.get("hinges", (0.0, 10.0))
        else:
            raise ValueError(f"no feasible range for feature {name!r}")
        lo.append(a)
        hi.append(b)
    return Hypercube(np.array(lo), np.array(hi))


# ---------------------------------------------------------------------------
# report containers
# ---------------------------------------------------------------------------


@dataclass
class SeedRun:
    """One algorithm's curve for one seed."""

    algorithm: str
    seed: int
    val: list[float]
    test: list[float]

    def best_so_far(self) -> tuple[list[float], list[float]]:
        best_val, best_test = [], []
        bi = 0
        for t in range(len(self.val)):
            if self.val[t] < self.val[bi]:
                bi = t
            best_val.append(self.val[bi])
            best_test.append(self.test[bi])
        return best_val, best_test


@dataclass
class RunReport:
    scenario: str
    config: dict
    runs: list[SeedRun] = field(default_factory=list)
    regularizer_samples: list[tuple[int, int, float, float]] = field(
        default_factory=list
    )  # (seed, epoch, x, r)


# ---------------------------------------------------------------------------
# data / feature assembly
# ---------------------------------------------------------------------------


def _load_splits(config: ScenarioConfig, seed: int) -> SplitData:
    if config.csv_path is not None:
        full = load_dataset_csv(config.csv_path, normalize=config.csv_normalize)
        m = full.num_examples
        order = np.random.default_rng([config.synthetic.seed, seed]).permutation(m)
        n_val = m // 4
        n_test = m // 4
        n_train = m - n_val - n_test
        idx_t = order[:n_train]
        idx_v = order[n_train:n_train + n_val]
        idx_s = order[n_train + n_val:]
        return SplitData(
            train=Dataset(full.X[idx_t], full.y[idx_t], "train"),
            validation=Dataset(full.X[idx_v], full.y[idx_v], "validation"),
            test=Dataset(full.X[idx_s], full.y[idx_s], "test"),
        )
    base = config.synthetic
    per_seed = SyntheticSpec(
        num_examples=base.num_examples,
        num_features=base.num_features,
        num_classes=base.num_classes,
        separation=base.separation,
        label_noise=base.label_noise,
        seed=int(np.random.default_rng([base.seed, seed]).integers(2**31)),
    )
    return make_synthetic(per_seed)


def _num_classes(splits: SplitData, config: ScenarioConfig) -> int:
    if config.csv_path is not None:
        return int(max(splits.train.y.max(), splits.validation.y.max(),
                       splits.test.y.max())) + 1
    return config.synthetic.num_classes


def _standard_features(config: ScenarioConfig, splits: SplitData, names):
    spec = SoftmaxSpec(splits.train.num_features, _num_classes(splits, config))
    fs = standard_regularizer_features(
        spec, splits.train, include=names,
        keep_prob=config.dropout_keep_prob,
        num_masks=config.dropout_num_masks,
    )
    return spec, fs


def _sample_lambda(rng, feasible: Hypercube) -> np.ndarray:
    """Uniform over the box, log-uniform on coordinates spanning at least
    two orders of magnitude (with a positive lower bound)."""
    lam = np.empty(feasible.k)
    for j in range(feasible.k):
        lo, hi = feasible.lo[j], feasible.hi[j]
        if lo == hi:
            lam[j] = lo
        elif lo > 0 and hi / lo >= 100.0:
            lam[j] = np.exp(rng.uniform(np.log(lo), np.log(hi)))
        else:
            lam[j] = rng.uniform(lo, hi)
    return lam


# ---------------------------------------------------------------------------
# scenario: hyperparameter tuning (full runs)
# ---------------------------------------------------------------------------


def _full_run(loss, fs, spec, splits, config, seed_key, with_gradients):
    """Train from scratch for the configured number of epochs; returns the
    final state, its observation, and per-epoch checkpoint observations."""
    state = init_state(spec, seed=int(np.random.default_rng(seed_key).integers(2**31)))
    checkpoints = []
    for _ in range(config.epochs_per_run):
        state, obs = train_with_warm_start(
            loss, fs, state, splits.validation, epochs=1, lr=config.lr,
            with_gradients=with_gradients,
        )
        checkpoints.append((state, obs))
    return state, checkpoints


def _tuneloss_arm_hyperparam(config, splits, spec, fs, feasible, seed) -> SeedRun:
    from .trainer import logloss_and_grad

    def test_of(state) -> float:
        return logloss_and_grad(state.theta, splits.test)[0]

    # run 1: the default loss (box floor on free coordinates)
    default_lam = feasible.lo.copy()
    pin = feasible.pinned
    default_lam[pin] = feasible.lo[pin]
    default_loss = LinearLoss(default_lam, fs.names)
    state, checkpoints = _full_run(default_loss, fs, spec, splits, config,
                                   [seed, 0], config.use_gradients)
    val = [checkpoints[-1][1].ve]
    test = [test_of(state)]
    initial_obs = [obs for _, obs in checkpoints]

    states = {"i": 0}

    def trainer(loss, model):
        states["i"] += 1
        new_state, cps = _full_run(loss, fs, spec, splits, config,
                                   [seed, states["i"]], config.use_gradients)
        final_obs = cps[-1][1]
        val.append(final_obs.ve)
        test.append(test_of(new_state))
        return new_state, final_obs

    if config.budget > 1:
        tune_loss(
            initial_obs,
            state,
            trainer,
            TuneConfig(
                feasible=feasible,
                max_iterations=config.budget - 1,
                mode="full-run",
                epsilon=config.epsilon,
                use_gradients=config.use_gradients,
                seed=seed,
                feature_names=fs.names,
            ),
        )
    return SeedRun("tuneloss", seed, val, test)


def _random_search_arm(config, splits, spec, fs, feasible, seed,
                       budget) -> SeedRun:
    from .trainer import logloss_and_grad

    rng = np.random.default_rng([seed, 777])
    val, test = [], []
    for i in range(budget):
        lam = _sample_lambda(rng, feasible)
        loss = LinearLoss(lam, fs.names)
        state, cps = _full_run(loss, fs, spec, splits, config,
                               [seed, 1000 + i], False)
        val.append(cps[-1][1].ve)
        test.append(logloss_and_grad(state.theta, splits.test)[0])
    return SeedRun("random-search", seed, val, test)


def _hyperparam_seed(config: ScenarioConfig, seed: int):
    splits = _load_splits(config, seed)
    names = [n.strip() for n in config.feature_set.split(",") if n.strip()]
    unknown = set(names) - set(STANDARD_FEATURE_NAMES)
    if unknown:
        raise ValueError(f"hyperparam tuning needs standard features, got {unknown}")
    spec, fs = _standard_features(config, splits, names)
    feasible = _feasible_for(fs.names, config.feasible)
    runs = [_tuneloss_arm_hyperparam(config, splits, spec, fs, feasible, seed)]
    runs.append(_random_search_arm(config, splits, spec, fs, feasible, seed,
                                   config.random_search_budget))
    return runs, []


# ---------------------------------------------------------------------------
# scenario: online regularizer learning
# ---------------------------------------------------------------------------


def _online_seed(config: ScenarioConfig, seed: int):
    from .trainer import logloss_and_grad

    splits = _load_splits(config, seed)
    C = _num_classes(splits, config)
    spec = SoftmaxSpec(splits.train.num_features, C)
    total_epochs = config.budget

    if not config.feature_set.startswith("pwl:"):
        raise ValueError("online-regularizer expects feature_set 'pwl:<count>'")
    bp_count = int(config.feature_set.split(":", 1)[1])

    def test_of(state):
        return logloss_and_grad(state.theta, splits.test)[0]

    base_seed = int(np.random.default_rng([seed, 0]).integers(2**31))

    # baseline: plain log loss for the whole budget
    plain = standard_regularizer_features(spec, splits.train, include=("logloss",))
    plain_loss = LinearLoss(np.array([1.0]), plain.names)
    state = init_state(spec, base_seed)
    base_val, base_test = [], []
    for _ in range(total_epochs):
        state, obs = train_with_warm_start(plain_loss, plain, state,
                                           splits.validation, epochs=1,
                                           lr=config.lr)
        base_val.append(obs.ve)
        base_test.append(test_of(state))
    baseline = SeedRun("unregularized", seed, base_val, base_test)

    # tuned arm: epoch 1 fixes the breakpoint grid, the warmup phase runs
    # until validation first worsens, then the loop takes over
    from .trainer import evaluate_observation

    state = init_state(spec, base_seed)
    state, _ = train_with_warm_start(plain_loss, plain, state,
                                     splits.validation, epochs=1,
                                     lr=config.lr)
    breakpoints = select_breakpoints(state.theta, bp_count)
    fs = pwl_feature_set(spec, splits.train, breakpoints)
    base_lam = np.zeros(fs.k)
    base_lam[0] = 1.0
    base_loss = LinearLoss(base_lam, fs.names)
    feasible = _feasible_for(fs.names, config.feasible)

    first_obs = evaluate_observation(state.theta, fs, splits.validation,
                                     with_gradients=config.use_gradients,
                                     model_id="epoch-1")
    D0 = [first_obs]
    tuned_val = [first_obs.ve]
    tuned_test = [test_of(state)]
    while len(tuned_val) < total_epochs:
        state, obs = train_with_warm_start(
            base_loss, fs, state, splits.validation, epochs=1, lr=config.lr,
            with_gradients=config.use_gradients)
        D0.append(obs)
        tuned_val.append(obs.ve)
        tuned_test.append(test_of(state))
        if tuned_val[-1] > tuned_val[-2]:
            break

    samples: list[tuple[int, int, float, float]] = []
    xs = np.linspace(breakpoints.values[0] - 0.1,
                     breakpoints.values[-1] + 0.1, 41)

    def online_trainer(loss, model):
        new_state, obs = train_with_warm_start(
            loss, fs, model, splits.validation, epochs=1, lr=config.lr,
            with_gradients=config.use_gradients,
        )
        tuned_val.append(obs.ve)
        tuned_test.append(test_of(new_state))
        epoch = new_state.epoch
        from .features import pwl_features as _pwl
        for x in xs:
            r = float(np.dot(loss.lam[1:], _pwl(np.array([x]), breakpoints)))
            samples.append((seed, epoch, float(x), r))
        return new_state, obs

    remaining = total_epochs - len(tuned_val)
    if remaining > 0:
        tune_loss(
            D0,
            state,
            online_trainer,
            TuneConfig(
                feasible=feasible,
                max_iterations=remaining,
                mode="online",
                epsilon=config.epsilon,
                use_gradients=config.use_gradients,
                seed=seed,
                feature_names=fs.names,
            ),
        )
    tuned = SeedRun("tuneloss", seed, tuned_val, tuned_test)
    return [tuned, baseline], samples


# ---------------------------------------------------------------------------
# scenario: mixture of component losses
# ---------------------------------------------------------------------------


def _mixture_seed(config: ScenarioConfig, seed: int):
    """Component log losses over transformed copies of the training inputs;
    only one transformation matches the validation distribution."""
    from .features import Feature, mixture_features
    from .trainer import logloss_and_grad

    n_comp = config.mixture_components
    rng = np.random.default_rng([config.synthetic.seed, seed])
    base = config.synthetic
    d, C = base.num_features, base.num_classes
    centers = rng.standard_normal((C, d)) * base.separation
    matching = 1 % n_comp  # the second transformation is the honest one

    transforms = []
    for j in range(n_comp):
        Q = np.linalg.qr(rng.standard_normal((d, d)))[0]
        transforms.append(np.eye(d) if j == matching else Q)

    def sample(m, transform, split):
        labels = rng.integers(0, C, m)
        X = (centers[labels] + rng.standard_normal((m, d))) @ transform.T
        return Dataset(X=X, y=labels, split=split)

    m_train = base.num_examples // 2
    trains = [sample(m_train, t, "train") for t in transforms]
    val = sample(base.num_examples // 4, transforms[matching], "validation")
    test = sample(base.num_examples // 4, transforms[matching], "test")
    spec = SoftmaxSpec(d, C)

    comps = [
        Feature(f"component_{j}",
                (lambda tr: lambda th: logloss_and_grad(th, tr)[0])(tr),
                (lambda tr: lambda th: logloss_and_grad(th, tr)[1])(tr))
        for j, tr in enumerate(trains)
    ]
    fs = mixture_features(comps, steps_per_epoch=m_train)
    feasible = Hypercube(np.zeros(n_comp), np.ones(n_comp))

    def test_of(state):
        return logloss_and_grad(state.theta, test)[0]

    def run_once(lam, key):
        loss = LinearLoss(lam, fs.names)
        state = init_state(spec, int(np.random.default_rng(key).integers(2**31)))
        for _ in range(config.epochs_per_run):
            state, obs = train_with_warm_start(
                loss, fs, state, val, epochs=1, lr=config.lr,
                with_gradients=config.use_gradients)
        return state, obs

    val_curve, test_curve, D = [], [], []
    for j in range(min(n_comp, config.budget)):
        lam = np.zeros(n_comp)
        lam[j] = 1.0
        state, obs = run_once(lam, [seed, j])
        D.append(obs)
        val_curve.append(obs.ve)
        test_curve.append(test_of(state))

    counter = {"i": n_comp}

    def trainer(loss, model):
        counter["i"] += 1
        state, obs = run_once(loss.lam, [seed, counter["i"]])
        val_curve.append(obs.ve)
        test_curve.append(test_of(state))
        return state, obs

    remaining = config.budget - len(D)
    if remaining > 0:
        tune_loss(D, None, trainer,
                  TuneConfig(feasible=feasible, max_iterations=remaining,
                             mode="full-run", epsilon=config.epsilon,
                             use_gradients=config.use_gradients, seed=seed,
                             feature_names=fs.names))
    return [SeedRun("tuneloss", seed, val_curve, test_curve)], []


# ---------------------------------------------------------------------------
# scenario: exact recovery on planted instances
# ---------------------------------------------------------------------------


def perfect_recovery_case(seed: int, k: int = 3, n: int = 6) -> dict:
    """Build planted-coefficient instances for one seed and measure recovery.

    Returns relative recovery errors for: a single observation carrying
    gradients, loss-only sets of k+1 and k observations, and a loss-only set
    of k-1 observations (underdetermined), together with the ranks of the
    stacked zero-fit systems.
    """
    rng = np.random.default_rng([seed, 4242])
    lam_star = rng.uniform(0.2, 0.9, k)
    alpha_star = rng.uniform(0.5, 2.0)
    pin = int(rng.integers(0, k))
    lo = np.zeros(k)
    hi = np.ones(k)
    lo[pin] = hi[pin] = lam_star[pin]
    feasible = Hypercube(lo, hi)

    def loss_only(m):
        out = []
        for _ in range(m):
            fv = rng.uniform(0.1, 2.0, k)
            out.append(Observation(ve=float(lam_star @ fv) / alpha_star, fv=fv))
        return out

    def with_gradients():
        fv = rng.uniform(0.1, 2.0, k)
        J = rng.standard_normal((n, k))
        return [Observation(
            ve=float(lam_star @ fv) / alpha_star,
            fv=fv,
            grad_ve=J @ lam_star / alpha_star,
            jacobian=J,
        )]

    def rel_err(observations, epsilon):
        result = learn_loss(observations, feasible, CostParams(epsilon=epsilon))
        return float(np.abs(result.lam - lam_star).max() / np.abs(lam_star).max())

    def stack_rank(observations):
        rows = [np.append(o.fv, -o.ve) for o in observations]
        for o in observations:
            if o.has_gradients:
                rows.extend(np.hstack([o.jacobian, -o.grad_ve[:, None]]))
        return int(np.linalg.matrix_rank(np.array(rows)))

    grad_obs = loss_obs_k1 = loss_obs_k = loss_obs_km1 = None
    grad_obs = with_gradients()
    loss_obs_k1 = loss_only(k + 1)
    loss_obs_k = loss_only(k)
    loss_obs_km1 = loss_only(k - 1) if k >= 2 else []
    out = {
        "k": k,
        "lam_star": lam_star,
        "err_gradients_m1": rel_err(grad_obs, epsilon=1.0),
        "rank_gradients_m1": stack_rank(grad_obs),
        "err_loss_only_k_plus_1": rel_err(loss_obs_k1, epsilon=0.0),
        "rank_loss_only_k_plus_1": stack_rank(loss_obs_k1),
        "err_loss_only_k": rel_err(loss_obs_k, epsilon=0.0),
        "rank_loss_only_k": stack_rank(loss_obs_k),
    }
    if loss_obs_km1:
        out["err_loss_only_k_minus_1"] = rel_err(loss_obs_km1, epsilon=0.0)
        out["rank_loss_only_k_minus_1"] = stack_rank(loss_obs_km1)
    return out


def _recovery_seed(config: ScenarioConfig, seed: int):
    case = perfect_recovery_case(seed)
    vals = [
        case["err_gradients_m1"],
        case["err_loss_only_k_plus_1"],
        case["err_loss_only_k"],
        case.get("err_loss_only_k_minus_1", float("nan")),
    ][: config.budget]
    return [SeedRun("learnloss-recovery", seed, vals, list(vals))], []


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

_SEED_FNS = {
    "hyperparam-tuning": _hyperparam_seed,
    "online-regularizer": _online_seed,
    "mixture-loss": _mixture_seed,
    "perfect-linear-recovery": _recovery_seed,
}


def _thread_count() -> int:
    raw = os.environ.get("LOSSFORGE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_scenario(config: ScenarioConfig) -> RunReport:
    """Execute the configured scenario for every seed (seeds may run on a
    thread pool capped by LOSSFORGE_THREADS; results keep seed order)."""
    fn = _SEED_FNS[config.scenario]
    report = RunReport(scenario=config.scenario, config=config.to_dict())
    workers = min(_thread_count(), len(config.seeds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: fn(config, s), config.seeds))
    else:
        results = [fn(config, s) for s in config.seeds]
    for runs, samples in results:
        report.runs.extend(runs)
        report.regularizer_samples.extend(samples)
    return report


def random_search_baseline(config: ScenarioConfig) -> RunReport:
    """Random search alone, on the same data, splits, and trainer settings."""
    report = RunReport(scenario=config.scenario, config=config.to_dict())
    for seed in config.seeds:
        splits = _load_splits(config, seed)
        names = [n.strip() for n in config.feature_set.split(",") if n.strip()]
        spec, fs = _standard_features(config, splits, names)
        feasible = _feasible_for(fs.names, config.feasible)
        report.runs.append(
            _random_search_arm(config, splits, spec, fs, feasible, seed,
                               config.random_search_budget)
        )
    return report


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_report(report: RunReport, out_dir) -> None:
    """Write curves.csv, summary.csv, learned_regularizer.csv, config.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    lines = ["scenario,algorithm,seed,step,val_metric,test_metric,"
             "best_so_far_val,best_so_far_test"]
    for run in report.runs:
        bv, bt = run.best_so_far()
        for t in range(len(run.val)):
            lines.append(
                f"{report.scenario},{run.algorithm},{run.seed},{t + 1},"
                f"{_fmt(run.val[t])},{_fmt(run.test[t])},"
                f"{_fmt(bv[t])},{_fmt(bt[t])}"
            )
    (out / "curves.csv").write_text("\n".join(lines) + "\n")

    (out / "summary.csv").write_text(_summary_csv(report))

    reg = ["seed,epoch,x,r"]
    for seed, epoch, x, r in report.regularizer_samples:
        reg.append(f"{seed},{epoch},{_fmt(x)},{_fmt(r)}")
    (out / "learned_regularizer.csv").write_text("\n".join(reg) + "\n")

    with open(out / "config.json", "w") as fp:
        json.dump(report.config, fp, indent=2, sort_keys=True)
        fp.write("\n")


def _summary_csv(report: RunReport) -> str:
    lines = ["scenario,algorithm,step,mean_best_val,median_best_val,"
             "mean_best_test,median_best_test"]
    by_alg: dict[str, list[SeedRun]] = {}
    for run in report.runs:
        by_alg.setdefault(run.algorithm, []).append(run)
    for alg in sorted(by_alg):
        runs = by_alg[alg]
        steps = min(len(r.val) for r in runs)
        bests = [r.best_so_far() for r in runs]
        for t in range(steps):
            bv = np.array([b[0][t] for b in bests])
            bt = np.array([b[1][t] for b in bests])
            lines.append(
                f"{report.scenario},{alg},{t + 1},"
                f"{_fmt(bv.mean())},{_fmt(np.median(bv))},"
                f"{_fmt(bt.mean())},{_fmt(np.median(bt))}"
            )
    return "\n".join(lines) + "\n"


def read_curves(path) -> list[SeedRun]:
    """Parse curves.csv back into per-seed runs (exact float round trip)."""
    text = Path(path).read_text().strip().split("\n")
    header = text[0].split(",")
    expected = ["scenario", "algorithm", "seed", "step", "val_metric",
                "test_metric", "best_so_far_val", "best_so_far_test"]
    if header != expected:
        raise ValueError(f"unexpected curves header {header}")
    runs: dict[tuple[str, int], SeedRun] = {}
    for line in text[1:]:
        if not line:
            continue
        _, alg, seed, step, val, test, _, _ = line.split(",")
        key = (alg, int(seed))
        if key not in runs:
            runs[key] = SeedRun(alg, int(seed), [], [])
        runs[key].val.append(float(val))
        runs[key].test.append(float(test))
    return list(runs.values())


def rewrite_summary(report_dir) -> str:
    """Regenerate summary.csv from an existing curves.csv; returns the text."""
    report_dir = Path(report_dir)
    runs = read_curves(report_dir / "curves.csv")
    config = {}
    cfg_path = report_dir / "config.json"
    if cfg_path.exists():
        config = json.loads(cfg_path.read_text())
    scenario = config.get("scenario", "unknown")
    report = RunReport(scenario=scenario, config=config, runs=runs)
    text = _summary_csv(report)
    (report_dir / "summary.csv").write_text(text)
    return text
