"""Probe the online-tuning scenario: what does the baseline curve look like,
what is attainable with fixed L2, and what does the tuner learn?"""
import numpy as np

from lossforge.losscore import Hypercube, LinearLoss
from lossforge.features import standard_regularizer_features
from lossforge.trainer import Dataset, SoftmaxSpec, init_state, train_with_warm_start
from lossforge.tuneloss import TuneConfig, bootstrap_overfit_start, tune_loss


def overfit_prone_data(seed, d=24, C=3, m_train=30, noise=0.15, sep=0.8):
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((C, d)) * sep
    def sample(m, split):
        labels = rng.integers(0, C, m)
        X = centers[labels] + rng.standard_normal((m, d))
        flip = rng.random(m) < noise
        labels = np.where(flip, rng.integers(0, C, m), labels)
        return Dataset(X=X, y=labels, split=split)
    return sample(m_train, "train"), sample(200, "validation")


def run(seed, total_epochs=40, d=24, m_train=30, noise=0.15, sep=0.8, verbose=True):
    train, val = overfit_prone_data(seed, d=d, m_train=m_train, noise=noise, sep=sep)
    C = 3
    spec = SoftmaxSpec(train.num_features, C)
    fs = standard_regularizer_features(spec, train, include=("l1", "l2sq", "logloss"))
    base_loss = LinearLoss(np.array([0.0, 0.0, 1.0]), fs.names)

    state = init_state(spec, seed=1)
    baseline = []
    for _ in range(total_epochs):
        state, obs = train_with_warm_start(base_loss, fs, state, val, epochs=1)
        baseline.append(obs.ve)
    if verbose:
        print("baseline:", " ".join(f"{v:.3f}" for v in baseline[:20]), "...")
    print(f"seed {seed}: baseline min={min(baseline):.4f} @epoch {np.argmin(baseline)+1}, final={baseline[-1]:.4f}")

    # attainable with fixed l2, trained from scratch to the full budget
    for l2 in (0.001, 0.003, 0.01, 0.03, 0.1, 0.3):
        s = init_state(spec, seed=1)
        best = np.inf
        lam = np.array([0.0, l2, 1.0])
        loss = LinearLoss(lam, fs.names)
        curve = []
        for _ in range(total_epochs):
            s, o = train_with_warm_start(loss, fs, s, val, epochs=1)
            curve.append(o.ve)
        print(f"  l2={l2:<6} final={curve[-1]:.4f} min={min(curve):.4f}")

    # online tuning
    start = init_state(spec, seed=1)
    warm_obs, warm_state, curve = bootstrap_overfit_start(
        base_loss, fs, start, val, max_epochs=total_epochs)
    print(f"  warmup epochs: {len(curve)} curve={np.round(curve, 3)}")
    feasible = Hypercube(np.array([0.0, 0.0, 1.0]), np.array([5.0, 5.0, 1.0]))

    def online_trainer(loss, model):
        return train_with_warm_start(loss, fs, model, val, epochs=1,
                                     with_gradients=True)

    trace = tune_loss(warm_obs, warm_state, online_trainer,
                      TuneConfig(feasible=feasible,
                                 max_iterations=total_epochs - len(curve),
                                 mode="online", epsilon="auto"))
    ves = [r.ve for r in trace.records]
    lams = np.stack([r.lam for r in trace.records])
    print(f"  tuned final={ves[-1]:.4f} min={min(ves):.4f}")
    print("  tuned ve:", " ".join(f"{v:.3f}" for v in ves[:18]))
    print("  lam[l1]:", " ".join(f"{v:.3f}" for v in lams[:12, 0]))
    print("  lam[l2]:", " ".join(f"{v:.3f}" for v in lams[:12, 1]))
    return min(baseline), ves[-1]


if __name__ == "__main__":
    run(33)
