"""Inspect per-iteration lambda choices in the tuning scenario."""
import numpy as np

from lossforge.harness import (
    ScenarioConfig, SyntheticSpec, _feasible_for, _full_run, _load_splits,
    _standard_features,
)
from lossforge.losscore import CostParams, LinearLoss
from lossforge.learnloss import default_epsilon, learn_loss
from lossforge.trainer import logloss_and_grad

cfg = ScenarioConfig(
    scenario="hyperparam-tuning",
    feature_set="l2sq,logloss",
    feasible={"l2sq": (1e-3, 100.0)},
    budget=3,
    seeds=(0,),
    synthetic=SyntheticSpec(num_examples=240, num_features=25, num_classes=3,
                            separation=1.0, label_noise=0.15, seed=101),
    epochs_per_run=20,
)

for seed in (0, 1, 2):
    splits = _load_splits(cfg, seed)
    spec, fs = _standard_features(cfg, splits, ["l2sq", "logloss"])
    feasible = _feasible_for(fs.names, cfg.feasible)

    # ground truth: fine sweep of l2 strength
    grid = np.geomspace(1e-3, 100, 40)
    best = (np.inf, None)
    curve = []
    for g in grid:
        loss = LinearLoss(np.array([g, 1.0]), fs.names)
        state, cps = _full_run(loss, fs, spec, splits, cfg, [seed, 555], False)
        ve = cps[-1][1].ve
        curve.append(ve)
        if ve < best[0]:
            best = (ve, g)
    print(f"seed {seed}: optimal l2={best[1]:.4f} ve={best[0]:.4f}")

    # what TuneLoss does
    default_lam = feasible.lo.copy()
    state, checkpoints = _full_run(LinearLoss(default_lam, fs.names), fs, spec,
                                   splits, cfg, [seed, 0], True)
    D = [obs for _, obs in checkpoints]
    print(f"  bootstrap: final ve={D[-1].ve:.4f} best cp ve={min(o.ve for o in D):.4f}")
    for i in range(1, 4):
        eps = default_epsilon(D)
        res = learn_loss(D, feasible, CostParams(epsilon=eps))
        lam = res.lam
        state, cps = _full_run(LinearLoss(lam, fs.names), fs, spec, splits,
                               cfg, [seed, i], True)
        obs = cps[-1][1]
        D.append(obs)
        print(f"  iter {i}: eps={eps:.2e} l2={lam[0]:.4f} -> ve={obs.ve:.4f} "
              f"(argmin_idx={res.argmin_index}/{len(D)-1})")
