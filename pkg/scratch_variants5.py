"""Try D0 selection / epsilon variants for the tuning scenario, 10 seeds."""
import time

import numpy as np

from lossforge.harness import (
    ScenarioConfig, SyntheticSpec, _feasible_for, _full_run, _load_splits,
    _sample_lambda, _standard_features,
)
from lossforge.losscore import CostParams, LinearLoss
from lossforge.learnloss import default_epsilon, learn_loss

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
SEEDS = range(10)


def tl_run(seed, d0_mode, eps_mode):
    splits = _load_splits(cfg, seed)
    spec, fs = _standard_features(cfg, splits, ["l2sq", "logloss"])
    feasible = _feasible_for(fs.names, cfg.feasible)
    default_lam = feasible.lo.copy()
    state, checkpoints = _full_run(LinearLoss(default_lam, fs.names), fs, spec,
                                   splits, cfg, [seed, 0], True)
    all_obs = [obs for _, obs in checkpoints]
    if d0_mode == "all":
        D = list(all_obs)
    elif d0_mode == "last8":
        D = all_obs[-8:]
    elif d0_mode == "from_valmin":
        ves = [o.ve for o in all_obs]
        start = int(np.argmin(ves))
        D = all_obs[start:]
        if len(D) < 3:
            D = all_obs[-3:]
    best = all_obs[-1].ve
    for i in range(1, 3):
        eps = default_epsilon(D) if eps_mode == "auto" else eps_mode
        res = learn_loss(D, feasible, CostParams(epsilon=eps))
        state, cps = _full_run(LinearLoss(res.lam, fs.names), fs, spec, splits,
                               cfg, [seed, i], True)
        obs = cps[-1][1]
        D.append(obs)
        best = min(best, obs.ve)
    return best


def rs_run(seed, budget=20):
    splits = _load_splits(cfg, seed)
    spec, fs = _standard_features(cfg, splits, ["l2sq", "logloss"])
    feasible = _feasible_for(fs.names, cfg.feasible)
    rng = np.random.default_rng([seed, 777])
    best = np.inf
    for i in range(budget):
        lam = _sample_lambda(rng, feasible)
        state, cps = _full_run(LinearLoss(lam, fs.names), fs, spec, splits,
                               cfg, [seed, 1000 + i], False)
        best = min(best, cps[-1][1].ve)
    return best


t0 = time.time()
rs = np.array([rs_run(s) for s in SEEDS])
print(f"RS@20 median={np.median(rs):.4f} ({time.time()-t0:.0f}s)")
for d0_mode in ("all", "last8", "from_valmin"):
    for eps_mode in ("auto", 0.0):
        t0 = time.time()
        tl = np.array([tl_run(s, d0_mode, eps_mode) for s in SEEDS])
        wins = int(np.sum(tl <= rs))
        print(f"D0={d0_mode:<12} eps={str(eps_mode):<5} "
              f"median TL@3={np.median(tl):.4f} wins={wins}/10 "
              f"({time.time()-t0:.0f}s)")
