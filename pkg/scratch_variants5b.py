"""Criterion-5 calibration with the 4-hyperparameter family (paper-default
feasible ranges), 10 seeds."""
import time

import numpy as np

from lossforge.harness import ScenarioConfig, SyntheticSpec, run_scenario


def evaluate(name, synthetic, epochs, feature_set="l1,l2sq,uniform,dropout,logloss",
             feasible=None, seeds=10):
    cfg = ScenarioConfig(
        scenario="hyperparam-tuning",
        feature_set=feature_set,
        feasible=feasible or {},
        budget=3,
        seeds=tuple(range(seeds)),
        synthetic=synthetic,
        epochs_per_run=epochs,
        random_search_budget=20,
        epsilon="auto",
    )
    t0 = time.time()
    report = run_scenario(cfg)
    dt = time.time() - t0
    tl = [r for r in report.runs if r.algorithm == "tuneloss"]
    rs = [r for r in report.runs if r.algorithm == "random-search"]
    tl3 = np.array([r.best_so_far()[0][2] for r in tl])
    rs20 = np.array([r.best_so_far()[0][19] for r in rs])
    wins = int(np.sum(tl3 <= rs20))
    print(f"{name}: TL@3 med={np.median(tl3):.4f} RS@20 med={np.median(rs20):.4f} "
          f"pass={np.median(tl3) <= np.median(rs20)} wins={wins}/{seeds} t={dt:.0f}s")
    return tl3, rs20


evaluate("4d paper-F d25",
         SyntheticSpec(num_examples=240, num_features=25, num_classes=3,
                       separation=1.0, label_noise=0.15, seed=101),
         epochs=20)
evaluate("4d paper-F d40 overfit-prone",
         SyntheticSpec(num_examples=200, num_features=40, num_classes=3,
                       separation=0.8, label_noise=0.2, seed=101),
         epochs=20)
