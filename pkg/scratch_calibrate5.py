"""Calibrate the hyperparameter-tuning acceptance scenario:
median TuneLoss@3 vs median random-search@20 over 30 seeds."""
import sys
import time

import numpy as np

from lossforge.harness import ScenarioConfig, SyntheticSpec, run_scenario


def evaluate(name, **kw):
    cfg = ScenarioConfig(
        scenario="hyperparam-tuning",
        feature_set=kw.get("feature_set", "l2sq,logloss"),
        feasible=kw.get("feasible", {"l2sq": (1e-3, 100.0)}),
        budget=3,
        seeds=tuple(range(30)),
        synthetic=kw["synthetic"],
        epochs_per_run=kw.get("epochs", 20),
        random_search_budget=20,
        epsilon=kw.get("epsilon", "auto"),
    )
    t0 = time.time()
    report = run_scenario(cfg)
    dt = time.time() - t0
    tl = [r for r in report.runs if r.algorithm == "tuneloss"]
    rs = [r for r in report.runs if r.algorithm == "random-search"]
    tl3 = np.array([r.best_so_far()[0][2] for r in tl])
    rs20 = np.array([r.best_so_far()[0][19] for r in rs])
    wins = int(np.sum(tl3 <= rs20))
    print(f"{name}: median TL@3={np.median(tl3):.4f} RS@20={np.median(rs20):.4f} "
          f"pass={np.median(tl3) <= np.median(rs20)} perseed_wins={wins}/30 "
          f"time={dt:.0f}s")
    # also show TL@2 (bootstrap + 1 tuned)
    tl2 = np.array([r.best_so_far()[0][1] for r in tl])
    print(f"    TL@2={np.median(tl2):.4f}  TL@1={np.median([r.val[0] for r in tl]):.4f} "
          f"RS@5={np.median([r.best_so_far()[0][4] for r in rs]):.4f}")
    return np.median(tl3) <= np.median(rs20)


which = sys.argv[1] if len(sys.argv) > 1 else "a"
if which == "a":
    evaluate("A: d=25 n240 sep1.0 noise0.15 e20",
             synthetic=SyntheticSpec(num_examples=240, num_features=25,
                                     num_classes=3, separation=1.0,
                                     label_noise=0.15, seed=101),
             epochs=20)
elif which == "b":
    evaluate("B: d=40 n200 sep0.8 noise0.2 e25",
             synthetic=SyntheticSpec(num_examples=200, num_features=40,
                                     num_classes=3, separation=0.8,
                                     label_noise=0.2, seed=101),
             epochs=25)
elif which == "c":
    evaluate("C: 4-feature family",
             feature_set="l1,l2sq,uniform,logloss",
             feasible={"l1": (1e-3, 100.0), "l2sq": (1e-3, 100.0),
                       "uniform": (0.0, 0.1)},
             synthetic=SyntheticSpec(num_examples=240, num_features=25,
                                     num_classes=3, separation=1.0,
                                     label_noise=0.15, seed=101),
             epochs=20)
