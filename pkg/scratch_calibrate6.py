"""Calibrate the online-regularizer acceptance scenario: final tuned val
log loss <= unregularized min-over-epochs, target >= 27/30 seeds."""
import sys
import time

import numpy as np

from lossforge.harness import ScenarioConfig, SyntheticSpec, run_scenario


def evaluate(name, synthetic, budget, pwl="pwl:10", seeds=10, hinges=(0.0, 10.0)):
    cfg = ScenarioConfig(
        scenario="online-regularizer",
        feature_set=pwl,
        feasible={"hinges": hinges},
        budget=budget,
        seeds=tuple(range(seeds)),
        synthetic=synthetic,
        epsilon="auto",
    )
    t0 = time.time()
    report = run_scenario(cfg)
    dt = time.time() - t0
    wins = 0
    margins = []
    for seed in cfg.seeds:
        tl = next(r for r in report.runs
                  if r.algorithm == "tuneloss" and r.seed == seed)
        base = next(r for r in report.runs
                    if r.algorithm == "unregularized" and r.seed == seed)
        final = tl.val[-1]
        target = min(base.val)
        margins.append(target - final)
        wins += final <= target
    print(f"{name}: wins={wins}/{seeds} median_margin={np.median(margins):.4f} "
          f"min_margin={min(margins):.4f} t={dt:.0f}s")
    return wins


which = sys.argv[1] if len(sys.argv) > 1 else "a"
if which == "a":
    evaluate("A: n240 d48 noise0.15 sep0.8 T60",
             SyntheticSpec(num_examples=240, num_features=48, num_classes=3,
                           separation=0.8, label_noise=0.15, seed=202),
             budget=60)
elif which == "b":
    evaluate("B: n400 d48 noise0.15 sep0.8 T60",
             SyntheticSpec(num_examples=400, num_features=48, num_classes=3,
                           separation=0.8, label_noise=0.15, seed=202),
             budget=60)
elif which == "c":
    evaluate("C: n240 d60 noise0.2 sep0.7 T80",
             SyntheticSpec(num_examples=240, num_features=60, num_classes=3,
                           separation=0.7, label_noise=0.2, seed=202),
             budget=80)
