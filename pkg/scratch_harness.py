"""Smoke each scenario at small scale."""
import time

import numpy as np

from lossforge.harness import (
    RunReport,
    ScenarioConfig,
    SyntheticSpec,
    emit_report,
    make_synthetic,
    perfect_recovery_case,
    read_curves,
    run_scenario,
)

t0 = time.time()
cfg = ScenarioConfig(
    scenario="perfect-linear-recovery",
    budget=4,
    seeds=(0, 1, 2),
)
rep = run_scenario(cfg)
for run in rep.runs:
    print("recovery", run.seed, [f"{v:.2e}" for v in run.val])
print(f"recovery: {time.time()-t0:.1f}s")

t0 = time.time()
case = perfect_recovery_case(5)
print({k: (f"{v:.2e}" if isinstance(v, float) else v)
       for k, v in case.items() if k != "lam_star"})

t0 = time.time()
cfg = ScenarioConfig(
    scenario="hyperparam-tuning",
    feature_set="l2sq,logloss",
    feasible={"l2sq": (1e-3, 100.0)},
    budget=3,
    seeds=(0, 1),
    synthetic=SyntheticSpec(num_examples=160, num_features=20, num_classes=3,
                            separation=0.9, label_noise=0.15, seed=7),
    epochs_per_run=15,
    random_search_budget=6,
)
rep = run_scenario(cfg)
for run in rep.runs:
    bv, bt = run.best_so_far()
    print(f"{run.algorithm} seed={run.seed} val={np.round(run.val, 3)} "
          f"best={bv[-1]:.3f}")
print(f"hyperparam: {time.time()-t0:.1f}s")

t0 = time.time()
cfg_online = ScenarioConfig(
    scenario="online-regularizer",
    feature_set="pwl:8",
    budget=30,
    seeds=(0,),
    synthetic=SyntheticSpec(num_examples=120, num_features=24, num_classes=3,
                            separation=0.8, label_noise=0.15, seed=3),
)
rep2 = run_scenario(cfg_online)
for run in rep2.runs:
    print(f"{run.algorithm}: final={run.val[-1]:.4f} min={min(run.val):.4f} "
          f"len={len(run.val)}")
print(f"samples rows: {len(rep2.regularizer_samples)}")
print(f"online: {time.time()-t0:.1f}s")

t0 = time.time()
cfg_mix = ScenarioConfig(
    scenario="mixture-loss",
    budget=5,
    seeds=(0,),
    synthetic=SyntheticSpec(num_examples=160, num_features=10, num_classes=3,
                            separation=1.2, label_noise=0.0, seed=11),
    epochs_per_run=8,
)
rep3 = run_scenario(cfg_mix)
for run in rep3.runs:
    print(f"{run.algorithm}: val={np.round(run.val, 3)}")
print(f"mixture: {time.time()-t0:.1f}s")

emit_report(rep, "scratch_report")
runs = read_curves("scratch_report/curves.csv")
orig = {(r.algorithm, r.seed): r for r in rep.runs}
for r in runs:
    o = orig[(r.algorithm, r.seed)]
    assert r.val == o.val and r.test == o.test, "round trip failed"
print("round trip OK")
