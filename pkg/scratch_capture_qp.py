"""Capture the stalling QP from the online scenario for offline study."""
import numpy as np
import pickle

import lossforge.numopt as no
from lossforge.harness import ScenarioConfig, SyntheticSpec, run_scenario

orig = no.solve_qp
captured = []


def wrapper(problem, max_iterations=20_000):
    sol = orig(problem, max_iterations)
    if sol.status is no.QpStatus.MAX_ITERATIONS:
        captured.append(problem)
        with open("scratch_bad_qp.pkl", "wb") as fp:
            pickle.dump({"P": problem.P, "q": problem.q, "A": problem.A,
                         "b": problem.b, "lo": problem.lo, "hi": problem.hi}, fp)
        print(f"captured stalling QP: d={problem.d} c={problem.c} "
              f"rp={sol.primal_residual:.2e} rd={sol.dual_residual:.2e}")
    return sol


no.solve_qp = wrapper
import lossforge.learnloss as ll
ll.solve_qp = wrapper

cfg = ScenarioConfig(
    scenario="online-regularizer",
    feature_set="pwl:10",
    feasible={"hinges": (0.0, 10.0)},
    budget=60,
    seeds=(0,),
    synthetic=SyntheticSpec(num_examples=240, num_features=48, num_classes=3,
                            separation=0.8, label_noise=0.15, seed=202),
    epsilon="auto",
)
try:
    run_scenario(cfg)
    print("scenario completed without stalls")
except Exception as exc:
    print(f"aborted: {exc}")
print(f"captured {len(captured)} QPs")
