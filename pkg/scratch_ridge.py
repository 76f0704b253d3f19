"""Trace what the loss learner picks on the analytic ridge problem."""
import numpy as np

from lossforge.losscore import CostParams, Hypercube, Observation
from lossforge.learnloss import default_epsilon, learn_loss
from lossforge.tuneloss import TuneConfig, tune_loss

rng = np.random.default_rng(21)
d = 8
theta_true = rng.standard_normal(d)
X = rng.standard_normal((12, d))
y = X @ theta_true + 0.6 * rng.standard_normal(12)
Xv = rng.standard_normal((40, d))
yv = Xv @ theta_true + 0.6 * rng.standard_normal(40)
mt, mv = 12, 40


def solve(ratio):
    return np.linalg.solve(X.T @ X + ratio * np.eye(d) * mt, X.T @ y)


def observe(theta, model_id=""):
    fit = float(np.sum((X @ theta - y) ** 2)) / mt
    ve = float(np.sum((Xv @ theta - yv) ** 2)) / mv
    J = np.column_stack([2.0 * X.T @ (X @ theta - y) / mt, 2.0 * theta])
    g = 2.0 * Xv.T @ (Xv @ theta - yv) / mv
    return Observation(ve=ve, fv=np.array([fit, float(theta @ theta)]),
                       grad_ve=g, jacobian=J, model_id=model_id)


def ve_at(ratio):
    t = solve(ratio)
    return float(np.sum((Xv @ t - yv) ** 2)) / mv


ratios = np.geomspace(1e-4, 10, 25)
ves = [ve_at(r) for r in ratios]
best_grid = min(ves)
best_r = ratios[int(np.argmin(ves))]
print(f"grid best: ratio={best_r:.4f} ve={best_grid:.4f}")
fine = np.geomspace(1e-4, 10, 400)
fv = [ve_at(r) for r in fine]
print(f"fine best: ratio={fine[int(np.argmin(fv))]:.4f} ve={min(fv):.4f}")

feasible = Hypercube(np.array([1.0, 1e-4]), np.array([1.0, 10.0]))
theta0 = np.linalg.lstsq(X, y, rcond=None)[0]
D = [observe(theta0, "init")]
print(f"init: ve={D[0].ve:.4f} fit={D[0].fv[0]:.4f} norm={D[0].fv[1]:.4f}")
for i in range(1, 6):
    eps = default_epsilon(D)
    res = learn_loss(D, feasible, CostParams(epsilon=eps))
    ratio = res.lam[1] / res.lam[0]
    theta = solve(ratio)
    obs = observe(theta, f"iter-{i}")
    D.append(obs)
    print(f"iter {i}: eps={eps:.3e} lam={np.round(res.lam, 5)} ratio={ratio:.5f} "
          f"-> ve={obs.ve:.4f} (argmin_idx={res.argmin_index}, cost={res.cost_value:.3e})")
print(f"best tuned ve: {min(o.ve for o in D[1:]):.4f} vs grid {best_grid:.4f}")
