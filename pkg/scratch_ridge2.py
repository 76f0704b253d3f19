"""Checkpoint-based ridge scenario: gradient-descent trainer, observations
taken from intermediate checkpoints of the bootstrap run."""
import numpy as np

from lossforge.losscore import CostParams, Hypercube, Observation
from lossforge.learnloss import default_epsilon, learn_loss
from lossforge.tuneloss import TuneConfig, tune_loss


def problem(seed):
    rng = np.random.default_rng(seed)
    d = 8
    theta_true = rng.standard_normal(d)
    X = rng.standard_normal((12, d))
    y = X @ theta_true + 0.6 * rng.standard_normal(12)
    Xv = rng.standard_normal((40, d))
    yv = Xv @ theta_true + 0.6 * rng.standard_normal(40)
    return X, y, Xv, yv


def build(seed):
    X, y, Xv, yv = problem(seed)
    mt, mv = X.shape[0], Xv.shape[0]
    d = X.shape[1]

    def observe(theta, model_id=""):
        fit = float(np.sum((X @ theta - y) ** 2)) / mt
        ve = float(np.sum((Xv @ theta - yv) ** 2)) / mv
        J = np.column_stack([2.0 * X.T @ (X @ theta - y) / mt, 2.0 * theta])
        g = 2.0 * Xv.T @ (Xv @ theta - yv) / mv
        return Observation(ve=ve, fv=np.array([fit, float(theta @ theta)]),
                           grad_ve=g, jacobian=J, model_id=model_id)

    def grad(lam, theta):
        return lam[0] * 2.0 * X.T @ (X @ theta - y) / mt + lam[1] * 2.0 * theta

    def train(lam, steps=120, eta=0.05, collect=()):
        theta = np.zeros(d)
        checkpoints = []
        for t in range(1, steps + 1):
            theta = theta - eta * grad(lam, theta)
            if t in collect:
                checkpoints.append(observe(theta, f"step-{t}"))
        return theta, checkpoints

    return observe, train


def main(seed):
    observe, train = build(seed)
    lam0 = np.array([1.0, 0.0])
    # bootstrap: unregularized run, keep a few intermediate checkpoints
    theta0, D0 = train(lam0, collect=(5, 15, 40, 120))
    print("bootstrap ves:", [f"{o.ve:.4f}" for o in D0])

    feasible = Hypercube(np.array([1.0, 1e-4]), np.array([1.0, 10.0]))

    def trainer(loss, model):
        theta, _ = train(loss.lam)
        return theta, observe(theta)

    trace = tune_loss(D0, theta0, trainer,
                      TuneConfig(feasible=feasible, max_iterations=3,
                                 epsilon="auto"))
    for rec in trace.records:
        print(f"iter {rec.iteration}: lam={np.round(rec.lam, 5)} ve={rec.ve:.4f}")

    grid = np.geomspace(1e-4, 10.0, 25)
    grid_ves = []
    for r in grid:
        theta, _ = train(np.array([1.0, r]))
        grid_ves.append(observe(theta).ve)
    gbest = min(grid_ves)
    tbest = trace.best_ve
    print(f"grid best={gbest:.4f} (r={grid[int(np.argmin(grid_ves))]:.4f}) "
          f"tuned best={tbest:.4f} -> {'PASS' if tbest <= gbest + 1e-12 else 'FAIL'}")
    return tbest <= gbest + 1e-12


if __name__ == "__main__":
    wins = sum(main(s) for s in (21, 22, 23, 24, 25, 26, 27, 28))
    print(f"{wins}/8 seeds pass")
