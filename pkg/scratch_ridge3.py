"""Planted quadratic ground truth: ve is exactly fit + r*.norm."""
import numpy as np

from lossforge.losscore import Hypercube, Observation
from lossforge.tuneloss import TuneConfig, tune_loss


def build(seed, r_star=0.1):
    rng = np.random.default_rng(seed)
    d = 8
    mt = 12
    theta_true = rng.standard_normal(d)
    X = rng.standard_normal((mt, d))
    y = X @ theta_true + 0.6 * rng.standard_normal(mt)

    def fit(theta):
        return float(np.sum((X @ theta - y) ** 2)) / mt

    def fit_grad(theta):
        return 2.0 * X.T @ (X @ theta - y) / mt

    def ve(theta):
        return fit(theta) + r_star * float(theta @ theta)

    def observe(theta, model_id=""):
        J = np.column_stack([fit_grad(theta), 2.0 * theta])
        g = fit_grad(theta) + 2.0 * r_star * theta
        return Observation(ve=ve(theta), fv=np.array([fit(theta), float(theta @ theta)]),
                           grad_ve=g, jacobian=J, model_id=model_id)

    def train_exact(lam):
        ratio = lam[1] / lam[0]
        return np.linalg.solve(X.T @ X / mt + ratio * np.eye(d), X.T @ y / mt)

    def train_gd(lam, steps, eta=0.05, collect=()):
        theta = np.zeros(d)
        cps = []
        for t in range(1, steps + 1):
            theta = theta - eta * (lam[0] * fit_grad(theta) + 2 * lam[1] * theta)
            if t in collect:
                cps.append(observe(theta, f"step-{t}"))
        return theta, cps

    return observe, train_exact, train_gd, ve


def main(seed):
    observe, train_exact, train_gd, ve = build(seed)
    theta0, D0 = train_gd(np.array([1.0, 0.0]), steps=60, collect=(5, 20, 60))
    feasible = Hypercube(np.array([1.0, 1e-4]), np.array([1.0, 10.0]))

    def trainer(loss, model):
        theta = train_exact(loss.lam)
        return theta, observe(theta)

    trace = tune_loss(D0, theta0, trainer,
                      TuneConfig(feasible=feasible, max_iterations=3,
                                 epsilon="auto"))
    grid = np.geomspace(1e-4, 10.0, 25)
    gbest = min(observe(train_exact(np.array([1.0, r]))).ve for r in grid)
    lams = [f"{r.lam[1]:.5f}" for r in trace.records]
    ok = trace.best_ve <= gbest + 1e-12
    print(f"seed {seed}: learned r {lams} tuned={trace.best_ve:.6f} "
          f"grid={gbest:.6f} {'PASS' if ok else 'FAIL'}")
    return ok


wins = sum(main(s) for s in range(21, 41))
print(f"{wins}/20 seeds pass")
