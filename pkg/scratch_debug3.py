"""Replay smoke trial 193 and watch the infeasibility certificate."""
import numpy as np

import lossforge.numopt as no


def random_qp(rng, d, c, strict=True):
    B = rng.standard_normal((d + 2, d))
    P = B.T @ B / d
    if strict:
        P += (0.05 + rng.uniform(0, 0.5)) * np.eye(d)
    q = rng.standard_normal(d)
    A = rng.standard_normal((c, d)) if c else None
    b = rng.standard_normal(c) * 1.0 + 0.5 if c else None
    lo = rng.uniform(-3, -0.5, d)
    hi = rng.uniform(0.5, 3, d)
    return P, q, A, b, lo, hi


rng = np.random.default_rng(0)
saved = None
for trial in range(200):
    d = int(rng.integers(1, 13))
    c = int(rng.integers(0, 21))
    inst = random_qp(rng, d, c)
    if trial == 193:
        saved = (d, c, inst)
d, c, (P, q, A, b, lo, hi) = saved
print("d", d, "c", c)

prob = no.QpProblem(P, q, A, b, lo, hi)
Pe = prob.P + 2.0 * no.TIKHONOV * np.eye(d)
M = np.vstack([prob.A, np.eye(d)])
l = np.concatenate([np.full(c, -np.inf), lo])
u = np.concatenate([prob.b, hi])

work = no._Admm(Pe, prob.q, M, l, u)
y_prev = work.y_unscaled()
anchor = y_prev
anchor_it = 0
for it in range(1, 20001):
    work.step()
    if it % 100 == 0:
        work.adapt_rho()
    if it % 25 == 0:
        y = work.y_unscaled()
        if it % 500 == 0:
            rp, rd, rps = work.residuals()
            for tag, du in (("d25", y - y_prev), ("w", y - anchor)):
                nrm = np.abs(du).max()
                if nrm < 1e-14:
                    continue
                cert = np.abs(M.T @ du).max() / nrm
                sup = no._finite_support(du, l, u, nrm)
                print(f"it={it:6d} {tag}: rp={rp:.1e} rps={rps:.1e} rho={work.rho:.1e} "
                      f"cert={cert:.2e} sup_rel={sup/nrm:.2e}")
        y_prev = y
        if it - anchor_it >= 100:
            anchor = y
            anchor_it = it
