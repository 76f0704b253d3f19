"""Reproduce the non-detected infeasible cost-QP and inspect certificates."""
import numpy as np

rng = np.random.default_rng(42)

# replay the generator up to trial 292 of section 2
for trial in range(200):
    d = int(rng.integers(2, 10))
    r = int(rng.integers(1, d + 1))
    B = rng.standard_normal((r, d))
    P = B.T @ B
    q = rng.standard_normal(d)
    c = int(rng.integers(0, 12))
    A = rng.standard_normal((c, d)) if c else None
    b = rng.standard_normal(c) + 0.5 if c else None
    lo = rng.uniform(-2, 0, d)
    hi = rng.uniform(0, 2, d)
    npin = int(rng.integers(0, max(1, d // 2)))
    pins = rng.choice(d, size=npin, replace=False)
    for j in pins:
        v = rng.uniform(lo[j], hi[j])
        lo[j] = hi[j] = v

saved = None
for trial in range(300):
    k = int(rng.integers(1, 5))
    m = int(rng.integers(2, 7))
    FV = rng.uniform(0, 2, size=(m, k))
    i = int(rng.integers(0, m))
    A = FV[i] - FV
    A = np.delete(A, i, axis=0)
    b = np.zeros(m - 1)
    if rng.random() < 0.5:
        lo = np.zeros(k)
    else:
        lo = rng.uniform(0.05, 0.5, k)
    hi = lo + rng.uniform(0.2, 1.5, k)
    if rng.random() < 0.4:
        j = int(rng.integers(0, k))
        v = rng.uniform(lo[j], hi[j])
        lo[j] = hi[j] = v
    rows = np.hstack([FV, -rng.uniform(0.5, 2.0, size=(m, 1))])
    if trial == 292:
        saved = (k, m, FV, A, b, lo, hi, rows)

k, m, FV, A, b, lo, hi, rows = saved
print("k", k, "m", m, "lo", lo, "hi", hi)

import lossforge.numopt as no

P2 = 2.0 * rows.T @ rows
A2 = np.hstack([A, np.zeros((m - 1, 1))])
lo2 = np.concatenate([lo, [1e-6]])
hi2 = np.concatenate([hi, [np.inf]])

# instrument: run the internal ADMM manually
prob = no.QpProblem(P2, np.zeros(k + 1), A2, b, lo2, hi2)
d = prob.d
free = prob.lo < prob.hi
idx_free = np.flatnonzero(free)
x_pin = prob.lo[~free]
Pe_full = prob.P + 2.0 * no.TIKHONOV * np.eye(d)
Pe = Pe_full[np.ix_(idx_free, idx_free)]
q = prob.q[idx_free]
Ar = prob.A[:, idx_free]
br = prob.b - prob.A[:, ~free] @ x_pin
dr = idx_free.size
M = np.vstack([Ar, np.eye(dr)])
l = np.concatenate([np.full(prob.c, -np.inf), prob.lo[idx_free]])
u = np.concatenate([br, prob.hi[idx_free]])

work = no._Admm(Pe, q, M, l, u)
y_prev = work.y_unscaled()
for it in range(1, 20001):
    work.step()
    if it % 100 == 0:
        work.adapt_rho()
    if it % 500 == 0:
        rp, rd, rps = work.residuals()
        y = work.y_unscaled()
        du = y - y_prev
        nrm = np.abs(du).max()
        cert = np.abs(M.T @ du).max() / nrm if nrm > 0 else np.nan
        sup = no._finite_support(du, l, u, nrm)
        print(f"it={it:6d} rp={rp:.2e} rd={rd:.2e} rps={rps:.2e} rho={work.rho:.2e} "
              f"cert={cert:.2e} sup_rel={sup/nrm if nrm>0 else np.nan:.2e} nrm={nrm:.1e}")
        y_prev = y
