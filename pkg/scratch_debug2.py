"""Find the failing phase-1 LP from smoke2 and inspect ADMM behavior."""
import numpy as np

import lossforge.numopt as no

rng = np.random.default_rng(42)
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

failing = None
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
    try:
        x = no.check_lp_feasibility(A, b, lo, hi)
    except RuntimeError:
        failing = (trial, k, m, A, b, lo, hi)
        break

trial, k, m, A, b, lo, hi = failing
print("failing trial", trial, "k", k, "m", m)
print("lo", lo, "hi", hi)
print("A", A)

c = A.shape[0]
d = A.shape[1]
A1 = np.hstack([A, -np.ones((c, 1))])
prob = no.QpProblem(
    P=np.zeros((d + 1, d + 1)),
    q=np.concatenate([np.zeros(d), [1.0]]),
    A=A1, b=b,
    lo=np.concatenate([lo, [0.0]]),
    hi=np.concatenate([hi, [np.inf]]),
)
free = prob.lo < prob.hi
idx_free = np.flatnonzero(free)
x_pin = prob.lo[~free]
Pe_full = prob.P + 2.0 * no.TIKHONOV * np.eye(prob.d)
Pe = Pe_full[np.ix_(idx_free, idx_free)]
q = prob.q[idx_free] + Pe_full[np.ix_(idx_free, np.flatnonzero(~free))] @ x_pin
Ar = prob.A[:, idx_free]
br = prob.b - prob.A[:, ~free] @ x_pin
dr = idx_free.size
M = np.vstack([Ar, np.eye(dr)])
l = np.concatenate([np.full(prob.c, -np.inf), prob.lo[idx_free]])
u = np.concatenate([br, prob.hi[idx_free]])

work = no._Admm(Pe, q, M, l, u)
for it in range(1, 20001):
    work.step()
    if it % 100 == 0:
        work.adapt_rho()
    if it % 1000 == 0:
        rp, rd, rps = work.residuals()
        xp, yp, ok = no._polish(Pe, q, M, l, u, work.y_unscaled())
        print(f"it={it:6d} rp={rp:.2e} rd={rd:.2e} rho={work.rho:.2e} polish_ok={ok}")
        if it == 5000:
            yu = work.y_unscaled()
            print("  y:", np.round(yu, 8))
            print("  x:", np.round(work.x_unscaled(), 6))
            if xp is not None:
                print("  xp:", np.round(xp, 6))
