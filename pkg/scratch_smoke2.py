"""Stress: degenerate P, pinned coordinates, homogeneous argmin-style systems."""
import sys
import time

import numpy as np

sys.path.insert(0, "tests")
from _reference import reference_solve_qp, vertex_enumeration_feasible

from lossforge.numopt import QpProblem, QpStatus, check_lp_feasibility, solve_qp

rng = np.random.default_rng(42)

# 1. rank-deficient P (pure PSD outer product), some pinned coordinates
print("--- rank-deficient + pinned ---")
t0 = time.time()
bad = 0
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
    sol = solve_qp(QpProblem(P, q, A, b, lo, hi))
    if d <= 4:
        ref = vertex_enumeration_feasible(A if A is not None else np.zeros((0, d)),
                                          b if b is not None else np.zeros(0), lo, hi)
        if ref != (sol.status is QpStatus.OPTIMAL):
            print(f"  trial {trial}: verdict mismatch {sol.status} vs vertex={ref}")
            bad += 1
            continue
    if sol.status is QpStatus.OPTIMAL:
        assert sol.primal_residual <= 1e-8 and sol.dual_residual <= 1e-8, (trial, sol)
    elif sol.status is QpStatus.MAX_ITERATIONS:
        print(f"  trial {trial}: MAXIT d={d} c={c} rp={sol.primal_residual:.1e} rd={sol.dual_residual:.1e}")
        bad += 1
print(f"  done bad={bad} time={time.time()-t0:.1f}s")

# 2. homogeneous argmin systems: A lam <= 0 with box either containing 0 or not
print("--- homogeneous systems (argmin-style) ---")
t0 = time.time()
bad = 0
for trial in range(300):
    k = int(rng.integers(1, 5))
    m = int(rng.integers(2, 7))
    FV = rng.uniform(0, 2, size=(m, k))
    i = int(rng.integers(0, m))
    A = FV[i] - FV  # rows: fv_i - fv_j <= 0
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
    # solve both the feasibility problem and a cost QP on the same set
    x = check_lp_feasibility(A, b, lo, hi)
    ref = vertex_enumeration_feasible(A, b, lo, hi)
    if (x is not None) != ref:
        print(f"  trial {trial}: LP mismatch got={x is not None} ref={ref}")
        bad += 1
    P = np.eye(k) * 0.0
    rows = np.hstack([FV, -rng.uniform(0.5, 2.0, size=(m, 1))])
    P2 = 2.0 * rows.T @ rows  # cost-style quadratic in (lam, alpha)
    A2 = np.hstack([A, np.zeros((m - 1, 1))])
    lo2 = np.concatenate([lo, [1e-6]])
    hi2 = np.concatenate([hi, [np.inf]])
    sol = solve_qp(QpProblem(P2, np.zeros(k + 1), A2, b, lo2, hi2))
    if sol.status is QpStatus.MAX_ITERATIONS:
        print(f"  trial {trial}: cost-QP MAXIT k={k} m={m} rp={sol.primal_residual:.1e} rd={sol.dual_residual:.1e}")
        bad += 1
    elif (sol.status is QpStatus.OPTIMAL) != ref:
        print(f"  trial {trial}: cost-QP verdict {sol.status} vs LP ref={ref}")
        bad += 1
print(f"  done bad={bad} time={time.time()-t0:.1f}s")

# 3. trivial examples from the contract
sol = solve_qp(QpProblem([[2.0]], [-2.0]))
assert abs(sol.x[0] - 1) < 1e-6 and abs(sol.objective - (-1)) < 1e-6, sol
sol = solve_qp(QpProblem([[2.0]], [-4.0], lo=[0.0], hi=[1.0]))
assert abs(sol.x[0] - 1) < 1e-8, sol
x = check_lp_feasibility(np.array([[1.0], [-1.0]]), np.array([1.0, 0.0]),
                         np.array([-np.inf]), np.array([np.inf]))
assert x is not None and -1e-9 <= x[0] <= 1 + 1e-9
x = check_lp_feasibility(np.array([[1.0]]), np.array([-1.0]),
                         np.array([0.0]), np.array([1.0]))
assert x is None
print("trivial cases OK")
