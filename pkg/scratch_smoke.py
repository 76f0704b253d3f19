"""Scratch smoke test: ADMM solver vs dual-PG reference and vertex enumeration."""
import sys
import time

import numpy as np

sys.path.insert(0, "tests")
from _reference import reference_solve_qp, vertex_enumeration_feasible

from lossforge.numopt import QpProblem, QpStatus, check_lp_feasibility, solve_qp


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


def main():
    rng = np.random.default_rng(0)
    n_match = n_feasible = n_infeasible = n_maxit = 0
    max_dx = 0.0
    t0 = time.time()
    for trial in range(200):
        d = int(rng.integers(1, 13))
        c = int(rng.integers(0, 21))
        P, q, A, b, lo, hi = random_qp(rng, d, c)
        prob = QpProblem(P, q, A, b, lo, hi)
        sol = solve_qp(prob)
        feas_ref = None
        if d <= 4:
            feas_ref = vertex_enumeration_feasible(
                A if A is not None else np.zeros((0, d)),
                b if b is not None else np.zeros(0), lo, hi)
            verdict = sol.status in (QpStatus.OPTIMAL,)
            if feas_ref != verdict:
                print(f"trial {trial}: verdict mismatch d={d} c={c} "
                      f"status={sol.status} vertex={feas_ref} rp={sol.primal_residual:.2e}")
                continue
        if sol.status is QpStatus.OPTIMAL:
            n_feasible += 1
            assert sol.primal_residual <= 1e-8 and sol.dual_residual <= 1e-8, (
                trial, sol.primal_residual, sol.dual_residual)
            xr = reference_solve_qp(P, q, A, b, lo, hi)
            dx = float(np.abs(sol.x - xr).max())
            max_dx = max(max_dx, dx)
            if dx <= 1e-6:
                n_match += 1
            else:
                print(f"trial {trial}: dx={dx:.2e} d={d} c={c} iters={sol.iterations}")
        elif sol.status is QpStatus.INFEASIBLE:
            n_infeasible += 1
        else:
            n_maxit += 1
            print(f"trial {trial}: MAX_ITERATIONS d={d} c={c} "
                  f"rp={sol.primal_residual:.2e} rd={sol.dual_residual:.2e}")
    dt = time.time() - t0
    print(f"feasible={n_feasible} match={n_match} infeasible={n_infeasible} "
          f"maxit={n_maxit} max_dx={max_dx:.3e} time={dt:.1f}s")

    # feasibility-only check
    n_agree = 0
    for trial in range(300):
        d = int(rng.integers(1, 4))
        c = int(rng.integers(1, 8))
        A = rng.standard_normal((c, d))
        b = rng.standard_normal(c)
        lo = rng.uniform(-2, 0, d)
        hi = rng.uniform(0, 2, d)
        x = check_lp_feasibility(A, b, lo, hi)
        ref = vertex_enumeration_feasible(A, b, lo, hi)
        got = x is not None
        if got == ref:
            n_agree += 1
        else:
            print(f"lp trial {trial}: mismatch got={got} ref={ref} d={d} c={c}")
        if x is not None:
            assert np.max(A @ x - b) <= 1e-8 and np.all(x >= lo - 1e-9) and np.all(x <= hi + 1e-9)
    print(f"lp feasibility agreement: {n_agree}/300")


if __name__ == "__main__":
    main()
