"""Slow, independent reference solvers used only by the test suite.

These deliberately share no code with the package solver: the QP reference
runs projected gradient ascent on the dual (trivial projection onto the
nonnegative orthant) with a KKT refinement once the active set settles, and
feasibility questions are answered by enumerating basic points from every
d-subset of constraint rows.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

TIKHONOV = 1e-9  # matches the package solver's documented uniqueness term


def reference_solve_qp(
    P,
    q,
    A=None,
    b=None,
    lo=None,
    hi=None,
    max_iters: int = 400_000,
    refine_every: int = 200,
) -> np.ndarray:
    """Minimize 0.5 x'Px + q'x + TIKHONOV*||x||^2 over Ax<=b, lo<=x<=hi.

    Requires the (regularized) quadratic term to be positive definite and
    the problem to be feasible. Raises if convergence is not reached.
    """
    P = np.asarray(P, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    d = P.shape[0]
    Pe = P + 2.0 * TIKHONOV * np.eye(d)

    rows = []
    rhs = []
    if A is not None and len(A):
        rows.append(np.asarray(A, dtype=np.float64))
        rhs.append(np.asarray(b, dtype=np.float64))
    if hi is not None:
        hi = np.asarray(hi, dtype=np.float64)
        fin = np.isfinite(hi)
        if fin.any():
            rows.append(np.eye(d)[fin])
            rhs.append(hi[fin])
    if lo is not None:
        lo = np.asarray(lo, dtype=np.float64)
        fin = np.isfinite(lo)
        if fin.any():
            rows.append(-np.eye(d)[fin])
            rhs.append(-lo[fin])

    cho = cho_factor(Pe)
    if not rows:
        return cho_solve(cho, -q)

    G = np.vstack(rows)
    h = np.concatenate(rhs)
    m = G.shape[0]
    PinvGT = cho_solve(cho, G.T)
    Pinvq = cho_solve(cho, q)
    S = G @ PinvGT
    g0 = G @ Pinvq + h
    L = float(np.linalg.eigvalsh(S).max())
    step = 1.0 / max(L, 1e-12)

    def primal(mu):
        return -(Pinvq + PinvGT @ mu)

    mu = np.zeros(m)
    mu_prev = mu.copy()
    t = 1.0
    for it in range(1, max_iters + 1):
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        w = mu + ((t - 1.0) / t_next) * (mu - mu_prev)
        grad = S @ w + g0
        mu_new = np.maximum(w - step * grad, 0.0)
        if np.dot(w - mu_new, mu_new - mu) > 0.0:  # adaptive restart
            t_next = 1.0
        mu_prev, mu, t = mu, mu_new, t_next

        if it % refine_every == 0:
            x = primal(mu)
            slack = G @ x - h
            act = (mu > 1e-9) | (slack > -1e-7)
            x_ref = _kkt_refine(Pe, q, G, h, act)
            if x_ref is not None:
                return x_ref
    raise RuntimeError("reference QP solver did not converge")


def _kkt_refine(Pe, q, G, h, act) -> np.ndarray | None:
    """Solve the KKT equalities for a guessed active set and verify."""
    d = Pe.shape[0]
    Ga = G[act]
    na = Ga.shape[0]
    K = np.zeros((d + na, d + na))
    K[:d, :d] = Pe
    K[:d, d:] = Ga.T
    K[d:, :d] = Ga
    rhs = np.concatenate([-q, h[act]])
    sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
    x = sol[:d]
    w = sol[d:]
    if np.any(w < -1e-9):
        return None
    w = np.maximum(w, 0.0)
    mu = np.zeros(G.shape[0])
    mu[act] = w
    stat = Pe @ x + q + G.T @ mu
    feas = G @ x - h
    comp = mu * feas
    if (
        np.abs(stat).max(initial=0.0) <= 1e-9
        and feas.max(initial=0.0) <= 1e-9
        and np.abs(comp).max(initial=0.0) <= 1e-8
    ):
        return x
    return None


def vertex_enumeration_feasible(A, b, lo, hi, tol: float = 1e-8) -> bool:
    """Exhaustive feasibility check for {Ax <= b, lo <= x <= hi}.

    Requires a finite box so the feasible set is a polytope; a nonempty
    polytope contains a basic point formed by d active constraint rows,
    so it suffices to test every such candidate.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    d = A.shape[1] if A.ndim == 2 else lo.shape[0]
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("vertex enumeration needs a finite box")
    if np.any(lo > hi):
        return False

    rows = np.vstack([A.reshape(-1, d), np.eye(d), -np.eye(d)])
    rhs = np.concatenate([b, hi, -lo])
    norms = np.linalg.norm(rows, axis=1)
    keep = norms > 1e-14
    rows, rhs = rows[keep] / norms[keep, None], rhs[keep] / norms[keep]
    n = rows.shape[0]

    subsets = np.array(list(combinations(range(n), d)), dtype=np.intp)
    mats = rows[subsets]  # (N, d, d)
    vecs = rhs[subsets]  # (N, d)
    dets = np.abs(np.linalg.det(mats))
    ok = dets > 1e-10
    if not np.any(ok):
        return False
    pts = np.linalg.solve(mats[ok], vecs[ok][..., None])[..., 0]  # (M, d)
    viol = pts @ rows.T - rhs[None, :]
    return bool(np.any(viol.max(axis=1) <= tol))
