"""Learn a linear loss from observations of trained models.

Observations are sorted by validation error. For each candidate best model
in turn, a convex QP looks for coefficients (and a positive error-scale
multiplier) that rank the candidate's loss lowest while fitting the recorded
errors, and optionally the recorded gradients, as closely as possible. The
first candidate whose ranking constraints are satisfiable wins.

The decision vector is ``(lam, alpha)`` of dimension k+1. The fit objective
stacks one row ``(fv_i, -ve_i)`` per observation and, when gradients are
used, the rows of ``(J_i, -g_i)`` scaled by sqrt(epsilon); its value is the
squared norm of the stacked matrix applied to the decision vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .losscore import CostParams, Hypercube, Observation, cost
from .numopt import QpProblem, QpStatus, solve_qp

__all__ = ["LearnLossResult", "learn_loss", "default_epsilon"]


@dataclass(frozen=True)
class LearnLossResult:
    """Outcome of the ranking-constrained fit.

    ``argmin_index`` is the 1-based position, in ascending validation error
    order, of the observation whose ranking constraints were satisfiable;
    ``qp_attempts`` counts the QPs solved, which equals ``argmin_index``.
    """

    lam: np.ndarray
    alpha: float
    argmin_index: int
    cost_value: float
    qp_attempts: int

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam.tolist(),
            "alpha": self.alpha,
            "argmin_index": self.argmin_index,
            "cost": self.cost_value,
            "qp_attempts": self.qp_attempts,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _gradient_usage(observations: Sequence[Observation], epsilon: float) -> bool:
    have = [o.has_gradients for o in observations]
    if epsilon > 0 and any(have) and not all(have):
        raise ValueError(
            "epsilon > 0 with gradients on only some observations; "
            "provide gradients for all observations or none"
        )
    return epsilon > 0 and all(have)


def learn_loss(
    observations: Sequence[Observation],
    feasible: Hypercube,
    params: CostParams | None = None,
) -> LearnLossResult:
    """Find feasible loss coefficients that best explain the observations.

    Raises if the feasible box lets no observation be ranked first, or if
    any candidate QP fails to resolve within the solver's iteration cap.
    """
    if params is None:
        params = CostParams()
    observations = list(observations)
    if not observations:
        raise ValueError("need at least one observation")
    k = observations[0].k
    if any(o.k != k for o in observations):
        raise ValueError("observations disagree on feature dimension")
    if feasible.k != k:
        raise ValueError(f"feasible box has dimension {feasible.k}, expected {k}")
    use_gradients = _gradient_usage(observations, params.epsilon)

    order = np.argsort([o.ve for o in observations], kind="stable")
    obs = [observations[i] for i in order]
    m = len(obs)
    fvs = np.stack([o.fv for o in obs])
    ves = np.array([o.ve for o in obs])

    rows = [np.hstack([fvs, -ves[:, None]])]
    if use_gradients:
        sq = np.sqrt(params.epsilon)
        rows.extend(
            sq * np.hstack([o.jacobian, -o.grad_ve[:, None]]) for o in obs
        )
    B = np.vstack(rows)
    P = 2.0 * (B.T @ B)
    q = np.zeros(k + 1)
    lo = np.concatenate([feasible.lo, [params.alpha_min]])
    hi = np.concatenate([feasible.hi, [np.inf]])

    for idx in range(m):
        A = np.hstack([fvs[idx] - np.delete(fvs, idx, axis=0),
                       np.zeros((m - 1, 1))])
        b = np.zeros(m - 1)
        sol = solve_qp(QpProblem(P, q, A, b, lo, hi))
        if sol.status is QpStatus.OPTIMAL:
            lam = feasible.clip(sol.x[:k])
            alpha = float(max(sol.x[k], params.alpha_min))
            return LearnLossResult(
                lam=lam,
                alpha=alpha,
                argmin_index=idx + 1,
                cost_value=cost(lam, alpha, obs, params),
                qp_attempts=idx + 1,
            )
        if sol.status is QpStatus.MAX_ITERATIONS:
            raise RuntimeError(
                f"candidate {idx + 1} QP did not resolve "
                f"(primal {sol.primal_residual:.2e}, dual {sol.dual_residual:.2e})"
            )
    raise RuntimeError("feasible set excludes every argmin")


def default_epsilon(observations: Sequence[Observation]) -> float:
    """Gradient-term weight that balances the two fit penalties: total
    squared validation-gradient norm over total squared Jacobian norm
    (zero when the denominator vanishes)."""
    observations = list(observations)
    if not observations:
        raise ValueError("need at least one observation")
    if not all(o.has_gradients for o in observations):
        raise ValueError("default_epsilon needs gradients on every observation")
    num = sum(float(np.dot(o.grad_ve, o.grad_ve)) for o in observations)
    den = sum(float(np.sum(o.jacobian * o.jacobian)) for o in observations)
    if den == 0.0:
        return 0.0
    return num / den
