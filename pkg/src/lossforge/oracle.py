"""Independent ground-truth engines for finite model sets.

Given observations of finitely many models, the best achievable linear loss
can be found exactly: walk the models in ascending validation error and stop
at the first whose first-place ranking is realizable by some coefficient
vector in the feasible box. A dense grid enumerator of the same bilevel
objective serves as a second, dumber route to the same answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .losscore import Hypercube, Observation
from .numopt import check_lp_feasibility

__all__ = [
    "FiniteBilevelInstance",
    "optimal_lambda_finite",
    "brute_force_bilevel",
    "finite_difference_gradient",
]

_GRID_GUARD = 10**7


@dataclass(frozen=True)
class FiniteBilevelInstance:
    """Observations standing in for a finite model set, plus the feasible box."""

    observations: tuple[Observation, ...]
    feasible: Hypercube

    def __post_init__(self):
        obs = tuple(self.observations)
        if not obs:
            raise ValueError("need at least one observation")
        k = obs[0].k
        if any(o.k != k for o in obs):
            raise ValueError("observations disagree on feature dimension")
        if self.feasible.k != k:
            raise ValueError(
                f"feasible box has dimension {self.feasible.k}, expected {k}"
            )
        object.__setattr__(self, "observations", obs)

    @property
    def k(self) -> int:
        return self.observations[0].k

    @property
    def m(self) -> int:
        return len(self.observations)


def _sorted_by_ve(observations: Sequence[Observation]) -> np.ndarray:
    ve = np.array([o.ve for o in observations])
    return np.argsort(ve, kind="stable")


def optimal_lambda_finite(
    instance: FiniteBilevelInstance,
) -> tuple[np.ndarray, float]:
    """Exact argmin-ranking search over a finite model set.

    Visits observations in ascending validation error (stable in input
    order) and returns the first coefficient vector in the box under which
    that observation's loss is no larger than any other's. Some candidate
    always succeeds because every coefficient vector ranks somebody first.
    """
    obs = instance.observations
    F = instance.feasible
    order = _sorted_by_ve(obs)
    fvs = np.stack([o.fv for o in obs])
    for i in order:
        A = fvs[i] - np.delete(fvs, i, axis=0)
        b = np.zeros(A.shape[0])
        lam = check_lp_feasibility(A, b, F.lo, F.hi)
        if lam is not None:
            return lam, obs[i].ve
    raise RuntimeError("no candidate was realizable; feasible box may be empty")


def brute_force_bilevel(
    instance: FiniteBilevelInstance, grid_points_per_dim: int
) -> tuple[np.ndarray, float]:
    """Dense grid sweep of the bilevel objective over the feasible box.

    For each grid coefficient vector, the achieving model is the loss argmin
    over the observations with ties resolved toward the lowest validation
    error; the returned vector is the grid point whose achieved error is
    smallest. Grids beyond 10^7 points are refused.
    """
    obs = instance.observations
    F = instance.feasible
    if grid_points_per_dim < 1:
        raise ValueError("grid_points_per_dim must be >= 1")
    axes = []
    total = 1
    for j in range(F.k):
        if F.lo[j] == F.hi[j]:
            axes.append(np.array([F.lo[j]]))
        else:
            axes.append(np.linspace(F.lo[j], F.hi[j], grid_points_per_dim))
            total *= grid_points_per_dim
        if total > _GRID_GUARD:
            raise ValueError(f"grid exceeds {_GRID_GUARD} points")
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([m.ravel() for m in mesh], axis=1)  # (G, k)

    order = _sorted_by_ve(obs)
    ve_sorted = np.array([obs[i].ve for i in order])
    fv_sorted = np.stack([obs[i].fv for i in order])

    losses = grid @ fv_sorted.T  # (G, m); argmin picks the first (lowest-ve) tie
    argmins = np.argmin(losses, axis=1)
    achieved = ve_sorted[argmins]
    best = int(np.argmin(achieved))
    return grid[best], float(achieved[best])


def finite_difference_gradient(
    f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient estimate, one coordinate at a time."""
    if h <= 0:
        raise ValueError("h must be > 0")
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g
