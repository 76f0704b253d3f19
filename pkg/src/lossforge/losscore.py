"""Core problem types: observations of trained models, box feasible sets,
linear losses, and the quadratic fit cost that scores a candidate loss.

A linear loss is ``lam . fv(theta)`` for a user-chosen feature map ``fv``.
Everything downstream (learning, tuning, oracles) works purely on
:class:`Observation` records, so models never need to be re-evaluated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

__all__ = [
    "Observation",
    "Hypercube",
    "LinearLoss",
    "CostParams",
    "evaluate_loss",
    "cost",
    "observation_to_dict",
    "observation_from_dict",
    "write_observations_jsonl",
    "read_observations_jsonl",
]


def _as_float_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-d vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Observation:
    """One trained model's record: validation error, feature vector, and
    (optionally) the validation gradient plus the feature Jacobian.

    ``jacobian`` has one column per feature; column j is the gradient of
    feature j at the model. ``grad_ve`` and ``jacobian`` are either both
    present or both absent, and must agree on the model dimension n.
    """

    ve: float
    fv: np.ndarray
    grad_ve: np.ndarray | None = None
    jacobian: np.ndarray | None = None
    model_id: str = ""

    def __post_init__(self):
        fv = _as_float_vector(self.fv, "fv")
        object.__setattr__(self, "fv", fv)
        ve = float(self.ve)
        object.__setattr__(self, "ve", ve)
        if not np.isfinite(ve) or ve < 0:
            raise ValueError(f"ve must be finite and >= 0, got {ve}")
        if not np.all(np.isfinite(fv)):
            raise ValueError("fv must be finite")
        if (self.grad_ve is None) != (self.jacobian is None):
            raise ValueError("grad_ve and jacobian must be given together")
        if self.grad_ve is not None:
            g = _as_float_vector(self.grad_ve, "grad_ve")
            J = np.asarray(self.jacobian, dtype=np.float64)
            if J.ndim != 2:
                raise ValueError(f"jacobian must be 2-d, got shape {J.shape}")
            if J.shape != (g.shape[0], fv.shape[0]):
                raise ValueError(
                    f"jacobian shape {J.shape} does not match "
                    f"(n={g.shape[0]}, k={fv.shape[0]})"
                )
            object.__setattr__(self, "grad_ve", g)
            object.__setattr__(self, "jacobian", J)

    @property
    def k(self) -> int:
        return self.fv.shape[0]

    @property
    def has_gradients(self) -> bool:
        return self.grad_ve is not None


@dataclass(frozen=True)
class Hypercube:
    """Per-coordinate box constraint on the loss coefficients.

    All bounds are finite; ``lo[j] == hi[j]`` pins coordinate j to a value.
    """

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = _as_float_vector(self.lo, "lo")
        hi = _as_float_vector(self.hi, "hi")
        if lo.shape != hi.shape:
            raise ValueError("lo and hi must have the same length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("hypercube bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("need lo <= hi coordinatewise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def k(self) -> int:
        return self.lo.shape[0]

    @property
    def pinned(self) -> np.ndarray:
        """Boolean mask of coordinates fixed to a single value."""
        return self.lo == self.hi

    def contains(self, lam: np.ndarray, tol: float = 1e-9) -> bool:
        lam = np.asarray(lam, dtype=np.float64)
        return bool(np.all(lam >= self.lo - tol) and np.all(lam <= self.hi + tol))

    def clip(self, lam: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(lam, dtype=np.float64), self.lo, self.hi)

    @staticmethod
    def from_ranges(ranges: Sequence[tuple[float, float]]) -> "Hypercube":
        lo = np.array([r[0] for r in ranges], dtype=np.float64)
        hi = np.array([r[1] for r in ranges], dtype=np.float64)
        return Hypercube(lo, hi)


@dataclass(frozen=True)
class LinearLoss:
    """A coefficient vector paired with the names of the features it weights."""

    lam: np.ndarray
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        lam = _as_float_vector(self.lam, "lam")
        if not np.all(np.isfinite(lam)):
            raise ValueError("lam must be finite")
        names = tuple(self.feature_names)
        if not names:
            names = tuple(f"f{j}" for j in range(lam.shape[0]))
        if len(names) != lam.shape[0]:
            raise ValueError(
                f"got {len(names)} feature names for {lam.shape[0]} coefficients"
            )
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "feature_names", names)

    @property
    def k(self) -> int:
        return self.lam.shape[0]


@dataclass(frozen=True)
class CostParams:
    """Settings for the quadratic fit cost.

    ``epsilon`` weights the gradient-matching penalty; ``alpha_min`` is the
    strictly positive floor on the error-scale multiplier (the multiplier
    must stay positive, and a small floor keeps the zero loss out of reach).
    """

    epsilon: float = 0.0
    alpha_min: float = 1e-6

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if not (np.isfinite(self.alpha_min) and self.alpha_min > 0):
            raise ValueError(f"alpha_min must be > 0, got {self.alpha_min}")


def evaluate_loss(loss: LinearLoss, fv: np.ndarray) -> float:
    """Value of the linear loss on a feature vector (a plain dot product)."""
    fv = _as_float_vector(fv, "fv")
    if fv.shape[0] != loss.k:
        raise ValueError(f"feature vector has length {fv.shape[0]}, expected {loss.k}")
    return float(np.dot(loss.lam, fv))


def _check_gradient_availability(
    observations: Sequence[Observation], epsilon: float
) -> bool:
    """Return whether the gradient term applies; reject mixed availability."""
    have = [o.has_gradients for o in observations]
    if epsilon > 0 and any(have) and not all(have):
        raise ValueError(
            "epsilon > 0 with gradients on only some observations; "
            "provide gradients for all observations or none"
        )
    return epsilon > 0 and all(have) and len(have) > 0


def cost(
    lam: np.ndarray,
    alpha: float,
    observations: Sequence[Observation],
    params: CostParams,
) -> float:
    """Quadratic misfit between a candidate loss and the recorded errors.

    Sums ``(lam . fv_i - alpha * ve_i)^2`` over observations, plus
    ``epsilon * ||J_i lam - alpha * g_i||^2`` when every observation carries
    gradients. With ``epsilon > 0`` and gradients on only part of the set the
    weighting would be undefined, so that case raises.
    """
    lam = _as_float_vector(lam, "lam")
    if not observations:
        raise ValueError("need at least one observation")
    k = observations[0].k
    if lam.shape[0] != k:
        raise ValueError(f"lam has length {lam.shape[0]}, expected {k}")
    if any(o.k != k for o in observations):
        raise ValueError("observations disagree on feature dimension")
    alpha = float(alpha)
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")

    use_gradients = _check_gradient_availability(observations, params.epsilon)

    total = 0.0
    for o in observations:
        r = float(np.dot(lam, o.fv)) - alpha * o.ve
        total += r * r
    if use_gradients:
        for o in observations:
            resid = o.jacobian @ lam - alpha * o.grad_ve
            total += params.epsilon * float(np.dot(resid, resid))
    return total


# ---------------------------------------------------------------------------
# JSON-lines interchange format
# ---------------------------------------------------------------------------
# One record per observation with keys: ve (number), fv (array), optional
# grad_ve (array), optional jacobian (row-major array of arrays), model_id.


def observation_to_dict(obs: Observation) -> dict:
    rec = {"ve": obs.ve, "fv": obs.fv.tolist(), "model_id": obs.model_id}
    if obs.has_gradients:
        rec["grad_ve"] = obs.grad_ve.tolist()
        rec["jacobian"] = obs.jacobian.tolist()
    return rec


def observation_from_dict(rec: dict) -> Observation:
    return Observation(
        ve=rec["ve"],
        fv=np.asarray(rec["fv"], dtype=np.float64),
        grad_ve=None if rec.get("grad_ve") is None else np.asarray(rec["grad_ve"]),
        jacobian=None if rec.get("jacobian") is None else np.asarray(rec["jacobian"]),
        model_id=str(rec.get("model_id", "")),
    )


def write_observations_jsonl(observations: Iterable[Observation], fp: IO[str]) -> None:
    for obs in observations:
        fp.write(json.dumps(observation_to_dict(obs)) + "\n")


def read_observations_jsonl(fp: IO[str]) -> list[Observation]:
    out = []
    for line in fp:
        line = line.strip()
        if line:
            out.append(observation_from_dict(json.loads(line)))
    return out
