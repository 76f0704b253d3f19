"""Alternate between learning loss coefficients and training against them.

Each iteration fits coefficients to the observations gathered so far, hands
the resulting loss to a trainer callback together with the latest model, and
appends the newly trained model's observation to the dataset. With a
one-epoch trainer this adjusts the loss online during a single training run;
with a from-scratch trainer it is sequential hyperparameter tuning.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Protocol, Sequence

import numpy as np

from .learnloss import default_epsilon, learn_loss
from .losscore import CostParams, Hypercube, LinearLoss, Observation, evaluate_loss

__all__ = [
    "TuneConfig",
    "TuneRecord",
    "TuneTrace",
    "TuneAbort",
    "TrainerHandle",
    "tune_loss",
    "overfit_start_epoch",
    "bootstrap_overfit_start",
    "trace_to_csv",
    "write_trace",
]

_MODES = ("online", "full-run")


class TrainerHandle(Protocol):
    """Trains one model against a linear loss, warm-starting from the given
    model object, and returns the new model plus its observation. Returning
    None signals exhaustion (no further training possible). Must be
    deterministic given (loss, warm start)."""

    def __call__(
        self, loss: LinearLoss, warm_start: Any
    ) -> tuple[Any, Observation] | None: ...


@dataclass(frozen=True)
class TuneConfig:
    """Loop settings.

    ``epsilon`` is either a fixed gradient-term weight or "auto", which
    recomputes the balancing heuristic from the current dataset every
    iteration. With ``use_gradients`` off the gradient term is dropped
    entirely (epsilon 0).
    """

    feasible: Hypercube
    max_iterations: int = 1
    mode: str = "full-run"
    epsilon: float | str = "auto"
    use_gradients: bool = True
    seed: int = 0
    alpha_min: float = 1e-6
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if isinstance(self.epsilon, str):
            if self.epsilon != "auto":
                raise ValueError("epsilon must be a number or 'auto'")
        elif self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "max_iterations": self.max_iterations,
            "feasible_lo": self.feasible.lo.tolist(),
            "feasible_hi": self.feasible.hi.tolist(),
            "epsilon": self.epsilon,
            "use_gradients": self.use_gradients,
            "seed": self.seed,
            "alpha_min": self.alpha_min,
            "feature_names": list(self.feature_names),
        }


@dataclass(frozen=True)
class TuneRecord:
    iteration: int
    lam: np.ndarray
    ve: float
    train_loss: float
    wall_ms: float


@dataclass
class TuneTrace:
    """Per-iteration records plus the growing observation dataset.

    ``observations`` holds the initial models followed by one new
    observation per completed iteration.
    """

    initial_size: int
    records: list[TuneRecord] = field(default_factory=list)
    observations: list[Observation] = field(default_factory=list)
    final_model: Any = None

    @property
    def best_ve(self) -> float:
        candidates = [o.ve for o in self.observations[self.initial_size:]]
        if not candidates:
            raise ValueError("no tuned iterations recorded")
        return min(candidates)


class TuneAbort(RuntimeError):
    """A trainer or fit failure mid-loop; carries the partial trace."""

    def __init__(self, message: str, trace: TuneTrace):
        super().__init__(message)
        self.trace = trace


def _resolve_epsilon(config: TuneConfig, observations: Sequence[Observation]) -> float:
    if not config.use_gradients:
        return 0.0
    if config.epsilon == "auto":
        if not all(o.has_gradients for o in observations):
            raise ValueError(
                "epsilon='auto' with use_gradients needs gradients on every "
                "observation"
            )
        return default_epsilon(observations)
    return float(config.epsilon)


def tune_loss(
    initial: Sequence[Observation],
    warm_start: Any,
    trainer: TrainerHandle,
    config: TuneConfig,
) -> TuneTrace:
    """Run the learn-then-train loop for ``config.max_iterations`` rounds
    (or until the trainer signals exhaustion). Trainer and fit errors abort
    with the partial trace attached to the raised :class:`TuneAbort`."""
    initial = list(initial)
    if not initial:
        raise ValueError("need at least one initial observation")
    k = initial[0].k
    names = tuple(config.feature_names) or tuple(f"f{j}" for j in range(k))
    trace = TuneTrace(initial_size=len(initial), observations=list(initial))
    model = warm_start
    for i in range(1, config.max_iterations + 1):
        try:
            eps = _resolve_epsilon(config, trace.observations)
            result = learn_loss(
                trace.observations,
                config.feasible,
                CostParams(epsilon=eps, alpha_min=config.alpha_min),
            )
            loss = LinearLoss(result.lam, names)
            t0 = time.perf_counter()
            step = trainer(loss, model)
            wall_ms = (time.perf_counter() - t0) * 1e3
        except TuneAbort:
            raise
        except Exception as exc:
            raise TuneAbort(f"iteration {i} failed: {exc}", trace) from exc
        if step is None:
            break
        model, obs = step
        trace.observations.append(obs)
        trace.records.append(
            TuneRecord(
                iteration=i,
                lam=result.lam,
                ve=obs.ve,
                train_loss=evaluate_loss(loss, obs.fv),
                wall_ms=wall_ms,
            )
        )
    trace.final_model = model
    return trace


def bootstrap_overfit_start(
    loss: LinearLoss,
    features,
    start,
    val_data,
    max_epochs: int,
    lr: float = 0.1,
    with_gradients: bool = True,
):
    """Gather the initial model set for online tuning.

    Trains one epoch at a time against the given default loss, recording a
    per-epoch observation, and stops at the end of the first epoch whose
    validation loss is worse than the previous epoch's (or at
    ``max_epochs``). Returns (observations, final state, validation curve).
    """
    from .trainer import train_with_warm_start

    if max_epochs < 1:
        raise ValueError("max_epochs must be >= 1")
    observations = []
    curve: list[float] = []
    state = start
    for epoch in range(1, max_epochs + 1):
        state, obs = train_with_warm_start(
            loss, features, state, val_data, epochs=1, lr=lr,
            with_gradients=with_gradients, model_id=f"warmup-epoch-{epoch}",
        )
        observations.append(obs)
        curve.append(obs.ve)
        if len(curve) >= 2 and curve[-1] > curve[-2]:
            break
    return observations, state, curve


def overfit_start_epoch(validation_curve: Sequence[float]) -> int:
    """First epoch (1-indexed, at least 2) whose validation loss got worse
    than the epoch before it; the curve length if that never happens."""
    curve = list(validation_curve)
    if not curve:
        raise ValueError("validation curve must be nonempty")
    for t in range(2, len(curve) + 1):
        if curve[t - 1] > curve[t - 2]:
            return t
    return len(curve)


# ---------------------------------------------------------------------------
# trace serialization
# ---------------------------------------------------------------------------


def trace_to_csv(trace: TuneTrace) -> str:
    """CSV with one row per iteration: iteration, ve, train_loss, the
    coefficient columns, and wall time in milliseconds."""
    if trace.records:
        k = trace.records[0].lam.shape[0]
    else:
        k = 0
    header = ["iteration", "ve", "train_loss"]
    header += [f"lambda_{j}" for j in range(k)]
    header += ["wall_ms"]
    lines = [",".join(header)]
    for rec in trace.records:
        row = [str(rec.iteration), repr(rec.ve), repr(rec.train_loss)]
        row += [repr(float(v)) for v in rec.lam]
        row += [repr(rec.wall_ms)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_trace(trace: TuneTrace, config: TuneConfig, csv_path) -> None:
    """Write the trace CSV plus a JSON sidecar holding config and seed."""
    csv_path = str(csv_path)
    with open(csv_path, "w") as fp:
        fp.write(trace_to_csv(trace))
    sidecar = csv_path[:-4] if csv_path.endswith(".csv") else csv_path
    with open(sidecar + ".json", "w") as fp:
        json.dump(config.to_dict(), fp, indent=2)
        fp.write("\n")
