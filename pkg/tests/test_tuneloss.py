"""Tests for the learn-then-train tuning loop."""

import numpy as np
import pytest

from lossforge.losscore import Hypercube, LinearLoss, Observation
from lossforge.features import standard_regularizer_features
from lossforge.trainer import (
    Dataset,
    SoftmaxSpec,
    init_state,
    logloss_and_grad,
    train_with_warm_start,
)
from lossforge.tuneloss import (
    TuneAbort,
    TuneConfig,
    bootstrap_overfit_start,
    overfit_start_epoch,
    trace_to_csv,
    tune_loss,
    write_trace,
)


def cube(lo, hi):
    return Hypercube(np.asarray(lo, float), np.asarray(hi, float))


def simple_obs(ve, fv):
    return Observation(ve=ve, fv=np.asarray(fv, dtype=float))


class TestOverfitStartEpoch:
    def test_first_increase(self):
        assert overfit_start_epoch([1.0, 0.8, 0.9]) == 3

    def test_monotone_curve_returns_length(self):
        assert overfit_start_epoch([1.0, 0.9, 0.8]) == 3

    def test_immediate_increase(self):
        assert overfit_start_epoch([0.5, 0.6]) == 2

    def test_single_point(self):
        assert overfit_start_epoch([0.4]) == 1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            overfit_start_epoch([])


class TestLoopMechanics:
    def test_identity_trainer_single_iteration(self):
        initial = [simple_obs(0.5, [1.0, 2.0])]

        def identity(loss, model):
            return model, initial[0]

        trace = tune_loss(initial, "model-0", identity,
                          TuneConfig(feasible=cube([0, 0], [1, 1]),
                                     max_iterations=1, use_gradients=False,
                                     epsilon=0.0))
        assert len(trace.records) == 1
        assert len(trace.observations) == 2
        assert trace.observations[1].ve == 0.5
        assert trace.final_model == "model-0"

    def test_dataset_grows_by_one_per_iteration(self):
        initial = [simple_obs(0.5, [1.0, 2.0]), simple_obs(0.6, [2.0, 1.0])]
        counter = {"i": 0}

        def trainer(loss, model):
            counter["i"] += 1
            return model, simple_obs(0.5 / counter["i"], [1.0, 1.0])

        trace = tune_loss(initial, None, trainer,
                          TuneConfig(feasible=cube([0, 0], [1, 1]),
                                     max_iterations=5, use_gradients=False,
                                     epsilon=0.0))
        assert len(trace.observations) == 2 + 5
        assert [r.iteration for r in trace.records] == [1, 2, 3, 4, 5]

    def test_warm_start_chain_passes_previous_model(self):
        initial = [simple_obs(0.5, [1.0])]
        seen = []

        def trainer(loss, model):
            seen.append(model)
            return model + 1, simple_obs(0.4, [1.0])

        tune_loss(initial, 10, trainer,
                  TuneConfig(feasible=cube([0], [1]), max_iterations=3,
                             use_gradients=False, epsilon=0.0))
        assert seen == [10, 11, 12]

    def test_trainer_exhaustion_stops_early(self):
        initial = [simple_obs(0.5, [1.0])]
        calls = {"n": 0}

        def trainer(loss, model):
            calls["n"] += 1
            if calls["n"] > 2:
                return None
            return model, simple_obs(0.4, [1.0])

        trace = tune_loss(initial, None, trainer,
                          TuneConfig(feasible=cube([0], [1]), max_iterations=9,
                                     use_gradients=False, epsilon=0.0))
        assert len(trace.records) == 2

    def test_abort_carries_partial_trace(self):
        initial = [simple_obs(0.5, [1.0])]
        calls = {"n": 0}

        def trainer(loss, model):
            calls["n"] += 1
            if calls["n"] == 2:
                raise RuntimeError("diverged")
            return model, simple_obs(0.4, [1.0])

        with pytest.raises(TuneAbort) as err:
            tune_loss(initial, None, trainer,
                      TuneConfig(feasible=cube([0], [1]), max_iterations=5,
                                 use_gradients=False, epsilon=0.0))
        assert len(err.value.trace.records) == 1
        assert "iteration 2" in str(err.value)

    def test_auto_epsilon_requires_gradients(self):
        initial = [simple_obs(0.5, [1.0])]

        def trainer(loss, model):
            return model, simple_obs(0.4, [1.0])

        with pytest.raises(TuneAbort, match="gradients"):
            tune_loss(initial, None, trainer,
                      TuneConfig(feasible=cube([0], [1]), max_iterations=1,
                                 use_gradients=True, epsilon="auto"))


def make_ridge_scenario(seed, r_star=0.1):
    """Quadratic ground truth: the validation error is exactly the training
    fit plus r_star times the squared norm, so the optimal loss lives in the
    span of the two features."""
    rng = np.random.default_rng(seed)
    d, mt = 8, 12
    theta_true = rng.standard_normal(d)
    X = rng.standard_normal((mt, d))
    y = X @ theta_true + 0.6 * rng.standard_normal(mt)

    def fit_grad(theta):
        return 2.0 * X.T @ (X @ theta - y) / mt

    def observe(theta, model_id=""):
        fit = float(np.sum((X @ theta - y) ** 2)) / mt
        norm = float(theta @ theta)
        return Observation(
            ve=fit + r_star * norm,
            fv=np.array([fit, norm]),
            grad_ve=fit_grad(theta) + 2.0 * r_star * theta,
            jacobian=np.column_stack([fit_grad(theta), 2.0 * theta]),
            model_id=model_id,
        )

    def train_exact(lam):
        ratio = lam[1] / lam[0]
        return np.linalg.solve(X.T @ X / mt + ratio * np.eye(d), X.T @ y / mt)

    def bootstrap_checkpoints(steps=60, eta=0.05, collect=(5, 20, 60)):
        theta = np.zeros(d)
        cps = []
        for t in range(1, steps + 1):
            theta = theta - eta * fit_grad(theta)
            if t in collect:
                cps.append(observe(theta, f"step-{t}"))
        return theta, cps

    return observe, train_exact, bootstrap_checkpoints


class TestRidgeScenario:
    def test_three_iterations_match_grid_oracle(self):
        observe, train_exact, bootstrap = make_ridge_scenario(21)
        theta0, initial = bootstrap()
        feasible = cube([1.0, 1e-4], [1.0, 10.0])  # fit coefficient pinned

        def trainer(loss, model):
            theta = train_exact(loss.lam)
            return theta, observe(theta)

        trace = tune_loss(initial, theta0, trainer,
                          TuneConfig(feasible=feasible, max_iterations=3,
                                     epsilon="auto", use_gradients=True))
        grid_best = min(
            observe(train_exact(np.array([1.0, r]))).ve
            for r in np.geomspace(1e-4, 10.0, 25)
        )
        assert trace.best_ve <= grid_best + 1e-12
        # the planted coefficient is recovered almost exactly
        assert trace.records[-1].lam[1] == pytest.approx(0.1, rel=1e-4)


def overfit_prone_data(seed):
    """More parameters than training examples, with label noise."""
    rng = np.random.default_rng(seed)
    d, C = 24, 3
    centers = rng.standard_normal((C, d)) * 0.8
    def sample(m, split):
        labels = rng.integers(0, C, m)
        X = centers[labels] + rng.standard_normal((m, d))
        flip = rng.random(m) < 0.15
        labels = np.where(flip, rng.integers(0, C, m), labels)
        return Dataset(X=X, y=labels, split=split)
    return sample(30, "train"), sample(200, "validation")


class TestOnlineMode:
    def test_online_tuning_beats_unregularized_best_epoch(self):
        train, val = overfit_prone_data(33)
        spec = SoftmaxSpec(train.num_features, 3)
        fs = standard_regularizer_features(spec, train,
                                           include=("l1", "l2sq", "logloss"))
        base_loss = LinearLoss(np.array([0.0, 0.0, 1.0]), fs.names)
        total_epochs = 40

        # unregularized baseline: same seed, same epoch budget
        state = init_state(spec, seed=1)
        baseline_curve = []
        for _ in range(total_epochs):
            state, obs = train_with_warm_start(base_loss, fs, state, val,
                                               epochs=1)
            baseline_curve.append(obs.ve)

        # online tuning takes over once validation first worsens
        start = init_state(spec, seed=1)
        warmup_obs, warm_state, curve = bootstrap_overfit_start(
            base_loss, fs, start, val, max_epochs=total_epochs)
        assert len(curve) < total_epochs  # this problem does overfit quickly

        feasible = cube([0.0, 0.0, 1.0], [5.0, 5.0, 1.0])

        def online_trainer(loss, model):
            return train_with_warm_start(loss, fs, model, val, epochs=1,
                                         with_gradients=True)

        trace = tune_loss(
            warmup_obs, warm_state, online_trainer,
            TuneConfig(feasible=feasible,
                       max_iterations=total_epochs - len(curve),
                       mode="online", epsilon="auto", use_gradients=True),
        )
        final_ve = trace.records[-1].ve
        assert final_ve <= min(baseline_curve) + 1e-12

    def test_reproducible_trace(self):
        train, val = overfit_prone_data(7)
        spec = SoftmaxSpec(train.num_features, 3)
        fs = standard_regularizer_features(spec, train,
                                           include=("l2sq", "logloss"))
        base_loss = LinearLoss(np.array([0.0, 1.0]), fs.names)

        def run():
            start = init_state(spec, seed=5)
            obs0, warm, _ = bootstrap_overfit_start(base_loss, fs, start, val,
                                                    max_epochs=8)
            def handle(loss, model):
                return train_with_warm_start(loss, fs, model, val, epochs=1,
                                             with_gradients=True)
            return tune_loss(obs0, warm, handle,
                             TuneConfig(feasible=cube([0, 1], [5, 1]),
                                        max_iterations=4, mode="online",
                                        epsilon="auto"))

        t1, t2 = run(), run()
        assert len(t1.records) == len(t2.records)
        for a, b in zip(t1.records, t2.records):
            assert np.array_equal(a.lam, b.lam)
            assert a.ve == b.ve
            assert a.train_loss == b.train_loss


class TestTraceSerialization:
    def test_csv_layout_and_sidecar(self, tmp_path):
        initial = [simple_obs(0.5, [1.0, 2.0])]

        def trainer(loss, model):
            return model, simple_obs(0.4, [1.0, 1.0])

        config = TuneConfig(feasible=cube([0, 0], [1, 1]), max_iterations=2,
                            use_gradients=False, epsilon=0.0, seed=9)
        trace = tune_loss(initial, None, trainer, config)
        text = trace_to_csv(trace)
        lines = text.strip().split("\n")
        assert lines[0] == "iteration,ve,train_loss,lambda_0,lambda_1,wall_ms"
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[0] == "1"
        assert float(first[1]) == 0.4

        path = tmp_path / "trace.csv"
        write_trace(trace, config, path)
        assert path.exists()
        sidecar = tmp_path / "trace.json"
        assert sidecar.exists()
        assert '"seed": 9' in sidecar.read_text()
