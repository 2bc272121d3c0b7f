import numpy as np
import pytest

from taxelkit.learn import (
    DivergenceError,
    LSTMConfig,
    MLPConfig,
    train_lstm,
    train_mlp,
)


def two_blobs(n_per=40, dim=8, gap=6.0, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, 1.0, (n_per, dim))
    b = rng.normal(gap, 1.0, (n_per, dim))
    X = np.vstack([a, b])
    y = np.array([0] * n_per + [1] * n_per)
    return X, y


class TestMLPTraining:
    def test_separable_blobs_reach_full_train_accuracy(self):
        X, y = two_blobs()
        config = MLPConfig(
            input_dim=8, hidden_dims=(16, 8, 8), learning_rate=0.01,
            max_epochs=50, patience=50, seed=0,
        )
        model = train_mlp(X, y, config, val=(X, y))
        preds = model.predict(X)
        assert (preds == y).mean() == 1.0
        assert len(model.history.train_acc) <= 50

    def test_fixed_seed_is_bit_identical(self):
        X, y = two_blobs(n_per=25)
        config = MLPConfig(
            input_dim=8, hidden_dims=(8, 8, 4), learning_rate=0.005,
            max_epochs=10, patience=10, seed=7,
        )
        m1 = train_mlp(X, y, config)
        m2 = train_mlp(X, y, config)
        for p1, p2 in zip(m1.net.params(), m2.net.params()):
            np.testing.assert_array_equal(p1, p2)
        assert m1.history.val_acc == m2.history.val_acc

    def test_divergence_reports_epoch(self):
        # an absurd learning rate blows the weights past float range after
        # one step; the next forward pass produces a non-finite loss
        X, y = two_blobs(n_per=15)
        config = MLPConfig(
            input_dim=8, hidden_dims=(8, 8, 4), learning_rate=1e305,
            max_epochs=5, patience=5, seed=0,
        )
        with pytest.raises(DivergenceError) as err:
            with np.errstate(all="ignore"):
                train_mlp(X, y, config)
        assert err.value.epoch >= 0

    def test_best_epoch_parameters_restored(self):
        X, y = two_blobs(n_per=30)
        config = MLPConfig(
            input_dim=8, hidden_dims=(8, 8, 4), learning_rate=0.01,
            max_epochs=30, patience=30, seed=1,
        )
        model = train_mlp(X, y, config)
        h = model.history
        # reported best epoch holds the max validation accuracy
        assert h.val_acc[h.best_epoch] == max(h.val_acc)

    def test_needs_two_classes(self):
        X = np.zeros((10, 4))
        y = np.zeros(10, dtype=int)
        with pytest.raises(ValueError):
            train_mlp(X, y, MLPConfig(input_dim=4, hidden_dims=(4, 4, 4)))

    def test_config_invariants(self):
        with pytest.raises(ValueError):
            MLPConfig(output_dim=5)
        with pytest.raises(ValueError):
            MLPConfig(hidden_dims=(10, 10))

    def test_probabilities_sum_to_one(self):
        X, y = two_blobs(n_per=20)
        config = MLPConfig(
            input_dim=8, hidden_dims=(8, 8, 4), max_epochs=3, patience=3, seed=0
        )
        model = train_mlp(X, y, config)
        probs = model.predict_proba(X)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)


class TestLSTMTraining:
    def test_constant_vs_oscillating(self):
        rng = np.random.default_rng(0)
        steps, n_per = 30, 30
        t = np.arange(steps)
        const = rng.uniform(0.5, 1.5, (n_per, 1)) * np.ones((1, steps))
        osc = rng.uniform(0.5, 1.5, (n_per, 1)) * np.sin(2 * np.pi * 0.2 * t)[None, :]
        X = np.vstack([const, osc]) + rng.normal(0, 0.05, (2 * n_per, steps))
        y = np.array([0] * n_per + [1] * n_per)
        config = LSTMConfig(
            input_len=steps, hidden_size=12, learning_rate=0.02,
            max_epochs=40, patience=40, batch_size=16, seed=0,
        )
        model = train_lstm(X, y, config)
        assert (model.predict(X) == y).mean() >= 0.95
