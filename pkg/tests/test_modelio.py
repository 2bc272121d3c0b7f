import numpy as np
import pytest

from taxelkit.learn import (
    CNN1DConfig,
    LSTMConfig,
    MLPConfig,
    RFConfig,
    load_model,
    save_model,
    train_cnn1d,
    train_lstm,
    train_mlp,
    train_rf,
)
from taxelkit.pipeline import FeatureKind


def toy_data(dim=12, seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 1, (20, dim)), rng.normal(4, 1, (20, dim))])
    y = np.array([0] * 20 + [1] * 20)
    return X, y


def assert_round_trip(model, X, tmp_path):
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.kind == model.kind
    assert loaded.feature_kind == model.feature_kind
    np.testing.assert_array_equal(loaded.predict(X), model.predict(X))
    np.testing.assert_array_equal(loaded.predict_proba(X), model.predict_proba(X))
    # a round-tripped model re-saves byte-identically
    path2 = tmp_path / "model2.json"
    save_model(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


class TestModelIO:
    def test_mlp(self, tmp_path):
        X, y = toy_data()
        model = train_mlp(
            X, y,
            MLPConfig(input_dim=12, hidden_dims=(8, 8, 4), max_epochs=4, patience=4),
            feature_kind=FeatureKind.ACTIVATED_COUNT,
        )
        assert_round_trip(model, X, tmp_path)

    def test_cnn(self, tmp_path):
        X, y = toy_data(dim=24)
        model = train_cnn1d(
            X, y,
            CNN1DConfig(input_len=24, channels=(2, 3), dense_dim=4, max_epochs=2, patience=2),
            feature_kind=FeatureKind.MAX_TAXEL_TRACE,
        )
        assert_round_trip(model, X, tmp_path)

    def test_lstm(self, tmp_path):
        X, y = toy_data(dim=10)
        model = train_lstm(
            X, y,
            LSTMConfig(input_len=10, hidden_size=5, max_epochs=2, patience=2),
            feature_kind=FeatureKind.ACTIVATED_COUNT,
        )
        assert_round_trip(model, X, tmp_path)

    def test_rf(self, tmp_path):
        X, y = toy_data()
        model = train_rf(X, y, RFConfig(n_estimators=7, seed=3), FeatureKind.TAXEL_STD)
        assert_round_trip(model, X, tmp_path)

    def test_history_preserved(self, tmp_path):
        X, y = toy_data()
        model = train_mlp(
            X, y, MLPConfig(input_dim=12, hidden_dims=(8, 8, 4), max_epochs=3, patience=3)
        )
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.history.val_acc == model.history.val_acc
        assert loaded.history.best_epoch == model.history.best_epoch

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text('{"format": "something-else"}')
        with pytest.raises(ValueError):
            load_model(path)
