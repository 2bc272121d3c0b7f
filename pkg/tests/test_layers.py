import numpy as np
import pytest

from taxelkit.learn import gradient_check
from taxelkit.learn.layers import (
    Conv1D,
    Dense,
    LSTMLayer,
    MaxPool1D,
    ReLU,
    softmax,
    softmax_cross_entropy,
)

TOL = 1e-4


def check_layer(layer, x, seed=0):
    """Finite-difference check over every parameter and the input."""
    rng = np.random.default_rng(seed)
    # fixed random projection turns the output into a scalar loss
    probe = None

    def loss():
        nonlocal probe
        out = layer.forward(x)
        if probe is None:
            probe = rng.normal(size=out.shape)
        loss_val = float((out * probe).sum())
        dx = layer.backward(probe)
        grads = [g.copy() for g in layer.grads()]
        return loss_val, grads + [dx]

    arrays = list(layer.params()) + [x]
    return gradient_check(loss, arrays)


class TestDense:
    def test_gradients(self):
        rng = np.random.default_rng(0)
        layer = Dense(4, 5, rng)
        x = rng.normal(size=(3, 4))
        assert check_layer(layer, x) < TOL

    def test_ten_seeds(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            layer = Dense(5, 4, rng)
            x = rng.normal(size=(2, 5))
            assert check_layer(layer, x, seed) < TOL


class TestReLU:
    def test_gradient_away_from_kink(self):
        rng = np.random.default_rng(1)
        layer = ReLU()
        x = rng.normal(size=(4, 6))
        x[np.abs(x) < 0.1] = 0.5  # keep all pre-activations off the kink
        assert check_layer(layer, x) < TOL

    def test_forward_clamps(self):
        layer = ReLU()
        out = layer.forward(np.array([[-1.0, 0.0, 2.0]]))
        np.testing.assert_array_equal(out, [[0.0, 0.0, 2.0]])


class TestConv1D:
    def test_impulse_reproduces_kernel(self):
        rng = np.random.default_rng(2)
        layer = Conv1D(1, 1, 5, rng)
        layer.b[:] = 0.0
        x = np.zeros((1, 20, 1))
        x[0, 10, 0] = 1.0
        out = layer.forward(x)
        np.testing.assert_allclose(out[0, 6:11, 0], layer.K[:, 0, 0])

    def test_matches_nested_loop_oracle(self):
        rng = np.random.default_rng(3)
        layer = Conv1D(2, 3, 5, rng)
        x = rng.normal(size=(2, 15, 2))
        out = layer.forward(x)
        width = 5
        expected = np.zeros_like(out)
        for b in range(2):
            for i in range(15 - width + 1):
                for oc in range(3):
                    acc = layer.b[oc]
                    for j in range(width):
                        for ic in range(2):
                            acc += layer.K[j, ic, oc] * x[b, i + width - 1 - j, ic]
                    expected[b, i, oc] = acc
        np.testing.assert_allclose(out, expected)

    def test_gradients(self):
        rng = np.random.default_rng(4)
        layer = Conv1D(2, 2, 3, rng)
        x = rng.normal(size=(2, 8, 2))
        assert check_layer(layer, x) < TOL

    def test_too_short_input(self):
        rng = np.random.default_rng(5)
        layer = Conv1D(1, 1, 5, rng)
        with pytest.raises(ValueError):
            layer.forward(np.zeros((1, 3, 1)))


class TestMaxPool:
    def test_forward_oracle(self):
        layer = MaxPool1D(2)
        x = np.array([[[1.0], [3.0], [2.0], [0.0], [5.0]]])  # odd tail dropped
        out = layer.forward(x)
        np.testing.assert_array_equal(out, [[[3.0], [2.0]]])

    def test_conv_pool_stack_matches_loops(self):
        rng = np.random.default_rng(6)
        conv = Conv1D(1, 2, 5, rng)
        pool = MaxPool1D(2)
        x = rng.normal(size=(1, 150, 1))
        out = pool.forward(conv.forward(x))
        width = 5
        conv_ref = np.zeros((1, 146, 2))
        for i in range(146):
            for oc in range(2):
                acc = conv.b[oc]
                for j in range(width):
                    acc += conv.K[j, 0, oc] * x[0, i + width - 1 - j, 0]
                conv_ref[0, i, oc] = acc
        pool_ref = np.zeros((1, 73, 2))
        for i in range(73):
            for oc in range(2):
                pool_ref[0, i, oc] = max(conv_ref[0, 2 * i, oc], conv_ref[0, 2 * i + 1, oc])
        np.testing.assert_allclose(out, pool_ref)

    def test_gradients(self):
        rng = np.random.default_rng(7)
        layer = MaxPool1D(2)
        x = rng.normal(size=(2, 9, 3))
        assert check_layer(layer, x) < TOL


class TestLSTM:
    def test_cell_gradients_ten_seeds(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            layer = LSTMLayer(2, 4, rng)
            x = rng.normal(size=(2, 5, 2))
            assert check_layer(layer, x, seed) < TOL

    def test_final_state_shape(self):
        rng = np.random.default_rng(8)
        layer = LSTMLayer(1, 6, rng)
        out = layer.forward(rng.normal(size=(3, 11, 1)))
        assert out.shape == (3, 6)


class TestSoftmaxCE:
    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(9)
        probs = softmax(rng.normal(size=(40, 6)) * 10)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
        assert probs.min() >= 0.0

    def test_loss_non_negative(self):
        rng = np.random.default_rng(10)
        logits = rng.normal(size=(30, 6))
        labels = rng.integers(0, 6, 30)
        loss, _ = softmax_cross_entropy(logits, labels)
        assert loss >= 0.0

    def test_gradient_closed_form(self):
        # analytic gradient is (p - onehot)/batch
        rng = np.random.default_rng(11)
        logits = rng.normal(size=(7, 6))
        labels = rng.integers(0, 6, 7)
        _, dlogits = softmax_cross_entropy(logits, labels)
        probs = softmax(logits)
        onehot = np.zeros_like(probs)
        onehot[np.arange(7), labels] = 1.0
        np.testing.assert_allclose(dlogits, (probs - onehot) / 7)

    def test_identity_logits_one_hot(self):
        # confident correct logits: gradient on the true class goes to ~0
        logits = np.zeros((1, 6))
        logits[0, 2] = 30.0
        loss, dlogits = softmax_cross_entropy(logits, np.array([2]))
        assert loss < 1e-9
        assert np.abs(dlogits).max() < 1e-9

    def test_finite_difference(self):
        rng = np.random.default_rng(12)
        logits = rng.normal(size=(3, 6))
        labels = rng.integers(0, 6, 3)

        def loss():
            l, d = softmax_cross_entropy(logits, labels)
            return l, [d]

        assert gradient_check(loss, [logits]) < TOL


class TestFullNetworks:
    def test_mlp_loss_gradients(self):
        from taxelkit.learn import MLPConfig, MLPNet

        rng = np.random.default_rng(13)
        net = MLPNet(MLPConfig(input_dim=5, hidden_dims=(4, 4, 3)), rng)
        x = rng.normal(size=(3, 5))
        y = rng.integers(0, 6, 3)

        def loss():
            val = net.loss_and_grads(x, y)
            return val, [g.copy() for g in net.grads()]

        assert gradient_check(loss, net.params()) < TOL

    def test_cnn_loss_gradients(self):
        from taxelkit.learn import CNN1DConfig, CNN1DNet

        rng = np.random.default_rng(14)
        net = CNN1DNet(
            CNN1DConfig(input_len=24, channels=(2, 3), dense_dim=5), rng
        )
        x = rng.normal(size=(2, 24, 1))
        y = rng.integers(0, 6, 2)

        def loss():
            val = net.loss_and_grads(x, y)
            return val, [g.copy() for g in net.grads()]

        assert gradient_check(loss, net.params()) < TOL
