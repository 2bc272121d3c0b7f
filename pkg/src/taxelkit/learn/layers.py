"""Neural-network layers with hand-written forward/backward passes.

All math is float64 numpy.  Each layer exposes params()/grads() as aligned
lists of arrays so the optimizer and the finite-difference checker can walk
them generically.  backward() consumes the gradient w.r.t. the layer output
and returns the gradient w.r.t. its input, accumulating parameter grads.
"""

from __future__ import annotations

import numpy as np


def _uniform_init(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    limit = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Dense:
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.W = _uniform_init(rng, (in_dim, out_dim), in_dim)
        self.b = np.zeros(out_dim)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)
        self._x = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return x @ self.W + self.b

    def backward(self, grad: np.ndarray) -> np.ndarray:
        self.dW[...] = self._x.T @ grad
        self.db[...] = grad.sum(axis=0)
        return grad @ self.W.T

    def params(self):
        return [self.W, self.b]

    def grads(self):
        return [self.dW, self.db]


class ReLU:
    def __init__(self):
        self._mask = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return np.where(self._mask, grad, 0.0)

    def params(self):
        return []

    def grads(self):
        return []


class Conv1D:
    """Valid 1-D convolution over (batch, length, channels) inputs.

    True convolution: a unit impulse reproduces the kernel in the output.
    Kernel shape is (width, in_channels, out_channels).
    """

    def __init__(self, in_channels: int, out_channels: int, width: int, rng: np.random.Generator):
        fan_in = width * in_channels
        self.K = _uniform_init(rng, (width, in_channels, out_channels), fan_in)
        self.b = np.zeros(out_channels)
        self.dK = np.zeros_like(self.K)
        self.db = np.zeros_like(self.b)
        self._x = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        batch, length, _ = x.shape
        width = self.K.shape[0]
        out_len = length - width + 1
        if out_len < 1:
            raise ValueError(f"input length {length} shorter than kernel width {width}")
        out = np.zeros((batch, out_len, self.K.shape[2]))
        for j in range(width):
            out += x[:, width - 1 - j : width - 1 - j + out_len, :] @ self.K[j]
        return out + self.b

    def backward(self, grad: np.ndarray) -> np.ndarray:
        x = self._x
        width = self.K.shape[0]
        out_len = grad.shape[1]
        self.dK[...] = 0.0
        dx = np.zeros_like(x)
        for j in range(width):
            sl = slice(width - 1 - j, width - 1 - j + out_len)
            self.dK[j] = np.tensordot(x[:, sl, :], grad, axes=([0, 1], [0, 1]))
            dx[:, sl, :] += grad @ self.K[j].T
        self.db[...] = grad.sum(axis=(0, 1))
        return dx

    def params(self):
        return [self.K, self.b]

    def grads(self):
        return [self.dK, self.db]


class MaxPool1D:
    """Non-overlapping max pooling along the length axis; trailing remainder dropped."""

    def __init__(self, width: int = 2):
        self.width = width
        self._argmax = None
        self._in_shape = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        batch, length, channels = x.shape
        out_len = length // self.width
        self._in_shape = x.shape
        windows = x[:, : out_len * self.width, :].reshape(batch, out_len, self.width, channels)
        self._argmax = windows.argmax(axis=2)
        return windows.max(axis=2)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        batch, out_len, channels = grad.shape
        dwin = np.zeros((batch, out_len, self.width, channels))
        np.put_along_axis(dwin, self._argmax[:, :, None, :], grad[:, :, None, :], axis=2)
        dx = np.zeros(self._in_shape)
        dx[:, : out_len * self.width, :] = dwin.reshape(batch, out_len * self.width, channels)
        return dx

    def params(self):
        return []

    def grads(self):
        return []


class Flatten:
    def __init__(self):
        self._in_shape = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad.reshape(self._in_shape)

    def params(self):
        return []

    def grads(self):
        return []


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class LSTMLayer:
    """Single recurrent layer over (batch, steps, features); returns the final hidden state.

    Gate weights are packed [input, forget, cell, output] along the last axis.
    The forget-gate bias starts at 1 so early training does not wash out state.
    """

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator):
        self.hidden = hidden
        self.Wx = _uniform_init(rng, (in_dim, 4 * hidden), in_dim)
        self.Wh = _uniform_init(rng, (hidden, 4 * hidden), hidden)
        self.b = np.zeros(4 * hidden)
        self.b[hidden : 2 * hidden] = 1.0
        self.dWx = np.zeros_like(self.Wx)
        self.dWh = np.zeros_like(self.Wh)
        self.db = np.zeros_like(self.b)
        self._cache = None

    def step(self, x_t: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray):
        """One cell update; returns (h, c, cache) for backprop."""
        H = self.hidden
        z = x_t @ self.Wx + h_prev @ self.Wh + self.b
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H : 2 * H])
        g = np.tanh(z[:, 2 * H : 3 * H])
        o = _sigmoid(z[:, 3 * H :])
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        return h, c, (x_t, h_prev, c_prev, i, f, g, o, tc)

    def step_backward(self, cache, dh, dc):
        """Backprop one cell step; returns (dx_t, dh_prev, dc_prev) and accumulates grads."""
        x_t, h_prev, c_prev, i, f, g, o, tc = cache
        H = self.hidden
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dc_prev = dc * f
        dz = np.concatenate(
            [di * i * (1 - i), df * f * (1 - f), dg * (1 - g * g), do * o * (1 - o)],
            axis=1,
        )
        self.dWx += x_t.T @ dz
        self.dWh += h_prev.T @ dz
        self.db += dz.sum(axis=0)
        return dz @ self.Wx.T, dz @ self.Wh.T, dc_prev

    def forward(self, x: np.ndarray) -> np.ndarray:
        batch, steps, _ = x.shape
        h = np.zeros((batch, self.hidden))
        c = np.zeros((batch, self.hidden))
        caches = []
        for t in range(steps):
            h, c, cache = self.step(x[:, t, :], h, c)
            caches.append(cache)
        self._cache = (x.shape, caches)
        return h

    def backward(self, grad: np.ndarray) -> np.ndarray:
        in_shape, caches = self._cache
        self.dWx[...] = 0.0
        self.dWh[...] = 0.0
        self.db[...] = 0.0
        dx = np.zeros(in_shape)
        dh = grad
        dc = np.zeros_like(grad)
        for t in range(len(caches) - 1, -1, -1):
            dx_t, dh, dc = self.step_backward(caches[t], dh, dc)
            dx[:, t, :] = dx_t
        return dx

    def params(self):
        return [self.Wx, self.Wh, self.b]

    def grads(self):
        return [self.dWx, self.dWh, self.db]


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy loss and its gradient w.r.t. the logits.

    Gradient is (p - onehot) / batch, the usual closed form.
    """
    probs = softmax(logits)
    batch = logits.shape[0]
    picked = probs[np.arange(batch), labels]
    loss = float(-np.log(np.maximum(picked, 1e-300)).mean())
    dlogits = probs.copy()
    dlogits[np.arange(batch), labels] -= 1.0
    return loss, dlogits / batch
