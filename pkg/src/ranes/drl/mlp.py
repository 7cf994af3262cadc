"""Dense / 1-D convolutional layers with manual backprop, plus Adam.

Everything is float64 numpy. Analytic gradients are verified against
central finite differences by backprop_check, which guards every trainer
built on top of this module.
"""

from __future__ import annotations

import numpy as np

RELU = "relu"
LINEAR = "linear"


def _he_init(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_out, fan_in))


class Dense:
    """Affine layer y = x @ W.T + b with optional ReLU."""

    def __init__(self, n_in: int, n_out: int, activation: str, rng: np.random.Generator):
        self.W = _he_init(rng, n_in, n_out)
        self.b = np.zeros(n_out)
        if activation not in (RELU, LINEAR):
            raise ValueError(f"unknown activation {activation!r}")
        self.activation = activation

    def parameters(self) -> list[np.ndarray]:
        return [self.W, self.b]

    def forward(self, x: np.ndarray):
        z = x @ self.W.T + self.b
        y = np.maximum(z, 0.0) if self.activation == RELU else z
        return y, (x, z)

    def backward(self, cache, grad_y: np.ndarray):
        x, z = cache
        grad_z = grad_y * (z > 0.0) if self.activation == RELU else grad_y
        grad_w = grad_z.T @ x
        grad_b = grad_z.sum(axis=0)
        grad_x = grad_z @ self.W
        return [grad_w, grad_b], grad_x


class Conv1d:
    """Width-k, stride-1, single-input-channel convolution with ReLU.

    Input (B, L) -> flattened (B, (L - k + 1) * filters), matching the
    cell-major state layout so the kernel slides across adjacent features.
    """

    def __init__(self, kernel: int, filters: int, rng: np.random.Generator):
        self.W = _he_init(rng, kernel, filters)
        self.b = np.zeros(filters)
        self.kernel = kernel
        self.filters = filters

    def out_dim(self, n_in: int) -> int:
        return (n_in - self.kernel + 1) * self.filters

    def parameters(self) -> list[np.ndarray]:
        return [self.W, self.b]

    def forward(self, x: np.ndarray):
        windows = np.lib.stride_tricks.sliding_window_view(x, self.kernel, axis=1)
        z = windows @ self.W.T + self.b          # (B, L', F)
        y = np.maximum(z, 0.0)
        batch = x.shape[0]
        return y.reshape(batch, -1), (x, windows, z)

    def backward(self, cache, grad_y: np.ndarray):
        x, windows, z = cache
        grad_z = grad_y.reshape(z.shape) * (z > 0.0)
        grad_w = np.einsum("blf,blk->fk", grad_z, windows)
        grad_b = grad_z.sum(axis=(0, 1))
        grad_x = np.zeros_like(x)
        span = z.shape[1]
        for j in range(self.kernel):
            grad_x[:, j : j + span] += grad_z @ self.W[:, j]
        return [grad_w, grad_b], grad_x


class Mlp:
    """Stack of dense layers: ReLU hidden, configurable output activation."""

    def __init__(
        self,
        sizes: list[int],
        rng: np.random.Generator,
        output_activation: str = LINEAR,
    ):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = list(sizes)
        self.layers = [
            Dense(sizes[i], sizes[i + 1],
                  RELU if i < len(sizes) - 2 else output_activation, rng)
            for i in range(len(sizes) - 1)
        ]

    @property
    def n_in(self) -> int:
        return self.sizes[0]

    @property
    def n_out(self) -> int:
        return self.sizes[-1]

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.parameters()]

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.forward_cache(x)[0]

    def forward_cache(self, x: np.ndarray):
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x)
            caches.append(cache)
        return x, caches

    def backward(self, caches, grad_out: np.ndarray):
        """Parameter gradients (same order as parameters()) and input gradient."""
        grads: list[np.ndarray] = []
        grad = grad_out
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            layer_grads, grad = layer.backward(cache, grad)
            grads = layer_grads + grads
        return grads, grad


class Adam:
    """Adam over a fixed list of parameter arrays, updated in place."""

    def __init__(self, params: list[np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise ValueError("gradient list does not match parameter list")
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m += (1.0 - self.beta1) * (g - m)
            v += (1.0 - self.beta2) * (g * g - v)
            p -= self.lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


def backprop_check(
    net: Mlp,
    rng: np.random.Generator,
    batch: int = 4,
    step: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-FD gradients.

    The probe loss is a fixed random linear functional of the outputs so
    its output-side gradient is exact; errors are relative to
    max(|analytic|, |numeric|, 1e-2).
    """
    x = rng.normal(size=(batch, net.n_in))
    coeffs = rng.normal(size=net.n_out)

    out, caches = net.forward_cache(x)
    grad_out = np.tile(coeffs, (batch, 1))
    analytic, _ = net.backward(caches, grad_out)

    worst = 0.0
    for param, grad in zip(net.parameters(), analytic):
        flat = param.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            hi = float(np.sum(net.forward(x) * coeffs))
            flat[i] = original - step
            lo = float(np.sum(net.forward(x) * coeffs))
            flat[i] = original
            numeric = (hi - lo) / (2.0 * step)
            a = grad.reshape(-1)[i]
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-2)
            worst = max(worst, err)
    return worst
