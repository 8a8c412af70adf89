"""Parameters, the Adam optimizer with decoupled weight decay, and EMA shadows."""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor


class Parameter:
    """A trainable tensor with Adam moment accumulators.

    The wrapped tensor requires gradients and starts with a zero grad so
    that untouched parameters report an all-zero gradient after backward.
    """

    __slots__ = ("tensor", "adam_m", "adam_v", "step_count", "name")

    def __init__(self, values, name=""):
        self.tensor = Tensor(values, requires_grad=True)
        self.tensor.grad = np.zeros(self.tensor.shape)
        self.adam_m = np.zeros(self.tensor.shape)
        self.adam_v = np.zeros(self.tensor.shape)
        self.step_count = 0
        self.name = name

    @property
    def values(self):
        return self.tensor.values

    @property
    def grad(self):
        return self.tensor.grad

    @property
    def shape(self):
        return self.tensor.shape

    def zero_grad(self):
        self.tensor.grad = np.zeros(self.tensor.shape)

    def __repr__(self):
        return f"Parameter(name={self.name!r}, shape={self.shape})"


def zero_grads(params):
    for p in params:
        p.zero_grad()


def adam_step(params, lr, weight_decay=0.0, betas=(0.9, 0.999), eps=1e-8):
    """One optimizer step over `params`.

    Decoupled weight decay is applied first (p <- p - lr * wd * p), then the
    bias-corrected Adam update using each parameter's accumulated gradient.
    """
    beta1, beta2 = betas
    for p in params:
        if weight_decay:
            p.tensor.values *= 1.0 - lr * weight_decay
        g = p.tensor.grad
        if g is None:
            g = np.zeros(p.shape)
        p.step_count += 1
        p.adam_m *= beta1
        p.adam_m += (1.0 - beta1) * g
        p.adam_v *= beta2
        p.adam_v += (1.0 - beta2) * (g * g)
        m_hat = p.adam_m / (1.0 - beta1 ** p.step_count)
        v_hat = p.adam_v / (1.0 - beta2 ** p.step_count)
        p.tensor.values -= lr * m_hat / (np.sqrt(v_hat) + eps)


class EmaShadow:
    """Exponential moving average of a tracked parameter (the target weights).

    Shadows never join the backward graph; reading them produces constant
    tensors, so no gradient can reach the target side.
    """

    __slots__ = ("values", "decay")

    def __init__(self, param, decay=0.99):
        if not 0.0 <= decay <= 1.0:
            raise ValueError("decay must lie in [0, 1]")
        self.values = param.values.copy()
        self.decay = decay

    def as_tensor(self):
        return Tensor(self.values.copy(), requires_grad=False)


def ema_update(shadow, online):
    """shadow <- decay * shadow + (1 - decay) * online."""
    d = shadow.decay
    shadow.values *= d
    shadow.values += (1.0 - d) * online.values
