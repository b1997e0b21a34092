"""Small layer building blocks on top of the tensor engine."""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .tensor import Tensor


def kaiming_normal(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    std = np.sqrt(2.0 / fan_in)
    return rng.normal(0.0, std, size=(fan_in, fan_out)).astype(np.float32)


def normal_init(rng: np.random.Generator, shape, std: float = 0.02) -> np.ndarray:
    return rng.normal(0.0, std, size=shape).astype(np.float32)


class Linear:
    def __init__(self, rng: np.random.Generator, in_dim: int, out_dim: int,
                 name: str = "linear", init_std: float | None = None):
        if init_std is None:
            w = kaiming_normal(rng, in_dim, out_dim)
        else:
            w = normal_init(rng, (in_dim, out_dim), init_std)
        self.w = Tensor(w, requires_grad=True, name=f"{name}.w")
        self.b = Tensor(np.zeros(out_dim, np.float32), requires_grad=True, name=f"{name}.b")

    def __call__(self, x: Tensor) -> Tensor:
        return T.matmul(x, self.w) + self.b

    def params(self) -> list[Tensor]:
        return [self.w, self.b]


class BatchNorm:
    """1D batch norm over the leading axis; running buffers are plain arrays."""

    def __init__(self, dim: int, name: str = "bn", momentum: float = 0.1, eps: float = 1e-5):
        self.gamma = Tensor(np.ones(dim, np.float32), requires_grad=True, name=f"{name}.gamma")
        self.beta = Tensor(np.zeros(dim, np.float32), requires_grad=True, name=f"{name}.beta")
        self.running_mean = np.zeros(dim, np.float32)
        self.running_var = np.ones(dim, np.float32)
        self.momentum = momentum
        self.eps = eps
        self.name = name

    def __call__(self, x: Tensor, training: bool) -> Tensor:
        return T.batch_norm(x, self.gamma, self.beta, self.running_mean, self.running_var,
                            training, self.momentum, self.eps)

    def params(self) -> list[Tensor]:
        return [self.gamma, self.beta]

    def buffers(self) -> dict[str, np.ndarray]:
        return {f"{self.name}.running_mean": self.running_mean,
                f"{self.name}.running_var": self.running_var}


class LayerNorm:
    def __init__(self, dim: int, name: str = "ln", eps: float = 1e-5):
        self.gamma = Tensor(np.ones(dim, np.float32), requires_grad=True, name=f"{name}.gamma")
        self.beta = Tensor(np.zeros(dim, np.float32), requires_grad=True, name=f"{name}.beta")
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return T.layer_norm(x, self.gamma, self.beta, self.eps)

    def params(self) -> list[Tensor]:
        return [self.gamma, self.beta]
