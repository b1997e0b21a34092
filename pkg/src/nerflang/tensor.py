"""Dense float32 tensors with reverse-mode autodiff on an explicit tape.

Every differentiable op records a node on the active tape; ``backward``
replays the tape in reverse and accumulates gradients into ``Tensor.grad``.
Ops executed under ``no_grad()`` (or on tensors that don't require grad)
are not recorded.
"""

from __future__ import annotations

import contextlib

import numpy as np


class ShapeError(ValueError):
    """Raised when operand shapes violate an op's contract."""


def _f32(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float32)
    # ascontiguousarray would promote 0-d to 1-d; keep scalars 0-d
    return arr if arr.ndim == 0 else np.ascontiguousarray(arr)


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = _f32(data)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        if self.requires_grad:
            self.grad = np.zeros_like(self.data)

    def accumulate_grad(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = g.astype(np.float32, copy=True)
        else:
            self.grad += g

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}{tag}, requires_grad={self.requires_grad})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return slice_(self, key)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


class Tape:
    """Ordered record of executed ops; execution order is topological."""

    def __init__(self):
        self.nodes: list[tuple[Tensor, tuple[Tensor, ...], object]] = []

    def record(self, out: Tensor, inputs: tuple[Tensor, ...], backward_fn) -> None:
        self.nodes.append((out, inputs, backward_fn))

    def __len__(self) -> int:
        return len(self.nodes)


_tape_stack: list[Tape | None] = [Tape()]


def active_tape() -> Tape | None:
    return _tape_stack[-1]


def reset_tape() -> None:
    """Discard any recorded nodes (fresh default tape)."""
    _tape_stack[-1] = Tape()


@contextlib.contextmanager
def no_grad():
    _tape_stack.append(None)
    try:
        yield
    finally:
        _tape_stack.pop()


@contextlib.contextmanager
def use_tape(tape: Tape):
    _tape_stack.append(tape)
    try:
        yield tape
    finally:
        _tape_stack.pop()


def _record(out: Tensor, inputs: tuple[Tensor, ...], backward_fn) -> Tensor:
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape.record(out, inputs, backward_fn)
    return out


def backward(loss: Tensor, tape: Tape | None = None) -> None:
    """Accumulate d(loss)/d(x) into ``x.grad`` for every tensor on the tape.

    The loss must be scalar. Tape inputs that require grad but are not on
    any path to the loss end up with zero grads. The tape is consumed.
    """
    if loss.data.ndim != 0 and loss.data.size != 1:
        raise ShapeError(f"backward requires a scalar loss, got shape {loss.data.shape}")
    tape = tape if tape is not None else active_tape()
    if tape is None:
        raise RuntimeError("backward called under no_grad")
    if not tape.nodes:
        raise RuntimeError("backward called on an empty tape")
    loss.grad = np.ones_like(loss.data)
    for out, inputs, backward_fn in reversed(tape.nodes):
        if out.grad is None:
            continue
        backward_fn(out.grad)
    for _, inputs, _ in tape.nodes:
        for t in inputs:
            if t.requires_grad and t.grad is None:
                t.grad = np.zeros_like(t.data)
    if tape is active_tape():
        reset_tape()
    else:
        tape.nodes.clear()


# ---------------------------------------------------------------------------
# broadcasting helpers


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    keep = tuple(i for i, d in enumerate(shape) if d == 1 and grad.shape[i] != 1)
    if keep:
        grad = grad.sum(axis=keep, keepdims=True)
    return grad


# ---------------------------------------------------------------------------
# elementwise / arithmetic ops


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data + b.data)

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(g, b.data.shape))

    return _record(out, (a, b), bwd)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data - b.data)

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(-g, b.data.shape))

    return _record(out, (a, b), bwd)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data * b.data)

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(g * a.data, b.data.shape))

    return _record(out, (a, b), bwd)


def neg(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(-a.data)

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(-g)

    return _record(out, (a,), bwd)


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ShapeError(f"matmul requires >=2D operands, got {a.data.shape} @ {b.data.shape}")
    if a.data.shape[-1] != b.data.shape[-2]:
        raise ShapeError(f"matmul inner dims differ: {a.data.shape} @ {b.data.shape}")
    out = Tensor(a.data @ b.data)

    def bwd(g):
        if a.requires_grad:
            ga = g @ np.swapaxes(b.data, -1, -2)
            a.accumulate_grad(_unbroadcast(ga, a.data.shape))
        if b.requires_grad:
            gb = np.swapaxes(a.data, -1, -2) @ g
            b.accumulate_grad(_unbroadcast(gb, b.data.shape))

    return _record(out, (a, b), bwd)


def relu(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(np.maximum(a.data, 0.0))

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(g * (a.data > 0.0))

    return _record(out, (a,), bwd)


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    s = 1.0 / (1.0 + np.exp(-a.data))
    out = Tensor(s)

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(g * s * (1.0 - s))

    return _record(out, (a,), bwd)


def exp(a) -> Tensor:
    a = as_tensor(a)
    e = np.exp(a.data)
    out = Tensor(e)

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(g * e)

    return _record(out, (a,), bwd)


def log(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(np.log(a.data))

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(g / a.data)

    return _record(out, (a,), bwd)


def sin(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(np.sin(a.data))

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(g * np.cos(a.data))

    return _record(out, (a,), bwd)


def cos(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(np.cos(a.data))

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(g * -np.sin(a.data))

    return _record(out, (a,), bwd)


def absval(a) -> Tensor:
    """|a| with subgradient 0 at 0 (same convention as relu)."""
    a = as_tensor(a)
    out = Tensor(np.abs(a.data))

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(g * np.sign(a.data))

    return _record(out, (a,), bwd)


# ---------------------------------------------------------------------------
# shape ops


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.data.reshape(shape))

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(g.reshape(a.data.shape))

    return _record(out, (a,), bwd)


def transpose(a, axes) -> Tensor:
    a = as_tensor(a)
    axes = tuple(axes)
    out = Tensor(np.transpose(a.data, axes))
    inv = tuple(np.argsort(axes))

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(np.transpose(g, inv))

    return _record(out, (a,), bwd)


def concat(tensors, axis: int = 0) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    out = Tensor(np.concatenate([t.data for t in ts], axis=axis))
    sizes = [t.data.shape[axis] for t in ts]
    bounds = np.cumsum([0] + sizes)

    def bwd(g):
        for t, lo, hi in zip(ts, bounds[:-1], bounds[1:]):
            if t.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(int(lo), int(hi))
                t.accumulate_grad(g[tuple(idx)])

    return _record(out, tuple(ts), bwd)


def _is_basic_index(key) -> bool:
    parts = key if isinstance(key, tuple) else (key,)
    return all(isinstance(p, (int, np.integer, slice, type(Ellipsis), type(None)))
               for p in parts)


def slice_(a, key) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.data[key])
    basic = _is_basic_index(key)

    def bwd(g):
        if a.requires_grad:
            full = np.zeros_like(a.data)
            if basic:  # basic slices never alias, += is enough (and fast)
                full[key] += g
            else:
                np.add.at(full, key, g)
            a.accumulate_grad(full)

    return _record(out, (a,), bwd)


def broadcast_to(a, shape) -> Tensor:
    a = as_tensor(a)
    out = Tensor(np.broadcast_to(a.data, shape).copy())

    def bwd(g):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g, a.data.shape))

    return _record(out, (a,), bwd)


def take_rows(table, indices) -> Tensor:
    """Gather rows of a 2D table by integer index (embedding lookup)."""
    table = as_tensor(table)
    idx = np.asarray(indices, dtype=np.int64)
    out = Tensor(table.data[idx])

    def bwd(g):
        if table.requires_grad:
            full = np.zeros_like(table.data)
            np.add.at(full, idx.reshape(-1), g.reshape(-1, table.data.shape[1]))
            table.accumulate_grad(full)

    return _record(out, (table,), bwd)


# ---------------------------------------------------------------------------
# reductions


def sum_(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.data.sum(axis=axis, keepdims=keepdims))

    def bwd(g):
        if a.requires_grad:
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            a.accumulate_grad(np.broadcast_to(g, a.data.shape).astype(np.float32))

    return _record(out, (a,), bwd)


def mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    n = a.data.size if axis is None else a.data.shape[axis]
    out = Tensor(a.data.mean(axis=axis, keepdims=keepdims))

    def bwd(g):
        if a.requires_grad:
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            a.accumulate_grad((np.broadcast_to(g, a.data.shape) / n).astype(np.float32))

    return _record(out, (a,), bwd)


def max_reduce(a, axis: int, keepdims: bool = False) -> Tensor:
    """Max along one axis; gradient routes to the first argmax (deterministic)."""
    a = as_tensor(a)
    out = Tensor(a.data.max(axis=axis, keepdims=keepdims))
    arg = a.data.argmax(axis=axis)

    def bwd(g):
        if a.requires_grad:
            if not keepdims:
                g = np.expand_dims(g, axis)
            full = np.zeros_like(a.data)
            np.put_along_axis(full, np.expand_dims(arg, axis), g, axis=axis)
            a.accumulate_grad(full)

    return _record(out, (a,), bwd)


def cumsum_exclusive(a, axis: int = -1) -> Tensor:
    """y_i = sum_{j<i} x_j along ``axis`` (y_0 = 0)."""
    a = as_tensor(a)
    inc = np.cumsum(a.data, axis=axis)
    y = np.zeros_like(a.data)
    head = [slice(None)] * a.data.ndim
    head[axis] = slice(1, None)
    tail = [slice(None)] * a.data.ndim
    tail[axis] = slice(None, -1)
    y[tuple(head)] = inc[tuple(tail)]
    out = Tensor(y)

    def bwd(g):
        if a.requires_grad:
            suffix = np.flip(np.cumsum(np.flip(g, axis=axis), axis=axis), axis=axis)
            gx = np.zeros_like(g)
            gx[tuple(tail)] = suffix[tuple(head)]
            a.accumulate_grad(gx)

    return _record(out, (a,), bwd)


def softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    z = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(s)

    def bwd(g):
        if a.requires_grad:
            dot = (g * s).sum(axis=axis, keepdims=True)
            a.accumulate_grad(s * (g - dot))

    return _record(out, (a,), bwd)


# ---------------------------------------------------------------------------
# normalization and loss ops


def batch_norm(x, gamma, beta, running_mean: np.ndarray, running_var: np.ndarray,
               training: bool, momentum: float = 0.1, eps: float = 1e-5) -> Tensor:
    """Batch normalization over the leading axis of a 2D input.

    Train mode normalizes with batch statistics and updates the running
    buffers in place (unbiased variance, like the usual framework default);
    eval mode is a pure affine map using the running buffers.
    """
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    if x.data.ndim != 2:
        raise ShapeError(f"batch_norm expects 2D input, got {x.data.shape}")
    n = x.data.shape[0]
    if training:
        if n < 2:
            raise ShapeError(f"batch_norm train mode needs batch size >= 2, got {n}")
        mu = x.data.mean(axis=0)
        var = x.data.var(axis=0)
        running_mean *= 1.0 - momentum
        running_mean += momentum * mu
        running_var *= 1.0 - momentum
        running_var += momentum * var * (n / (n - 1))
    else:
        mu = running_mean
        var = running_var
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = (x.data - mu) * inv_std
    out = Tensor(x_hat * gamma.data + beta.data)

    def bwd(g):
        if gamma.requires_grad:
            gamma.accumulate_grad((g * x_hat).sum(axis=0))
        if beta.requires_grad:
            beta.accumulate_grad(g.sum(axis=0))
        if x.requires_grad:
            if training:
                gxh = g * gamma.data
                dx = (inv_std / n) * (n * gxh - gxh.sum(axis=0)
                                      - x_hat * (gxh * x_hat).sum(axis=0))
                x.accumulate_grad(dx.astype(np.float32))
            else:
                x.accumulate_grad(g * gamma.data * inv_std)

    return _record(out, (x, gamma, beta), bwd)


def layer_norm(x, gamma, beta, eps: float = 1e-5) -> Tensor:
    """Normalization over the last axis, per position."""
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    d = x.data.shape[-1]
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = (x.data - mu) * inv_std
    out = Tensor(x_hat * gamma.data + beta.data)

    def bwd(g):
        if gamma.requires_grad:
            gamma.accumulate_grad((g * x_hat).reshape(-1, d).sum(axis=0))
        if beta.requires_grad:
            beta.accumulate_grad(g.reshape(-1, d).sum(axis=0))
        if x.requires_grad:
            gxh = g * gamma.data
            dx = (inv_std / d) * (d * gxh - gxh.sum(axis=-1, keepdims=True)
                                  - x_hat * (gxh * x_hat).sum(axis=-1, keepdims=True))
            x.accumulate_grad(dx.astype(np.float32))

    return _record(out, (x, gamma, beta), bwd)


def cross_entropy_logits(logits, targets) -> Tensor:
    """Per-row cross entropy between logits (N, V) and integer targets (N,)."""
    logits = as_tensor(logits)
    t = np.asarray(targets, dtype=np.int64)
    if logits.data.ndim != 2 or t.ndim != 1 or t.shape[0] != logits.data.shape[0]:
        raise ShapeError(f"cross_entropy_logits: logits {logits.data.shape} vs targets {t.shape}")
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    e = np.exp(z)
    probs = e / e.sum(axis=1, keepdims=True)
    rows = np.arange(t.shape[0])
    ce = -np.log(np.maximum(probs[rows, t], 1e-30))
    out = Tensor(ce)

    def bwd(g):
        if logits.requires_grad:
            d = probs.copy()
            d[rows, t] -= 1.0
            logits.accumulate_grad(d * g[:, None])

    return _record(out, (logits,), bwd)
