"""A small tape-based reverse-mode autodiff over numpy arrays.

Operations record themselves on the active :class:`Tape`; :func:`backward`
replays the tape in reverse and fills ``.grad`` on parameter tensors::

    w = Tensor(np.ones((3, 1)), requires_grad=True)
    with Tape() as tape:
        loss = mean_all(square(matmul(x, w)))
    backward(tape, loss)
    w.grad

Constants (plain numpy arrays or floats) may be mixed with tensors in any
binary op and broadcast as numpy does; gradients are summed back to each
tensor's own shape.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

_ids = itertools.count()
_local = threading.local()


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "node_id")

    def __init__(self, value, requires_grad: bool = False):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.node_id = next(_ids)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return mul(self, -1.0)


class Tape:
    """Ordered record of operations; use as a context manager to make it active."""

    def __init__(self):
        self.records: list[tuple[Tensor, tuple, Callable]] = []

    def __enter__(self) -> "Tape":
        stack = getattr(_local, "stack", None)
        if stack is None:
            stack = _local.stack = []
        stack.append(self)
        return self

    def __exit__(self, *exc):
        _local.stack.pop()
        return False


def _active() -> Tape | None:
    stack = getattr(_local, "stack", None)
    return stack[-1] if stack else None


def _val(x) -> np.ndarray:
    return x.value if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def _record(value: np.ndarray, inputs: tuple, backward_fn: Callable) -> Tensor:
    out = Tensor(value)
    tape = _active()
    if tape is not None:
        tape.records.append((out, inputs, backward_fn))
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, size in enumerate(shape):
        if size == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


def _check_broadcast(a, b, name: str):
    try:
        np.broadcast_shapes(np.shape(_val(a)), np.shape(_val(b)))
    except ValueError:
        raise ValueError(f"{name}: shapes {np.shape(_val(a))} and {np.shape(_val(b))} "
                         "do not broadcast") from None


def add(a, b) -> Tensor:
    _check_broadcast(a, b, "add")
    va, vb = _val(a), _val(b)
    return _record(va + vb, (a, b), lambda g: (_unbroadcast(g, va.shape), _unbroadcast(g, vb.shape)))


def sub(a, b) -> Tensor:
    _check_broadcast(a, b, "sub")
    va, vb = _val(a), _val(b)
    return _record(va - vb, (a, b), lambda g: (_unbroadcast(g, va.shape), -_unbroadcast(g, vb.shape)))


def mul(a, b) -> Tensor:
    _check_broadcast(a, b, "mul")
    va, vb = _val(a), _val(b)
    return _record(va * vb, (a, b),
                   lambda g: (_unbroadcast(g * vb, va.shape), _unbroadcast(g * va, vb.shape)))


def matmul(a, b) -> Tensor:
    va, vb = _val(a), _val(b)
    if va.ndim < 2 or vb.ndim < 2 or va.shape[-1] != vb.shape[-2]:
        raise ValueError(f"matmul: incompatible shapes {va.shape} and {vb.shape}")

    def back(g):
        ga = g @ np.swapaxes(vb, -1, -2)
        gb = np.swapaxes(va, -1, -2) @ g
        return _unbroadcast(ga, va.shape), _unbroadcast(gb, vb.shape)

    return _record(va @ vb, (a, b), back)


def concat(tensors: Sequence, axis: int = -1) -> Tensor:
    vals = [_val(t) for t in tensors]
    try:
        out = np.concatenate(vals, axis=axis)
    except ValueError as exc:
        raise ValueError(f"concat: {exc}") from None
    splits = np.cumsum([v.shape[axis] for v in vals])[:-1]
    return _record(out, tuple(tensors), lambda g: tuple(np.split(g, splits, axis=axis)))


def relu(x) -> Tensor:
    v = _val(x)
    return _record(np.maximum(v, 0.0), (x,), lambda g: (g * (v > 0),))


def exp(x) -> Tensor:
    out = np.exp(_val(x))
    return _record(out, (x,), lambda g: (g * out,))


def log(x) -> Tensor:
    v = _val(x)
    return _record(np.log(v), (x,), lambda g: (g / v,))


def square(x) -> Tensor:
    v = _val(x)
    return _record(v * v, (x,), lambda g: (2.0 * g * v,))


def sum_all(x) -> Tensor:
    v = _val(x)
    return _record(np.array(v.sum()), (x,), lambda g: (np.broadcast_to(g, v.shape).copy(),))


def mean_all(x) -> Tensor:
    v = _val(x)
    return _record(np.array(v.mean()), (x,), lambda g: (np.broadcast_to(g / v.size, v.shape).copy(),))


def row_l2_normalize(x, floor: float = 1e-8) -> Tensor:
    """Divide each vector along the last axis by its L2 norm (floored)."""
    v = _val(x)
    norm = np.sqrt((v * v).sum(axis=-1, keepdims=True))
    clipped = norm < floor
    den = np.where(clipped, floor, norm)
    out = v / den

    def back(g):
        proj = (out * g).sum(axis=-1, keepdims=True)
        return (np.where(clipped, g / den, (g - out * proj) / den),)

    return _record(out, (x,), back)


def layer_normalize(x, eps: float = 1e-8) -> Tensor:
    """Zero-mean, unit-variance along the last axis."""
    v = _val(x)
    mu = v.mean(axis=-1, keepdims=True)
    c = v - mu
    sd = np.sqrt((c * c).mean(axis=-1, keepdims=True) + eps)
    out = c / sd

    def back(g):
        gm = g.mean(axis=-1, keepdims=True)
        gp = (g * out).mean(axis=-1, keepdims=True)
        return ((g - gm - out * gp) / sd,)

    return _record(out, (x,), back)


def mask_rows(x, mask) -> Tensor:
    """Multiply row ``i`` (second to last axis) by ``mask[..., i]``."""
    v = _val(x)
    m = np.asarray(mask, dtype=np.float64)
    if m.shape != v.shape[:-1]:
        raise ValueError(f"mask_rows: mask {m.shape} does not match rows of {v.shape}")
    m = m[..., None]
    return _record(v * m, (x,), lambda g: (g * m,))


def pairwise_sq_distances(x) -> Tensor:
    """(..., N, D) -> (..., N, N) squared Euclidean distances."""
    v = _val(x)
    diff = v[..., :, None, :] - v[..., None, :, :]
    out = (diff * diff).sum(-1)

    def back(g):
        gs = g + np.swapaxes(g, -1, -2)
        return (2.0 * (gs[..., None] * diff).sum(axis=-2),)

    return _record(out, (x,), back)


def take(x, key) -> Tensor:
    """Numpy fancy indexing ``x[key]``; the gradient scatters back."""
    v = _val(x)

    def back(g):
        full = np.zeros_like(v)
        np.add.at(full, key, g)
        return (full,)

    return _record(np.array(v[key]), (x,), back)


def custom(value, backward_fn: Callable, *inputs) -> Tensor:
    """Record an externally computed op; ``backward_fn(upstream)`` returns input grads."""
    return _record(np.asarray(value, dtype=np.float64), inputs, backward_fn)


def backward(tape: Tape, loss: Tensor) -> None:
    """Reverse sweep over ``tape``; sets ``.grad`` on every requires_grad leaf."""
    if loss.value.size != 1:
        raise ValueError(f"backward needs a scalar loss, got shape {loss.shape}")
    grads: dict[int, np.ndarray] = {loss.node_id: np.ones_like(loss.value)}
    leaves: dict[int, Tensor] = {}
    for out, inputs, fn in reversed(tape.records):
        g = grads.pop(out.node_id, None)
        if g is None:
            continue
        for t, gi in zip(inputs, fn(g)):
            if not isinstance(t, Tensor):
                continue
            if t.node_id in grads:
                grads[t.node_id] = grads[t.node_id] + gi
            else:
                grads[t.node_id] = gi
            if t.requires_grad:
                leaves[t.node_id] = t
    for nid, t in leaves.items():
        t.grad = grads[nid]


@dataclass
class AdamState:
    m: list
    v: list
    t: int = 0

    @classmethod
    def zeros(cls, params: Sequence[Tensor]) -> "AdamState":
        return cls([np.zeros_like(p.value) for p in params], [np.zeros_like(p.value) for p in params])


def adam_step(params: Sequence[Tensor], grads: Sequence[np.ndarray], state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    """One bias-corrected Adam update; parameters are updated in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads and state differ in length")
    state.t += 1
    c1 = 1.0 - beta1 ** state.t
    c2 = 1.0 - beta2 ** state.t
    for i, (p, g) in enumerate(zip(params, grads)):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != p.value.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.value.shape}")
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g
        p.value = p.value - lr * (state.m[i] / c1) / (np.sqrt(state.v[i] / c2) + eps)
    return state


class Adam:
    """Stateful wrapper over :func:`adam_step`; ``reset`` clears the moments."""

    def __init__(self, params: Sequence[Tensor], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.reset()

    def reset(self):
        self.state = AdamState.zeros(self.params)

    def step(self, grads: Sequence[np.ndarray] | None = None):
        if grads is None:
            grads = [p.grad if p.grad is not None else np.zeros_like(p.value) for p in self.params]
        adam_step(self.params, grads, self.state, self.lr, self.beta1, self.beta2, self.eps)
