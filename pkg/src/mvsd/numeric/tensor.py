"""Dense float64 tensors with reverse-mode autodiff.

Small dynamic-tape engine: every op records parents and a backward closure,
`Tensor.backward()` walks the tape in reverse topological order. Only the op
set needed by the fusion model is implemented; everything is 64-bit and
deterministic (no threading, no hidden RNG).
"""
from __future__ import annotations

import numpy as np

from ..errors import DimensionError, NumericError


class ClampCounter:
    """Counts how often clamped_log had to clip a probability."""

    def __init__(self):
        self.count = 0


def _as_array(value) -> np.ndarray:
    return np.asarray(value, dtype=np.float64)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_array(data)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={'yes' if self.requires_grad else 'no'})"

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def _accum(self, delta: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += delta

    def backward(self):
        """Reverse-mode sweep from a scalar node."""
        if self.data.shape != ():
            raise NumericError("backward() requires a scalar loss")
        if not np.isfinite(self.data):
            raise NumericError("loss is not finite")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self._accum(np.ones((), dtype=np.float64))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # operator sugar ------------------------------------------------------
    def __add__(self, other):
        return add(self, _wrap(other))

    def __radd__(self, other):
        return add(_wrap(other), self)

    def __sub__(self, other):
        return sub(self, _wrap(other))

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __mul__(self, other):
        return mul(self, _wrap(other))

    def __rmul__(self, other):
        return mul(_wrap(other), self)

    def __neg__(self):
        return mul(self, Tensor(-1.0))

    def __matmul__(self, other):
        return matmul(self, _wrap(other))

    def __getitem__(self, idx):
        return getitem(self, idx)


def _wrap(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _node(data: np.ndarray, parents: tuple[Tensor, ...], backward) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad or p._parents for p in parents):
        out.requires_grad = any(p.requires_grad for p in parents)
        out._parents = parents
        out._backward = backward
    return out


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a broadcast gradient back to `shape`."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# primitive ops ------------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    data = a.data + b.data

    def backward(g):
        a._accum(_unbroadcast(g, a.data.shape))
        b._accum(_unbroadcast(g, b.data.shape))

    return _node(data, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    data = a.data - b.data

    def backward(g):
        a._accum(_unbroadcast(g, a.data.shape))
        b._accum(_unbroadcast(-g, b.data.shape))

    return _node(data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    data = a.data * b.data

    def backward(g):
        a._accum(_unbroadcast(g * b.data, a.data.shape))
        b._accum(_unbroadcast(g * a.data, b.data.shape))

    return _node(data, (a, b), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim not in (1, 2) or b.ndim not in (1, 2):
        raise DimensionError(f"matmul supports 1-D/2-D operands, got {a.shape} @ {b.shape}")
    if a.data.shape[-1] != (b.data.shape[0] if b.ndim >= 1 else None):
        raise DimensionError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    data = a.data @ b.data

    def backward(g):
        if a.ndim == 2 and b.ndim == 2:
            a._accum(g @ b.data.T)
            b._accum(a.data.T @ g)
        elif a.ndim == 2 and b.ndim == 1:
            a._accum(np.outer(g, b.data))
            b._accum(a.data.T @ g)
        elif a.ndim == 1 and b.ndim == 2:
            a._accum(b.data @ g)
            b._accum(np.outer(a.data, g))
        else:  # both 1-D, scalar output
            a._accum(g * b.data)
            b._accum(g * a.data)

    return _node(data, (a, b), backward)


def transpose(a: Tensor) -> Tensor:
    if a.ndim != 2:
        raise DimensionError(f"transpose expects a matrix, got shape {a.shape}")
    data = a.data.T.copy()

    def backward(g):
        a._accum(g.T)

    return _node(data, (a,), backward)


def reshape(a: Tensor, shape) -> Tensor:
    data = a.data.reshape(shape)

    def backward(g):
        a._accum(g.reshape(a.data.shape))

    return _node(data, (a,), backward)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise DimensionError("concat of zero tensors")
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]

    def backward(g):
        offset = 0
        for t, size in zip(tensors, sizes):
            index = [slice(None)] * g.ndim
            index[axis] = slice(offset, offset + size)
            t._accum(g[tuple(index)])
            offset += size

    return _node(data, tuple(tensors), backward)


def getitem(a: Tensor, idx) -> Tensor:
    # integer-array (advanced) indexing may repeat positions, so the backward
    # pass must accumulate with np.add.at instead of buffered fancy indexing
    advanced = isinstance(idx, (list, np.ndarray))
    if isinstance(idx, tuple):
        advanced = any(isinstance(e, (list, np.ndarray)) for e in idx)
    if advanced and not isinstance(idx, tuple):
        idx = np.asarray(idx)
    data = a.data[idx]
    if not isinstance(data, np.ndarray):
        data = np.asarray(data, dtype=np.float64)
    else:
        data = data.copy()

    def backward(g):
        buf = np.zeros_like(a.data)
        if advanced:
            np.add.at(buf, idx, g)
        else:
            buf[idx] += g
        a._accum(buf)

    return _node(data, (a,), backward)


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    data = a.data * mask

    def backward(g):
        a._accum(g * mask)

    return _node(data, (a,), backward)


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    data = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        # dL/dz = y * (g - sum(g*y))
        s = (g * data).sum(axis=axis, keepdims=True)
        a._accum(data * (g - s))

    return _node(data, (a,), backward)


def clamped_log(a: Tensor, eps: float = 1e-12, counter: ClampCounter | None = None) -> Tensor:
    """log with the argument clipped below at eps; clips are counted."""
    clipped = np.maximum(a.data, eps)
    if counter is not None:
        counter.count += int(np.count_nonzero(a.data < eps))
    data = np.log(clipped)
    mask = a.data >= eps

    def backward(g):
        a._accum(g * mask / clipped)

    return _node(data, (a,), backward)


def tsum(a: Tensor, axis: int | None = None) -> Tensor:
    data = a.data.sum(axis=axis)

    def backward(g):
        if axis is None:
            a._accum(np.broadcast_to(g, a.data.shape).copy())
        else:
            a._accum(np.broadcast_to(np.expand_dims(g, axis), a.data.shape).copy())

    return _node(data, (a,), backward)


def mean(a: Tensor, axis: int | None = None) -> Tensor:
    n = a.data.size if axis is None else a.data.shape[axis]
    return mul(tsum(a, axis=axis), Tensor(1.0 / n))


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-12) -> Tensor:
    """Normalize the last axis to mean 0 / variance 1, then affine."""
    if x.data.shape[-1] != gamma.data.shape[0] or gamma.data.shape != beta.data.shape:
        raise DimensionError("layer_norm parameter shapes do not match input")
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    data = gamma.data * xhat + beta.data

    def backward(g):
        dxhat = g * gamma.data
        m1 = dxhat.mean(axis=-1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
        x._accum(inv * (dxhat - m1 - xhat * m2))
        reduce_axes = tuple(range(g.ndim - 1))
        gamma._accum((g * xhat).sum(axis=reduce_axes) if reduce_axes else g * xhat)
        beta._accum(g.sum(axis=reduce_axes) if reduce_axes else g.copy())

    return _node(data, (x, gamma, beta), backward)


def dropout(x: Tensor, rate: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; rate 0 is the identity."""
    if rate < 0 or rate >= 1:
        raise DimensionError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return x
    mask = (rng.random(x.data.shape) >= rate) / (1.0 - rate)
    data = x.data * mask

    def backward(g):
        x._accum(g * mask)

    return _node(data, (x,), backward)


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """w has shape (out, in); x is (in,) or (rows, in)."""
    if w.ndim != 2 or x.data.shape[-1] != w.data.shape[1]:
        raise DimensionError(f"linear shape mismatch: x {x.shape}, w {w.shape}")
    if x.ndim == 1:
        return add(matmul(w, x), b)
    return add(matmul(x, transpose(w)), b)
