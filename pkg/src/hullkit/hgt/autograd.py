"""Minimal reverse-mode automatic differentiation on numpy arrays.

Each operation records its inputs and a closure that maps the output gradient
to input gradients.  ``backward`` walks the tape in reverse topological order.
Only the operations the graph transformer needs are provided.
"""
from __future__ import annotations

import numpy as np
from scipy.special import erf

_SQRT2 = np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


class Tensor:
    __slots__ = ("data", "grad", "parents", "backward_fn", "requires_grad", "name")

    def __init__(self, data, parents=(), backward_fn=None, requires_grad=False, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.parents = parents
        self.backward_fn = backward_fn
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, name={self.name})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def param(value, name=None):
    return Tensor(value, requires_grad=True, name=name)


def const(value):
    return value if isinstance(value, Tensor) else Tensor(value)


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, n in enumerate(shape):
        if n == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


def _op(data, parents, fn):
    parents = tuple(parents)
    if not any(p.requires_grad for p in parents):
        return Tensor(data)
    return Tensor(data, parents, fn)


def add(a, b):
    a, b = const(a), const(b)
    return _op(a.data + b.data, (a, b),
               lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def mul(a, b):
    a, b = const(a), const(b)
    return _op(a.data * b.data, (a, b),
               lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)))


def matmul(a, b):
    """Batched matmul with numpy semantics for ndim >= 2 operands."""
    a, b = const(a), const(b)

    def fn(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)
    return _op(a.data @ b.data, (a, b), fn)


def reshape(a, shape):
    return _op(a.data.reshape(shape), (a,), lambda g: (g.reshape(a.shape),))


def transpose(a, axes):
    inv = np.argsort(axes)
    return _op(np.transpose(a.data, axes), (a,), lambda g: (np.transpose(g, inv),))


def gelu(a):
    x = a.data
    cdf = 0.5 * (1.0 + erf(x / _SQRT2))
    pdf = _INV_SQRT2PI * np.exp(-0.5 * x * x)
    return _op(x * cdf, (a,), lambda g: (g * (cdf + x * pdf),))


def exp(a):
    y = np.exp(a.data)
    return _op(y, (a,), lambda g: (g * y,))


def square(a):
    return _op(a.data ** 2, (a,), lambda g: (2.0 * a.data * g,))


def sum_axis(a, axis):
    def fn(g):
        return (np.broadcast_to(np.expand_dims(g, axis), a.shape).copy(),)
    return _op(a.data.sum(axis=axis), (a,), fn)


def sum_all(a):
    return _op(np.array(a.data.sum()), (a,), lambda g: (np.broadcast_to(g, a.shape).copy(),))


def mean_all(a):
    n = a.data.size
    return _op(np.array(a.data.mean()), (a,), lambda g: (np.full(a.shape, g / n),))


def gather(a, idx):
    """Rows ``a[idx]`` (first axis)."""
    idx = np.asarray(idx)

    def fn(g):
        out = np.zeros_like(a.data)
        np.add.at(out, idx, g)
        return (out,)
    return _op(a.data[idx], (a,), fn)


def segment_sum(a, idx, n):
    """out[j] = sum of a[i] over i with idx[i] == j, for j < n."""
    idx = np.asarray(idx)
    out = np.zeros((n,) + a.shape[1:])
    np.add.at(out, idx, a.data)
    return _op(out, (a,), lambda g: (g[idx],))


def concat(tensors, axis=0):
    tensors = [const(t) for t in tensors]
    sizes = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def fn(g):
        return tuple(np.split(g, sizes, axis=axis))
    return _op(np.concatenate([t.data for t in tensors], axis=axis), tensors, fn)


def segment_softmax(scores, idx, n):
    """Softmax of ``scores`` (E, h) over groups of rows sharing ``idx`` (target node)."""
    idx = np.asarray(idx)
    s = scores.data
    mx = np.full((n,) + s.shape[1:], -np.inf)
    np.maximum.at(mx, idx, s)
    e = np.exp(s - mx[idx])
    den = np.zeros((n,) + s.shape[1:])
    np.add.at(den, idx, e)
    y = e / den[idx]

    def fn(g):
        gy = g * y
        tot = np.zeros((n,) + s.shape[1:])
        np.add.at(tot, idx, gy)
        return (gy - y * tot[idx],)
    return _op(y, (scores,), fn)


def batch_norm(x, gamma, beta, eps=1e-5):
    """Training-mode batch normalisation over rows; returns (out, mean, var)."""
    mu = x.data.mean(axis=0)
    var = x.data.var(axis=0)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    n = x.shape[0]

    def fn(g):
        gg = g * gamma.data
        gx = inv / n * (n * gg - gg.sum(axis=0) - xhat * (gg * xhat).sum(axis=0))
        return gx, (g * xhat).sum(axis=0), g.sum(axis=0)
    out = _op(xhat * gamma.data + beta.data, (x, gamma, beta), fn)
    return out, mu, var


def backward(root: Tensor, grad=None):
    """Accumulate d root / d leaf into ``leaf.grad`` for every leaf requiring grad."""
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    grads = {id(root): np.ones_like(root.data) if grad is None else grad}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.backward_fn is None:
            node.grad = g if node.grad is None else node.grad + g
            continue
        for p, gp in zip(node.parents, node.backward_fn(g)):
            if not p.requires_grad:
                continue
            grads[id(p)] = gp if id(p) not in grads else grads[id(p)] + gp
