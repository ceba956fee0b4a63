"""Small reverse-mode automatic differentiation engine over numpy arrays.

Nodes hold float64 arrays (a scalar is a 0-d array).  The op set is just
what the regressor and the loss formulations need: arithmetic with
broadcasting, matmul, reductions, tanh, and a norm primitive whose gradient
is the zero subgradient at the origin (the loss kink rule).  Gradients are
validated against central finite differences in the test suite.
"""

from __future__ import annotations

import numpy as np


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum grad over the axes numpy broadcasting introduced for `shape`."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Var:
    """A differentiable array value in the computation graph."""

    __slots__ = ("value", "grad", "_parents", "_backward")

    def __init__(self, value, parents=(), backward=None):
        self.value = np.asarray(value, dtype=float)
        self.grad = None
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Var(shape={self.value.shape})"

    # -- graph construction ------------------------------------------------

    def __add__(self, other):
        other = as_var(other)
        out = Var(self.value + other.value, (self, other))

        def backward(g):
            return _unbroadcast(g, self.shape), _unbroadcast(g, other.shape)

        out._backward = backward
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Var(-self.value, (self,))
        out._backward = lambda g: (-g,)
        return out

    def __sub__(self, other):
        return self + (-as_var(other))

    def __rsub__(self, other):
        return as_var(other) + (-self)

    def __mul__(self, other):
        other = as_var(other)
        out = Var(self.value * other.value, (self, other))

        def backward(g):
            return (
                _unbroadcast(g * other.value, self.shape),
                _unbroadcast(g * self.value, other.shape),
            )

        out._backward = backward
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_var(other)
        out = Var(self.value / other.value, (self, other))

        def backward(g):
            return (
                _unbroadcast(g / other.value, self.shape),
                _unbroadcast(-g * self.value / other.value**2, other.shape),
            )

        out._backward = backward
        return out

    def __rtruediv__(self, other):
        return as_var(other) / self

    def __pow__(self, exponent: float):
        out = Var(self.value**exponent, (self,))
        out._backward = lambda g: (g * exponent * self.value ** (exponent - 1),)
        return out

    def __matmul__(self, other):
        other = as_var(other)
        out = Var(self.value @ other.value, (self, other))

        def backward(g):
            return g @ other.value.T, self.value.T @ g

        out._backward = backward
        return out

    def __getitem__(self, key):
        out = Var(self.value[key], (self,))

        def backward(g):
            full = np.zeros_like(self.value)
            full[key] = g
            return (full,)

        out._backward = backward
        return out

    def sum(self, axis=None, keepdims=False):
        out = Var(self.value.sum(axis=axis, keepdims=keepdims), (self,))

        def backward(g):
            g = np.asarray(g)
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, self.value.shape).copy(),)

        out._backward = backward
        return out

    def mean(self, axis=None, keepdims=False):
        n = self.value.size if axis is None else self.value.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) / float(n)

    def tanh(self):
        t = np.tanh(self.value)
        out = Var(t, (self,))
        out._backward = lambda g: (g * (1.0 - t * t),)
        return out

    # -- backpropagation ----------------------------------------------------

    def backward(self):
        """Accumulate gradients of this (scalar) node into the graph."""
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))

        for node in order:
            node.grad = np.zeros_like(node.value)
        self.grad = np.ones_like(self.value)
        for node in reversed(order):
            if node._backward is None:
                continue
            for parent, g in zip(node._parents, node._backward(node.grad)):
                parent.grad = parent.grad + g


def as_var(x) -> Var:
    return x if isinstance(x, Var) else Var(x)


def norm(x: Var, axis: int = -1, eps: float = 1e-12) -> Var:
    """Euclidean norm along an axis; zero subgradient where the norm
    vanishes (and the same guarded direction for near-zero norms)."""
    n = np.sqrt((x.value**2).sum(axis=axis))
    out = Var(n, (x,))
    safe = np.where(n > eps, n, 1.0)
    mask = (n > eps).astype(float)

    def backward(g):
        scale = np.expand_dims(g * mask / safe, axis)
        return (scale * x.value,)

    out._backward = backward
    return out


def normalize(x: Var, axis: int = -1, eps: float = 1e-12) -> Var:
    """x / |x| along an axis, with gradient flowing through the norm."""
    n = norm(x, axis=axis, eps=eps)
    shape = list(x.value.shape)
    shape[axis] = 1
    return x / reshape(n, tuple(shape))


def reshape(x: Var, shape: tuple) -> Var:
    out = Var(x.value.reshape(shape), (x,))
    out._backward = lambda g: (g.reshape(x.value.shape),)
    return out


def where_mask(mask: np.ndarray, a: Var, b: Var) -> Var:
    """Select a where mask else b; mask is a constant boolean array."""
    a, b = as_var(a), as_var(b)
    m = np.asarray(mask, dtype=bool)
    out = Var(np.where(m, a.value, b.value), (a, b))

    def backward(g):
        return (
            _unbroadcast(np.where(m, g, 0.0), a.shape),
            _unbroadcast(np.where(m, 0.0, g), b.shape),
        )

    out._backward = backward
    return out
