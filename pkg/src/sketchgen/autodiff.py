"""Reverse-mode automatic differentiation over numpy arrays.

A small tape-based engine: just the operations the encoder and the tree
decoder need, in float64 throughout. Nothing here knows about the model;
it is plain array calculus plus an Adam optimizer.
"""

from __future__ import annotations

import numpy as np


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum out axes that broadcasting introduced so grad matches shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("data", "grad", "_backward", "_prev")

    def __init__(self, data, _prev=()):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = np.zeros_like(self.data)
        self._backward = None
        self._prev = _prev

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data + other.data, (self, other))

        def back():
            self.grad += _unbroadcast(out.grad, self.data.shape)
            other.grad += _unbroadcast(out.grad, other.data.shape)
        out._backward = back
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Tensor(-self.data, (self,))

        def back():
            self.grad -= out.grad
        out._backward = back
        return out

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __mul__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data * other.data, (self, other))

        def back():
            self.grad += _unbroadcast(out.grad * other.data, self.data.shape)
            other.grad += _unbroadcast(out.grad * self.data, other.data.shape)
        out._backward = back
        return out

    __rmul__ = __mul__

    def __matmul__(self, other):
        other = as_tensor(other)
        a, b = self.data, other.data
        assert a.ndim == 1 and b.ndim == 2, "only vector @ matrix is supported"
        out = Tensor(a @ b, (self, other))

        def back():
            self.grad += b @ out.grad
            other.grad += np.outer(a, out.grad)
        out._backward = back
        return out

    def reciprocal(self):
        out = Tensor(1.0 / self.data, (self,))

        def back():
            self.grad -= out.grad / (self.data * self.data)
        out._backward = back
        return out

    # -- nonlinearities ----------------------------------------------------

    def tanh(self):
        t = np.tanh(self.data)
        out = Tensor(t, (self,))

        def back():
            self.grad += (1.0 - t * t) * out.grad
        out._backward = back
        return out

    def exp(self):
        e = np.exp(self.data)
        out = Tensor(e, (self,))

        def back():
            self.grad += e * out.grad
        out._backward = back
        return out

    def log(self):
        out = Tensor(np.log(self.data), (self,))

        def back():
            self.grad += out.grad / self.data
        out._backward = back
        return out

    def sqrt(self):
        r = np.sqrt(self.data)
        out = Tensor(r, (self,))

        def back():
            self.grad += out.grad / (2.0 * r)
        out._backward = back
        return out

    def log_softmax(self):
        x = self.data
        shifted = x - x.max()
        lse = np.log(np.exp(shifted).sum())
        y = shifted - lse
        out = Tensor(y, (self,))

        def back():
            g = out.grad
            self.grad += g - np.exp(y) * g.sum()
        out._backward = back
        return out

    # -- shape/selection -----------------------------------------------------

    def row(self, i: int):
        """Select row i of a matrix (one-hot times matrix)."""
        out = Tensor(self.data[i], (self,))

        def back():
            self.grad[i] += out.grad
        out._backward = back
        return out

    def pick(self, i: int):
        """Select one component of a vector as a scalar."""
        out = Tensor(self.data[i], (self,))

        def back():
            self.grad[i] += out.grad
        out._backward = back
        return out

    def sum(self):
        out = Tensor(self.data.sum(), (self,))

        def back():
            self.grad += out.grad
        out._backward = back
        return out

    # -- graph traversal -------------------------------------------------------

    def backward(self):
        order: list[Tensor] = []
        seen: set[int] = set()
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
            for prev in node._prev:
                if id(prev) not in seen:
                    stack.append((prev, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None:
                node._backward()

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


class Adam:
    """Adam optimizer over a fixed list of parameter tensors."""

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.grad = np.zeros_like(p.data)

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p, m, v in zip(self.params, self.m, self.v):
            m *= b1
            m += (1 - b1) * p.grad
            v *= b2
            v += (1 - b2) * p.grad * p.grad
            mhat = m / (1 - b1 ** self.t)
            vhat = v / (1 - b2 ** self.t)
            p.data = p.data - self.lr * mhat / (np.sqrt(vhat) + self.eps)
