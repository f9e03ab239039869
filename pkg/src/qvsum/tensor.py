"""Dense float64 tensors with reverse-mode automatic differentiation.

Tensors wrap a row-major numpy array and record the op graph dynamically;
calling ``backward()`` on a scalar walks the graph once in reverse
topological order. Broadcasting is deliberately limited to vectors over
matrix rows, which is all the model needs.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import erf

from .errors import DimensionError

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

LAYER_NORM_EPS = 1e-5

# Finite stand-in for -inf in attention masks: exp() underflows to exactly
# 0.0 after row-max subtraction, so masked positions contribute nothing.
MASK_NEG = -1e30


class Tensor:
    """A float64 tensor node in the autodiff graph."""

    __slots__ = ("array", "requires_grad", "grad", "_parents", "_backward")

    def __init__(self, array, requires_grad: bool = False):
        self.array = np.ascontiguousarray(np.asarray(array, dtype=np.float64))
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self._parents: Tuple[Tensor, ...] = ()
        self._backward: Optional[Callable[[np.ndarray], None]] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.array.shape

    @property
    def data(self) -> np.ndarray:
        """Flat row-major view of the values."""
        return self.array.ravel()

    def item(self) -> float:
        return self.array.item()

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """Reverse-mode sweep from this scalar through the recorded graph."""
        if self.array.size != 1:
            raise DimensionError(
                f"backward() requires a scalar, got shape {self.shape}"
            )
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                stack.append((p, False))

        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.array)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad:
                node.grad = g if node.grad is None else node.grad + g
            if node._backward is not None:
                for parent, pg in node._backward(g):
                    if parent.requires_grad or parent._backward is not None:
                        key = id(parent)
                        if key in grads:
                            grads[key] = grads[key] + pg
                        else:
                            grads[key] = pg

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def _make(array: np.ndarray, parents: Sequence[Tensor], backward) -> Tensor:
    out = Tensor(array)
    if any(p.requires_grad or p._backward is not None for p in parents):
        out._parents = tuple(parents)
        out._backward = backward
    return out


def constant(array) -> Tensor:
    return Tensor(array, requires_grad=False)


def parameter(array) -> Tensor:
    return Tensor(array, requires_grad=True)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of a [M,K] and b [K,N]."""
    if a.array.ndim != 2 or b.array.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"matmul shapes incompatible: {a.shape} x {b.shape}"
        )
    out = a.array @ b.array

    def backward(g):
        return ((a, g @ b.array.T), (b, a.array.T @ g))

    return _make(out, (a, b), backward)


def transpose(a: Tensor) -> Tensor:
    if a.array.ndim != 2:
        raise DimensionError(f"transpose expects a matrix, got {a.shape}")
    out = a.array.T

    def backward(g):
        return ((a, g.T),)

    return _make(out, (a,), backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise DimensionError(f"add shapes differ: {a.shape} vs {b.shape}")

    def backward(g):
        return ((a, g), (b, g))

    return _make(a.array + b.array, (a, b), backward)


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise DimensionError(f"hadamard shapes differ: {a.shape} vs {b.shape}")

    def backward(g):
        return ((a, g * b.array), (b, g * a.array))

    return _make(a.array * b.array, (a, b), backward)


def add_rowvec(mat: Tensor, vec: Tensor) -> Tensor:
    """Add a [D] vector to every row of a [N,D] matrix."""
    if mat.array.ndim != 2 or vec.array.ndim != 1 or mat.shape[1] != vec.shape[0]:
        raise DimensionError(
            f"add_rowvec shapes incompatible: {mat.shape} + {vec.shape}"
        )

    def backward(g):
        return ((mat, g), (vec, g.sum(axis=0)))

    return _make(mat.array + vec.array, (mat, vec), backward)


def mul_rowvec(mat: Tensor, vec: Tensor) -> Tensor:
    """Multiply every row of a [N,D] matrix by a [D] vector."""
    if mat.array.ndim != 2 or vec.array.ndim != 1 or mat.shape[1] != vec.shape[0]:
        raise DimensionError(
            f"mul_rowvec shapes incompatible: {mat.shape} * {vec.shape}"
        )

    def backward(g):
        return ((mat, g * vec.array), (vec, (g * mat.array).sum(axis=0)))

    return _make(mat.array * vec.array, (mat, vec), backward)


def broadcast_rows(vec: Tensor, n: int) -> Tensor:
    """Tile a [D] vector into an [n,D] matrix; gradient sums over rows."""
    if vec.array.ndim != 1:
        raise DimensionError(f"broadcast_rows expects a vector, got {vec.shape}")
    out = np.tile(vec.array, (n, 1))

    def backward(g):
        return ((vec, g.sum(axis=0)),)

    return _make(out, (vec,), backward)


def take_row(mat: Tensor, i: int) -> Tensor:
    """Extract row i of a [N,D] matrix as a [D] vector."""
    if mat.array.ndim != 2:
        raise DimensionError(f"take_row expects a matrix, got {mat.shape}")
    out = mat.array[i].copy()

    def backward(g):
        gm = np.zeros_like(mat.array)
        gm[i] = g
        return ((mat, gm),)

    return _make(out, (mat,), backward)


def scale(a: Tensor, c: float) -> Tensor:
    def backward(g):
        return ((a, g * c),)

    return _make(a.array * c, (a,), backward)


def sigmoid(a: Tensor) -> Tensor:
    s = 1.0 / (1.0 + np.exp(-a.array))

    def backward(g):
        return ((a, g * s * (1.0 - s)),)

    return _make(s, (a,), backward)


def gelu(a: Tensor) -> Tensor:
    """Exact (erf-based) GELU."""
    x = a.array
    cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))
    out = x * cdf

    def backward(g):
        pdf = np.exp(-0.5 * x * x) * _INV_SQRT_2PI
        return ((a, g * (cdf + x * pdf)),)

    return _make(out, (a,), backward)


def elementwise(op: str, a: Tensor, b: Optional[Tensor] = None) -> Tensor:
    """Dispatch an elementwise op by name; binary ops require ``b``."""
    if op == "add":
        if b is None:
            raise DimensionError("add is binary")
        return add(a, b) if a.shape == b.shape else add_rowvec(a, b)
    if op == "hadamard":
        if b is None:
            raise DimensionError("hadamard is binary")
        return hadamard(a, b) if a.shape == b.shape else mul_rowvec(a, b)
    if op == "sigmoid":
        return sigmoid(a)
    if op == "gelu":
        return gelu(a)
    raise ValueError(f"unknown elementwise op: {op!r}")


def softmax_rows(a: Tensor) -> Tensor:
    """Row-wise softmax, stabilized by row-max subtraction."""
    if a.array.ndim != 2:
        raise DimensionError(f"softmax_rows expects a matrix, got {a.shape}")
    shifted = a.array - a.array.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=1, keepdims=True)

    def backward(g):
        dot = (g * s).sum(axis=1, keepdims=True)
        return ((a, s * (g - dot)),)

    return _make(s, (a,), backward)


def layer_norm(a: Tensor, gain: Tensor, bias: Tensor) -> Tensor:
    """Per-row normalization to zero mean / unit variance, then affine."""
    if a.array.ndim != 2:
        raise DimensionError(f"layer_norm expects a matrix, got {a.shape}")
    d = a.shape[1]
    if d < 2:
        raise DimensionError("layer_norm needs at least 2 features per row")
    if gain.shape != (d,) or bias.shape != (d,):
        raise DimensionError(
            f"layer_norm affine shapes {gain.shape}/{bias.shape} "
            f"do not match feature dim {d}"
        )
    mu = a.array.mean(axis=1, keepdims=True)
    var = a.array.var(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + LAYER_NORM_EPS)
    y = (a.array - mu) * inv_std
    out = y * gain.array + bias.array

    def backward(g):
        gg = g * gain.array
        ga = inv_std * (
            gg
            - gg.mean(axis=1, keepdims=True)
            - y * (gg * y).mean(axis=1, keepdims=True)
        )
        return ((a, ga), (gain, (g * y).sum(axis=0)), (bias, g.sum(axis=0)))

    return _make(out, (a, gain, bias), backward)


def normalize_rows(a: np.ndarray) -> np.ndarray:
    """Pre-affine layer-norm of a plain array (used by tests as an oracle)."""
    mu = a.mean(axis=1, keepdims=True)
    var = a.var(axis=1, keepdims=True)
    return (a - mu) / np.sqrt(var + LAYER_NORM_EPS)


def embed_rows(table: Tensor, ids: Sequence[int]) -> Tensor:
    """Gather columns of an [E,V] embedding table into an [N,E] matrix."""
    idx = np.asarray(ids, dtype=np.int64)
    out = table.array[:, idx].T.copy()

    def backward(g):
        gt = np.zeros_like(table.array)
        np.add.at(gt.T, idx, g)
        return ((table, gt),)

    return _make(out, (table,), backward)


def mean_all(a: Tensor) -> Tensor:
    n = a.array.size

    def backward(g):
        return ((a, np.full_like(a.array, g.item() / n)),)

    return _make(np.asarray(a.array.mean()), (a,), backward)


def sum_all(a: Tensor) -> Tensor:
    def backward(g):
        return ((a, np.full_like(a.array, g.item())),)

    return _make(np.asarray(a.array.sum()), (a,), backward)


def cross_entropy_mean(logits: Tensor, labels: Sequence[int]) -> Tensor:
    """Mean over rows of -logit[label] + logsumexp(row), stabilized."""
    lab = np.asarray(labels, dtype=np.int64)
    x = logits.array
    if x.ndim != 2 or lab.shape != (x.shape[0],):
        raise DimensionError(
            f"cross_entropy shapes incompatible: {logits.shape} vs {lab.shape}"
        )
    m = x.max(axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(x - m).sum(axis=1))
    rows = np.arange(x.shape[0])
    losses = lse - x[rows, lab]
    n = x.shape[0]

    def backward(g):
        p = np.exp(x - m)
        p /= p.sum(axis=1, keepdims=True)
        p[rows, lab] -= 1.0
        return ((logits, p * (g.item() / n)),)

    return _make(np.asarray(losses.mean()), (logits,), backward)
