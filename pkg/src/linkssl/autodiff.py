"""Minimal reverse-mode automatic differentiation over dense 2-D arrays.

Every value is a Tensor holding a float64 matrix of shape (rows, cols).
Scalars are (1, 1) matrices and vectors are single-row or single-column
matrices. Operations record a backward closure; backward() walks the
graph once in reverse topological order and accumulates gradients into
leaf tensors. Gradients persist across backward calls until zeroed, so
calling backward twice doubles them.

Sparse adjacency matrices enter only through sparse_matmul and are
treated as constants (never differentiated).
"""

from __future__ import annotations

import weakref
from contextlib import contextmanager

import numpy as np

EPS = 1e-12


class AllocationTracker:
    """Records the shape and live-byte footprint of tensors created while active.

    Used to verify memory-scaling claims: `shapes` lists every allocation,
    `peak_live_bytes` tracks the high-water mark of simultaneously live
    tensor storage (auxiliary op caches included).
    """

    def __init__(self):
        self.shapes = []
        self.live_bytes = 0
        self.peak_live_bytes = 0

    def record_array(self, arr):
        self.shapes.append(arr.shape)
        self.live_bytes += arr.nbytes
        if self.live_bytes > self.peak_live_bytes:
            self.peak_live_bytes = self.live_bytes

    def _release(self, nbytes):
        self.live_bytes -= nbytes

    def record_tensor(self, t):
        self.record_array(t.values)
        weakref.finalize(t, self._release, t.values.nbytes)

    def max_dim(self):
        return max((max(s) for s in self.shapes), default=0)


_tracker = None


@contextmanager
def track_allocations():
    """Context manager yielding an AllocationTracker active for its scope."""
    global _tracker
    tracker = AllocationTracker()
    _tracker = tracker
    try:
        yield tracker
    finally:
        _tracker = None


def _as_matrix(values):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise ValueError(f"tensors are 2-D, got shape {arr.shape}")
    return arr


class Tensor:
    """A dense float64 matrix participating in the backward graph."""

    __slots__ = ("values", "grad", "requires_grad", "_parents", "_backward_fn",
                 "_op", "__weakref__")

    def __init__(self, values, requires_grad=False, _parents=(), _backward_fn=None,
                 _op="leaf"):
        self.values = _as_matrix(values)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = _parents
        self._backward_fn = _backward_fn
        self._op = _op
        if _tracker is not None:
            _tracker.record_tensor(self)

    @property
    def shape(self):
        return self.values.shape

    def item(self):
        if self.values.size != 1:
            raise ValueError("item() requires a scalar tensor")
        return float(self.values[0, 0])

    def __repr__(self):
        return f"Tensor(shape={self.shape}, op={self._op})"

    def _accumulate(self, contribution):
        if self.grad is None:
            self.grad = contribution.copy()
        else:
            self.grad += contribution


def _make(values, parents, backward_fn, op):
    """Create an op output, recording the backward rule only when needed."""
    needs = any(p.requires_grad for p in parents)
    if needs:
        return Tensor(values, requires_grad=True, _parents=tuple(parents),
                      _backward_fn=backward_fn, _op=op)
    return Tensor(values, _op=op)


def backward(loss):
    """Populate grads of every tensor reachable from `loss` that requires grad.

    Each graph node is visited exactly once (iterative topological order),
    so shared subexpressions cost no extra work. Intermediate node grads
    are freed as soon as they have been propagated.
    """
    if loss.values.size != 1:
        raise ValueError("backward requires a scalar loss")
    if not loss.requires_grad:
        return

    order = []
    seen = set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen or not node.requires_grad:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            stack.append((parent, False))

    loss._accumulate(np.ones((1, 1)))
    for node in reversed(order):
        if node._backward_fn is None or node.grad is None:
            continue
        node._backward_fn(node.grad)
        if node._parents:
            node.grad = None  # free intermediate storage; leaves keep theirs


def zero_grad(tensors):
    for t in tensors:
        t.grad = None


def _unbroadcast(grad, shape):
    """Sum `grad` down to `shape` (inverse of numpy broadcasting over 2-D)."""
    if grad.shape == shape:
        return grad
    out = grad
    if shape[0] == 1 and grad.shape[0] != 1:
        out = out.sum(axis=0, keepdims=True)
    if shape[1] == 1 and grad.shape[1] != 1:
        out = out.sum(axis=1, keepdims=True)
    return out


# ---------------------------------------------------------------------------
# primitive operations


def matmul(a, b):
    out = a.values @ b.values

    def backward_fn(g):
        if a.requires_grad:
            a._accumulate(g @ b.values.T)
        if b.requires_grad:
            b._accumulate(a.values.T @ g)

    return _make(out, (a, b), backward_fn, "matmul")


def sparse_matmul(adjacency, x):
    """adjacency (scipy sparse, constant) times dense tensor x."""
    out = adjacency @ x.values
    adj_t = adjacency.T

    def backward_fn(g):
        if x.requires_grad:
            x._accumulate(adj_t @ g)

    return _make(out, (x,), backward_fn, "sparse_matmul")


def add(a, b):
    out = a.values + b.values

    def backward_fn(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.shape))

    return _make(out, (a, b), backward_fn, "add")


def sub(a, b):
    out = a.values - b.values

    def backward_fn(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(-_unbroadcast(g, b.shape))

    return _make(out, (a, b), backward_fn, "sub")


def elementwise_mul(a, b):
    out = a.values * b.values

    def backward_fn(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.values, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.values, b.shape))

    return _make(out, (a, b), backward_fn, "elementwise_mul")


def scalar_mul(a, c):
    c = float(c)
    out = a.values * c

    def backward_fn(g):
        if a.requires_grad:
            a._accumulate(g * c)

    return _make(out, (a,), backward_fn, "scalar_mul")


def relu(x):
    out = np.maximum(x.values, 0.0)

    def backward_fn(g):
        if x.requires_grad:
            x._accumulate(g * (x.values > 0.0))

    return _make(out, (x,), backward_fn, "relu")


def prelu(x, slope):
    """PReLU with a learnable (1, 1) slope tensor for the negative part."""
    s = slope.values[0, 0]
    neg = x.values < 0.0
    out = np.where(neg, s * x.values, x.values)

    def backward_fn(g):
        if x.requires_grad:
            x._accumulate(g * np.where(neg, s, 1.0))
        if slope.requires_grad:
            slope._accumulate(np.sum(g * np.where(neg, x.values, 0.0),
                                     keepdims=True).reshape(1, 1))

    return _make(out, (x, slope), backward_fn, "prelu")


def sigmoid(x):
    out = 1.0 / (1.0 + np.exp(-x.values))

    def backward_fn(g):
        if x.requires_grad:
            x._accumulate(g * out * (1.0 - out))

    return _make(out, (x,), backward_fn, "sigmoid")


def log(x):
    safe = np.maximum(x.values, EPS)
    out = np.log(safe)

    def backward_fn(g):
        if x.requires_grad:
            x._accumulate(g / safe)

    return _make(out, (x,), backward_fn, "log")


def exp(x):
    out = np.exp(x.values)

    def backward_fn(g):
        if x.requires_grad:
            x._accumulate(g * out)

    return _make(out, (x,), backward_fn, "exp")


def row_l2_normalize(x):
    """Scale each row to unit L2 norm; rows with norm below EPS divide by EPS."""
    norms = np.sqrt(np.sum(x.values ** 2, axis=1, keepdims=True))
    denom = np.maximum(norms, EPS)
    out = x.values / denom

    def backward_fn(g):
        if not x.requires_grad:
            return
        # d(x/n)/dx applied to g is g/n - out*(out.g)/n; drop the curvature
        # term on degenerate rows where the denominator is the EPS floor.
        correction = out * np.sum(out * g, axis=1, keepdims=True)
        correction = np.where(norms > EPS, correction, 0.0)
        x._accumulate((g - correction) / denom)

    return _make(out, (x,), backward_fn, "row_l2_normalize")


def row_sum(x):
    out = np.sum(x.values, axis=1, keepdims=True)

    def backward_fn(g):
        if x.requires_grad:
            x._accumulate(np.broadcast_to(g, x.shape).copy())

    return _make(out, (x,), backward_fn, "row_sum")


def row_cosine_similarity(a, b):
    """Per-row cosine similarity, returned as an (n, 1) tensor."""
    if a.shape != b.shape:
        raise ValueError("row_cosine_similarity requires equal shapes")
    return row_sum(elementwise_mul(row_l2_normalize(a), row_l2_normalize(b)))


def logsumexp_rows(x):
    """Row-wise log(sum(exp(x))), max-shifted; rows of all -inf yield -inf."""
    m = np.max(x.values, axis=1, keepdims=True)
    finite_m = np.where(np.isfinite(m), m, 0.0)
    sums = np.sum(np.exp(x.values - finite_m), axis=1, keepdims=True)
    with np.errstate(divide="ignore"):
        out = np.where(np.isfinite(m), finite_m + np.log(sums), m)
    softmax = np.exp(x.values - np.where(np.isfinite(out), out, 0.0))
    softmax[~np.isfinite(out)[:, 0]] = 0.0
    if _tracker is not None:
        _tracker.record_array(softmax)

    def backward_fn(g):
        if x.requires_grad:
            x._accumulate(g * softmax)

    return _make(out, (x,), backward_fn, "logsumexp_rows")


def logaddexp(a, b):
    """Elementwise log(exp(a) + exp(b)); -inf entries contribute nothing."""
    out = np.logaddexp(a.values, b.values)

    def backward_fn(g):
        with np.errstate(invalid="ignore"):
            if a.requires_grad:
                wa = np.exp(a.values - out)
                wa[~np.isfinite(out)] = 0.0
                a._accumulate(_unbroadcast(g * wa, a.shape))
            if b.requires_grad:
                wb = np.exp(b.values - out)
                wb[~np.isfinite(out)] = 0.0
                b._accumulate(_unbroadcast(g * wb, b.shape))

    return _make(out, (a, b), backward_fn, "logaddexp")


def tensor_sum(x):
    out = np.sum(x.values).reshape(1, 1)

    def backward_fn(g):
        if x.requires_grad:
            x._accumulate(np.full(x.shape, g[0, 0]))

    return _make(out, (x,), backward_fn, "sum")


def tensor_mean(x):
    size = x.values.size
    out = (np.sum(x.values) / size).reshape(1, 1)

    def backward_fn(g):
        if x.requires_grad:
            x._accumulate(np.full(x.shape, g[0, 0] / size))

    return _make(out, (x,), backward_fn, "mean")


def concat_rows(tensors):
    parts = [t.values for t in tensors]
    out = np.concatenate(parts, axis=0)
    offsets = np.cumsum([0] + [p.shape[0] for p in parts])

    def backward_fn(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                t._accumulate(g[lo:hi])

    return _make(out, tuple(tensors), backward_fn, "concat_rows")


def transpose(x):
    out = x.values.T.copy()

    def backward_fn(g):
        if x.requires_grad:
            x._accumulate(g.T)

    return _make(out, (x,), backward_fn, "transpose")


def gather_rows(x, indices):
    """Select rows of x by an integer index array; duplicates allowed."""
    idx = np.asarray(indices, dtype=np.intp)
    out = x.values[idx]

    def backward_fn(g):
        if x.requires_grad:
            acc = np.zeros(x.shape)
            np.add.at(acc, idx, g)
            x._accumulate(acc)

    return _make(out, (x,), backward_fn, "gather_rows")


def mask_diagonal(x, fill=-np.inf):
    """Copy a square matrix with its diagonal overwritten by a constant."""
    if x.shape[0] != x.shape[1]:
        raise ValueError("mask_diagonal requires a square matrix")
    out = x.values.copy()
    np.fill_diagonal(out, fill)

    def backward_fn(g):
        if x.requires_grad:
            gc = g.copy()
            np.fill_diagonal(gc, 0.0)
            x._accumulate(gc)

    return _make(out, (x,), backward_fn, "mask_diagonal")


def diag_part(x):
    """Diagonal of a square matrix as an (n, 1) tensor."""
    if x.shape[0] != x.shape[1]:
        raise ValueError("diag_part requires a square matrix")
    out = np.diag(x.values).reshape(-1, 1)

    def backward_fn(g):
        if x.requires_grad:
            acc = np.zeros(x.shape)
            np.fill_diagonal(acc, g[:, 0])
            x._accumulate(acc)

    return _make(out, (x,), backward_fn, "diag_part")


def batch_norm(x, gamma, beta, state, momentum, training):
    """Batch normalization over rows with running statistics.

    `state` is a dict holding 'running_mean' and 'running_var' (1, d) arrays,
    updated in place during training with
    running <- momentum * running + (1 - momentum) * batch.
    """
    bn_eps = 1e-5
    if training:
        mu = np.mean(x.values, axis=0, keepdims=True)
        var = np.var(x.values, axis=0, keepdims=True)
        state["running_mean"] *= momentum
        state["running_mean"] += (1.0 - momentum) * mu
        state["running_var"] *= momentum
        state["running_var"] += (1.0 - momentum) * var
    else:
        mu = state["running_mean"]
        var = state["running_var"]
    inv_std = 1.0 / np.sqrt(var + bn_eps)
    xhat = (x.values - mu) * inv_std
    out = gamma.values * xhat + beta.values

    def backward_fn(g):
        if gamma.requires_grad:
            gamma._accumulate(np.sum(g * xhat, axis=0, keepdims=True))
        if beta.requires_grad:
            beta._accumulate(np.sum(g, axis=0, keepdims=True))
        if x.requires_grad:
            if training:
                n = x.shape[0]
                dxhat = g * gamma.values
                dx = (inv_std / n) * (n * dxhat
                                      - np.sum(dxhat, axis=0, keepdims=True)
                                      - xhat * np.sum(dxhat * xhat, axis=0,
                                                      keepdims=True))
                x._accumulate(dx)
            else:
                x._accumulate(g * gamma.values * inv_std)

    return _make(out, (x, gamma, beta), backward_fn, "batch_norm")


def layer_norm(x, gamma, beta):
    """Per-row normalization with learnable (1, d) scale and shift."""
    ln_eps = 1e-5
    mu = np.mean(x.values, axis=1, keepdims=True)
    var = np.var(x.values, axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + ln_eps)
    xhat = (x.values - mu) * inv_std
    out = gamma.values * xhat + beta.values

    def backward_fn(g):
        if gamma.requires_grad:
            gamma._accumulate(np.sum(g * xhat, axis=0, keepdims=True))
        if beta.requires_grad:
            beta._accumulate(np.sum(g, axis=0, keepdims=True))
        if x.requires_grad:
            d = x.shape[1]
            dxhat = g * gamma.values
            dx = (inv_std / d) * (d * dxhat
                                  - np.sum(dxhat, axis=1, keepdims=True)
                                  - xhat * np.sum(dxhat * xhat, axis=1,
                                                  keepdims=True))
            x._accumulate(dx)

    return _make(out, (x, gamma, beta), backward_fn, "layer_norm")


def standardize_cols(w):
    """Standardize each column (output unit) of a weight matrix to zero mean
    and unit variance. Differentiable reparameterization applied at forward
    time when weight standardization is enabled."""
    ws_eps = 1e-5
    mu = np.mean(w.values, axis=0, keepdims=True)
    var = np.var(w.values, axis=0, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + ws_eps)
    what = (w.values - mu) * inv_std

    def backward_fn(g):
        if w.requires_grad:
            n = w.shape[0]
            dw = (inv_std / n) * (n * g
                                  - np.sum(g, axis=0, keepdims=True)
                                  - what * np.sum(g * what, axis=0,
                                                  keepdims=True))
            w._accumulate(dw)

    return _make(what, (w,), backward_fn, "standardize_cols")


# ---------------------------------------------------------------------------
# verification


def grad_check(f, inputs, eps=1e-5):
    """Compare backward() gradients of scalar-valued f against central
    finite differences, coordinate by coordinate.

    Returns the maximum relative error |a - n| / max(|a|, |n|, 1e-8)
    over every coordinate of every input tensor.
    """
    for t in inputs:
        t.requires_grad = True
        t.grad = None
    out = f(*inputs)
    backward(out)
    analytic = [np.zeros(t.shape) if t.grad is None else t.grad.copy()
                for t in inputs]

    worst = 0.0
    for t, a in zip(inputs, analytic):
        flat = t.values.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            up = f(*inputs).item()
            flat[j] = orig - eps
            down = f(*inputs).item()
            flat[j] = orig
            numeric = (up - down) / (2.0 * eps)
            aj = a.reshape(-1)[j]
            err = abs(aj - numeric) / max(abs(aj), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst
