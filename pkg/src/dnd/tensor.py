"""Dense float64 tensors with tape-based reverse-mode differentiation.

The design is a Wengert list: while a Tape is active (used as a context
manager), every operation appends one node holding the backward rule for
that op. ``backward(loss)`` walks the list once in reverse and writes
``grad`` on every tensor the loss depends on, including inputs, which is
what gradient-sign attacks need.

Tapes are rebuilt per forward pass; outside a tape all ops are plain numpy
(zero recording overhead), which is the inference path.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import ContractError, DimensionError

_TAPE_STACK: list["Tape"] = []

Array = np.ndarray


def _asarray(values) -> Array:
    arr = np.asarray(values, dtype=np.float64)
    return arr


class Tensor:
    """n-d float64 array with an optional gradient slot.

    ``data`` is always C-contiguous float64 (row-major).  ``grad`` is None
    until a backward pass reaches this tensor.  ``node_id`` indexes the node
    on the tape that produced (or registered) this tensor.
    """

    __slots__ = ("data", "grad", "node_id", "_tape", "_velocity")

    def __init__(self, values):
        self.data = np.ascontiguousarray(_asarray(values))
        self.grad: Array | None = None
        self.node_id: int | None = None
        self._tape: "Tape" | None = None
        self._velocity: Array | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def copy(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, data={self.data!r})"

    # operator sugar; scalars and arrays are wrapped as constant tensors
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
        return mul(self, _wrap(-1.0))

    def __matmul__(self, other):
        return matmul(self, _wrap(other))


def _wrap(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


class _Node:
    """One tape entry: op kind, input node ids, and the backward rule.

    ``backward`` maps the output gradient to a list of gradients aligned
    with ``input_ids`` (None where an input needs no gradient).
    """

    __slots__ = ("kind", "input_ids", "backward", "tensor")

    def __init__(self, kind: str, input_ids: list[int],
                 backward: Callable[[Array], list[Array | None]] | None,
                 tensor: Tensor):
        self.kind = kind
        self.input_ids = input_ids
        self.backward = backward
        self.tensor = tensor


class Tape:
    """Append-only record of one forward pass, in topological order."""

    def __init__(self):
        self.nodes: list[_Node] = []

    def __enter__(self) -> "Tape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        popped = _TAPE_STACK.pop()
        assert popped is self
        return False

    def _register_leaf(self, t: Tensor) -> int:
        node_id = len(self.nodes)
        self.nodes.append(_Node("leaf", [], None, t))
        t.node_id = node_id
        t._tape = self
        return node_id

    def _ensure_id(self, t: Tensor) -> int:
        if t._tape is self and t.node_id is not None:
            return t.node_id
        return self._register_leaf(t)

    def record(self, kind: str, inputs: Sequence[Tensor], out: Tensor,
               backward: Callable[[Array], list[Array | None]]) -> None:
        ids = [self._ensure_id(t) for t in inputs]
        out.node_id = len(self.nodes)
        out._tape = self
        self.nodes.append(_Node(kind, ids, backward, out))


def active_tape() -> Tape | None:
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def _emit(kind: str, inputs: Sequence[Tensor], out: Tensor,
          backward: Callable[[Array], list[Array | None]]) -> Tensor:
    tape = active_tape()
    if tape is not None:
        tape.record(kind, inputs, out, backward)
    return out


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum a broadcast gradient back down to ``shape``."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


# ---------------------------------------------------------------------------
# elementwise arithmetic

def add(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data + b.data)
    return _emit("add", (a, b), out, lambda g: [
        _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)])


def sub(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data - b.data)
    return _emit("sub", (a, b), out, lambda g: [
        _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)])


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data * b.data)
    return _emit("mul", (a, b), out, lambda g: [
        _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)])


def exp(x: Tensor) -> Tensor:
    val = np.exp(x.data)
    out = Tensor(val)
    return _emit("exp", (x,), out, lambda g: [g * val])


def log_guarded(x: Tensor, eps: float = 1e-12) -> Tensor:
    """log(x + eps); the guard keeps cross-entropy finite at p == 0."""
    shifted = x.data + eps
    out = Tensor(np.log(shifted))
    return _emit("log", (x,), out, lambda g: [g / shifted])


# ---------------------------------------------------------------------------
# linear algebra

def matmul(a: Tensor, b: Tensor) -> Tensor:
    """2-D matrix product with the standard transpose backward rules."""
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"matmul: incompatible shapes {a.shape} and {b.shape}")
    out = Tensor(a.data @ b.data)
    return _emit("matmul", (a, b), out, lambda g: [
        g @ b.data.T, a.data.T @ g])


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    out = Tensor(x.data.reshape(shape))
    return _emit("reshape", (x,), out, lambda g: [g.reshape(x.shape)])


def conv2d(x: Tensor, kernels: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """Strided 2-D cross-correlation with zero padding.

    Accepts (c_in, h, w) or batched (batch, c_in, h, w) input; kernels are
    (c_out, c_in, k, k).  Output spatial side is floor((side+2p-k)/stride)+1.
    """
    if stride < 1:
        raise ContractError(f"conv2d: stride must be >= 1, got {stride}")
    if padding < 0:
        raise ContractError(f"conv2d: padding must be >= 0, got {padding}")
    single = x.data.ndim == 3
    if single:
        x = reshape(x, (1,) + x.shape)
    if x.data.ndim != 4 or kernels.data.ndim != 4:
        raise DimensionError(
            f"conv2d: need 3/4-d input and 4-d kernels, got {x.shape} and {kernels.shape}")
    batch, c_in, h, w = x.shape
    c_out, kc_in, kh, kw = kernels.shape
    if kc_in != c_in:
        raise DimensionError(
            f"conv2d: kernel channels {kc_in} != input channels {c_in}")
    hp, wp = h + 2 * padding, w + 2 * padding
    if kh > hp or kw > wp:
        raise DimensionError(
            f"conv2d: kernel {kh}x{kw} larger than padded input {hp}x{wp}")
    h_out = (hp - kh) // stride + 1
    w_out = (wp - kw) // stride + 1

    xp = x.data
    if padding:
        xp = np.pad(xp, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    out_val = np.zeros((batch, c_out, h_out, w_out))
    for di in range(kh):
        for dj in range(kw):
            window = xp[:, :, di:di + stride * h_out:stride,
                        dj:dj + stride * w_out:stride]
            # (b,c_in,ho,wo) x (c_out,c_in) -> (b,ho,wo,c_out)
            out_val += np.tensordot(window, kernels.data[:, :, di, dj],
                                    axes=([1], [1])).transpose(0, 3, 1, 2)

    def backward(g: Array) -> list[Array | None]:
        dxp = np.zeros_like(xp)
        dk = np.zeros_like(kernels.data)
        for di in range(kh):
            for dj in range(kw):
                window = xp[:, :, di:di + stride * h_out:stride,
                            dj:dj + stride * w_out:stride]
                # dK[o,c,di,dj] = sum_{b,i,j} g[b,o,i,j] * window[b,c,i,j]
                dk[:, :, di, dj] = np.tensordot(g, window, axes=([0, 2, 3], [0, 2, 3]))
                # dX window += g (b,o,i,j) x K[o,c] -> (b,i,j,c)
                contrib = np.tensordot(g, kernels.data[:, :, di, dj],
                                       axes=([1], [0])).transpose(0, 3, 1, 2)
                dxp[:, :, di:di + stride * h_out:stride,
                    dj:dj + stride * w_out:stride] += contrib
        if padding:
            dx = dxp[:, :, padding:padding + h, padding:padding + w]
        else:
            dx = dxp
        return [dx, dk]

    out = _emit("conv2d", (x, kernels), Tensor(out_val), backward)
    if single:
        out = reshape(out, out.shape[1:])
    return out


# ---------------------------------------------------------------------------
# activations / softmax

def _sigmoid(v: Array) -> Array:
    # piecewise form avoids exp overflow on large |v|
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


def apply_activation(x: Tensor, kind: str) -> Tensor:
    """Elementwise relu / sigmoid / tanh."""
    if kind == "relu":
        val = np.maximum(x.data, 0.0)
        return _emit("relu", (x,), Tensor(val),
                     lambda g: [g * (x.data > 0)])
    if kind == "sigmoid":
        val = _sigmoid(x.data)
        return _emit("sigmoid", (x,), Tensor(val),
                     lambda g: [g * val * (1.0 - val)])
    if kind == "tanh":
        val = np.tanh(x.data)
        return _emit("tanh", (x,), Tensor(val),
                     lambda g: [g * (1.0 - val * val)])
    raise ContractError(f"unknown activation kind: {kind!r}")


def relu(x: Tensor) -> Tensor:
    return apply_activation(x, "relu")


def sigmoid(x: Tensor) -> Tensor:
    return apply_activation(x, "sigmoid")


def tanh(x: Tensor) -> Tensor:
    return apply_activation(x, "tanh")


def softmax(x: Tensor) -> Tensor:
    """Stable softmax over the last axis (max-subtraction mandatory)."""
    if x.data.ndim == 0:
        raise DimensionError("softmax: needs at least one axis")
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    val = e / e.sum(axis=-1, keepdims=True)

    def backward(g: Array) -> list[Array | None]:
        dot = (g * val).sum(axis=-1, keepdims=True)
        return [val * (g - dot)]

    return _emit("softmax", (x,), Tensor(val), backward)


# ---------------------------------------------------------------------------
# reductions / losses

def tsum(x: Tensor) -> Tensor:
    out = Tensor(x.data.sum())
    return _emit("sum", (x,), out, lambda g: [np.broadcast_to(g, x.shape).copy()])


def tmean(x: Tensor) -> Tensor:
    n = x.size
    out = Tensor(x.data.mean())
    return _emit("mean", (x,), out,
                 lambda g: [np.broadcast_to(g / n, x.shape).copy()])


def compute_loss(pred: Tensor, target: Tensor, kind: str) -> Tensor:
    """Scalar training loss.

    cross_entropy takes probabilities and a one-hot target: -sum(t*log(p+1e-12)),
    averaged over the batch axis when inputs are 2-d.  mse is the mean of the
    squared elementwise difference.
    """
    if pred.shape != target.shape:
        raise DimensionError(
            f"compute_loss: shapes differ {pred.shape} vs {target.shape}")
    if kind == "mse":
        diff = sub(pred, target)
        return tmean(mul(diff, diff))
    if kind == "cross_entropy":
        per_elem = mul(target, log_guarded(pred))
        total = tsum(per_elem)
        batch = pred.shape[0] if pred.data.ndim == 2 else 1
        return mul(total, _wrap(-1.0 / batch))
    raise ContractError(f"unknown loss kind: {kind!r}")


def backward(loss: Tensor) -> None:
    """Populate ``grad`` on every tape ancestor of a scalar loss."""
    if loss.size != 1:
        raise ContractError(f"backward: loss must be scalar, got shape {loss.shape}")
    tape = loss._tape
    if tape is None or loss.node_id is None:
        raise ContractError("backward: loss was not produced on an active tape")
    grads: list[Array | None] = [None] * len(tape.nodes)
    grads[loss.node_id] = np.ones_like(loss.data)
    for node_id in range(loss.node_id, -1, -1):
        g = grads[node_id]
        if g is None:
            continue
        node = tape.nodes[node_id]
        if node.backward is not None:
            for input_id, contrib in zip(node.input_ids, node.backward(g)):
                if contrib is None:
                    continue
                if grads[input_id] is None:
                    grads[input_id] = contrib.astype(np.float64, copy=True)
                else:
                    grads[input_id] = grads[input_id] + contrib
    for node, g in zip(tape.nodes, grads):
        if g is not None:
            node.tensor.grad = g


def sgd_step(params: Sequence[Tensor], lr: float, momentum: float = 0.0) -> None:
    """Momentum SGD update in place; clears grads afterwards."""
    if lr <= 0:
        raise ContractError(f"sgd_step: lr must be > 0, got {lr}")
    if not 0.0 <= momentum < 1.0:
        raise ContractError(f"sgd_step: momentum must be in [0,1), got {momentum}")
    for p in params:
        if p.grad is None:
            raise ContractError("sgd_step: parameter has no gradient")
    for p in params:
        if p._velocity is None:
            p._velocity = np.zeros_like(p.data)
        p._velocity = momentum * p._velocity + p.grad
        p.data -= lr * p._velocity
        p.grad = None


def finite_diff_gradient(f: Callable[[Tensor], float], x: Tensor,
                         h: float = 1e-5) -> Array:
    """Central-difference gradient of a scalar function, element by element."""
    if h <= 0:
        raise ContractError(f"finite_diff_gradient: h must be > 0, got {h}")
    base = x.data.copy()
    grad = np.zeros_like(base)
    flat = grad.reshape(-1)
    for i in range(base.size):
        bump = np.zeros_like(base).reshape(-1)
        bump[i] = h
        bump = bump.reshape(base.shape)
        up = f(Tensor(base + bump))
        down = f(Tensor(base - bump))
        flat[i] = (up - down) / (2.0 * h)
    return grad


def clamp01(values: Array) -> Array:
    """Inference-side clamp into the valid pixel range (not differentiated)."""
    return np.clip(values, 0.0, 1.0)
