"""Reverse-mode automatic differentiation over dense float64 numpy arrays.

A ``Var`` wraps an ndarray value plus the bookkeeping needed to replay the
chain rule backwards: the parent nodes it was computed from and a closure
that scatters its gradient into theirs.  Graphs are built functionally (every
op returns a fresh node), differentiated once via ``backward``, and then
discarded.  One graph belongs to one thread; distinct graphs are independent.
"""

import numpy as np

__all__ = [
    "Var", "backward", "matmul", "add", "mul", "sub", "div", "neg",
    "power", "sqrt", "exp", "vsum", "transpose", "reshape", "maximum",
    "leaky_relu", "sigmoid", "take_per_row", "conv2d", "conv_transpose2d",
]


def _unbroadcast(grad, shape):
    """Reduce a broadcasted gradient back to the original operand shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


class Var:
    """Node in the differentiation graph: value, gradient, provenance."""

    __slots__ = ("data", "grad", "_parents", "_backward")

    def __init__(self, data, _parents=(), _backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Var(shape={self.data.shape})"

    # -- elementwise arithmetic ------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return neg(self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return add(neg(self), other)

    def __truediv__(self, other):
        return div(self, other)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        x = self

        def bwd(g):
            gx = np.zeros_like(x.data)
            gx[key] += g
            return (gx,)

        return Var(x.data[key], (x,), bwd)

    def sum(self, axis=None, keepdims=False):
        return vsum(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        return reshape(self, *shape)

    @property
    def T(self):
        return transpose(self)

    def item(self):
        return float(self.data)

    def backward(self):
        backward(self)


def _as_var(x):
    return x if isinstance(x, Var) else Var(np.asarray(x, dtype=np.float64))


def add(a, b):
    a, b = _as_var(a), _as_var(b)
    out_data = a.data + b.data

    def bwd(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return Var(out_data, (a, b), bwd)


def mul(a, b):
    a, b = _as_var(a), _as_var(b)

    def bwd(g):
        return (_unbroadcast(g * b.data, a.data.shape),
                _unbroadcast(g * a.data, b.data.shape))

    return Var(a.data * b.data, (a, b), bwd)


def neg(a):
    a = _as_var(a)
    return Var(-a.data, (a,), lambda g: (-g,))


def sub(a, b):
    return add(a, neg(b))


def div(a, b):
    a, b = _as_var(a), _as_var(b)

    def bwd(g):
        return (_unbroadcast(g / b.data, a.data.shape),
                _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

    return Var(a.data / b.data, (a, b), bwd)


def power(a, exponent):
    a = _as_var(a)
    e = float(exponent)

    def bwd(g):
        return (g * e * a.data ** (e - 1.0),)

    return Var(a.data ** e, (a,), bwd)


def sqrt(a):
    a = _as_var(a)
    root = np.sqrt(a.data)

    def bwd(g):
        return (g * 0.5 / root,)

    return Var(root, (a,), bwd)


def exp(a):
    a = _as_var(a)
    ex = np.exp(a.data)
    return Var(ex, (a,), lambda g: (g * ex,))


def maximum(a, floor):
    """Elementwise max against a constant; gradient passes only where a wins."""
    a = _as_var(a)
    floor = np.asarray(floor, dtype=np.float64)
    mask = (a.data > floor).astype(np.float64)
    return Var(np.maximum(a.data, floor), (a,), lambda g: (g * mask,))


def vsum(a, axis=None, keepdims=False):
    a = _as_var(a)
    out_data = a.data.sum(axis=axis, keepdims=keepdims)

    def bwd(g):
        if axis is None:
            return (np.broadcast_to(g, a.data.shape).copy(),)
        gg = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(gg, a.data.shape).copy(),)

    return Var(out_data, (a,), bwd)


def transpose(a):
    a = _as_var(a)
    return Var(a.data.T, (a,), lambda g: (g.T,))


def reshape(a, *shape):
    a = _as_var(a)
    if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
        shape = tuple(shape[0])
    old = a.data.shape
    return Var(a.data.reshape(shape), (a,), lambda g: (g.reshape(old),))


def matmul(a, b):
    """Matrix product; inner extents must agree."""
    a, b = _as_var(a), _as_var(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got {a.data.shape} @ {b.data.shape}")
    if a.data.shape[1] != b.data.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.data.shape} @ {b.data.shape}")

    def bwd(g):
        return g @ b.data.T, a.data.T @ g

    return Var(a.data @ b.data, (a, b), bwd)


def leaky_relu(a, slope=0.2):
    a = _as_var(a)
    scale = np.where(a.data > 0, 1.0, slope)
    return Var(a.data * scale, (a,), lambda g: (g * scale,))


def sigmoid(a):
    a = _as_var(a)
    # split by sign for overflow-free evaluation
    s = np.empty_like(a.data)
    pos = a.data >= 0
    s[pos] = 1.0 / (1.0 + np.exp(-a.data[pos]))
    ez = np.exp(a.data[~pos])
    s[~pos] = ez / (1.0 + ez)
    return Var(s, (a,), lambda g: (g * s * (1.0 - s),))


def take_per_row(a, idx):
    """Pick one column per row: out[i] = a[i, idx[i]]."""
    a = _as_var(a)
    idx = np.asarray(idx, dtype=np.intp)
    rows = np.arange(a.data.shape[0])

    def bwd(g):
        gx = np.zeros_like(a.data)
        np.add.at(gx, (rows, idx), g)
        return (gx,)

    return Var(a.data[rows, idx], (a,), bwd)


# -- convolution primitives (im2col layout) ------------------------------

def _conv_out_size(n, k, stride, pad):
    return (n + 2 * pad - k) // stride + 1


def _im2col(x, kh, kw, stride, pad):
    b, c, h, w = x.shape
    oh = _conv_out_size(h, kh, stride, pad)
    ow = _conv_out_size(w, kw, stride, pad)
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    cols = np.empty((b, c, kh, kw, oh, ow), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = xp[:, :, i:i + stride * oh:stride, j:j + stride * ow:stride]
    return cols.reshape(b, c * kh * kw, oh * ow), oh, ow


def _col2im(cols, xshape, kh, kw, stride, pad):
    b, c, h, w = xshape
    oh = _conv_out_size(h, kh, stride, pad)
    ow = _conv_out_size(w, kw, stride, pad)
    cols = cols.reshape(b, c, kh, kw, oh, ow)
    xp = np.zeros((b, c, h + 2 * pad, w + 2 * pad), dtype=cols.dtype)
    for i in range(kh):
        for j in range(kw):
            xp[:, :, i:i + stride * oh:stride, j:j + stride * ow:stride] += cols[:, :, i, j]
    return xp[:, :, pad:pad + h, pad:pad + w] if pad else xp


def conv2d(x, w, stride=1, pad=0):
    """Cross-correlation of x:(b,cin,h,w) with w:(cout,cin,kh,kw)."""
    x, w = _as_var(x), _as_var(w)
    b, cin, h, hw = x.data.shape
    cout, cin_w, kh, kw = w.data.shape
    if cin != cin_w:
        raise ValueError(f"conv2d channel mismatch: input {cin}, weight {cin_w}")
    cols, oh, ow = _im2col(x.data, kh, kw, stride, pad)
    w2 = w.data.reshape(cout, cin * kh * kw)
    out = (w2[None] @ cols).reshape(b, cout, oh, ow)

    def bwd(g):
        g2 = g.reshape(b, cout, oh * ow)
        gw = np.einsum("bol,bkl->ok", g2, cols).reshape(w.data.shape)
        gcols = w2.T[None] @ g2
        gx = _col2im(gcols, x.data.shape, kh, kw, stride, pad)
        return gx, gw

    return Var(out, (x, w), bwd)


def conv_transpose2d(x, w, stride=1, pad=0):
    """Transposed convolution (adjoint of conv2d); w:(cin,cout,kh,kw)."""
    x, w = _as_var(x), _as_var(w)
    b, cin, h, hw = x.data.shape
    cin_w, cout, kh, kw = w.data.shape
    if cin != cin_w:
        raise ValueError(f"conv_transpose2d channel mismatch: input {cin}, weight {cin_w}")
    oh = (h - 1) * stride - 2 * pad + kh
    ow = (hw - 1) * stride - 2 * pad + kw
    x2 = x.data.reshape(b, cin, h * hw)
    w2 = w.data.reshape(cin, cout * kh * kw)
    cols = w2.T[None] @ x2
    out = _col2im(cols, (b, cout, oh, ow), kh, kw, stride, pad)

    def bwd(g):
        gcols, _, _ = _im2col(g, kh, kw, stride, pad)
        gx = (w2[None] @ gcols).reshape(x.data.shape)
        gw = np.einsum("bch,bkh->ck", x2, gcols).reshape(w.data.shape)
        return gx, gw

    return Var(out, (x, w), bwd)


# -- backward pass --------------------------------------------------------

def backward(loss):
    """Populate ``grad`` on every node reachable from ``loss``.

    The loss must be scalar.  Each node is visited exactly once, in reverse
    topological order; gradients accumulate across shared subexpressions.
    """
    if not isinstance(loss, Var):
        raise TypeError("backward expects a Var")
    if loss.data.size != 1:
        raise ValueError(f"loss must be scalar, got shape {loss.data.shape}")

    topo = []
    state = {}  # id -> 1 while on stack, 2 when done
    stack = [(loss, iter(loss._parents))]
    state[id(loss)] = 1
    while stack:
        node, it = stack[-1]
        advanced = False
        for parent in it:
            mark = state.get(id(parent), 0)
            if mark == 1:
                raise ValueError("differentiation graph contains a cycle")
            if mark == 0:
                state[id(parent)] = 1
                stack.append((parent, iter(parent._parents)))
                advanced = True
                break
        if not advanced:
            state[id(node)] = 2
            topo.append(node)
            stack.pop()

    for node in topo:
        node.grad = np.zeros_like(node.data)
    loss.grad = np.ones_like(loss.data)
    for node in reversed(topo):
        if node._backward is None:
            continue
        for parent, g in zip(node._parents, node._backward(node.grad)):
            parent.grad += g
