"""Reverse-mode automatic differentiation over a small numpy operator set.

Just enough machinery for the rendering network: tensors carry their data,
an optional gradient, and a closure that scatters incoming gradients to
parents. Convolutions run as im2col matrix products (BLAS does the heavy
lifting); everything else is elementwise or a reindex. Works in float32 for
training and float64 for finite-difference verification.
"""

from __future__ import annotations

import os

import numpy as np

_DEBUG_NAN = bool(os.environ.get("NAR_DEBUG_NAN"))


def _check(data: np.ndarray) -> np.ndarray:
    if _DEBUG_NAN and not np.all(np.isfinite(data)):
        raise FloatingPointError("non-finite values in tensor")
    return data


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, parents=(), backward=None):
        self.data = _check(np.asarray(data))
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents if self.requires_grad else ()
        self._backward = backward if self.requires_grad else None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self, seed: np.ndarray | None = None) -> None:
        """Backpropagate from this tensor (scalar unless `seed` is given)."""
        if seed is None:
            if self.data.size != 1:
                raise ValueError("backward() without seed needs a scalar tensor")
            seed = np.ones_like(self.data)
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                stack.append((p, False))
        self._accumulate(np.asarray(seed, self.data.dtype))
        for node in reversed(topo):
            if node._backward is not None:
                node._backward(node.grad)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __neg__(self):
        return mul(self, -1.0)

    def __getitem__(self, key):
        out_data = self.data[key]

        def bwd(g):
            full = np.zeros_like(self.data)
            full[key] = g
            self._accumulate(full)

        return Tensor(out_data.copy(), parents=(self,), backward=bwd)

    def sum(self):
        def bwd(g):
            self._accumulate(np.broadcast_to(g, self.data.shape).astype(self.data.dtype))

        return Tensor(np.asarray(self.data.sum()), parents=(self,), backward=bwd)

    def mean(self):
        n = self.data.size

        def bwd(g):
            self._accumulate(np.broadcast_to(g / n, self.data.shape).astype(self.data.dtype))

        return Tensor(np.asarray(self.data.mean()), parents=(self,), backward=bwd)

    def reshape(self, *shape):
        old = self.data.shape

        def bwd(g):
            self._accumulate(g.reshape(old))

        return Tensor(self.data.reshape(*shape), parents=(self,), backward=bwd)

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, grad={'set' if self.grad is not None else 'none'})"


def _as_tensor(x, like: Tensor) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, like.data.dtype))


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a broadcasted gradient back to `shape`."""
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a = a if isinstance(a, Tensor) else Tensor(np.asarray(a))
    b = _as_tensor(b, a)

    def bwd(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.data.shape))

    return Tensor(a.data + b.data, parents=(a, b), backward=bwd)


def mul(a, b) -> Tensor:
    a = a if isinstance(a, Tensor) else Tensor(np.asarray(a))
    b = _as_tensor(b, a)

    def bwd(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.data.shape))

    return Tensor(a.data * b.data, parents=(a, b), backward=bwd)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    def bwd(g):
        if a.requires_grad:
            a._accumulate(g @ b.data.T)
        if b.requires_grad:
            b._accumulate(a.data.T @ g)

    return Tensor(a.data @ b.data, parents=(a, b), backward=bwd)


def elu(x: Tensor) -> Tensor:
    pos = x.data > 0
    ex = np.exp(np.minimum(x.data, 0.0))
    out = np.where(pos, x.data, ex - 1.0)

    def bwd(g):
        x._accumulate(g * np.where(pos, 1.0, ex))

    return Tensor(out.astype(x.data.dtype), parents=(x,), backward=bwd)


def sigmoid(x: Tensor) -> Tensor:
    out = 1.0 / (1.0 + np.exp(-x.data))

    def bwd(g):
        x._accumulate(g * (out * (1.0 - out)))

    return Tensor(out.astype(x.data.dtype), parents=(x,), backward=bwd)


def absolute(x: Tensor) -> Tensor:
    sign = np.sign(x.data)  # subgradient 0 at exactly 0

    def bwd(g):
        x._accumulate(g * sign)

    return Tensor(np.abs(x.data), parents=(x,), backward=bwd)


def concat(tensors: list[Tensor], axis: int = -1) -> Tensor:
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
            if t.requires_grad:
                t._accumulate(piece)

    return Tensor(
        np.concatenate([t.data for t in tensors], axis=axis),
        parents=tuple(tensors),
        backward=bwd,
    )


def avg_pool2(x: Tensor) -> Tensor:
    """2x2 average pooling over (N, H, W, C); H and W must be even."""
    n, h, w, c = x.data.shape
    if h % 2 or w % 2:
        raise ValueError(f"avg_pool2 needs even spatial dims, got {h}x{w}")
    out = x.data.reshape(n, h // 2, 2, w // 2, 2, c).mean(axis=(2, 4))

    def bwd(g):
        gx = np.broadcast_to(
            g[:, :, None, :, None, :] * np.asarray(0.25, x.data.dtype),
            (n, h // 2, 2, w // 2, 2, c),
        ).reshape(n, h, w, c)
        x._accumulate(gx.astype(x.data.dtype))

    return Tensor(out.astype(x.data.dtype), parents=(x,), backward=bwd)


def upsample_nearest2(x: Tensor) -> Tensor:
    """Nearest-neighbor 2x upsampling over (N, H, W, C)."""
    n, h, w, c = x.data.shape
    out = np.repeat(np.repeat(x.data, 2, axis=1), 2, axis=2)

    def bwd(g):
        gx = g.reshape(n, h, 2, w, 2, c).sum(axis=(2, 4))
        x._accumulate(gx)

    return Tensor(out, parents=(x,), backward=bwd)


def _im2col(xp: np.ndarray, k: int, h: int, w: int) -> np.ndarray:
    """(H+k-1, W+k-1, C) padded image -> (H*W, k*k*C) patch matrix."""
    win = np.lib.stride_tricks.sliding_window_view(xp, (k, k), axis=(0, 1))
    # (H, W, C, k, k) -> (H, W, k, k, C)
    return np.ascontiguousarray(win.transpose(0, 1, 3, 4, 2)).reshape(h * w, -1)


def conv2d(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Same-padded stride-1 convolution.

    x is (N, H, W, Cin), weight is (k, k, Cin, Cout) with odd k, bias (Cout,).
    Samples are processed one at a time to bound the im2col footprint; the
    patch matrices are recomputed in the backward pass instead of stored.
    """
    n, h, w, cin = x.data.shape
    k, k2, wcin, cout = weight.data.shape
    if k != k2 or k % 2 == 0 or wcin != cin:
        raise ValueError(f"bad conv shapes: x {x.data.shape}, w {weight.data.shape}")
    pad = k // 2
    wmat = weight.data.reshape(-1, cout)

    out = np.empty((n, h, w, cout), x.data.dtype)
    if k == 1:
        flat = x.data.reshape(-1, cin)
        out = (flat @ wmat + bias.data).reshape(n, h, w, cout)
    else:
        for i in range(n):
            xp = np.pad(x.data[i], ((pad, pad), (pad, pad), (0, 0)))
            out[i] = (_im2col(xp, k, h, w) @ wmat + bias.data).reshape(h, w, cout)

    def bwd(g):
        gmat = g.reshape(n, h * w, cout)
        if bias.requires_grad:
            bias._accumulate(gmat.sum(axis=(0, 1)))
        if k == 1:
            if weight.requires_grad:
                dw = x.data.reshape(-1, cin).T @ g.reshape(-1, cout)
                weight._accumulate(dw.reshape(weight.data.shape))
            if x.requires_grad:
                x._accumulate((g.reshape(-1, cout) @ wmat.T).reshape(x.data.shape))
            return
        dw = np.zeros_like(wmat) if weight.requires_grad else None
        dx = np.zeros_like(x.data) if x.requires_grad else None
        for i in range(n):
            xp = np.pad(x.data[i], ((pad, pad), (pad, pad), (0, 0)))
            cols = _im2col(xp, k, h, w)
            if dw is not None:
                dw += cols.T @ gmat[i]
            if dx is not None:
                dcols = (gmat[i] @ wmat.T).reshape(h, w, k, k, cin)
                dxp = np.zeros((h + 2 * pad, w + 2 * pad, cin), x.data.dtype)
                for ki in range(k):
                    for kj in range(k):
                        dxp[ki : ki + h, kj : kj + w] += dcols[:, :, ki, kj, :]
                dx[i] = dxp[pad : pad + h, pad : pad + w]
        if dw is not None:
            weight._accumulate(dw.reshape(weight.data.shape))
        if dx is not None:
            x._accumulate(dx)

    return Tensor(out, parents=(x, weight, bias), backward=bwd)
