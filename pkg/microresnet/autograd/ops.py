# -*- encoding: utf-8 -*-
"""Differentiable ops on NCHW tensors.

Every op computes its forward value with numpy and hands a closure to
:func:`microresnet.autograd.record` that maps the upstream gradient to one
gradient per input.
"""

from __future__ import division

import numpy as np

from numpy.lib.stride_tricks import sliding_window_view

from microresnet.autograd import Tensor, ShapeError, record

MODES = ("train", "eval")


def _tensor(value):
    return value if isinstance(value, Tensor) else Tensor(np.asarray(value))


def _shape(t):
    return "x".join(map(str, t.shape)) or "scalar"


def _require(cond, message, *args):
    if not cond:
        raise ShapeError(message % args)


def add(a, b):
    """Elementwise ``a + b``; ``b`` may be a per-channel bias.

    >>> add(Tensor([1., 2.]), Tensor([3., 4.])).data.tolist()
    [4.0, 6.0]
    """
    a, b = _tensor(a), _tensor(b)

    if a.shape == b.shape:
        def backward(g):
            return g, g

        return record("add", (a, b), a.data + b.data, backward)

    _require(b.ndim == 1 and a.ndim in (2, 4) and a.shape[1] == b.shape[0],
             "cannot add %s and %s: shapes differ and %s is not a per-channel bias",
             _shape(a), _shape(b), _shape(b))

    view = (1, -1) + (1, ) * (a.ndim - 2)
    axes = tuple(i for i in range(a.ndim) if i != 1)

    def backward(g):
        return g, g.sum(axis=axes)

    return record("add", (a, b), a.data + b.data.reshape(view), backward)


def mul(a, b):
    """Elementwise product; ``b`` may be a constant array or scalar."""
    a, b = _tensor(a), _tensor(b)
    _require(b.size == 1 or a.shape == b.shape,
             "cannot multiply %s and %s", _shape(a), _shape(b))

    def backward(g):
        ga, gb = g * b.data, g * a.data
        if b.shape != a.shape:
            gb = np.asarray(gb.sum()).reshape(b.shape)
        return ga, gb

    return record("mul", (a, b), a.data * b.data, backward)


def reduce_sum(x):
    x = _tensor(x)

    def backward(g):
        return np.ones_like(x.data) * g.reshape(()),

    return record("sum", (x, ), np.asarray(x.data.sum(), dtype=x.data.dtype), backward)


def relu(x):
    x = _tensor(x)
    mask = x.data > 0

    def backward(g):
        return g * mask,

    return record("relu", (x, ), np.where(mask, x.data, 0).astype(x.data.dtype), backward)


def _out_size(dim, size, k, stride, pad):
    span = size + 2 * pad - k
    _require(span >= 0, "kernel %s %i exceeds padded input %s %i", dim, k, dim, size + 2 * pad)
    _require(span % stride == 0,
             "output %s is not exact: (%i + 2*%i - %i) is not divisible by stride %i",
             dim, size, pad, k, stride)
    return span // stride + 1


def conv2d(x, w, bias=None, stride=1, pad=0):
    """Cross-correlation of ``x[N,Cin,H,W]`` with ``w[Cout,Cin,Kh,Kw]``.

    Implemented as im2col followed by a single matrix product.
    """
    x, w = _tensor(x), _tensor(w)

    _require(x.ndim == 4, "conv2d input must be NCHW, got %s", _shape(x))
    _require(w.ndim == 4, "conv2d weight must be [Cout,Cin,Kh,Kw], got %s", _shape(w))
    _require(stride >= 1, "stride must be >= 1, got %i", stride)
    _require(pad >= 0, "pad must be >= 0, got %i", pad)

    N, C, H, W = x.shape
    F, Cw, KH, KW = w.shape

    _require(C == Cw, "conv2d channel mismatch: input %s, weight %s", _shape(x), _shape(w))

    Ho = _out_size("height", H, KH, stride, pad)
    Wo = _out_size("width", W, KW, stride, pad)

    xp = np.pad(x.data, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(xp, (KH, KW), axis=(2, 3))[:, :, ::stride, ::stride]
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(N * Ho * Wo, C * KH * KW)
    wmat = w.data.reshape(F, -1)

    out = cols @ wmat.T
    inputs = (x, w)
    if bias is not None:
        bias = _tensor(bias)
        _require(bias.shape == (F, ), "conv2d bias must be [%i], got %s", F, _shape(bias))
        out += bias.data
        inputs = (x, w, bias)
    out = np.ascontiguousarray(out.reshape(N, Ho, Wo, F).transpose(0, 3, 1, 2))

    def backward(g):
        g2 = g.transpose(0, 2, 3, 1).reshape(-1, F)

        dw = (g2.T @ cols).reshape(w.shape)
        dcols = (g2 @ wmat).reshape(N, Ho, Wo, C, KH, KW)

        dxp = np.zeros(xp.shape, dtype=dcols.dtype)
        for i in range(KH):
            for j in range(KW):
                dxp[:, :, i:i + stride * Ho:stride, j:j + stride * Wo:stride] += \
                    dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        dx = dxp[:, :, pad:pad + H, pad:pad + W]

        if bias is None:
            return dx, dw
        return dx, dw, g2.sum(axis=0)

    return record("conv2d", inputs, out, backward)


def _windows(x, k, op):
    _require(x.ndim == 4, "%s input must be NCHW, got %s", op, _shape(x))
    _require(k >= 1, "%s window must be >= 1, got %i", op, k)
    N, C, H, W = x.shape
    _require(H % k == 0 and W % k == 0,
             "%s %i needs spatial size divisible by %i, got %ix%i", op, k, k, H, W)
    return N, C, H // k, W // k


def avg_pool2d(x, k):
    """Mean over non-overlapping ``k x k`` windows (stride ``k``)."""
    x = _tensor(x)
    N, C, Ho, Wo = _windows(x, k, "avg_pool2d")

    out = x.data.reshape(N, C, Ho, k, Wo, k).mean(axis=(3, 5))

    def backward(g):
        return np.repeat(np.repeat(g, k, axis=2), k, axis=3) / (k * k),

    return record("avg_pool2d", (x, ), out.astype(x.data.dtype), backward)


def max_pool2d(x, k):
    """Max over non-overlapping windows; ties go to the first element."""
    x = _tensor(x)
    N, C, Ho, Wo = _windows(x, k, "max_pool2d")

    windows = x.data.reshape(N, C, Ho, k, Wo, k).transpose(0, 1, 2, 4, 3, 5) \
                    .reshape(N, C, Ho, Wo, k * k)
    idx = windows.argmax(axis=-1)[..., None]
    out = np.take_along_axis(windows, idx, axis=-1)[..., 0]

    def backward(g):
        spread = np.zeros(windows.shape, dtype=g.dtype)
        np.put_along_axis(spread, idx, g[..., None], axis=-1)
        return spread.reshape(N, C, Ho, Wo, k, k).transpose(0, 1, 2, 4, 3, 5) \
                     .reshape(x.shape),

    return record("max_pool2d", (x, ), out, backward)


def dropout(x, rate, mode, rng=None):
    """Inverted dropout: survivors are scaled by ``1 / (1 - rate)``."""
    x = _tensor(x)

    if not 0 <= rate < 1:
        raise ValueError("dropout rate must be in [0, 1), got %r" % (rate, ))
    if mode not in MODES:
        raise ValueError("mode must be one of %s, got %r" % (", ".join(MODES), mode))

    if mode == "eval":
        return x

    if rng is None:
        raise ValueError("train-mode dropout needs an Rng")

    keep = rng.random(x.shape) >= rate
    scale = (keep / (1.0 - rate)).astype(x.data.dtype)

    def backward(g):
        return g * scale,

    return record("dropout", (x, ), x.data * scale, backward)


def zero_pad_channels(x, c_out):
    """Append zero channels up to ``c_out``."""
    x = _tensor(x)
    _require(x.ndim == 4, "zero_pad_channels input must be NCHW, got %s", _shape(x))

    N, C, H, W = x.shape
    _require(c_out >= C, "cannot pad %i channels down to %i", C, c_out)

    if c_out == C:
        return x

    out = np.zeros((N, c_out, H, W), dtype=x.data.dtype)
    out[:, :C] = x.data

    def backward(g):
        return g[:, :C],

    return record("zero_pad_channels", (x, ), out, backward)


def linear(x, w, bias):
    """``x @ w.T + bias``; NCHW inputs are flattened per sample first."""
    x, w, bias = _tensor(x), _tensor(w), _tensor(bias)

    flat = x.data.reshape(x.shape[0], -1) if x.ndim == 4 else x.data
    _require(flat.ndim == 2, "linear input must be [N,D] or NCHW, got %s", _shape(x))
    _require(w.ndim == 2 and flat.shape[1] == w.shape[1],
             "linear dimension mismatch: input %s (%i features), weight %s",
             _shape(x), flat.shape[1], _shape(w))
    _require(bias.shape == (w.shape[0], ), "linear bias must be [%i], got %s",
             w.shape[0], _shape(bias))

    def backward(g):
        return (g @ w.data).reshape(x.shape), g.T @ flat, g.sum(axis=0)

    return record("linear", (x, w, bias), flat @ w.data.T + bias.data, backward)


def softmax_cross_entropy(logits, labels):
    """Mean negative log-likelihood of ``labels`` under ``softmax(logits)``."""
    logits = _tensor(logits)
    _require(logits.ndim == 2, "logits must be [N,K], got %s", _shape(logits))

    N, K = logits.shape
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)

    _require(labels.shape[0] == N, "got %i labels for %i rows of logits", labels.shape[0], N)
    if labels.size and (labels.min() < 0 or labels.max() >= K):
        raise ShapeError("label out of range [0, %i): %i" % (
            K, labels.min() if labels.min() < 0 else labels.max()))

    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    total = exp.sum(axis=1, keepdims=True)
    logp = shifted - np.log(total)
    loss = -logp[np.arange(N), labels].mean()

    def backward(g):
        grad = exp / total
        grad[np.arange(N), labels] -= 1
        return grad * (g.reshape(()) / N),

    return record("softmax_cross_entropy", (logits, ),
                  np.asarray(loss, dtype=logits.data.dtype), backward)
