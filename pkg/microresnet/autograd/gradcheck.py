# -*- encoding: utf-8 -*-
"""Central finite-difference checks of tape gradients."""

from __future__ import division

from collections import OrderedDict

import numpy as np

from microresnet import autograd
from microresnet.autograd import Tensor, Tape, Rng, backward, ops

THRESHOLD = 1e-4


def relative_error(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-8)


def grad_check(f, inputs, eps=1e-5):
    """Return the max relative error between tape and numeric gradients.

    ``f(*inputs)`` must return a scalar Tensor and be deterministic; the
    inputs must be double precision. Each element is perturbed in place by
    ``+-eps`` and restored.
    """

    for t in inputs:
        if t.precision != "double":
            raise ValueError("grad_check needs double precision inputs, got %r" % (t, ))

    with Tape() as tape:
        tape.watch(*inputs)
        loss = f(*inputs)
    grads = backward(loss, tape)

    worst = 0.0
    for t in inputs:
        grad = grads.get(t.node_id)
        analytic = np.zeros(t.size) if grad is None else grad.data.reshape(-1)
        flat = t.data.reshape(-1)

        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            plus = f(*inputs).item()
            flat[i] = orig - eps
            minus = f(*inputs).item()
            flat[i] = orig

            worst = max(worst, relative_error(analytic[i], (plus - minus) / (2 * eps)))

    return worst


def _double(rng, *shape):
    return Tensor(rng.normal(1.0, shape), precision="double")


def _projected(op, rng, shape):
    """Reduce ``op``'s output to a scalar through a fixed random projection."""
    r = rng.normal(1.0, shape)
    return lambda *args: ops.reduce_sum(ops.mul(op(*args), r))


def _spatial(rng, k, stride=1, pad=0):
    return k - 2 * pad + stride * rng.integers(1, 4)


def case_add(rng):
    n, c = rng.integers(1, 3), rng.integers(1, 4)
    shape = (n, c, rng.integers(1, 4), rng.integers(1, 4))
    a = _double(rng, *shape)
    if rng.random() < 0.5:
        b = _double(rng, c)
    else:
        b = _double(rng, *shape)
    return _projected(ops.add, rng, shape), [a, b]


def case_relu(rng):
    shape = (rng.integers(1, 3), rng.integers(1, 4), rng.integers(2, 5), rng.integers(2, 5))
    x = rng.normal(1.0, shape)
    x[np.abs(x) < 1e-3] = 0.5
    return _projected(ops.relu, rng, shape), [Tensor(x, precision="double")]


def case_conv2d(rng, first=False):
    if first:
        n, c, h, w, f, k, stride, pad = 2, 3, 5, 5, 4, 3, 1, 1
    else:
        n, c, f = rng.integers(1, 3), rng.integers(1, 4), rng.integers(1, 5)
        k, stride, pad = (1, 3)[rng.integers(0, 2)], rng.integers(1, 3), rng.integers(0, 2)
        h, w = _spatial(rng, k, stride, pad), _spatial(rng, k, stride, pad)
        while h < 1 or w < 1:
            h, w = _spatial(rng, k, stride, pad), _spatial(rng, k, stride, pad)

    x, weight, bias = _double(rng, n, c, h, w), _double(rng, f, c, k, k), _double(rng, f)
    ho, wo = (h + 2 * pad - k) // stride + 1, (w + 2 * pad - k) // stride + 1

    op = lambda x, weight, bias: ops.conv2d(x, weight, bias, stride, pad)  # noqa: E731
    return _projected(op, rng, (n, f, ho, wo)), [x, weight, bias]


def case_avg_pool2d(rng):
    k = rng.integers(1, 4)
    n, c = rng.integers(1, 3), rng.integers(1, 3)
    h, w = k * rng.integers(1, 3), k * rng.integers(1, 3)
    op = lambda x: ops.avg_pool2d(x, k)  # noqa: E731
    return _projected(op, rng, (n, c, h // k, w // k)), [_double(rng, n, c, h, w)]


def case_max_pool2d(rng):
    k = rng.integers(1, 4)
    n, c = rng.integers(1, 3), rng.integers(1, 3)
    h, w = k * rng.integers(1, 3), k * rng.integers(1, 3)

    # distinct values, spaced far wider than eps, so the argmax never flips
    size = n * c * h * w
    x = (rng.permutation(size) + rng.random(size) * 0.5) * 0.05
    op = lambda x: ops.max_pool2d(x, k)  # noqa: E731
    return (_projected(op, rng, (n, c, h // k, w // k)),
            [Tensor(x.reshape(n, c, h, w), precision="double")])


def case_dropout(rng):
    shape = (rng.integers(1, 3), rng.integers(1, 4), rng.integers(1, 5), rng.integers(1, 5))
    rate, seed = rng.random() * 0.9, rng.integers(0, 2 ** 31)
    op = lambda x: ops.dropout(x, rate, "train", Rng(seed))  # noqa: E731
    return _projected(op, rng, shape), [_double(rng, *shape)]


def case_zero_pad_channels(rng):
    n, c, h, w = rng.integers(1, 3), rng.integers(1, 4), rng.integers(1, 4), rng.integers(1, 4)
    c_out = c + rng.integers(0, 4)
    op = lambda x: ops.zero_pad_channels(x, c_out)  # noqa: E731
    return _projected(op, rng, (n, c_out, h, w)), [_double(rng, n, c, h, w)]


def case_linear(rng, first=False):
    if first:
        n, d, k, shape = 3, 7, 5, (3, 7)
    elif rng.random() < 0.5:
        n, c, h = rng.integers(1, 4), rng.integers(1, 3), rng.integers(1, 3)
        d, k, shape = c * h * h, rng.integers(1, 6), (n, c, h, h)
    else:
        n, d, k = rng.integers(1, 4), rng.integers(1, 8), rng.integers(1, 6)
        shape = (n, d)
    return (_projected(ops.linear, rng, (n, k)),
            [_double(rng, *shape), _double(rng, k, d), _double(rng, k)])


def case_softmax_cross_entropy(rng):
    n, k = rng.integers(1, 5), rng.integers(2, 8)
    labels = [rng.integers(0, k) for _ in range(n)]
    return (lambda logits: ops.softmax_cross_entropy(logits, labels)), [_double(rng, n, k)]


def _block_margin(block, x, seed):
    """Smallest distance of the block's ReLU inputs from the kink."""
    pre = ops.conv2d(x, block.conv1.weight, block.conv1.bias, stride=1, pad=1)
    h = ops.dropout(ops.relu(pre), block.dropout_rate, "train", Rng(seed))
    out = ops.add(block.conv2(h), block.shortcut(x))
    return min(np.abs(pre.data).min(), np.abs(out.data).min())


def case_basic_block(rng):
    from microresnet.nn import BasicBlock

    c_in = rng.integers(1, 4)
    c_out = c_in + rng.integers(0, 3)
    n, h = rng.integers(1, 3), rng.integers(2, 5)
    seed = rng.integers(0, 2 ** 31)

    block = BasicBlock(c_in, c_out, name="bb")

    # redraw until every ReLU input is at least 1e-3 away from zero
    while True:
        block.init(rng)
        for conv in (block.conv1, block.conv2):
            conv.weight = Tensor(conv.weight.data, precision="double")
            conv.bias = _double(rng, c_out)
        x = _double(rng, n, c_in, h, h)
        if _block_margin(block, x, seed) >= 1e-3:
            break

    params = [p for _, p in block.named_parameters()]

    def op(x, *weights):
        return block.forward(x, "train", Rng(seed))

    return _projected(op, rng, (n, c_out, h, h)), [x] + params


CASES = OrderedDict([
    ("add", case_add),
    ("relu", case_relu),
    ("conv2d", case_conv2d),
    ("avg_pool2d", case_avg_pool2d),
    ("max_pool2d", case_max_pool2d),
    ("dropout", case_dropout),
    ("zero_pad_channels", case_zero_pad_channels),
    ("linear", case_linear),
    ("softmax_cross_entropy", case_softmax_cross_entropy),
    ("basic_block", case_basic_block),
])


def gradcheck_suite(names=None, seed=0, eps=1e-5, cases=20):
    """Run ``cases`` random checks per op, return name -> worst error."""

    names = list(CASES) if names is None else list(names)
    for name in names:
        if name not in CASES:
            raise KeyError(name)

    results = OrderedDict()
    for name in names:
        rng = Rng.derive(seed, list(CASES).index(name))
        worst = 0.0
        for i in range(cases):
            if i == 0 and name in ("conv2d", "linear"):
                f, inputs = CASES[name](rng, first=True)
            else:
                f, inputs = CASES[name](rng)
            worst = max(worst, grad_check(f, inputs, eps))
        autograd.logger.debug("gradcheck %s: %.3e over %i cases", name, worst, cases)
        results[name] = worst

    return results
