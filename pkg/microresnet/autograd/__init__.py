# -*- encoding: utf-8 -*-
"""Tensors, the recording tape and reverse-mode differentiation.

A :class:`Tensor` only takes part in differentiation once a :class:`Tape`
has *watched* it (or produced it). Ops record themselves on the tape that is
active for the current thread::

    with Tape() as tape:
        tape.watch(w)
        loss = ops.reduce_sum(ops.relu(w))
    grads = backward(loss, tape)
    grads[w.node_id]
"""

from __future__ import division

import logging
import threading

import numpy as np

logger = logging.getLogger("microresnet")

PRECISIONS = {"single": np.float32, "double": np.float64}

_local = threading.local()
_debug = False


class ShapeError(ValueError):
    pass


class TapeError(RuntimeError):
    pass


def set_debug(flag):
    """Raise on non-finite forward outputs (slow, for debugging)."""
    global _debug
    _debug = bool(flag)


def debug():
    return _debug


def _dtype(precision):
    try:
        return PRECISIONS[precision]
    except KeyError:
        raise ValueError("precision must be one of %s, not %r" % (
            ", ".join(sorted(PRECISIONS)), precision))


class Tensor(object):
    """N-dimensional array (row-major) with an optional tape handle."""

    __slots__ = ("data", "node_id", "tape")

    def __init__(self, data, precision=None):
        if isinstance(data, Tensor):
            data = data.data
        if precision is not None:
            data = np.ascontiguousarray(data, dtype=_dtype(precision))
        else:
            data = np.ascontiguousarray(data)
            if data.dtype not in (np.float32, np.float64):
                data = data.astype(np.float32)
        self.data = data
        self.node_id = None
        self.tape = None

    @classmethod
    def zeros(cls, shape, precision="single"):
        return cls(np.zeros(shape, dtype=_dtype(precision)))

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def precision(self):
        return "double" if self.data.dtype == np.float64 else "single"

    def item(self):
        return self.data.item()

    def tracked_by(self, tape):
        return tape is not None and self.tape is tape and self.node_id is not None

    def __repr__(self):
        return "Tensor(shape=%s, precision=%s%s)" % (
            "x".join(map(str, self.shape)) or "scalar", self.precision,
            "" if self.node_id is None else ", node=%i" % self.node_id)


class Node(object):

    __slots__ = ("id", "op", "inputs", "backward", "shape")

    def __init__(self, id, op, inputs, backward, shape):
        self.id = id
        self.op = op
        self.inputs = inputs
        self.backward = backward
        self.shape = shape


class Tape(object):
    """Append-only record of differentiable ops.

    Node ids increase in execution order, so walking them backwards is a
    valid reverse-topological sweep. A tape is consumed by one backward pass.
    """

    def __init__(self):
        self.nodes = []
        self.gradients = {}
        self.consumed = False
        self._outer = None

    def __enter__(self):
        self._outer = getattr(_local, "tape", None)
        _local.tape = self
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        _local.tape = self._outer
        self._outer = None

    def __len__(self):
        return len(self.nodes)

    def _append(self, op, inputs, backward, shape):
        node = Node(len(self.nodes), op, inputs, backward, shape)
        self.nodes.append(node)
        return node.id

    def watch(self, *tensors):
        """Register leaf tensors so that they receive gradients."""
        if self.consumed:
            raise TapeError("tape has already been consumed by backward")
        for t in tensors:
            t.tape = self
            t.node_id = self._append("leaf", (), None, t.shape)
        return tensors[0] if len(tensors) == 1 else tensors

    def record(self, op, inputs, out, backward):
        """Link ``out`` to the tape when any of ``inputs`` is tracked.

        ``backward(grad)`` returns one gradient (or None) per input.
        """
        ids = tuple(t.node_id if t.tracked_by(self) else None for t in inputs)
        if all(i is None for i in ids):
            return out
        out.tape = self
        out.node_id = self._append(op, ids, backward, out.shape)
        return out

    def gradient(self, tensor):
        if not tensor.tracked_by(self):
            return None
        return self.gradients.get(tensor.node_id)


def active_tape():
    return getattr(_local, "tape", None)


def record(op, inputs, out_data, backward):
    """Wrap ``out_data`` in a Tensor, recording on the active tape if any."""
    if _debug and not np.all(np.isfinite(out_data)):
        raise FloatingPointError("non-finite output from %s" % op)

    out = Tensor(out_data)
    tape = active_tape()
    if tape is None or tape.consumed:
        return out
    return tape.record(op, inputs, out, backward)


def backward(loss, tape):
    """Backpropagate from the scalar ``loss``; returns node_id -> Tensor."""

    if loss.size != 1:
        raise TapeError("backward needs a scalar loss, got shape %s" % (loss.shape, ))
    if tape.consumed:
        raise TapeError("tape has already been consumed by backward")
    if not loss.tracked_by(tape):
        raise TapeError("loss was not recorded on this tape")

    tape.consumed = True

    grads = {loss.node_id: np.ones(loss.shape, dtype=loss.data.dtype)}
    for node in reversed(tape.nodes[:loss.node_id + 1]):
        grad = grads.get(node.id)
        if grad is None or node.backward is None:
            continue
        for i, g in zip(node.inputs, node.backward(grad)):
            if i is None or g is None:
                continue
            if i in grads:
                grads[i] = grads[i] + g
            else:
                grads[i] = g

    tape.gradients = dict((k, Tensor(v)) for k, v in grads.items())
    return tape.gradients


class Rng(object):
    """Seeded PCG64 stream; identical draws for identical seeds everywhere.

    >>> Rng(3).random(2).tolist() == Rng(3).random(2).tolist()
    True
    """

    def __init__(self, seed=0, *keys):
        self.seed = seed
        self.generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([int(seed)] + [int(k) for k in keys])))

    @classmethod
    def derive(cls, seed, *keys):
        return cls(seed, *keys)

    @classmethod
    def from_state(cls, state):
        rng = cls(0)
        rng.state = state
        return rng

    @property
    def state(self):
        return self.generator.bit_generator.state

    @state.setter
    def state(self, value):
        self.generator.bit_generator.state = value

    def random(self, size=None):
        return self.generator.random(size)

    def normal(self, scale, size):
        return self.generator.normal(0.0, scale, size)

    def integers(self, low, high):
        return int(self.generator.integers(low, high))

    def permutation(self, n):
        return self.generator.permutation(n)


from microresnet.autograd.ops import (add, mul, relu, reduce_sum, conv2d,  # noqa: E402
                                      avg_pool2d, max_pool2d, dropout,
                                      zero_pad_channels, linear,
                                      softmax_cross_entropy)
from microresnet.autograd.gradcheck import grad_check  # noqa: E402
