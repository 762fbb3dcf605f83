# -*- encoding: utf-8 -*-

from __future__ import division

import math
import unittest

import numpy as np

from microresnet import autograd
from microresnet.autograd import Tensor, Tape, Rng, ShapeError, TapeError, backward, ops

from fixtures import single


def arr(values, precision="single"):
    return Tensor(np.array(values, dtype=float), precision=precision)


class TestTensor(unittest.TestCase):

    def test_precision(self):
        self.assertEqual(Tensor(np.zeros(2)).precision, "double")
        self.assertEqual(Tensor([1, 2]).precision, "single")
        self.assertEqual(Tensor.zeros((2, 3)).shape, (2, 3))
        self.assertRaises(ValueError, Tensor, [1.0], "half")

    def test_rng(self):
        a, b = Rng(42), Rng(42)
        self.assertEqual(a.random(5).tolist(), b.random(5).tolist())
        self.assertNotEqual(Rng.derive(1, 2).random(), Rng.derive(1, 3).random())

        state = a.state
        first = a.normal(1.0, 4)
        self.assertEqual(Rng.from_state(state).normal(1.0, 4).tolist(), first.tolist())


class TestTape(unittest.TestCase):

    def test_sum(self):
        x = arr([1.0, -2.0, 3.0])
        with Tape() as tape:
            tape.watch(x)
            loss = ops.reduce_sum(x)
        grads = backward(loss, tape)
        self.assertEqual(grads[x.node_id].data.tolist(), [1.0, 1.0, 1.0])

    def test_fan_out(self):
        x = arr([1.0, 2.0])
        with Tape() as tape:
            tape.watch(x)
            loss = ops.reduce_sum(ops.add(x, x))
        self.assertEqual(backward(loss, tape)[x.node_id].data.tolist(), [2.0, 2.0])

    def test_untracked_ops(self):
        # no active tape: nothing is recorded
        out = ops.relu(arr([-1.0, 1.0]))
        self.assertIsNone(out.node_id)

        x, c = arr([1.0]), arr([5.0])
        with Tape() as tape:
            tape.watch(x)
            y = ops.add(c, c)
            self.assertIsNone(y.node_id)
            loss = ops.reduce_sum(ops.mul(x, y))
        self.assertEqual(backward(loss, tape)[x.node_id].data.tolist(), [10.0])

    def test_errors(self):
        x = arr([1.0, 2.0])
        with Tape() as tape:
            tape.watch(x)
            y = ops.relu(x)
        self.assertRaises(TapeError, backward, y, tape)

        with Tape() as tape:
            tape.watch(x)
            loss = ops.reduce_sum(x)
        backward(loss, tape)
        self.assertRaises(TapeError, backward, loss, tape)
        self.assertRaises(TapeError, tape.watch, x)

        with Tape() as other:
            pass
        self.assertRaises(TapeError, backward, ops.reduce_sum(arr([1.0])), other)

    def test_replay(self):
        x, w = single(1, 2, 3, 6, 6), single(2, 4, 3, 3, 3)
        first = ops.conv2d(x, w, pad=1).data
        second = ops.conv2d(x, w, pad=1).data
        self.assertTrue(np.array_equal(first, second))

    def test_debug(self):
        autograd.set_debug(True)
        try:
            self.assertRaises(FloatingPointError, ops.add, arr([np.inf]), arr([1.0]))
        finally:
            autograd.set_debug(False)
        self.assertFalse(autograd.debug())


class TestOps(unittest.TestCase):

    def test_add(self):
        self.assertEqual(ops.add(arr([1, 2]), arr([3, 4])).data.tolist(), [4, 6])

        x = single(0, 2, 3)
        self.assertTrue(np.array_equal(ops.add(x, Tensor.zeros((2, 3))).data, x.data))

        with self.assertRaises(ShapeError) as cm:
            ops.add(Tensor.zeros((2, 3)), Tensor.zeros((3, 2)))
        self.assertIn("2x3", str(cm.exception))
        self.assertIn("3x2", str(cm.exception))

    def test_add_bias(self):
        x = Tensor.zeros((2, 3, 2, 2))
        out = ops.add(x, arr([1, 2, 3]))
        self.assertEqual(out.data[1, :, 1, 1].tolist(), [1, 2, 3])

        with Tape() as tape:
            b = tape.watch(arr([0.0, 0.0, 0.0]))
            loss = ops.reduce_sum(ops.add(x, b))
        self.assertEqual(backward(loss, tape)[b.node_id].data.tolist(), [8, 8, 8])

    def test_relu(self):
        self.assertEqual(ops.relu(arr([-1.0, 0.0, 2.5])).data.tolist(), [0.0, 0.0, 2.5])

        x = arr([-1.0, -2.0])
        with Tape() as tape:
            tape.watch(x)
            out = ops.relu(x)
            loss = ops.reduce_sum(out)
        self.assertEqual(out.data.tolist(), [0.0, 0.0])
        self.assertEqual(backward(loss, tape)[x.node_id].data.tolist(), [0.0, 0.0])

    def test_conv2d(self):
        out = ops.conv2d(arr([[[[5.0]]]]), arr([[[[1.0]]]]), arr([0.0]))
        self.assertEqual(out.data.tolist(), [[[[5.0]]]])

        x = Tensor(np.arange(1, 10, dtype=np.float32).reshape(1, 1, 3, 3))
        out = ops.conv2d(x, Tensor(np.ones((1, 1, 2, 2), np.float32)), arr([0.0]))
        self.assertEqual(out.data.reshape(-1).tolist(), [12, 16, 24, 28])

    def test_conv2d_naive(self):
        x, w, b = single(3, 2, 3, 5, 5), single(4, 4, 3, 3, 3), single(5, 4)
        out = ops.conv2d(x, w, b, stride=2, pad=1).data

        xp = np.pad(x.data, ((0, 0), (0, 0), (1, 1), (1, 1)))
        expected = np.zeros((2, 4, 3, 3))
        for n in range(2):
            for f in range(4):
                for i in range(3):
                    for j in range(3):
                        window = xp[n, :, 2 * i:2 * i + 3, 2 * j:2 * j + 3]
                        expected[n, f, i, j] = np.sum(window * w.data[f]) + b.data[f]

        self.assertEqual(out.shape, (2, 4, 3, 3))
        self.assertTrue(np.allclose(out, expected, atol=1e-4))

    def test_conv2d_errors(self):
        with self.assertRaises(ShapeError) as cm:
            ops.conv2d(Tensor.zeros((1, 1, 4, 5)), Tensor.zeros((1, 1, 2, 2)), stride=2)
        self.assertIn("width", str(cm.exception))

        with self.assertRaises(ShapeError) as cm:
            ops.conv2d(Tensor.zeros((1, 1, 5, 4)), Tensor.zeros((1, 1, 2, 2)), stride=2)
        self.assertIn("height", str(cm.exception))

        self.assertRaises(ShapeError, ops.conv2d,
                          Tensor.zeros((1, 2, 4, 4)), Tensor.zeros((1, 3, 3, 3)))

    def test_avg_pool(self):
        self.assertEqual(ops.avg_pool2d(arr([[[[1, 2], [3, 4]]]]), 2).data.tolist(), [[[[2.5]]]])

        x = Tensor(np.full((2, 3, 6, 6), 5.0, np.float32))
        self.assertTrue(np.all(ops.avg_pool2d(x, 3).data == 5.0))
        self.assertRaises(ShapeError, ops.avg_pool2d, Tensor.zeros((1, 3, 63, 63)), 2)

    def test_avg_pool_replicated(self):
        x = Tensor(Rng(2).normal(1.0, (2, 3, 8, 8)), precision="double")
        for k in (1, 2, 4, 8):
            out = ops.avg_pool2d(x, k).data
            up = np.repeat(np.repeat(out, k, axis=2), k, axis=3)

            self.assertEqual(up.shape, x.shape)
            self.assertTrue(np.allclose(ops.avg_pool2d(Tensor(up), k).data, out), k)
            windows = x.data.reshape(2, 3, 8 // k, k, 8 // k, k)
            self.assertTrue(np.allclose(up.reshape(windows.shape).mean(axis=(3, 5)),
                                        windows.mean(axis=(3, 5))), k)

    def test_max_pool(self):
        self.assertEqual(ops.max_pool2d(arr([[[[1, 2], [3, 4]]]]), 2).data.tolist(), [[[[4.0]]]])

        x = Tensor(np.full((1, 1, 2, 2), 3.0, np.float32))
        with Tape() as tape:
            tape.watch(x)
            out = ops.max_pool2d(x, 2)
            loss = ops.reduce_sum(out)
        self.assertEqual(out.data.tolist(), [[[[3.0]]]])
        grad = backward(loss, tape)[x.node_id].data
        self.assertEqual(grad.reshape(-1).tolist(), [1.0, 0.0, 0.0, 0.0])

    def test_dropout(self):
        x = single(0, 4, 8)
        self.assertIs(ops.dropout(x, 0.5, "eval"), x)
        self.assertTrue(np.array_equal(ops.dropout(x, 0.0, "train", Rng(1)).data, x.data))

        out = ops.dropout(Tensor(np.ones((100, 100), np.float32)), 0.5, "train", Rng(1)).data
        self.assertEqual(set(np.unique(out).tolist()), {0.0, 2.0})
        self.assertTrue(0.45 < np.mean(out == 0) < 0.55)

        self.assertRaises(ValueError, ops.dropout, x, 1.0, "train", Rng(1))
        self.assertRaises(ValueError, ops.dropout, x, -0.1, "eval")
        self.assertRaises(ValueError, ops.dropout, x, 0.5, "test")

    def test_dropout_expectation(self):
        ones = Tensor(np.ones(10 ** 6), precision="double")
        out = ops.dropout(ones, 0.5, "train", Rng(0)).data

        self.assertTrue(0.99 <= out.mean() <= 1.01)
        self.assertTrue(0.497 <= np.mean(out == 0) <= 0.503)

    def test_dropout_mask(self):
        x = Tensor(np.ones((3, 5)), precision="double")
        with Tape() as tape:
            tape.watch(x)
            out = ops.dropout(x, 0.5, "train", Rng(7))
            loss = ops.reduce_sum(out)
        grad = backward(loss, tape)[x.node_id].data
        self.assertTrue(np.array_equal(grad, out.data))

    def test_zero_pad_channels(self):
        x = single(0, 1, 64, 4, 4)
        self.assertIs(ops.zero_pad_channels(x, 64), x)

        out = ops.zero_pad_channels(x, 128).data
        self.assertEqual(out.shape, (1, 128, 4, 4))
        self.assertTrue(np.array_equal(out[:, :64], x.data))
        self.assertTrue(np.all(out[:, 64:] == 0))
        self.assertRaises(ShapeError, ops.zero_pad_channels, x, 32)

    def test_linear(self):
        out = ops.linear(arr([[1, 2]]), arr([[3, 4]]), arr([5]))
        self.assertEqual(out.data.tolist(), [[16.0]])

        x = single(0, 3, 7)
        same = ops.linear(x, Tensor(np.eye(7, dtype=np.float32)), Tensor.zeros((7, )))
        self.assertTrue(np.array_equal(same.data, x.data))

        self.assertEqual(ops.linear(Tensor.zeros((2, 3, 2, 2)), Tensor.zeros((5, 12)),
                                    Tensor.zeros((5, ))).shape, (2, 5))
        self.assertRaises(ShapeError, ops.linear, x, Tensor.zeros((5, 6)), Tensor.zeros((5, )))

    def test_softmax_cross_entropy(self):
        loss = ops.softmax_cross_entropy(Tensor.zeros((4, 200)), [0, 1, 2, 199])
        self.assertAlmostEqual(loss.item(), math.log(200), places=5)

        logits = np.zeros((2, 3))
        logits[0, 1] = logits[1, 2] = 100
        self.assertLess(ops.softmax_cross_entropy(Tensor(logits), [1, 2]).item(), 1e-6)

        self.assertRaises(ShapeError, ops.softmax_cross_entropy, Tensor.zeros((2, 3)), [0, 3])
        self.assertRaises(ShapeError, ops.softmax_cross_entropy, Tensor.zeros((2, 3)), [0])

    def test_softmax_gradient(self):
        logits = Tensor(np.array([[1.0, 2.0, 0.5], [0.0, -1.0, 3.0]]), precision="double")
        labels = [2, 0]
        with Tape() as tape:
            tape.watch(logits)
            loss = ops.softmax_cross_entropy(logits, labels)
        grad = backward(loss, tape)[logits.node_id].data

        p = np.exp(logits.data) / np.exp(logits.data).sum(axis=1, keepdims=True)
        p[[0, 1], labels] -= 1
        self.assertTrue(np.allclose(grad, p / 2))
