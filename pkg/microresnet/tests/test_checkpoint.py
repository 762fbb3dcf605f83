# -*- encoding: utf-8 -*-

import unittest
import os
import struct

from collections import OrderedDict

import numpy as np

from microresnet import arch, checkpoint
from microresnet.autograd import Rng
from microresnet.checkpoint import Checkpoint, CheckpointError
from microresnet.data import synth_dataset
from microresnet.train import TrainConfig, Trainer

from fixtures import TemporaryDirectory, read


def sample(epoch=3):
    rng = Rng(4)
    rng.random(5)
    tensors = OrderedDict([
        ("0.conv.weight", rng.normal(1.0, (4, 3, 3, 3)).astype(np.float32)),
        ("0.conv.bias", np.zeros(4, np.float32)),
        ("stats.mean", np.array([0.5, 0.25, 0.125], np.float32)),
        ("scalar", np.array(7.0, np.float32)),
    ])
    buffers = OrderedDict([("0.conv.weight", np.ones((4, 3, 3, 3), np.float32))])
    return Checkpoint(u"Conv 4\nFC 2\n", tensors, buffers, epoch, rng.state)


class TestFormat(unittest.TestCase):

    def assertSame(self, a, b):
        self.assertEqual(a.arch, b.arch)
        self.assertEqual(a.epoch, b.epoch)
        self.assertEqual(a.rng_state, b.rng_state)
        for x, y in ((a.tensors, b.tensors), (a.buffers, b.buffers)):
            self.assertEqual(list(x), list(y))
            for name in x:
                self.assertEqual(np.asarray(x[name]).shape, y[name].shape, name)
                self.assertEqual(np.asarray(x[name]).tobytes(), y[name].tobytes(), name)

    def test_round_trip(self):
        ckpt = sample()
        back = checkpoint.loads(checkpoint.dumps(ckpt))

        self.assertSame(ckpt, back)
        self.assertEqual(back.tensors["scalar"].shape, ())
        self.assertEqual(back.tensors["0.conv.bias"].dtype, np.float32)

    def test_header(self):
        data = checkpoint.dumps(sample())
        self.assertEqual(data[:4], b"MRNC")
        self.assertEqual(struct.unpack("<II", data[4:12]), (1, len(u"Conv 4\nFC 2\n")))

    def test_rng_continues(self):
        ckpt = sample()
        rng = Rng.from_state(checkpoint.loads(checkpoint.dumps(ckpt)).rng_state)
        expected = Rng.from_state(ckpt.rng_state)
        self.assertEqual(rng.random(4).tolist(), expected.random(4).tolist())

    def test_file_bytes_stable(self):
        with TemporaryDirectory() as path:
            first, second = os.path.join(path, "a.ckpt"), os.path.join(path, "b.ckpt")
            checkpoint.save_checkpoint(sample(), first)
            checkpoint.save_checkpoint(checkpoint.load_checkpoint(first), second)
            self.assertEqual(read(first), read(second))

    def test_non_pcg64(self):
        state = {"bit_generator": "MT19937", "state": {}}
        self.assertRaises(ValueError, checkpoint.dumps, sample()._replace(rng_state=state))


class TestCorrupt(unittest.TestCase):

    def setUp(self):
        self.data = checkpoint.dumps(sample())

    def offset(self, data):
        with self.assertRaises(CheckpointError) as cm:
            checkpoint.loads(data)
        return cm.exception.offset

    def test_magic(self):
        self.assertEqual(self.offset(b"XXXX" + self.data[4:]), 0)
        self.assertEqual(self.offset(b""), 0)

    def test_version(self):
        self.assertEqual(self.offset(self.data[:4] + struct.pack("<I", 2) + self.data[8:]), 4)

    def test_truncated(self):
        for cut in (6, 20, len(self.data) // 2, len(self.data) - 1):
            offset = self.offset(self.data[:cut])
            self.assertTrue(0 <= offset <= cut, (cut, offset))

    def test_trailing(self):
        self.assertEqual(self.offset(self.data + b"\x00\x00"), len(self.data))

    def test_missing_file(self):
        with TemporaryDirectory() as path:
            with self.assertRaises(CheckpointError) as cm:
                checkpoint.load_checkpoint(os.path.join(path, "missing.ckpt"))
        self.assertIn("missing.ckpt", str(cm.exception))


class TestTrainerSnapshot(unittest.TestCase):

    def test_round_trip(self):
        spec = "Conv 4; Avg 2; BB 8; Avg 4; FC 4"
        ds = synth_dataset(8, 4, side=8, seed=0)
        net = arch.build_network(arch.parse_arch(spec), (3, 8, 8), Rng(0))

        trainer = Trainer(net, ds, ds, TrainConfig(epochs=1, batch_size=4), spec)
        trainer.run_epoch()
        back = checkpoint.loads(checkpoint.dumps(trainer.snapshot()))

        self.assertEqual(back.arch, spec)
        self.assertEqual(back.epoch, 1)
        self.assertEqual(list(back.buffers), [name for name, _ in net.named_parameters()])
        self.assertIn("stats.mean", back.tensors)
        self.assertTrue(np.array_equal(back.tensors["stats.std"], trainer.std))

        other = arch.build_network(arch.parse_arch(spec), (3, 8, 8), Rng(1))
        restored = Trainer(other, ds, ds, TrainConfig(epochs=2, batch_size=4), spec)
        restored.resume(back)

        self.assertEqual(restored.epoch, 1)
        for (_, a), (_, b) in zip(net.named_parameters(), other.named_parameters()):
            self.assertTrue(np.array_equal(a.data, b.data))
        for a, b in zip(trainer.state, restored.state):
            self.assertTrue(np.array_equal(a, b))
