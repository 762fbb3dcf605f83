# -*- encoding: utf-8 -*-

from __future__ import division

import unittest
import os

import numpy as np

from microresnet import data
from microresnet.autograd import Rng
from microresnet.data import (AugmentConfig, Dataset, DataError, augment, batch_iterator,
                              dataset_stats, draw_transform, normalize, rescale_bilinear)

from fixtures import TemporaryDirectory, tiny_dataset


class TestAugment(unittest.TestCase):

    def setUp(self):
        self.img = tiny_dataset(1, side=64).images[0]

    def test_identity(self):
        cfg = AugmentConfig(flip_prob=0, crop_prob=0, crop_size=56, out_size=64)
        for seed in range(5):
            out = augment(self.img, cfg, Rng(seed))
            self.assertTrue(np.array_equal(out, self.img))
            self.assertEqual(out.dtype, np.uint8)

    def test_flip_involution(self):
        cfg = AugmentConfig(flip_prob=1, crop_prob=0)
        once = augment(self.img, cfg, Rng(0))
        self.assertTrue(np.array_equal(once, self.img[..., ::-1]))
        self.assertTrue(np.array_equal(augment(once, cfg, Rng(1)), self.img))

    def test_frequencies(self):
        cfg, rng = AugmentConfig(), Rng(0)
        draws = [draw_transform(cfg, 64, rng) for _ in range(10000)]

        flips = sum(t.flip for t in draws) / len(draws)
        crops = sum(t.crop is not None for t in draws) / len(draws)
        self.assertTrue(0.48 <= flips <= 0.52, flips)
        self.assertTrue(0.68 <= crops <= 0.72, crops)

        corners = [t.crop for t in draws if t.crop is not None]
        self.assertEqual(min(min(c) for c in corners), 0)
        self.assertEqual(max(max(c) for c in corners), 64 - 56)

    def test_crop_output(self):
        cfg = AugmentConfig(flip_prob=0, crop_prob=1)
        out = augment(self.img, cfg, Rng(3))
        self.assertEqual(out.shape, (3, 64, 64))

    def test_errors(self):
        cfg = AugmentConfig(crop_size=80, out_size=64)
        self.assertRaises(DataError, augment, self.img, cfg, Rng(0))
        self.assertRaises(DataError, augment, self.img[:, :, :32], AugmentConfig(), Rng(0))
        self.assertRaises(ValueError, AugmentConfig, flip_prob=1.5)

    def test_for_side(self):
        cfg = AugmentConfig.for_side(32)
        self.assertEqual((cfg.crop_size, cfg.out_size), (28, 32))
        cfg = AugmentConfig.for_side(64)
        self.assertEqual((cfg.crop_size, cfg.out_size), (56, 64))


class TestRescale(unittest.TestCase):

    def test_identity(self):
        img = tiny_dataset(1, side=56).images[0]
        self.assertTrue(np.array_equal(rescale_bilinear(img, 56), img))

    def test_constant(self):
        img = np.full((3, 7, 7), 42, np.uint8)
        for size in (3, 7, 20):
            self.assertTrue(np.all(rescale_bilinear(img, size) == 42))

    def test_gradient(self):
        out = rescale_bilinear(np.array([[0, 255], [0, 255]], np.uint8), 4).astype(int)
        self.assertTrue(np.all(np.diff(out, axis=1) >= 0))
        self.assertTrue(np.all(out == out[0]))


class TestNormalize(unittest.TestCase):

    def test_values(self):
        one = normalize(np.full((1, 1, 1), 255, np.uint8), [0.0], [1.0])
        self.assertEqual(one.tolist(), [[[1.0]]])

        half = normalize(np.full((1, 1, 1), 128, np.uint8), [0.5], [0.5])
        self.assertAlmostEqual(float(half[0, 0, 0]), 0.0, delta=0.01)

        self.assertRaises(DataError, normalize, np.zeros((1, 1, 1), np.uint8), [0.0], [0.0])

    def test_dataset_stats(self):
        ds = tiny_dataset(50, side=8)
        mean, std = dataset_stats(ds)
        x = normalize(ds.images, mean, std).astype(np.float64)

        for c in range(3):
            self.assertLess(abs(x[:, c].mean()), 1e-3)
            self.assertTrue(0.999 <= x[:, c].std() <= 1.001)

    def test_constant_channel(self):
        ds = Dataset(np.full((4, 3, 2, 2), 9, np.uint8), [0, 1, 0, 1], 2)
        mean, std = dataset_stats(ds)
        self.assertEqual(std.tolist(), [1.0, 1.0, 1.0])
        self.assertTrue(np.allclose(normalize(ds.images, mean, std), 0))

    def test_stats_in_chunks(self):
        ds = tiny_dataset(10, side=8)
        x = ds.images.astype(np.float64) / 255.0

        for chunk in (1, 3, 10, 64):
            mean, std = dataset_stats(ds, chunk=chunk)
            self.assertTrue(np.allclose(mean, x.mean(axis=(0, 2, 3)), rtol=0, atol=1e-12), chunk)
            self.assertTrue(np.allclose(std, x.std(axis=(0, 2, 3)), rtol=0, atol=1e-9), chunk)


class TestBatches(unittest.TestCase):

    def setUp(self):
        images = tiny_dataset(10, side=8).images
        self.ds = Dataset(images, np.arange(10), 10)

    def test_sizes(self):
        batches = list(batch_iterator(self.ds, 4, shuffle=True, seed=3))
        self.assertEqual([len(b.y) for b in batches], [4, 4, 2])
        self.assertEqual(sorted(np.concatenate([b.y for b in batches]).tolist()), list(range(10)))
        self.assertEqual(batches[0].x.shape, (4, 3, 8, 8))
        self.assertEqual(batches[0].x.precision, "single")

    def test_no_shuffle(self):
        batches = batch_iterator(self.ds, 4, shuffle=False)
        self.assertEqual(np.concatenate([b.y for b in batches]).tolist(), list(range(10)))

    def test_determinism(self):
        cfg = AugmentConfig.for_side(8)

        def stream(seed, epoch=1):
            return [(b.x.data.tobytes(), b.y.tolist())
                    for b in batch_iterator(self.ds, 3, True, cfg, seed, epoch)]

        self.assertEqual(stream(5), stream(5))
        self.assertNotEqual(stream(5), stream(6))
        self.assertNotEqual(stream(5, epoch=1), stream(5, epoch=2))

    def test_workers(self):
        cfg = AugmentConfig.for_side(8)

        def batches(workers):
            return sorted((b.y.tolist(), b.x.data.tobytes())
                          for b in batch_iterator(self.ds, 3, True, cfg, 1, 1, workers=workers))

        self.assertEqual(batches(1), batches(3))

    def test_empty(self):
        empty = Dataset(np.zeros((0, 3, 4, 4), np.uint8), [], 2)
        self.assertRaises(DataError, batch_iterator, empty, 4)
        self.assertRaises(ValueError, batch_iterator, self.ds, 0)

    def test_take(self):
        self.assertEqual(len(self.ds.take(4)), 4)
        self.assertEqual(self.ds.take(4).labels.tolist(), [0, 1, 2, 3])


class TestDataset(unittest.TestCase):

    def test_validation(self):
        self.assertRaises(DataError, Dataset, np.zeros((2, 4, 4), np.uint8), [0, 1], 2)
        self.assertRaises(DataError, Dataset, np.zeros((2, 1, 4, 4), np.uint8), [0], 2)
        self.assertRaises(DataError, Dataset, np.zeros((2, 1, 4, 4), np.uint8), [0, 2], 2)


class TestFormats(unittest.TestCase):

    def test_cifar(self):
        with TemporaryDirectory() as path:
            pixels = np.arange(2 * 3072).reshape(2, 3072) % 256
            records = np.concatenate([[[3], [7]], pixels], axis=1).astype(np.uint8)
            with open(os.path.join(path, "data_batch_1.bin"), "wb") as fp:
                fp.write(records.tobytes())

            ds = data.load_cifar10_bin(os.path.join(path, "data_batch_1.bin"))
            self.assertEqual(len(ds), 2)
            self.assertEqual(ds.labels.tolist(), [3, 7])
            self.assertEqual(ds.class_count, 10)
            self.assertTrue(np.array_equal(ds.images[1].reshape(-1), pixels[1]))

            with open(os.path.join(path, "truncated.bin"), "wb") as fp:
                fp.write(records.tobytes()[:-5])
            self.assertRaises(DataError, data.load_cifar10_bin,
                              os.path.join(path, "truncated.bin"))

            records[0, 0] = 12
            with open(os.path.join(path, "label.bin"), "wb") as fp:
                fp.write(records.tobytes())
            self.assertRaises(DataError, data.load_cifar10_bin, os.path.join(path, "label.bin"))

    def test_cifar_batch_file(self):
        path = os.environ.get("CIFAR10_BATCH")
        if not path or not os.path.isfile(path):
            self.skipTest("set CIFAR10_BATCH to a data_batch_*.bin file")
        self.assertEqual(len(data.load_cifar10_bin(path)), 10000)

    def test_raw(self):
        with TemporaryDirectory() as path:
            with open(os.path.join(path, "meta"), "w") as fp:
                fp.write("2,3,64,64,200\n")
            with open(os.path.join(path, "images.u8"), "wb") as fp:
                fp.write(bytes(24576))
            with open(os.path.join(path, "labels.u16"), "wb") as fp:
                fp.write(b"\x05\x00\xc7\x00")

            ds = data.load_raw_dataset(path)
            self.assertEqual(len(ds), 2)
            self.assertEqual(ds.labels.tolist(), [5, 199])
            self.assertEqual(ds.image_shape, (3, 64, 64))

            with open(os.path.join(path, "images.u8"), "wb") as fp:
                fp.write(bytes(24575))
            self.assertRaises(DataError, data.load_raw_dataset, path)

    def test_raw_round_trip(self):
        ds = tiny_dataset(6, classes=3, side=5)
        with TemporaryDirectory() as path:
            data.write_raw_dataset(ds, os.path.join(path, "ds"))
            back = data.load_raw_dataset(os.path.join(path, "ds"))

        self.assertTrue(np.array_equal(back.images, ds.images))
        self.assertTrue(np.array_equal(back.labels, ds.labels))
        self.assertEqual(back.class_count, 3)

    def test_open_source(self):
        ds = data.open_source("synth:32x8")
        self.assertEqual((len(ds), ds.class_count, ds.image_shape), (32, 8, (3, 32, 32)))
        self.assertEqual(data.open_source("synth:16x4x8").image_shape, (3, 8, 8))

        for text in ("synth:32", "synth:4x8", "cifar:", "/nonexistent/dataset"):
            self.assertRaises(DataError, data.open_source, text)


class TestSynth(unittest.TestCase):

    def test_classes(self):
        ds = data.synth_dataset(32, 8, side=32, seed=0)
        self.assertEqual(sorted(set(ds.labels.tolist())), list(range(8)))
        self.assertEqual(ds.images.dtype, np.uint8)

    def test_seeded(self):
        a, b = data.synth_dataset(16, 4, 16, seed=2), data.synth_dataset(16, 4, 16, seed=2)
        self.assertTrue(np.array_equal(a.images, b.images))
        self.assertTrue(np.array_equal(a.labels, b.labels))
        self.assertFalse(np.array_equal(a.images, data.synth_dataset(16, 4, 16, seed=3).images))

    def test_too_few(self):
        self.assertRaises(ValueError, data.synth_dataset, 4, 8)
