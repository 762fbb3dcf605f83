# -*- encoding: utf-8 -*-
"""Datasets, normalization and reproducible (optionally augmented) batches."""

from __future__ import division

import logging

from collections import namedtuple

import numpy as np

from microresnet.autograd import Tensor, Rng

logger = logging.getLogger("microresnet")

# stream tags for Rng.derive(seed, tag, ...)
SHUFFLE, AUGMENT = 1, 2


class DataError(ValueError):
    pass


Batch = namedtuple("Batch", "x y")


class Dataset(object):
    """``N`` byte images (N, C, H, W) with labels below ``class_count``."""

    def __init__(self, images, labels, class_count):
        images = np.ascontiguousarray(images, dtype=np.uint8)
        labels = np.asarray(labels, dtype=np.int64).reshape(-1)

        if images.ndim != 4:
            raise DataError("images must be N x C x H x W, got shape %s" % (images.shape, ))
        if len(images) != len(labels):
            raise DataError("%i images but %i labels" % (len(images), len(labels)))
        if labels.size and (labels.min() < 0 or labels.max() >= class_count):
            raise DataError("labels must be in [0, %i), got %i..%i" % (
                class_count, labels.min(), labels.max()))

        self.images = images
        self.labels = labels
        self.class_count = class_count

    def __len__(self):
        return len(self.labels)

    @property
    def image_shape(self):
        return self.images.shape[1:]

    def take(self, n):
        return Dataset(self.images[:n], self.labels[:n], self.class_count)

    def __repr__(self):
        return "<Dataset %i x %s, %i classes>" % (
            len(self), "x".join(map(str, self.image_shape)), self.class_count)


class AugmentConfig(object):
    """Online augmentation: flip, then crop-and-rescale, each with a probability."""

    def __init__(self, flip_prob=0.5, crop_prob=0.7, crop_size=56, out_size=64):
        for name, p in (("flip_prob", flip_prob), ("crop_prob", crop_prob)):
            if not 0 <= p <= 1:
                raise ValueError("%s must be in [0, 1], got %r" % (name, p))
        for name, size in (("crop_size", crop_size), ("out_size", out_size)):
            if size < 1:
                raise ValueError("%s must be positive, got %r" % (name, size))

        self.flip_prob = flip_prob
        self.crop_prob = crop_prob
        self.crop_size = crop_size
        self.out_size = out_size

    @classmethod
    def for_side(cls, side, flip_prob=0.5, crop_prob=0.7, crop_size=None, out_size=None):
        """Sizes default to 7/8 of ``side`` for the crop and ``side`` for the output."""
        return cls(flip_prob, crop_prob,
                   crop_size if crop_size is not None else side * 7 // 8,
                   out_size if out_size is not None else side)

    def __repr__(self):
        return "AugmentConfig(flip_prob=%r, crop_prob=%r, crop_size=%r, out_size=%r)" % (
            self.flip_prob, self.crop_prob, self.crop_size, self.out_size)


def normalize(img, mean, std):
    """``(byte / 255 - mean) / std`` per channel (channel axis is -3).

    >>> normalize(np.full((1, 1, 1), 255, np.uint8), [0.0], [1.0]).tolist()
    [[[1.0]]]
    """

    mean = np.asarray(mean, dtype=np.float64)
    std = np.asarray(std, dtype=np.float64)
    if np.any(std <= 0):
        raise DataError("std must be positive, got %s" % (std.tolist(), ))

    view = (-1, 1, 1)
    out = (np.asarray(img, dtype=np.float64) / 255.0 - mean.reshape(view)) / std.reshape(view)
    return out.astype(np.float32)


def dataset_stats(ds, chunk=1024):
    """Per-channel mean and std over all pixels, in the [0, 1] domain.

    Sums are accumulated over ``chunk`` images at a time, so only one chunk
    is ever widened beyond bytes. Constant channels get std 1 so that they
    normalize to zero.
    """

    n, c, h, w = ds.images.shape
    total = np.zeros(c, dtype=np.int64)
    squares = np.zeros(c, dtype=np.int64)
    for start in range(0, n, chunk):
        part = ds.images[start:start + chunk].astype(np.int64)
        total += part.sum(axis=(0, 2, 3))
        squares += (part * part).sum(axis=(0, 2, 3))

    count = float(n * h * w)
    mean = total / count
    var = np.maximum(squares / count - mean * mean, 0.0)
    std = np.sqrt(var) / 255.0
    std[std == 0] = 1.0
    return mean / 255.0, std


def _batch(ds, indices, cfg, seed, epoch, mean, std):
    if cfg is None:
        images = ds.images[indices]
    else:
        images = np.stack([augment(ds.images[i], cfg, Rng.derive(seed, AUGMENT, epoch, i))
                           for i in indices])
    return Batch(Tensor(normalize(images, mean, std)), ds.labels[indices])


def batch_iterator(ds, batch_size, shuffle=True, cfg=None, seed=0, epoch=1,
                   mean=None, std=None, workers=1):
    """Yield the batches of one epoch.

    The permutation depends only on ``(seed, epoch)`` and each sample's
    augmentation only on ``(seed, epoch, index)``; with ``workers > 1`` the
    batch order is whatever order the workers finish in.
    """

    from microresnet.core import Prefetcher

    if batch_size < 1:
        raise ValueError("batch size must be >= 1, got %r" % (batch_size, ))
    if len(ds) == 0:
        raise DataError("cannot iterate over an empty dataset")

    if mean is None or std is None:
        mean, std = dataset_stats(ds)

    if shuffle:
        order = Rng.derive(seed, SHUFFLE, epoch).permutation(len(ds))
    else:
        order = np.arange(len(ds))

    chunks = [order[i:i + batch_size] for i in range(0, len(ds), batch_size)]

    def make(indices):
        return _batch(ds, indices, cfg, seed, epoch, mean, std)

    if workers > 1:
        return iter(Prefetcher(make, chunks, workers))
    return (make(indices) for indices in chunks)


from microresnet.data.augment import (augment, draw_transform,  # noqa: E402
                                      apply_transform, rescale_bilinear)
from microresnet.data.formats import (load_cifar10_bin, load_raw_dataset,  # noqa: E402
                                      write_raw_dataset, open_source)
from microresnet.data.synth import synth_dataset  # noqa: E402
