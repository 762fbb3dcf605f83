# -*- encoding: utf-8 -*-
"""On-disk dataset formats.

CIFAR-10 binary: records of 1 label byte + 3072 image bytes (3 x 32 x 32,
channel planes, row-major).

Raw directory: ``meta`` holds ``count, channels, height, width, class_count``
as text, ``images.u8`` the images as bytes (N x C x H x W) and ``labels.u16``
one little-endian 16-bit label per image.
"""

from __future__ import division

import io
import os
import re
import logging

import numpy as np

from microresnet.data import Dataset, DataError

logger = logging.getLogger("microresnet")

CIFAR_RECORD = 1 + 3 * 32 * 32


def _read(path):
    try:
        with io.open(path, "rb") as fp:
            return fp.read()
    except (IOError, OSError) as e:
        raise DataError("unable to read %s: %s" % (path, e.strerror))


def load_cifar10_bin(paths):
    if isinstance(paths, str):
        paths = [paths]

    images, labels = [], []
    for path in paths:
        raw = _read(path)
        if len(raw) % CIFAR_RECORD:
            raise DataError("%s: length %i is not a multiple of %i" % (
                path, len(raw), CIFAR_RECORD))

        records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
        if len(records) and records[:, 0].max() > 9:
            raise DataError("%s: label byte %i out of range 0..9" % (
                path, records[:, 0].max()))

        labels.append(records[:, 0].astype(np.int64))
        images.append(records[:, 1:].reshape(-1, 3, 32, 32))

    ds = Dataset(np.concatenate(images), np.concatenate(labels), 10)
    logger.info("loaded %i CIFAR-10 images from %s", len(ds), ", ".join(paths))
    return ds


def load_raw_dataset(path):

    try:
        with io.open(os.path.join(path, "meta"), encoding="utf-8") as fp:
            meta = [int(v) for v in re.split(r"[\s,]+", fp.read().strip())]
    except (IOError, OSError) as e:
        raise DataError("unable to read %s: %s" % (os.path.join(path, "meta"), e.strerror))
    except ValueError:
        raise DataError("%s: meta must hold five integers" % path)

    if len(meta) != 5:
        raise DataError("%s: meta must hold count, channels, height, width, class_count" % path)

    count, channels, height, width, class_count = meta

    images = _read(os.path.join(path, "images.u8"))
    if len(images) != count * channels * height * width:
        raise DataError("%s: images.u8 has %i bytes, meta implies %i" % (
            path, len(images), count * channels * height * width))

    labels = _read(os.path.join(path, "labels.u16"))
    if len(labels) != 2 * count:
        raise DataError("%s: labels.u16 has %i bytes, meta implies %i" % (
            path, len(labels), 2 * count))

    labels = np.frombuffer(labels, dtype="<u2").astype(np.int64)
    if count and labels.max() >= class_count:
        raise DataError("%s: label %i >= class count %i" % (path, labels.max(), class_count))

    ds = Dataset(np.frombuffer(images, dtype=np.uint8).reshape(count, channels, height, width),
                 labels, class_count)
    logger.info("loaded %r from %s", ds, path)
    return ds


def write_raw_dataset(ds, path):
    if not os.path.isdir(path):
        os.makedirs(path)

    with io.open(os.path.join(path, "meta"), "w", encoding="utf-8") as fp:
        fp.write("%i, %i, %i, %i, %i\n" % ((len(ds), ) + tuple(ds.image_shape) + (ds.class_count, )))
    with io.open(os.path.join(path, "images.u8"), "wb") as fp:
        fp.write(ds.images.tobytes())
    with io.open(os.path.join(path, "labels.u16"), "wb") as fp:
        fp.write(ds.labels.astype("<u2").tobytes())


def open_source(text, seed=0, synth_side=32):
    """Resolve ``synth:NxK[xS]``, ``cifar:path[,path...]`` or a raw directory."""

    from microresnet.data.synth import synth_dataset

    if text.startswith("synth:"):
        m = re.match(r"^(\d+)x(\d+)(?:x(\d+))?$", text[len("synth:"):])
        if m is None:
            raise DataError("invalid synthetic source %r, expected synth:NxK or synth:NxKxS" % text)
        n, k = int(m.group(1)), int(m.group(2))
        side = int(m.group(3)) if m.group(3) else synth_side
        if n < k or k < 1:
            raise DataError("synthetic source needs N >= K >= 1, got %r" % text)
        return synth_dataset(n, k, side, seed)

    if text.startswith("cifar:"):
        paths = [p for p in text[len("cifar:"):].split(",") if p]
        if not paths:
            raise DataError("cifar: source needs at least one file")
        return load_cifar10_bin(paths)

    if not os.path.isdir(text):
        raise DataError("no such dataset directory: %s" % text)
    return load_raw_dataset(text)
