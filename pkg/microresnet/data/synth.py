# -*- encoding: utf-8 -*-
"""Synthetic class-conditional images for desk-scale runs and tests.

Every class has its own background color and a square at a class-specific
grid position; seeded noise is added on top.
"""

from __future__ import division

import math
import colorsys

import numpy as np

from microresnet.autograd import Rng
from microresnet.data import Dataset


def _color(c, classes):
    return np.array(colorsys.hsv_to_rgb(c / classes, 0.8, 0.9)) * 255


def synth_dataset(n, classes, side=32, seed=0, noise=12.0):
    if n < classes:
        raise ValueError("need at least one sample per class (n=%i, classes=%i)" % (n, classes))

    rng = Rng(seed)
    labels = (np.arange(n) % classes)[rng.permutation(n)]

    grid = int(math.ceil(math.sqrt(classes)))
    cell = max(side // grid, 1)
    square = max(cell // 2, 1)

    images = np.empty((n, 3, side, side), dtype=np.float64)
    for i, c in enumerate(labels):
        color = _color(c, classes)
        images[i] = color[:, None, None]

        top = (c // grid) * cell + (cell - square) // 2
        left = (c % grid) * cell + (cell - square) // 2
        images[i, :, top:top + square, left:left + square] = (255 - color)[:, None, None]

    images += rng.normal(noise, images.shape)
    return Dataset(np.clip(np.rint(images), 0, 255).astype(np.uint8), labels, classes)
