# -*- encoding: utf-8 -*-
"""Random transformation unit applied to every training image as it is loaded.

The horizontal flip comes first, then (with probability ``crop_prob``) a
uniformly placed ``crop_size`` window is cut out and rescaled back to
``out_size`` with bilinear interpolation. Everything happens on bytes,
before normalization.
"""

from __future__ import division

from collections import namedtuple

import numpy as np

from microresnet.data import DataError

Transform = namedtuple("Transform", "flip crop")


def draw_transform(cfg, side, rng):
    """Draw the random decisions for one image of size ``side``."""

    if cfg.crop_size > side:
        raise DataError("crop size %i exceeds image side %i" % (cfg.crop_size, side))

    # both uniforms are always drawn so the stream layout does not depend on cfg
    flip = rng.random() < cfg.flip_prob
    crop = rng.random() < cfg.crop_prob

    if crop:
        top = rng.integers(0, side - cfg.crop_size + 1)
        left = rng.integers(0, side - cfg.crop_size + 1)
        return Transform(flip, (top, left))
    return Transform(flip, None)


def apply_transform(img, transform, cfg):
    out = img
    if transform.flip:
        out = out[..., ::-1]
    if transform.crop is not None:
        top, left = transform.crop
        out = out[..., top:top + cfg.crop_size, left:left + cfg.crop_size]
        out = rescale_bilinear(out, cfg.out_size)
    elif out.shape[-1] != cfg.out_size or out.shape[-2] != cfg.out_size:
        out = rescale_bilinear(out, cfg.out_size)
    return np.ascontiguousarray(out)


def augment(img, cfg, rng):
    """Augment one ``C x H x W`` (or ``H x W``) byte image."""

    h, w = img.shape[-2:]
    if h != w:
        raise DataError("augmentation needs square images, got %ix%i" % (h, w))
    return apply_transform(img, draw_transform(cfg, h, rng), cfg)


def _axis(n_in, n_out):
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0, n_in - 1)
    lo = np.floor(src).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, src - lo


def rescale_bilinear(img, out_size):
    """Resample the last two axes to ``out_size`` (half-pixel centers).

    >>> rescale_bilinear(np.array([[0, 255], [0, 255]], np.uint8), 4)[0].tolist()
    [0, 64, 191, 255]
    """

    if out_size < 1:
        raise ValueError("output size must be positive, got %r" % (out_size, ))

    y0, y1, fy = _axis(img.shape[-2], out_size)
    x0, x1, fx = _axis(img.shape[-1], out_size)

    src = np.asarray(img, dtype=np.float64)
    rows = src[..., y0, :] * (1 - fy)[:, None] + src[..., y1, :] * fy[:, None]
    out = rows[..., x0] * (1 - fx) + rows[..., x1] * fx

    return np.clip(np.rint(out), 0, 255).astype(np.uint8)
