# -*- encoding: utf-8 -*-
"""Binary PPM (P6) images, 8 bits per channel.

>>> import io
>>> img = np.zeros((3, 1, 2), np.uint8); img[0, 0, 1] = 255
>>> fp = io.BytesIO(); write_ppm(fp, img)
>>> fp.getvalue()
b'P6\\n2 1\\n255\\n\\x00\\x00\\x00\\xff\\x00\\x00'
"""

import io
import re

import numpy as np

_header = re.compile(rb"^P6\s+(\d+)\s+(\d+)\s+(\d+)\s")


def _planes(img):
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise ValueError("PPM images must be bytes, got %s" % img.dtype)
    if img.ndim == 2:
        img = np.stack([img] * 3)
    if img.ndim != 3 or img.shape[0] not in (1, 3):
        raise ValueError("expected a C x H x W image with 1 or 3 channels, got %s" % (img.shape, ))
    if img.shape[0] == 1:
        img = np.concatenate([img] * 3)
    return img


def write_ppm(target, img):
    """Write a ``C x H x W`` byte image to a path or binary file object."""

    img = _planes(img)
    data = b"P6\n%i %i\n255\n" % (img.shape[2], img.shape[1])
    data += np.ascontiguousarray(img.transpose(1, 2, 0)).tobytes()

    if hasattr(target, "write"):
        target.write(data)
    else:
        with io.open(target, "wb") as fp:
            fp.write(data)


def read_ppm(path):
    with io.open(path, "rb") as fp:
        data = fp.read()

    m = _header.match(data)
    if m is None or int(m.group(3)) != 255:
        raise ValueError("%s: not an 8-bit P6 image" % path)

    w, h = int(m.group(1)), int(m.group(2))
    pixels = np.frombuffer(data[m.end():m.end() + w * h * 3], dtype=np.uint8)
    if pixels.size != w * h * 3:
        raise ValueError("%s: truncated pixel data" % path)
    return pixels.reshape(h, w, 3).transpose(2, 0, 1).copy()
