# -*- encoding: utf-8 -*-

import os
import shutil
import tempfile

import numpy as np

from microresnet.autograd import Tensor, Rng
from microresnet.data import Dataset

MINI_RESNET = "Conv 16; Avg 2; BB 16; Avg 4; FC 8"


class TemporaryDirectory(object):

    def __enter__(self):
        self.path = tempfile.mkdtemp()
        return self.path

    def __exit__(self, exc_type, exc_val, exc_tb):
        shutil.rmtree(self.path, ignore_errors=True)


def double(rng, *shape):
    return Tensor(rng.normal(1.0, shape), precision="double")


def single(seed, *shape):
    return Tensor(Rng(seed).normal(1.0, shape).astype(np.float32))


def tiny_dataset(n=10, classes=2, side=4, channels=3, seed=0):
    images = Rng(seed).generator.integers(0, 256, size=(n, channels, side, side))
    return Dataset(images, np.arange(n) % classes, classes)


def read(path):
    with open(path, "rb") as fp:
        return fp.read()


def listdir(path):
    return sorted(os.listdir(path))
