# -*- encoding: utf-8 -*-

from __future__ import division

import math

import numpy as np

from microresnet.autograd import Tensor, ShapeError, ops


def he_normal(rng, shape, fan_in):
    return Tensor(rng.normal(math.sqrt(2.0 / fan_in), shape).astype(np.float32))


def _check_channels(layer, x, channels):
    if x.ndim != 4 or x.shape[1] != channels:
        raise ShapeError("%s expects %i input channels, got input %s" % (
            layer.name, channels, "x".join(map(str, x.shape))))


class Layer(object):
    """Parameter-free base: identity forward, nothing to initialize."""

    depth = 0

    def __init__(self, name=None):
        self.name = name or self.__class__.__name__.lower()

    def forward(self, x, mode="eval", rng=None):
        return x

    def named_parameters(self):
        return []

    def init(self, rng):
        pass

    def __call__(self, x, mode="eval", rng=None):
        return self.forward(x, mode, rng)

    def __repr__(self):
        return "<%s %s>" % (self.__class__.__name__, self.name)


class ConvLayer(Layer):
    """3x3 convolution, stride 1, pad 1, optionally followed by ReLU."""

    depth = 1

    def __init__(self, c_in, c_out, relu=True, name=None):
        super(ConvLayer, self).__init__(name)
        self.c_in = c_in
        self.c_out = c_out
        self.followed_by_relu = relu
        self.weight = Tensor.zeros((c_out, c_in, 3, 3))
        self.bias = Tensor.zeros((c_out, ))

    def forward(self, x, mode="eval", rng=None):
        _check_channels(self, x, self.c_in)
        out = ops.conv2d(x, self.weight, self.bias, stride=1, pad=1)
        if self.followed_by_relu:
            out = ops.relu(out)
        return out

    def named_parameters(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def init(self, rng):
        self.weight = he_normal(rng, self.weight.shape, self.c_in * 9)
        self.bias = Tensor.zeros(self.bias.shape)


class LinearLayer(Layer):

    depth = 1

    def __init__(self, d, k, name=None):
        super(LinearLayer, self).__init__(name)
        self.weight = Tensor.zeros((k, d))
        self.bias = Tensor.zeros((k, ))

    def forward(self, x, mode="eval", rng=None):
        return ops.linear(x, self.weight, self.bias)

    def named_parameters(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def init(self, rng):
        k, d = self.weight.shape
        self.weight = he_normal(rng, (k, d), d)
        self.bias = Tensor.zeros((k, ))


class AvgPool(Layer):

    def __init__(self, k, name=None):
        super(AvgPool, self).__init__(name)
        self.k = k

    def forward(self, x, mode="eval", rng=None):
        return ops.avg_pool2d(x, self.k)


class MaxPool(Layer):

    def __init__(self, k, name=None):
        super(MaxPool, self).__init__(name)
        self.k = k

    def forward(self, x, mode="eval", rng=None):
        return ops.max_pool2d(x, self.k)


class Dropout(Layer):

    def __init__(self, rate=0.5, name=None):
        super(Dropout, self).__init__(name)
        self.rate = rate

    def forward(self, x, mode="eval", rng=None):
        return ops.dropout(x, self.rate, mode, rng)
