# -*- encoding: utf-8 -*-
"""The residual basic block with in-block dropout, and its shortcut."""

from microresnet.autograd import ShapeError, ops
from microresnet.nn.layers import Layer, ConvLayer, _check_channels


def shortcut_adapt(x, target_channels, spatial_divisor=1):
    """Map ``x`` onto the residual branch's output shape without parameters.

    Average pooling reduces the spatial size, zero channels enlarge the depth.
    """

    if spatial_divisor not in (1, 2):
        raise ShapeError("shortcut spatial divisor must be 1 or 2, got %r" % (spatial_divisor, ))
    if target_channels < x.shape[1]:
        raise ShapeError("shortcut cannot reduce channels (%i -> %i)" % (
            x.shape[1], target_channels))

    if spatial_divisor > 1:
        x = ops.avg_pool2d(x, spatial_divisor)
    if target_channels > x.shape[1]:
        x = ops.zero_pad_channels(x, target_channels)
    return x


class ShortcutAdapter(Layer):

    def __init__(self, c_in, c_out, spatial_divisor=1, name=None):
        super(ShortcutAdapter, self).__init__(name or "shortcut")
        if c_out < c_in:
            raise ShapeError("%s cannot reduce channels (%i -> %i)" % (self.name, c_in, c_out))
        self.c_in = c_in
        self.c_out = c_out
        self.k = spatial_divisor

        if spatial_divisor > 1:
            self.mode = "reduce_then_pad"
        elif c_out > c_in:
            self.mode = "pad_channels"
        else:
            self.mode = "identity"

    def forward(self, x, mode="eval", rng=None):
        if self.mode == "identity":
            return x
        return shortcut_adapt(x, self.c_out, self.k)


class BasicBlock(Layer):
    """conv -> ReLU -> dropout -> conv, plus shortcut, then ReLU.

    Only the parameter-free ReLU follows the addition.
    """

    depth = 2

    def __init__(self, c_in, c_out, dropout_rate=0.5, name=None):
        super(BasicBlock, self).__init__(name)
        self.c_in = c_in
        self.c_out = c_out
        self.dropout_rate = dropout_rate
        self.conv1 = ConvLayer(c_in, c_out, relu=True, name=self.name + ".conv1")
        self.conv2 = ConvLayer(c_out, c_out, relu=False, name=self.name + ".conv2")
        self.shortcut = ShortcutAdapter(c_in, c_out, name=self.name + ".shortcut")

    def forward(self, x, mode="eval", rng=None):
        _check_channels(self, x, self.c_in)

        h = self.conv1(x)
        if self.dropout_rate > 0:
            h = ops.dropout(h, self.dropout_rate, mode, rng)
        h = self.conv2(h)

        return ops.relu(ops.add(h, self.shortcut(x)))

    def named_parameters(self):
        return [("conv1." + n, p) for n, p in self.conv1.named_parameters()] + \
               [("conv2." + n, p) for n, p in self.conv2.named_parameters()]

    def init(self, rng):
        self.conv1.init(rng)
        self.conv2.init(rng)
