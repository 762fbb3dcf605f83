# -*- encoding: utf-8 -*-

import logging

logger = logging.getLogger("microresnet")

from microresnet.nn.layers import (Layer, ConvLayer, LinearLayer,  # noqa: E402
                                   AvgPool, MaxPool, Dropout)
from microresnet.nn.blocks import BasicBlock, ShortcutAdapter, shortcut_adapt  # noqa: E402


class Network(object):
    """A sequential stack of layers built from an architecture description."""

    def __init__(self, layers=(), name="network"):
        self.layers = list(layers)
        self.name = name

    def forward(self, x, mode="eval", rng=None):
        for layer in self.layers:
            x = layer(x, mode, rng)
        return x

    __call__ = forward

    def named_parameters(self):
        rv = []
        for layer in self.layers:
            rv.extend((layer.name + "." + n, p) for n, p in layer.named_parameters())
        return rv

    def load_parameters(self, named):
        """Replace parameter data in place from a name -> array mapping."""

        own = self.named_parameters()
        missing = [n for n, _ in own if n not in named]
        if missing or len(named) != len(own):
            raise ValueError("parameter names do not match %s: missing %s, unexpected %s" % (
                self.name, ", ".join(missing) or "none",
                ", ".join(sorted(set(named) - set(n for n, _ in own))) or "none"))

        for n, p in own:
            if named[n].shape != p.shape:
                raise ValueError("parameter %s has shape %s, %s expects %s" % (
                    n, named[n].shape, self.name, p.shape))
            p.data[...] = named[n]

    @property
    def depth(self):
        return sum(layer.depth for layer in self.layers)

    def __len__(self):
        return len(self.layers)


def init_params(module, rng):
    """He-normal weights (std sqrt(2 / fan_in)), zero biases."""
    layers = module.layers if isinstance(module, Network) else [module]
    for layer in layers:
        layer.init(rng)


def collect_parameters(network):
    return [p for _, p in network.named_parameters()]
