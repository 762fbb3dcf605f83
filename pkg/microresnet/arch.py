# -*- encoding: utf-8 -*-
"""Architecture descriptions in the notation of the published results table.

One entry per line (or ``;``-separated), ``#`` starts a comment::

    (Conv 64) x 2
    Avg 2
    BB 128
    Dropout
    FC 200

>>> spec = parse_arch("(Conv 64) x 2; Avg 2; BB 128; FC 10")
>>> [str(entry) for entry in spec.layers]
['Conv 64', 'Conv 64', 'Avg 2', 'BB 128', 'FC 10']
>>> count_layers(spec)
5
"""

from __future__ import division

import io
import os
import re
import logging

from collections import namedtuple
from functools import reduce

from microresnet import nn
from microresnet.autograd import ShapeError
from microresnet.config import ConfigError

logger = logging.getLogger("microresnet")

KINDS = ("Conv", "BB", "Avg", "Max", "Dropout", "FC")
DEPTH = {"Conv": 1, "BB": 2, "FC": 1}

PRESETS = ("net1", "net2", "net3", "net4", "net5", "net6")
PRESET_DIR = os.path.join(os.path.dirname(__file__), "presets")

# "Number of layers" row as published; net4 and net5 disagree with the
# parameterized-layer count (19 and 13).
PUBLISHED_LAYER_COUNTS = {
    "net1": 15, "net2": 12, "net3": 17, "net4": 21, "net5": 15, "net6": 15
}

_entry = re.compile(r"^\((?P<item>[^()]*)\)\s*(?:[x×]\s*(?P<count>\S*))?$", re.I)
_item = re.compile(r"^(?P<kind>[a-z]+)\s*(?P<value>[0-9.]+)?$", re.I)


class ParseError(ValueError):

    def __init__(self, lineno, message):
        super(ParseError, self).__init__("line %i: %s" % (lineno, message))
        self.lineno = lineno


class LayerSpec(namedtuple("LayerSpec", "kind value")):

    __slots__ = ()

    def __str__(self):
        if self.kind == "Dropout":
            return "Dropout" if self.value == 0.5 else "Dropout %r" % self.value
        return "%s %i" % (self.kind, self.value)


ArchSpec = namedtuple("ArchSpec", "name layers")


def _parse_item(text, lineno):
    m = _item.match(text.strip())
    if m is None:
        raise ParseError(lineno, "cannot parse entry %r" % text.strip())

    kind = dict((k.lower(), k) for k in KINDS).get(m.group("kind").lower())
    if kind is None:
        raise ParseError(lineno, "unknown keyword %r, expected one of %s" % (
            m.group("kind"), ", ".join(KINDS)))

    value = m.group("value")
    if kind == "Dropout":
        try:
            rate = 0.5 if value is None else float(value)
        except ValueError:
            raise ParseError(lineno, "invalid dropout rate %r" % value)
        if not 0 <= rate < 1:
            raise ParseError(lineno, "dropout rate must be in [0, 1), got %r" % rate)
        return LayerSpec(kind, rate)

    if value is None:
        raise ParseError(lineno, "%s needs a size" % kind)
    if not value.isdigit() or int(value) == 0:
        raise ParseError(lineno, "%s size must be a positive integer, got %r" % (kind, value))
    return LayerSpec(kind, int(value))


def _entries(text):
    for lineno, line in enumerate(text.splitlines(), 1):
        for chunk in line.split("#", 1)[0].split(";"):
            chunk = chunk.strip()
            if chunk:
                yield lineno, chunk


def parse_arch(text, name="arch"):
    layers, fc = [], None

    for lineno, chunk in _entries(text):
        m = _entry.match(chunk)
        if m is not None:
            count = m.group("count")
            if not count:
                raise ParseError(lineno, "missing repeat count after %r" % chunk)
            if not count.isdigit():
                raise ParseError(lineno, "invalid repeat count %r" % count)
            if int(count) == 0:
                raise ParseError(lineno, "repeat count must be positive")
            item, count = _parse_item(m.group("item"), lineno), int(count)
        elif "(" in chunk or ")" in chunk:
            raise ParseError(lineno, "malformed repeat %r, expected '(item) x count'" % chunk)
        else:
            item, count = _parse_item(chunk, lineno), 1

        if fc is not None:
            raise ParseError(lineno, "FC must be the last entry (FC on line %i)" % fc)
        if item.kind == "FC":
            if count != 1:
                raise ParseError(lineno, "FC must appear exactly once")
            fc = lineno

        layers.extend([item] * count)

    if fc is None:
        raise ParseError(max([n for n, _ in _entries(text)] or [1]), "missing final FC entry")

    return ArchSpec(name, tuple(layers))


def render_arch(spec):
    """Inverse of :func:`parse_arch`; runs are written as ``(X) x n``."""
    rv = io.StringIO()
    i = 0
    while i < len(spec.layers):
        j = i
        while j < len(spec.layers) and spec.layers[j] == spec.layers[i]:
            j += 1
        if j - i > 1:
            rv.write("(%s) x %i\n" % (spec.layers[i], j - i))
        else:
            rv.write("%s\n" % (spec.layers[i], ))
        i = j
    return rv.getvalue()


def load_arch(name):
    """Preset name (net1 ... net6) or path to an architecture file."""

    if name.lower() in PRESETS:
        path = os.path.join(PRESET_DIR, name.lower() + ".arch")
        name = name.lower()
    elif os.path.isfile(name):
        path = name
        name = os.path.splitext(os.path.basename(name))[0]
    else:
        raise ConfigError("unknown architecture %r, valid presets are %s (or a file path)" % (
            name, ", ".join(PRESETS)))

    with io.open(path, encoding="utf-8") as fp:
        return parse_arch(fp.read(), name)


def count_layers(spec):
    return sum(DEPTH.get(entry.kind, 0) for entry in spec.layers)


def layer_count_discrepancy(name, computed):
    """Published layer count for ``name`` if it differs from ``computed``."""
    published = PUBLISHED_LAYER_COUNTS.get(name)
    if published is not None and published != computed:
        return published
    return None


def _fail(i, entry, message):
    raise ShapeError("entry %i (%s): %s" % (i + 1, entry, message))


def infer_shapes(spec, input_shape):
    """Shape after every entry, starting from ``(C, H, W)``."""

    c, h, w = input_shape
    if min(c, h, w) < 1:
        raise ShapeError("input shape must be positive, got %s" % (input_shape, ))

    rv = []
    for i, entry in enumerate(spec.layers):
        if entry.kind == "BB" and entry.value < c:
            _fail(i, entry, "a basic block cannot reduce %i channels to %i" % (c, entry.value))
        if entry.kind in ("Conv", "BB"):
            c = entry.value
        elif entry.kind in ("Avg", "Max"):
            k = entry.value
            if h % k or w % k:
                _fail(i, entry, "spatial size %ix%i is not divisible by %i" % (h, w, k))
            h, w = h // k, w // k
        elif entry.kind == "FC":
            rv.append((entry.value, ))
            continue
        if h < 1 or w < 1:
            _fail(i, entry, "spatial size reached %ix%i" % (h, w))
        rv.append((c, h, w))

    return rv


def count_params(spec, input_shape):
    total, shape = 0, tuple(input_shape)
    for entry, out in zip(spec.layers, infer_shapes(spec, input_shape)):
        if entry.kind == "Conv":
            total += entry.value * shape[0] * 9 + entry.value
        elif entry.kind == "BB":
            total += entry.value * shape[0] * 9 + entry.value
            total += entry.value * entry.value * 9 + entry.value
        elif entry.kind == "FC":
            total += entry.value * reduce(lambda a, b: a * b, shape) + entry.value
        shape = out
    return total


def build_network(spec, input_shape, rng=None, block_dropout=0.5):
    """Instantiate ``spec``; weights are He-initialized when ``rng`` is given."""

    shapes = infer_shapes(spec, input_shape)
    layers, shape = [], tuple(input_shape)

    for i, (entry, out) in enumerate(zip(spec.layers, shapes)):
        name = "%i.%s" % (i, entry.kind.lower())
        if entry.kind == "Conv":
            layers.append(nn.ConvLayer(shape[0], entry.value, relu=True, name=name))
        elif entry.kind == "BB":
            layers.append(nn.BasicBlock(shape[0], entry.value, block_dropout, name=name))
        elif entry.kind == "Avg":
            layers.append(nn.AvgPool(entry.value, name=name))
        elif entry.kind == "Max":
            layers.append(nn.MaxPool(entry.value, name=name))
        elif entry.kind == "Dropout":
            layers.append(nn.Dropout(entry.value, name=name))
        else:
            d = reduce(lambda a, b: a * b, shape)
            layers.append(nn.LinearLayer(d, entry.value, name=name))
        shape = out

    network = nn.Network(layers, name=spec.name)
    if rng is not None:
        nn.init_params(network, rng)

    logger.debug("built %s: %i layers, %i parameter tensors",
                 spec.name, network.depth, len(network.named_parameters()))
    return network


def to_plain_convnet(spec):
    """Replace every ``BB C`` by ``Conv C, Conv C``; shortcuts disappear."""
    layers = []
    for entry in spec.layers:
        if entry.kind == "BB":
            layers.extend([LayerSpec("Conv", entry.value)] * 2)
        else:
            layers.append(entry)
    return ArchSpec(spec.name + "-plain", tuple(layers))
