# -*- encoding: utf-8 -*-
"""Binary checkpoints, all integers little-endian::

    "MRNC"  u32 version  u32 len  arch text (utf-8)
    u32 count  { u32 len  name  u8 rank  u64 dim * rank  float32 * prod(dims) }   parameters
    u32 count  { same layout }                                                   velocity buffers
    u32 epoch
    16 bytes state  16 bytes increment  u8 has_uint32  u32 uinteger              PCG64 state

Normalization statistics are stored as the parameters ``stats.mean`` and
``stats.std``.
"""

import io
import struct
import logging

from collections import namedtuple, OrderedDict

import numpy as np

logger = logging.getLogger("microresnet")

MAGIC = b"MRNC"
VERSION = 1


class CheckpointError(ValueError):

    def __init__(self, offset, message):
        super(CheckpointError, self).__init__("offset %i: %s" % (offset, message))
        self.offset = offset


Checkpoint = namedtuple("Checkpoint", "arch tensors buffers epoch rng_state")


def _table(out, tensors):
    out.append(struct.pack("<I", len(tensors)))
    for name, array in tensors.items():
        array = np.asarray(array)
        key = name.encode("utf-8")
        out.append(struct.pack("<I", len(key)) + key)
        out.append(struct.pack("<B%iQ" % array.ndim, array.ndim, *array.shape))
        out.append(np.ascontiguousarray(array, dtype="<f4").tobytes())


def dumps(checkpoint):
    arch = checkpoint.arch.encode("utf-8")
    out = [MAGIC, struct.pack("<II", VERSION, len(arch)), arch]

    _table(out, checkpoint.tensors)
    _table(out, checkpoint.buffers)
    out.append(struct.pack("<I", checkpoint.epoch))

    state = checkpoint.rng_state
    if state.get("bit_generator") != "PCG64":
        raise ValueError("only PCG64 generator states can be stored")
    out.append(state["state"]["state"].to_bytes(16, "little"))
    out.append(state["state"]["inc"].to_bytes(16, "little"))
    out.append(struct.pack("<BI", state["has_uint32"], state["uinteger"]))

    return b"".join(out)


class _Reader(object):

    def __init__(self, data):
        self.data = data
        self.offset = 0

    def take(self, n, what):
        if self.offset + n > len(self.data):
            raise CheckpointError(self.offset, "truncated while reading %s (%i of %i bytes left)" % (
                what, len(self.data) - self.offset, n))
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt, what):
        values = struct.unpack(fmt, self.take(struct.calcsize(fmt), what))
        return values[0] if len(values) == 1 else values

    def table(self, what):
        rv = OrderedDict()
        for _ in range(self.unpack("<I", what + " count")):
            start = self.offset
            try:
                name = self.take(self.unpack("<I", "name length"), "name").decode("utf-8")
            except UnicodeDecodeError:
                raise CheckpointError(start, "%s name is not valid utf-8" % what)
            rank = self.unpack("<B", "rank of " + name)
            dims = self.unpack("<%iQ" % rank, "shape of " + name) if rank else ()
            dims = dims if isinstance(dims, tuple) else (dims, )
            count = int(np.prod(dims, dtype=np.int64))
            payload = self.take(4 * count, "data of " + name)
            rv[name] = np.frombuffer(payload, dtype="<f4").astype(np.float32).reshape(dims)
        return rv


def loads(data):
    r = _Reader(data)

    if r.take(4, "magic") != MAGIC:
        raise CheckpointError(0, "not a checkpoint (bad magic)")
    version = r.unpack("<I", "version")
    if version != VERSION:
        raise CheckpointError(4, "unsupported checkpoint version %i" % version)

    start = r.offset + 4
    try:
        arch = r.take(r.unpack("<I", "arch length"), "arch text").decode("utf-8")
    except UnicodeDecodeError:
        raise CheckpointError(start, "arch text is not valid utf-8")

    tensors = r.table("parameter")
    buffers = r.table("buffer")
    epoch = r.unpack("<I", "epoch")

    state = int.from_bytes(r.take(16, "rng state"), "little")
    inc = int.from_bytes(r.take(16, "rng increment"), "little")
    has_uint32, uinteger = r.unpack("<BI", "rng cache")

    if r.offset != len(data):
        raise CheckpointError(r.offset, "%i trailing bytes" % (len(data) - r.offset))

    rng_state = {"bit_generator": "PCG64", "state": {"state": state, "inc": inc},
                 "has_uint32": has_uint32, "uinteger": uinteger}
    return Checkpoint(arch, tensors, buffers, epoch, rng_state)


def save_checkpoint(checkpoint, path):
    data = dumps(checkpoint)
    with io.open(path, "wb") as fp:
        fp.write(data)
    logger.info("wrote checkpoint %s (epoch %i, %i bytes)", path, checkpoint.epoch, len(data))


def load_checkpoint(path):
    try:
        with io.open(path, "rb") as fp:
            data = fp.read()
    except (IOError, OSError) as e:
        raise CheckpointError(0, "unable to read %s: %s" % (path, e.strerror))
    return loads(data)
