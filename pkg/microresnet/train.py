# -*- encoding: utf-8 -*-
"""SGD training, evaluation and the per-epoch metrics (including the
train/validation accuracy gap used as the overfitting indicator)."""

from __future__ import division

import io
import csv
import contextlib
import math
import logging

from collections import namedtuple, OrderedDict

import numpy as np

from microresnet.autograd import Tape, Rng, ShapeError, backward, ops
from microresnet.data import batch_iterator, dataset_stats
from microresnet.nn import collect_parameters

logger = logging.getLogger("microresnet")

DROPOUT = 3
HEADER = ("epoch", "train_loss", "train_acc", "val_loss", "val_acc", "gap")


class NumericalError(ArithmeticError):

    def __init__(self, batch, epoch=None, loss=None):
        super(NumericalError, self).__init__(
            "non-finite loss %r at batch %i%s" % (
                loss, batch, "" if epoch is None else " of epoch %i" % epoch))
        self.batch = batch
        self.epoch = epoch


class TrainConfig(object):
    """Hyperparameters of one run; ``lr_schedule`` is ``(factor, every_k_epochs)``."""

    def __init__(self, learning_rate=0.01, momentum=0.9, weight_decay=0.0, batch_size=128,
                 epochs=10, seed=0, augment=None, lr_schedule=None, workers=1):

        if learning_rate < 0:
            raise ValueError("learning rate must not be negative, got %r" % (learning_rate, ))
        if epochs < 1:
            raise ValueError("epochs must be >= 1, got %r" % (epochs, ))
        if batch_size < 1:
            raise ValueError("batch size must be >= 1, got %r" % (batch_size, ))
        if lr_schedule is not None and (lr_schedule[1] < 1 or lr_schedule[0] <= 0):
            raise ValueError("lr schedule needs factor > 0 and every >= 1, got %r" % (
                lr_schedule, ))

        self.learning_rate = learning_rate
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed
        self.augment = augment
        self.lr_schedule = lr_schedule
        self.workers = workers

    def learning_rate_at(self, epoch):
        if self.lr_schedule is None:
            return self.learning_rate
        factor, every = self.lr_schedule
        return self.learning_rate * factor ** ((epoch - 1) // every)


class MetricsRow(namedtuple("MetricsRow", HEADER)):

    __slots__ = ()

    @classmethod
    def new(cls, epoch, train_loss, train_acc, val_loss, val_acc):
        return cls(epoch, train_loss, train_acc, val_loss, val_acc, train_acc - val_acc)

    def csv(self):
        return "%i,%.6f,%.6f,%.6f,%.6f,%.6f\n" % self


def sgd_step(params, grads, state, cfg, lr=None):
    """``v <- momentum * v + grad + weight_decay * w; w <- w - lr * v``, in place.

    ``state`` is the list of velocity buffers, created on first use.
    """

    lr = cfg.learning_rate if lr is None else lr

    if not state:
        state.extend(np.zeros_like(p.data) for p in params)
    if len(state) != len(params) or len(grads) != len(params):
        raise ShapeError("%i parameters, %i gradients, %i velocity buffers" % (
            len(params), len(grads), len(state)))

    for p, g, v in zip(params, grads, state):
        if g is None:
            g = np.zeros_like(p.data)
        g = getattr(g, "data", g)
        if g.shape != p.shape or v.shape != p.shape:
            raise ShapeError("gradient %s / velocity %s do not match parameter %s" % (
                g.shape, v.shape, p.shape))

        v *= cfg.momentum
        v += g
        if cfg.weight_decay:
            v += cfg.weight_decay * p.data
        p.data -= lr * v


def _correct(logits, labels):
    # argmax returns the first maximum: ties go to the lowest class index
    return int(np.sum(np.argmax(logits, axis=1) == labels))


def train_epoch(net, batches, cfg, rng, state=None, lr=None, epoch=None):
    """One pass of forward / backward / SGD over ``batches``.

    Returns the loss averaged over batches and the accuracy over samples.
    """

    params = collect_parameters(net)
    state = [] if state is None else state

    losses, correct, seen = [], 0, 0
    for i, batch in enumerate(batches):
        with Tape() as tape:
            tape.watch(*params)
            logits = net.forward(batch.x, "train", rng)
            loss = ops.softmax_cross_entropy(logits, batch.y)

        value = loss.item()
        if not math.isfinite(value):
            raise NumericalError(i, epoch, value)

        grads = backward(loss, tape)
        sgd_step(params, [grads.get(p.node_id) for p in params], state, cfg, lr)

        losses.append(value)
        correct += _correct(logits.data, batch.y)
        seen += len(batch.y)

    return float(np.mean(losses)), correct / seen


def evaluate(net, dataset, batch_size, mean=None, std=None):
    """Eval-mode loss (per sample) and top-1 accuracy; consumes no randomness."""

    total, correct = 0.0, 0
    for batch in batch_iterator(dataset, batch_size, shuffle=False, cfg=None,
                                mean=mean, std=std):
        logits = net.forward(batch.x, "eval")
        total += ops.softmax_cross_entropy(logits, batch.y).item() * len(batch.y)
        correct += _correct(logits.data, batch.y)

    return total / len(dataset), correct / len(dataset)


class Trainer(object):
    """Owns the network, the optimizer state and the dropout stream of a run."""

    def __init__(self, net, train_ds, val_ds, cfg, arch="", stats=None):
        self.net = net
        self.train_ds = train_ds
        self.val_ds = val_ds
        self.cfg = cfg
        self.arch = arch

        if stats is None:
            stats = dataset_stats(train_ds)
        self.mean, self.std = [np.asarray(s, dtype=np.float32) for s in stats]

        self.params = collect_parameters(net)
        self.state = []
        self.rng = Rng.derive(cfg.seed, DROPOUT)
        self.epoch = 0

    def resume(self, checkpoint):
        tensors = OrderedDict(checkpoint.tensors)
        self.mean = tensors.pop("stats.mean")
        self.std = tensors.pop("stats.std")
        self.net.load_parameters(tensors)

        names = [name for name, _ in self.net.named_parameters()]
        if checkpoint.buffers:
            self.state = [np.array(checkpoint.buffers[name]) for name in names]
        self.rng = Rng.from_state(checkpoint.rng_state)
        self.epoch = checkpoint.epoch

    def snapshot(self):
        from microresnet.checkpoint import Checkpoint

        tensors = OrderedDict((name, p.data) for name, p in self.net.named_parameters())
        tensors["stats.mean"] = self.mean
        tensors["stats.std"] = self.std

        names = [name for name, _ in self.net.named_parameters()]
        buffers = OrderedDict(zip(names, self.state))

        return Checkpoint(self.arch, tensors, buffers, self.epoch, self.rng.state)

    def run_epoch(self):
        epoch = self.epoch + 1
        cfg = self.cfg

        batches = batch_iterator(self.train_ds, cfg.batch_size, shuffle=True, cfg=cfg.augment,
                                 seed=cfg.seed, epoch=epoch, mean=self.mean, std=self.std,
                                 workers=cfg.workers)
        with contextlib.closing(batches):
            train_epoch(self.net, batches, cfg, self.rng, self.state,
                        cfg.learning_rate_at(epoch), epoch)

        train_loss, train_acc = evaluate(self.net, self.train_ds, cfg.batch_size,
                                         self.mean, self.std)
        val_loss, val_acc = evaluate(self.net, self.val_ds, cfg.batch_size,
                                     self.mean, self.std)

        self.epoch = epoch
        row = MetricsRow.new(epoch, train_loss, train_acc, val_loss, val_acc)
        logger.info("epoch %i/%i: train loss %.4f acc %.4f, val loss %.4f acc %.4f, gap %.4f",
                    epoch, cfg.epochs, row.train_loss, row.train_acc,
                    row.val_loss, row.val_acc, row.gap)
        return row

    def fit(self, on_epoch=None):
        rows = []
        while self.epoch < self.cfg.epochs:
            row = self.run_epoch()
            rows.append(row)
            if on_epoch is not None:
                on_epoch(row, self)
        return rows


def fit(net, train_ds, val_ds, cfg, on_epoch=None, resume=None, arch=""):
    """Train for ``cfg.epochs`` epochs (no early stopping), one row per epoch."""

    trainer = Trainer(net, train_ds, val_ds, cfg, arch)
    if resume is not None:
        trainer.resume(resume)
    return trainer.fit(on_epoch)


def write_metrics_csv(rows, fp, header=True):
    if header:
        fp.write(",".join(HEADER) + "\n")
    for row in rows:
        fp.write(row.csv())
        fp.flush()


def read_metrics_csv(path):
    with io.open(path, encoding="utf-8", newline="") as fp:
        reader = csv.reader(fp)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != HEADER:
            raise ValueError("%s: expected header %s" % (path, ",".join(HEADER)))
        rows = []
        for lineno, record in enumerate(reader, 2):
            if not record:
                continue
            try:
                rows.append(MetricsRow(int(record[0]), *map(float, record[1:])))
            except (TypeError, ValueError):
                raise ValueError("%s:%i: malformed metrics row" % (path, lineno))
    return rows
