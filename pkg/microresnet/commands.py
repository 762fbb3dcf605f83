# -*- encoding: utf-8 -*-
"""Sub-command implementations; each returns the process exit code."""

from __future__ import division, print_function

import io
import os
import json
import logging

from collections import OrderedDict

from microresnet import arch, config, autograd
from microresnet.autograd import Rng
from microresnet.autograd.gradcheck import CASES, THRESHOLD, gradcheck_suite
from microresnet.checkpoint import save_checkpoint, load_checkpoint
from microresnet.config import ConfigError
from microresnet.data import AugmentConfig, DataError, AUGMENT, augment, open_source
from microresnet.train import (Trainer, TrainConfig, evaluate, read_metrics_csv,
                              write_metrics_csv)
from microresnet.utils import write_ppm, render_plot

logger = logging.getLogger("microresnet")

INIT = 0


def _makedirs(path):
    if path and not os.path.isdir(path):
        os.makedirs(path)


def _options(args):
    """Run keys given on the command line (``None`` when absent)."""
    return OrderedDict((key, getattr(args, key.replace("-", "_"), None))
                       for key in config.known_keys())


def _augment_config(section, side):
    if not section.getboolean("augment"):
        return None
    cfg = AugmentConfig.for_side(side, section.getfloat("flip-prob"),
                                 section.getfloat("crop-prob"),
                                 section.getoptional("crop-size", int),
                                 section.getoptional("out-size", int))
    if cfg.out_size != side:
        raise ConfigError("out-size %i must equal the image side %i" % (cfg.out_size, side))
    if cfg.crop_size > side:
        raise ConfigError("crop-size %i exceeds the image side %i" % (cfg.crop_size, side))
    return cfg


def train_config(section, side):
    lr = section.getfloat("lr")
    if lr <= 0:
        raise ConfigError("lr must be positive, got %r" % lr)
    if section.getint("epochs") < 1:
        raise ConfigError("epochs must be >= 1")
    if section.getint("batch") < 1:
        raise ConfigError("batch must be >= 1")
    if section.getint("workers") < 1:
        raise ConfigError("workers must be >= 1")

    factor = section.getoptional("lr-step-factor", float)
    every = section.getoptional("lr-step-every", int)
    if (factor is None) != (every is None):
        raise ConfigError("lr-step-factor and lr-step-every must be given together")

    try:
        return TrainConfig(learning_rate=lr,
                           momentum=section.getfloat("momentum"),
                           weight_decay=section.getfloat("weight-decay"),
                           batch_size=section.getint("batch"),
                           epochs=section.getint("epochs"),
                           seed=section.getint("seed"),
                           augment=_augment_config(section, side),
                           lr_schedule=None if factor is None else (factor, every),
                           workers=section.getint("workers"))
    except ValueError as e:
        raise ConfigError(str(e))


def _log_file(section):
    path = section.get("log-file")
    if path:
        handler = logging.FileHandler(path)
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s: %(message)s"))
        logger.addHandler(handler)
        logger.propagate = False


def cmd_train(args):
    conf = config.override(config.load(user=args.conf), _options(args))
    section = conf.section(config.SECTION)

    resolved = config.dump(conf)
    print(resolved, end="")

    for key in ("data", "val"):
        if not section.get(key):
            raise ConfigError("%s is required" % key)

    out = section.get("out")
    _makedirs(out)
    with io.open(os.path.join(out, "resolved-config.txt"), "w", encoding="utf-8") as fp:
        fp.write(resolved)

    _log_file(section)
    autograd.set_debug(section.getboolean("debug"))

    seed = section.getint("seed")
    side = section.getint("synth-side")
    train_ds = open_source(section.get("data"), seed, side)
    val_ds = open_source(section.get("val"), seed + 1, side)

    if train_ds.image_shape != val_ds.image_shape:
        raise DataError("train images are %s but validation images are %s" % (
            train_ds.image_shape, val_ds.image_shape))

    spec = arch.load_arch(section.get("arch"))
    classes = spec.layers[-1].value
    if classes < max(train_ds.class_count, val_ds.class_count):
        raise ConfigError("%s has %i outputs but the data has %i classes" % (
            spec.name, classes, max(train_ds.class_count, val_ds.class_count)))

    cfg = train_config(section, train_ds.image_shape[-1])
    net = arch.build_network(spec, train_ds.image_shape, Rng.derive(seed, INIT),
                             section.getfloat("block-dropout"))
    trainer = Trainer(net, train_ds, val_ds, cfg, arch.render_arch(spec))

    metrics = os.path.join(out, "metrics.csv")
    kept = []
    if section.get("resume"):
        state = load_checkpoint(section.get("resume"))
        if state.arch != trainer.arch:
            raise ConfigError("%s was written for a different architecture" % section.get("resume"))
        trainer.resume(state)
        if os.path.exists(metrics):
            kept = [row for row in read_metrics_csv(metrics) if row.epoch <= state.epoch]
        logger.info("resuming %s after epoch %i", spec.name, state.epoch)

    every = section.getint("checkpoint-every")

    with io.open(metrics, "w", encoding="utf-8", newline="") as fp:
        write_metrics_csv(kept, fp)

        def on_epoch(row, trainer):
            write_metrics_csv([row], fp, header=False)
            if every > 0 and row.epoch % every == 0:
                save_checkpoint(trainer.snapshot(),
                                os.path.join(out, "epoch-%i.ckpt" % row.epoch))

        trainer.fit(on_epoch)

    save_checkpoint(trainer.snapshot(), os.path.join(out, "final.ckpt"))
    return 0


def _input_shape(text):
    try:
        shape = tuple(int(v) for v in text.lower().split("x"))
    except ValueError:
        shape = ()
    if len(shape) != 3:
        raise ConfigError("--input must look like CxHxW, got %r" % text)
    return shape


def cmd_arch(args):
    spec = arch.load_arch(args.arch)
    if args.to_plain:
        spec = arch.to_plain_convnet(spec)

    input_shape = _input_shape(args.input)
    shapes = arch.infer_shapes(spec, input_shape)
    layers = arch.count_layers(spec)
    params = arch.count_params(spec, input_shape)
    published = None if args.to_plain else arch.layer_count_discrepancy(spec.name, layers)

    if args.json:
        print(json.dumps(OrderedDict([
            ("name", spec.name),
            ("entries", [str(entry) for entry in spec.layers]),
            ("shapes", [list(shape) for shape in shapes]),
            ("layers", layers),
            ("params", params),
            ("published_layers", arch.PUBLISHED_LAYER_COUNTS.get(spec.name)),
        ]), indent=2))
    else:
        print(spec.name)
        for i, (entry, shape) in enumerate(zip(spec.layers, shapes)):
            print("%3i  %-12s %s" % (i + 1, entry, "x".join(map(str, shape))))
        print("layers: %i" % layers)
        print("params: %i" % params)

    if published is not None:
        logger.warning("%s: %i parameterized layers, the published table lists %i",
                       spec.name, layers, published)
        if not args.json:
            print("warning: published layer count is %i" % published)

    return 0


def cmd_gradcheck(args):
    names = None if args.op == "all" else [args.op]
    try:
        results = gradcheck_suite(names, seed=args.seed, eps=args.eps, cases=args.cases)
    except KeyError:
        logger.error("unknown op %r, choose from all, %s", args.op,
                     ", ".join(CASES))
        return 1

    failed = 0
    for name, error in results.items():
        ok = error < THRESHOLD
        failed += not ok
        print("%-24s %.3e  %s" % (name, error, "ok" if ok else "FAIL"))

    return 1 if failed else 0


def cmd_augment_preview(args):
    ds = open_source(args.data, args.seed, args.synth_side)
    if not 0 <= args.index < len(ds):
        raise IndexError("index %i out of range for %i images" % (args.index, len(ds)))

    img = ds.images[args.index]
    side = img.shape[-1]
    try:
        cfg = AugmentConfig.for_side(side, args.flip_prob, args.crop_prob,
                                     args.crop_size, args.out_size)
    except ValueError as e:
        raise ConfigError(str(e))

    _makedirs(args.out)
    write_ppm(os.path.join(args.out, "original.ppm"), img)
    for j in range(1, args.n + 1):
        # variant j is what sample ``index`` looks like in epoch j
        variant = augment(img, cfg, Rng.derive(args.seed, AUGMENT, j, args.index))
        write_ppm(os.path.join(args.out, "variant-%i.ppm" % j), variant)

    logger.info("wrote %i variants of image %i to %s", args.n, args.index, args.out)
    return 0


def cmd_plot(args):
    svg = render_plot(args.metrics, args.kind)
    _makedirs(os.path.dirname(args.out))
    with io.open(args.out, "w", encoding="utf-8") as fp:
        fp.write(svg)
    return 0


def cmd_eval(args):
    state = load_checkpoint(args.ckpt)
    spec = arch.parse_arch(state.arch, os.path.basename(args.ckpt))
    ds = open_source(args.data, args.seed, args.synth_side)

    tensors = OrderedDict(state.tensors)
    mean, std = tensors.pop("stats.mean"), tensors.pop("stats.std")

    net = arch.build_network(spec, ds.image_shape)
    net.load_parameters(tensors)

    loss, accuracy = evaluate(net, ds, args.batch, mean, std)
    print("loss %.6f" % loss)
    print("accuracy %s" % accuracy)
    return 0
