#!/usr/bin/env python
# -*- encoding: utf-8 -*-
#
# microresnet – residual networks with in-block dropout, from scratch

from __future__ import print_function, unicode_literals

import os
import sys

# op-internal parallelism is fixed before numpy loads its BLAS
_threads = os.environ.get("MICRORESNET_THREADS")
if _threads:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "VECLIB_MAXIMUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ[var] = _threads

import logging

from argparse import ArgumentParser

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s %(levelname)s: %(message)s")

logger = logging.getLogger("microresnet")

__version__ = "0.1.0"


def _train_flags(parser):
    """One flag per run key of ``defaults.ini``; absent flags stay ``None``."""

    add = parser.add_argument
    add("--arch", metavar="PRESET|FILE", help="net1 ... net6 or an architecture file")
    add("--data", metavar="SOURCE", help="synth:NxK[xS], cifar:FILE[,FILE...] or a directory")
    add("--val", metavar="SOURCE", help="validation data, same forms as --data")
    add("--out", metavar="DIR", help="output directory")
    add("--epochs", type=int)
    add("--seed", type=int)
    add("--lr", type=float, help="learning rate")
    add("--batch", type=int, help="batch size")
    add("--momentum", type=float)
    add("--weight-decay", type=float)
    add("--lr-step-factor", type=float)
    add("--lr-step-every", type=int)
    add("--augment", choices=["on", "off"])
    add("--flip-prob", type=float)
    add("--crop-prob", type=float)
    add("--crop-size", type=int)
    add("--out-size", type=int)
    add("--block-dropout", type=float, help="dropout rate inside basic blocks")
    add("--workers", type=int, help="augmentation threads")
    add("--checkpoint-every", type=int, metavar="K", help="write epoch-<n>.ckpt every K epochs")
    add("--resume", metavar="CKPT")
    add("--debug", choices=["on", "off"], help="raise on NaN/Inf after every op")
    add("--log-file", metavar="FILE")
    add("--synth-side", type=int)


def make_parser():
    from microresnet import commands

    parser = ArgumentParser(prog="microresnet",
                            description="residual network training from scratch")
    subparser = parser.add_subparsers(help="commands", dest="command")
    subparser.required = True

    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    parser.add_argument("-c", dest="conf", default=None,
                        metavar="run.conf", help="set configuration file (key = value lines)")

    train = subparser.add_parser("train", help="train a network, write metrics and checkpoints")
    _train_flags(train)
    train.set_defaults(func=commands.cmd_train)

    arch = subparser.add_parser("arch", help="inspect an architecture")
    arch.add_argument("arch", metavar="PRESET|FILE")
    arch.add_argument("--input", default="3x64x64", metavar="CxHxW")
    arch.add_argument("--to-plain", action="store_true",
                      help="replace every basic block by its two convolutions")
    arch.add_argument("--json", action="store_true")
    arch.set_defaults(func=commands.cmd_arch)

    gradcheck = subparser.add_parser("gradcheck", help="finite-difference gradient checks")
    gradcheck.add_argument("--op", default="all")
    gradcheck.add_argument("--seed", type=int, default=0)
    gradcheck.add_argument("--eps", type=float, default=1e-5)
    gradcheck.add_argument("--cases", type=int, default=20)
    gradcheck.set_defaults(func=commands.cmd_gradcheck)

    preview = subparser.add_parser("augment-preview", help="write augmented variants as PPM")
    preview.add_argument("--data", required=True, metavar="SOURCE")
    preview.add_argument("--index", type=int, default=0)
    preview.add_argument("--n", type=int, default=9)
    preview.add_argument("--seed", type=int, default=0)
    preview.add_argument("--out", default="preview", metavar="DIR")
    preview.add_argument("--flip-prob", type=float, default=0.5)
    preview.add_argument("--crop-prob", type=float, default=0.7)
    preview.add_argument("--crop-size", type=int, default=None)
    preview.add_argument("--out-size", type=int, default=None)
    preview.add_argument("--synth-side", type=int, default=32)
    preview.set_defaults(func=commands.cmd_augment_preview)

    plot = subparser.add_parser("plot", help="render metrics.csv files to SVG")
    plot.add_argument("--metrics", nargs="+", required=True, metavar="CSV")
    plot.add_argument("--kind", choices=["acc", "loss"], default="acc")
    plot.add_argument("--out", default="plot.svg", metavar="SVG")
    plot.set_defaults(func=commands.cmd_plot)

    evaluate = subparser.add_parser("eval", help="loss and accuracy of a checkpoint")
    evaluate.add_argument("--ckpt", required=True)
    evaluate.add_argument("--data", required=True, metavar="SOURCE")
    evaluate.add_argument("--seed", type=int, default=0)
    evaluate.add_argument("--batch", type=int, default=128)
    evaluate.add_argument("--synth-side", type=int, default=32)
    evaluate.set_defaults(func=commands.cmd_eval)

    return parser


def run(argv=None):
    """Run a sub-command and map failures to exit codes:

        * 1 -- configuration, architecture, checkpoint or argument errors
        * 2 -- data errors
        * 3 -- numerical failure (NaN/Inf)
    """

    from microresnet.data import DataError

    args = make_parser().parse_args(argv)

    try:
        return args.func(args)
    except ArithmeticError as e:
        logger.error("numerical failure: %s", e)
        return 3
    except DataError as e:
        logger.error("data error: %s", e)
        return 2
    except (ValueError, KeyError, IndexError, IOError, OSError) as e:
        logger.error("%s", e)
        return 1
    except Exception:
        logger.exception("unexpected error in %s", args.command)
        raise


def main():
    sys.exit(run())
