# -*- encoding: utf-8 -*-
"""Accuracy / loss curves of one or more runs as a single SVG chart.

For ``kind="acc"`` every run contributes its train (solid) and validation
(dashed) accuracy; for ``kind="loss"`` only its train loss.
"""

from __future__ import division

import os
import math

from collections import namedtuple

from microresnet import utils

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")

WIDTH, HEIGHT = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 190, 40, 60

Series = namedtuple("Series", "label color dashed points")
Tick = namedtuple("Tick", "pos label")


def _nice_step(span, count):
    raw = span / count
    magnitude = 10 ** math.floor(math.log10(raw))
    for factor in (1, 2, 5, 10):
        if raw <= factor * magnitude:
            return factor * magnitude
    return 10 * magnitude


def _label(path):
    return os.path.splitext(os.path.basename(path))[0]


def series_for(runs, kind):
    """``runs`` is a list of ``(label, rows)``."""

    if kind not in ("acc", "loss"):
        raise ValueError("kind must be 'acc' or 'loss', not %r" % (kind, ))

    rv = []
    for i, (label, rows) in enumerate(runs):
        color = COLORS[i % len(COLORS)]
        if kind == "acc":
            rv.append(Series(label + " train", color, False,
                             [(r.epoch, r.train_acc) for r in rows]))
            rv.append(Series(label + " val", color, True,
                             [(r.epoch, r.val_acc) for r in rows]))
        else:
            rv.append(Series(label, color, False, [(r.epoch, r.train_loss) for r in rows]))
    return rv


def render_plot(paths, kind="acc", runs=None):
    """Render the metrics CSVs at ``paths`` to SVG text.

    Raises :class:`ValueError` for malformed or empty metrics files.
    """

    from microresnet.train import read_metrics_csv

    if runs is None:
        runs = []
        for path in paths:
            rows = read_metrics_csv(path)
            if not rows:
                raise ValueError("%s: no metrics rows" % path)
            runs.append((_label(path), rows))

    series = series_for(runs, kind)

    epochs = [x for s in series for x, _ in s.points]
    values = [y for s in series for _, y in s.points]

    x_max = max(max(epochs), 2)
    if kind == "acc":
        y_max = 1.0
    else:
        y_max = max(max(values), 1e-6) * 1.05

    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - 1) / (x_max - 1) * plot_w

    def py(y):
        return TOP + plot_h - min(max(y / y_max, 0.0), 1.0) * plot_h

    x_step = max(1, int(_nice_step(x_max - 1, 10)))
    x_ticks = [Tick(px(e), "%i" % e) for e in range(1, x_max + 1, x_step)]

    y_step = _nice_step(y_max, 5)
    y_ticks = [Tick(py(k * y_step), "%g" % round(k * y_step, 6))
               for k in range(int(y_max / y_step + 1e-9) + 1)]

    lines = [dict(label=s.label, color=s.color, dashed=s.dashed,
                  points=" ".join("%.2f,%.2f" % (px(x), py(y)) for x, y in s.points))
             for s in series]

    return utils.render_template(
        "plot.svg", width=WIDTH, height=HEIGHT,
        left=LEFT, top=TOP, right=LEFT + plot_w, bottom=TOP + plot_h,
        x_ticks=x_ticks, y_ticks=y_ticks, series=lines,
        x_label="epoch", y_label="accuracy" if kind == "acc" else "loss")
