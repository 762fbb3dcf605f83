# -*- encoding: utf-8 -*-

from __future__ import division, unicode_literals

import os

from jinja2 import Environment, FileSystemLoader


def render_template(template_name, **context):
    template_path = os.path.join(os.path.dirname(__file__),
                                 '..', 'templates')
    jinja_env = Environment(loader=FileSystemLoader(template_path),
                            autoescape=True, keep_trailing_newline=True,
                            trim_blocks=True, lstrip_blocks=True)

    def coord(value):
        return "%.2f" % value

    jinja_env.filters['coord'] = coord
    t = jinja_env.get_template(template_name)
    return t.render(context)


from microresnet.utils.ppm import write_ppm, read_ppm  # noqa: E402
from microresnet.utils.plot import render_plot, COLORS  # noqa: E402
