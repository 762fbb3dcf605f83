# -*- encoding: utf-8 -*-
"""Run configuration: ``defaults.ini`` + optional ``key = value`` file + flags.

>>> conf = new({"run": {"lr": "0.1", "augment": "on", "arch": "net1"}})
>>> section = conf.section("run")
>>> section.getfloat("lr"), section.getboolean("augment"), section.get("arch")
(0.1, True, 'net1')
"""

from __future__ import unicode_literals

import io
import os
import logging

from configparser import ConfigParser, Error as ParserError

logger = logging.getLogger("microresnet")

SECTION = "run"
DEFAULTS = os.path.join(os.path.dirname(__file__), "defaults.ini")


class ConfigError(ValueError):
    pass


class Section(object):
    """A wrapper around :class:`Parser` that returns a partial configuration
    section object.

    >>> conf = new({"foo": {"bar": "spam"}})
    >>> section = conf.section("foo")
    >>> conf.get("foo", "bar") == section.get("bar")
    True
    """

    def __init__(self, conf, section):
        self.conf = conf
        self.section = section

    def get(self, key):
        return self.conf.get(self.section, key)

    def getint(self, key):
        return self.conf.getint(self.section, key)

    def getfloat(self, key):
        return self.conf.getfloat(self.section, key)

    def getboolean(self, key):
        return self.conf.getboolean(self.section, key)

    def getoptional(self, key, type=str):
        return self.conf.getoptional(self.section, key, type)


class Parser(ConfigParser):
    """INI parser whose typed getters raise :class:`ConfigError`.

        * empty values are "unset" for :meth:`getoptional`
    """

    def __init__(self, **kwargs):
        kwargs.setdefault("interpolation", None)
        super(Parser, self).__init__(**kwargs)

    def _typed(self, getter, section, key, expected):
        try:
            return getter(self, section, key)
        except ValueError:
            raise ConfigError("%s must be %s, got %r" % (key, expected, self.get(section, key)))

    def getint(self, section, key, **kwargs):
        return self._typed(ConfigParser.getint, section, key, "an integer")

    def getfloat(self, section, key, **kwargs):
        return self._typed(ConfigParser.getfloat, section, key, "a number")

    def getboolean(self, section, key, **kwargs):
        return self._typed(ConfigParser.getboolean, section, key, "on or off")

    def getoptional(self, section, key, type=str):
        value = self.get(section, key).strip()
        if not value:
            return None
        try:
            return type(value)
        except ValueError:
            raise ConfigError("%s has an invalid value %r" % (key, value))

    def section(self, section):
        return Section(self, section)


def new(options=None):

    cp = Parser(allow_no_value=True)

    if options:
        cp.read_dict(options)

    return cp


def load(default=DEFAULTS, user=None):
    """Read ``default`` and then the section-less ``user`` file on top.

    Options missing from ``default`` are rejected.
    """

    def setify(cp):
        return set((section, option) for section in cp.sections()
                   for option in cp.options(section))

    parser = new()
    parser.read(default)

    known = setify(parser)

    if user:
        try:
            with io.open(user, encoding="utf-8") as fp:
                text = fp.read()
        except (IOError, OSError) as e:
            raise ConfigError("unable to read config file %s: %s" % (user, e.strerror))

        if not text.lstrip().startswith("["):
            text = "[%s]\n%s" % (SECTION, text)

        try:
            parser.read_string(text, source=user)
        except ParserError as e:
            raise ConfigError("invalid config file %s: %s" % (user, e))

    unknown = sorted(option for _, option in setify(parser).difference(known))
    if unknown:
        raise ConfigError("no such option: %s (in %s)" % (", ".join(unknown), user))

    return parser


def override(conf, options):
    """Apply command-line values (``None`` means "not given")."""

    for key, value in options.items():
        if value is None:
            continue
        if not conf.has_option(SECTION, key):
            raise ConfigError("no such option: %s" % key)
        if isinstance(value, bool):
            value = "on" if value else "off"
        conf.set(SECTION, key, str(value))

    return conf


def dump(conf):
    """Resolved configuration as ``key = value`` lines, in defaults order."""
    return "".join("%s = %s\n" % (key, conf.get(SECTION, key))
                   for key in conf.options(SECTION))


def known_keys(default=DEFAULTS):
    """Run keys in the order ``default`` lists them."""
    parser = new()
    parser.read(default)
    return parser.options(SECTION)
