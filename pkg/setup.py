#!/usr/bin/env python
# -*- encoding: utf-8 -*-

import sys

from setuptools import setup, find_packages

requires = ['numpy>=1.20', 'Jinja2']

if sys.version_info < (3, 6):
    raise SystemExit("Python 3 versions < 3.6 are not supported.")

setup(
    name='microresnet',
    version='0.1.0',
    packages=find_packages(),
    package_data={
        'microresnet': ['defaults.ini', 'presets/*.arch', 'templates/*.svg'],
    },
    include_package_data=True,
    zip_safe=False,
    license='MIT',
    description='residual networks with in-block dropout, trained from scratch on numpy',
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3.6",
        "Programming Language :: Python :: 3.7",
        "Programming Language :: Python :: 3.8"
    ],
    install_requires=requires,
    tests_require=['pytest'],
    entry_points={
        'console_scripts':
            ['microresnet = microresnet:main'],
    }
)
