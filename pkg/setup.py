#!/usr/bin/env python3

import setuptools

setuptools.setup(
    name = 'pynav',
    version = '1.0.0',
    description = 'A deterministic 2D autonomous navigation stack and simulator for car-like robots',
    long_description = open('README.md', 'r').read(),
    long_description_content_type = 'text/markdown',
    packages = setuptools.find_packages(exclude = ['tests', 'tests.*']),
    install_requires = ['numpy', 'scipy', 'matplotlib'],
    extras_require = {'test': ['pytest']},
    classifiers = [
        'Programming Language :: Python :: 3.8',
        'Operating System :: OS Independent',
        'Topic :: Scientific/Engineering'
    ],
    scripts = ['bin/pynav'],
    python_requires = '>=3.8',
)
