#! /usr/bin/env python3

# Core
import sys
from setuptools import setup

# Configuration and result types are dataclasses:
# https://docs.python.org/3/whatsnew/3.7.html#dataclasses
assert sys.version_info >= (3, 7), (
    "yagi-suite requires Python 3.7 or newer"
)

setup(
    name='nanonet.yagi-suite',
    version='0.3.0',
    author='Nanonetworking lab',
    author_email='nanonet@example.org',
    url='https://github.com/nanonet/yagi-suite',
    packages=[
        'nanonet.yagi_suite',
    ],
    package_data={
        'nanonet.yagi_suite': ['resources/*']
    },
    description=(
        'Experiments on a reconfigurable graphene Yagi-Uda antenna for '
        'terahertz nanonetworks: conductivity and resonance model, beam '
        'patterns, channel planning, controller LUTs and a multichannel '
        'MAC simulation.'
    ),
    long_description=open('README.rst').read(),
    install_requires=[
        "Jinja2==3.1.2",
        "numpy==1.21.6",
        "PyYAML==6.0",
        "scipy==1.7.3",
        "simpy==4.0.1",
    ],
    setup_requires=['pytest-runner'],
    tests_require=[
        "mpmath==1.2.1",
        "pytest==7.1.2",
        "pytest-cov==3.0.0",
    ],
    scripts=['yagi-suite']
)
