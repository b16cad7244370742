#!/usr/bin/env python3

from setuptools import find_packages, setup

setup(
    name="locev",
    version="0.1.0",
    packages=find_packages(exclude=['tests']),
    install_requires=[
        'click',
        'numpy',
        'scipy',
        'jsonschema',
    ],
    extras_require={
        'tests': [
            'pytest',
            'hypothesis',
        ],
    },
    entry_points={
        'console_scripts': [
            'locev = locev.main:main',
        ]
    }
)
