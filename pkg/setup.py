#!/usr/bin/env python
# -*- coding: utf-8 -*-

import os
from setuptools import setup, find_packages


def load_req(fn):
    return [r.strip() for r in open(fn).read().splitlines() if r.strip() and not r.strip().startswith('#')]


if __name__ == '__main__':
    # just in case setup.py is launched from elsewhere than the containing directory
    original_dir = os.getcwd()
    os.chdir(os.path.dirname(os.path.abspath(__file__)))

    try:
        setup(
            name='occluplan',
            version=__import__('occluplan').__version__,
            description='Occlusion aware road skeleton planning on semantic BEV grids',
            license='Apache License 2.0',
            packages=find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
            setup_requires=['pytest-runner'],
            install_requires=load_req('requirements.txt'),
            test_suite='tests',
            tests_require=load_req('test_requirements.txt'),

            entry_points={
                'console_scripts': [
                    'occluplan = occluplan.main:main',
                ]
            },
            package_data={
                'occluplan': ['templates/*.svg', 'builtins/plugins/*.inpaint_plugin'],
            },
            include_package_data=True,

            keywords='occlusion inpainting skeleton hybrid-astar planning bev',
            long_description=open('README.rst').read(),
            classifiers=[
                'Development Status :: 3 - Alpha',
                'Intended Audience :: Science/Research',
                'License :: OSI Approved :: Apache Software License',
                'Operating System :: OS Independent',
                'Programming Language :: Python',
                'Programming Language :: Python :: 3',
                'Topic :: Scientific/Engineering'],

            platforms='All',
        )

    finally:
        os.chdir(original_dir)
