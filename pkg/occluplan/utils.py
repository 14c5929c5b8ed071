#!/usr/bin/env python
# -*- coding: utf-8 -*-

import os

from occluplan.settings import DEFAULT_CONFIG, ENV_PREFIX, PLUGINS_ENV_VAR, THREADS_ENV_VAR


def flatten(structure, key='', path='', flattened=None):
    '''
    >>> flatten({})
    {}
    >>> flatten({'vehicle': {'r_min': 25, 'n_steer': 5}})['vehicle.r_min']
    25
    >>> sorted(flatten({'a': {'b': 'c'}, 'd': 'e'}).items())
    [('a.b', 'c'), ('d', 'e')]
    '''
    path = str(path)
    key = str(key)

    if flattened is None:
        flattened = {}
    if not isinstance(structure, dict):
        flattened[((path + '.' if path else '')) + key] = structure
    else:
        for new_key, value in structure.items():
            flatten(value, new_key, '.'.join(filter(None, [path, key])), flattened)
    return flattened


def env_overrides(environ=None):
    '''
    Config keys taken from OCCLUPLAN_* environment variables. Names of known keys are matched as a whole,
    any other name has its first underscore turned into a dot.

    >>> sorted(env_overrides({'OCCLUPLAN_INPAINT_METHOD': 'ORACLE', 'HOME': '/root'}).items())
    [('inpaint.method', 'ORACLE')]
    >>> sorted(env_overrides({'OCCLUPLAN_THREADS': '4', 'OCCLUPLAN_VEHICLE_R_MIN': '10'}).items())
    [('parallelism', '4'), ('vehicle.r_min', '10')]
    >>> env_overrides({'OCCLUPLAN_OUTPUT_DIR': 'out'})
    {'output_dir': 'out'}
    '''
    environ = os.environ if environ is None else environ
    known = {k.replace('.', '_').upper(): k for k in DEFAULT_CONFIG}
    overrides = {}
    for k, v in environ.items():
        if k == THREADS_ENV_VAR:
            overrides['parallelism'] = v
        elif k.startswith(ENV_PREFIX) and k != PLUGINS_ENV_VAR:
            name = k[len(ENV_PREFIX):]
            overrides[known[name] if name in known else name.replace('_', '.', 1).lower()] = v
    return overrides
