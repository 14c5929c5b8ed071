# -*- coding: utf-8 -*-

"""
Project settings:
 To customize the settings for a local environment please create another module called settings_local.py and change
 there the values you want.

You don't have to duplicate all the logic in settings_pro.py inside settings_local.py, instead you import it and
can modify certain values. For example to modify only the log level:

##### content of file: settings_local.py

from occluplan.settings_pro import *
LOGGING['loggers']['']['level'] = 'DEBUG'

#### END of settings_local.py
"""

import copy

from occluplan.settings_pro import LOGGING, DEFAULT_CONFIG  # noqa

ENV_PREFIX = 'OCCLUPLAN_'

THREADS_ENV_VAR = 'OCCLUPLAN_THREADS'

PLUGINS_ENV_VAR = 'OCCLUPLAN_PLUGINS'

EXTERNAL_CONFIG = {}


def set_log_level(level):
    if level:
        LOGGING['loggers']['']['level'] = str(level).upper()


def set_external_config(external_config):
    global EXTERNAL_CONFIG
    EXTERNAL_CONFIG = dict(external_config)


def get_external_config():
    return EXTERNAL_CONFIG


def default_config():
    return copy.deepcopy(DEFAULT_CONFIG)
