#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Yapsy based registry of inpainting backends.

Every backend is a plugin of category ``Inpaint`` whose name is the inpainting variant it serves (``identity``,
``morphological``, ...). The builtin backends live in occluplan.builtins.plugins; more folders can be listed in
OCCLUPLAN_PLUGINS (os.pathsep separated) or handed to collect_plugins().

A plugin folder may hold a requirements.txt, collection fails when one of its distributions is not installed.
Backend options come from the [Configuration] section of the ``.inpaint_plugin`` file and are overridden by
``plugin.<name>.<option>`` keys of the run configuration.
"""

import importlib
import logging
import os
import re
from importlib import metadata

from yapsy.PluginManager import PluginManagerSingleton

from occluplan.adapters.iinpaint_plugin import IInpaintPlugin
from occluplan.settings import PLUGINS_ENV_VAR

logger = logging.getLogger(__name__)


PLUGIN_CATEGORY = 'Inpaint'

INFO_EXTENSION = 'inpaint_plugin'

BUILTIN_PACKAGES = ('occluplan.builtins.plugins',)

CATEGORIES = {
    PLUGIN_CATEGORY: IInpaintPlugin,
}

CONFIG_PREFIX = 'plugin.{}.'

REQUIREMENT_NAME = re.compile(r'^[A-Za-z0-9._-]+')


class PluginError(Exception):
    pass


class PluginRecoverableError(PluginError):
    pass


class PluginFatalError(PluginError):
    pass


_options = {}
_collected = False


def init_plugin_manager(categories=None, info_extension=INFO_EXTENSION, builtin_packages=BUILTIN_PACKAGES,
                        env_var=PLUGINS_ENV_VAR):
    """
    Reset the registry, nothing is loaded until collect_plugins() runs.

    :param categories: dict category name -> adapter class
    :param info_extension: extension of the plugin info files
    :param builtin_packages: packages whose folders hold builtin backends
    :param env_var: environment variable listing external plugin folders
    """
    global _options, _collected

    categories = CATEGORIES if categories is None else categories
    manager = PluginManagerSingleton.get()
    manager.setCategoriesFilter(categories)
    manager.setPluginInfoExtension(info_extension)

    _options = dict(info_extension=info_extension, builtin_packages=builtin_packages, env_var=env_var)
    _collected = False
    logger.debug('Plugin registry initialized for %s', sorted(categories))


def get_plugin_manager():
    return PluginManagerSingleton.get()


def _package_dirs(packages):
    dirs = []
    for name in packages:
        try:
            path = os.path.dirname(importlib.import_module(name).__file__)
        except Exception as e:
            logger.exception('Cannot import backend package %s', name)
            raise PluginFatalError('Builtin backend package {} is broken: {}'.format(name, e)) from e
        if not os.path.isdir(path):
            raise PluginFatalError('Builtin backend package {} has no folder {}'.format(name, path))
        dirs.append(path)
    return dirs


def _env_dirs(env_var):
    value = os.environ.get(env_var)
    if not value:
        return []
    dirs = set()
    for d in filter(None, value.split(os.pathsep)):
        if not os.path.isdir(d):
            raise PluginFatalError('{} lists {} which is not a folder'.format(env_var, d))
        dirs.add(os.path.abspath(d))
    return sorted(dirs)


def _extra_dirs(dirs):
    for d in dirs or ():
        if not os.path.isdir(d):
            raise PluginFatalError('Plugin folder {} does not exist'.format(d))
    return list(dirs or ())


def _missing_requirements(path):
    req_file = os.path.join(path, 'requirements.txt')
    if not os.path.isfile(req_file):
        return []

    missing = []
    with open(req_file) as f:
        for line in f:
            req = line.strip()
            if not req or req.startswith('#'):
                continue
            try:
                metadata.distribution(REQUIREMENT_NAME.match(req).group(0))
            except (AttributeError, metadata.PackageNotFoundError):
                missing.append(req)
    return missing


def _backend_config(plugin, global_config):
    conf = dict(plugin.details.items('Configuration')) if plugin.details.has_section('Configuration') else {}
    prefix = CONFIG_PREFIX.format(plugin.name)
    overrides = {str(k)[len(prefix):]: v for k, v in global_config.items() if str(k).startswith(prefix)}
    logger.debug('Backend %s options %s, overridden %s', plugin.name, sorted(conf), sorted(overrides))
    conf.update(overrides)
    return conf


def collect_plugins(load_builtins=True, load_env=True, additional_dirs=None, global_config=None, raise_errors=True):
    """
    Locate, load, configure and activate all backends. Allowed once per init_plugin_manager().

    :param load_builtins: load the backends shipped with occluplan
    :param load_env: load the folders listed in OCCLUPLAN_PLUGINS
    :param additional_dirs: more folders to load backends from
    :param global_config: flat run configuration, ``plugin.<name>.*`` keys reach the backend
    :param raise_errors: raise PluginFatalError on a broken backend instead of deactivating it
    """
    global _collected

    if not _options:
        raise PluginFatalError('init_plugin_manager() must run before collect_plugins()')
    if _collected:
        raise PluginFatalError('Plugins are already collected')

    global_config = global_config or {}
    try:
        external = (_env_dirs(_options['env_var']) if load_env else []) + _extra_dirs(additional_dirs)
        for path in external:
            missing = _missing_requirements(path)
            if missing:
                logger.error('Backend folder %s misses %s', path, ', '.join(missing))
                if raise_errors:
                    raise PluginFatalError('Dependencies missing for plugin {}: {}'.format(path, ', '.join(missing)))

        builtins = _package_dirs(_options['builtin_packages']) if load_builtins else []
        manager = get_plugin_manager()
        manager.setPluginPlaces(builtins + external)
        manager.locatePlugins()
        candidates = manager.getPluginCandidates()
        manager.loadPlugins()

        plugins = manager.getAllPlugins()
        loaded = set(os.path.splitext(p.path)[0] for p in plugins)
        broken = [info_file for info_file, _, _ in candidates if os.path.splitext(info_file)[0] not in loaded]
        if broken:
            logger.error('Backends failed to load: %s', broken)
            if raise_errors:
                raise PluginFatalError('Plugin candidates have errors: {}'.format(broken))

        for plugin in plugins:
            try:
                plugin.plugin_object.configure(_backend_config(plugin, global_config))
            except Exception:
                logger.exception('Backend %s rejected its configuration', plugin.name)
                if raise_errors:
                    raise
                plugin.plugin_object.deactivate()
            else:
                plugin.plugin_object.activate()
    except PluginFatalError:
        raise
    except Exception as e:
        logger.exception('Collecting backends failed')
        if raise_errors:
            raise PluginFatalError('Error while loading plugins: {}'.format(e)) from e

    _collected = True
    logger.debug('Collected backends: %s', get_all_plugin_names())


def ensure_plugins(global_config=None):
    """
    Collect once per process, called lazily by the inpainting stage.
    """
    if not _collected:
        init_plugin_manager()
        collect_plugins(global_config=global_config)


def get_plugins_of_category(category, active=True, raise_errors=True):
    try:
        plugins = get_plugin_manager().getPluginsOfCategory(category)
    except KeyError:
        if raise_errors:
            raise PluginRecoverableError('Unknown plugin category {}'.format(category))
        return []
    if isinstance(active, bool):
        plugins = [p for p in plugins if p.is_activated == active]
    return plugins


def get_plugin_by_name(name, category, not_found_is_error=True):
    plugin = get_plugin_manager().getPluginByName(name, category)
    if plugin is None and not_found_is_error:
        raise PluginRecoverableError('No {} plugin named {}'.format(category, name))
    return plugin


def get_plugin_obj_by_name(name, category, not_found_is_error=True):
    plugin = get_plugin_by_name(name, category, not_found_is_error)
    return None if plugin is None else plugin.plugin_object


def get_all_plugin_names():
    return [p.name for p in get_plugin_manager().getAllPlugins() or ()]
