#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Inpainting backends are loaded through a small plugin system, so that a learned model (or any
other filler) can be wired into the pipeline without touching occluplan itself.

The adapter ``occluplan.adapters.IInpaintPlugin`` specifies what a backend implements.

A plugin implementation needs 2 files:
1. a python source file containing a class that extends ``IInpaintPlugin``.
2. a plugin info file with the same name and extension ``.inpaint_plugin``, whose ``[Core]`` section
   holds the plugin ``Name`` (the inpainting variant it serves, e.g. ``morphological``) and ``Module``.

Place both files in a folder of your choice and add that folder's absolute path to the environment
variable ``OCCLUPLAN_PLUGINS``. The builtin backends in ``occluplan.builtins.plugins`` are complete
examples.
"""

from occluplan.adapters.iinpaint_plugin import IInpaintPlugin


__all__ = [
    'IInpaintPlugin',
]
