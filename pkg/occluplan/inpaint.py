#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Inpainting stage: fills UNKNOWN cells of an occluded grid.

The variants are served by Inpaint plugins (see occluplan.adapters), the plugin name being the
lower-cased variant. Whatever the backend returns, cells known in the input are kept as they were.
"""

import logging
from collections import namedtuple

import numpy as np

from occluplan import plugin_manager
from occluplan.errors import DimensionMismatchError, InpaintError
from occluplan.semantic_grid import ClassId
from occluplan.settings import get_external_config

logger = logging.getLogger(__name__)


IDENTITY = 'IDENTITY'
MORPHOLOGICAL = 'MORPHOLOGICAL'
ORACLE = 'ORACLE'
EXTERNAL = 'EXTERNAL'

VARIANTS = (IDENTITY, MORPHOLOGICAL, ORACLE, EXTERNAL)

DEFAULT_RADIUS = 1
DEFAULT_LEAK_RADIUS = 40

PLUGIN_CATEGORY = plugin_manager.PLUGIN_CATEGORY


class InpaintMethod(namedtuple('InpaintMethod', 'variant radius leak_radius path')):
    """
    One inpainting variant with its parameters. Variants not listed in VARIANTS are allowed when an
    external plugin of that name is installed.
    """
    __slots__ = ()

    def __new__(cls, variant, radius=None, leak_radius=None, path=None):
        variant = str(variant).upper()
        if variant == MORPHOLOGICAL:
            radius = DEFAULT_RADIUS if radius is None else int(radius)
            if radius < 1:
                raise InpaintError('radius must be >= 1, got {}'.format(radius))
        if variant == ORACLE:
            leak_radius = DEFAULT_LEAK_RADIUS if leak_radius is None else int(leak_radius)
            if leak_radius < 1:
                raise InpaintError('leak_radius must be >= 1, got {}'.format(leak_radius))
        if variant == EXTERNAL and not path:
            raise InpaintError('EXTERNAL inpainting needs a path')
        return super(InpaintMethod, cls).__new__(cls, variant, radius, leak_radius, path)

    @classmethod
    def identity(cls):
        return cls(IDENTITY)

    @classmethod
    def morphological(cls, radius=DEFAULT_RADIUS):
        return cls(MORPHOLOGICAL, radius=radius)

    @classmethod
    def oracle(cls, leak_radius=DEFAULT_LEAK_RADIUS):
        return cls(ORACLE, leak_radius=leak_radius)

    @classmethod
    def external(cls, path):
        return cls(EXTERNAL, path=path)

    @property
    def needs_gt(self):
        return self.variant == ORACLE

    def for_frame(self, frame_id):
        '''
        EXTERNAL paths may hold a ``{frame_id}`` placeholder, one inpainted map per frame.

        >>> InpaintMethod.external('maps/{frame_id:04d}.ogrd').for_frame(7).path
        'maps/0007.ogrd'
        >>> InpaintMethod.identity().for_frame(7).path is None
        True
        '''
        if self.path and '{' in self.path:
            return self._replace(path=self.path.format(frame_id=frame_id))
        return self

    def __str__(self):
        if self.variant == MORPHOLOGICAL:
            return '{}(radius={})'.format(self.variant, self.radius)
        if self.variant == ORACLE:
            return '{}(leak_radius={})'.format(self.variant, self.leak_radius)
        if self.variant == EXTERNAL:
            return '{}(path={})'.format(self.variant, self.path)
        return self.variant


def backend(variant):
    plugin_manager.ensure_plugins(global_config=get_external_config())
    obj = plugin_manager.get_plugin_obj_by_name(variant.lower(), PLUGIN_CATEGORY, not_found_is_error=False)
    if obj is None or not obj.is_activated:
        active = sorted(p.name for p in plugin_manager.get_plugins_of_category(PLUGIN_CATEGORY))
        raise InpaintError('No active inpainting backend for variant {}, active: {}'.format(variant, active))
    return obj


def inpaint(grid, method, gt=None):
    if method.needs_gt:
        if gt is None:
            raise InpaintError('{} inpainting needs the ground truth grid'.format(method.variant))
        grid.check_same_shape(gt)

    unknown = grid.cells == ClassId.UNKNOWN
    if not unknown.any():
        return grid

    filled = backend(method.variant).fill(grid.cells, method, gt.cells if gt is not None else None)
    filled = np.asarray(filled)
    if filled.shape != grid.shape:
        raise DimensionMismatchError(grid.shape, filled.shape)

    result = grid.with_cells(np.where(unknown, filled, grid.cells))
    logger.debug('%s filled %d of %d unknown cells', method, int(np.count_nonzero(result.cells[unknown])),
                 int(np.count_nonzero(unknown)))
    return result
