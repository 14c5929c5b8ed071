#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging

from occluplan.adapters.iinpaint_plugin import IInpaintPlugin
from occluplan.errors import DimensionMismatchError, GridError, InpaintError
from occluplan.semantic_grid import load_grid

logger = logging.getLogger(__name__)


class ExternalInpaint(IInpaintPlugin):
    """
    Ingests maps inpainted by an outside model, stored in the grid file format.
    """

    def __init__(self):
        super(ExternalInpaint, self).__init__()

    def configure(self, conf):
        return

    def fill(self, cells, method, gt_cells=None):
        try:
            grid = load_grid(method.path)
        except GridError as e:
            raise InpaintError('Cannot use external map {}: {}'.format(method.path, e)) from e
        if grid.shape != cells.shape:
            raise DimensionMismatchError(cells.shape, grid.shape)
        logger.debug('Loaded external map %s', method.path)
        return grid.cells
