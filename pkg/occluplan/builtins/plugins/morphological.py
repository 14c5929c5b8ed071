#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging

import numpy as np
from scipy import ndimage

from occluplan.adapters.iinpaint_plugin import IInpaintPlugin
from occluplan.semantic_grid import ClassId

logger = logging.getLogger(__name__)


class MorphologicalInpaint(IInpaintPlugin):
    """
    Road majority vote over a square window, repeated until nothing changes.

    An unknown cell becomes ROAD when strictly more than half of its known neighbors are ROAD and at
    least half of the in-grid window around it is known. Ties never fill.
    """

    def __init__(self):
        super(MorphologicalInpaint, self).__init__()
        self.max_iterations = 0

    def configure(self, conf):
        """
        :param conf: ``max_iterations`` bounds the fixpoint loop, 0 means until stable
        """
        self.max_iterations = int(conf.get('max_iterations', 0))

    def fill(self, cells, method, gt_cells=None):
        size = 2 * method.radius + 1
        weights = np.ones((size, size), dtype=np.int32)

        known = cells != ClassId.UNKNOWN
        road = cells == ClassId.ROAD

        window = ndimage.correlate(np.ones(cells.shape, dtype=np.int32), weights, mode='constant', cval=0)
        # the center never votes: candidates are unknown
        quorum_size = window - 1

        iterations = 0
        while True:
            n_known = ndimage.correlate(known.astype(np.int32), weights, mode='constant', cval=0)
            n_road = ndimage.correlate(road.astype(np.int32), weights, mode='constant', cval=0)

            grow = ~known & (2 * n_known >= quorum_size) & (2 * n_road > n_known)
            if not grow.any():
                break

            road |= grow
            known |= grow
            iterations += 1
            if self.max_iterations and iterations >= self.max_iterations:
                logger.warning('Stopped road vote after %d iterations before reaching fixpoint', iterations)
                break

        logger.debug('Road vote reached fixpoint after %d iterations', iterations)
        return np.where(road & (cells == ClassId.UNKNOWN), np.uint8(ClassId.ROAD), cells)
