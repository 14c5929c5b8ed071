#!/usr/bin/env python
# -*- coding: utf-8 -*-

import numpy as np
from scipy import ndimage

from occluplan.adapters.iinpaint_plugin import IInpaintPlugin
from occluplan.semantic_grid import ClassId


class OracleInpaint(IInpaintPlugin):
    """
    Upper bound inpainter: unknown cells within ``leak_radius`` (Chebyshev) of any known cell copy the
    ground truth.
    """

    def __init__(self):
        super(OracleInpaint, self).__init__()

    def configure(self, conf):
        return

    def fill(self, cells, method, gt_cells=None):
        unknown = cells == ClassId.UNKNOWN
        if unknown.all():
            return cells
        distance = ndimage.distance_transform_cdt(unknown, metric='chessboard')
        return np.where(unknown & (distance <= method.leak_radius), gt_cells, cells)
