#!/usr/bin/env python
# -*- coding: utf-8 -*-

from abc import ABCMeta, abstractmethod


class IInpaintPlugin(object, metaclass=ABCMeta):
    """
    Adapter for plugins of category Inpaint. The plugin name is the inpainting variant it serves, lowercase.

    The plugin manager calls configure() once after loading, then activate(). A backend whose configure() raises
    stays deactivated and is never asked to fill.
    """

    def __init__(self):
        self.is_activated = False

    def activate(self):
        self.is_activated = True

    def deactivate(self):
        self.is_activated = False

    @abstractmethod
    def configure(self, conf):
        """
        :param conf: dict of the [Configuration] section, overridden by ``plugin.<name>.*`` run config keys
        """
        raise NotImplementedError

    @abstractmethod
    def fill(self, cells, method, gt_cells=None):
        """
        Fill unknown cells of a raster.

        :param cells: (numpy uint8 array, read-only) class ids of the occluded grid, ``cells[y, x]``
        :param method: occluplan.inpaint.InpaintMethod with the variant parameters
        :param gt_cells: ground truth class ids, only given when the variant needs them
        :return: array of the same shape; known input cells are restored by the caller anyway
        """
        raise NotImplementedError
