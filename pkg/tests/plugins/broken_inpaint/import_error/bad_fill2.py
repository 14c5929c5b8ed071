#!/usr/bin/python
# -*- coding: utf-8 -*-

import bad_fill_not_installed_module  # noqa

from occluplan.adapters.iinpaint_plugin import IInpaintPlugin


class BadFillPlugin2(IInpaintPlugin):

    def configure(self, conf):
        return

    def fill(self, cells, method, gt_cells=None):
        return cells
