#!/usr/bin/python
# -*- coding: utf-8 -*-

from occluplan.adapters.iinpaint_plugin import IInpaintPlugin


class BadFillPlugin1(IInpaintPlugin):
    """
    Example of an inpainting plugin that will fail because fill() has not been implemented
    """

    def configure(self, conf):
        return
