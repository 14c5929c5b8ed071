#!/usr/bin/env python
# -*- coding: utf-8 -*-

import enum
import json

import numpy


class JsonDataEncoder(json.JSONEncoder):
    def default(self, o):
        '''
        >>> JsonDataEncoder().encode(numpy.float32(0.5))
        '0.5'
        >>> JsonDataEncoder().encode(numpy.int64(3))
        '3'
        >>> JsonDataEncoder().encode({1, 2})
        '[1, 2]'
        >>> JsonDataEncoder().encode(numpy.array([[1, 0], [0, 1]]))
        '[[1, 0], [0, 1]]'
        '''
        if isinstance(o, enum.Enum):
            return o.name
        elif isinstance(o, (set, frozenset)):
            return sorted(o)
        elif isinstance(o, numpy.bool_):
            return bool(o)
        elif isinstance(o, numpy.integer):
            return int(o)
        elif isinstance(o, numpy.floating):
            return float(o)
        elif isinstance(o, numpy.ndarray):
            return o.tolist()
        else:
            return super(JsonDataEncoder, self).default(o)