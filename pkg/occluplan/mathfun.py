#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Aggregates over per-frame values, None marks a value that was not measured
'''

import math


def median(results):
    '''
    Middle value, mean of the two middle ones for an even count, None when empty.

    >>> median([3, 1, 2])
    2
    >>> median([1, 0])
    0.5
    >>> median([]) is None
    True
    '''
    values = sorted(results)
    if not values:
        return None
    mid = len(values) // 2
    if len(values) % 2:
        return values[mid]
    return (values[mid - 1] + values[mid]) / 2.0


def defined(results):
    '''
    >>> defined([1, None, 2])
    [1, 2]
    '''
    return [r for r in results if r is not None]


def avg(results):
    '''
    >>> avg([]) is None
    True

    >>> avg([0, 1])
    0.5

    >>> avg([None, 3])
    3.0
    '''

    results = defined(results)
    if not results:
        return None
    return math.fsum(results) / len(results)


def weighted_avg(pairs):
    '''
    Mean of (mean, count) pairs weighted by count.

    >>> weighted_avg([(1.0, 1), (4.0, 2)])
    3.0

    >>> weighted_avg([(None, 0), (2.0, 3)])
    2.0

    >>> weighted_avg([]) is None
    True
    '''

    pairs = [(m, n) for m, n in pairs if m is not None and n]
    total = sum(n for _, n in pairs)
    if not total:
        return None
    return math.fsum(m * n for m, n in pairs) / total
