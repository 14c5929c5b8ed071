#!/usr/bin/env python
# -*- coding: utf-8 -*-


"""
Bitwise flags describing how a frame went through the pipeline.
Flag constants must be powers of 2 and unique.
"""


#
# Begin FLAG constant declaration
#

# Frame was planned on both maps and all trajectory metrics are defined
FRAME_OK = 0

# Planner found no path on the processed (occluded / inpainted) map
PLAN_FAILED = 1 << 0

# Planner found no path on the ground truth map
GT_PLAN_FAILED = 1 << 1

# Processed skeleton graph had no node to use as local goal
NO_GOAL = 1 << 2

# Ground truth skeleton graph had no node to use as local goal
GT_NO_GOAL = 1 << 3

# Inpainting backend could not complete the frame, the raw frame is kept
INPAINT_FAILED = 1 << 4

#
# end FLAG declaration
#


FAILURE_FLAGS = PLAN_FAILED | GT_PLAN_FAILED | NO_GOAL | GT_NO_GOAL | INPAINT_FAILED


def flag_dict():
    return {f: v for f, v in globals().items() if f.isupper() and f not in ('FRAME_OK', 'FAILURE_FLAGS') and
            isinstance(v, int) and _is_pow2(v)}


def flag_names(number):
    '''
    >>> flag_names(GT_PLAN_FAILED)
    ['GT_PLAN_FAILED']
    >>> flag_names(PLAN_FAILED | INPAINT_FAILED)
    ['INPAINT_FAILED', 'PLAN_FAILED']
    '''
    return sorted(f for f, v in flag_dict().items() if has_flag(number, v))


def has_flag(number, flag):
    return number & flag == flag


def is_failed(number):
    return bool(number & FAILURE_FLAGS)


def _is_pow2(x):
    return x > 0 and x & (x - 1) == 0
