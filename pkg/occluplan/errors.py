#!/usr/bin/env python
# -*- coding: utf-8 -*-


class OccluplanError(Exception):
    pass


class GridError(OccluplanError):
    pass


class GridFormatError(GridError):
    def __init__(self, message, path=None):
        self.message = message
        self.path = path
        super(GridFormatError, self).__init__(message)

    def __str__(self):
        if self.path:
            return 'Malformed grid file {}: {}'.format(self.path, self.message)
        return 'Malformed grid file: {}'.format(self.message)


class UndeclaredClassError(GridError):
    def __init__(self, class_ids):
        self.class_ids = sorted(set(int(c) for c in class_ids))
        super(UndeclaredClassError, self).__init__()

    def __str__(self):
        return 'Undeclared class ids: {}'.format(self.class_ids)


class EmptyGridError(GridError):
    def __init__(self, message='grid has no cells'):
        super(EmptyGridError, self).__init__(message)


class PoseOutOfBoundsError(GridError):
    def __init__(self, pose, width, height):
        self.pose = pose
        self.width = width
        self.height = height
        super(PoseOutOfBoundsError, self).__init__()

    def __str__(self):
        return 'Pose ({}, {}) outside {}x{} grid'.format(self.pose[0], self.pose[1], self.width, self.height)


class DimensionMismatchError(GridError):
    def __init__(self, expected, actual):
        self.expected = tuple(expected)
        self.actual = tuple(actual)
        super(DimensionMismatchError, self).__init__()

    def __str__(self):
        return 'Dimension mismatch: expected {}, got {}'.format(self.expected, self.actual)


class SkeletonError(OccluplanError, ValueError):
    pass


class NonThinSkeletonError(SkeletonError):
    def __init__(self, cell):
        self.cell = cell
        super(NonThinSkeletonError, self).__init__()

    def __str__(self):
        return 'Skeleton is not thin: 2x2 block at {}'.format(self.cell)


class PlanningError(OccluplanError, ValueError):
    pass


class NoPathError(PlanningError):
    def __init__(self, message, expansions=0):
        self.message = message
        self.expansions = expansions
        super(NoPathError, self).__init__(message)

    def __str__(self):
        return 'No path: {} (after {} expansions)'.format(self.message, self.expansions)


class OffMaskError(PlanningError):
    def __init__(self, what, cell):
        self.what = what
        self.cell = tuple(cell)
        super(OffMaskError, self).__init__()

    def __str__(self):
        return '{} cell {} is not on the mask'.format(self.what, self.cell)


class InpaintError(OccluplanError, ValueError):
    pass


class MetricError(OccluplanError, ValueError):
    pass


class LossDomainError(OccluplanError, ValueError):
    pass


class ConfigurationError(OccluplanError):
    def __init__(self, message):
        message = 'Configuration error: {}'.format(message)

        super(ConfigurationError, self).__init__(message)


class SynthError(OccluplanError, ValueError):
    pass
