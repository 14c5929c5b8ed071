#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Evaluation metrics comparing a planned trajectory and skeleton against the ground truth ones.
"""

import enum
import logging
import math
from collections import namedtuple

import numpy as np
from scipy.spatial.distance import cdist

from occluplan.errors import MetricError
from occluplan.flags import FRAME_OK, flag_names
from occluplan.semantic_grid import normalize_angle
from occluplan.skeleton import NodeKind

logger = logging.getLogger(__name__)


DEFAULT_TURN_THRESHOLD = 30.0

DEFAULT_DIFFICULTY_RANGE = 100


class Difficulty(enum.Enum):
    EASY = 'EASY'
    HARD = 'HARD'


TRAJECTORY_METRICS = ('frechet', 'aad', 'branch_accuracy', 'path_length_ratio')

CSV_FIELDS = ('sequence_id', 'frame_id', 'difficulty', 'flags', 'frechet', 'aad', 'branch_accuracy',
              'path_length_ratio', 'branches', 'branches_gt', 'frames_ahead')


class MetricsReport(namedtuple('MetricsReport', 'sequence_id frame_id difficulty flags frechet aad branch_accuracy '
                                                'path_length_ratio branches branches_gt frames_ahead')):
    """
    Metrics of one frame. Trajectory metrics are None when a plan failed (see ``flags``).
    ``frames_ahead`` is a sequence level value and stays None on frame reports.
    """
    __slots__ = ()

    def __new__(cls, sequence_id, frame_id, difficulty, flags=FRAME_OK, frechet=None, aad=None,
                branch_accuracy=None, path_length_ratio=None, branches=None, branches_gt=None, frames_ahead=None):
        return super(MetricsReport, cls).__new__(cls, sequence_id, frame_id, difficulty, flags, frechet, aad,
                                                 branch_accuracy, path_length_ratio, branches, branches_gt,
                                                 frames_ahead)

    def value(self, name):
        return getattr(self, name)

    def to_row(self):
        row = []
        for field in CSV_FIELDS:
            v = getattr(self, field)
            if v is None:
                row.append('')
            elif isinstance(v, Difficulty):
                row.append(v.name)
            elif field == 'flags':
                row.append('|'.join(flag_names(v)) or 'OK')
            elif isinstance(v, float):
                row.append(repr(v))
            else:
                row.append(str(v))
        return row

    def to_dict(self):
        d = self._asdict()
        d['difficulty'] = self.difficulty.name
        d['flags'] = flag_names(self.flags)
        return d


def _points(path):
    if hasattr(path, 'states'):
        path = [(s.px, s.py) for s in path.states]
    points = np.asarray(path, dtype=np.float64)
    if points.size == 0:
        return np.zeros((0, 2))
    return points.reshape(-1, 2)


def frechet_distance(p, q):
    """
    Discrete Frechet distance of two polylines.
    """
    p = _points(p)
    q = _points(q)
    if not len(p) or not len(q):
        raise MetricError('Frechet distance needs non-empty polylines')

    d = cdist(p, q)
    n, m = d.shape
    ca = np.empty((n, m))
    ca[0, 0] = d[0, 0]
    for j in range(1, m):
        ca[0, j] = max(ca[0, j - 1], d[0, j])
    for i in range(1, n):
        ca[i, 0] = max(ca[i - 1, 0], d[i, 0])
        for j in range(1, m):
            ca[i, j] = max(min(ca[i - 1, j], ca[i - 1, j - 1], ca[i, j - 1]), d[i, j])
    return float(ca[-1, -1])


def angle_difference(a, b):
    '''
    Absolute heading difference in [0, pi].

    >>> round(math.degrees(angle_difference(math.radians(179), math.radians(-179))), 6)
    2.0
    '''
    return abs(normalize_angle(a - b))


def aad(traj_in, traj_gt):
    """
    Average angle difference in degrees between every node of traj_in and the closest node of traj_gt
    (lowest index on ties).
    """
    if not len(traj_in.states) or not len(traj_gt.states):
        raise MetricError('AAD needs non-empty trajectories')

    nearest = np.argmin(cdist(_points(traj_in), _points(traj_gt)), axis=1)
    diffs = [angle_difference(s.theta, traj_gt.states[j].theta) for s, j in zip(traj_in.states, nearest)]
    return math.degrees(math.fsum(diffs) / len(diffs))


def branch_accuracy(n_im, n_gt):
    if n_gt < 1:
        raise MetricError('branch accuracy needs at least one ground truth branch, got {}'.format(n_gt))
    return 100.0 * n_im / n_gt


def path_length(path):
    points = _points(path)
    if len(points) < 2:
        return 0.0
    return float(math.fsum(np.hypot(*np.diff(points, axis=0).T)))


def path_length_ratio(traj, traj_gt):
    length_gt = path_length(traj_gt)
    if length_gt <= 0:
        raise MetricError('ground truth path has zero length')
    return 100.0 * (path_length(traj) / length_gt)


def heading_change(traj):
    """
    Largest net heading change in one direction along a trajectory, in degrees
    """
    if traj is None or len(traj.states) < 2:
        return 0.0
    headings = np.unwrap([s.theta for s in traj.states])
    return math.degrees(float(headings.max() - headings.min()))


def frames_ahead(sequence, turn_frame, turn_threshold=DEFAULT_TURN_THRESHOLD):
    """
    How many frames before turn_frame the planner first plans the turn.

    :param sequence: per-frame trajectories in frame order, None for frames without a plan
    :param turn_frame: index of the turn frame in ``sequence``
    :param turn_threshold: heading change in degrees that counts as planning a turn
    """
    if not sequence:
        raise MetricError('frames_ahead needs a non-empty sequence')
    if not 0 <= turn_frame < len(sequence):
        raise MetricError('turn frame {} outside the sequence of {} frames'.format(turn_frame, len(sequence)))

    for i, traj in enumerate(sequence):
        if heading_change(traj) >= turn_threshold:
            return max(0, turn_frame - i)
    return 0


def classify_difficulty(gt_graph, pose, max_range=DEFAULT_DIFFICULTY_RANGE):
    """
    HARD when a ground truth junction lies within max_range cells of the pose
    """
    px, py = pose[0], pose[1]
    for node in gt_graph.nodes:
        if node.kind == NodeKind.JUNCTION and math.hypot(node.cell[0] - px, node.cell[1] - py) <= max_range:
            return Difficulty.HARD
    return Difficulty.EASY
