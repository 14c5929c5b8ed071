#!/usr/bin/env python
# -*- coding: utf-8 -*-

import functools
import math

import numpy as np
import pytest

from occluplan.errors import MetricError
from occluplan.flags import FRAME_OK, GT_PLAN_FAILED, PLAN_FAILED
from occluplan.metrics import (CSV_FIELDS, Difficulty, MetricsReport, aad, angle_difference, branch_accuracy,
                               classify_difficulty, frames_ahead, frechet_distance, heading_change, path_length,
                               path_length_ratio)
from occluplan.planner import PlannerState, Trajectory
from occluplan.skeleton import Node, NodeKind, SkeletonGraph


def traj(*states):
    return Trajectory([PlannerState(*s) for s in states], 5.0)


def turning(degrees, n=5):
    """
    Straight-ahead run whose heading sweeps ``degrees`` in total
    """
    step = math.radians(degrees) / (n - 1)
    return traj(*[(i, 0, i * step) for i in range(n)])


def euclid(a, b):
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2)


def frechet_oracle(p, q):
    @functools.lru_cache(maxsize=None)
    def c(i, j):
        d = euclid(p[i], q[j])
        if i == 0 and j == 0:
            return d
        if i == 0:
            return max(c(0, j - 1), d)
        if j == 0:
            return max(c(i - 1, 0), d)
        return max(min(c(i - 1, j), c(i - 1, j - 1), c(i, j - 1)), d)
    return c(len(p) - 1, len(q) - 1)


def test_frechet_examples():
    p = [(0, 0), (4, 0)]
    assert frechet_distance(p, p) == 0
    assert frechet_distance([(0, 0)], [(3, 4)]) == 5.0
    assert frechet_distance(p, [(0, 3), (4, 3)]) == 3.0


def test_frechet_accepts_trajectories():
    a = traj((0, 0, 0), (5, 0, 0))
    b = traj((0, 1, 0), (5, 1, 0))
    assert frechet_distance(a, b) == pytest.approx(1.0)


@pytest.mark.parametrize('seed', range(200))
def test_frechet_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    p = [tuple(v) for v in rng.uniform(-10, 10, size=(rng.integers(1, 7), 2))]
    q = [tuple(v) for v in rng.uniform(-10, 10, size=(rng.integers(1, 7), 2))]
    d = frechet_distance(p, q)
    assert d == pytest.approx(frechet_oracle(p, q), rel=1e-12)
    assert d == frechet_distance(q, p)
    assert d > 0
    assert d >= euclid(p[0], q[0])
    assert d >= euclid(p[-1], q[-1])


@pytest.mark.parametrize('seed', range(200))
def test_frechet_exact_on_cells(seed):
    rng = np.random.default_rng(1000 + seed)
    p = [tuple(int(c) for c in v) for v in rng.integers(-20, 21, size=(rng.integers(1, 7), 2))]
    q = [tuple(int(c) for c in v) for v in rng.integers(-20, 21, size=(rng.integers(1, 7), 2))]
    assert frechet_distance(p, q) == frechet_oracle(p, q)
    assert frechet_distance(p, p) == 0


def test_frechet_empty():
    with pytest.raises(MetricError):
        frechet_distance([], [(0, 0)])


def test_aad_examples():
    gt = traj((0, 0, 0), (5, 0, 0))
    assert aad(gt, gt) == 0
    planned = traj((0, 0, math.radians(10)), (5, 0, math.radians(20)))
    assert aad(planned, gt) == pytest.approx(15.0)


def test_aad_wraps():
    assert math.degrees(angle_difference(math.radians(179), math.radians(-179))) == pytest.approx(2.0)
    planned = traj((0, 0, math.radians(179)))
    gt = traj((0, 0, math.radians(-179)))
    assert aad(planned, gt) == pytest.approx(2.0)


def test_aad_nearest_node():
    gt = traj((0, 0, 0), (10, 0, math.pi / 2))
    planned = traj((9, 1, math.pi / 2))
    assert aad(planned, gt) == pytest.approx(0.0)
    # equidistant, lowest index wins
    assert aad(traj((5, 0, math.pi / 2)), gt) == pytest.approx(90.0)


def test_aad_empty():
    with pytest.raises(MetricError):
        aad(Trajectory.empty(), traj((0, 0, 0)))


def test_branch_accuracy():
    assert branch_accuracy(4, 4) == 100
    assert branch_accuracy(3, 4) == 75
    assert branch_accuracy(5, 4) == 125
    with pytest.raises(MetricError):
        branch_accuracy(1, 0)


def test_path_length_ratio():
    gt = [(0, 0), (0, 10)]
    assert path_length_ratio(gt, gt) == 100
    assert path_length_ratio([(0, 0), (3, 4)], gt) == 50
    assert path_length_ratio([(0, 0), (0, 5)], gt) == 50
    with pytest.raises(MetricError):
        path_length_ratio(gt, [(1, 1)])
    assert path_length([]) == 0


@pytest.mark.parametrize('n', range(2, 61))
def test_path_length_ratio_identity(n):
    # parabolic runs with lengths that do not round trip through 100 * L / L
    t = traj(*[(i * 1.7, 0.05 * i * i, 0) for i in range(n)])
    assert path_length_ratio(t, t) == 100


def test_heading_change():
    assert heading_change(None) == 0
    assert heading_change(traj((0, 0, 0))) == 0
    assert heading_change(turning(90)) == pytest.approx(90)
    # across the wrap
    assert heading_change(traj((0, 0, math.radians(170)), (1, 0, math.radians(-170)))) == pytest.approx(20)


def test_frames_ahead():
    straight = turning(0)
    assert frames_ahead([straight] * 5, 3) == 0

    sequence = [straight] * 12 + [turning(45)] * 30
    assert frames_ahead(sequence, 40) == 28
    assert frames_ahead(sequence, 12) == 0
    # first qualifying frame after the turn frame
    assert frames_ahead(sequence, 5) == 0
    assert frames_ahead([None, turning(45)], 1) == 0
    assert frames_ahead([turning(20), turning(45)], 1, turn_threshold=15) == 1


def test_frames_ahead_errors():
    with pytest.raises(MetricError):
        frames_ahead([], 0)
    with pytest.raises(MetricError):
        frames_ahead([None], 1)


def test_classify_difficulty():
    graph = SkeletonGraph([Node(0, (50, 50), NodeKind.JUNCTION, ((50, 50),)),
                           Node(1, (0, 0), NodeKind.ENDPOINT, ((0, 0),))], [])
    assert classify_difficulty(graph, (50, 150)) == Difficulty.HARD
    assert classify_difficulty(graph, (50, 151)) == Difficulty.EASY
    assert classify_difficulty(graph, (0, 0), max_range=10) == Difficulty.EASY
    assert classify_difficulty(SkeletonGraph([], []), (0, 0)) == Difficulty.EASY


def test_report_row():
    report = MetricsReport('t-1', 4, Difficulty.HARD, FRAME_OK, frechet=1.5, aad=2.0, branch_accuracy=100.0,
                           path_length_ratio=98.5, branches=3, branches_gt=3)
    row = report.to_row()
    assert len(row) == len(CSV_FIELDS)
    assert row[:4] == ['t-1', '4', 'HARD', 'OK']
    assert row[4] == '1.5'
    assert row[-1] == ''


def test_failed_report_row():
    report = MetricsReport('t-1', 0, Difficulty.EASY, PLAN_FAILED | GT_PLAN_FAILED)
    row = report.to_row()
    assert 'PLAN_FAILED' in row[3]
    assert 'GT_PLAN_FAILED' in row[3]
    assert row[4:8] == ['', '', '', '']
    data = report.to_dict()
    assert data['difficulty'] == 'EASY'
    assert data['frechet'] is None
