#!/usr/bin/env python
# -*- coding: utf-8 -*-

import math
import xml.etree.ElementTree as ET

import numpy as np

from occluplan.planner import PlannerState, Trajectory
from occluplan.semantic_grid import BitMask, ClassId, Frame, SemanticGrid, VehiclePose
from occluplan.skeleton import extract_graph
from occluplan.svg import CLASS_COLORS, render, render_svg

SVG = '{http://www.w3.org/2000/svg}'


def plus_frame():
    cells = np.full((9, 9), ClassId.SIDEWALK, dtype=np.uint8)
    cells[4, :] = ClassId.ROAD
    cells[:, 4] = ClassId.ROAD
    cells[0, 0] = ClassId.UNKNOWN
    return Frame(SemanticGrid(cells), VehiclePose(4, 8, -math.pi / 2), 3)


def circles(root, cls):
    return [c for c in root.iter(SVG + 'circle') if cls in c.get('class').split()]


def test_render_markers():
    frame = plus_frame()
    graph = extract_graph(BitMask(frame.grid.cells == ClassId.ROAD))
    root = ET.fromstring(render(frame, graph, goal=(8, 4)))

    assert len(circles(root, 'marker')) == len(graph.nodes) + 2
    assert len(circles(root, 'node')) == 5
    assert len(circles(root, 'junction')) == 1
    start, = circles(root, 'start')
    assert (start.get('cx'), start.get('cy')) == ('4.5', '8.5')
    goal, = circles(root, 'goal')
    assert (goal.get('cx'), goal.get('cy')) == ('8.5', '4.5')
    assert len(list(root.iter(SVG + 'polyline'))) == len(graph.edges)
    assert root.find(SVG + 'title').text == 'frame 3'


def test_render_map_runs():
    frame = plus_frame()
    root = ET.fromstring(render(frame))
    rects = list(root.iter(SVG + 'rect'))
    assert sum(int(r.get('width')) for r in rects) == 81
    assert rects[0].get('fill') == CLASS_COLORS[ClassId.UNKNOWN]
    assert root.get('width') == '18'
    assert root.get('viewBox') == '0 0 9 9'
    assert not circles(root, 'goal')


def test_render_trajectory(tmpdir):
    frame = plus_frame()
    traj = Trajectory([PlannerState(4, 8, -math.pi / 2), PlannerState(4, 5, -math.pi / 2)], 3)
    path = str(tmpdir.join('frame.svg'))
    render_svg(frame, None, traj, path, goal=(4, 0))

    root = ET.parse(path).getroot()
    assert len(circles(root, 'path')) == 2
    polyline, = root.iter(SVG + 'polyline')
    assert polyline.get('points') == '4.5,8.5 4.5,5.5'
    assert len(circles(root, 'marker')) == 4
