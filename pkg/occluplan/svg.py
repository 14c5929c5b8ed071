#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
SVG rendering of a frame: class colors, skeleton nodes and edges, the planned trajectory, the start pose
(pink) and the goal (green).
"""

import logging
import os
from collections import namedtuple

import jinja2
import numpy as np

from occluplan.semantic_grid import ClassId

logger = logging.getLogger(__name__)

thisdir = os.path.join(os.path.dirname(__file__))

template_dir = os.path.join(thisdir, 'templates')
jinja_env = jinja2.Environment(loader=jinja2.FileSystemLoader(template_dir),
                               autoescape=jinja2.select_autoescape(['svg', 'xml']),
                               trim_blocks=True,
                               lstrip_blocks=True)

CLASS_COLORS = {
    ClassId.UNKNOWN: '#3a3a3a',
    ClassId.ROAD: '#b0b0b0',
    ClassId.SIDEWALK: '#e0c8e0',
    ClassId.BUILDING: '#8c4a2f',
    ClassId.FENCE: '#c8b45a',
    ClassId.VEGETATION: '#4f8a3a',
    ClassId.VEHICLE: '#2f3f8c',
    ClassId.PEDESTRIAN: '#d83a3a',
    ClassId.OTHER: '#f4f1e8',
}

Run = namedtuple('Run', 'x y length color')

Point = namedtuple('Point', 'x y')


def _runs(cells):
    runs = []
    for y, row in enumerate(cells):
        starts = np.flatnonzero(np.diff(row.astype(np.int16), prepend=-1) != 0)
        ends = np.append(starts[1:], len(row))
        for a, b in zip(starts.tolist(), ends.tolist()):
            runs.append(Run(a, y, b - a, CLASS_COLORS[ClassId(int(row[a]))]))
    return runs


def _center(x, y):
    return Point(round(float(x) + 0.5, 3), round(float(y) + 0.5, 3))


def _points_attr(points):
    return ' '.join('{},{}'.format(p.x, p.y) for p in points)


def render(frame, graph=None, trajectory=None, goal=None, scale=2, title=None):
    """
    :return: SVG document as a string
    """
    grid = frame.grid
    nodes = []
    edges = []
    if graph is not None:
        for n in graph.nodes:
            center = _center(*n.cell)
            nodes.append({'x': center.x, 'y': center.y, 'kind': n.kind.name.lower()})
        for e in graph.edges:
            cells = [graph.node(e.a).cell] + list(e.polyline) + [graph.node(e.b).cell]
            edges.append(_points_attr([_center(*c) for c in cells]))

    states = [_center(s.px, s.py) for s in trajectory.states] if trajectory is not None else []

    template = jinja_env.get_template('frame.svg')
    return template.render(
        width=grid.width,
        height=grid.height,
        scale=scale,
        title=title or 'frame {}'.format(frame.frame_id),
        runs=_runs(grid.cells),
        nodes=nodes,
        edges=edges,
        trajectory=states,
        trajectory_points=_points_attr(states),
        start=_center(frame.pose.px, frame.pose.py),
        goal=_center(*goal) if goal is not None else None,
    )


def render_svg(frame, graph, trajectory, path, goal=None, scale=2):
    document = render(frame, graph, trajectory, goal=goal, scale=scale)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(document)
    logger.debug('Rendered frame %d to %s', frame.frame_id, path)
