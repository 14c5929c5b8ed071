#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Hybrid A* over (px, py, theta) on a road mask.

States are expanded by forward constant-curvature arcs (motion primitives). The heuristic is the largest
of the straight line distance, the 8-connected shortest path length on the mask scaled down so that it
never exceeds the length of a drivable path, and the shortest turn-then-straight path allowed by the
turning radius.
"""

import functools
import heapq
import logging
import math
from collections import namedtuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from occluplan.errors import NoPathError, OffMaskError, PlanningError
from occluplan.semantic_grid import cell_of, normalize_angle

logger = logging.getLogger(__name__)


# octile length over-estimates the euclidean length of the same displacement at most by this factor
OCTILE_FACTOR = math.sqrt(4 - 2 * math.sqrt(2))

FEASIBILITY_TOLERANCE = 1e-9

HALF_DIAGONAL = math.sqrt(0.5)

TWO_PI = 2 * math.pi

ANGLE_EPS = 1e-9

_STEPS = ((1, 0, 1.0), (0, 1, 1.0), (1, 1, math.sqrt(2)), (-1, 1, math.sqrt(2)))


class PlannerState(namedtuple('PlannerState', 'px py theta')):
    __slots__ = ()

    def __new__(cls, px, py, theta=0.0):
        return super(PlannerState, cls).__new__(cls, float(px), float(py), normalize_angle(float(theta)))

    @property
    def cell(self):
        return cell_of(self.px, self.py)


class Trajectory(namedtuple('Trajectory', 'states step_length total_length curvatures')):
    """
    Planner output. ``curvatures[i]`` is the curvature of the arc from state i to state i + 1.
    """
    __slots__ = ()

    def __new__(cls, states, step_length, total_length=None, curvatures=None):
        states = list(states)
        if total_length is None:
            total_length = max(0, len(states) - 1) * step_length
        curvatures = list(curvatures) if curvatures is not None else []
        return super(Trajectory, cls).__new__(cls, states, float(step_length), float(total_length), curvatures)

    @classmethod
    def empty(cls, step_length=0.0):
        return cls([], step_length, 0.0)

    def __len__(self):
        return len(self.states)

    def points(self):
        return [(s.px, s.py) for s in self.states]

    def headings(self):
        return [s.theta for s in self.states]


class VehicleParams(namedtuple('VehicleParams',
                               'r_min step_length n_steer theta_bins goal_tol max_expansions xy_resolution')):
    """
    ``xy_resolution`` is the closed-set cell size in grid cells, half a step when not given.
    """
    __slots__ = ()

    def __new__(cls, r_min=25.0, step_length=5.0, n_steer=5, theta_bins=72, goal_tol=3.0, max_expansions=30000,
                xy_resolution=None):
        r_min = float(r_min)
        step_length = float(step_length)
        n_steer = int(n_steer)
        theta_bins = int(theta_bins)
        goal_tol = float(goal_tol)
        max_expansions = int(max_expansions)
        xy_resolution = step_length / 2 if xy_resolution is None else float(xy_resolution)
        if not r_min > 0:
            raise PlanningError('r_min must be > 0, got {}'.format(r_min))
        if not step_length > 0:
            raise PlanningError('step_length must be > 0, got {}'.format(step_length))
        if n_steer < 3 or n_steer % 2 == 0:
            raise PlanningError('n_steer must be odd and >= 3, got {}'.format(n_steer))
        if theta_bins < 16:
            raise PlanningError('theta_bins must be >= 16, got {}'.format(theta_bins))
        if goal_tol < 0:
            raise PlanningError('goal_tol must be >= 0, got {}'.format(goal_tol))
        if max_expansions < 1:
            raise PlanningError('max_expansions must be >= 1, got {}'.format(max_expansions))
        if not xy_resolution > 0:
            raise PlanningError('xy_resolution must be > 0, got {}'.format(xy_resolution))
        return super(VehicleParams, cls).__new__(cls, r_min, step_length, n_steer, theta_bins, goal_tol,
                                                 max_expansions, xy_resolution)

    @property
    def max_heading_change(self):
        return self.step_length / self.r_min

    @property
    def goal_radius(self):
        """
        Radius of a disc around the goal cell center holding every state that passes the goal test
        """
        return max(self.goal_tol, HALF_DIAGONAL)


class _Primitives(namedtuple('_Primitives', 'curvatures dtheta offsets')):
    """
    ``offsets[k]`` holds the samples of arc k in the frame of a state heading along +x, the last sample
    being the arc end.
    """
    __slots__ = ()


@functools.lru_cache(maxsize=32)
def _primitives(params):
    curvatures = np.linspace(-1.0 / params.r_min, 1.0 / params.r_min, params.n_steer)
    curvatures[params.n_steer // 2] = 0.0

    n_samples = max(1, int(math.ceil(params.step_length)))
    s = params.step_length * np.arange(1, n_samples + 1) / n_samples

    offsets = np.zeros((params.n_steer, n_samples, 2))
    for k, kappa in enumerate(curvatures):
        if kappa == 0.0:
            offsets[k, :, 0] = s
        else:
            offsets[k, :, 0] = np.sin(kappa * s) / kappa
            offsets[k, :, 1] = (1 - np.cos(kappa * s)) / kappa
    return _Primitives(curvatures, curvatures * params.step_length, offsets)


def _swept(state, prims):
    """
    World coordinates of all arc samples from a state, shape (n_steer, n_samples, 2)
    """
    c = math.cos(state.theta)
    s = math.sin(state.theta)
    dx = prims.offsets[..., 0]
    dy = prims.offsets[..., 1]
    return np.stack((state.px + dx * c - dy * s, state.py + dx * s + dy * c), axis=-1)


def motion_primitives(s, params):
    """
    One successor per steering sample, curvatures evenly spaced in [-1/r_min, 1/r_min], forward only.
    """
    prims = _primitives(params)
    ends = _swept(s, prims)[:, -1, :]
    return [PlannerState(ends[k, 0], ends[k, 1], s.theta + prims.dtheta[k]) for k in range(params.n_steer)]


def _on_mask(bits, cell):
    x, y = cell
    return 0 <= x < bits.shape[1] and 0 <= y < bits.shape[0] and bool(bits[y, x])


def holonomic_costmap(mask, goal):
    """
    Shortest 8-connected path length (axis step 1, diagonal step sqrt(2)) from every mask cell to the goal
    through mask cells, +inf where the goal cannot be reached.
    """
    bits = mask.bits
    if not _on_mask(bits, goal):
        raise OffMaskError('goal', goal)

    height, width = bits.shape
    index = np.full(bits.shape, -1, dtype=np.int64)
    n = int(bits.sum())
    index[bits] = np.arange(n)

    rows, cols, weights = [], [], []
    for dx, dy, w in _STEPS:
        y_src = slice(0, height - dy)
        y_dst = slice(dy, height)
        x_src = slice(max(0, -dx), width - max(0, dx))
        x_dst = slice(max(0, dx), width - max(0, -dx))
        both = bits[y_src, x_src] & bits[y_dst, x_dst]
        rows.append(index[y_src, x_src][both])
        cols.append(index[y_dst, x_dst][both])
        weights.append(np.full(int(both.sum()), w))

    graph = coo_matrix((np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    distances = dijkstra(graph.tocsr(), directed=False, indices=int(index[goal[1], goal[0]]))

    costmap = np.full(bits.shape, np.inf)
    costmap[bits] = distances
    return costmap


def select_local_goal(graph, goal):
    """
    Node cell closest to the goal, lowest node id on ties.
    """
    if graph.is_empty():
        raise PlanningError('Cannot select a local goal on an empty graph')
    gx, gy = goal
    best = min(graph.nodes, key=lambda n: ((n.cell[0] - gx) ** 2 + (n.cell[1] - gy) ** 2, n.id))
    return best.cell


@functools.lru_cache(maxsize=32)
def _arc_table(params):
    """
    Primitives as plain tuples ``(curvature, dtheta, samples)`` for the search loop
    """
    prims = _primitives(params)
    return tuple((float(kappa), float(dtheta), tuple(map(tuple, offsets.tolist())))
                 for kappa, dtheta, offsets in zip(prims.curvatures, prims.dtheta, prims.offsets))


def turning_bound(px, py, theta, goal, r_min, margin=0.0):
    '''
    Length of the shortest forward path with turning radius >= r_min from (px, py, theta) to the goal point,
    any arrival heading. Such a path is one turn followed by a straight segment as long as the goal lies
    outside both turning circles; 0 is returned when it lies within ``margin`` of either circle.

    >>> round(turning_bound(0, 0, 0, (10, 0), 1), 9)
    10.0
    >>> round(turning_bound(0, 0, 0, (0, 3), 1), 6) == round(2 * math.pi / 3 + math.sqrt(3), 6)
    True
    '''
    dx = goal[0] - px
    dy = goal[1] - py
    c = math.cos(theta)
    s = math.sin(theta)
    ahead = dx * c + dy * s
    left = dy * c - dx * s
    best = math.inf
    for side in (left, -left):
        d = math.hypot(ahead, side - r_min)
        if d < r_min + margin:
            return 0.0
        turn = (math.atan2(side - r_min, ahead) - math.acos(r_min / d) + math.pi / 2) % TWO_PI
        if turn > TWO_PI - ANGLE_EPS:
            # goal dead ahead, rounding wrapped a zero turn
            turn = 0.0
        best = min(best, r_min * turn + math.sqrt(d * d - r_min * r_min))
    return best


def _estimate(px, py, theta, goal, grid_cost, params):
    slack = params.goal_radius
    euclid = math.hypot(goal[0] - px, goal[1] - py)
    grid = grid_cost / OCTILE_FACTOR - 1.0
    turn = turning_bound(px, py, theta, goal, params.r_min, slack)
    return max(0.0, max(euclid, grid, turn) - slack)


def heuristic(state, goal, costmap, params):
    """
    Lower bound on the remaining arc length: the largest of the straight line distance, the scaled
    holonomic cost and the turning radius bound, less the goal radius.
    """
    x, y = state.cell
    return _estimate(state.px, state.py, state.theta, goal, float(costmap[y, x]), params)


def _closed_key(px, py, theta, params):
    res = params.xy_resolution
    bins = params.theta_bins
    return (math.floor(px / res + 0.5), math.floor(py / res + 0.5),
            int(math.floor((theta + math.pi) / TWO_PI * bins)) % bins)


def _at_goal(px, py, goal, params):
    return ((math.floor(px + 0.5), math.floor(py + 0.5)) == goal or
            math.hypot(px - goal[0], py - goal[1]) <= params.goal_tol)


def plan(mask, start, goal, params, costmap=None):
    """
    Hybrid A* from start (any object with px, py, theta) to within goal_tol of the goal cell.

    States are deduplicated on cells of ``params.xy_resolution`` and ``params.theta_bins`` heading bins.

    :param costmap: holonomic_costmap(mask, goal), computed when not given
    :return: Trajectory whose states all lie on the mask
    """
    bits = mask.bits
    start = PlannerState(start[0], start[1], start[2])
    goal = (int(goal[0]), int(goal[1]))

    if not _on_mask(bits, start.cell):
        raise OffMaskError('start', start.cell)
    if not _on_mask(bits, goal):
        raise OffMaskError('goal', goal)

    if _at_goal(start.px, start.py, goal, params):
        return Trajectory([start], params.step_length, 0.0)

    if costmap is None:
        costmap = holonomic_costmap(mask, goal)
    if not np.isfinite(costmap[start.cell[1], start.cell[0]]):
        raise NoPathError('goal {} is not connected to start {} on the mask'.format(goal, start.cell))

    height, width = bits.shape
    free = bits.ravel().tolist()
    cost = costmap.ravel().tolist()
    arcs = _arc_table(params)
    floor = math.floor
    inf = math.inf

    states = [tuple(start)]
    parents = [-1]
    steering = [None]
    costs = [0.0]
    keys = [_closed_key(start.px, start.py, start.theta, params)]
    best = {keys[0]: 0.0}
    closed = set()

    h0 = heuristic(start, goal, costmap, params)
    counter = 0
    open_set = [(h0, h0, counter, 0)]
    expansions = 0

    while open_set:
        _, _, _, i = heapq.heappop(open_set)
        key = keys[i]
        if key in closed:
            continue
        closed.add(key)

        px, py, theta = states[i]
        if _at_goal(px, py, goal, params):
            return _trajectory(i, states, parents, steering, params, expansions)

        expansions += 1
        if expansions > params.max_expansions:
            raise NoPathError('expansion limit {} reached'.format(params.max_expansions), expansions)

        c = math.cos(theta)
        s = math.sin(theta)
        g = costs[i] + params.step_length
        for kappa, dtheta, samples in arcs:
            ex, ey = samples[-1]
            nx = px + ex * c - ey * s
            ny = py + ex * s + ey * c
            nt = normalize_angle(theta + dtheta)
            succ_key = _closed_key(nx, ny, nt, params)
            if succ_key in closed or best.get(succ_key, inf) <= g:
                continue

            # the last sample is the arc end, so its cell is the successor cell
            for ox, oy in samples:
                x = floor(px + ox * c - oy * s + 0.5)
                y = floor(py + ox * s + oy * c + 0.5)
                if not (0 <= x < width and 0 <= y < height and free[y * width + x]):
                    break
            else:
                grid_cost = cost[y * width + x]
                if grid_cost == inf:
                    continue
                best[succ_key] = g
                h = _estimate(nx, ny, nt, goal, grid_cost, params)
                states.append((nx, ny, nt))
                parents.append(i)
                steering.append(kappa)
                costs.append(g)
                keys.append(succ_key)
                counter += 1
                heapq.heappush(open_set, (g + h, h, counter, len(states) - 1))

    raise NoPathError('open set exhausted', expansions)


def _trajectory(i, states, parents, steering, params, expansions):
    path = []
    curvatures = []
    while i >= 0:
        # stored headings are already wrapped
        path.append(PlannerState._make(states[i]))
        if steering[i] is not None:
            curvatures.append(steering[i])
        i = parents[i]
    path.reverse()
    curvatures.reverse()
    logger.debug('Planned %d states after %d expansions', len(path), expansions)
    return Trajectory(path, params.step_length, (len(path) - 1) * params.step_length, curvatures)


def heading_step(a, b):
    '''
    Signed heading change from a to b wrapped into [-pi, pi).

    >>> round(heading_step(math.radians(179), math.radians(-179)), 9) == round(math.radians(2), 9)
    True
    '''
    return normalize_angle(b - a)


def trajectory_is_feasible(traj, params, mask=None):
    """
    Curvature bound on every step and, when a mask is given, every state on the mask.
    """
    limit = params.max_heading_change + FEASIBILITY_TOLERANCE
    for a, b in zip(traj.states, traj.states[1:]):
        if abs(heading_step(a.theta, b.theta)) > limit:
            return False
    if mask is not None:
        return all(_on_mask(mask.bits, s.cell) for s in traj.states)
    return True
