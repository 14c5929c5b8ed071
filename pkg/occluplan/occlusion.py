#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Procedural ground truth maps, lidar-like occlusion by 2D ray casting and scripted drive sequences.
"""

import enum
import json
import logging
import math
import os
from collections import namedtuple

import numpy as np
from scipy import ndimage

from occluplan.errors import GridFormatError, PoseOutOfBoundsError, SynthError
from occluplan.semantic_grid import (BitMask, ClassId, DEFAULT_RESOLUTION, Frame, SemanticGrid, VehiclePose,  # noqa
                                     load_frame, load_grid, remove_classes, save_frame, save_grid)

logger = logging.getLogger(__name__)


MIN_SIZE = 64

TILE = 8

BORDER_GAP = 12

DEFAULT_N_RAYS = 720

DEFAULT_MAX_RANGE = 100

DEFAULT_STEP = 2

DEFAULT_TURN_LEAD = 24

WINDOW_FRAMES = 50

OCCLUDERS = (ClassId.BUILDING, ClassId.FENCE, ClassId.VEHICLE)

_OCCLUDER_LUT = np.zeros(256, dtype=bool)
_OCCLUDER_LUT[[int(c) for c in OCCLUDERS]] = True

MANIFEST = 'manifest.json'


class MapKind(enum.Enum):
    STRAIGHT = 'STRAIGHT'
    L_TURN = 'L_TURN'
    T_JUNCTION = 'T_JUNCTION'
    X_JUNCTION = 'X_JUNCTION'

    @classmethod
    def parse(cls, value):
        '''
        >>> MapKind.parse('t')
        <MapKind.T_JUNCTION: 'T_JUNCTION'>
        >>> MapKind.parse('x_junction')
        <MapKind.X_JUNCTION: 'X_JUNCTION'>
        '''
        if isinstance(value, cls):
            return value
        name = str(value).upper()
        name = _KIND_ALIASES.get(name, name)
        try:
            return cls[name]
        except KeyError:
            raise SynthError('Unknown map kind {}, expected one of {}'.format(value, [k.name for k in cls]))


_KIND_ALIASES = {'S': 'STRAIGHT', 'L': 'L_TURN', 'T': 'T_JUNCTION', 'X': 'X_JUNCTION'}


class MapSpec(namedtuple('MapSpec', 'kind road_width seed obstacle_density')):
    __slots__ = ()

    def __new__(cls, kind, road_width=20, seed=0, obstacle_density=0.7):
        kind = MapKind.parse(kind)
        road_width = int(road_width)
        seed = int(seed)
        obstacle_density = float(obstacle_density)
        if road_width < 3:
            raise SynthError('road_width must be >= 3, got {}'.format(road_width))
        if seed < 0:
            raise SynthError('seed must be >= 0, got {}'.format(seed))
        if not 0.0 <= obstacle_density <= 1.0:
            raise SynthError('obstacle_density must be within [0, 1], got {}'.format(obstacle_density))
        return super(MapSpec, cls).__new__(cls, kind, road_width, seed, obstacle_density)


class Sequence(namedtuple('Sequence', 'sequence_id spec gt frames goal turn_frame window')):
    """
    Scripted drive: occluded frames, the fixed ground truth map, the world goal cell, the index of the
    frame closest to the turn (None on straight roads) and the evaluation window (first, last frame).
    """
    __slots__ = ()

    def without_classes(self, classes):
        """
        Same drive with the given classes turned into UNKNOWN on the ground truth and on every frame
        """
        if not classes:
            return self
        frames = [f._replace(grid=remove_classes(f.grid, classes)) for f in self.frames]
        return self._replace(gt=remove_classes(self.gt, classes), frames=frames)


def sequence_id(spec):
    return '{}-{}'.format(spec.kind.name.lower(), spec.seed)


def _layout(spec, width, height):
    """
    Road rows / columns of the map: (x0, y0) top-left cell of the road crossing and the turn side.
    """
    if width < MIN_SIZE or height < MIN_SIZE:
        raise SynthError('Map must be at least {0}x{0}, got {1}x{2}'.format(MIN_SIZE, width, height))
    if spec.road_width > min(width, height) // 4:
        raise SynthError('road_width {} does not fit a {}x{} map'.format(spec.road_width, width, height))

    x0 = width // 2 - spec.road_width // 2
    y0 = height // 2 - spec.road_width // 2
    return x0, y0


def _rng(spec):
    rng = np.random.default_rng(spec.seed)
    # first draw decides the turn side, +1 right / -1 left
    side = 1 if rng.integers(2) else -1
    return rng, side


def _road(spec, width, height):
    x0, y0 = _layout(spec, width, height)
    rng, side = _rng(spec)
    rw = spec.road_width
    road = np.zeros((height, width), dtype=bool)
    kind = spec.kind

    if kind == MapKind.STRAIGHT or kind == MapKind.X_JUNCTION:
        road[:, x0:x0 + rw] = True
    else:
        road[y0:, x0:x0 + rw] = True

    if kind == MapKind.T_JUNCTION or kind == MapKind.X_JUNCTION:
        road[y0:y0 + rw, :] = True
    elif kind == MapKind.L_TURN:
        if side > 0:
            road[y0:y0 + rw, x0:] = True
        else:
            road[y0:y0 + rw, :x0 + rw] = True

    return road, rng, side


def synth_map(spec, width, height, resolution=DEFAULT_RESOLUTION):
    road, rng, _ = _road(spec, width, height)

    setback = max(2, spec.road_width // 4)
    near_road = ndimage.binary_dilation(road, structure=np.ones((3, 3), dtype=bool), iterations=setback)

    cells = np.full((height, width), ClassId.OTHER, dtype=np.uint8)

    ny = -(-height // TILE)
    nx = -(-width // TILE)
    placed = rng.random((ny, nx)) < spec.obstacle_density
    buildings = np.kron(placed, np.ones((TILE, TILE), dtype=bool))[:height, :width]
    cells[buildings & ~near_road] = ClassId.BUILDING
    cells[near_road] = ClassId.SIDEWALK
    cells[road] = ClassId.ROAD

    logger.debug('Synthesized %s %dx%d map: %d road cells, %d building cells', spec.kind.name, width, height,
                 int(road.sum()), int(np.count_nonzero(cells == ClassId.BUILDING)))
    return SemanticGrid(cells, resolution=resolution)


def raycast_visibility(gt, pose, n_rays=DEFAULT_N_RAYS, max_range=DEFAULT_MAX_RANGE):
    """
    Cells seen from the pose by n_rays evenly spaced rays.

    Every ray walks the cells it passes through (grid traversal) until it leaves the grid, enters a cell
    farther than max_range or stops in an occluder cell, which is itself visible.
    """
    px, py = pose[0], pose[1]
    cx, cy = int(math.floor(px + 0.5)), int(math.floor(py + 0.5))
    if not gt.in_bounds(cx, cy):
        raise PoseOutOfBoundsError(pose, gt.width, gt.height)
    if n_rays < 8:
        raise SynthError('n_rays must be >= 8, got {}'.format(n_rays))
    if not max_range > 0:
        raise SynthError('max_range must be > 0, got {}'.format(max_range))

    height, width = gt.shape
    angles = 2 * np.pi * np.arange(n_rays) / n_rays
    dx = np.cos(angles)
    dy = np.sin(angles)

    # shift so that cell i covers [i, i + 1)
    u0 = px + 0.5
    v0 = py + 0.5
    ix = np.full(n_rays, cx, dtype=np.int64)
    iy = np.full(n_rays, cy, dtype=np.int64)

    step_x = np.where(dx > 0, 1, -1)
    step_y = np.where(dy > 0, 1, -1)
    adx = np.abs(dx)
    ady = np.abs(dy)
    with np.errstate(divide='ignore', invalid='ignore'):
        delta_x = np.where(adx > 0, 1.0 / np.where(adx > 0, adx, 1.0), np.inf)
        delta_y = np.where(ady > 0, 1.0 / np.where(ady > 0, ady, 1.0), np.inf)
    t_x = np.where(dx > 0, cx + 1 - u0, u0 - cx) * delta_x
    t_y = np.where(dy > 0, cy + 1 - v0, v0 - cy) * delta_y
    t_x = np.where(adx > 0, t_x, np.inf)
    t_y = np.where(ady > 0, t_y, np.inf)

    t_entry = np.zeros(n_rays)
    alive = np.ones(n_rays, dtype=bool)
    visible = np.zeros((height, width), dtype=bool)

    max_steps = min(int(math.ceil(max_range * math.sqrt(2))), width + height) + 3
    for _ in range(max_steps):
        alive &= (ix >= 0) & (ix < width) & (iy >= 0) & (iy < height) & (t_entry <= max_range)
        if not alive.any():
            break
        rx = ix[alive]
        ry = iy[alive]
        visible[ry, rx] = True
        blocked = np.zeros(n_rays, dtype=bool)
        blocked[alive] = _OCCLUDER_LUT[gt.cells[ry, rx]]
        alive &= ~blocked

        along_x = t_x < t_y
        t_entry = np.where(along_x, t_x, t_y)
        ix = np.where(along_x, ix + step_x, ix)
        iy = np.where(along_x, iy, iy + step_y)
        t_x = np.where(along_x, t_x + delta_x, t_x)
        t_y = np.where(along_x, t_y, t_y + delta_y)

    return BitMask(visible)


def apply_occlusion(gt, vis):
    gt.check_same_shape(vis)
    return gt.with_cells(np.where(vis.bits, gt.cells, np.uint8(ClassId.UNKNOWN)))


def visible_fraction(vis):
    if not vis.bits.size:
        return 0.0
    return vis.popcount() / float(vis.bits.size)


def synth_sequence(spec, width, height, step=DEFAULT_STEP, n_rays=DEFAULT_N_RAYS, max_range=DEFAULT_MAX_RANGE,
                   turn_lead=DEFAULT_TURN_LEAD):
    """
    Drive up the vertical road centerline, one frame every ``step`` cells.

    On junction maps the drive ends ``turn_lead`` cells before the junction center and the goal lies on
    the side arm the vehicle turns into; that last frame is the turn frame.
    """
    if step <= 0:
        raise SynthError('step must be > 0, got {}'.format(step))

    gt = synth_map(spec, width, height)
    x0, y0 = _layout(spec, width, height)
    _, side = _rng(spec)
    rw = spec.road_width

    center_x = x0 + (rw - 1) / 2.0
    center_y = y0 + (rw - 1) / 2.0
    start_y = height - 1 - BORDER_GAP

    if spec.kind == MapKind.STRAIGHT:
        end_y = BORDER_GAP
        goal = (int(math.floor(center_x + 0.5)), BORDER_GAP)
    else:
        end_y = center_y + turn_lead
        goal_x = center_x + side * (width // 2 - BORDER_GAP)
        goal = (int(math.floor(goal_x + 0.5)), int(math.floor(center_y + 0.5)))

    if end_y >= start_y:
        raise SynthError('Map too small for a drive of turn_lead {}'.format(turn_lead))

    frames = []
    y = float(start_y)
    while y >= end_y:
        pose = VehiclePose(center_x, y, -math.pi / 2)
        vis = raycast_visibility(gt, pose, n_rays=n_rays, max_range=max_range)
        frame_id = len(frames)
        frames.append(Frame(apply_occlusion(gt, vis), pose, frame_id))
        logger.debug('Frame %d at y=%.1f sees %.1f%% of the map', frame_id, y, 100 * visible_fraction(vis))
        y -= step

    last = len(frames) - 1
    turn_frame = None if spec.kind == MapKind.STRAIGHT else last
    window = (max(0, last - WINDOW_FRAMES + 1), last)

    logger.info('Synthesized sequence %s: %d frames, goal %s, turn frame %s', sequence_id(spec), len(frames), goal,
                turn_frame)
    return Sequence(sequence_id(spec), spec, gt, frames, goal, turn_frame, window)


def write_sequence(seq, out_dir):
    """
    Write numbered frame files, the ground truth grid and the manifest.
    :return: manifest path
    """
    os.makedirs(out_dir, exist_ok=True)

    frame_paths = []
    for frame in seq.frames:
        name = 'frame_{:04d}.ogrd'.format(frame.frame_id)
        save_frame(frame, os.path.join(out_dir, name))
        frame_paths.append(name)
    save_grid(seq.gt, os.path.join(out_dir, 'gt.ogrd'))

    manifest = {
        'sequence_id': seq.sequence_id,
        'kind': seq.spec.kind.name if seq.spec else None,
        'seed': seq.spec.seed if seq.spec else None,
        'road_width': seq.spec.road_width if seq.spec else None,
        'obstacle_density': seq.spec.obstacle_density if seq.spec else None,
        'frames': frame_paths,
        'gt': 'gt.ogrd',
        'goal': list(seq.goal),
        'turn_frame': seq.turn_frame,
        'window': list(seq.window),
    }
    path = os.path.join(out_dir, MANIFEST)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2, sort_keys=True)

    logger.info('Wrote sequence %s (%d frames) to %s', seq.sequence_id, len(seq.frames), out_dir)
    return path


def load_sequence(manifest_path):
    if os.path.isdir(manifest_path):
        manifest_path = os.path.join(manifest_path, MANIFEST)
    base = os.path.dirname(os.path.abspath(manifest_path))

    try:
        with open(manifest_path, encoding='utf-8') as f:
            manifest = json.load(f)
    except (IOError, OSError) as e:
        raise GridFormatError('cannot read manifest ({})'.format(e), manifest_path)
    except ValueError as e:
        raise GridFormatError('malformed manifest ({})'.format(e), manifest_path)

    try:
        frames = [load_frame(os.path.join(base, p)) for p in manifest['frames']]
        gt = load_grid(os.path.join(base, manifest['gt']))
        goal = tuple(int(c) for c in manifest['goal'])
        turn_frame = manifest.get('turn_frame')
        window = tuple(manifest.get('window') or (0, len(frames) - 1))
        spec = None
        if manifest.get('kind'):
            spec = MapSpec(manifest['kind'], manifest.get('road_width', 20), manifest.get('seed') or 0,
                           manifest.get('obstacle_density', 0.0))
    except (KeyError, TypeError) as e:
        raise GridFormatError('manifest misses {}'.format(e), manifest_path)

    for frame in frames:
        gt.check_same_shape(frame.grid)

    return Sequence(manifest.get('sequence_id') or os.path.basename(base), spec, gt, frames, goal, turn_frame, window)
