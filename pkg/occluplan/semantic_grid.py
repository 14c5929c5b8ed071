#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Bird's eye view semantic raster, the class palette, frame metadata and the grid file format.

Cells are indexed ``cells[y, x]``, origin at the top-left corner, y growing downwards.
Cell centers sit on integer coordinates, so the continuous point (x, y) belongs to the cell
``(floor(x + 0.5), floor(y + 0.5))``.

Grid file (little endian)::

    magic "OGRD" | u16 version | u32 width | u32 height | f32 resolution | f32 origin_x | f32 origin_y
    width * height bytes of class ids, row-major

The pose of a frame lives in a JSON sidecar next to the grid file (same basename, ``.json``).
"""

import enum
import json
import logging
import math
import os
import struct
from collections import namedtuple

import numpy as np

from occluplan.errors import (DimensionMismatchError, EmptyGridError, GridError, GridFormatError,
                              PoseOutOfBoundsError, UndeclaredClassError)

logger = logging.getLogger(__name__)


MAGIC = b'OGRD'

VERSION = 1

HEADER = struct.Struct('<4sHIIfff')

DEFAULT_RESOLUTION = 0.2

DEFAULT_SIZE = 256


class ClassId(enum.IntEnum):
    UNKNOWN = 0
    ROAD = 1
    SIDEWALK = 2
    BUILDING = 3
    FENCE = 4
    VEGETATION = 5
    VEHICLE = 6
    PEDESTRIAN = 7
    OTHER = 8


PALETTE = frozenset(int(c) for c in ClassId)

_DECLARED = np.zeros(256, dtype=bool)
_DECLARED[sorted(PALETTE)] = True


def check_class(class_id):
    '''
    >>> check_class(1)
    <ClassId.ROAD: 1>
    '''
    try:
        return ClassId(int(class_id))
    except ValueError:
        raise UndeclaredClassError([class_id])


def normalize_angle(theta):
    '''
    Wrap an angle into [-pi, pi).

    >>> normalize_angle(math.pi) == -math.pi
    True
    >>> normalize_angle(-math.pi) == -math.pi
    True
    >>> round(normalize_angle(3 * math.pi / 2), 6) == round(-math.pi / 2, 6)
    True
    '''
    wrapped = math.fmod(theta + math.pi, 2 * math.pi)
    if wrapped < 0:
        wrapped += 2 * math.pi
    wrapped -= math.pi
    if wrapped >= math.pi:
        wrapped -= 2 * math.pi
    return wrapped


def cell_of(x, y):
    '''
    >>> cell_of(2.4, 2.6)
    (2, 3)
    >>> cell_of(-0.4, 0.49)
    (0, 0)
    '''
    return int(math.floor(x + 0.5)), int(math.floor(y + 0.5))


class BitMask(object):
    """
    Immutable 2D bit raster, ``bits[y, x]``.
    """

    def __init__(self, bits):
        bits = np.array(bits, dtype=bool)
        if bits.ndim != 2:
            raise ValueError('BitMask needs a 2D array, got shape {}'.format(bits.shape))
        bits.setflags(write=False)
        self.bits = bits

    @classmethod
    def zeros(cls, width, height):
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def width(self):
        return self.bits.shape[1]

    @property
    def height(self):
        return self.bits.shape[0]

    @property
    def shape(self):
        return self.bits.shape

    def popcount(self):
        return int(np.count_nonzero(self.bits))

    def __getitem__(self, cell):
        x, y = cell
        return bool(self.bits[y, x])

    def contains(self, cell):
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height and bool(self.bits[y, x])

    def __eq__(self, other):
        return isinstance(other, BitMask) and self.shape == other.shape and np.array_equal(self.bits, other.bits)

    def __ne__(self, other):
        return not self == other

    __hash__ = None

    def __repr__(self):
        return 'BitMask({}x{}, popcount={})'.format(self.width, self.height, self.popcount())


class SemanticGrid(object):
    """
    Row-major raster of ClassId values with metric resolution and world origin of cell (0, 0).

    Resolution and origin are kept at float32 precision, the precision of the file format.
    """

    def __init__(self, cells, resolution=DEFAULT_RESOLUTION, origin=(0.0, 0.0)):
        raw = np.asarray(cells)
        if raw.ndim != 2:
            raise GridFormatError('cells must be a 2D array, got shape {}'.format(raw.shape))
        if raw.size:
            if not np.issubdtype(raw.dtype, np.integer) and not np.issubdtype(raw.dtype, np.bool_):
                if not np.all(np.equal(np.mod(raw, 1), 0)):
                    raise GridFormatError('cells must hold integer class ids')
            ids = raw.astype(np.int64)
            undeclared = (ids < 0) | (ids > 255)
            undeclared[~undeclared] = ~_DECLARED[ids[~undeclared]]
            if undeclared.any():
                raise UndeclaredClassError(np.unique(ids[undeclared]))

        resolution = float(np.float32(resolution))
        if not resolution > 0:
            raise GridFormatError('resolution must be > 0, got {}'.format(resolution))

        self.cells = np.array(raw, dtype=np.uint8)
        self.cells.setflags(write=False)
        self.resolution = resolution
        self.origin = (float(np.float32(origin[0])), float(np.float32(origin[1])))

    @property
    def width(self):
        return self.cells.shape[1]

    @property
    def height(self):
        return self.cells.shape[0]

    @property
    def shape(self):
        return self.cells.shape

    def is_empty(self):
        return self.cells.size == 0

    def in_bounds(self, x, y):
        return 0 <= x < self.width and 0 <= y < self.height

    def with_cells(self, cells):
        """
        New grid with the same resolution and origin but other cells
        """
        cells = np.asarray(cells)
        if cells.shape != self.shape:
            raise DimensionMismatchError(self.shape, cells.shape)
        return SemanticGrid(cells, resolution=self.resolution, origin=self.origin)

    def count(self, class_id):
        return int(np.count_nonzero(self.cells == int(check_class(class_id))))

    def check_same_shape(self, other):
        if self.shape != other.shape:
            raise DimensionMismatchError(self.shape, other.shape)

    def __eq__(self, other):
        return (isinstance(other, SemanticGrid) and self.shape == other.shape and
                self.resolution == other.resolution and self.origin == other.origin and
                np.array_equal(self.cells, other.cells))

    def __ne__(self, other):
        return not self == other

    __hash__ = None

    def __repr__(self):
        return 'SemanticGrid({}x{}, resolution={}, origin={})'.format(self.width, self.height, self.resolution,
                                                                     self.origin)


class VehiclePose(namedtuple('VehiclePose', 'px py theta')):
    __slots__ = ()

    def __new__(cls, px, py, theta=0.0):
        return super(VehiclePose, cls).__new__(cls, float(px), float(py), normalize_angle(float(theta)))

    @property
    def cell(self):
        return cell_of(self.px, self.py)


class Frame(namedtuple('Frame', 'grid pose frame_id')):
    __slots__ = ()

    def __new__(cls, grid, pose, frame_id=0):
        pose = pose if isinstance(pose, VehiclePose) else VehiclePose(*pose)
        x, y = pose.cell
        if not grid.in_bounds(x, y):
            raise PoseOutOfBoundsError(pose, grid.width, grid.height)
        return super(Frame, cls).__new__(cls, grid, pose, int(frame_id))


def sidecar_path(path):
    return os.path.splitext(path)[0] + '.json'


def save_grid(grid, path):
    if grid.is_empty():
        raise EmptyGridError()
    header = HEADER.pack(MAGIC, VERSION, grid.width, grid.height, grid.resolution, grid.origin[0], grid.origin[1])
    with open(path, 'wb') as f:
        f.write(header)
        f.write(np.ascontiguousarray(grid.cells).tobytes())


def load_grid(path):
    try:
        with open(path, 'rb') as f:
            data = f.read()
    except (IOError, OSError) as e:
        raise GridFormatError('cannot read file ({})'.format(e), path)

    if len(data) < HEADER.size:
        raise GridFormatError('truncated header', path)

    magic, version, width, height, resolution, origin_x, origin_y = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise GridFormatError('bad magic {!r}'.format(magic), path)
    if version != VERSION:
        raise GridFormatError('unsupported version {}'.format(version), path)
    if not resolution > 0:
        raise GridFormatError('resolution must be > 0, got {}'.format(resolution), path)

    payload = data[HEADER.size:]
    if len(payload) != width * height:
        raise GridFormatError('payload holds {} bytes, header declares {}x{}'.format(len(payload), width, height),
                              path)

    cells = np.frombuffer(payload, dtype=np.uint8).reshape((height, width))
    return SemanticGrid(cells, resolution=resolution, origin=(origin_x, origin_y))


def save_frame(frame, path):
    save_grid(frame.grid, path)
    sidecar = {
        'frame_id': frame.frame_id,
        'pose': {'px': frame.pose.px, 'py': frame.pose.py, 'theta': frame.pose.theta},
    }
    with open(sidecar_path(path), 'w', encoding='utf-8') as f:
        json.dump(sidecar, f, sort_keys=True)
    logger.debug('Saved frame %d to %s', frame.frame_id, path)


def load_frame(path):
    grid = load_grid(path)

    meta_path = sidecar_path(path)
    try:
        with open(meta_path, encoding='utf-8') as f:
            meta = json.load(f)
        pose = meta['pose']
        pose = VehiclePose(pose['px'], pose['py'], pose['theta'])
        frame_id = int(meta['frame_id'])
    except (IOError, OSError) as e:
        raise GridFormatError('cannot read sidecar ({})'.format(e), meta_path)
    except (ValueError, KeyError, TypeError) as e:
        raise GridFormatError('malformed sidecar ({})'.format(e), meta_path)

    return Frame(grid, pose, frame_id)


def parse_classes(value):
    '''
    Class names or ids, as a list or a comma separated string.

    >>> parse_classes('vegetation, 6')
    (<ClassId.VEGETATION: 5>, <ClassId.VEHICLE: 6>)
    >>> parse_classes(None)
    ()
    '''
    if not value:
        return ()
    if isinstance(value, str):
        value = [v for v in (s.strip() for s in value.split(',')) if v]
    classes = []
    for v in value:
        if isinstance(v, str) and not v.isdigit():
            try:
                classes.append(ClassId[v.upper()])
            except KeyError:
                raise GridError('unknown class {!r}'.format(v))
        else:
            classes.append(check_class(v))
    return tuple(sorted(set(classes)))


def remove_classes(grid, classes):
    ids = sorted(int(check_class(c)) for c in classes)
    if not ids:
        return grid
    cells = np.where(np.isin(grid.cells, ids), np.uint8(ClassId.UNKNOWN), grid.cells)
    return grid.with_cells(cells)


def class_mask(grid, class_id):
    return BitMask(grid.cells == int(check_class(class_id)))
