#!/usr/bin/env python
# -*- coding: utf-8 -*-

import json
import math
import os

import numpy as np
import pytest

from occluplan.errors import (DimensionMismatchError, EmptyGridError, GridError, GridFormatError,
                              PoseOutOfBoundsError, UndeclaredClassError)
from occluplan.semantic_grid import (HEADER, BitMask, ClassId, Frame, SemanticGrid, VehiclePose, class_mask,
                                     load_frame, load_grid, normalize_angle, parse_classes, remove_classes, save_frame,
                                     save_grid, sidecar_path)


@pytest.fixture
def grid():
    cells = np.full((4, 6), ClassId.OTHER, dtype=np.uint8)
    cells[:, 2:4] = ClassId.ROAD
    cells[0, 0] = ClassId.VEGETATION
    cells[3, 5] = ClassId.UNKNOWN
    return SemanticGrid(cells, resolution=0.2, origin=(1.5, -3.0))


def test_grid_shape(grid):
    assert grid.width == 6
    assert grid.height == 4
    assert grid.shape == (4, 6)
    assert grid.count(ClassId.ROAD) == 8
    assert grid.in_bounds(5, 3)
    assert not grid.in_bounds(6, 0)
    assert not grid.in_bounds(0, -1)


def test_grid_is_read_only(grid):
    with pytest.raises(ValueError):
        grid.cells[0, 0] = ClassId.ROAD


def test_grid_rejects_undeclared_class():
    with pytest.raises(UndeclaredClassError) as e:
        SemanticGrid([[0, 1], [9, 200]])
    assert e.value.class_ids == [9, 200]


def test_grid_rejects_non_integer_cells():
    with pytest.raises(GridFormatError):
        SemanticGrid([[0.5, 1.0]])
    with pytest.raises(GridFormatError):
        SemanticGrid([1, 2, 3])


def test_grid_rejects_bad_resolution():
    with pytest.raises(GridFormatError):
        SemanticGrid([[1]], resolution=0)


def test_with_cells_checks_shape(grid):
    with pytest.raises(DimensionMismatchError):
        grid.with_cells(np.zeros((2, 2), dtype=np.uint8))
    other = grid.with_cells(np.zeros(grid.shape, dtype=np.uint8))
    assert other.resolution == grid.resolution
    assert other.origin == grid.origin


def test_save_load_roundtrip(grid, tmpdir):
    path = str(tmpdir.join('grid.ogrd'))
    save_grid(grid, path)
    assert os.path.getsize(path) == HEADER.size + 24
    assert load_grid(path) == grid


def test_save_empty_grid(tmpdir):
    with pytest.raises(EmptyGridError):
        save_grid(SemanticGrid(np.zeros((0, 0), dtype=np.uint8)), str(tmpdir.join('x.ogrd')))


@pytest.fixture(params=['missing', 'truncated', 'magic', 'version', 'payload', 'resolution'])
def broken_file(request, grid, tmpdir):
    path = str(tmpdir.join('broken.ogrd'))
    if request.param == 'missing':
        return path
    save_grid(grid, path)
    with open(path, 'rb') as f:
        data = bytearray(f.read())
    if request.param == 'truncated':
        data = data[:HEADER.size - 1]
    elif request.param == 'magic':
        data[:4] = b'XXXX'
    elif request.param == 'version':
        data[4:6] = b'\x07\x00'
    elif request.param == 'payload':
        data = data[:-1]
    elif request.param == 'resolution':
        data = HEADER.pack(b'OGRD', 1, grid.width, grid.height, 0.0, 0.0, 0.0) + data[HEADER.size:]
    with open(path, 'wb') as f:
        f.write(bytes(data))
    return path


def test_load_broken_file(broken_file):
    with pytest.raises(GridFormatError) as e:
        load_grid(broken_file)
    assert broken_file in str(e.value)


def test_load_undeclared_class(grid, tmpdir):
    path = str(tmpdir.join('bad.ogrd'))
    save_grid(grid, path)
    with open(path, 'r+b') as f:
        f.seek(HEADER.size)
        f.write(b'\x2a')
    with pytest.raises(UndeclaredClassError):
        load_grid(path)


def test_frame_roundtrip(grid, tmpdir):
    path = str(tmpdir.join('frame_0003.ogrd'))
    frame = Frame(grid, VehiclePose(2.5, 1.0, math.pi / 2), 3)
    save_frame(frame, path)

    with open(sidecar_path(path)) as f:
        meta = json.load(f)
    assert meta['frame_id'] == 3
    assert meta['pose']['px'] == 2.5

    loaded = load_frame(path)
    assert loaded.frame_id == 3
    assert loaded.pose == frame.pose
    assert loaded.grid == grid


def test_frame_missing_sidecar(grid, tmpdir):
    path = str(tmpdir.join('frame.ogrd'))
    save_grid(grid, path)
    with pytest.raises(GridFormatError):
        load_frame(path)


def test_pose_out_of_bounds(grid):
    with pytest.raises(PoseOutOfBoundsError):
        Frame(grid, (6.0, 0.0, 0.0))
    # rounds to cell (5, 3)
    assert Frame(grid, (5.4, 3.4, 0.0)).pose.cell == (5, 3)


def test_pose_theta_normalized():
    pose = VehiclePose(0, 0, 5 * math.pi / 2)
    assert -math.pi <= pose.theta < math.pi
    assert pose.theta == pytest.approx(math.pi / 2)


@pytest.mark.parametrize('theta', [-7.0, -math.pi, -1.0, 0.0, 1.0, math.pi, 7.0, 100.0])
def test_normalize_angle_range(theta):
    wrapped = normalize_angle(theta)
    assert -math.pi <= wrapped < math.pi
    assert math.cos(wrapped) == pytest.approx(math.cos(theta))
    assert math.sin(wrapped) == pytest.approx(math.sin(theta), abs=1e-9)


def test_remove_classes(grid):
    cleaned = remove_classes(grid, [ClassId.VEGETATION])
    assert cleaned.cells[0, 0] == ClassId.UNKNOWN
    assert cleaned.count(ClassId.VEGETATION) == 0
    assert cleaned.count(ClassId.ROAD) == grid.count(ClassId.ROAD)
    assert remove_classes(grid, []) is grid


def test_remove_classes_is_idempotent(grid):
    once = remove_classes(grid, [ClassId.VEGETATION, ClassId.OTHER])
    assert remove_classes(once, [ClassId.VEGETATION, ClassId.OTHER]) == once
    assert once.resolution == grid.resolution
    assert once.origin == grid.origin


def test_remove_classes_rejects_undeclared_class(grid):
    with pytest.raises(UndeclaredClassError):
        remove_classes(grid, [ClassId.VEGETATION, 42])


def test_parse_classes():
    assert parse_classes(['VEGETATION']) == (ClassId.VEGETATION,)
    assert parse_classes('vegetation,vehicle') == (ClassId.VEGETATION, ClassId.VEHICLE)
    assert parse_classes([6, '5', 'vegetation']) == (ClassId.VEGETATION, ClassId.VEHICLE)
    assert parse_classes('') == ()
    assert parse_classes([]) == ()
    with pytest.raises(GridError):
        parse_classes(['trees'])
    with pytest.raises(UndeclaredClassError):
        parse_classes([99])


def test_payload_bytes(tmpdir):
    path = str(tmpdir.join('diag.ogrd'))
    save_grid(SemanticGrid([[1, 0], [0, 1]]), path)
    with open(path, 'rb') as f:
        data = f.read()
    assert len(data) == HEADER.size + 4
    assert list(data[HEADER.size:]) == [1, 0, 0, 1]
    assert data[:4] == b'OGRD'


def test_class_mask(grid):
    mask = class_mask(grid, ClassId.ROAD)
    assert isinstance(mask, BitMask)
    assert mask.popcount() == 8
    assert mask[(2, 0)]
    assert not mask[(0, 0)]
    assert mask.contains((3, 3))
    assert not mask.contains((30, 3))
    assert mask == BitMask(grid.cells == ClassId.ROAD)
    assert mask != BitMask.zeros(6, 4)
    with pytest.raises(UndeclaredClassError):
        class_mask(grid, 42)
