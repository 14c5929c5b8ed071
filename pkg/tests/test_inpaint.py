#!/usr/bin/env python
# -*- coding: utf-8 -*-

import numpy as np
import pytest

from occluplan.errors import DimensionMismatchError, InpaintError
from occluplan.inpaint import EXTERNAL, MORPHOLOGICAL, ORACLE, InpaintMethod, inpaint
from occluplan.occlusion import MapSpec, apply_occlusion, raycast_visibility, synth_map
from occluplan.semantic_grid import ClassId, SemanticGrid, VehiclePose, save_grid

R = ClassId.ROAD
U = ClassId.UNKNOWN
B = ClassId.BUILDING
S = ClassId.SIDEWALK


@pytest.fixture(scope='module')
def occluded():
    gt = synth_map(MapSpec('T', road_width=12, seed=4), 96, 96)
    vis = raycast_visibility(gt, VehiclePose(48, 84, 0), n_rays=360, max_range=40)
    return gt, apply_occlusion(gt, vis)


@pytest.fixture(params=['identity', 'morphological', 'oracle', 'external'])
def method(request, occluded, tmpdir):
    gt, _ = occluded
    if request.param == 'identity':
        return InpaintMethod.identity()
    if request.param == 'morphological':
        return InpaintMethod.morphological(radius=2)
    if request.param == 'oracle':
        return InpaintMethod.oracle(leak_radius=5)
    path = str(tmpdir.join('external.ogrd'))
    save_grid(gt, path)
    return InpaintMethod.external(path)


def test_method_validation():
    with pytest.raises(InpaintError):
        InpaintMethod.morphological(radius=0)
    with pytest.raises(InpaintError):
        InpaintMethod.oracle(leak_radius=0)
    with pytest.raises(InpaintError):
        InpaintMethod(EXTERNAL)
    assert InpaintMethod('morphological').radius == 1
    assert InpaintMethod(ORACLE).leak_radius == 40
    assert str(InpaintMethod.morphological(3)) == 'MORPHOLOGICAL(radius=3)'
    assert InpaintMethod.oracle().needs_gt
    assert not InpaintMethod.identity().needs_gt


def test_known_cells_preserved(method, occluded):
    gt, grid = occluded
    out = inpaint(grid, method, gt=gt)
    known = grid.cells != U
    assert np.array_equal(out.cells[known], grid.cells[known])
    assert out.shape == grid.shape
    assert out.resolution == grid.resolution
    assert out.origin == grid.origin


def test_nothing_to_fill(method, occluded):
    gt, _ = occluded
    assert inpaint(gt, method, gt=gt) == gt


def test_identity(occluded):
    _, grid = occluded
    assert inpaint(grid, InpaintMethod.identity()) == grid


def test_morphological_hand_example():
    grid = SemanticGrid([[R, U, R]])
    out = inpaint(grid, InpaintMethod.morphological(radius=1))
    assert out.cells.tolist() == [[R, R, R]]


def test_morphological_tie_does_not_fill():
    grid = SemanticGrid([[R, U, B]])
    out = inpaint(grid, InpaintMethod.morphological(radius=1))
    assert out.cells.tolist() == [[R, U, B]]


def test_morphological_needs_quorum():
    # a lone known ROAD cell never outvotes a mostly unknown window
    grid = SemanticGrid([[R, U, U], [U, U, U], [U, U, U]])
    out = inpaint(grid, InpaintMethod.morphological(radius=1))
    assert out == grid


def test_morphological_closes_road_gap():
    cells = np.full((9, 9), S, dtype=np.uint8)
    cells[:, 3:6] = R
    cells[4, 2:7] = U
    out = inpaint(SemanticGrid(cells), InpaintMethod.morphological(radius=1))
    assert np.all(out.cells[:, 3:6] == R)


def test_morphological_idempotent(occluded):
    _, grid = occluded
    method = InpaintMethod.morphological(radius=1)
    once = inpaint(grid, method)
    assert inpaint(once, method) == once
    assert once.count(R) >= grid.count(R)
    # only ever writes ROAD
    changed = once.cells != grid.cells
    assert np.all(once.cells[changed] == R)


def test_oracle_needs_gt(occluded):
    _, grid = occluded
    with pytest.raises(InpaintError):
        inpaint(grid, InpaintMethod.oracle())


def test_oracle_shape_mismatch(occluded):
    _, grid = occluded
    with pytest.raises(DimensionMismatchError):
        inpaint(grid, InpaintMethod.oracle(), gt=SemanticGrid(np.ones((4, 4), dtype=np.uint8)))


def test_oracle_full_leak_reproduces_gt(occluded):
    gt, grid = occluded
    assert inpaint(grid, InpaintMethod.oracle(leak_radius=200), gt=gt) == gt


def test_oracle_leak_radius():
    gt = SemanticGrid(np.full((1, 6), R, dtype=np.uint8))
    grid = SemanticGrid([[R, U, U, U, U, U]])
    out = inpaint(grid, InpaintMethod.oracle(leak_radius=2), gt=gt)
    assert out.cells.tolist() == [[R, R, R, U, U, U]]


def test_oracle_nothing_known():
    gt = SemanticGrid(np.full((3, 3), R, dtype=np.uint8))
    grid = SemanticGrid(np.zeros((3, 3), dtype=np.uint8))
    assert inpaint(grid, InpaintMethod.oracle(), gt=gt) == grid


def test_external(tmpdir):
    path = str(tmpdir.join('filled.ogrd'))
    save_grid(SemanticGrid([[S, R, S]]), path)
    out = inpaint(SemanticGrid([[B, U, U]]), InpaintMethod.external(path))
    assert out.cells.tolist() == [[B, R, S]]


def test_external_per_frame_path(tmpdir):
    save_grid(SemanticGrid([[R, R]]), str(tmpdir.join('map_0007.ogrd')))
    method = InpaintMethod.external(str(tmpdir.join('map_{frame_id:04d}.ogrd')))
    out = inpaint(SemanticGrid([[U, B]]), method.for_frame(7))
    assert out.cells.tolist() == [[R, B]]


def test_external_errors(tmpdir):
    grid = SemanticGrid([[B, U, U]])
    with pytest.raises(InpaintError):
        inpaint(grid, InpaintMethod.external(str(tmpdir.join('missing.ogrd'))))

    path = str(tmpdir.join('small.ogrd'))
    save_grid(SemanticGrid([[R]]), path)
    with pytest.raises(DimensionMismatchError):
        inpaint(grid, InpaintMethod.external(path))


def test_unknown_variant(occluded):
    _, grid = occluded
    with pytest.raises(InpaintError):
        inpaint(grid, InpaintMethod('NO_SUCH_BACKEND'))


def test_variant_names():
    assert InpaintMethod('oracle').variant == ORACLE
    assert InpaintMethod(MORPHOLOGICAL).variant == MORPHOLOGICAL
