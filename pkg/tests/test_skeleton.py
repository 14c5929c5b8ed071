#!/usr/bin/env python
# -*- coding: utf-8 -*-

import json

import numpy as np
import pytest
from scipy import ndimage

from occluplan.errors import EmptyGridError, NonThinSkeletonError, SkeletonError
from occluplan.occlusion import MapKind, MapSpec, synth_map
from occluplan.semantic_grid import BitMask, ClassId, SemanticGrid
from occluplan.skeleton import (NodeKind, SkeletonGraph, count_branches, extract_graph, graph_to_json, prune_spurs,
                                road_graph, road_mask, thin_zhang)

EIGHT = np.ones((3, 3), dtype=bool)


def n_components(bits):
    return ndimage.label(bits, structure=EIGHT)[1]


def has_block(bits):
    return bool((bits[:-1, :-1] & bits[1:, :-1] & bits[:-1, 1:] & bits[1:, 1:]).any())


def plus_mask():
    bits = np.zeros((9, 9), dtype=bool)
    bits[4, :] = True
    bits[:, 4] = True
    return BitMask(bits)


def tee_mask():
    bits = np.zeros((9, 9), dtype=bool)
    bits[4, :] = True
    bits[4:, 4] = True
    return BitMask(bits)


def line_mask():
    bits = np.zeros((3, 12), dtype=bool)
    bits[1, 1:11] = True
    return BitMask(bits)


def road_grid(bits):
    return SemanticGrid(np.where(bits, ClassId.ROAD, ClassId.OTHER).astype(np.uint8))


@pytest.fixture(scope='module', params=list(MapKind))
def synth_road(request):
    return road_graph(synth_map(MapSpec(request.param, road_width=12, seed=2), 128, 128))


def test_road_mask_without_road():
    grid = SemanticGrid(np.full((8, 8), ClassId.SIDEWALK, dtype=np.uint8))
    assert road_mask(grid).popcount() == 0


def test_road_mask_keeps_solid_rectangle():
    bits = np.zeros((20, 20), dtype=bool)
    bits[5:15, 4:16] = True
    assert road_mask(road_grid(bits)) == BitMask(bits)


def test_road_mask_bridges_gap():
    bits = np.zeros((1, 7), dtype=bool)
    bits[0, 2] = bits[0, 5] = True
    closed = road_mask(road_grid(bits), kernel=5, iterations=1)
    assert closed.bits[0, 2:6].all()
    assert n_components(closed.bits) == 1


def test_road_mask_contains_opening():
    grid = synth_map(MapSpec('X', road_width=12, seed=4), 96, 96)
    road = grid.cells == ClassId.ROAD
    opened = ndimage.binary_opening(road, structure=np.ones((5, 5), dtype=bool))
    closed = road_mask(grid).bits
    assert not np.any(opened & ~closed)
    assert not np.any(road & ~closed)


def test_road_mask_errors():
    grid = road_grid(np.ones((4, 4), dtype=bool))
    for kernel in (1, 4):
        with pytest.raises(SkeletonError):
            road_mask(grid, kernel=kernel)
    with pytest.raises(SkeletonError):
        road_mask(grid, iterations=0)
    with pytest.raises(EmptyGridError):
        road_mask(SemanticGrid(np.zeros((0, 0), dtype=np.uint8)))


def test_thin_empty():
    assert thin_zhang(BitMask.zeros(5, 5)).popcount() == 0


def test_thin_keeps_thin_line():
    assert thin_zhang(line_mask()) == line_mask()


def test_thin_rectangle_to_center_row():
    bits = np.zeros((5, 12), dtype=bool)
    bits[1:4, 1:11] = True
    thin = thin_zhang(BitMask(bits)).bits
    assert thin[2].sum() >= 6
    # endpoint erosion may leave a stray end cell off the center row
    assert thin.sum() <= thin[2].sum() + 2
    assert not has_block(thin)
    assert n_components(thin) == 1


@pytest.mark.parametrize('seed', range(50))
def test_thin_random_blobs(seed):
    rng = np.random.default_rng(seed)
    bits = ndimage.gaussian_filter(rng.random((128, 128)), 2.0) > 0.5
    thin = thin_zhang(BitMask(bits)).bits

    assert not np.any(thin & ~bits)
    assert not has_block(thin)
    assert n_components(thin) == n_components(bits)
    assert thin_zhang(BitMask(thin)).bits.tolist() == thin.tolist()


def test_extract_graph_line():
    graph = extract_graph(line_mask())
    assert len(graph.endpoints) == 2
    assert len(graph.junctions) == 0
    assert len(graph.edges) == 1
    assert graph.edges[0].length == pytest.approx(9.0)
    assert count_branches(graph) == 1


def test_extract_graph_plus():
    graph = extract_graph(plus_mask())
    assert len(graph.junctions) == 1
    assert len(graph.endpoints) == 4
    assert len(graph.edges) == 4
    junction = graph.junctions[0]
    assert junction.cell == (4, 4)
    assert graph.degree(junction.id) == 4
    assert count_branches(graph) == 4
    assert graph.cell_count() == plus_mask().popcount()


def test_extract_graph_tee():
    graph = extract_graph(tee_mask())
    assert len(graph.junctions) == 1
    assert len(graph.endpoints) == 3
    assert count_branches(graph) == 3


def test_extract_graph_rejects_thick_input():
    bits = np.zeros((4, 4), dtype=bool)
    bits[1:3, 1:3] = True
    with pytest.raises(NonThinSkeletonError):
        extract_graph(BitMask(bits))


def x_core_mask():
    # diagonals of an even sized square cross in a 2x2 block
    bits = np.zeros((10, 10), dtype=bool)
    idx = np.arange(10)
    bits[idx, idx] = True
    bits[idx, 9 - idx] = True
    return BitMask(bits)


def test_two_by_two_core_is_a_junction():
    thin = thin_zhang(x_core_mask())
    assert thin == x_core_mask()
    assert has_block(thin.bits)

    graph = extract_graph(thin)
    junction, = graph.junctions
    assert sorted(junction.cells) == [(4, 4), (4, 5), (5, 4), (5, 5)]
    assert junction.cell == (4, 4)
    assert graph.degree(junction.id) == 4
    assert len(graph.endpoints) == 4
    assert count_branches(graph) == 4
    assert graph.cell_count() == thin.popcount()
    assert extract_graph(prune_spurs(thin, 0)).cell_count() == thin.popcount()


def test_two_by_two_core_after_pruning():
    pruned = prune_spurs(thin_zhang(x_core_mask()), 16)
    assert not has_block(pruned.bits)
    assert n_components(pruned.bits) == 1
    graph = extract_graph(pruned)
    assert graph.junctions == []
    assert graph.cell_count() == pruned.popcount()


def test_two_by_two_core_in_road_graph():
    road = road_graph(road_grid(x_core_mask().bits), kernel=3, iterations=1, spur_length=0)
    assert road.graph.cell_count() == road.skeleton.popcount()


def test_extract_graph_isolated_cell_and_ring():
    bits = np.zeros((10, 10), dtype=bool)
    bits[1, 1] = True
    bits[4, 5:8] = bits[6, 5:8] = True
    bits[5, 4] = bits[5, 8] = True
    graph = extract_graph(BitMask(bits))
    assert [n.kind for n in graph.nodes] == [NodeKind.ANCHOR, NodeKind.ANCHOR]
    assert len(graph.edges) == 1
    assert graph.edges[0].a == graph.edges[0].b
    assert graph.cell_count() == int(bits.sum())
    assert count_branches(graph) == 1


def test_merge_close_junctions():
    bits = np.zeros((11, 21), dtype=bool)
    bits[5, :] = True
    bits[:, 8] = True
    bits[:, 13] = True
    mask = BitMask(bits)

    apart = extract_graph(mask)
    assert len(apart.junctions) == 2
    assert count_branches(apart) == 4

    merged = extract_graph(mask, merge_length=5)
    assert len(merged.junctions) == 1
    assert len(merged.edges) == 6
    assert count_branches(merged) == 6
    assert merged.cell_count() == mask.popcount()


def test_prune_spurs():
    bits = np.zeros((15, 30), dtype=bool)
    bits[7, 2:28] = True
    bits[4:7, 14] = True
    pruned = prune_spurs(BitMask(bits), spur_length=5)

    expected = np.zeros_like(bits)
    expected[7, 2:28] = True
    assert pruned.bits.tolist() == expected.tolist()


def test_prune_spurs_keeps_longest_of_all_spur_junction():
    pruned = prune_spurs(plus_mask(), spur_length=16)
    graph = extract_graph(pruned)
    assert len(graph.junctions) == 0
    assert n_components(pruned.bits) == 1
    assert pruned.popcount() >= 4


def test_prune_spurs_leaves_plain_chains():
    assert prune_spurs(line_mask(), spur_length=50) == line_mask()
    assert prune_spurs(plus_mask(), spur_length=0) == plus_mask()


def test_count_branches_empty():
    assert count_branches(SkeletonGraph([], [])) == 0
    assert SkeletonGraph([], []).is_empty()


def test_road_graph_invariants(synth_road):
    mask, skeleton, graph = synth_road
    assert not has_block(skeleton.bits)
    assert not np.any(skeleton.bits & ~mask.bits)
    assert graph.cell_count() == skeleton.popcount()

    ids = set(n.id for n in graph.nodes)
    for e in graph.edges:
        assert e.a in ids and e.b in ids
        for p, q in zip(e.polyline, e.polyline[1:]):
            assert max(abs(p[0] - q[0]), abs(p[1] - q[1])) == 1
    for n in graph.junctions:
        assert graph.degree(n.id) >= 3
    for n in graph.endpoints:
        assert graph.degree(n.id) == 1


def test_graph_to_json():
    data = graph_to_json(extract_graph(plus_mask()))
    assert len(data['nodes']) == 5
    assert len(data['edges']) == 4
    assert set(n['kind'] for n in data['nodes']) == {'JUNCTION', 'ENDPOINT'}
    assert json.loads(json.dumps(data)) == data
