#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Road mask, Zhang-Suen thinning and the waypoint graph of the thinned road.

Neighbors of a cell p are numbered clockwise from north, as in the Zhang-Suen paper::

    P9 P2 P3
    P8 p  P4
    P7 P6 P5

and packed into an 8-bit code, bit 0 being P2. All per-cell predicates are 256-entry tables indexed by
that code.
"""

import enum
import logging
import math
from collections import defaultdict, namedtuple

import numpy as np
from scipy import ndimage

from occluplan.errors import EmptyGridError, NonThinSkeletonError, SkeletonError
from occluplan.semantic_grid import BitMask, ClassId, class_mask

logger = logging.getLogger(__name__)


DEFAULT_KERNEL = 5
DEFAULT_ITERATIONS = 2
DEFAULT_SPUR_LENGTH = 16
DEFAULT_MERGE_LENGTH = 16

# (dx, dy) of P2 .. P9
_OFFSETS = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))

_EIGHT = np.ones((3, 3), dtype=bool)

_RING = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=np.int32)


class NodeKind(enum.Enum):
    JUNCTION = 'JUNCTION'
    ENDPOINT = 'ENDPOINT'
    # isolated cells, rings, and junction clusters left with fewer than 3 edges
    ANCHOR = 'ANCHOR'


class Node(namedtuple('Node', 'id cell kind cells')):
    __slots__ = ()


class Edge(namedtuple('Edge', 'a b polyline length')):
    __slots__ = ()


class RoadGraph(namedtuple('RoadGraph', 'mask skeleton graph')):
    __slots__ = ()


class SkeletonGraph(object):
    """
    Waypoint nodes and the skeleton chains between them.

    Every skeleton cell belongs to exactly one node cluster (``Node.cells``) or one edge polyline.
    Polylines exclude node cells and run from node ``a`` to node ``b``.
    """

    def __init__(self, nodes, edges):
        self.nodes = list(nodes)
        self.edges = list(edges)
        self._degree = defaultdict(int)
        for e in self.edges:
            self._degree[e.a] += 1
            self._degree[e.b] += 1

    def degree(self, node_id):
        return self._degree[node_id]

    def node(self, node_id):
        return self.nodes[node_id]

    def nodes_of_kind(self, kind):
        return [n for n in self.nodes if n.kind == kind]

    @property
    def junctions(self):
        return self.nodes_of_kind(NodeKind.JUNCTION)

    @property
    def endpoints(self):
        return self.nodes_of_kind(NodeKind.ENDPOINT)

    def is_empty(self):
        return not self.nodes

    def cell_count(self):
        return sum(len(n.cells) for n in self.nodes) + sum(len(e.polyline) for e in self.edges)

    def __repr__(self):
        return 'SkeletonGraph(nodes={}, edges={}, junctions={})'.format(len(self.nodes), len(self.edges),
                                                                      len(self.junctions))


def _tables():
    first = np.zeros(256, dtype=bool)
    second = np.zeros(256, dtype=bool)
    simple = np.zeros(256, dtype=bool)
    count = np.zeros(256, dtype=np.uint8)

    for code in range(256):
        p = [(code >> i) & 1 for i in range(8)]
        p2, p3, p4, p5, p6, p7, p8, p9 = p
        b = sum(p)
        a = sum(1 for i in range(8) if p[i] == 0 and p[(i + 1) % 8] == 1)
        count[code] = b
        base = 2 <= b <= 6 and a == 1
        first[code] = base and p2 * p4 * p6 == 0 and p4 * p6 * p8 == 0
        second[code] = base and p2 * p4 * p8 == 0 and p2 * p6 * p8 == 0
        simple[code] = _is_simple(p)

    return first, second, simple, count


def _components(offsets, adjacent):
    offsets = list(offsets)
    seen = set()
    comps = []
    for o in offsets:
        if o in seen:
            continue
        comp = {o}
        stack = [o]
        seen.add(o)
        while stack:
            cur = stack.pop()
            for other in offsets:
                if other not in seen and adjacent(cur, other):
                    seen.add(other)
                    comp.add(other)
                    stack.append(other)
        comps.append(comp)
    return comps


def _is_simple(p):
    """
    Deleting p keeps both the 8-connected foreground and the 4-connected background topology.
    """
    fg = [o for o, v in zip(_OFFSETS, p) if v]
    bg = [o for o, v in zip(_OFFSETS, p) if not v]

    fg_comps = _components(fg, lambda u, v: max(abs(u[0] - v[0]), abs(u[1] - v[1])) == 1)
    bg_comps = _components(bg, lambda u, v: abs(u[0] - v[0]) + abs(u[1] - v[1]) == 1)
    bg_touching = [c for c in bg_comps if any(o[0] == 0 or o[1] == 0 for o in c)]
    return len(fg_comps) == 1 and len(bg_touching) == 1


_ZS_FIRST, _ZS_SECOND, _SIMPLE, _COUNT = _tables()


def _codes(img):
    height, width = img.shape
    padded = np.pad(img, 1).astype(np.uint8)
    code = np.zeros((height, width), dtype=np.uint8)
    for bit, (dx, dy) in enumerate(_OFFSETS):
        code |= padded[1 + dy:1 + dy + height, 1 + dx:1 + dx + width] << bit
    return code


class _PaddedMask(object):
    """
    Zero padded working copy of a mask, cells addressed by their flat index in the padded array.
    """

    def __init__(self, bits):
        self.shape = bits.shape
        self.stride = bits.shape[1] + 2
        self.flat = np.pad(bits, 1).astype(np.uint8).ravel()
        self.offsets = np.array([dy * self.stride + dx for dx, dy in _OFFSETS], dtype=np.intp)

    def codes(self, idx):
        code = np.zeros(len(idx), dtype=np.uint8)
        for bit, offset in enumerate(self.offsets):
            code |= self.flat[idx + offset] << bit
        return code

    def boundary(self):
        """
        Set cells with at least one unset neighbor, the only cells thinning can remove
        """
        idx = np.flatnonzero(self.flat)
        return idx[self.codes(idx) != 255]

    def subfield(self, idx):
        # 2x2 parity class (y % 2) * 2 + x % 2 of the unpadded cell
        return ((idx // self.stride - 1) % 2) * 2 + (idx % self.stride - 1) % 2

    def delete(self, idx, active):
        """
        Clear cells and return the boundary that results from ``active``, the boundary before the deletion
        """
        self.flat[idx] = 0
        around = (idx[:, None] + self.offsets[None, :]).ravel()
        return np.union1d(active[self.flat[active] == 1], around[self.flat[around] == 1])

    def bits(self):
        height, width = self.shape
        return self.flat.reshape(height + 2, width + 2)[1:-1, 1:-1].astype(bool)


def _delete_redundant(padded, active):
    """
    Remove simple cells with two or more neighbors, one parity subfield at a time, until none is left.
    """
    removed = 0
    changed = True
    while changed:
        changed = False
        for sub in range(4):
            cells = active[padded.subfield(active) == sub]
            codes = padded.codes(cells)
            doomed = cells[_SIMPLE[codes] & (_COUNT[codes] >= 2)]
            if len(doomed):
                active = padded.delete(doomed, active)
                removed += len(doomed)
                changed = True
    return removed


def road_mask(grid, kernel=DEFAULT_KERNEL, iterations=DEFAULT_ITERATIONS):
    """
    Morphological closing of the ROAD cells with a ``kernel`` x ``kernel`` square.

    The mask is zero padded by the reach of the closing first, so cells at the grid border are closed
    the same way as interior cells.
    """
    if kernel < 3 or kernel % 2 == 0:
        raise SkeletonError('kernel must be odd and >= 3, got {}'.format(kernel))
    if iterations < 1:
        raise SkeletonError('iterations must be >= 1, got {}'.format(iterations))
    if grid.is_empty():
        raise EmptyGridError()

    road = class_mask(grid, ClassId.ROAD).bits
    if not road.any():
        return BitMask(road)

    pad = (kernel // 2) * iterations
    structure = np.ones((kernel, kernel), dtype=bool)
    canvas = np.pad(road, pad)
    closed = ndimage.binary_dilation(canvas, structure=structure, iterations=iterations)
    closed = ndimage.binary_erosion(closed, structure=structure, iterations=iterations)
    return BitMask(closed[pad:pad + grid.height, pad:pad + grid.width])


def thin_zhang(mask):
    """
    Zhang-Suen thinning to a one cell wide skeleton.

    Candidates of each sub-iteration are found on the image as it was when the sub-iteration started, as in
    the classic algorithm, but are deleted one 2x2 parity subfield at a time and only if they still qualify,
    so that no component can vanish (a 2x2 block would under plain Zhang-Suen). Remaining simple cells with
    two or more neighbors (staircase corners) are removed afterwards.

    Only boundary cells can qualify, so each sub-iteration looks at the current boundary alone.

    A 2x2 block whose four cells each carry their own branch cannot be reduced without cutting a branch and
    is left in place. extract_graph takes it as a junction.
    """
    img = np.array(mask.bits, dtype=bool)
    if not img.any():
        return BitMask(img)

    padded = _PaddedMask(img)
    active = padded.boundary()
    passes = 0
    changed = True
    while changed:
        changed = False
        passes += 1
        for table in (_ZS_FIRST, _ZS_SECOND):
            candidates = active[table[padded.codes(active)]]
            if not len(candidates):
                continue
            subfields = padded.subfield(candidates)
            for sub in range(4):
                doomed = candidates[subfields == sub]
                if not len(doomed):
                    continue
                doomed = doomed[table[padded.codes(doomed)]]
                if len(doomed):
                    active = padded.delete(doomed, active)
                    changed = True

    removed = _delete_redundant(padded, active)
    logger.debug('Thinning took %d passes, cleanup removed %d cells', passes, removed)
    return BitMask(padded.bits())


def _check_thin(bits):
    """
    A 2x2 block is allowed only when none of its cells could be removed by thinning.
    """
    block = bits[:-1, :-1] & bits[1:, :-1] & bits[:-1, 1:] & bits[1:, 1:]
    if not block.any():
        return
    in_block = np.zeros_like(bits)
    in_block[:-1, :-1] |= block
    in_block[1:, :-1] |= block
    in_block[:-1, 1:] |= block
    in_block[1:, 1:] |= block
    reducible = in_block & _SIMPLE[_codes(bits)]
    if reducible.any():
        y, x = np.argwhere(reducible)[0]
        raise NonThinSkeletonError((int(x), int(y)))


def _neighbor_counts(bits):
    return ndimage.convolve(bits.astype(np.int32), _RING, mode='constant', cval=0) * bits


def _groups(bits):
    """
    8-connected components as lists of (x, y) cells in raster order
    """
    labels, n = ndimage.label(bits, structure=_EIGHT)
    if not n:
        return []
    ys, xs = np.nonzero(labels)
    ids = labels[ys, xs]
    order = np.argsort(ids, kind='stable')
    bounds = np.searchsorted(ids[order], np.arange(1, n + 2))
    xs = xs[order].tolist()
    ys = ys[order].tolist()
    return [list(zip(xs[a:b], ys[a:b])) for a, b in zip(bounds[:-1], bounds[1:])]


def _around(cell):
    x, y = cell
    return [(x + dx, y + dy) for dx, dy in _OFFSETS]


def _raster(cell):
    return cell[1], cell[0]


def _path_length(points):
    return math.fsum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(points, points[1:]))


def _walk(start, cells, seen):
    path = [start]
    seen.add(start)
    cur = start
    while True:
        nxt = [n for n in _around(cur) if n in cells and n not in seen]
        if not nxt:
            return path
        cur = nxt[0]
        seen.add(cur)
        path.append(cur)


class _UnionFind(object):
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def _representative(cells):
    cy = sum(c[1] for c in cells) / float(len(cells))
    cx = sum(c[0] for c in cells) / float(len(cells))
    return min(cells, key=lambda c: ((c[0] - cx) ** 2 + (c[1] - cy) ** 2, c[1], c[0]))


def extract_graph(skeleton, merge_length=0):
    """
    Waypoint graph of a thin skeleton.

    Cells with three or more neighbors are junction cells, clustered 8-connectedly into one JUNCTION node.
    Cells with one neighbor are ENDPOINT nodes. Cells with two neighbors form the edge chains. Isolated
    cells and rings become ANCHOR nodes (a ring is a self-loop on its first cell in raster order).
    Junction nodes joined by an edge no longer than ``merge_length`` are merged, together with that edge.

    Node ids follow the raster order of the node cells, a node cell being the cluster cell closest to the
    cluster centroid.

    :param skeleton: thin BitMask, a 2x2 block is accepted only as an irreducible junction core
    :param merge_length: junction merge distance in cells, 0 disables merging
    """
    bits = skeleton.bits
    _check_thin(bits)
    counts = _neighbor_counts(bits)

    protos = []  # [kind, set of cells]
    node_of = {}

    def add_proto(kind, cells):
        protos.append([kind, set(cells)])
        for c in cells:
            node_of[c] = len(protos) - 1
        return len(protos) - 1

    for cluster in _groups(bits & (counts >= 3)):
        add_proto(NodeKind.JUNCTION, cluster)
    for y, x in np.argwhere(bits & (counts == 1)):
        add_proto(NodeKind.ENDPOINT, [(int(x), int(y))])
    for y, x in np.argwhere(bits & (counts == 0)):
        add_proto(NodeKind.ANCHOR, [(int(x), int(y))])

    raw = []  # (proto a, proto b, polyline, length)

    for chain in _groups(bits & (counts == 2)):
        cells = set(chain)
        ends = [c for c in chain if sum(1 for n in _around(c) if n in cells) < 2]
        if not ends:
            anchor = chain[0]
            pa = add_proto(NodeKind.ANCHOR, [anchor])
            cells.discard(anchor)
            first = [n for n in _around(anchor) if n in cells][0]
            polyline = _walk(first, cells, set())
            raw.append((pa, pa, polyline, _path_length([anchor] + polyline + [anchor])))
            continue

        polyline = _walk(ends[0], cells, set())
        head = [n for n in _around(polyline[0]) if n in node_of]
        tail = [n for n in _around(polyline[-1]) if n in node_of]
        if len(polyline) == 1:
            head, tail = head[:1], head[1:2]
        contact_a, contact_b = head[0], tail[0]
        raw.append((node_of[contact_a], node_of[contact_b], polyline,
                    _path_length([contact_a] + polyline + [contact_b])))

    # endpoints touching another node directly
    for y, x in np.argwhere(bits & (counts == 1)):
        e = (int(x), int(y))
        q = [n for n in _around(e) if n in node_of]
        if not q:
            continue
        q = q[0]
        if protos[node_of[q]][0] == NodeKind.ENDPOINT and _raster(q) < _raster(e):
            continue
        raw.append((node_of[e], node_of[q], [], _path_length([e, q])))

    uf = _UnionFind(len(protos))
    absorbed = set()
    if merge_length > 0:
        for i, (pa, pb, polyline, length) in enumerate(raw):
            if (pa != pb and length <= merge_length and protos[pa][0] == NodeKind.JUNCTION and
                    protos[pb][0] == NodeKind.JUNCTION):
                uf.union(pa, pb)
                absorbed.add(i)
        # parallel short chains inside a merged cluster
        for i, (pa, pb, polyline, length) in enumerate(raw):
            if i not in absorbed and uf.find(pa) == uf.find(pb) and pa != pb and length <= merge_length:
                absorbed.add(i)

    merged = defaultdict(set)
    kinds = {}
    for i, (kind, cells) in enumerate(protos):
        root = uf.find(i)
        merged[root] |= cells
        kinds[root] = kind
    for i in absorbed:
        pa, _, polyline, _ = raw[i]
        merged[uf.find(pa)].update(polyline)

    roots = sorted(merged, key=lambda r: _raster(_representative(merged[r])))
    node_id = {r: i for i, r in enumerate(roots)}

    edges = []
    for i, (pa, pb, polyline, length) in enumerate(raw):
        if i in absorbed:
            continue
        a, b = node_id[uf.find(pa)], node_id[uf.find(pb)]
        if a > b:
            a, b, polyline = b, a, polyline[::-1]
        edges.append(Edge(a, b, [tuple(c) for c in polyline], length))
    edges.sort(key=lambda e: (e.a, e.b, len(e.polyline), e.polyline))

    degree = defaultdict(int)
    for e in edges:
        degree[e.a] += 1
        degree[e.b] += 1

    nodes = []
    for r in roots:
        i = node_id[r]
        kind = kinds[r]
        if kind == NodeKind.JUNCTION and degree[i] < 3:
            kind = NodeKind.ANCHOR
        cells = tuple(sorted(merged[r], key=_raster))
        nodes.append(Node(i, _representative(merged[r]), kind, cells))

    graph = SkeletonGraph(nodes, edges)
    logger.debug('Extracted %s', graph)
    return graph


def prune_spurs(skeleton, spur_length=DEFAULT_SPUR_LENGTH):
    """
    Remove endpoint-to-junction branches shorter than ``spur_length`` cells (the endpoint included).

    Of a junction whose branches are all spurs the longest branch is kept. Components without junctions
    are never touched.
    """
    img = np.array(skeleton.bits, dtype=bool)
    if spur_length <= 0 or not img.any():
        return BitMask(img)

    rounds = 0
    while True:
        graph = extract_graph(BitMask(img))
        spurs = defaultdict(list)
        for e in graph.edges:
            ka, kb = graph.node(e.a).kind, graph.node(e.b).kind
            if {ka, kb} == {NodeKind.ENDPOINT, NodeKind.JUNCTION} and len(e.polyline) + 1 < spur_length:
                junction = e.a if ka == NodeKind.JUNCTION else e.b
                spurs[junction].append(e)

        doomed = []
        for junction, branches in spurs.items():
            if len(branches) >= graph.degree(junction):
                branches = sorted(branches, key=lambda e: (len(e.polyline), e.length))[:-1]
            doomed.extend(branches)
        if not doomed:
            break

        for e in doomed:
            tip = e.a if graph.node(e.a).kind == NodeKind.ENDPOINT else e.b
            for x, y in list(e.polyline) + [graph.node(tip).cell]:
                img[y, x] = False
        padded = _PaddedMask(img)
        _delete_redundant(padded, padded.boundary())
        img = padded.bits()
        rounds += 1

    logger.debug('Spur pruning took %d rounds', rounds)
    return BitMask(img)


def count_branches(graph):
    if not graph.edges:
        return 0
    degrees = [graph.degree(n.id) for n in graph.junctions]
    if not degrees:
        return 1
    return max(degrees)


def road_graph(grid, kernel=DEFAULT_KERNEL, iterations=DEFAULT_ITERATIONS, spur_length=DEFAULT_SPUR_LENGTH,
               merge_length=DEFAULT_MERGE_LENGTH):
    """
    road_mask -> thin_zhang -> prune_spurs -> extract_graph
    """
    mask = road_mask(grid, kernel, iterations)
    skeleton = prune_spurs(thin_zhang(mask), spur_length)
    return RoadGraph(mask, skeleton, extract_graph(skeleton, merge_length))


def graph_to_json(graph):
    return {
        'nodes': [{'id': n.id, 'x': n.cell[0], 'y': n.cell[1], 'kind': n.kind.name} for n in graph.nodes],
        'edges': [{'a': e.a, 'b': e.b, 'length': e.length, 'polyline': [list(c) for c in e.polyline]}
                  for e in graph.edges],
    }
