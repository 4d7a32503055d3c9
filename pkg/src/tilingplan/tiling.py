"""The implicit, infinite tiling roadmap.

A vertex is a base configuration id plus a planar translation of its
head-anchored copy.  Its neighbours come from every base roadmap ``G_j``:
the configuration re-anchored at its j-th anchor is a vertex of ``G_j(0)``,
so the roadmap edges of that vertex, translated to the current anchor
position, are edges of the tiling roadmap.  Nothing here performs a
self-collision check; edges are validated against obstacles only, using the
precomputed swept areas.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import LookupFailure
from .geometry2d import EPS_GEO, points_in_polygon, points_in_triangles, segment_distance_many
from .localplan import LocalPath
from .roadmap import RoadmapBundle, StartAttachment
from .robot import OBSTACLE_CHECKS, Scene

START = -1
EPS_KEY = 1e-6


class TileVertex(NamedTuple):
    cfg_id: int
    translation: tuple[float, float]


class VertexKey(NamedTuple):
    cfg_id: int
    qx: int
    qy: int


class TileEdge(NamedTuple):
    anchor_index: int
    base_edge: int
    edge_translation: tuple[float, float]
    source: TileVertex
    target: TileVertex
    from_start: bool = False


def canonical_key(v: TileVertex) -> VertexKey:
    tx, ty = v.translation
    return VertexKey(int(v.cfg_id), int(round(tx / EPS_KEY)), int(round(ty / EPS_KEY)))


def start_vertex(att: StartAttachment) -> TileVertex:
    return TileVertex(START, (float(att.start[0, 0]), float(att.start[0, 1])))


def _stored(bundle: RoadmapBundle, cfg_id: int, att: StartAttachment | None) -> np.ndarray:
    if cfg_id == START:
        if att is None:
            raise LookupFailure("START vertex needs a start attachment")
        return att.start - att.start[0]
    if not 0 <= cfg_id < bundle.n:
        raise LookupFailure(f"unknown base configuration id {cfg_id}")
    return bundle.base_set.configs[cfg_id]


def realize(bundle: RoadmapBundle, v: TileVertex, att: StartAttachment | None = None) -> np.ndarray:
    return _stored(bundle, v.cfg_id, att) + np.asarray(v.translation, dtype=float)


class Expansion(NamedTuple):
    """Deduplicated neighbour set of one vertex, as parallel arrays."""

    ids: np.ndarray  # (K,)
    trans: np.ndarray  # (K, 2)
    anchor: np.ndarray  # (K,) 1-based
    edge: np.ndarray  # (K,) base edge index, or attachment index when from_start
    ptrans: np.ndarray  # (K, 2) edge translation (fixed anchor position)
    keys: np.ndarray  # (K, 3) int64
    from_start: bool


def _keys(ids: np.ndarray, trans: np.ndarray) -> np.ndarray:
    q = np.rint(trans / EPS_KEY).astype(np.int64)
    return np.column_stack([ids.astype(np.int64), q])


def expand(
    bundle: RoadmapBundle,
    v: TileVertex,
    att: StartAttachment | None = None,
    anchors: tuple[int, ...] | None = None,
) -> Expansion:
    """Vectorised neighbour enumeration (see :func:`neighbors`)."""
    base = bundle.base_set.configs
    js = range(1, bundle.m + 1) if anchors is None else anchors
    cfg = realize(bundle, v, att)
    parts = []
    for j in js:
        p = cfg[j - 1]
        if v.cfg_id == START:
            ids = att.targets[j - 1]
            eids = np.arange(len(ids), dtype=np.int64)
        else:
            ids, eids = bundle.roadmaps[j - 1].neighbors_of(v.cfg_id)
        if len(ids) == 0:
            continue
        trans = p[None, :] - base[ids, j - 1]
        parts.append((ids, trans, np.full(len(ids), j), eids, np.broadcast_to(p, trans.shape)))
    if not parts:
        z = np.zeros(0, dtype=np.int64)
        return Expansion(z, np.zeros((0, 2)), z, z, np.zeros((0, 2)), np.zeros((0, 3), np.int64), v.cfg_id == START)
    ids = np.concatenate([q[0] for q in parts])
    trans = np.concatenate([q[1] for q in parts])
    anc = np.concatenate([q[2] for q in parts])
    eids = np.concatenate([q[3] for q in parts])
    ptr = np.concatenate([q[4] for q in parts])
    keys = _keys(ids, trans)
    # keep the lowest (j, edge) generator per key
    order = np.lexsort((eids, anc))
    _, first = np.unique(keys[order], axis=0, return_index=True)
    keep = np.sort(order[first])
    return Expansion(ids[keep], trans[keep], anc[keep], eids[keep], ptr[keep], keys[keep], v.cfg_id == START)


def neighbors(
    bundle: RoadmapBundle,
    v: TileVertex,
    att: StartAttachment | None = None,
    anchors: tuple[int, ...] | None = None,
) -> list[tuple[TileVertex, TileEdge]]:
    """Neighbours of ``v`` in the tiling roadmap, one per distinct vertex key."""
    ex = expand(bundle, v, att, anchors)
    out = []
    for i in range(len(ex.ids)):
        u = TileVertex(int(ex.ids[i]), (float(ex.trans[i, 0]), float(ex.trans[i, 1])))
        e = TileEdge(
            int(ex.anchor[i]),
            int(ex.edge[i]),
            (float(ex.ptrans[i, 0]), float(ex.ptrans[i, 1])),
            v,
            u,
            ex.from_start,
        )
        out.append((u, e))
    return out


def edge_path(bundle: RoadmapBundle, e: TileEdge, att: StartAttachment | None = None) -> LocalPath:
    """The anchored local path of ``e``, oriented from ``e.source`` to ``e.target``."""
    if e.from_start:
        return att.paths[e.anchor_index - 1][e.base_edge]
    rm = bundle.roadmaps[e.anchor_index - 1]
    return rm.path(e.base_edge, e.source.cfg_id)


def path_obstacle_free(path: LocalPath, translation, scene: Scene) -> bool:
    """Translated swept pieces of ``path`` avoid every obstacle and stay in the workspace."""
    OBSTACLE_CHECKS.add()
    t = np.asarray(translation, dtype=float)
    box = path.box + np.concatenate([t, t])
    ws = scene.workspace
    if box[0] < ws.min[0] or box[1] < ws.min[1] or box[2] > ws.max[0] or box[3] > ws.max[1]:
        return False
    if not scene.obstacles:
        return True
    ob = scene.obstacle_boxes
    cand = np.nonzero((ob[:, 0] <= box[2]) & (ob[:, 2] >= box[0]) & (ob[:, 1] <= box[3]) & (ob[:, 3] >= box[1]))[0]
    if len(cand) == 0:
        return True
    Q = path.samples + t
    if len(Q) == 1:
        Q = np.concatenate([Q, Q])
    # four corners of each (sub-step, link) piece: (S, m-1, 4, 2)
    corners = np.stack([Q[:-1, :-1], Q[:-1, 1:], Q[1:, :-1], Q[1:, 1:]], axis=2)
    margin = np.broadcast_to(path.margins[None, :], corners.shape[:2]) + EPS_GEO
    lo = corners.min(axis=2) - margin[..., None]
    hi = corners.max(axis=2) + margin[..., None]
    for oi in cand:
        obox = ob[oi]
        near = (lo[..., 0] <= obox[2]) & (hi[..., 0] >= obox[0]) & (lo[..., 1] <= obox[3]) & (hi[..., 1] >= obox[1])
        if not near.any():
            continue
        if _pieces_hit(corners[near], margin[near], scene.obstacles[oi].vertices):
            return False
    return True


_PAIRS = np.array([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
_TRIS = np.array([(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)])


def _pieces_hit(corners: np.ndarray, margin: np.ndarray, verts: np.ndarray) -> bool:
    """Does any margin-dilated hull of 4 corners meet the polygon ``verts``?"""
    va = verts
    vb = np.roll(verts, -1, axis=0)
    s1 = corners[:, _PAIRS[:, 0]][:, :, None, :]  # (K, 6, 1, 2)
    s2 = corners[:, _PAIRS[:, 1]][:, :, None, :]
    d = segment_distance_many(s1, s2, va[None, None], vb[None, None])  # (K, 6, E)
    if np.any(d.min(axis=(1, 2)) <= margin):
        return True
    if points_in_polygon(corners[:, 0], verts).any():
        return True
    a = corners[:, _TRIS[:, 0]][:, :, None, :]
    b = corners[:, _TRIS[:, 1]][:, :, None, :]
    c = corners[:, _TRIS[:, 2]][:, :, None, :]
    return bool(points_in_triangles(verts[None, None], a, b, c).any())


def edge_obstacle_free(bundle: RoadmapBundle, e: TileEdge, scene: Scene, att: StartAttachment | None = None) -> bool:
    return path_obstacle_free(edge_path(bundle, e, att), e.edge_translation, scene)
