"""Bundle persistence: a versioned little-endian binary container plus a lossless JSON export.

Layout::

    b"TILE" | u32 version | u32 m | u32 n | u32 k | i64 seed | f64 step
    f64[m-1] link lengths | f64[n, m, 2] base configurations
    per roadmap j = 1..m:
        u32 E | i64[E, 2] edges | u32[E] sample counts
        f64[sum counts, m, 2] samples | f64[E, m-1] sweep margins
    8-byte blake2b digest of everything above

Swept pieces are not stored as polygons; they are a pure function of the
stored samples and margins.
"""
from __future__ import annotations

import hashlib
import io
import json
import struct
from pathlib import Path

import numpy as np

from .errors import BundleChecksumError, BundleFormatError, BundleVersionError
from .localplan import LocalPath
from .roadmap import FORMAT_VERSION, BaseConfigSet, BaseRoadmap, RoadmapBundle
from .robot import RobotSpec

MAGIC = b"TILE"
_HEAD = struct.Struct("<4sIIIIqd")
_DIGEST = 8


def _digest(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=_DIGEST).digest()


def bundle_to_bytes(bundle: RoadmapBundle) -> bytes:
    m, n = bundle.m, bundle.n
    buf = io.BytesIO()
    buf.write(_HEAD.pack(MAGIC, bundle.format_version, m, n, bundle.k, bundle.base_set.rng_seed, bundle.step))
    buf.write(np.asarray(bundle.spec.link_lengths, dtype="<f8").tobytes())
    buf.write(np.ascontiguousarray(bundle.base_set.configs, dtype="<f8").tobytes())
    for rm in bundle.roadmaps:
        E = rm.n_edges
        buf.write(struct.pack("<I", E))
        buf.write(np.ascontiguousarray(rm.edges, dtype="<i8").tobytes())
        counts = np.array([p.n_samples for p in rm.paths], dtype="<u4")
        buf.write(counts.tobytes())
        for p in rm.paths:
            buf.write(np.ascontiguousarray(p.samples, dtype="<f8").tobytes())
        margins = np.array([p.margins for p in rm.paths], dtype="<f8").reshape(E, m - 1)
        buf.write(margins.tobytes())
    body = buf.getvalue()
    return body + _digest(body)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, nbytes: int) -> bytes:
        if nbytes < 0 or self.pos + nbytes > len(self.data):
            raise BundleFormatError("bundle file is truncated")
        out = self.data[self.pos : self.pos + nbytes]
        self.pos += nbytes
        return out

    def array(self, dtype: str, shape) -> np.ndarray:
        count = int(np.prod(shape)) if len(shape) else 1
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(count * itemsize), dtype=dtype).reshape(shape).astype(dtype[1:])


def bundle_from_bytes(data: bytes) -> RoadmapBundle:
    if len(data) < _HEAD.size + _DIGEST:
        raise BundleFormatError("bundle file is truncated")
    magic, version, m, n, k, seed, step = _HEAD.unpack_from(data)
    if magic != MAGIC:
        raise BundleFormatError("not a tiling roadmap bundle (bad magic)")
    if version != FORMAT_VERSION:
        raise BundleVersionError(f"bundle format version {version}, expected {FORMAT_VERSION}")
    body, digest = data[:-_DIGEST], data[-_DIGEST:]
    if _digest(body) != digest:
        raise BundleChecksumError("bundle checksum mismatch")
    if m < 2 or n < 1:
        raise BundleFormatError(f"implausible header m={m} n={n}")
    r = _Reader(body)
    r.pos = _HEAD.size
    try:
        spec = RobotSpec(tuple(r.array("<f8", (m - 1,))))
    except ValueError as exc:
        raise BundleFormatError(str(exc)) from exc
    configs = r.array("<f8", (n, m, 2))
    base = BaseConfigSet(configs, int(seed))
    roadmaps = []
    for j in range(1, m + 1):
        (E,) = struct.unpack("<I", r.take(4))
        edges = r.array("<i8", (E, 2))
        if E and (edges.min() < 0 or edges.max() >= n):
            raise BundleFormatError(f"roadmap {j} references unknown vertices")
        counts = r.array("<u4", (E,))
        flat = r.array("<f8", (int(counts.sum()), m, 2))
        margins = r.array("<f8", (E, m - 1))
        offs = np.concatenate([[0], np.cumsum(counts, dtype=np.int64)])
        paths = [
            LocalPath(j, int(edges[e, 0]), int(edges[e, 1]), flat[offs[e] : offs[e + 1]], margins[e])
            for e in range(E)
        ]
        roadmaps.append(BaseRoadmap(j, configs - configs[:, j - 1 : j, :], edges, paths))
    if r.pos != len(body):
        raise BundleFormatError("trailing bytes after the last roadmap")
    return RoadmapBundle(spec, base, roadmaps, int(k), float(step), int(version))


def save_bundle(bundle: RoadmapBundle, path) -> bytes:
    """Write the binary bundle; returns its checksum."""
    data = bundle_to_bytes(bundle)
    Path(path).write_bytes(data)
    return data[-_DIGEST:]


def load_bundle(path) -> RoadmapBundle:
    return bundle_from_bytes(Path(path).read_bytes())


def bundle_checksum(bundle: RoadmapBundle) -> str:
    return bundle_to_bytes(bundle)[-_DIGEST:].hex()


# -- JSON ------------------------------------------------------------------
# floats go through repr(), which round-trips float64 exactly


def bundle_to_json(bundle: RoadmapBundle) -> dict:
    return {
        "format_version": bundle.format_version,
        "link_lengths": list(bundle.spec.link_lengths),
        "n": bundle.n,
        "k": bundle.k,
        "seed": bundle.base_set.rng_seed,
        "step": bundle.step,
        "base_configs": bundle.base_set.configs.tolist(),
        "roadmaps": [
            {
                "anchor_index": rm.anchor_index,
                "edges": rm.edges.tolist(),
                "samples": [p.samples.tolist() for p in rm.paths],
                "margins": [p.margins.tolist() for p in rm.paths],
            }
            for rm in bundle.roadmaps
        ],
    }


def bundle_from_json(doc: dict) -> RoadmapBundle:
    try:
        version = int(doc["format_version"])
        if version != FORMAT_VERSION:
            raise BundleVersionError(f"bundle format version {version}, expected {FORMAT_VERSION}")
        spec = RobotSpec(tuple(doc["link_lengths"]))
        m = spec.m
        configs = np.array(doc["base_configs"], dtype=float).reshape(-1, m, 2)
        base = BaseConfigSet(configs, int(doc["seed"]))
        roadmaps = []
        for j, rd in enumerate(doc["roadmaps"], start=1):
            edges = np.array(rd["edges"], dtype=np.int64).reshape(-1, 2)
            paths = [
                LocalPath(j, int(u), int(w), np.array(s, dtype=float).reshape(-1, m, 2), np.array(g, dtype=float))
                for (u, w), s, g in zip(edges, rd["samples"], rd["margins"])
            ]
            roadmaps.append(BaseRoadmap(j, configs - configs[:, j - 1 : j, :], edges, paths))
        if len(roadmaps) != m:
            raise BundleFormatError(f"expected {m} roadmaps, found {len(roadmaps)}")
        return RoadmapBundle(spec, base, roadmaps, int(doc["k"]), float(doc["step"]), version)
    except (KeyError, TypeError, ValueError) as exc:
        raise BundleFormatError(f"malformed bundle JSON: {exc}") from exc


def export_json(bundle: RoadmapBundle, path) -> None:
    Path(path).write_text(json.dumps(bundle_to_json(bundle)))


def import_json(path) -> RoadmapBundle:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise BundleFormatError(f"malformed bundle JSON: {exc}") from exc
    return bundle_from_json(doc)
