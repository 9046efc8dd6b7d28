"""Two-level bounding volume hierarchy for ray queries.

A Blas (bottom level) is built once per geometry over object-space
triangles with a binned surface-area heuristic.  A Tlas (top level) is
rebuilt from scratch every frame over the world-space boxes of the
instances; rays are transformed into object space at instance leaves, so
hit distances stay parameterized in world units.

Conventions that tests rely on:
  - Intersection uses the Moller-Trumbore form with determinant cutoff
    EPSILON_INTERSECT; u, v, u+v boundaries are inclusive.
  - Closest-hit treats [t_min, t_max] as closed, any-hit as open.
  - Equal-t ties resolve to the lower (instance id, triangle index).
  - Rebuilding from identical input is byte-identical.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

EPSILON_INTERSECT = 1e-9
SHADOW_OFFSET = 1e-4
SAH_BINS = 16
LEAF_MAX_TRIS = 4
LEAF_MAX_INSTANCES = 2


@dataclass
class Aabb:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=np.float64)
        self.hi = np.asarray(self.hi, dtype=np.float64)

    def union(self, other: "Aabb") -> "Aabb":
        return Aabb(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def contains_point(self, p, eps: float = 0.0) -> bool:
        p = np.asarray(p, dtype=np.float64)
        return bool(np.all(p >= self.lo - eps) and np.all(p <= self.hi + eps))

    def contains_box(self, other: "Aabb", eps: float = 1e-12) -> bool:
        return bool(np.all(other.lo >= self.lo - eps) and np.all(other.hi <= self.hi + eps))

    def surface_area(self) -> float:
        d = np.maximum(self.hi - self.lo, 0.0)
        return float(2.0 * (d[0] * d[1] + d[1] * d[2] + d[2] * d[0]))

    def corners(self) -> np.ndarray:
        """(8, 3) corner points."""
        lo, hi = self.lo, self.hi
        return np.array([[x, y, z] for x in (lo[0], hi[0])
                         for y in (lo[1], hi[1])
                         for z in (lo[2], hi[2])])


@dataclass
class Ray:
    origin: np.ndarray
    direction: np.ndarray  # need not be unit length; t is in these units
    t_min: float = SHADOW_OFFSET
    t_max: float = math.inf

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64)
        self.direction = np.asarray(self.direction, dtype=np.float64)


@dataclass
class Hit:
    t: float
    instance_id: int
    triangle_index: int  # index into the geometry's triangle list
    u: float
    v: float


# ---------------------------------------------------------------------------
# Generic binned-SAH builder over a set of leaf element boxes.

def _build_bvh(box_lo: np.ndarray, box_hi: np.ndarray, leaf_max: int):
    """Build node arrays over n element boxes.

    Returns (node_lo, node_hi, left, right, start, count, order) where
    internal nodes have left/right child indices (start = -1) and leaves
    have a [start, start+count) range into the order permutation.
    Splits use a 16-bin surface-area heuristic on each axis with a
    median fallback, so leaves never exceed leaf_max elements.
    """
    n = len(box_lo)
    centroids = (box_lo + box_hi) * 0.5
    order = np.arange(n, dtype=np.int64)

    nodes_lo, nodes_hi = [], []
    nodes_left, nodes_right = [], []
    nodes_start, nodes_count = [], []

    def alloc() -> int:
        nodes_lo.append(None)
        nodes_hi.append(None)
        nodes_left.append(-1)
        nodes_right.append(-1)
        nodes_start.append(-1)
        nodes_count.append(0)
        return len(nodes_lo) - 1

    # Stack entries: (node index, slice start, slice end).
    root = alloc()
    stack = [(root, 0, n)]
    while stack:
        ni, s, e = stack.pop()
        idx = order[s:e]
        lo = box_lo[idx].min(axis=0)
        hi = box_hi[idx].max(axis=0)
        nodes_lo[ni] = lo
        nodes_hi[ni] = hi
        count = e - s
        if count <= leaf_max:
            nodes_start[ni] = s
            nodes_count[ni] = count
            continue

        split = _sah_split(box_lo[idx], box_hi[idx], centroids[idx])
        if split is None:
            # degenerate spread: median split keeps the tree balanced
            half = count // 2
            left_mask = np.zeros(count, dtype=bool)
            left_mask[np.argsort(centroids[idx][:, int(np.argmax(hi - lo))],
                                 kind="stable")[:half]] = True
        else:
            left_mask = split
        left_idx = idx[left_mask]
        right_idx = idx[~left_mask]
        order[s:s + len(left_idx)] = left_idx
        order[s + len(left_idx):e] = right_idx

        li = alloc()
        ri = alloc()
        nodes_left[ni] = li
        nodes_right[ni] = ri
        stack.append((ri, s + len(left_idx), e))
        stack.append((li, s, s + len(left_idx)))

    return (
        np.array(nodes_lo, dtype=np.float64),
        np.array(nodes_hi, dtype=np.float64),
        np.array(nodes_left, dtype=np.int32),
        np.array(nodes_right, dtype=np.int32),
        np.array(nodes_start, dtype=np.int32),
        np.array(nodes_count, dtype=np.int32),
        order,
    )


def _sah_split(lo: np.ndarray, hi: np.ndarray, centroids: np.ndarray):
    """Best 16-bin SAH split over all three axes, or None if no axis works.

    Cost for splitting after bin b is area_L * n_L + area_R * n_R; ties
    resolve to the lower axis then the lower bin, so the partition is a
    pure function of the input boxes.
    """
    n = len(lo)
    cmin = centroids.min(axis=0)
    cmax = centroids.max(axis=0)
    best_cost = math.inf
    best_mask = None
    for axis in range(3):
        extent = cmax[axis] - cmin[axis]
        if extent <= 0.0:
            continue
        rel = (centroids[:, axis] - cmin[axis]) / extent
        bins = np.minimum((rel * SAH_BINS).astype(np.int64), SAH_BINS - 1)
        bin_lo = np.full((SAH_BINS, 3), np.inf)
        bin_hi = np.full((SAH_BINS, 3), -np.inf)
        np.minimum.at(bin_lo, bins, lo)
        np.maximum.at(bin_hi, bins, hi)
        bin_n = np.bincount(bins, minlength=SAH_BINS)

        left_lo = np.minimum.accumulate(bin_lo, axis=0)
        left_hi = np.maximum.accumulate(bin_hi, axis=0)
        right_lo = np.minimum.accumulate(bin_lo[::-1], axis=0)[::-1]
        right_hi = np.maximum.accumulate(bin_hi[::-1], axis=0)[::-1]
        left_n = np.cumsum(bin_n)

        for b in range(SAH_BINS - 1):
            nl = left_n[b]
            nr = n - nl
            if nl == 0 or nr == 0:
                continue
            dl = np.maximum(left_hi[b] - left_lo[b], 0.0)
            dr = np.maximum(right_hi[b + 1] - right_lo[b + 1], 0.0)
            al = 2.0 * (dl[0] * dl[1] + dl[1] * dl[2] + dl[2] * dl[0])
            ar = 2.0 * (dr[0] * dr[1] + dr[1] * dr[2] + dr[2] * dr[0])
            cost = al * nl + ar * nr
            if cost < best_cost:
                best_cost = cost
                best_mask = bins <= b
    return best_mask


# ---------------------------------------------------------------------------
# Bottom level: triangles of one geometry, object space.

@dataclass
class Blas:
    geometry_id: int
    node_lo: np.ndarray
    node_hi: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_start: np.ndarray
    node_count: np.ndarray
    tri_order: np.ndarray  # permutation; leaves reference this
    v0: np.ndarray  # (M, 3) per tri_order entry
    e1: np.ndarray
    e2: np.ndarray
    compacted: bool = False
    scratch: dict = field(default_factory=dict)

    @property
    def node_total(self) -> int:
        return len(self.node_lo)

    @property
    def root_aabb(self) -> Aabb:
        return Aabb(self.node_lo[0].copy(), self.node_hi[0].copy())

    def _arrays(self) -> list[np.ndarray]:
        retained = [self.node_lo, self.node_hi, self.node_left, self.node_right,
                    self.node_start, self.node_count, self.tri_order,
                    self.v0, self.e1, self.e2]
        retained.extend(self.scratch[k] for k in sorted(self.scratch))
        return retained


def build_blas(positions: np.ndarray, triangles: np.ndarray, geometry_id: int = 0) -> Blas:
    positions = np.asarray(positions, dtype=np.float64)
    triangles = np.asarray(triangles, dtype=np.int64)
    a = positions[triangles[:, 0]]
    b = positions[triangles[:, 1]]
    c = positions[triangles[:, 2]]
    tri_lo = np.minimum(np.minimum(a, b), c)
    tri_hi = np.maximum(np.maximum(a, b), c)

    node_lo, node_hi, left, right, start, count, order = _build_bvh(tri_lo, tri_hi, LEAF_MAX_TRIS)
    return Blas(
        geometry_id=geometry_id,
        node_lo=node_lo, node_hi=node_hi,
        node_left=left, node_right=right,
        node_start=start, node_count=count,
        tri_order=order,
        v0=a[order], e1=b[order] - a[order], e2=c[order] - a[order],
        compacted=False,
        scratch={"tri_lo": tri_lo, "tri_hi": tri_hi,
                 "centroids": (tri_lo + tri_hi) * 0.5},
    )


def serialize_blas(blas: Blas) -> bytes:
    """Every retained array, concatenated with a small shape header.

    Used both for the compaction size comparison and for byte-identity
    checks between rebuilds.
    """
    parts = [np.int64([blas.geometry_id, int(blas.compacted), blas.node_total]).tobytes()]
    for arr in blas._arrays():
        parts.append(np.int64(arr.shape).tobytes())
        parts.append(np.ascontiguousarray(arr).tobytes())
    return b"".join(parts)


def blas_signature(blas: Blas) -> str:
    return hashlib.sha256(serialize_blas(blas)).hexdigest()


def compact_blas(blas: Blas) -> Blas:
    """Reorder nodes into depth-first order and drop build scratch.

    Query results are unchanged; serialization shrinks (strictly, when
    scratch was present).  Compacting an already compact structure
    returns it as-is.
    """
    if blas.compacted:
        return blas
    n = blas.node_total
    remap = np.full(n, -1, dtype=np.int64)
    dfs = []
    stack = [0]
    while stack:
        ni = stack.pop()
        remap[ni] = len(dfs)
        dfs.append(ni)
        if blas.node_start[ni] < 0:
            stack.append(int(blas.node_right[ni]))
            stack.append(int(blas.node_left[ni]))
    dfs = np.array(dfs, dtype=np.int64)
    left = blas.node_left[dfs]
    right = blas.node_right[dfs]
    internal = blas.node_start[dfs] < 0
    left[internal] = remap[left[internal]]
    right[internal] = remap[right[internal]]
    return Blas(
        geometry_id=blas.geometry_id,
        node_lo=blas.node_lo[dfs].copy(), node_hi=blas.node_hi[dfs].copy(),
        node_left=left.astype(np.int32), node_right=right.astype(np.int32),
        node_start=blas.node_start[dfs].copy(), node_count=blas.node_count[dfs].copy(),
        tri_order=blas.tri_order, v0=blas.v0, e1=blas.e1, e2=blas.e2,
        compacted=True, scratch={},
    )


# ---------------------------------------------------------------------------
# Top level: instances with world transforms.

@dataclass
class TlasInstance:
    blas: Blas
    transform: np.ndarray  # (4, 4) object-to-world, invertible
    node_name: str
    instance_id: int

    def __post_init__(self):
        self.transform = np.asarray(self.transform, dtype=np.float64).reshape(4, 4)


@dataclass
class Tlas:
    instances: list[TlasInstance]
    node_lo: np.ndarray
    node_hi: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_start: np.ndarray
    node_count: np.ndarray
    inst_order: np.ndarray
    inv_transforms: np.ndarray  # (K, 4, 4)
    world_lo: np.ndarray        # (K, 3) per-instance world bounds
    world_hi: np.ndarray
    frame_index: int = 0

    @property
    def root_aabb(self) -> Aabb:
        return Aabb(self.node_lo[0].copy(), self.node_hi[0].copy())


def instance_world_aabb(instance: TlasInstance) -> Aabb:
    """Transform the 8 corners of the BLAS root box to world space."""
    corners = instance.blas.root_aabb.corners()
    world = corners @ instance.transform[:3, :3].T + instance.transform[:3, 3]
    return Aabb(world.min(axis=0), world.max(axis=0))


def build_tlas(instances: list[TlasInstance], frame_index: int = 0) -> Tlas:
    """Full rebuild over the instance list; no incremental refit."""
    if not instances:
        lo = np.zeros((1, 3))
        hi = np.zeros((1, 3))
        return Tlas(instances=[], node_lo=lo, node_hi=hi,
                    node_left=np.int32([-1]), node_right=np.int32([-1]),
                    node_start=np.int32([0]), node_count=np.int32([0]),
                    inst_order=np.zeros(0, dtype=np.int64),
                    inv_transforms=np.zeros((0, 4, 4)),
                    world_lo=np.zeros((0, 3)), world_hi=np.zeros((0, 3)),
                    frame_index=frame_index)
    boxes = [instance_world_aabb(inst) for inst in instances]
    world_lo = np.array([b.lo for b in boxes])
    world_hi = np.array([b.hi for b in boxes])
    node_lo, node_hi, left, right, start, count, order = _build_bvh(
        world_lo, world_hi, LEAF_MAX_INSTANCES)
    inv = np.array([np.linalg.inv(inst.transform) for inst in instances])
    return Tlas(instances=list(instances),
                node_lo=node_lo, node_hi=node_hi,
                node_left=left, node_right=right,
                node_start=start, node_count=count,
                inst_order=order, inv_transforms=inv,
                world_lo=world_lo, world_hi=world_hi,
                frame_index=frame_index)


def serialize_tlas(tlas: Tlas) -> bytes:
    parts = [np.int64([tlas.frame_index, len(tlas.instances)]).tobytes()]
    for arr in (tlas.node_lo, tlas.node_hi, tlas.node_left, tlas.node_right,
                tlas.node_start, tlas.node_count, tlas.inst_order,
                tlas.inv_transforms, tlas.world_lo, tlas.world_hi):
        parts.append(np.int64(arr.shape).tobytes())
        parts.append(np.ascontiguousarray(arr).tobytes())
    return b"".join(parts)


# ---------------------------------------------------------------------------
# Traversal.

def _slab_hit(lo, hi, o, d, t_lo, t_hi):
    """Ray/box overlap test on the open-ended slab interval [t_lo, t_hi]."""
    for k in range(3):
        dk = d[k]
        if dk == 0.0:
            if o[k] < lo[k] or o[k] > hi[k]:
                return False
            continue
        inv = 1.0 / dk
        t1 = (lo[k] - o[k]) * inv
        t2 = (hi[k] - o[k]) * inv
        if t1 > t2:
            t1, t2 = t2, t1
        if t1 > t_lo:
            t_lo = t1
        if t2 < t_hi:
            t_hi = t2
        if t_lo > t_hi:
            return False
    return True


def _leaf_triangles(blas: Blas, ni: int, o, d, t_min, t_max, closed: bool):
    """Moller-Trumbore over one leaf; returns (t, order_slot, u, v) arrays."""
    s = int(blas.node_start[ni])
    e = s + int(blas.node_count[ni])
    v0 = blas.v0[s:e]
    e1 = blas.e1[s:e]
    e2 = blas.e2[s:e]
    pvec = np.cross(d, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    ok = np.abs(det) > EPSILON_INTERSECT
    inv_det = np.where(ok, 1.0 / np.where(det == 0.0, 1.0, det), 0.0)
    tvec = o - v0
    u = np.einsum("ij,ij->i", tvec, pvec) * inv_det
    ok &= (u >= 0.0) & (u <= 1.0)
    qvec = np.cross(tvec, e1)
    v = (qvec @ d) * inv_det
    ok &= (v >= 0.0) & (u + v <= 1.0)
    t = np.einsum("ij,ij->i", e2, qvec) * inv_det
    if closed:
        ok &= (t >= t_min) & (t <= t_max)
    else:
        ok &= (t > t_min) & (t < t_max)
    slots = np.nonzero(ok)[0]
    return t[slots], slots + s, u[slots], v[slots]


def _blas_query(blas: Blas, o, d, t_min, t_max, closed: bool, first_only: bool):
    """Walk one BLAS; returns (t, triangle_index, u, v) of the best hit or None.

    With first_only the walk stops at any accepted hit (shadow rays).
    """
    best = None
    stack = [0]
    while stack:
        ni = stack.pop()
        limit = t_max if best is None else best[0]
        if not _slab_hit(blas.node_lo[ni], blas.node_hi[ni], o, d, t_min, limit):
            continue
        if blas.node_start[ni] >= 0:
            ts, slots, us, vs = _leaf_triangles(blas, ni, o, d, t_min, limit, closed)
            for t, slot, u, v in zip(ts, slots, us, vs):
                tri = int(blas.tri_order[slot])
                cand = (float(t), tri, float(u), float(v))
                if best is None or cand[0] < best[0] or (cand[0] == best[0] and tri < best[1]):
                    best = cand
                    if first_only:
                        return best
        else:
            stack.append(int(blas.node_right[ni]))
            stack.append(int(blas.node_left[ni]))
    return best


def ray_closest_hit(tlas: Tlas, ray: Ray) -> Hit | None:
    """Closest intersection along the ray, closed t interval.

    Ties on t resolve to the lower (instance id, triangle index) so the
    result is a pure function of the scene.
    """
    best: Hit | None = None
    o, d = ray.origin, ray.direction
    stack = [0] if len(tlas.instances) else []
    while stack:
        ni = stack.pop()
        limit = ray.t_max if best is None else best.t
        if not _slab_hit(tlas.node_lo[ni], tlas.node_hi[ni], o, d, ray.t_min, limit):
            continue
        if tlas.node_start[ni] >= 0:
            s = int(tlas.node_start[ni])
            for slot in range(s, s + int(tlas.node_count[ni])):
                inst_idx = int(tlas.inst_order[slot])
                inst = tlas.instances[inst_idx]
                inv = tlas.inv_transforms[inst_idx]
                oo = inv[:3, :3] @ o + inv[:3, 3]
                od = inv[:3, :3] @ d
                limit = ray.t_max if best is None else best.t
                got = _blas_query(inst.blas, oo, od, ray.t_min, limit, closed=True,
                                  first_only=False)
                if got is None:
                    continue
                t, tri, u, v = got
                cand = Hit(t=t, instance_id=inst.instance_id, triangle_index=tri, u=u, v=v)
                if (best is None or cand.t < best.t
                        or (cand.t == best.t
                            and (cand.instance_id, cand.triangle_index)
                            < (best.instance_id, best.triangle_index))):
                    best = cand
        else:
            stack.append(int(tlas.node_right[ni]))
            stack.append(int(tlas.node_left[ni]))
    return best


def ray_any_hit(tlas: Tlas, ray: Ray) -> bool:
    """True if anything lies strictly inside (t_min, t_max)."""
    o, d = ray.origin, ray.direction
    stack = [0] if len(tlas.instances) else []
    while stack:
        ni = stack.pop()
        if not _slab_hit(tlas.node_lo[ni], tlas.node_hi[ni], o, d, ray.t_min, ray.t_max):
            continue
        if tlas.node_start[ni] >= 0:
            s = int(tlas.node_start[ni])
            for slot in range(s, s + int(tlas.node_count[ni])):
                inst_idx = int(tlas.inst_order[slot])
                inst = tlas.instances[inst_idx]
                inv = tlas.inv_transforms[inst_idx]
                oo = inv[:3, :3] @ o + inv[:3, 3]
                od = inv[:3, :3] @ d
                if _blas_query(inst.blas, oo, od, ray.t_min, ray.t_max, closed=False,
                               first_only=True) is not None:
                    return True
        else:
            stack.append(int(tlas.node_right[ni]))
            stack.append(int(tlas.node_left[ni]))
    return False


def shadow_visibility(tlas: Tlas, point, normal, light_pos) -> float:
    """1.0 if the segment from the offset point to the light is clear.

    The origin is pushed SHADOW_OFFSET along the surface normal and the
    tested interval is (SHADOW_OFFSET, distance - SHADOW_OFFSET), open on
    both ends, so neither the surface itself nor geometry hugging the
    light counts as an occluder.
    """
    point = np.asarray(point, dtype=np.float64)
    normal = np.asarray(normal, dtype=np.float64)
    light_pos = np.asarray(light_pos, dtype=np.float64)
    origin = point + normal * SHADOW_OFFSET
    to_light = light_pos - origin
    dist = float(np.linalg.norm(to_light))
    if dist <= 2.0 * SHADOW_OFFSET:
        return 1.0
    direction = to_light / dist
    ray = Ray(origin=origin, direction=direction,
              t_min=SHADOW_OFFSET, t_max=dist - SHADOW_OFFSET)
    return 0.0 if ray_any_hit(tlas, ray) else 1.0


# ---------------------------------------------------------------------------
# Brute-force oracle with the identical query contract.

def all_world_triangles(tlas: Tlas):
    """((K, 3, 3) world vertices, (K,) instance ids, (K,) triangle indices)."""
    verts, inst_ids, tri_ids = [], [], []
    for inst in tlas.instances:
        blas = inst.blas
        base = blas.v0
        b = blas.v0 + blas.e1
        c = blas.v0 + blas.e2
        m = inst.transform
        w0 = base @ m[:3, :3].T + m[:3, 3]
        w1 = b @ m[:3, :3].T + m[:3, 3]
        w2 = c @ m[:3, :3].T + m[:3, 3]
        tri_world = np.stack([w0, w1, w2], axis=1)
        # undo the build permutation so triangle ids match geometry order
        inv_order = np.argsort(blas.tri_order, kind="stable")
        verts.append(tri_world[inv_order])
        inst_ids.append(np.full(len(base), inst.instance_id, dtype=np.int64))
        tri_ids.append(np.arange(len(base), dtype=np.int64))
    if not verts:
        return np.zeros((0, 3, 3)), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(verts), np.concatenate(inst_ids), np.concatenate(tri_ids)


def brute_force_closest_hit(tlas: Tlas, ray: Ray) -> Hit | None:
    """Test every world-space triangle; same contract as ray_closest_hit.

    Kept deliberately independent of the tree walk: triangles are
    transformed to world space and intersected there, so agreement with
    the BVH path is a real cross-check rather than a shared code path.
    """
    tris, inst_ids, tri_ids = all_world_triangles(tlas)
    if len(tris) == 0:
        return None
    o, d = ray.origin, ray.direction
    v0 = tris[:, 0]
    e1 = tris[:, 1] - v0
    e2 = tris[:, 2] - v0
    pvec = np.cross(d, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    ok = np.abs(det) > EPSILON_INTERSECT
    inv_det = np.where(ok, 1.0 / np.where(det == 0.0, 1.0, det), 0.0)
    tvec = o - v0
    u = np.einsum("ij,ij->i", tvec, pvec) * inv_det
    ok &= (u >= 0.0) & (u <= 1.0)
    qvec = np.cross(tvec, e1)
    v = (qvec @ d) * inv_det
    ok &= (v >= 0.0) & (u + v <= 1.0)
    t = np.einsum("ij,ij->i", e2, qvec) * inv_det
    ok &= (t >= ray.t_min) & (t <= ray.t_max)
    if not np.any(ok):
        return None
    cand = np.nonzero(ok)[0]
    keys = sorted(cand, key=lambda i: (t[i], inst_ids[i], tri_ids[i]))
    i = keys[0]
    return Hit(t=float(t[i]), instance_id=int(inst_ids[i]),
               triangle_index=int(tri_ids[i]), u=float(u[i]), v=float(v[i]))


# ---------------------------------------------------------------------------
# Debug dumps.

def blas_dump_text(blas: Blas) -> str:
    """One node per line, depth-first, with bounds and leaf triangle lists."""
    lines = [f"blas geometry={blas.geometry_id} nodes={blas.node_total} "
             f"compacted={blas.compacted}"]

    def walk(ni: int, depth: int):
        lo = blas.node_lo[ni]
        hi = blas.node_hi[ni]
        pad = "  " * depth
        box = (f"[{lo[0]:.6g} {lo[1]:.6g} {lo[2]:.6g}] "
               f"[{hi[0]:.6g} {hi[1]:.6g} {hi[2]:.6g}]")
        if blas.node_start[ni] >= 0:
            s = int(blas.node_start[ni])
            tris = [int(blas.tri_order[k]) for k in range(s, s + int(blas.node_count[ni]))]
            lines.append(f"{pad}leaf {ni} {box} tris={tris}")
        else:
            lines.append(f"{pad}node {ni} {box}")
            walk(int(blas.node_left[ni]), depth + 1)
            walk(int(blas.node_right[ni]), depth + 1)

    walk(0, 0)
    return "\n".join(lines)


def tlas_dump_text(tlas: Tlas) -> str:
    lines = [f"tlas frame={tlas.frame_index} instances={len(tlas.instances)}"]

    def walk(ni: int, depth: int):
        lo = tlas.node_lo[ni]
        hi = tlas.node_hi[ni]
        pad = "  " * depth
        box = (f"[{lo[0]:.6g} {lo[1]:.6g} {lo[2]:.6g}] "
               f"[{hi[0]:.6g} {hi[1]:.6g} {hi[2]:.6g}]")
        if tlas.node_start[ni] >= 0:
            s = int(tlas.node_start[ni])
            ids = [tlas.instances[int(tlas.inst_order[k])].instance_id
                   for k in range(s, s + int(tlas.node_count[ni]))]
            names = [tlas.instances[int(tlas.inst_order[k])].node_name
                     for k in range(s, s + int(tlas.node_count[ni]))]
            lines.append(f"{pad}leaf {ni} {box} instances={ids} names={names}")
        else:
            lines.append(f"{pad}node {ni} {box}")
            walk(int(tlas.node_left[ni]), depth + 1)
            walk(int(tlas.node_right[ni]), depth + 1)

    if len(tlas.instances):
        walk(0, 0)
    return "\n".join(lines)
