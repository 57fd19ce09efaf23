"""Ray/triangle intersection: vectorized batch casting and a BVH for
incoherent single rays.

Both paths evaluate the same Moller-Trumbore expressions in the same
operation order so a scalar re-intersection reproduces batched results
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import MISS_ID, HitRecord, Scene

PARALLEL_EPS = 1.0e-12
DEFAULT_T_MIN = 1.0e-9

_LEAF_SIZE = 4
_RAY_CHUNK = 32768


def _triangles_at_tau(scene: Scene, tau: float):
    """All scene triangles displaced to normalized exposure time tau.

    Returns (verts (T,3,3), mesh_index (T,)) in scene mesh order.
    """
    verts = []
    mesh_index = []
    for i, mesh in enumerate(scene.meshes):
        d = scene.per_exposure_displacement(mesh)
        verts.append(mesh.triangles - (1.0 - tau) * d)
        mesh_index.append(np.full(mesh.triangles.shape[0], i, dtype=np.intp))
    if not verts:
        return np.zeros((0, 3, 3)), np.zeros(0, dtype=np.intp)
    return np.concatenate(verts, axis=0), np.concatenate(mesh_index)


def _face_normals(v0, e1, e2):
    n = np.cross(e1, e2)
    length = np.linalg.norm(n, axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        n = n / length
    return np.where(length > 0.0, n, 0.0)


# ---------------------------------------------------------------------------
# batch casting
# ---------------------------------------------------------------------------


@dataclass
class BatchHits:
    """Nearest-hit results for a batch of rays (miss: t=inf, mesh_id=MISS_ID)."""

    t: np.ndarray  # (N,)
    hit: np.ndarray  # (N,) bool
    point: np.ndarray  # (N, 3) true world-space hit point
    normal: np.ndarray  # (N, 3) unit, oriented against the ray
    mesh_id: np.ndarray  # (N,) int
    mesh_index: np.ndarray  # (N,) index into scene.meshes, -1 on miss
    albedo: np.ndarray  # (N, 3)


class _MeshGroup:
    """Triangles of all meshes sharing one per-exposure displacement."""

    def __init__(self, displacement, verts, mesh_index):
        self.displacement = np.asarray(displacement, dtype=np.float64)
        self.v0 = verts[:, 0, :]
        self.e1 = verts[:, 1, :] - verts[:, 0, :]
        self.e2 = verts[:, 2, :] - verts[:, 0, :]
        self.normal = _face_normals(self.v0, self.e1, self.e2)
        self.mesh_index = mesh_index


def _build_groups(scene: Scene):
    groups: dict[tuple, list] = {}
    order = []
    for i, mesh in enumerate(scene.meshes):
        d = scene.per_exposure_displacement(mesh)
        key = (float(d[0]), float(d[1]), float(d[2]))
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append((i, mesh))
    out = []
    for key in order:
        members = groups[key]
        verts = np.concatenate([m.triangles for _, m in members], axis=0)
        idx = np.concatenate(
            [np.full(m.triangles.shape[0], i, dtype=np.intp) for i, m in members]
        )
        out.append(_MeshGroup(np.array(key), verts, idx))
    return out


def _mt_batch(ox, oy, oz, dx, dy, dz, group: _MeshGroup, t_min: float):
    """Ray-block x triangle-block intersection; returns t (R, T) with inf misses."""
    v0 = group.v0
    e1 = group.e1
    e2 = group.e2
    # pvec = d x e2
    px = dy * e2[None, :, 2] - dz * e2[None, :, 1]
    py = dz * e2[None, :, 0] - dx * e2[None, :, 2]
    pz = dx * e2[None, :, 1] - dy * e2[None, :, 0]
    det = e1[None, :, 0] * px + e1[None, :, 1] * py + e1[None, :, 2] * pz
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / det
    tx = ox - v0[None, :, 0]
    ty = oy - v0[None, :, 1]
    tz = oz - v0[None, :, 2]
    u = (tx * px + ty * py + tz * pz) * inv
    # qvec = tvec x e1
    qx = ty * e1[None, :, 2] - tz * e1[None, :, 1]
    qy = tz * e1[None, :, 0] - tx * e1[None, :, 2]
    qz = tx * e1[None, :, 1] - ty * e1[None, :, 0]
    v = (dx * qx + dy * qy + dz * qz) * inv
    t = (e2[None, :, 0] * qx + e2[None, :, 1] * qy + e2[None, :, 2] * qz) * inv
    ok = (
        (np.abs(det) > PARALLEL_EPS)
        & (u >= 0.0)
        & (v >= 0.0)
        & (u + v <= 1.0)
        & (t > t_min)
    )
    return np.where(ok, t, np.inf)


def intersect_batch(scene: Scene, origins, dirs, tau=1.0, t_min: float = DEFAULT_T_MIN) -> BatchHits:
    """Nearest hit for N rays against the scene at exposure time tau.

    tau may be a scalar or a per-ray array. A mesh translating by D per
    exposure sits at its current-frame position minus (1 - tau) * D, which is
    equivalent to shifting the ray origin by +(1 - tau) * D against the
    current-frame geometry.
    """
    o = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
    d = np.asarray(dirs, dtype=np.float64).reshape(-1, 3)
    n = o.shape[0]
    if not scene.meshes:
        return BatchHits(
            t=np.full(n, np.inf),
            hit=np.zeros(n, dtype=bool),
            point=np.zeros((n, 3)),
            normal=np.zeros((n, 3)),
            mesh_id=np.full(n, MISS_ID, dtype=np.int64),
            mesh_index=np.full(n, -1, dtype=np.intp),
            albedo=np.zeros((n, 3)),
        )
    tau_arr = np.broadcast_to(np.asarray(tau, dtype=np.float64), (n,))

    best_t = np.full(n, np.inf)
    best_tri = np.full(n, -1, dtype=np.intp)
    best_group = np.full(n, -1, dtype=np.intp)

    groups = _build_groups(scene)
    for gi, group in enumerate(groups):
        shift = (1.0 - tau_arr)[:, None] * group.displacement[None, :]
        og = o + shift
        tri_count = max(1, group.v0.shape[0])
        chunk = max(1, _RAY_CHUNK * 8 // tri_count)
        for start in range(0, n, chunk):
            sl = slice(start, min(n, start + chunk))
            t_all = _mt_batch(
                og[sl, 0:1], og[sl, 1:2], og[sl, 2:3],
                d[sl, 0:1], d[sl, 1:2], d[sl, 2:3],
                group, t_min,
            )
            tri = np.argmin(t_all, axis=1)
            t_near = t_all[np.arange(t_all.shape[0]), tri]
            better = t_near < best_t[sl]
            best_t[sl] = np.where(better, t_near, best_t[sl])
            best_tri[sl] = np.where(better, tri, best_tri[sl])
            best_group[sl] = np.where(better, gi, best_group[sl])

    hit = np.isfinite(best_t)
    point = np.where(hit[:, None], o + best_t[:, None] * d, 0.0)
    normal = np.zeros((n, 3))
    mesh_index = np.full(n, -1, dtype=np.intp)
    for gi, group in enumerate(groups):
        sel = hit & (best_group == gi)
        if not np.any(sel):
            continue
        tri = best_tri[sel]
        nrm = group.normal[tri]
        dd = d[sel]
        facing = (
            nrm[:, 0] * dd[:, 0] + nrm[:, 1] * dd[:, 1] + nrm[:, 2] * dd[:, 2]
        )
        normal[sel] = np.where(facing[:, None] > 0.0, -nrm, nrm)
        mesh_index[sel] = group.mesh_index[tri]

    mesh_ids = np.array([m.mesh_id for m in scene.meshes], dtype=np.int64)
    albedos = np.array([m.albedo for m in scene.meshes], dtype=np.float64)
    mesh_id = np.where(hit, mesh_ids[np.where(hit, mesh_index, 0)], MISS_ID)
    albedo = np.where(hit[:, None], albedos[np.where(hit, mesh_index, 0)], 0.0)
    return BatchHits(best_t, hit, point, normal, mesh_id, mesh_index, albedo)


# ---------------------------------------------------------------------------
# BVH for single incoherent rays
# ---------------------------------------------------------------------------


class Bvh:
    """Axis-aligned BVH over scene triangles frozen at one exposure time.

    Median split along the longest centroid axis; immutable once built, safe
    to traverse from many threads.
    """

    def __init__(self, scene: Scene, tau: float):
        verts, mesh_index = _triangles_at_tau(scene, tau)
        if verts.shape[0] == 0:
            raise ValueError("empty scene")
        self.tau = float(tau)
        self._scene = scene

        centroids = verts.mean(axis=1)
        lo = verts.min(axis=1)
        hi = verts.max(axis=1)

        order = np.arange(verts.shape[0], dtype=np.intp)
        nodes_min, nodes_max = [], []
        node_left, node_right = [], []
        leaf_start, leaf_count = [], []
        perm: list[int] = []

        def new_node():
            nodes_min.append(None)
            nodes_max.append(None)
            node_left.append(-1)
            node_right.append(-1)
            leaf_start.append(-1)
            leaf_count.append(0)
            return len(nodes_min) - 1

        def build(idx: np.ndarray) -> int:
            me = new_node()
            nodes_min[me] = lo[idx].min(axis=0)
            nodes_max[me] = hi[idx].max(axis=0)
            c = centroids[idx]
            spread = c.max(axis=0) - c.min(axis=0)
            axis = int(np.argmax(spread))
            if idx.size <= _LEAF_SIZE or spread[axis] == 0.0:
                leaf_start[me] = len(perm)
                leaf_count[me] = idx.size
                perm.extend(int(i) for i in idx)
                return me
            sort = idx[np.argsort(c[:, axis], kind="stable")]
            half = sort.size // 2
            node_left[me] = build(sort[:half])
            node_right[me] = build(sort[half:])
            return me

        build(order)

        p = np.asarray(perm, dtype=np.intp)
        self.nodes_min = np.asarray(nodes_min)
        self.nodes_max = np.asarray(nodes_max)
        self.node_left = np.asarray(node_left, dtype=np.intp)
        self.node_right = np.asarray(node_right, dtype=np.intp)
        self.leaf_start = np.asarray(leaf_start, dtype=np.intp)
        self.leaf_count = np.asarray(leaf_count, dtype=np.intp)
        self.v0 = verts[p, 0, :]
        self.e1 = verts[p, 1, :] - verts[p, 0, :]
        self.e2 = verts[p, 2, :] - verts[p, 0, :]
        self.normal = _face_normals(self.v0, self.e1, self.e2)
        self.mesh_index = mesh_index[p]

        # plain-python mirrors keep scalar traversal off numpy scalar overhead
        self._tri_py = [
            (
                float(self.v0[i, 0]), float(self.v0[i, 1]), float(self.v0[i, 2]),
                float(self.e1[i, 0]), float(self.e1[i, 1]), float(self.e1[i, 2]),
                float(self.e2[i, 0]), float(self.e2[i, 1]), float(self.e2[i, 2]),
            )
            for i in range(self.v0.shape[0])
        ]
        self._nodes_py = [
            (
                float(self.nodes_min[i, 0]), float(self.nodes_min[i, 1]), float(self.nodes_min[i, 2]),
                float(self.nodes_max[i, 0]), float(self.nodes_max[i, 1]), float(self.nodes_max[i, 2]),
                int(self.node_left[i]), int(self.node_right[i]),
                int(self.leaf_start[i]), int(self.leaf_count[i]),
            )
            for i in range(len(nodes_min))
        ]
        self._mesh_ids = [m.mesh_id for m in scene.meshes]
        self._albedos = [m.albedo for m in scene.meshes]

    @property
    def triangle_count(self) -> int:
        return self.v0.shape[0]


def build_bvh(scene: Scene, tau: float = 1.0) -> Bvh:
    """Hierarchy over triangle positions at normalized exposure time tau."""
    return Bvh(scene, tau)


def _mt_scalar(ox, oy, oz, dx, dy, dz, tri, t_min, t_max):
    v0x, v0y, v0z, e1x, e1y, e1z, e2x, e2y, e2z = tri
    px = dy * e2z - dz * e2y
    py = dz * e2x - dx * e2z
    pz = dx * e2y - dy * e2x
    det = e1x * px + e1y * py + e1z * pz
    if -PARALLEL_EPS < det < PARALLEL_EPS:
        return None
    inv = 1.0 / det
    tx = ox - v0x
    ty = oy - v0y
    tz = oz - v0z
    u = (tx * px + ty * py + tz * pz) * inv
    if u < 0.0 or u > 1.0:
        return None
    qx = ty * e1z - tz * e1y
    qy = tz * e1x - tx * e1z
    qz = tx * e1y - ty * e1x
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < 0.0 or u + v > 1.0:
        return None
    t = (e2x * qx + e2y * qy + e2z * qz) * inv
    if t <= t_min or t >= t_max:
        return None
    return t


def intersect(bvh: Bvh, origin, direction, t_min: float = DEFAULT_T_MIN, t_max: float = np.inf):
    """Nearest hit with t in (t_min, t_max), or None.

    direction is expected to be unit length (within 1e-6).
    """
    o = np.asarray(origin, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)
    ox, oy, oz = float(o[0]), float(o[1]), float(o[2])
    dx, dy, dz = float(d[0]), float(d[1]), float(d[2])

    best_t = t_max
    best_tri = -1
    nodes = bvh._nodes_py
    tris = bvh._tri_py
    stack = [0]
    while stack:
        ni = stack.pop()
        minx, miny, minz, maxx, maxy, maxz, left, right, start, count = nodes[ni]
        # slab test against (t_min, best_t)
        t0, t1 = t_min, best_t
        if dx != 0.0:
            inv = 1.0 / dx
            ta = (minx - ox) * inv
            tb = (maxx - ox) * inv
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
            if t0 > t1:
                continue
        elif ox < minx or ox > maxx:
            continue
        if dy != 0.0:
            inv = 1.0 / dy
            ta = (miny - oy) * inv
            tb = (maxy - oy) * inv
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
            if t0 > t1:
                continue
        elif oy < miny or oy > maxy:
            continue
        if dz != 0.0:
            inv = 1.0 / dz
            ta = (minz - oz) * inv
            tb = (maxz - oz) * inv
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
            if t0 > t1:
                continue
        elif oz < minz or oz > maxz:
            continue

        if left < 0:
            for i in range(start, start + count):
                t = _mt_scalar(ox, oy, oz, dx, dy, dz, tris[i], t_min, best_t)
                if t is not None:
                    best_t = t
                    best_tri = i
        else:
            stack.append(right)
            stack.append(left)

    if best_tri < 0:
        return None
    point = np.array([ox + best_t * dx, oy + best_t * dy, oz + best_t * dz])
    nrm = bvh.normal[best_tri]
    if nrm[0] * dx + nrm[1] * dy + nrm[2] * dz > 0.0:
        nrm = -nrm
    mi = int(bvh.mesh_index[best_tri])
    return HitRecord(
        t=float(best_t),
        point=point,
        normal=nrm.copy(),
        mesh_id=bvh._mesh_ids[mi],
        albedo=np.asarray(bvh._albedos[mi]).copy(),
    )


def intersect_brute_force(scene: Scene, origin, direction, tau: float = 1.0,
                          t_min: float = DEFAULT_T_MIN, t_max: float = np.inf):
    """Reference all-triangle scan for a single ray; used to cross-check the BVH."""
    hits = intersect_batch(scene, np.asarray(origin).reshape(1, 3),
                           np.asarray(direction).reshape(1, 3), tau=tau, t_min=t_min)
    if not hits.hit[0] or hits.t[0] >= t_max:
        return None
    return HitRecord(
        t=float(hits.t[0]),
        point=hits.point[0].copy(),
        normal=hits.normal[0].copy(),
        mesh_id=int(hits.mesh_id[0]),
        albedo=hits.albedo[0].copy(),
    )
