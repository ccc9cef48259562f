"""The spectral scale B(c) = {(tau(a), tau(b1 a), tau(b2 a)) : 0 <= a <= 1}.

B is a convex body in R^3.  A direction u = (u0, u1, u2) is maximized over B
by the spectral projection of ``b_t = u1 b1 + u2 b2`` onto eigenvalues above
``s = -u0``, so extreme points are sampled from directions on the sphere and
assembled into a hull with scipy's Qhull wrapper.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .errors import ArgumentError, DegeneratePencilError, NonExposedDirectionError
from .linalg import Operator, eigh_batch, eigvalsh_batch, hermitian_eig
from .numrange import trace_boundary
from .pencil import cluster_sizes, critical_angles
from .serialize import atomic_write


def _direction(s, t1, t2):
    if s == 0 and t1 == 0 and t2 == 0:
        raise ArgumentError("direction (s, t1, t2) must be nonzero")


def scale_support(op: Operator, s: float, t1: float, t2: float) -> float:
    """max over 0 <= a <= 1 of -s tau(a) + t1 tau(b1 a) + t2 tau(b2 a)."""
    _direction(s, t1, t2)
    w = eigvalsh_batch((t1 * op.b1 + t2 * op.b2)[None])[0]
    return float(np.sum(np.maximum(w - s, 0.0)) / op.n)


def psi(op: Operator, a) -> np.ndarray:
    """(tau(a), tau(b1 a), tau(b2 a)) for a Hermitian a."""
    a = np.asarray(a)
    n = op.n
    return np.array([np.trace(a).real, np.trace(op.b1 @ a).real,
                     np.trace(op.b2 @ a).real]) / n


def extreme_point(op: Operator, s: float, t1: float, t2: float, tol: float | None = None):
    """Psi of the spectral projection of b_t onto eigenvalues above s, and its rank."""
    _direction(s, t1, t2)
    bt = t1 * op.b1 + t2 * op.b2
    eig = hermitian_eig(bt, check=False)
    if tol is None:
        tol = 1e-10 * (1.0 + float(np.max(np.abs(eig.values))))
    if np.any(np.abs(eig.values - s) <= tol):
        raise NonExposedDirectionError(f"level s={s} is within {tol:g} of an eigenvalue of b_t")
    r = int(np.sum(eig.values > s))
    v = eig.vectors[:, :r]
    return psi(op, v @ v.conj().T), r


# ---------------------------------------------------------------------------
# body construction


def fibonacci_sphere(count: int) -> np.ndarray:
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    rho = np.sqrt(1.0 - z * z)
    phi = np.pi * (1.0 + np.sqrt(5.0)) * i
    return np.column_stack([z, rho * np.cos(phi), rho * np.sin(phi)])


def sample_directions(count: int) -> np.ndarray:
    """Antipodally symmetric quasi-uniform directions plus the six axis directions."""
    half = fibonacci_sphere(max(count // 2, 1))
    axes = np.vstack([np.eye(3), -np.eye(3)])
    return np.vstack([axes, half, -half])


def _prefix_points(w, v, op: Operator):
    """Psi of every top-r spectral projection, r = 0..n, for each eigensystem."""
    d1 = np.einsum("mij,jk,mki->mi", v.conj().transpose(0, 2, 1), op.b1, v).real
    d2 = np.einsum("mij,jk,mki->mi", v.conj().transpose(0, 2, 1), op.b2, v).real
    m, n = w.shape
    out = np.zeros((m, n + 1, 3))
    out[:, 1:, 0] = np.arange(1, n + 1) / n
    out[:, 1:, 1] = np.cumsum(d1, axis=1) / n
    out[:, 1:, 2] = np.cumsum(d2, axis=1) / n
    return out


def _face_points(op: Operator, tol_rel: float = 1e-7):
    """Vertices of flat faces at angles where b_theta has a repeated eigenvalue."""
    try:
        crit = critical_angles(op, cross_check=False)
    except DegeneratePencilError:
        return np.zeros((0, 3)), np.zeros((0, 3))
    pts, dirs = [], []
    for theta in crit.angles:
        w, v = eigh_batch(op.pencil(np.array([theta])))
        w, v = w[0], v[0]
        tol = tol_rel * (1.0 + np.max(np.abs(w)))
        h = np.cos(theta) * op.b2 - np.sin(theta) * op.b1
        a = 0
        for size in cluster_sizes(w, tol):
            if size >= 2:
                e = v[:, a: a + size]
                comp = e.conj().T @ h @ e
                u = hermitian_eig((comp + comp.conj().T) / 2, check=False).vectors
                base = v[:, :a] @ v[:, :a].conj().T
                for j in range(size + 1):
                    for cols in (u[:, :j], u[:, size - j:]):
                        q = e @ cols
                        pts.append(psi(op, base + q @ q.conj().T))
                        s = float(w[a: a + size].mean())
                        d = np.array([-s, np.cos(theta), np.sin(theta)])
                        dirs.append(d / np.linalg.norm(d))
            a += size
    if not pts:
        return np.zeros((0, 3)), np.zeros((0, 3))
    return np.array(pts), np.array(dirs)


@dataclass(frozen=True)
class ScaleBody:
    """Hull of sampled extreme points of the spectral scale.

    ``kind`` is ``"body"`` for a 3D hull, otherwise ``"polygon"``,
    ``"segment"`` or ``"point"``; degenerate kinds carry their ordered
    boundary in ``vertices`` and no facets.
    """

    kind: str
    vertices: np.ndarray
    facets: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    provenance: np.ndarray
    scale: float
    psi_one: np.ndarray
    n: int
    hull_tol: float
    points: np.ndarray = field(repr=False)
    op: Operator | None = field(default=None, repr=False, compare=False)


def _dedupe(points: np.ndarray, dirs: np.ndarray, eps: float):
    # exact repeats (the poles, mostly) go first; the tree only sees near-misses
    _, first = np.unique(np.round(points / eps), axis=0, return_index=True)
    first = np.sort(first)
    points, dirs = points[first], dirs[first]
    tree = cKDTree(points)
    keep = np.ones(len(points), dtype=bool)
    for i, j in sorted(tree.query_pairs(eps)):
        if keep[i] and keep[j]:
            keep[j] = False
    return points[keep], dirs[keep]


def _affine_frame(points: np.ndarray, eps: float):
    origin = points.mean(axis=0)
    _, sv, vt = np.linalg.svd(points - origin, full_matrices=False)
    rank = int(np.sum(sv > eps * np.sqrt(len(points))))
    return origin, vt[:rank], rank


def build_scale(op: Operator, directions: int = 2000, hull_tol: float = 1e-9) -> ScaleBody:
    if directions < 100:
        raise ArgumentError("directions must be at least 100")
    n = op.n
    scale = max(op.norm, 1.0)
    eps = hull_tol * scale
    dirs = sample_directions(directions)
    s = -dirs[:, 0]
    bt = dirs[:, 1, None, None] * op.b1 + dirs[:, 2, None, None] * op.b2
    w, v = eigh_batch(bt)
    prefix = _prefix_points(w, v, op)
    tie = 1e-10 * (1.0 + np.max(np.abs(w), axis=1))
    rows = np.arange(len(dirs))
    # both sides of a tied level give the two ends of a face
    r_lo = np.sum(w > (s + tie)[:, None], axis=1)
    r_hi = np.sum(w > (s - tie)[:, None], axis=1)
    pts = np.vstack([prefix[rows, r_lo], prefix[rows, r_hi]])
    prov = np.vstack([dirs, dirs])
    fpts, fdirs = _face_points(op)
    if len(fpts):
        pts = np.vstack([pts, fpts])
        prov = np.vstack([prov, fdirs])
    pts, prov = _dedupe(pts, prov, eps)
    psi_one = np.array([1.0, op.tau.real, op.tau.imag])

    origin, basis, rank = _affine_frame(pts, eps)
    empty3 = np.zeros((0, 3))
    if rank == 3:
        hull = ConvexHull(pts)
        idx = hull.vertices
        remap = -np.ones(len(pts), dtype=int)
        remap[idx] = np.arange(idx.size)
        verts = pts[idx]
        facets = remap[hull.simplices]
        normals = hull.equations[:, :3]
        offsets = -hull.equations[:, 3]
        a, b, c = verts[facets[:, 0]], verts[facets[:, 1]], verts[facets[:, 2]]
        flip = np.einsum("ij,ij->i", np.cross(b - a, c - a), normals) < 0
        facets[flip] = facets[flip][:, [0, 2, 1]]
        return ScaleBody("body", verts, facets, normals, offsets, prov[idx],
                         scale, psi_one, n, hull_tol, pts, op)
    if rank == 2:
        coords = (pts - origin) @ basis.T
        idx = ConvexHull(coords).vertices  # counter-clockwise in 2D
        return ScaleBody("polygon", pts[idx], np.zeros((0, 3), int), empty3,
                         np.zeros(0), prov[idx], scale, psi_one, n, hull_tol, pts, op)
    if rank == 1:
        proj = (pts - origin) @ basis[0]
        idx = np.array([np.argmin(proj), np.argmax(proj)])
        return ScaleBody("segment", pts[idx], np.zeros((0, 3), int), empty3,
                         np.zeros(0), prov[idx], scale, psi_one, n, hull_tol, pts, op)
    return ScaleBody("point", pts[:1], np.zeros((0, 3), int), empty3, np.zeros(0),
                     prov[:1], scale, psi_one, n, hull_tol, pts, op)


# ---------------------------------------------------------------------------
# slices and faces


@dataclass(frozen=True)
class IsotraceSlice:
    t: float
    polygon: np.ndarray

    def points3d(self) -> np.ndarray:
        return np.column_stack([np.full(len(self.polygon), self.t), self.polygon])


def isotrace_slice(op: Operator, k: int, grid: int = 3600) -> IsotraceSlice:
    """The slice of B at x0 = k/n, as the image of W_k(c) under w -> (k/n) w."""
    n = op.n
    if not 0 <= k <= n:
        raise ArgumentError(f"k must lie in 0..{n}, got {k}")
    if k == 0:
        return IsotraceSlice(0.0, np.zeros((1, 2)))
    if k == n:
        return IsotraceSlice(1.0, np.array([[op.tau.real, op.tau.imag]]))
    w = trace_boundary(op, k, grid=grid).points() * (k / n)
    return IsotraceSlice(k / n, np.column_stack([w.real, w.imag]))


@dataclass(frozen=True)
class Face:
    vertices: np.ndarray
    normal: np.ndarray
    offset: float
    area: float
    transverse: bool


def _triangle_areas(v, f):
    a, b, c = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def flat_faces(body: ScaleBody, tol: float = 1e-6) -> list:
    """Maximal planar patches of the hull with area above tol * scale**2.

    Adjacent facets merge when their normals and offsets agree to ``tol``.
    A patch is kept only if its plane is a true supporting plane of B
    (offset equal to the exact support value), which rejects the chords
    that approximate curved parts of the surface.
    """
    op = body.op
    if body.kind != "body":
        return []
    f = body.facets
    nf = len(f)
    parent = np.arange(nf)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    edges = {}
    for i, tri in enumerate(f):
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            edges.setdefault((min(a, b), max(a, b)), []).append(i)
    for owners in edges.values():
        if len(owners) != 2:
            continue
        i, j = owners
        if (np.linalg.norm(body.normals[i] - body.normals[j]) < tol
                and abs(body.offsets[i] - body.offsets[j]) < tol * body.scale):
            parent[find(i)] = find(j)

    roots = np.array([find(i) for i in range(nf)])
    areas = _triangle_areas(body.vertices, f)
    faces = []
    for r in np.unique(roots):
        members = np.nonzero(roots == r)[0]
        area = float(areas[members].sum())
        if area <= tol * body.scale ** 2:
            continue
        normal = body.normals[members].mean(axis=0)
        normal /= np.linalg.norm(normal)
        offset = float(body.offsets[members].mean())
        if op is not None:
            exact = scale_support(op, -normal[0], normal[1], normal[2])
            if exact - offset > 1e-9 * body.scale:
                continue
        idx = np.unique(f[members])
        verts = _order_planar(body.vertices[idx], normal)
        x0 = verts[:, 0]
        faces.append(Face(verts, normal, offset, area, bool(x0.max() - x0.min() > 1e-9)))
    return faces


def _order_planar(points: np.ndarray, normal: np.ndarray) -> np.ndarray:
    c = points.mean(axis=0)
    e1 = np.cross(normal, [1.0, 0, 0])
    if np.linalg.norm(e1) < 0.5:
        e1 = np.cross(normal, [0, 1.0, 0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    ang = np.arctan2((points - c) @ e2, (points - c) @ e1)
    return points[np.argsort(ang)]


def hull_section(body: ScaleBody, t: float) -> np.ndarray:
    """Points of the hull surface on the plane x0 = t, as (x1, x2) pairs.

    Diagnostic only: slices of B themselves come from isotrace_slice.
    """
    v = body.vertices
    out = [v[np.abs(v[:, 0] - t) <= 1e-12][:, 1:]]
    if body.kind == "body":
        pairs = np.vstack([body.facets[:, [0, 1]], body.facets[:, [1, 2]],
                           body.facets[:, [2, 0]]])
        a, b = v[pairs[:, 0]], v[pairs[:, 1]]
        da, db = a[:, 0] - t, b[:, 0] - t
        cross = da * db < 0
        lam = da[cross] / (da[cross] - db[cross])
        out.append(a[cross, 1:] + lam[:, None] * (b[cross, 1:] - a[cross, 1:]))
    return np.vstack(out)


# ---------------------------------------------------------------------------
# distances


def _point_segment_dist(p, a, b):
    ab = b - a
    denom = np.maximum(np.einsum("...i,...i->...", ab, ab), 1e-300)
    lam = np.clip(np.einsum("...i,...i->...", p - a, ab) / denom, 0.0, 1.0)
    return np.linalg.norm(p - (a + lam[..., None] * ab), axis=-1)


def _point_triangle_dist(p, a, b, c):
    """Distance from points p (m,1,3) to triangles (1,T,3)."""
    nrm = np.cross(b - a, c - a)
    nn = np.linalg.norm(nrm, axis=-1, keepdims=True)
    unit = nrm / np.maximum(nn, 1e-300)
    h = np.einsum("...i,...i->...", p - a, unit)
    q = p - h[..., None] * unit
    inside = np.ones(h.shape, dtype=bool)
    for x, y in ((a, b), (b, c), (c, a)):
        side = np.einsum("...i,...i->...", np.cross(y - x, q - x), unit)
        inside &= side >= 0
    edge = np.minimum(np.minimum(_point_segment_dist(p, a, b), _point_segment_dist(p, b, c)),
                      _point_segment_dist(p, c, a))
    return np.where(inside & (nn[..., 0] > 0), np.abs(h), edge)


def _directed(pa: np.ndarray, pb: np.ndarray, eps: float) -> float:
    """max over pa of the distance to conv(pb); both in R^2 or R^3."""
    hull = ConvexHull(pb)
    eq = hull.equations
    outside = np.max(pa @ eq[:, :-1].T + eq[:, -1], axis=1) > eps
    if not outside.any():
        return 0.0
    p = pa[outside][:, None, :]
    s = hull.simplices
    if pb.shape[1] == 2:
        d = _point_segment_dist(p, pb[s[:, 0]][None], pb[s[:, 1]][None])
    else:
        d = _point_triangle_dist(p, pb[s[:, 0]][None], pb[s[:, 1]][None], pb[s[:, 2]][None])
    return float(d.min(axis=1).max())


def hausdorff(pa, pb, eps: float = 1e-12) -> float:
    """Hausdorff distance between the convex hulls of two point sets."""
    pa = np.atleast_2d(np.asarray(pa, dtype=float))
    pb = np.atleast_2d(np.asarray(pb, dtype=float))
    both = np.vstack([pa, pb])
    origin, basis, rank = _affine_frame(both, eps)
    if rank == 0:
        return float(np.linalg.norm(pa.mean(axis=0) - pb.mean(axis=0)))
    a = (pa - origin) @ basis.T
    b = (pb - origin) @ basis.T
    if rank == 1:
        return float(max(abs(a.min() - b.min()), abs(a.max() - b.max())))
    try:
        return max(_directed(a, b, eps), _directed(b, a, eps))
    except QhullError:
        # one set is flat inside the joint span: fall back to support functions
        u = fibonacci_sphere(4000)[:, :rank] if rank == 3 else np.column_stack(
            [np.cos(np.linspace(0, 2 * np.pi, 4000)), np.sin(np.linspace(0, 2 * np.pi, 4000))])
        u = u / np.linalg.norm(u, axis=1, keepdims=True)
        return float(np.max(np.abs((a @ u.T).max(axis=0) - (b @ u.T).max(axis=0))))


# ---------------------------------------------------------------------------
# export


def _polyline(body: ScaleBody):
    m = len(body.vertices)
    if body.kind == "polygon":
        return [(i, (i + 1) % m) for i in range(m)]
    if body.kind == "segment":
        return [(0, 1)]
    return []


def mesh_bytes(body: ScaleBody, fmt: str) -> bytes:
    fmt = fmt.lower()
    v = body.vertices
    if fmt == "obj":
        lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in v]
        if body.kind == "body":
            lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in body.facets]
        elif body.kind == "polygon":
            lines.append("l " + " ".join(str(i + 1) for i in range(len(v))) + " 1")
        elif body.kind == "segment":
            lines.append("l 1 2")
        return ("\n".join(lines) + "\n").encode()
    if fmt == "ply":
        head = ["ply", "format binary_little_endian 1.0", f"element vertex {len(v)}",
                "property double x", "property double y", "property double z"]
        if body.kind == "body":
            head += [f"element face {len(body.facets)}", "property list uchar int vertex_indices"]
        else:
            head += [f"element edge {len(_polyline(body))}", "property int vertex1",
                     "property int vertex2"]
        head.append("end_header")
        out = bytearray(("\n".join(head) + "\n").encode())
        out += np.asarray(v, dtype="<f8").tobytes()
        if body.kind == "body":
            for a, b, c in body.facets:
                out += struct.pack("<Biii", 3, a, b, c)
        else:
            for a, b in _polyline(body):
                out += struct.pack("<ii", a, b)
        return bytes(out)
    raise ArgumentError(f"unknown mesh format {fmt!r}")


def export_mesh(body: ScaleBody, fmt: str, path) -> None:
    """Write the hull as OBJ or binary PLY (a polyline for degenerate bodies)."""
    atomic_write(path, mesh_bytes(body, fmt))


def euler_characteristic(body: ScaleBody) -> int:
    f = body.facets
    edges = {tuple(sorted(e)) for tri in f for e in ((tri[0], tri[1]), (tri[1], tri[2]),
                                                      (tri[2], tri[0]))}
    return len(body.vertices) - len(edges) + len(f)
