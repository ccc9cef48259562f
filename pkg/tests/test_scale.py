import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from knumrange import fixtures as F
from knumrange.errors import ArgumentError, NonExposedDirectionError
from knumrange.linalg import decompose
from knumrange.scale import (ScaleBody, build_scale, euler_characteristic, export_mesh,
                             extreme_point, flat_faces, hausdorff, hull_section, isotrace_slice,
                             psi, sample_directions, scale_support)

from .strategies import ginibre, normal_matrices


def _quantized(body):
    q = body.vertices[:, 0] * body.n
    return np.abs(q - np.round(q)).max()


def test_support_examples():
    assert scale_support(decompose(np.zeros((2, 2))), -1, 0, 0) == pytest.approx(1)
    op = decompose(F.EX21)
    assert scale_support(op, 0, 1, 0) == pytest.approx(0.5)
    assert scale_support(op, 0, 0, 1) == pytest.approx(0.5)
    with pytest.raises(ArgumentError):
        scale_support(op, 0, 0, 0)


@given(ginibre(n=st.integers(2, 4)), st.integers(0, 10**6))
def test_support_is_max_over_random_positive_contractions(c, seed):
    op = decompose(c)
    rng = np.random.default_rng(seed)
    d = rng.standard_normal(3)
    h = scale_support(op, -d[0], d[1], d[2])
    for _ in range(20):
        g = rng.standard_normal((op.n, op.n)) + 1j * rng.standard_normal((op.n, op.n))
        u, _ = np.linalg.qr(g)
        a = (u * rng.random(op.n)) @ u.conj().T
        assert psi(op, a) @ d <= h + 1e-12


def test_extreme_point_examples():
    op = decompose(F.EX21)
    p, r = extreme_point(op, 5, 1, 0)
    assert r == 0 and np.allclose(p, 0)
    p, r = extreme_point(op, -5, 1, 0)
    assert r == 2 and np.allclose(p, [1, 0.5, 0.5])
    p, r = extreme_point(decompose(np.diag([1.0, -1.0])), 0, 1, 0)
    assert r == 1 and np.allclose(p, [0.5, 0.5, 0])
    with pytest.raises(NonExposedDirectionError):
        extreme_point(op, 1.0, 1, 0)


def test_zero_operator_is_a_segment():
    body = build_scale(decompose(np.zeros((2, 2))))
    assert body.kind == "segment"
    assert sorted(map(tuple, np.round(body.vertices, 12))) == [(0, 0, 0), (1, 0, 0)]
    assert flat_faces(body) == []


def test_example_21_body():
    body = build_scale(decompose(F.EX21))
    assert body.kind == "body"
    assert np.min(np.linalg.norm(body.vertices, axis=1)) <= 1e-12
    assert np.min(np.linalg.norm(body.vertices - [1, 0.5, 0.5], axis=1)) <= 1e-12
    assert flat_faces(body) == []
    # middle section is the disk of radius 1/4 about (1/4, 1/4)
    mid = body.vertices[np.abs(body.vertices[:, 0] - 0.5) < 1e-12]
    assert np.abs(np.linalg.norm(mid[:, 1:] - 0.25, axis=1) - 0.25).max() <= 1e-12


def test_example_22_has_a_planar_face_through_origin():
    op = decompose(F.EX22)
    faces = flat_faces(build_scale(op))
    assert faces
    proj = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 0]], dtype=float)
    target = psi(op, proj)  # Psi of the top spectral projection of b2
    hits = [f for f in faces
            if np.min(np.linalg.norm(f.vertices, axis=1)) <= 1e-9
            and np.min(np.linalg.norm(f.vertices - target, axis=1)) <= 1e-9]
    assert hits and all(f.transverse for f in hits)


@given(ginibre(n=st.integers(2, 4)))
def test_body_invariants(c):
    op = decompose(c)
    body = build_scale(op, directions=300)
    v = body.vertices
    tol = body.hull_tol * body.scale
    assert np.min(np.linalg.norm(v, axis=1)) <= tol
    assert np.min(np.linalg.norm(v - body.psi_one, axis=1)) <= tol
    assert v[:, 0].min() >= -1e-12 and v[:, 0].max() <= 1 + 1e-12
    assert _quantized(body) <= 1e-9
    # every vertex maximizes its own provenance direction
    score = v @ body.provenance.T
    assert np.all(np.diag(score) >= score.max(axis=0) - 1e-9 * body.scale)
    # symmetric under x -> Psi(1) - x
    assert hausdorff(v, body.psi_one - v) <= 2 * tol
    # support consistency against every sampled direction
    dirs = sample_directions(300)
    h = np.array([scale_support(op, -d[0], d[1], d[2]) for d in dirs])
    assert np.abs((v @ dirs.T).max(axis=0) - h).max() <= tol


@given(normal_matrices(n=st.integers(2, 4)))
def test_slices_agree_with_hull_sections_for_normal(c):
    op = decompose(c)
    body = build_scale(op)
    for k in range(1, op.n):
        sl = isotrace_slice(op, k)
        sec = hull_section(body, k / op.n)
        assert hausdorff(sl.polygon, sec) <= 2 * body.hull_tol * body.scale


def test_example_24_bodies_coincide():
    b1 = build_scale(decompose(F.EX24_C1))
    b2 = build_scale(decompose(F.EX24_C2))
    assert hausdorff(b1.vertices, b2.vertices) <= 2e-9 * b1.scale


def test_isotrace_slice_examples():
    op = decompose(F.EX21)
    sl = isotrace_slice(op, 1)
    assert sl.t == 0.5
    assert np.abs(np.linalg.norm(sl.polygon - 0.25, axis=1) - 0.25).max() <= 1e-8
    assert np.allclose(isotrace_slice(op, 0).points3d(), [[0, 0, 0]])
    assert np.allclose(isotrace_slice(op, 2).points3d(), [[1, 0.5, 0.5]])
    tri = isotrace_slice(decompose(F.DIAG01I), 1)
    assert np.allclose(tri.t, 1 / 3)
    verts = ConvexHull(tri.polygon).points[ConvexHull(tri.polygon).vertices]
    assert sorted(map(tuple, np.round(verts * 3, 9))) == [(0, 0), (0, 1), (1, 0)]
    with pytest.raises(ArgumentError):
        isotrace_slice(op, 3)


def test_directions_minimum():
    with pytest.raises(ArgumentError):
        build_scale(decompose(F.EX21), directions=50)


def test_hermitian_body_is_a_polygon():
    body = build_scale(decompose(np.diag([1.0, 2.0, 3.0])))
    assert body.kind == "polygon"
    assert np.allclose(body.vertices[:, 2], 0)


def _cube_body():
    pts = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)], dtype=float)
    hull = ConvexHull(pts)
    facets = hull.simplices.copy()
    a, b, c = pts[facets[:, 0]], pts[facets[:, 1]], pts[facets[:, 2]]
    flip = np.einsum("ij,ij->i", np.cross(b - a, c - a), hull.equations[:, :3]) < 0
    facets[flip] = facets[flip][:, [0, 2, 1]]
    return ScaleBody("body", pts, facets, hull.equations[:, :3], -hull.equations[:, 3],
                     np.zeros((8, 3)), 1.0, np.ones(3), 2, 1e-9, pts)


def test_cube_mesh(tmp_path):
    body = _cube_body()
    path = tmp_path / "cube.obj"
    export_mesh(body, "obj", path)
    lines = path.read_text().splitlines()
    assert sum(line.startswith("v ") for line in lines) == 8
    assert sum(line.startswith("f ") for line in lines) == 12
    assert euler_characteristic(body) == 2
    assert len(flat_faces(body)) == 6


def test_example_21_mesh_is_watertight(tmp_path):
    body = build_scale(decompose(F.EX21), directions=500)
    path = tmp_path / "ex21.obj"
    export_mesh(body, "obj", path)
    lines = path.read_text().splitlines()
    faces = [tuple(int(x) - 1 for x in line.split()[1:]) for line in lines if line.startswith("f ")]
    edges = {}
    for f in faces:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            edges[(a, b)] = edges.get((a, b), 0) + 1
    # consistently oriented closed surface: each directed edge once, reverse present
    assert all(cnt == 1 and (b, a) in edges for (a, b), cnt in edges.items())
    assert sum(line.startswith("v ") for line in lines) == len(body.vertices)
    assert euler_characteristic(body) == 2
    # outward orientation
    v = body.vertices
    centre = v.mean(axis=0)
    for f in faces[:50]:
        n = np.cross(v[f[1]] - v[f[0]], v[f[2]] - v[f[0]])
        assert n @ (v[f[0]] - centre) > 0


def test_ply_roundtrip(tmp_path):
    body = build_scale(decompose(F.EX21), directions=200)
    path = tmp_path / "b.ply"
    export_mesh(body, "ply", path)
    data = path.read_bytes()
    head, _, payload = data.partition(b"end_header\n")
    assert b"binary_little_endian" in head
    nv = len(body.vertices)
    verts = np.frombuffer(payload[: nv * 24], dtype="<f8").reshape(nv, 3)
    assert np.array_equal(verts, body.vertices)
    first = struct.unpack("<Biii", payload[nv * 24: nv * 24 + 13])
    assert first[0] == 3 and list(first[1:]) == list(body.facets[0])


def test_degenerate_polyline(tmp_path):
    body = build_scale(decompose(np.zeros((2, 2))))
    path = tmp_path / "z.obj"
    export_mesh(body, "obj", path)
    lines = path.read_text().splitlines()
    assert sum(line.startswith("v ") for line in lines) == 2
    assert "l 1 2" in lines


def test_export_errors(tmp_path):
    body = _cube_body()
    with pytest.raises(ArgumentError):
        export_mesh(body, "stl", tmp_path / "x.stl")
    with pytest.raises(OSError):
        export_mesh(body, "obj", tmp_path / "missing" / "x.obj")


def test_hausdorff_basics():
    sq = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float)
    assert hausdorff(sq, sq + [0.5, 0]) == pytest.approx(0.5)
    assert hausdorff(sq, sq[[0, 3, 1, 2]]) == 0
    assert hausdorff([[0, 0, 0], [1, 0, 0]], [[0, 0, 0], [2, 0, 0]]) == pytest.approx(1)
