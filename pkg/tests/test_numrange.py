import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from knumrange import fixtures as F
from knumrange.errors import ArgumentError
from knumrange.linalg import decompose
from knumrange.numrange import (analyticity_residual, classify, complement_identity_check,
                                selfadjoint_interval, support_wk, tangent_intersection,
                                touch_fd_check, touch_set, trace_boundary)
from knumrange.oracle import sample_wk_cloud
from knumrange.structure import is_reducing_eigenvalue

from .strategies import ginibre, normal_matrices

TH = np.linspace(0, 2 * np.pi, 97)


def test_support_examples():
    assert support_wk(decompose(np.diag([3.0, 1.0])), 1, 0.0) == pytest.approx(3)
    op = decompose(F.EX21)
    ref = np.real(np.exp(-1j * TH) * (1 + 1j) / 2) + 0.5
    assert np.abs(support_wk(op, 1, TH) - ref).max() <= 1e-12
    assert np.abs(support_wk(op, 2, TH) - np.real(np.exp(-1j * TH) * op.tau)).max() <= 1e-12


def test_support_k_out_of_range():
    op = decompose(F.EX21)
    for k in (0, 3):
        with pytest.raises(ArgumentError):
            support_wk(op, k, 0.0)


def test_touch_examples():
    assert touch_set(decompose(F.DIAG01I), 1, 0.0) == pytest.approx((1,))
    ends = touch_set(decompose(np.diag([1 + 1j, 1 - 1j])), 1, 0.0)
    assert len(ends) == 2
    assert sorted(ends, key=lambda z: z.imag) == pytest.approx([1 - 1j, 1 + 1j])
    op = decompose(F.EX21)
    for t in TH[:10]:
        assert touch_set(op, 2, t) == pytest.approx(((1 + 1j) / 2,))


def test_touch_segment_order_matches_one_sided_limits():
    # theta- endpoint first, theta+ endpoint second
    op = decompose(np.diag([1 + 1j, 1 - 1j]))
    lo, hi = touch_set(op, 1, 0.0)
    assert lo == pytest.approx(1 - 1j) and hi == pytest.approx(1 + 1j)
    assert touch_fd_check(op, 1, 0.0) <= 1e-6


def test_touch_tol_must_be_positive():
    with pytest.raises(ArgumentError):
        touch_set(decompose(F.EX21), 1, 0.0, tol=0.0)


def test_tangent_intersection_of_square():
    # W(diag(1+i, 1-i, -1+i, -1-i)) is the square [-1, 1]^2
    op = decompose(np.diag([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]))
    assert tangent_intersection(op, 1, 0.0, np.pi / 2) == pytest.approx(1 + 1j)
    assert tangent_intersection(op, 1, np.pi / 2, np.pi) == pytest.approx(-1 + 1j)


@given(ginibre(), st.floats(0, 2 * np.pi))
def test_touch_matches_finite_difference(c, theta):
    op = decompose(c)
    for k in range(1, op.n):
        assert touch_fd_check(op, k, theta) <= 1e-3 * op.norm


def test_trace_triangle():
    op = decompose(F.DIAG01I)
    b = trace_boundary(op, 1)
    ends = {complex(round(z.real, 9), round(z.imag, 9)) for s in b.segments for z in (s.p1, s.p2)}
    assert ends == {0, 1, 1j}
    assert len(b.segments) == 3
    assert sorted(abs(c.point) for c in b.corners) == pytest.approx([0, 1, 1])
    assert b.arcs == []
    # brute force over unit vectors never leaves the triangle
    cloud = sample_wk_cloud(op, 1, 5000, 0)
    assert np.all(cloud.real >= -1e-12) and np.all(cloud.imag >= -1e-12)
    assert np.all(cloud.real + cloud.imag <= 1 + 1e-12)


def test_trace_example_21_disk():
    b = trace_boundary(decompose(F.EX21), 1)
    assert b.segments == [] and b.corners == []
    assert b.arcs == [(0.0, 2 * np.pi)]
    assert np.abs(np.abs(b.points() - (1 + 1j) / 2) - 0.5).max() <= 1e-12


def test_trace_jordan_circle():
    b = trace_boundary(decompose(F.JORDAN2), 1)
    assert np.abs(np.abs(b.points()) - 0.5).max() <= 1e-12
    cloud = sample_wk_cloud(decompose(F.JORDAN2), 1, 5000, 1)
    assert np.abs(cloud).max() <= 0.5 + 1e-12
    assert np.abs(cloud).max() >= 0.49


def test_degenerate_kinds():
    seg = trace_boundary(decompose(np.diag([1.0, 2.0, 3.0])), 1)
    assert seg.kind == "segment" and len(seg.segments) == 1
    pt = trace_boundary(decompose(2 * np.eye(3)), 2)
    assert pt.kind == "point" and pt.corners[0].point == pytest.approx(2)
    rotated = trace_boundary(decompose(np.exp(0.7j) * np.diag([1.0, -1.0])), 1)
    assert rotated.kind == "segment"


def test_trace_boundary_errors():
    op = decompose(F.EX21)
    with pytest.raises(ArgumentError):
        trace_boundary(op, 1, grid=100)
    with pytest.raises(ArgumentError):
        trace_boundary(op, 3)


@given(ginibre(n=st.integers(2, 4)))
def test_boundary_invariants(c):
    op = decompose(c)
    scale = op.norm
    for k in range(1, op.n):
        b = trace_boundary(op, k, grid=720)
        for i in range(2):
            on_line = np.real(np.exp(-1j * b.thetas) * b.touch[:, i]) - b.support
            assert np.abs(on_line).max() <= 1e-8 * scale
        pts = b.points()
        proj = np.real(np.exp(-1j * b.thetas)[None, :] * pts[:, None])
        assert (proj - b.support[None, :]).max() <= 1e-8 * scale
        for corner in b.corners:
            inside = [(t - corner.theta_lo) % (2 * np.pi) < corner.theta_hi - corner.theta_lo
                      for t in b.thetas]
            for t, row, m in zip(b.thetas[inside], b.touch[inside], b.n_touch[inside]):
                if t != corner.theta_lo:
                    assert abs(row[0] - corner.point) <= 1e-7 * scale


def _outer_vertices(op, k, grid):
    th = np.arange(grid) * 2 * np.pi / grid
    r = support_wk(op, k, th)
    th2, r2 = np.roll(th, -1), np.roll(r, -1)
    d = np.sin(th2 - th)
    x = (r * np.sin(th2) - r2 * np.sin(th)) / d
    y = (r2 * np.cos(th) - r * np.cos(th2)) / d
    return x + 1j * y


@given(ginibre(n=st.integers(2, 4)))
def test_outer_approximations_nest(c):
    op = decompose(c)
    coarse = np.arange(360) * 2 * np.pi / 360
    fine = _outer_vertices(op, 1, 720)
    r = support_wk(op, 1, coarse)
    proj = np.real(np.exp(-1j * coarse)[None, :] * fine[:, None])
    assert (proj - r[None, :]).max() <= 1e-9 * op.norm


@given(ginibre(n=st.integers(2, 4)), st.floats(0, 2 * np.pi))
def test_rotation_equivariance(c, phi):
    op = decompose(c)
    rot = decompose(np.exp(1j * phi) * c)
    th = np.linspace(0, 2 * np.pi, 37)
    for k in range(1, op.n):
        assert np.abs(support_wk(rot, k, th + phi) - support_wk(op, k, th)).max() <= 1e-10 * op.norm
        for t in th[::6]:
            a = np.array(touch_set(rot, k, t + phi))
            b = np.exp(1j * phi) * np.array(touch_set(op, k, t))
            assert np.abs(np.sort_complex(a) - np.sort_complex(b)).max() <= 1e-8 * op.norm


@given(ginibre(n=st.integers(2, 4)), st.complex_numbers(max_magnitude=5))
def test_translation_equivariance(c, mu):
    op = decompose(c)
    sh = decompose(c + mu * np.eye(op.n))
    b0 = trace_boundary(op, 1, grid=720)
    b1 = trace_boundary(sh, 1, grid=720)
    scale = op.norm + abs(mu)
    assert np.array_equal(b0.thetas, b1.thetas)
    assert np.abs(b1.touch - b0.touch - mu).max() <= 1e-8 * scale


def test_classify_examples():
    op = decompose(F.DIAG01I)
    for k in (1, 2):
        r = classify(trace_boundary(op, k), op)
        assert r.is_polygon and r.normal_flag and r.agreement
        assert all(r.corner_isolated)
    for c in (F.JORDAN2, F.EX24_C1):
        op = decompose(c)
        r = classify(trace_boundary(op, 1), op)
        assert not r.is_polygon and not r.normal_flag


@given(normal_matrices(n=st.integers(2, 5)))
def test_corners_are_reducing_eigenvalues(c):
    op = decompose(c)
    b = trace_boundary(op, 1)
    assert b.corners
    for corner in b.corners:
        assert is_reducing_eigenvalue(op, corner.point, 1e-7)


def test_complement_identity_examples():
    assert complement_identity_check(decompose(np.zeros((3, 3))), 1) == 0
    assert complement_identity_check(decompose(np.diag([1, 1j, 0])), 1) <= 1e-10
    with pytest.raises(ArgumentError):
        complement_identity_check(decompose(F.EX21), 2)


@given(ginibre(n=st.just(5)))
def test_complement_identity_random(c):
    op = decompose(c)
    assert complement_identity_check(op, 2, grid=720) <= 1e-9 * op.norm


def test_selfadjoint_interval():
    assert selfadjoint_interval(np.diag([3.0, 2, 1]), 2) == pytest.approx((1.5, 2.5))
    assert selfadjoint_interval(np.eye(4), 3) == pytest.approx((1, 1))
    assert selfadjoint_interval(np.diag([1.0, 0]), 1) == pytest.approx((0, 1))
    with pytest.raises(ArgumentError):
        selfadjoint_interval(np.eye(2), 3)


@given(hermitian_k=st.integers(1, 3))
def test_selfadjoint_interval_is_the_range(hermitian_k):
    a = np.diag([4.0, 1.0, -2.0, 0.5])
    lo, hi = selfadjoint_interval(a, hermitian_k)
    op = decompose(a)
    assert support_wk(op, hermitian_k, 0.0) == pytest.approx(hi)
    assert -support_wk(op, hermitian_k, np.pi) == pytest.approx(lo)


@given(ginibre(n=st.integers(2, 4)))
def test_analyticity_proxy(c):
    op = decompose(c)
    for k in range(1, op.n):
        assert analyticity_residual(op, k) <= 1e-6


def test_analyticity_detects_a_kink():
    # r_theta of diag(0, 1, i) has kinks at the critical angles; without
    # excluding them the local fits must fail
    op = decompose(F.DIAG01I)
    assert analyticity_residual(op, 1, critical=[]) > 1e-4
    assert analyticity_residual(op, 1) <= 1e-9
