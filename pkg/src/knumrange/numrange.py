"""Support functions and boundary tracing for the k-numerical range W_k(c).

W_k(c) is the set of averages (1/k) sum <c x_i, x_i> over orthonormal
k-tuples.  Its support function in direction theta is the mean of the k
largest eigenvalues of ``b_theta = Re(exp(-i theta) c)``, and the boundary
point where that tangent line touches is read off the eigenvectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import ArgumentError
from .linalg import Operator, eigh_batch, eigvalsh_batch, hermitian_eig, is_normal
from .pencil import TWO_PI, critical_angles

DEGENERATE_RTOL = 1e-9
STATIONARY_RTOL = 1e-7


def _check_k(op: Operator, k: int, lo: int = 1) -> None:
    if not lo <= k <= op.n:
        raise ArgumentError(f"k must lie in {lo}..{op.n}, got {k}")


def support_wk(op: Operator, k: int, theta):
    """Support function r_theta of W_k(c); scalar or array like ``theta``."""
    _check_k(op, k)
    theta = np.asarray(theta, dtype=float)
    w = eigvalsh_batch(op.pencil(theta.reshape(-1)))
    r = w[:, :k].sum(axis=1) / k
    return float(r[0]) if theta.ndim == 0 else r.reshape(theta.shape)


def _gap_tol(w_row: np.ndarray, rtol: float) -> float:
    return rtol * (1.0 + float(np.max(np.abs(w_row))))


def _segment_endpoints(op: Operator, k: int, theta: float, w, v, diag, tol):
    """Limits of the touch point from theta- and theta+ when the k-th gap closes."""
    n = op.n
    a = k - 1
    while a > 0 and w[a - 1] - w[a] <= tol:
        a -= 1
    b = k
    while b + 1 < n and w[b] - w[b + 1] <= tol:
        b += 1
    e = v[:, a: b + 1]
    j = k - a
    # derivative of b_theta; its compression orders the tied eigenspace
    h = np.cos(theta) * op.b2 - np.sin(theta) * op.b1
    comp = e.conj().T @ h @ e
    u = hermitian_eig((comp + comp.conj().T) / 2, check=False).vectors
    base = diag[:a].sum()
    ends = []
    for cols in (u[:, -j:], u[:, :j]):
        x = e @ cols
        ends.append((base + np.trace(x.conj().T @ op.c @ x)) / k)
    return ends[0], ends[1]


def _touch_batch(op: Operator, k: int, thetas: np.ndarray, rtol: float = DEGENERATE_RTOL,
                 merge: float = 0.0):
    """Support values and one or two touch points per angle."""
    w, v = eigh_batch(op.pencil(thetas))
    cv = op.c @ v
    diag = np.einsum("mij,mij->mj", v.conj(), cv)
    support = w[:, :k].sum(axis=1) / k
    touch = np.empty((thetas.size, 2), dtype=complex)
    touch[:, 0] = diag[:, :k].sum(axis=1) / k
    touch[:, 1] = touch[:, 0]
    ntouch = np.ones(thetas.size, dtype=int)
    if k < op.n:
        tols = rtol * (1.0 + np.max(np.abs(w), axis=1))
        for i in np.nonzero(w[:, k - 1] - w[:, k] <= tols)[0]:
            p1, p2 = _segment_endpoints(op, k, thetas[i], w[i], v[i], diag[i], tols[i])
            touch[i] = (p1, p2)
            ntouch[i] = 2 if abs(p1 - p2) > merge else 1
            if ntouch[i] == 1:
                touch[i] = (p1 + p2) / 2
    return support, touch, ntouch


def touch_set(op: Operator, k: int, theta: float, tol: float | None = None) -> tuple:
    """Points where the tangent line at angle theta meets W_k(c).

    One point when the k-th eigenvalue gap of b_theta exceeds tol, otherwise
    the two endpoints of the boundary segment, ordered as the limits from
    theta- and theta+.
    """
    _check_k(op, k)
    if tol is not None and tol <= 0:
        raise ArgumentError("tol must be positive")
    theta = float(theta)
    w, v = eigh_batch(op.pencil(np.array([theta])))
    w, v = w[0], v[0]
    diag = np.einsum("ij,ij->j", v.conj(), op.c @ v)
    if tol is None:
        tol = _gap_tol(w, DEGENERATE_RTOL)
    if k == op.n or w[k - 1] - w[k] > tol:
        return (complex(diag[:k].sum() / k),)
    p1, p2 = _segment_endpoints(op, k, theta, w, v, diag, tol)
    return complex(p1), complex(p2)


def tangent_intersection(op: Operator, k: int, theta: float, phi: float) -> complex:
    """Intersection of the supporting lines of W_k at angles theta and phi."""
    r_t, r_p = support_wk(op, k, np.array([theta, phi]))
    d = np.sin(theta - phi)
    x = (r_p * np.sin(theta) - r_t * np.sin(phi)) / d
    y = (r_t * np.cos(phi) - r_p * np.cos(theta)) / d
    return complex(x, y)


def touch_fd_check(op: Operator, k: int, theta: float, h: float = 1e-5) -> float:
    """Distance between touch_set and one-sided tangent-line intersections."""
    pts = touch_set(op, k, theta)
    lo = tangent_intersection(op, k, theta, theta - h)
    hi = tangent_intersection(op, k, theta, theta + h)
    return max(abs(pts[0] - lo), abs(pts[-1] - hi))


# ---------------------------------------------------------------------------
# boundary tracing


@dataclass(frozen=True)
class Segment:
    p1: complex
    p2: complex
    theta: float


@dataclass(frozen=True)
class Corner:
    point: complex
    theta_lo: float
    theta_hi: float


@dataclass(frozen=True)
class RangeBoundary:
    """Sampled boundary of W_k(c) with its flat pieces and corners.

    ``touch[i]`` holds the one or two touch points at ``thetas[i]``
    (``n_touch[i]`` of them; for one point both columns are equal).
    ``edge_linked``/``edge_jump`` describe consecutive boundary points in
    angle order: whether they coincide and how far apart they are.
    """

    k: int
    n: int
    kind: str
    center: complex
    scale: float
    thetas: np.ndarray
    support: np.ndarray
    touch: np.ndarray
    n_touch: np.ndarray
    segments: list
    corners: list
    arcs: list
    critical: np.ndarray
    edge_linked: np.ndarray = field(repr=False)
    edge_jump: np.ndarray = field(repr=False)
    edge_break: np.ndarray = field(repr=False)

    def points(self) -> np.ndarray:
        """All distinct sampled touch points in angle order."""
        out = []
        for row, m in zip(self.touch, self.n_touch):
            out.extend(row[:m])
        return np.array(out)


def _merge_angles(grid: np.ndarray, extra: np.ndarray, eps: float = 1e-10) -> np.ndarray:
    if extra.size == 0:
        return grid
    # drop grid points that sit on top of an inserted angle
    d = np.abs((grid[:, None] - extra[None, :] + np.pi) % TWO_PI - np.pi)
    keep = grid[np.all(d > eps, axis=1)]
    return np.sort(np.concatenate([keep, extra]))


def _dedupe_segments(segs: list, eps: float) -> list:
    out = []
    for s in segs:
        dup = False
        for t in out:
            same = abs(s.p1 - t.p1) <= eps and abs(s.p2 - t.p2) <= eps
            swap = abs(s.p1 - t.p2) <= eps and abs(s.p2 - t.p1) <= eps
            if same or swap:
                dup = True
                break
        if not dup:
            out.append(s)
    return out


def _in_interval(x: float, lo: float, hi: float) -> bool:
    return (x - lo) % TWO_PI <= (hi - lo) + 1e-12


def trace_boundary(op: Operator, k: int, grid: int = 3600, tol: float | None = None,
                   critical=None) -> RangeBoundary:
    """Trace the boundary of W_k(c) over a uniform angle grid plus critical angles.

    ``tol`` is the relative tolerance for a degenerate k-th eigenvalue gap
    (default 1e-9, applied as ``tol * (1 + |b_theta|)``).  ``critical`` may
    pass precomputed critical angles to avoid recomputing them per k.
    """
    _check_k(op, k)
    if grid < 360:
        raise ArgumentError("grid must be at least 360")
    rtol = DEGENERATE_RTOL if tol is None else tol
    if rtol <= 0:
        raise ArgumentError("tol must be positive")
    tau = op.tau
    op0 = op.shifted(tau)
    scale = op.norm or 1.0
    stat = STATIONARY_RTOL * scale

    base = np.arange(grid) * (TWO_PI / grid)
    if critical is None:
        if np.any(op0.b1) or np.any(op0.b2):
            critical = critical_angles(op0, grid=grid, cross_check=False).angles
        else:
            critical = np.zeros(0)
    critical = np.asarray(critical, dtype=float)
    thetas = _merge_angles(base, np.mod(critical, TWO_PI))
    support, touch, ntouch = _touch_batch(op0, k, thetas, rtol, merge=stat)
    support = support + np.real(np.exp(-1j * thetas) * tau)
    touch = touch + tau

    # boundary nodes in angle order; a segment contributes both endpoints
    node_pt, node_th, node_seg_in, node_seg_out = [], [], [], []
    for th, row, m in zip(thetas, touch, ntouch):
        if m == 2:
            node_pt += [row[0], row[1]]
            node_th += [th, th]
            node_seg_in += [True, False]
            node_seg_out += [False, True]
        else:
            node_pt.append(row[0])
            node_th.append(th)
            node_seg_in.append(False)
            node_seg_out.append(False)
    node_pt = np.array(node_pt)
    node_th = np.array(node_th)
    node_seg_in = np.array(node_seg_in)
    node_seg_out = np.array(node_seg_out)
    nxt = np.roll(np.arange(node_pt.size), -1)
    jump = np.abs(node_pt[nxt] - node_pt)
    brk = node_seg_in  # edge from P- to P+ inside one segment sample
    linked = (jump <= stat) & ~brk

    segments = [Segment(complex(r[0]), complex(r[1]), float(t))
                for t, r, m in zip(thetas, touch, ntouch) if m == 2]
    segments = _dedupe_segments(segments, stat)

    corners = []
    if linked.all():
        corners.append(Corner(complex(node_pt.mean()), 0.0, TWO_PI))
    else:
        # runs of linked edges; rotate so index 0 starts after an unlinked edge
        start = int(np.nonzero(~linked)[0][0]) + 1
        order = np.roll(np.arange(node_pt.size), -start)
        run = [order[0]]
        for i in order:
            if linked[i]:
                run.append(nxt[i])
                continue
            first, last = run[0], run[-1]
            bounded = node_seg_out[first] and node_seg_in[last] and len(run) >= 2
            if len(run) >= 3 or bounded:
                lo = float(node_th[first])
                hi = lo + float((node_th[last] - lo) % TWO_PI)
                corners.append(Corner(complex(node_pt[run].mean()), lo, hi))
            run = [nxt[i]]
        corners.sort(key=lambda c: c.theta_lo)

    kind = _kind(touch, ntouch, scale)
    arcs = []
    if kind == "region":
        marks = [s.theta for s in segments] + list(np.mod(critical, TWO_PI))
        marks += [c.theta_lo for c in corners] + [c.theta_hi % TWO_PI for c in corners]
        marks = np.unique(np.round(np.mod(marks, TWO_PI), 12))
        if marks.size == 0:
            arcs = [(0.0, TWO_PI)]
        else:
            ends = np.r_[marks[1:], marks[0] + TWO_PI]
            for a, b in zip(marks, ends):
                mid = (a + b) / 2
                if b - a <= 1e-12:
                    continue
                if any(_in_interval(mid, c.theta_lo, c.theta_hi) for c in corners):
                    continue
                arcs.append((float(a), float(b)))

    return RangeBoundary(k=k, n=op.n, kind=kind, center=tau, scale=scale,
                         thetas=thetas, support=support, touch=touch, n_touch=ntouch,
                         segments=segments, corners=corners, arcs=arcs,
                         critical=np.sort(np.mod(critical, TWO_PI)),
                         edge_linked=linked, edge_jump=jump, edge_break=brk)


def _kind(touch: np.ndarray, ntouch: np.ndarray, scale: float) -> str:
    pts = np.concatenate([touch[:, 0], touch[ntouch == 2, 1]])
    xy = np.column_stack([pts.real, pts.imag])
    xy = xy - xy.mean(axis=0)
    sv = np.linalg.svd(xy, compute_uv=False)
    flat = 1e-9 * scale * np.sqrt(len(pts))
    if sv[0] <= flat:
        return "point"
    if sv[1] <= flat:
        return "segment"
    return "region"


@dataclass(frozen=True)
class RangeReport:
    is_polygon: bool
    corners: list
    corner_isolated: list
    normal_flag: bool
    agreement: bool
    segment_count: int


def classify(boundary: RangeBoundary, op: Operator) -> RangeReport:
    """Polygon test, corner isolation, and the independent normality oracle."""
    normal = is_normal(op.c, rtol=1e-10)
    stat = STATIONARY_RTOL * boundary.scale
    if boundary.kind in ("point", "segment"):
        polygon = True
    else:
        edges = ~boundary.edge_break
        polygon = bool(np.all(boundary.edge_linked[edges])
                       and 1 <= len(boundary.segments) <= comb(boundary.n, boundary.k))

    pts = boundary.points()
    arc_edges = ~boundary.edge_linked & ~boundary.edge_break
    step = float(boundary.edge_jump[arc_edges].max()) if arc_edges.any() else 0.0
    radius = max(2.0 * step, stat)
    isolated = []
    for c in boundary.corners:
        d = np.abs(pts - c.point)
        others = d[d > stat]
        isolated.append(bool(others.size == 0 or others.min() > radius))

    return RangeReport(is_polygon=polygon, corners=[c.point for c in boundary.corners],
                       corner_isolated=isolated, normal_flag=normal,
                       agreement=polygon == normal, segment_count=len(boundary.segments))


def complement_identity_check(op: Operator, k: int, grid: int = 3600) -> float:
    """Max deviation of k r_k(theta) - Re(e^{-i theta} n tau) - (n-k) r_{n-k}(theta+pi)."""
    if not 1 <= k <= op.n - 1:
        raise ArgumentError(f"k must lie in 1..{op.n - 1}, got {k}")
    n = op.n
    theta = np.arange(grid) * (TWO_PI / grid)
    w = eigvalsh_batch(op.pencil(theta))
    w_opp = eigvalsh_batch(op.pencil(theta + np.pi))
    lhs = w[:, :k].sum(axis=1)
    mid = np.real(np.exp(-1j * theta) * n * op.tau)
    rhs = w_opp[:, : n - k].sum(axis=1)
    return float(np.max(np.abs(lhs - mid - rhs)))


def selfadjoint_interval(a, k: int) -> tuple:
    """W_k of a Hermitian matrix: means of the k smallest and k largest eigenvalues."""
    vals = hermitian_eig(a).values
    if not 1 <= k <= vals.size:
        raise ArgumentError(f"k must lie in 1..{vals.size}, got {k}")
    return float(vals[-k:].mean()), float(vals[:k].mean())


def analyticity_residual(op: Operator, k: int, grid: int = 3600, window: int = 17,
                         degree: int = 8, critical=None) -> float:
    """Worst misfit of r_theta against local polynomial fits away from critical angles.

    Sliding windows of ``window`` uniform samples that contain no critical
    angle are fitted by a degree-``degree`` polynomial; the maximum residual
    is returned relative to the operator norm.
    """
    _check_k(op, k)
    if critical is None:
        critical = critical_angles(op, grid=grid, cross_check=False).angles
    critical = np.mod(np.asarray(critical, dtype=float), TWO_PI)
    h = TWO_PI / grid
    theta = np.arange(grid) * h
    r = support_wk(op, k, theta)
    x = np.linspace(-1.0, 1.0, window)
    vand = np.polynomial.legendre.legvander(x, degree)
    proj = vand @ np.linalg.pinv(vand)
    starts = np.arange(grid)
    idx = (starts[:, None] + np.arange(window)) % grid
    ok = np.ones(grid, dtype=bool)
    span = (window - 1) * h
    for c in critical:
        # window [t0, t0 + span] must avoid c, with half a step of margin
        off = (c - theta + h / 2) % TWO_PI
        ok &= off > span + h
    if not ok.any():
        return 0.0
    seg = r[idx[ok]]
    resid = seg - seg @ proj.T
    scale = op.norm or 1.0
    return float(np.max(np.abs(resid)) / scale)
