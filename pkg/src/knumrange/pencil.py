"""The bivariate characteristic polynomial of the pencil b1 + z b2.

``f(z, y) = det(b1 + z b2 - y 1)`` is built by interpolation from Hermitian
eigenvalues at real Chebyshev nodes.  Its y-discriminant (a polynomial in z)
and an approximate square-free reduction are used only to cross-check the
critical angles, which are located directly by scanning eigenvalue gaps of
``b_theta = cos(theta) b1 + sin(theta) b2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P

from .errors import ArgumentError, DegeneratePencilError, IndeterminateError
from .linalg import Operator, eigvalsh_batch, hermitian_norm

TWO_PI = 2.0 * np.pi


def chebyshev_nodes(count: int, radius: float = 1.0) -> np.ndarray:
    j = np.arange(count)
    return radius * np.cos((2 * j + 1) * np.pi / (2 * count))


@dataclass(frozen=True)
class BivariatePencilPoly:
    """Coefficients ``coeffs[j, k]`` of ``z**j * y**k``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ArgumentError("coefficient array must be square (n+1) x (n+1)")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def y_degree(self) -> int:
        nz = np.nonzero(np.any(self.coeffs != 0, axis=0))[0]
        return int(nz[-1]) if nz.size else -1

    @property
    def scale(self) -> float:
        return float(np.abs(self.coeffs).max())

    def y_coeffs(self, z) -> np.ndarray:
        """Ascending y-coefficients of f(z, .) for each z; shape ``(..., n+1)``."""
        z = np.asarray(z)
        powers = z[..., None] ** np.arange(self.n + 1)
        return powers @ self.coeffs

    def __call__(self, z, y):
        z = np.asarray(z)
        y = np.asarray(y)
        zp = z[..., None] ** np.arange(self.n + 1)
        yp = y[..., None] ** np.arange(self.n + 1)
        return np.einsum("...j,jk,...k->...", zp, self.coeffs, yp)


def char_poly_bivariate(op: Operator) -> BivariatePencilPoly:
    n = op.n
    radius = 1.0 + hermitian_norm(op.b2)
    nodes = chebyshev_nodes(n + 1, radius)
    w = eigvalsh_batch(op.b1[None] + nodes[:, None, None] * op.b2[None])
    sign = (-1.0) ** n
    # prod(lambda_i - y) = (-1)^n prod(y - lambda_i)
    ycoef = np.array([sign * np.poly(row)[::-1] for row in w])
    coeffs = np.zeros((n + 1, n + 1), dtype=np.complex128)
    for k in range(n):
        deg = n - k
        coeffs[: deg + 1, k] = P.polyfit(nodes, ycoef[:, k], deg)
    coeffs[0, n] = sign
    return BivariatePencilPoly(coeffs)


def sylvester(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Sylvester matrix of two polynomials given by ascending coefficients."""
    pd = np.asarray(p)[::-1]
    qd = np.asarray(q)[::-1]
    m, l = len(pd) - 1, len(qd) - 1
    s = np.zeros((m + l, m + l), dtype=np.result_type(pd, qd, float))
    for i in range(l):
        s[i, i: i + m + 1] = pd
    for i in range(m):
        s[l + i, i: i + l + 1] = qd
    return s


@dataclass(frozen=True)
class Discriminant:
    """y-discriminant of a bivariate polynomial, as a polynomial in z."""

    coeffs: np.ndarray
    vanishes: bool
    scale: float
    cheb: np.ndarray = field(repr=False)
    domain: tuple

    def __call__(self, z):
        return C.Chebyshev(self.cheb, domain=self.domain)(z)

    def roots(self) -> np.ndarray:
        if self.vanishes:
            raise IndeterminateError("discriminant vanishes identically")
        series = C.Chebyshev(self.cheb, domain=self.domain).trim(
            1e-10 * np.abs(self.cheb).max())
        if series.degree() < 1:
            return np.zeros(0, dtype=complex)
        return series.roots()


def _trim_small(a: np.ndarray, rtol: float) -> np.ndarray:
    a = np.asarray(a)
    big = np.abs(a).max() if a.size else 0.0
    if big == 0:
        return np.zeros(1, dtype=a.dtype)
    keep = np.nonzero(np.abs(a) > rtol * big)[0]
    return a[: keep[-1] + 1]


def discriminant_y(f: BivariatePencilPoly) -> Discriminant:
    dy = f.y_degree
    if dy < 1:
        raise ArgumentError("polynomial must have positive degree in y")
    n = f.n
    zdeg_lead = np.nonzero(f.coeffs[:, dy])[0].max()
    if zdeg_lead != 0:
        raise ArgumentError("leading y-coefficient must be constant in z")
    lc = f.coeffs[0, dy]
    deg = n * (n - 1) if dy == n else n * (2 * dy - 1)
    radius = 1.0 + np.abs(f.coeffs).max() ** (1.0 / max(n, 1))
    nodes = chebyshev_nodes(deg + 1, radius)
    sign = (-1.0) ** (dy * (dy - 1) // 2)
    values = np.empty(deg + 1, dtype=np.complex128)
    hadamard = 0.0
    for i, z0 in enumerate(nodes):
        p = f.y_coeffs(z0)[: dy + 1]
        s = sylvester(p, P.polyder(p))
        values[i] = sign * np.linalg.det(s) / lc
        hadamard = max(hadamard, float(np.prod(np.linalg.norm(s, axis=1))) / abs(lc))
    cheb = C.chebfit(nodes / radius, values, deg)
    if np.all(np.abs(cheb.imag) <= 1e-12 * max(np.abs(cheb).max(), 1e-300)):
        cheb = cheb.real
    vanishes = bool(np.abs(cheb).max() <= 1e-8 * hadamard)
    mono = C.Chebyshev(cheb, domain=(-radius, radius)).convert(kind=np.polynomial.Polynomial).coef
    return Discriminant(coeffs=_trim_small(mono, 1e-10), vanishes=vanishes,
                        scale=hadamard, cheb=cheb, domain=(-radius, radius))


def _convolution(p: np.ndarray, cols: int) -> np.ndarray:
    """Matrix of x -> p * x for x with ``cols`` ascending coefficients."""
    rows = len(p) + cols - 1
    m = np.zeros((rows, cols), dtype=np.result_type(p, float))
    for j in range(cols):
        m[j: j + len(p), j] = p
    return m


def square_free_reduce(f: BivariatePencilPoly, tol: float = 1e-8) -> BivariatePencilPoly:
    """Divide f by an approximate gcd(f, df/dy).

    The gcd degree is the numerical rank deficiency of the Sylvester matrix
    of ``f(z0, .)`` and its derivative at interpolation nodes ``z0``; the
    cofactor is recovered from the null vector of ``p b - p' a = 0`` and
    re-interpolated in z.
    """
    dy = f.y_degree
    if dy < 1:
        raise ArgumentError("polynomial must have positive degree in y")
    n = f.n
    radius = 1.0 + np.abs(f.coeffs).max() ** (1.0 / max(n, 1))
    nodes = chebyshev_nodes(2 * (n + 1), radius)
    polys = [f.y_coeffs(z0)[: dy + 1] for z0 in nodes]
    ranks, ambiguous = [], []
    for p in polys:
        sv = np.linalg.svd(sylvester(p, P.polyder(p)), compute_uv=False)
        rel = sv / sv[0]
        ranks.append(int(np.sum(rel <= tol)))
        ambiguous.append(bool(np.any((rel > tol / 10) & (rel < tol * 10))))
    ranks = np.array(ranks)
    g = int(ranks.min())
    use = np.nonzero(ranks == g)[0]
    if any(ambiguous[i] for i in use):
        raise IndeterminateError("gcd rank decision is within a factor 10 of tol")
    if g == 0:
        return f
    d = dy - g
    if use.size < d + 1:
        raise IndeterminateError("too few generic interpolation nodes")
    cof = np.empty((use.size, d + 1), dtype=np.complex128)
    for row, i in enumerate(use):
        p = polys[i]
        dp = P.polyder(p)
        m = np.hstack([-_convolution(dp, d + 1), _convolution(p, d)])
        _, _, vh = np.linalg.svd(m)
        a = vh[-1].conj()[: d + 1]
        cof[row] = a * ((-1.0) ** d / a[d])
    coeffs = np.zeros((d + 1, d + 1), dtype=np.complex128)
    for k in range(d + 1):
        coeffs[: d - k + 1, k] = P.polyfit(nodes[use], cof[:, k], d - k)
    coeffs[0, d] = (-1.0) ** d
    coeffs[1:, d] = 0
    reduced = BivariatePencilPoly(coeffs)
    if d >= 2 and discriminant_y(reduced).vanishes:
        raise IndeterminateError("square-free reduction still has a repeated factor")
    return reduced


# ---------------------------------------------------------------------------
# critical angles


@dataclass(frozen=True)
class CriticalAngleSet:
    angles: np.ndarray
    multiplicity_profile: list
    generic_count: int
    tol: float
    confirmed: list

    def __len__(self):
        return len(self.angles)


def _relevant_gap(op: Operator, thetas: np.ndarray, d: int) -> np.ndarray:
    w = eigvalsh_batch(op.pencil(thetas))
    gaps = np.sort(w[:, :-1] - w[:, 1:], axis=1)
    return gaps[:, op.n - d]


def _group_runs(mask: np.ndarray, cyclic: bool) -> list:
    """Maximal runs of True as (start, stop) index pairs, inclusive."""
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return []
    if idx.size == mask.size:
        return [(0, mask.size - 1)]
    runs = []
    start = prev = idx[0]
    for i in idx[1:]:
        if i != prev + 1:
            runs.append((start, prev))
            start = i
        prev = i
    runs.append((start, prev))
    if cyclic and len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == mask.size - 1:
        first = runs.pop(0)
        last = runs.pop()
        runs.append((last[0], first[1] + mask.size))
    return runs


def _golden_min(op, brackets: np.ndarray, d: int, width: float = 1e-12):
    invphi = (np.sqrt(5.0) - 1) / 2
    a = brackets[:, 0].copy()
    b = brackets[:, 1].copy()
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1 = _relevant_gap(op, x1, d)
    f2 = _relevant_gap(op, x2, d)
    for _ in range(200):
        if np.max(b - a) <= width:
            break
        left = f1 <= f2
        a = np.where(left, a, x1)
        b = np.where(left, x2, b)
        xn = np.where(left, b - invphi * (b - a), a + invphi * (b - a))
        fn = _relevant_gap(op, xn, d)
        x1, x2 = np.where(left, xn, x2), np.where(left, x1, xn)
        f1, f2 = np.where(left, fn, f2), np.where(left, f1, fn)
    theta = (a + b) / 2
    return theta, _relevant_gap(op, theta, d)


def _refine(op: Operator, brackets: list, step: float, d: int, lip: float, tol: float) -> list:
    """Locate zeros of the relevant gap inside each bracket."""
    found = []
    while brackets:
        if step < 1e-7:
            arr = np.array(brackets)
            theta, val = _golden_min(op, arr, d)
            found.extend(t for t, v in zip(theta, val) if v <= tol)
            break
        sub = step / 32.0
        samples, owners = [], []
        for i, (a, b) in enumerate(brackets):
            cnt = int(np.ceil((b - a) / sub)) + 1
            samples.append(np.linspace(a, b, cnt))
            owners.append(cnt)
        gaps = _relevant_gap(op, np.concatenate(samples), d)
        nxt = []
        pos = 0
        for th, cnt in zip(samples, owners):
            g = gaps[pos: pos + cnt]
            pos += cnt
            h = th[1] - th[0]
            lo = np.r_[np.inf, g[:-1]]
            hi = np.r_[g[1:], np.inf]
            minima = np.nonzero((g <= lo) & (g <= hi) & (g <= 2.2 * lip * h + tol))[0]
            for i in minima:
                nxt.append((th[max(i - 1, 0)], th[min(i + 1, cnt - 1)]))
        brackets = nxt
        step = sub
    return found


def critical_angles(op: Operator, grid: int = 3600, tol: float | None = None,
                    cross_check: bool = True) -> CriticalAngleSet:
    """Angles in [0, 2pi) where the number of distinct eigenvalues of b_theta drops."""
    if grid < 360:
        raise ArgumentError("grid must be at least 360")
    if not (np.any(op.b1) or np.any(op.b2)):
        raise DegeneratePencilError("b1 = b2 = 0: every angle is critical")
    n = op.n
    h = TWO_PI / grid
    thetas = np.arange(grid) * h
    w = eigvalsh_batch(op.pencil(thetas))
    scale = float(np.max(np.abs(w)))
    if tol is None:
        tol = 1e-7 * scale
    if tol <= 0:
        raise ArgumentError("tol must be positive")
    lip = 1.05 * scale
    if n == 1:
        return CriticalAngleSet(np.zeros(0), [[(0, 1)]], 1, tol, [])
    gaps = w[:, :-1] - w[:, 1:]
    d = int(1 + np.max(np.sum(gaps > tol, axis=1)))
    if d == 1:
        return CriticalAngleSet(np.zeros(0), [[(0, n)]], 1, tol, [])
    m0 = np.sort(gaps, axis=1)[:, n - d]
    runs = _group_runs(m0 <= 1.1 * lip * h + tol, cyclic=True)
    brackets = [(thetas[0] + (s - 0.5) * h, thetas[0] + (e + 0.5) * h) for s, e in runs]
    found = np.mod(np.array(_refine(op, brackets, h, d, lip, tol)), TWO_PI)
    angles = _dedupe_angles(found, 1e-9)
    profile = _multiplicity_profile(op, angles, tol)
    confirmed = _confirm(op, angles) if cross_check else [None] * len(angles)
    return CriticalAngleSet(angles=angles, multiplicity_profile=profile,
                            generic_count=d, tol=tol, confirmed=confirmed)


def _dedupe_angles(angles: np.ndarray, eps: float) -> np.ndarray:
    if angles.size == 0:
        return np.zeros(0)
    angles = np.sort(angles)
    keep = [angles[0]]
    for a in angles[1:]:
        if a - keep[-1] > eps:
            keep.append(a)
    if len(keep) > 1 and keep[0] + TWO_PI - keep[-1] <= eps:
        keep.pop()
    return np.array(keep)


def cluster_sizes(values: np.ndarray, tol: float) -> list:
    """Multiplicities of a descending list, splitting at gaps larger than tol."""
    sizes = [1]
    for g in values[:-1] - values[1:]:
        if g > tol:
            sizes.append(1)
        else:
            sizes[-1] += 1
    return sizes


def _multiplicity_profile(op: Operator, angles: np.ndarray, tol: float) -> list:
    if angles.size == 0:
        mids = np.array([0.5])
    else:
        nxt = np.r_[angles[1:], angles[0] + TWO_PI]
        mids = (angles + nxt) / 2
    w = eigvalsh_batch(op.pencil(mids))
    return [list(enumerate(cluster_sizes(row, tol))) for row in w]


def _confirm(op: Operator, angles: np.ndarray) -> list:
    if angles.size == 0:
        return []
    try:
        reduced = square_free_reduce(char_poly_bivariate(op))
        if reduced.y_degree < 2:
            return [None] * len(angles)
        disc = discriminant_y(reduced)
        roots = disc.roots()
    except IndeterminateError:
        return [None] * len(angles)
    out = []
    for a in angles:
        ca = np.cos(a)
        if abs(ca) < 1e-6:
            out.append(None)
            continue
        z = np.tan(a)
        eps = 1e-5 * (1 + abs(z))
        dist = np.abs(roots - z)
        # a root of multiplicity m splits by ~eps**(1/m); its centroid does not
        near = roots[dist <= 1e-2 * (1 + abs(z))]
        ok = roots.size > 0 and (dist.min() <= eps or
                                 (near.size > 0 and abs(near.mean() - z) <= eps))
        out.append(bool(ok))
    return out
