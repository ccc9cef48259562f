"""Hot numeric kernels.

Every eigenvalue computation in the package funnels through
:func:`batch_eigh`, a cyclic Jacobi solver for stacks of small Hermitian
matrices.  Two implementations of the same rotation sequence exist:

* a numba ``@njit`` version that loops over the stack in compiled code;
* a pure-numpy version that applies each (p, q) rotation to the whole
  stack at once.

The numba path is used when numba imports and ``KNUMRANGE_DISABLE_NUMBA``
is unset (or ``0``).  Both paths return identical orderings and agree to
rounding error; ``benchmarks/bench_kernels.py`` compares their speed.
"""

from __future__ import annotations

import os

import numpy as np

MAX_SWEEPS = 60
DEFAULT_RTOL = 1e-13


def _env_disabled() -> bool:
    flag = os.environ.get("KNUMRANGE_DISABLE_NUMBA", "0").strip().lower()
    return flag not in ("", "0", "false", "no")


try:
    if _env_disabled():
        raise ImportError("numba disabled by KNUMRANGE_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag in CI
    HAVE_NUMBA = False


def _jacobi_numpy(stack: np.ndarray, want_vectors: bool, rtol: float):
    a = np.array(stack, dtype=np.complex128, copy=True)
    m, n, _ = a.shape
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), (m, n, n)).copy()
    if n == 1 or m == 0:
        return a[:, np.arange(n), np.arange(n)].real.copy(), v

    norm = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    thresh = (rtol * norm) ** 2
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(MAX_SWEEPS):
        off = np.sum(np.abs(a[:, offmask]) ** 2, axis=1)
        active = off > thresh
        if not active.any():
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                absq = np.abs(apq)
                live = active & (absq > 0.0)
                if not live.any():
                    continue
                safe = np.where(live, absq, 1.0)
                u = np.where(live, apq / safe, 1.0)
                app = a[:, p, p].real
                aqq = a[:, q, q].real
                theta = (aqq - app) / (2.0 * safe)
                sgn = np.where(theta >= 0.0, 1.0, -1.0)
                t = sgn / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(live, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cu = np.conj(u)
                # columns: A <- A V
                colp = a[:, :, p].copy()
                colq = a[:, :, q]
                a[:, :, p] = c[:, None] * colp - (s * cu)[:, None] * colq
                a[:, :, q] = s[:, None] * colp + (c * cu)[:, None] * colq
                # rows: A <- V^H A
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :]
                a[:, p, :] = c[:, None] * rowp - (s * u)[:, None] * rowq
                a[:, q, :] = s[:, None] * rowp + (c * u)[:, None] * rowq
                a[live, p, q] = 0.0
                a[live, q, p] = 0.0
                a[:, p, p] = a[:, p, p].real
                a[:, q, q] = a[:, q, q].real
                if want_vectors:
                    vp = v[:, :, p].copy()
                    vq = v[:, :, q]
                    v[:, :, p] = c[:, None] * vp - (s * cu)[:, None] * vq
                    v[:, :, q] = s[:, None] * vp + (c * cu)[:, None] * vq
    return a[:, np.arange(n), np.arange(n)].real.copy(), v


if HAVE_NUMBA:

    @njit(cache=True)
    def _jacobi_one(a, v, want_vectors, rtol):  # pragma: no cover - compiled
        n = a.shape[0]
        norm2 = 0.0
        for i in range(n):
            for j in range(n):
                norm2 += a[i, j].real ** 2 + a[i, j].imag ** 2
        thresh = rtol * rtol * norm2
        for _sweep in range(MAX_SWEEPS):
            off = 0.0
            for i in range(n):
                for j in range(n):
                    if i != j:
                        off += a[i, j].real ** 2 + a[i, j].imag ** 2
            if off <= thresh:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    absq = abs(apq)
                    if absq == 0.0:
                        continue
                    u = apq / absq
                    cu = u.conjugate()
                    theta = (a[q, q].real - a[p, p].real) / (2.0 * absq)
                    sgn = 1.0 if theta >= 0.0 else -1.0
                    t = sgn / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    c = 1.0 / np.sqrt(t * t + 1.0)
                    s = t * c
                    for i in range(n):
                        aip = a[i, p]
                        aiq = a[i, q]
                        a[i, p] = c * aip - s * cu * aiq
                        a[i, q] = s * aip + c * cu * aiq
                    for j in range(n):
                        apj = a[p, j]
                        aqj = a[q, j]
                        a[p, j] = c * apj - s * u * aqj
                        a[q, j] = s * apj + c * u * aqj
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    a[p, p] = a[p, p].real
                    a[q, q] = a[q, q].real
                    if want_vectors:
                        for i in range(n):
                            vip = v[i, p]
                            viq = v[i, q]
                            v[i, p] = c * vip - s * cu * viq
                            v[i, q] = s * vip + c * cu * viq

    @njit(cache=True)
    def _jacobi_batch_compiled(stack, want_vectors, rtol):  # pragma: no cover
        m, n, _ = stack.shape
        w = np.empty((m, n))
        vecs = np.zeros((m, n, n), dtype=np.complex128)
        a = np.empty((n, n), dtype=np.complex128)
        for k in range(m):
            for i in range(n):
                for j in range(n):
                    a[i, j] = stack[k, i, j]
                vecs[k, i, i] = 1.0
            _jacobi_one(a, vecs[k], want_vectors, rtol)
            for i in range(n):
                w[k, i] = a[i, i].real
        return w, vecs


def _jacobi_numba(stack: np.ndarray, want_vectors: bool, rtol: float):
    return _jacobi_batch_compiled(
        np.ascontiguousarray(stack, dtype=np.complex128), want_vectors, rtol
    )


def _sort_and_fix(w: np.ndarray, v: np.ndarray, want_vectors: bool):
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    if not want_vectors:
        return w, None
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    # phase fix: first component with |v_i| > 1e-8 made real positive
    big = np.abs(v) > 1e-8
    first = np.argmax(big, axis=1)
    lead = np.take_along_axis(v, first[:, None, :], axis=1)[:, 0, :]
    phase = np.where(np.abs(lead) > 0, np.conj(lead) / np.maximum(np.abs(lead), 1e-300), 1.0)
    v = v * phase[:, None, :]
    return w, v


def batch_eigh(stack, want_vectors: bool = True, rtol: float = DEFAULT_RTOL, backend: str | None = None):
    """Eigen-decompose a stack of Hermitian matrices.

    Returns ``(values, vectors)`` with values of shape ``(m, n)`` sorted in
    descending order and eigenvectors as the columns of ``vectors[k]``
    (``None`` when ``want_vectors`` is false).  ``backend`` forces
    ``"numba"`` or ``"numpy"``; by default the module-level choice is used.
    """
    stack = np.asarray(stack, dtype=np.complex128)
    if stack.ndim == 2:
        stack = stack[None]
    if backend is None:
        backend = "numba" if HAVE_NUMBA else "numpy"
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        w, v = _jacobi_numba(stack, want_vectors, rtol)
    elif backend == "numpy":
        w, v = _jacobi_numpy(stack, want_vectors, rtol)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return _sort_and_fix(w, v, want_vectors)


def active_backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def warmup() -> None:
    """Trigger JIT compilation so later timings exclude it."""
    if HAVE_NUMBA:
        batch_eigh(np.eye(2, dtype=complex)[None], want_vectors=True)
