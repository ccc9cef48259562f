"""Seeded matrix generators and sampling oracles.

Random rank-k projections give points of W_k(c) from the inside.  They never
certify the boundary; their job is to check that the traced outer polygon
contains everything it should.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .linalg import Operator, commutator_norm, decompose, opnorm
from .numrange import classify, trace_boundary

KINDS = ("ginibre", "hermitian", "normal", "unitary-conjugated-diagonal")


@dataclass(frozen=True)
class RandomSpec:
    n: int
    kind: str = "ginibre"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ArgumentError("n must be positive")
        if self.kind not in KINDS:
            raise ArgumentError(f"kind must be one of {KINDS}")


def _ginibre(rng, *shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng, n: int) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(rng, n, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_matrix(spec: RandomSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    if spec.kind == "ginibre":
        return _ginibre(rng, n, n)
    if spec.kind == "hermitian":
        g = _ginibre(rng, n, n)
        return (g + g.conj().T) / 2
    # "normal" is generated as a unitarily conjugated complex diagonal
    lam = _ginibre(rng, n)
    u = random_unitary(rng, n)
    return (u * lam) @ u.conj().T


def random_rank_k_projection(n: int, k: int, seed) -> np.ndarray:
    if not 0 <= k <= n:
        raise ArgumentError(f"k must lie in 0..{n}, got {k}")
    if k == 0:
        return np.zeros((n, n), dtype=complex)
    if k == n:
        return np.eye(n, dtype=complex)
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(_ginibre(rng, n, n))
    q = q[:, :k]
    return q @ q.conj().T


def sample_wk_cloud(op: Operator, k: int, count: int, seed) -> np.ndarray:
    """(n/k) tau(c p) for ``count`` independent random rank-k projections p."""
    if not 1 <= k <= op.n:
        raise ArgumentError(f"k must lie in 1..{op.n}, got {k}")
    if count < 1:
        raise ArgumentError("count must be positive")
    if k == op.n:
        return np.full(count, op.tau)
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(_ginibre(rng, count, op.n, k))
    return np.einsum("mik,ij,mjk->m", q.conj(), op.c, q) / k


def _matrix_json(c: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in c]


def scan_one(c, k: int | None = None, grid: int = 3600):
    """is_polygon and segment count of W_k(c), k defaulting to n/2."""
    op = decompose(c)
    k = op.n // 2 if k is None else k
    boundary = trace_boundary(op, k, grid=grid)
    report = classify(boundary, op)
    return report.is_polygon, report.segment_count


def conjecture_6_2_scan(n_even: int, trials: int, grid: int = 3600, seed: int = 0,
                        control: int = 0) -> dict:
    """Look for non-normal c whose middle range W_{n/2}(c) is a polygon.

    Each trial draws a Ginibre matrix from seed ``seed + i``; numerically
    normal draws are rejected.  ``control`` extra normal draws are traced as
    a sanity arm, where every range should come out a polygon.
    """
    if n_even < 2 or n_even % 2:
        raise ArgumentError("n must be even and at least 2")
    if trials < 1:
        raise ArgumentError("trials must be positive")
    start = time.perf_counter()
    k = n_even // 2
    found, rejected = [], 0
    for i in range(trials):
        s = seed + i
        c = random_matrix(RandomSpec(n_even, "ginibre", s))
        if commutator_norm(c) <= 1e-6 * opnorm(c) ** 2:
            rejected += 1
            continue
        polygon, segs = scan_one(c, k, grid)
        if polygon:
            found.append({"seed": s, "matrix": _matrix_json(c), "segment_count": segs})
    arm = []
    for i in range(control):
        s = seed + trials + i
        c = random_matrix(RandomSpec(n_even, "unitary-conjugated-diagonal", s))
        polygon, segs = scan_one(c, k, grid)
        arm.append({"seed": s, "is_polygon": polygon, "segment_count": segs})
    return {
        "n": n_even,
        "k": k,
        "trials": trials,
        "seed": seed,
        "grid": grid,
        "rejected_normal": rejected,
        "counterexamples": found,
        "control": arm,
        "summary": (f"{len(found)} counterexample candidates" if found
                    else f"no counterexample in {trials} trials"),
        "note": "random sampling is one-sided evidence, not a proof",
        "elapsed": time.perf_counter() - start,
    }
