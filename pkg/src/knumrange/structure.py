"""Reducing subspaces of the pair {b1, b2} and reducing eigenvalues of c."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, IndeterminateError
from .linalg import Operator, as_square, hermitian_eig, opnorm


def _commutant(mats, n: int, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (k, n, n) of matrices commuting with every entry of mats."""
    eye = np.eye(n)
    blocks = [np.kron(m.T, eye) - np.kron(eye, m) for m in mats]
    system = np.vstack(blocks)
    scale = max((np.abs(m).max() for m in mats), default=0.0)
    if scale == 0.0:
        basis = np.eye(n * n, dtype=complex)
    else:
        _, sv, vh = np.linalg.svd(system)
        sv = np.r_[sv, np.zeros(n * n - sv.size)]
        basis = vh[sv <= rtol * max(sv[0], scale)].conj()
    # vec is column-major
    return np.array([b.reshape(n, n, order="F") for b in basis])


def commutant_basis(op: Operator) -> np.ndarray:
    """Frobenius-orthonormal basis of {X : X b1 = b1 X, X b2 = b2 X}."""
    return _commutant([op.b1, op.b2], op.n)


@dataclass(frozen=True)
class ReducingStructure:
    projections: list
    bases: list
    block_dims: list
    reducing_eigenvalues: list  # (lambda, multiplicity)
    commutant_dim: int


def _split(op: Operator, q: np.ndarray, rng) -> list:
    """Recursively split range(q) into minimal reducing subspaces."""
    m = q.shape[1]
    if m == 1:
        return [q]
    b1 = q.conj().T @ op.b1 @ q
    b2 = q.conj().T @ op.b2 @ q
    basis = _commutant([b1, b2], m)
    if len(basis) <= 1:
        return [q]
    coef = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    x = np.tensordot(coef, basis, axes=1)
    h = (x + x.conj().T) / 2
    eig = hermitian_eig(h, check=False)
    w, v = eig.values, eig.vectors
    gap = 1e-6 * max(float(np.abs(w).max()), 1e-300)
    cuts = np.nonzero(w[:-1] - w[1:] > gap)[0] + 1
    if cuts.size == 0:
        return [q]
    out = []
    for part in np.split(np.arange(m), cuts):
        out.extend(_split(op, q @ v[:, part], rng))
    return out


def _verify(op: Operator, bases: list, tol: float) -> bool:
    n = op.n
    total = np.zeros((n, n), dtype=complex)
    n1 = max(np.abs(op.b1).max(), 1e-300)
    n2 = max(np.abs(op.b2).max(), 1e-300)
    for q in bases:
        p = q @ q.conj().T
        if np.abs(p @ p - p).max() > tol or np.abs(p - p.conj().T).max() > tol:
            return False
        if opnorm(p @ op.b1 - op.b1 @ p) > tol * n1 or opnorm(p @ op.b2 - op.b2 @ p) > tol * n2:
            return False
        total += p
    return bool(np.abs(total - np.eye(n)).max() <= tol)


def reducing_subspaces(op: Operator, tol: float = 1e-9, seed: int = 0) -> ReducingStructure:
    """Minimal reducing projections of {b1, b2}, with the scalar blocks of c."""
    bases = None
    for attempt in range(3):
        rng = np.random.default_rng(seed + attempt)
        cand = _split(op, np.eye(op.n, dtype=complex), rng)
        if _verify(op, cand, tol):
            bases = cand
            break
    if bases is None:
        raise IndeterminateError("reducing decomposition failed verification after 3 seeds")

    # order blocks by their first significant coordinate for stable output
    def key(q):
        mass = np.sum(np.abs(q) ** 2, axis=1)
        return int(np.argmax(mass > 1e-6))

    bases.sort(key=key)
    cnorm = max(op.norm, 1e-300)
    eigs = []
    for q in bases:
        comp = q.conj().T @ op.c @ q
        gamma = complex(np.trace(comp) / comp.shape[0])
        if opnorm(comp - gamma * np.eye(comp.shape[0])) > 1e-8 * cnorm:
            continue
        for i, (lam, mult) in enumerate(eigs):
            if abs(lam - gamma) <= 1e-8 * cnorm:
                eigs[i] = (lam, mult + comp.shape[0])
                break
        else:
            eigs.append((gamma, comp.shape[0]))
    return ReducingStructure(projections=[q @ q.conj().T for q in bases], bases=bases,
                             block_dims=[q.shape[1] for q in bases],
                             reducing_eigenvalues=eigs,
                             commutant_dim=len(commutant_basis(op)))


def is_reducing_eigenvalue(op: Operator, lam: complex, tol: float = 1e-8) -> bool:
    """True when some unit x has c x = lam x and c* x = conj(lam) x."""
    n = op.n
    eye = np.eye(n)
    stacked = np.vstack([op.c - lam * eye, op.c.conj().T - np.conj(lam) * eye])
    smin = np.linalg.svd(stacked, compute_uv=False)[-1]
    return bool(smin <= tol * max(op.norm, 1e-300))


def complex_slope(op: Operator, z_minus, z_plus, tol: float = 1e-9) -> complex:
    """tau(c (z+ - z-)) / tau(z+ - z-) for projections z- <= z+."""
    z_minus = as_square(z_minus, "z_minus")
    z_plus = as_square(z_plus, "z_plus")
    if z_minus.shape != (op.n, op.n) or z_plus.shape != (op.n, op.n):
        raise ArgumentError("projections must match the operator dimension")
    if np.abs(z_plus @ z_minus - z_minus).max() > tol:
        raise ArgumentError("z_minus is not contained in z_plus")
    d = z_plus - z_minus
    tr = np.trace(d).real
    if abs(tr) <= tol:
        raise ZeroDivisionError("z_plus equals z_minus")
    return complex(np.trace(op.c @ d) / tr)


def block_form(op: Operator, structure: ReducingStructure) -> np.ndarray:
    """c written in the orthonormal basis adapted to the reducing blocks."""
    u = np.hstack(structure.bases)
    return u.conj().T @ op.c @ u


def off_block_norm(op: Operator, structure: ReducingStructure) -> float:
    m = block_form(op, structure)
    mask = np.ones(m.shape, dtype=bool)
    pos = 0
    for d in structure.block_dims:
        mask[pos: pos + d, pos: pos + d] = False
        pos += d
    return float(np.abs(m[mask]).max()) if mask.any() else 0.0

