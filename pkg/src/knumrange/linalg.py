"""Cartesian decomposition, Hermitian eigensystems and trace helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ArgumentError, DimensionError, InputError

HERMITIAN_RTOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def as_square(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True)
class Operator:
    """A complex n x n matrix together with its Hermitian parts.

    ``c == b1 + 1j * b2`` with ``b1 = (c + c*)/2`` and ``b2 = (c - c*)/(2i)``;
    ``tau`` is the normalized trace ``tr(c)/n``.
    """

    n: int
    c: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    tau: complex

    @property
    def norm(self) -> float:
        """Operator (spectral) norm of c."""
        return opnorm(self.c)

    def pencil(self, theta) -> np.ndarray:
        """b_theta = cos(theta) b1 + sin(theta) b2, stacked over ``theta``."""
        theta = np.asarray(theta, dtype=float)
        return (np.cos(theta)[..., None, None] * self.b1
                + np.sin(theta)[..., None, None] * self.b2)

    def shifted(self, mu: complex) -> "Operator":
        return decompose(self.c - mu * np.eye(self.n))


def decompose(c) -> Operator:
    c = as_square(c, "c")
    n = c.shape[0]
    cs = c.conj().T
    b1 = (c + cs) / 2
    b2 = (c - cs) / 2j
    # exact Hermitian symmetry; drops O(eps) asymmetry from the arithmetic
    b1 = (b1 + b1.conj().T) / 2
    b2 = (b2 + b2.conj().T) / 2
    return Operator(n=n, c=_frozen(c), b1=_frozen(b1), b2=_frozen(b2),
                    tau=complex(np.trace(c) / n))


@dataclass(frozen=True)
class EigSystem:
    values: np.ndarray
    vectors: np.ndarray


def hermitian_eig(a, check: bool = True) -> EigSystem:
    """Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix."""
    a = as_square(a, "a")
    if check:
        scale = np.abs(a).max()
        if np.abs(a - a.conj().T).max() > HERMITIAN_RTOL * max(scale, 1e-300) and scale > 0:
            raise InputError("matrix is not Hermitian within tolerance")
    a = (a + a.conj().T) / 2
    w, v = _kernels.batch_eigh(a[None], want_vectors=True)
    return EigSystem(values=_frozen(w[0]), vectors=_frozen(fix_phase(v[0])))


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Make the first non-negligible component of each column real positive."""
    v = np.array(v, dtype=np.complex128)
    mag = np.abs(v)
    first = np.argmax(mag > 1e-12 * mag.max(axis=0, initial=0.0), axis=0)
    lead = v[first, np.arange(v.shape[1])]
    ph = np.where(np.abs(lead) > 0, lead / np.where(lead == 0, 1, np.abs(lead)), 1)
    return v * ph.conj()


def eigvalsh_batch(stack) -> np.ndarray:
    """Descending eigenvalues for a stack of Hermitian matrices (no checks)."""
    w, _ = _kernels.batch_eigh(stack, want_vectors=False)
    return w


def eigh_batch(stack):
    return _kernels.batch_eigh(stack, want_vectors=True)


def normalized_trace(a) -> complex:
    a = as_square(a, "a")
    return complex(np.trace(a) / a.shape[0])


def top_k_sum(values, k: int) -> float:
    values = np.asarray(values, dtype=float)
    if not 1 <= k <= values.size:
        raise ArgumentError(f"k must lie in 1..{values.size}, got {k}")
    return float(np.sum(values[:k]))


def opnorm(a) -> float:
    """Spectral norm via the largest eigenvalue of a* a."""
    a = np.asarray(a, dtype=np.complex128)
    if not a.any():
        return 0.0
    w = eigvalsh_batch((a.conj().T @ a)[None])[0]
    return float(np.sqrt(max(w[0], 0.0)))


def hermitian_norm(a) -> float:
    """Largest absolute eigenvalue of a Hermitian matrix."""
    w = eigvalsh_batch(np.asarray(a)[None])[0]
    return float(max(abs(w[0]), abs(w[-1])))


def commutator_norm(c) -> float:
    c = np.asarray(c, dtype=np.complex128)
    cs = c.conj().T
    return opnorm(c @ cs - cs @ c)


def is_normal(c, rtol: float = 1e-10) -> bool:
    nrm = opnorm(c)
    return commutator_norm(c) <= rtol * nrm * nrm
