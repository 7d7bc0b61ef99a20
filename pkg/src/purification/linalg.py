"""Dense complex linear algebra for small (dim <= 8) operators.

Matrices and vectors are plain ``numpy`` arrays of dtype ``complex128``.
The two non-trivial pieces are the unitary propagator of a Hermitian
generator and a biorthogonal eigendecomposition of a non-normal matrix,
i.e. right eigenvectors ``|u_n)`` together with left eigenvectors ``(v_n|``
normalized so that ``(v_n|u_m) = delta_nm``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .constants import TOL, Tolerances
from .errors import DefectiveMatrix, DimensionMismatch, NonHermitianInput

MAX_DIM = 8


def as_matrix(m, hermitian: bool = False, tol: Tolerances = TOL) -> np.ndarray:
    """Coerce ``m`` to a square complex matrix, optionally checking M = M^dagger."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    if hermitian and np.max(np.abs(a - a.conj().T)) > tol.hermitian_construct:
        raise NonHermitianInput("matrix is not Hermitian")
    return a


def as_vector(v, state: bool = False, tol: Tolerances = TOL) -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if a.size == 0 or not np.all(np.isfinite(a)):
        raise DimensionMismatch("vector must be non-empty and finite")
    if state and abs(np.linalg.norm(a) - 1.0) > tol.unit_norm:
        raise ValueError(f"state vector must have unit norm, got {np.linalg.norm(a)!r}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def herm_expm(h, t: float, tol: Tolerances = TOL) -> np.ndarray:
    """Return ``exp(-i h t)`` for a Hermitian generator ``h``.

    Computed from the spectral decomposition of ``h`` so the result is
    unitary to machine precision.
    """
    a = np.asarray(h, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    if np.max(np.abs(a - a.conj().T), initial=0.0) > tol.hermitian_input:
        raise NonHermitianInput("generator of herm_expm must be Hermitian")
    energies, vecs = np.linalg.eigh(0.5 * (a + a.conj().T))
    return (vecs * np.exp(-1j * energies * t)) @ vecs.conj().T


def mat_power_apply(m, n: int, rho) -> np.ndarray:
    """Return ``m^n rho (m^dagger)^n`` without normalization."""
    m = as_matrix(m)
    rho = as_matrix(rho)
    if m.shape != rho.shape:
        raise DimensionMismatch(f"operator {m.shape} and state {rho.shape} disagree")
    if n < 0:
        raise ValueError("n must be non-negative")
    out = rho.copy()
    md = dagger(m)
    for _ in range(n):
        out = m @ out @ md
    return out


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues with paired right/left eigenvectors.

    ``right[:, n]`` is the ket ``|u_n)`` (unit Euclidean norm) and
    ``left[n, :]`` is the bra ``(v_n|`` as a row vector, so that
    ``left @ right`` is the identity.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.eigenvalues)

    def u(self, n: int) -> np.ndarray:
        return self.right[:, n]

    def v(self, n: int) -> np.ndarray:
        """Row vector of the bra ``(v_n|``."""
        return self.left[n, :]

    def reconstruct(self) -> np.ndarray:
        return (self.right * self.eigenvalues) @ self.left

    def completeness_error(self) -> float:
        return float(np.max(np.abs(self.right @ self.left - np.eye(self.dim))))

    def biorthonormality_error(self) -> float:
        return float(np.max(np.abs(self.left @ self.right - np.eye(self.dim))))

    def sorted(self, tol: Tolerances = TOL) -> "SpectralDecomposition":
        order = sort_order(self.eigenvalues, tol)
        return SpectralDecomposition(
            self.eigenvalues[order], self.right[:, order], self.left[order, :]
        )


def sort_order(eigenvalues, tol: Tolerances = TOL) -> list[int]:
    """Indices ordering eigenvalues by descending magnitude.

    Magnitudes within ``tol.degeneracy`` count as equal and are then ordered
    by descending real part, then descending imaginary part.
    """
    lam = np.asarray(eigenvalues, dtype=complex)

    def cmp(i, j):
        a, b = lam[i], lam[j]
        if abs(abs(a) - abs(b)) >= tol.degeneracy:
            return -1 if abs(a) > abs(b) else 1
        for x, y in ((a.real, b.real), (a.imag, b.imag)):
            if x != y:
                return -1 if x > y else 1
        return 0

    return sorted(range(len(lam)), key=functools.cmp_to_key(cmp))


def _eig2(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigenpairs of a 2x2 matrix."""
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    half_tr = 0.5 * (a + d)
    s = np.sqrt(0.25 * (a - d) ** 2 + b * c + 0j)
    lams = np.array([half_tr + s, half_tr - s])
    scale = max(np.max(np.abs(m)), 1.0)
    vecs = np.empty((2, 2), dtype=complex)
    for k, lam in enumerate(lams):
        # null vector of (m - lam) taken orthogonal to its larger row
        r1 = np.array([a - lam, b])
        r2 = np.array([c, d - lam])
        if max(np.linalg.norm(r1), np.linalg.norm(r2)) < 1e-14 * scale:
            vec = np.eye(2, dtype=complex)[k]
        elif np.linalg.norm(r1) >= np.linalg.norm(r2):
            vec = np.array([b, lam - a])
        else:
            vec = np.array([lam - d, c])
        vecs[:, k] = vec
    return lams, vecs


def eig_biorthogonal(m, tol: Tolerances = TOL) -> SpectralDecomposition:
    """Biorthogonal eigendecomposition of a (generally non-normal) matrix.

    Right eigenvectors are normalized to unit length; the left eigenvectors
    are the rows of the inverse of the right-eigenvector matrix, which makes
    ``(v_n|u_m) = delta_nm`` hold by construction, including inside
    degenerate eigenspaces. Eigenpairs come sorted by descending ``|lambda|``.

    Raises
    ------
    DefectiveMatrix
        If the right eigenvectors do not span the space (condition number of
        the eigenvector matrix above ``tol.defective_condition``).
    """
    m = as_matrix(m)
    dim = m.shape[0]
    if dim > MAX_DIM:
        raise DimensionMismatch(f"dimension {dim} exceeds the supported maximum {MAX_DIM}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if dim == 2:
        lams, right = _eig2(m)
    else:
        lams, right = np.linalg.eig(m)
    right = right / np.linalg.norm(right, axis=0)
    cond = np.linalg.cond(right)
    if not np.isfinite(cond) or cond > tol.defective_condition:
        raise DefectiveMatrix(f"eigenvector matrix is singular (condition number {cond:.3g})")
    left = np.linalg.inv(right)
    return SpectralDecomposition(np.asarray(lams, dtype=complex), right, left).sorted(tol)
