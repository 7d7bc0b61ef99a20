"""Qubit-register machinery.

Conventions
-----------
* ``|up> = (1, 0)``, ``sigma_3 |up> = +|up>``, and
  ``sigma_+ = (sigma_1 + i sigma_2) / 2`` so that ``sigma_+ |down> = |up>``.
* Tensor factor 0 is the most significant bit of the computational basis
  (``np.kron`` order).
* The compression ``<phi| U |phi>`` contracts the measured factor out by
  tensor reshaping; the remaining (target) factors keep the order given
  in the layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import TOL, Tolerances
from .errors import DimensionMismatch, IndexOutOfRange, InvalidParams
from .linalg import as_matrix, as_vector

ID2 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)

UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)

_PAULI = {
    0: ID2,
    1: SIGMA_1,
    2: SIGMA_2,
    3: SIGMA_3,
    "+": SIGMA_PLUS,
    "-": SIGMA_MINUS,
}


def kron(*ops) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


@dataclass(frozen=True)
class RegisterLayout:
    """Split of an ``n_qubits`` register into a measured factor and targets."""

    n_qubits: int
    measured_index: int
    target_indices: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not 1 <= self.n_qubits <= 3:
            raise InvalidParams("register must hold 1 to 3 qubits")
        targets = tuple(self.target_indices) or tuple(
            i for i in range(self.n_qubits) if i != self.measured_index
        )
        object.__setattr__(self, "target_indices", targets)
        if self.measured_index in targets:
            raise InvalidParams("measured factor cannot also be a target")
        if sorted((self.measured_index, *targets)) != list(range(self.n_qubits)):
            raise InvalidParams("layout indices must cover every factor exactly once")

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def target_dim(self) -> int:
        return 2 ** len(self.target_indices)


@dataclass(frozen=True)
class ProjectorSpec:
    """Post-measurement state ``alpha|up> + beta|down>`` of the measured qubit."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > TOL.unit_norm:
            raise InvalidParams(f"|alpha|^2 + |beta|^2 must be 1, got {norm!r}")

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0) -> "ProjectorSpec":
        """Spin-up state along ``n = (sin t cos p, sin t sin p, cos t)``.

        Half-angle phases are kept: ``cos(t/2) e^{-ip/2}|up> + sin(t/2) e^{ip/2}|down>``.
        """
        return cls(
            complex(np.cos(theta / 2) * np.exp(-0.5j * phi)),
            complex(np.sin(theta / 2) * np.exp(0.5j * phi)),
        )

    @property
    def ket(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)


def bloch_operator(theta: float, phi: float) -> np.ndarray:
    """``n . tau`` for the unit vector with polar angle theta and azimuth phi."""
    n = (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))
    return n[0] * SIGMA_1 + n[1] * SIGMA_2 + n[2] * SIGMA_3


def pauli_on(factor_index: int, which, layout: RegisterLayout | int) -> np.ndarray:
    """Operator acting as a Pauli (or ladder) matrix on one factor only.

    ``which`` is one of 0 (identity), 1, 2, 3, ``"+"`` or ``"-"``.
    ``layout`` may be a RegisterLayout or just the number of qubits.
    """
    n = layout.n_qubits if isinstance(layout, RegisterLayout) else int(layout)
    if not 0 <= factor_index < n:
        raise IndexOutOfRange(f"factor {factor_index} out of range for {n} qubits")
    try:
        op = _PAULI[which]
    except KeyError:
        raise InvalidParams(f"unknown Pauli label {which!r}") from None
    return kron(*(op if i == factor_index else ID2 for i in range(n)))


def project_measured(u_total, phi: ProjectorSpec, layout: RegisterLayout) -> np.ndarray:
    """Return ``<phi| U |phi>`` as an operator on the target factors."""
    u = as_matrix(u_total)
    if u.shape[0] != layout.dim:
        raise DimensionMismatch(f"operator of dim {u.shape[0]} does not fit a {layout.n_qubits}-qubit layout")
    n = layout.n_qubits
    m = layout.measured_index
    t = u.reshape((2,) * (2 * n))
    ket = phi.ket
    # contract input leg first, then output leg (indices shift after the first)
    t = np.tensordot(t, ket, axes=([n + m], [0]))
    t = np.tensordot(ket.conj(), t, axes=([0], [m]))
    # remaining axes: outputs (n-1) then inputs (n-1), in ascending factor order
    remaining = [i for i in range(n) if i != m]
    order = [remaining.index(i) for i in layout.target_indices]
    k = n - 1
    t = t.transpose(order + [k + j for j in order])
    return t.reshape(layout.target_dim, layout.target_dim)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density matrix (Hermitian, unit trace, positive semidefinite)."""

    mat: np.ndarray

    def __post_init__(self):
        a = np.array(self.mat, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch("density matrix must be square")
        if np.max(np.abs(a - a.conj().T)) > TOL.density_hermitian:
            raise InvalidParams("density matrix must be Hermitian")
        if abs(np.trace(a) - 1.0) > TOL.density_trace:
            raise InvalidParams(f"density matrix must have unit trace, got {np.trace(a)!r}")
        if np.linalg.eigvalsh(a).min() < TOL.density_min_eig:
            raise InvalidParams("density matrix must be positive semidefinite")
        a.setflags(write=False)
        object.__setattr__(self, "mat", a)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def pure(cls, vec) -> "DensityMatrix":
        v = as_vector(vec)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise InvalidParams("a pure state needs a non-zero vector")
        v = v / norm
        return cls(np.outer(v, v.conj()))

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator, rank: int | None = None) -> "DensityMatrix":
        """Random state from the induced (Ginibre) measure."""
        g = rng.normal(size=(dim, rank or dim)) + 1j * rng.normal(size=(dim, rank or dim))
        rho = g @ g.conj().T
        return cls(rho / np.trace(rho))


def _mat(rho) -> np.ndarray:
    return rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def fidelity_to(rho, target) -> float:
    """``<target| rho |target>``, clamped to [0, 1]."""
    r = _mat(rho)
    t = as_vector(target)
    if r.shape[0] != t.size:
        raise DimensionMismatch(f"state of dim {r.shape[0]} vs target of dim {t.size}")
    t = t / np.linalg.norm(t)
    return float(min(1.0, max(0.0, np.real(t.conj() @ r @ t))))


def _factor(m: np.ndarray, cutoff: float = 1e-13) -> np.ndarray:
    """``W`` with ``m = W W^dagger``; eigen-directions below ``cutoff`` are dropped."""
    w, e = np.linalg.eigh(0.5 * (m + m.conj().T))
    keep = w > cutoff
    return e[:, keep] * np.sqrt(w[keep])


def state_fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`` between two states.

    Evaluated as the squared trace norm of ``W_rho^dagger W_sigma``, which
    stays accurate for rank-deficient (e.g. pure) states.
    """
    a, b = _mat(rho), _mat(sigma)
    if a.shape != b.shape:
        raise DimensionMismatch("states have different dimensions")
    sv = np.linalg.svd(_factor(a).conj().T @ _factor(b), compute_uv=False)
    return float(min(1.0, np.sum(sv) ** 2))


_YY = np.kron(SIGMA_2, SIGMA_2)


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit state.

    The decreasing square roots of the eigenvalues of ``rho (YY) rho* (YY)``
    are the singular values of ``W^T (YY) W`` for any factor ``rho = W W^dagger``.
    """
    r = _mat(rho)
    if r.shape != (4, 4):
        raise DimensionMismatch("concurrence needs a 4x4 density matrix")
    w = _factor(r)
    s = np.zeros(4)
    sv = np.linalg.svd(w.T @ _YY @ w, compute_uv=False)
    s[: sv.size] = sv
    return float(max(0.0, s[0] - s[1] - s[2] - s[3]))


def bell_basis() -> dict[str, np.ndarray]:
    """The four Bell states keyed ``psi_plus``, ``psi_minus``, ``phi_plus``, ``phi_minus``."""
    r = 1 / np.sqrt(2)
    uu, ud, du, dd = np.eye(4, dtype=complex)
    return {
        "psi_plus": r * (ud + du),
        "psi_minus": r * (ud - du),
        "phi_plus": r * (uu + dd),
        "phi_minus": r * (uu - dd),
    }
