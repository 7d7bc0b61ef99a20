"""The three concrete systems and their closed-form spectra.

``TwoQubitParams``
    Qubit A is measured along a direction ``(theta, phi)``; qubit B is purified.
``MediatorParams``
    Qubits A, B interact simultaneously with a measured qubit C; the goal is
    an entangled pair in A+B.
``SuccessiveParams``
    A mediator qubit X interacts with A, then B, and is measured in ``|up>``
    after every cycle.

Every builder works in natural units (hbar = 1). Register layouts put the
measured qubit at factor 0 for the two-qubit model and at factor 2 for the
three-qubit models; the target factors are always in (A, B) order.
"""

from __future__ import annotations

import cmath
import dataclasses
from dataclasses import dataclass
from typing import Union

import numpy as np

from .constants import TOL, Tolerances
from .errors import DegenerateDirection, InvalidParams
from .linalg import SpectralDecomposition, eig_biorthogonal, herm_expm
from .quantum import (
    DOWN,
    UP,
    DensityMatrix,
    ProjectorSpec,
    RegisterLayout,
    bell_basis,
    kron,
    pauli_on,
    project_measured,
)

TWO_QUBIT_LAYOUT = RegisterLayout(2, measured_index=0, target_indices=(1,))
THREE_QUBIT_LAYOUT = RegisterLayout(3, measured_index=2, target_indices=(0, 1))


def _check_finite(obj):
    for f in dataclasses.fields(obj):
        val = getattr(obj, f.name)
        if isinstance(val, (int, float, complex)) and not cmath.isfinite(complex(val)):
            raise InvalidParams(f"{f.name} must be finite")


def _number(n: int, k: int) -> np.ndarray:
    """``(1 + sigma_3)/2`` on factor ``k`` of ``n``: the up-state projector."""
    return 0.5 * (np.eye(2**n) + pauli_on(k, 3, n))


# ---------------------------------------------------------------------------
# two qubits


@dataclass(frozen=True)
class TwoQubitParams:
    omega_a: float
    omega_b: float
    g: float
    h: float
    tau: float
    theta: float = 0.0
    phi: float = 0.0

    kind = "two_qubit"

    def __post_init__(self):
        _check_finite(self)
        for name in ("omega_a", "omega_b", "g", "h", "tau", "theta", "phi"):
            if isinstance(getattr(self, name), complex):
                raise InvalidParams(f"{name} must be real")
        if self.tau < 0:
            raise InvalidParams("tau must be non-negative")

    @property
    def projector(self) -> ProjectorSpec:
        return ProjectorSpec.from_angles(self.theta, self.phi)

    @property
    def omega_plus(self) -> float:
        return self.omega_a + self.omega_b

    @property
    def omega_minus(self) -> float:
        return self.omega_a - self.omega_b

    @property
    def theta_h(self) -> float:
        return float(np.hypot(self.omega_plus, 2 * self.h))

    @property
    def theta_g(self) -> float:
        return float(np.hypot(self.omega_minus, 2 * self.g))


def twoqubit_hamiltonian(p: TwoQubitParams) -> np.ndarray:
    """H = w_A (1+tau_3)/2 + w_B (1+sigma_3)/2 + g(tau_+ sigma_- + h.c.) + h(tau_+ sigma_+ + h.c.)."""
    n = 2
    tp, tm = pauli_on(0, "+", n), pauli_on(0, "-", n)
    sp, sm = pauli_on(1, "+", n), pauli_on(1, "-", n)
    return (
        p.omega_a * _number(n, 0)
        + p.omega_b * _number(n, 1)
        + p.g * (tp @ sm + tm @ sp)
        + p.h * (tp @ sp + tm @ sm)
    )


def twoqubit_projected_v(p: TwoQubitParams) -> np.ndarray:
    """``<phi| exp(-iH tau) |phi>`` on qubit B, by direct exponentiation."""
    return project_measured(herm_expm(twoqubit_hamiltonian(p), p.tau), p.projector, TWO_QUBIT_LAYOUT)


def _twoqubit_trig(p: TwoQubitParams):
    th, tg = p.theta_h, p.theta_g
    ch, cg = np.cos(p.tau * th / 2), np.cos(p.tau * tg / 2)
    sh, sg = np.sin(p.tau * th / 2), np.sin(p.tau * tg / 2)
    # x/theta * sin(tau theta/2) -> x tau/2 as theta -> 0
    def ratio(x, theta, s):
        return x * p.tau / 2 if theta == 0 else x / theta * s

    return ch, cg, sh, sg, ratio


def _twoqubit_phase(p: TwoQubitParams, global_phase: bool) -> complex:
    # the constant (w_A + w_B)/2 in H contributes exp(-i w_+ tau/2) to every coefficient
    return cmath.exp(-0.5j * p.omega_plus * p.tau) if global_phase else 1.0


def twoqubit_coeffs(p: TwoQubitParams, global_phase: bool = True) -> tuple[complex, complex, complex, complex]:
    """Closed-form ``(c0, c1, c2, c3)`` with ``V = c0 + c . sigma``.

    With ``global_phase=False`` the overall factor ``exp(-i(w_A+w_B) tau/2)``
    is dropped, which is the traceless-Hamiltonian form.
    """
    ch, cg, sh, sg, ratio = _twoqubit_trig(p)
    th, tg = p.theta_h, p.theta_g
    wp, wm = p.omega_plus, p.omega_minus
    ct, st = np.cos(p.theta), np.sin(p.theta)
    ph = _twoqubit_phase(p, global_phase)
    c0 = 0.5 * (ch + cg) - 0.5j * (ratio(wp, th, sh) + ratio(wm, tg, sg)) * ct
    c1 = -1j * (ratio(p.h, th, sh) + ratio(p.g, tg, sg)) * st * np.cos(p.phi)
    c2 = 1j * (ratio(p.h, th, sh) - ratio(p.g, tg, sg)) * st * np.sin(p.phi)
    c3 = 0.5 * (ch - cg) * ct - 0.5j * (ratio(wp, th, sh) - ratio(wm, tg, sg))
    return tuple(complex(ph * c) for c in (c0, c1, c2, c3))


def twoqubit_theta0_eigenvalues(p: TwoQubitParams, global_phase: bool = True) -> tuple[complex, complex]:
    """``(lambda_+, lambda_-)`` for measurement along the 3-axis (eigenvectors |up), |down))."""
    ch, cg, sh, sg, ratio = _twoqubit_trig(p)
    ph = _twoqubit_phase(p, global_phase)
    lp = ch - 1j * ratio(p.omega_plus, p.theta_h, sh)
    lm = cg - 1j * ratio(p.omega_minus, p.theta_g, sg)
    return complex(ph * lp), complex(ph * lm)


def twoqubit_theta0_abs_sq(p: TwoQubitParams) -> tuple[float, float]:
    """``(|lambda_+|^2, |lambda_-|^2)`` at theta = 0."""
    _, _, sh, sg, ratio = _twoqubit_trig(p)
    return (
        float(1 - 4 * ratio(p.h, p.theta_h, sh) ** 2),
        float(1 - 4 * ratio(p.g, p.theta_g, sg) ** 2),
    )


def twoqubit_eigen(p: TwoQubitParams, tol: Tolerances = TOL) -> SpectralDecomposition:
    """Closed-form eigensystem ``lambda_pm = c0 +- c`` in (+, -) order.

    If ``c1 = c2 = 0`` the operator is diagonal and the eigenvectors are
    ``|up)`` (lambda_+ = c0 + c3) and ``|down)``. Otherwise the principal
    branch of ``c = sqrt(c . c)`` is used, flipped when ``c = c3`` makes the
    normalization singular; labels can therefore swap, sets do not.

    Raises
    ------
    DegenerateDirection
        When ``c = 0``; use ``linalg.eig_biorthogonal`` on the matrix instead.
    """
    c0, c1, c2, c3 = twoqubit_coeffs(p)
    if abs(c1) < tol.direction and abs(c2) < tol.direction:
        return SpectralDecomposition(
            np.array([c0 + c3, c0 - c3]),
            np.eye(2, dtype=complex),
            np.eye(2, dtype=complex),
        )
    c = cmath.sqrt(c1 * c1 + c2 * c2 + c3 * c3)
    if abs(c) < tol.direction:
        raise DegenerateDirection("c = 0: eigenvector formulas are singular")
    if abs(c - c3) < abs(c + c3):
        c = -c
    cp, cm = c1 + 1j * c2, c1 - 1j * c2
    norm = cmath.sqrt(2 * c * (c - c3))
    right = np.array([[cm, c3 - c], [c - c3, cp]], dtype=complex) / norm
    left = np.array([[cp, c - c3], [c3 - c, cm]], dtype=complex) / norm
    return SpectralDecomposition(np.array([c0 + c, c0 - c]), right, left)


# ---------------------------------------------------------------------------
# mediator: A, B coupled simultaneously to the measured qubit C


@dataclass(frozen=True)
class MediatorParams:
    Omega: float
    omega: float
    g: float
    h: float
    tau: float
    alpha: complex = 1.0
    beta: complex = 0.0

    kind = "mediator"

    def __post_init__(self):
        _check_finite(self)
        if self.tau < 0:
            raise InvalidParams("tau must be non-negative")
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > TOL.unit_norm:
            raise InvalidParams(f"|alpha|^2 + |beta|^2 must be 1, got {norm!r}")

    @property
    def projector(self) -> ProjectorSpec:
        return ProjectorSpec(complex(self.alpha), complex(self.beta))


def mediator_hamiltonian(p: MediatorParams) -> np.ndarray:
    n = 3
    ap, am = pauli_on(0, "+", n), pauli_on(0, "-", n)
    bp, bm = pauli_on(1, "+", n), pauli_on(1, "-", n)
    cp, cm = pauli_on(2, "+", n), pauli_on(2, "-", n)
    return (
        p.Omega * (_number(n, 0) + _number(n, 1))
        + p.omega * _number(n, 2)
        + p.g * (ap @ cm + bp @ cm + am @ cp + bm @ cp)
        + p.h * (ap @ cp + bp @ cp + am @ cm + bm @ cm)
    )


def mediator_sector_states() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Basis kets (columns, 8-dim) of the two symmetric sectors and the antisymmetric pair.

    Returns ``(plus, minus, anti)`` where ``plus`` holds
    ``|Phi+ up>, |Phi- up>, |Psi+ down>`` (parity +), ``minus`` holds
    ``|Phi+ down>, |Phi- down>, |Psi+ up>`` (parity -), and ``anti`` holds
    ``|Psi- up>, |Psi- down>``.
    """
    b = bell_basis()
    plus = np.column_stack([np.kron(b["phi_plus"], UP), np.kron(b["phi_minus"], UP), np.kron(b["psi_plus"], DOWN)])
    minus = np.column_stack([np.kron(b["phi_plus"], DOWN), np.kron(b["phi_minus"], DOWN), np.kron(b["psi_plus"], UP)])
    anti = np.column_stack([np.kron(b["psi_minus"], UP), np.kron(b["psi_minus"], DOWN)])
    return plus, minus, anti


def mediator_sector_matrices(p: MediatorParams) -> tuple[np.ndarray, np.ndarray]:
    """The 3x3 Hamiltonian blocks of the symmetric parity-(+) and parity-(-) sectors."""
    W, w, g, h = p.Omega, p.omega, p.g, p.h
    s_plus = np.array(
        [[W + w, W, g + h], [W, W + w, -g + h], [g + h, -g + h, W]], dtype=complex
    )
    s_minus = np.array(
        [[W, W, g + h], [W, W, g - h], [g + h, g - h, W + w]], dtype=complex
    )
    return s_plus, s_minus


def mediator_evolution(p: MediatorParams) -> np.ndarray:
    """``exp(-iH tau)`` assembled from the sector eigenstates.

    Each symmetric sector is diagonalized separately; the antisymmetric
    states only pick up the phases ``exp(-i(W+w)tau)`` and ``exp(-i W tau)``.
    """
    plus, minus, anti = mediator_sector_states()
    s_plus, s_minus = mediator_sector_matrices(p)
    u = np.zeros((8, 8), dtype=complex)
    for basis, block in ((plus, s_plus), (minus, s_minus)):
        energies, vecs = np.linalg.eigh(block)
        states = basis @ vecs
        u += (states * np.exp(-1j * energies * p.tau)) @ states.conj().T
    phases = np.exp(-1j * np.array([p.Omega + p.omega, p.Omega]) * p.tau)
    u += (anti * phases) @ anti.conj().T
    return u


def mediator_projected_v(p: MediatorParams) -> np.ndarray:
    """Projected operator on A+B built from the sector decomposition."""
    return project_measured(mediator_evolution(p), p.projector, THREE_QUBIT_LAYOUT)


def mediator_projected_v_direct(p: MediatorParams) -> np.ndarray:
    """Projected operator on A+B from exponentiating the full 8x8 Hamiltonian."""
    return project_measured(herm_expm(mediator_hamiltonian(p), p.tau), p.projector, THREE_QUBIT_LAYOUT)


def mediator_lambda_psi_minus(p: MediatorParams) -> complex:
    """Eigenvalue of the singlet ``|Psi-)``: ``|a|^2 e^{-i(W+w)tau} + |b|^2 e^{-iW tau}``."""
    a2, b2 = abs(p.alpha) ** 2, abs(p.beta) ** 2
    return complex(
        a2 * cmath.exp(-1j * (p.Omega + p.omega) * p.tau) + b2 * cmath.exp(-1j * p.Omega * p.tau)
    )


def exchange_ab() -> np.ndarray:
    """Swap of qubits A and B on the three-qubit register."""
    swap = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            swap[2 * j + i, 2 * i + j] = 1
    return np.kron(swap, np.eye(2))


# ---------------------------------------------------------------------------
# successive interactions with a mediator X


@dataclass(frozen=True)
class SuccessiveParams:
    omega: float
    g_a: float
    g_b: float
    t_a: float
    t_b: float
    tau_a: float
    tau_b: float
    # "xx": g s1^X s1^A (default); "exchange": g (s+^X s-^A + h.c.), for comparison only
    coupling: str = "xx"

    kind = "successive"

    def __post_init__(self):
        _check_finite(self)
        for name in ("t_a", "t_b", "tau_a", "tau_b"):
            if getattr(self, name) < 0:
                raise InvalidParams(f"{name} must be non-negative")
        if self.coupling not in ("xx", "exchange"):
            raise InvalidParams(f"unknown coupling {self.coupling!r}")

    @classmethod
    def symmetric(cls, omega: float, g: float, t: float, tau: float, **kw) -> "SuccessiveParams":
        return cls(omega, g, g, t, t, tau, tau, **kw)

    @property
    def is_symmetric(self) -> bool:
        return self.g_a == self.g_b and self.t_a == self.t_b and self.tau_a == self.tau_b


def successive_hamiltonians(p: SuccessiveParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(H0, H0 + H_XA, H0 + H_XB)`` on the register (A, B, X)."""
    n = 3
    h0 = p.omega * (_number(n, 0) + _number(n, 1) + _number(n, 2))
    if p.coupling == "xx":
        hxa = p.g_a * pauli_on(2, 1, n) @ pauli_on(0, 1, n)
        hxb = p.g_b * pauli_on(2, 1, n) @ pauli_on(1, 1, n)
    else:
        xp, xm = pauli_on(2, "+", n), pauli_on(2, "-", n)
        hxa = p.g_a * (xp @ pauli_on(0, "-", n) + xm @ pauli_on(0, "+", n))
        hxb = p.g_b * (xp @ pauli_on(1, "-", n) + xm @ pauli_on(1, "+", n))
    return h0, h0 + hxa, h0 + hxb


def successive_cycle_evolution(p: SuccessiveParams) -> np.ndarray:
    """Propagator of one cycle: interact with A, free, interact with B, free."""
    h0, ha, hb = successive_hamiltonians(p)
    return herm_expm(h0, p.tau_b) @ herm_expm(hb, p.t_b) @ herm_expm(h0, p.tau_a) @ herm_expm(ha, p.t_a)


def successive_cycle_v(p: SuccessiveParams) -> np.ndarray:
    """Projected cycle operator ``<up| U_cycle |up>`` on A+B."""
    return project_measured(successive_cycle_evolution(p), ProjectorSpec(1.0, 0.0), THREE_QUBIT_LAYOUT)


# basis orderings of the parity sectors, as indices into the (A, B) computational basis
PARITY_PLUS = (0, 3)  # |up up), |down down)
PARITY_MINUS = (1, 2)  # |up down), |down up)


def successive_angles(omega: float, g: float, t: float) -> tuple[float, float, float]:
    """``(zeta, cos 2xi, sin 2xi)`` with ``zeta = t sqrt(w^2 + g^2)`` and ``tan 2xi = g/w``."""
    r = float(np.hypot(omega, g))
    if r == 0:
        return 0.0, 1.0, 0.0
    return t * r, omega / r, g / r


def successive_sector_matrices(p: SuccessiveParams) -> tuple[np.ndarray, np.ndarray, complex, complex]:
    """Closed-form ``(M, N, phase_plus, phase_minus)``.

    The convention is the ket-column one, ``V |e_i) = phase * sum_j M_ij |e_j)``,
    so the block of V in the basis ``PARITY_PLUS`` is ``phase_plus * M.T``
    (and likewise for N on ``PARITY_MINUS``).
    """
    w, ga, gb, ta, tb, sa, sb = p.omega, p.g_a, p.g_b, p.t_a, p.t_b, p.tau_a, p.tau_b
    za, ca, sxa = successive_angles(w, ga, ta)
    zb, cb, sxb = successive_angles(w, gb, tb)
    fa = np.cos(za) - 1j * np.sin(za) * ca
    fb = np.cos(zb) - 1j * np.sin(zb) * cb
    e = lambda x: cmath.exp(-1j * w * x)  # noqa: E731
    m = np.array(
        [
            [e(ta + 2 * sa + tb + 2 * sb) * fa * fb, -e(ta) * np.sin(za) * sxa * np.sin(gb * tb)],
            [-e(tb + 2 * sb) * np.sin(ga * ta) * np.sin(zb) * sxb, np.cos(ga * ta) * np.cos(gb * tb)],
        ],
        dtype=complex,
    )
    n = np.array(
        [
            [e(2 * sa + tb) * fa * np.cos(gb * tb), -np.sin(za) * sxa * np.sin(zb) * sxb],
            [-e(ta + 2 * sa + tb) * np.sin(ga * ta) * np.sin(gb * tb), e(ta + 2 * sa) * np.cos(ga * ta) * fb],
        ],
        dtype=complex,
    )
    return m, n, e(ta + sa + tb + sb), e(ta + tb + 2 * sb)


def sector_blocks(v: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Split a 4x4 operator on A+B into its parity blocks.

    Returns ``(plus_block, minus_block, leak)`` where ``leak`` is the largest
    matrix element connecting the two sectors.
    """
    plus, minus = list(PARITY_PLUS), list(PARITY_MINUS)
    leak = max(np.max(np.abs(v[np.ix_(plus, minus)])), np.max(np.abs(v[np.ix_(minus, plus)])))
    return v[np.ix_(plus, plus)], v[np.ix_(minus, minus)], float(leak)


def optimal_residual(omega: float, g: float, t: float, tau: float) -> complex:
    """``cos z - i sin z cos 2xi + e^{i w tau} cos(g t)``; zero at an optimal point."""
    z, c2x, _ = successive_angles(omega, g, t)
    return complex(np.cos(z) - 1j * np.sin(z) * c2x + cmath.exp(1j * omega * tau) * np.cos(g * t))


def successive_target(omega: float, t: float, tau: float) -> np.ndarray:
    """``(|up down) + e^{i chi}|down up))/sqrt 2`` with ``chi = w(t + tau)``."""
    chi = omega * (t + tau)
    return np.array([0, 1, cmath.exp(1j * chi), 0], dtype=complex) / np.sqrt(2)


def successive_lambda_psi(omega: float, t: float, tau: float) -> complex:
    return -cmath.exp(-3j * omega * (t + tau))


@dataclass(frozen=True)
class OptimalityReport:
    """Diagnostics of a symmetric successive-interaction point. No assertions are made."""

    residual: float
    cos_sin_ok: bool
    chi_ok: bool
    target: np.ndarray
    lambda_psi: complex
    eigen_residual: float
    magnitudes: np.ndarray

    @property
    def constraints_ok(self) -> bool:
        return self.cos_sin_ok and self.chi_ok

    @property
    def max_other_magnitude(self) -> float:
        """Largest eigenvalue magnitude after removing the one closest to lambda_psi."""
        mags = list(self.magnitudes)
        mags.pop(int(np.argmin([abs(m - abs(self.lambda_psi)) for m in mags])))
        return float(max(mags))


def successive_symmetric_check(p: SuccessiveParams, constraint_tol: float = 1e-6) -> OptimalityReport:
    """Measure how close a symmetric point is to optimal distillation of ``|Psi)``."""
    if not p.is_symmetric:
        raise InvalidParams("successive_symmetric_check needs g_a = g_b, t_a = t_b, tau_a = tau_b")
    w, g, t, tau = p.omega, p.g_a, p.t_a, p.tau_a
    r = abs(optimal_residual(w, g, t, tau))
    cos_sin_ok = abs(np.cos(g * t) * np.sin(g * t)) > constraint_tol
    chi = w * (t + tau)
    k = round(chi / (2 * np.pi))
    chi_ok = abs(chi - 2 * np.pi * k) > constraint_tol
    target = successive_target(w, t, tau)
    lam = successive_lambda_psi(w, t, tau)
    v = successive_cycle_v(p)
    eig_res = float(np.linalg.norm(v @ target - lam * target))
    mags = np.sort(np.abs(np.linalg.eigvals(v)))[::-1]
    return OptimalityReport(r, bool(cos_sin_ok), bool(chi_ok), target, lam, eig_res, mags)


# ---------------------------------------------------------------------------
# dispatch

ModelParams = Union[TwoQubitParams, MediatorParams, SuccessiveParams]
MODEL_TYPES = {cls.kind: cls for cls in (TwoQubitParams, MediatorParams, SuccessiveParams)}


@dataclass(frozen=True)
class ModelConfig:
    """One model's parameters plus the initial state of the target subsystem."""

    params: ModelParams
    rho0: DensityMatrix | None = None

    def __post_init__(self):
        if not isinstance(self.params, tuple(MODEL_TYPES.values())):
            raise InvalidParams(f"unsupported parameter record {type(self.params).__name__}")
        if self.rho0 is not None and self.rho0.dim != target_dim(self.params):
            raise InvalidParams("initial state dimension does not match the model")

    @property
    def kind(self) -> str:
        return self.params.kind

    @property
    def initial_state(self) -> DensityMatrix:
        return self.rho0 or DensityMatrix.maximally_mixed(target_dim(self.params))

    def with_params(self, **changes) -> "ModelConfig":
        return ModelConfig(dataclasses.replace(self.params, **changes), self.rho0)


def target_dim(params: ModelParams) -> int:
    return 2 if isinstance(params, TwoQubitParams) else 4


def build_hamiltonian(cfg: ModelConfig | ModelParams):
    """Total Hamiltonian; for the successive model, the triple (H0, H0+H_XA, H0+H_XB)."""
    p = cfg.params if isinstance(cfg, ModelConfig) else cfg
    if isinstance(p, TwoQubitParams):
        return twoqubit_hamiltonian(p)
    if isinstance(p, MediatorParams):
        return mediator_hamiltonian(p)
    if isinstance(p, SuccessiveParams):
        return successive_hamiltonians(p)
    raise InvalidParams(f"unsupported parameter record {type(p).__name__}")


def projected_operator(cfg: ModelConfig | ModelParams) -> np.ndarray:
    """The projected (per-cycle) operator acting on the target subsystem."""
    p = cfg.params if isinstance(cfg, ModelConfig) else cfg
    if isinstance(p, TwoQubitParams):
        return twoqubit_projected_v(p)
    if isinstance(p, MediatorParams):
        return mediator_projected_v(p)
    if isinstance(p, SuccessiveParams):
        return successive_cycle_v(p)
    raise InvalidParams(f"unsupported parameter record {type(p).__name__}")


def spectrum(cfg: ModelConfig | ModelParams) -> SpectralDecomposition:
    return eig_biorthogonal(projected_operator(cfg))
