"""Closed form versus brute force, family by family.

Every closed-form quantity is compared with the same quantity extracted
from an explicitly exponentiated and projected Hamiltonian at random
parameter points. ``run_duality_suite`` returns one row per family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import models
from .linalg import eig_biorthogonal, herm_expm
from .models import (
    MediatorParams,
    SuccessiveParams,
    TwoQubitParams,
    mediator_lambda_psi_minus,
    mediator_projected_v_direct,
    sector_blocks,
    successive_sector_matrices,
    twoqubit_coeffs,
    twoqubit_eigen,
)
from .quantum import ID2, SIGMA_1, SIGMA_2, SIGMA_3, bell_basis

FAMILIES = ("c0", "c1", "c2", "c3", "lambda_pm", "lambda_psi_minus", "M", "N", "lambda_psi")


@dataclass(frozen=True)
class DualityRow:
    family: str
    max_residual: float
    n_points: int
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tol)


def pauli_coefficients(v: np.ndarray) -> np.ndarray:
    """``(c0, c1, c2, c3)`` with ``v = c0 + c . sigma``."""
    return np.array([np.trace(v @ p) / 2 for p in (ID2, SIGMA_1, SIGMA_2, SIGMA_3)])


def _brute_twoqubit_v(p: TwoQubitParams) -> np.ndarray:
    u = herm_expm(models.twoqubit_hamiltonian(p), p.tau).reshape(2, 2, 2, 2)
    phi = p.projector.ket
    return np.einsum("a,aibj,b->ij", phi.conj(), u, phi)


def _brute_successive_v(p: SuccessiveParams) -> np.ndarray:
    h0, ha, hb = models.successive_hamiltonians(p)
    u = herm_expm(h0, p.tau_b) @ herm_expm(hb, p.t_b) @ herm_expm(h0, p.tau_a) @ herm_expm(ha, p.t_a)
    # factor order (A, B, X); select X = up on both sides
    return u.reshape(2, 2, 2, 2, 2, 2)[:, :, 0, :, :, 0].reshape(4, 4)


def random_twoqubit(rng: np.random.Generator) -> TwoQubitParams:
    return TwoQubitParams(
        omega_a=rng.uniform(-2, 2), omega_b=rng.uniform(-2, 2),
        g=rng.uniform(-1.5, 1.5), h=rng.uniform(-1.5, 1.5),
        tau=rng.uniform(0, 4), theta=rng.uniform(0, np.pi), phi=rng.uniform(0, 2 * np.pi),
    )


def random_mediator(rng: np.random.Generator, tau: float | None = None, omega: float | None = None) -> MediatorParams:
    theta, ph = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
    w = rng.uniform(0.2, 3) if omega is None else omega
    return MediatorParams(
        Omega=rng.uniform(-2, 2), omega=w, g=rng.uniform(-1.5, 1.5), h=rng.uniform(-1.5, 1.5),
        tau=rng.uniform(0, 4) if tau is None else tau,
        alpha=complex(np.cos(theta / 2)), beta=complex(np.sin(theta / 2) * np.exp(1j * ph)),
    )


def random_successive(rng: np.random.Generator) -> SuccessiveParams:
    return SuccessiveParams(
        omega=rng.uniform(-2, 2), g_a=rng.uniform(-1.5, 1.5), g_b=rng.uniform(-1.5, 1.5),
        t_a=rng.uniform(0, 3), t_b=rng.uniform(0, 3), tau_a=rng.uniform(0, 3), tau_b=rng.uniform(0, 3),
    )


def _set_distance(a, b) -> float:
    """Max deviation between two eigenvalue sets of equal size, matched greedily."""
    b = list(b)
    worst = 0.0
    for x in a:
        k = int(np.argmin([abs(x - y) for y in b]))
        worst = max(worst, abs(x - b.pop(k)))
    return worst


def twoqubit_residuals(rng, n_points: int) -> dict[str, float]:
    worst = dict.fromkeys(("c0", "c1", "c2", "c3", "lambda_pm"), 0.0)
    for _ in range(n_points):
        p = random_twoqubit(rng)
        v = _brute_twoqubit_v(p)
        dev = np.abs(np.array(twoqubit_coeffs(p)) - pauli_coefficients(v))
        for k, d in enumerate(dev):
            worst[f"c{k}"] = max(worst[f"c{k}"], float(d))
        closed = twoqubit_eigen(p).eigenvalues
        worst["lambda_pm"] = max(worst["lambda_pm"], _set_distance(closed, np.linalg.eigvals(v)))
    return worst


def mediator_residual(rng, n_points: int) -> float:
    psi_minus = bell_basis()["psi_minus"]
    worst = 0.0
    for _ in range(n_points):
        p = random_mediator(rng)
        v = mediator_projected_v_direct(p)
        lam = mediator_lambda_psi_minus(p)
        worst = max(worst, float(np.linalg.norm(v @ psi_minus - lam * psi_minus)))
    return worst


def successive_residuals(rng, n_points: int) -> dict[str, float]:
    worst = {"M": 0.0, "N": 0.0}
    for _ in range(n_points):
        p = random_successive(rng)
        m, n, ph_p, ph_m = successive_sector_matrices(p)
        plus, minus, leak = sector_blocks(_brute_successive_v(p))
        worst["M"] = max(worst["M"], float(np.max(np.abs(plus - ph_p * m.T))), leak)
        worst["N"] = max(worst["N"], float(np.max(np.abs(minus - ph_m * n.T))), leak)
    return worst


def lambda_psi_residual(max_points: int = 10) -> tuple[float, int]:
    """Eigen-residual of the target state at optimal points found by the solver."""
    from .optimizer import solve_optimal_condition

    worst = 0.0
    count = 0
    for template in (SuccessiveParams.symmetric(1.0, 1.0, 1.0, 1.0), SuccessiveParams.symmetric(1.3, 0.6, 1.0, 1.0)):
        for sol in solve_optimal_condition(template, ("t", "tau"))[:max_points]:
            v = _brute_successive_v(sol.params)
            psi, lam = sol.report.target, sol.report.lambda_psi
            worst = max(worst, float(np.linalg.norm(v @ psi - lam * psi)))
            # the remaining spectrum must also be verified
            mags = np.sort(np.abs(eig_biorthogonal(v).eigenvalues))[::-1]
            worst = max(worst, abs(mags[0] - 1.0), max(0.0, mags[1] - (1 - 1e-6)))
            count += 1
    return worst, count


def run_duality_suite(n_points: int = 200, seed: int = 20240, tol: float = 1e-9) -> list[DualityRow]:
    rng = np.random.default_rng(seed)
    rows = []
    tq = twoqubit_residuals(rng, n_points)
    for fam in ("c0", "c1", "c2", "c3", "lambda_pm"):
        rows.append(DualityRow(fam, tq[fam], n_points, tol))
    rows.append(DualityRow("lambda_psi_minus", mediator_residual(rng, n_points), n_points, tol))
    sc = successive_residuals(rng, n_points)
    rows.append(DualityRow("M", sc["M"], n_points, tol))
    rows.append(DualityRow("N", sc["N"], n_points, tol))
    worst, count = lambda_psi_residual()
    rows.append(DualityRow("lambda_psi", worst, count, tol))
    return rows
