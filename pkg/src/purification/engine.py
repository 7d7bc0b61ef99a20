"""Measurement-conditioned iteration and its spectral asymptotics.

Each step applies ``rho -> V rho V^dagger`` and renormalizes; the
cumulative yield is kept as the product of per-step traces (and its log),
which stays representable where the raw unnormalized state would not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import TOL, Tolerances
from .errors import DegenerateLeading, DimensionMismatch, NoConvergence, YieldUnderflow
from .linalg import SpectralDecomposition, as_matrix, as_vector, eig_biorthogonal
from .quantum import DensityMatrix, fidelity_to


@dataclass(frozen=True)
class StepRecord:
    n: int
    yield_p: float
    log_yield: float
    fidelity: float
    purity: float
    rho: np.ndarray | None = None


@dataclass
class PurificationTrajectory:
    steps: list[StepRecord]
    target: np.ndarray
    lambda_mags: np.ndarray
    truncated: bool = False

    @property
    def final(self) -> StepRecord:
        return self.steps[-1]

    @property
    def yields(self) -> np.ndarray:
        return np.array([s.yield_p for s in self.steps])

    @property
    def fidelities(self) -> np.ndarray:
        return np.array([s.fidelity for s in self.steps])

    @property
    def log_yields(self) -> np.ndarray:
        return np.array([s.log_yield for s in self.steps])


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Large-N behaviour: ``P(N) ~ prefactor * decay_base**N`` and ``rho(N) -> |target><target|``."""

    target: np.ndarray
    lambda0: complex
    prefactor: float
    gap_ratio: float
    decay_base: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "decay_base", abs(self.lambda0) ** 2)

    def yield_at(self, n: int) -> float:
        return self.prefactor * self.decay_base**n

    def log_yield_at(self, n: int) -> float:
        return math.log(self.prefactor) + n * math.log(self.decay_base)


def _rho_matrix(rho0) -> np.ndarray:
    if isinstance(rho0, DensityMatrix):
        return rho0.mat
    return DensityMatrix(rho0).mat


def predict_asymptotics(spec: SpectralDecomposition, rho0, tol: Tolerances = TOL) -> AsymptoticPrediction:
    """Pure-state limit and yield asymptotics from the leading eigenpair.

    Raises
    ------
    NoConvergence
        If the leading eigenvalue vanishes (V is nilpotent).
    DegenerateLeading
        If the two largest magnitudes agree within ``tol.degeneracy``; there
        is then no unique pure limit and no purification occurs.
    """
    rho = _rho_matrix(rho0)
    if rho.shape[0] != spec.dim:
        raise DimensionMismatch("initial state does not match the operator")
    mags = spec.magnitudes
    if mags[0] <= tol.degeneracy:
        raise NoConvergence("leading eigenvalue is zero")
    if spec.dim > 1 and mags[0] - mags[1] <= tol.degeneracy:
        raise DegenerateLeading("leading eigenvalues degenerate in magnitude; no purification")
    u0, v0 = spec.u(0), spec.v(0)
    uu = float(np.real(np.vdot(u0, u0)))
    vrv = float(np.real(v0 @ rho @ v0.conj()))
    gap = float(mags[1] / mags[0]) if spec.dim > 1 else 0.0
    return AsymptoticPrediction(u0 / math.sqrt(uu), complex(spec.eigenvalues[0]), max(uu * vrv, 0.0), gap)


def iterate(
    v,
    rho0,
    n_max: int,
    target=None,
    record_states: bool = False,
    raise_on_underflow: bool = False,
    tol: Tolerances = TOL,
) -> PurificationTrajectory:
    """Run ``n_max`` measurement cycles starting from ``rho0``.

    ``steps[n]`` holds P(n), the conditioned state's fidelity to ``target``
    and its purity, for n = 0..n_max. When ``target`` is None the predicted
    pure limit (right eigenvector of the leading eigenvalue) is used.

    If P(n) drops below ``tol.yield_underflow`` the trajectory stops there
    with ``truncated=True`` (or YieldUnderflow is raised when requested).
    """
    v = as_matrix(v)
    rho = _rho_matrix(rho0).copy()
    if v.shape != rho.shape:
        raise DimensionMismatch(f"operator {v.shape} and state {rho.shape} disagree")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    spec = None
    try:
        spec = eig_biorthogonal(v, tol)
        mags = spec.magnitudes
    except ArithmeticError:
        mags = np.sort(np.abs(np.linalg.eigvals(v)))[::-1]
    if target is None:
        if spec is None:
            raise ValueError("no target given and the operator has no eigenbasis")
        target = predict_asymptotics(spec, rho, tol).target
    target = as_vector(target)
    if target.size != v.shape[0]:
        raise DimensionMismatch("target does not match the operator")
    target = target / np.linalg.norm(target)

    vd = v.conj().T
    log_p = 0.0

    def record(n):
        return StepRecord(
            n,
            math.exp(log_p) if log_p > -745 else 0.0,
            log_p,
            fidelity_to(rho, target),
            float(min(1.0, max(0.0, np.real(np.trace(rho @ rho))))),
            rho.copy() if record_states else None,
        )

    steps = [record(0)]
    truncated = False
    floor = math.log(tol.yield_underflow)
    for n in range(1, n_max + 1):
        nxt = v @ rho @ vd
        p = float(np.real(np.trace(nxt)))
        if p <= 0 or log_p + math.log(p) < floor:
            truncated = True
            break
        log_p += math.log(p)
        rho = nxt / p
        rho = 0.5 * (rho + rho.conj().T)
        steps.append(record(n))
    traj = PurificationTrajectory(steps, target, mags, truncated)
    if truncated and raise_on_underflow:
        raise YieldUnderflow(f"yield fell below {tol.yield_underflow:g} after step {steps[-1].n}", traj)
    return traj


@dataclass(frozen=True)
class CrosscheckReport:
    fidelity_deviation: float
    yield_deviation: float
    n_half: int
    n_max: int
    gap_ratio: float
    prediction: AsymptoticPrediction


def crosscheck(v, rho0, n_max: int, tol: Tolerances = TOL) -> CrosscheckReport:
    """Compare direct iteration with the spectral prediction over ``n in [n_max/2, n_max]``.

    Reports ``max |F_iter(n) - 1|`` (fidelity to the predicted pure limit)
    and ``max |P_iter(n) / (prefactor |lambda0|^{2n}) - 1|``.
    """
    spec = eig_biorthogonal(v, tol)
    pred = predict_asymptotics(spec, rho0, tol)
    traj = iterate(v, rho0, n_max, target=pred.target, tol=tol)
    n_half = n_max // 2
    f_dev = y_dev = 0.0
    for s in traj.steps:
        if s.n < n_half:
            continue
        f_dev = max(f_dev, abs(s.fidelity - 1.0))
        if pred.prefactor > 0:
            y_dev = max(y_dev, abs(math.expm1(s.log_yield - pred.log_yield_at(s.n))))
        else:
            y_dev = math.inf
    return CrosscheckReport(f_dev, y_dev, n_half, n_max, pred.gap_ratio, pred)
