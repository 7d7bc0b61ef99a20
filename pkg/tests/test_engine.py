import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from purification import models
from purification.engine import crosscheck, iterate, predict_asymptotics
from purification.errors import DegenerateLeading, DimensionMismatch, NoConvergence, YieldUnderflow
from purification.linalg import eig_biorthogonal
from purification.models import MediatorParams, TwoQubitParams
from purification.quantum import (
    UP,
    DensityMatrix,
    ProjectorSpec,
    RegisterLayout,
    bell_basis,
    concurrence,
    project_measured,
)

OPTIMAL_TWO_QUBIT = TwoQubitParams(1.0, 1.0, 1.0, 0.0, math.pi / 2)
# tau tuned so that |lambda_1 / lambda_0| = 0.5 (frozen from a root solve)
GAP_HALF_TWO_QUBIT = TwoQubitParams(1.0, 0.5, 1.0, 0.2, 1.0805625108602124, theta=0.3, phi=0.9)
MEDIATOR_FULL_TURN = MediatorParams(1.5, 1.0, 0.5, 0.4, 2 * math.pi, alpha=1 / math.sqrt(2), beta=1 / math.sqrt(2))


def random_projected_unitary(rng, dim):
    nq = int(round(math.log2(dim))) + 1
    u = unitary_group.rvs(2 * dim, random_state=rng)
    phi = ProjectorSpec.from_angles(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
    return project_measured(u, phi, RegisterLayout(nq, nq - 1))


class TestIterate:
    def test_unitary_no_selection(self, rng):
        u = unitary_group.rvs(4, random_state=1)
        rho = DensityMatrix.random(4, rng)
        traj = iterate(u, rho, 30, target=np.eye(4)[0])
        assert np.allclose(traj.yields, 1.0, atol=1e-12)
        assert np.allclose([s.purity for s in traj.steps], rho.purity, atol=1e-12)

    def test_rank_one_projector(self):
        traj = iterate(np.diag([1.0, 0.0]), np.eye(2) / 2, 3, target=UP)
        assert traj.steps[1].yield_p == pytest.approx(0.5)
        assert traj.steps[1].fidelity == pytest.approx(1.0)
        assert traj.steps[0].n == 0 and len(traj.steps) == 4

    def test_optimal_two_qubit(self):
        v = models.twoqubit_projected_v(OPTIMAL_TWO_QUBIT)
        traj = iterate(v, DensityMatrix.maximally_mixed(2), 40, target=UP)
        assert np.allclose(traj.yields[1:], 0.5, atol=1e-10)
        assert np.all(traj.fidelities[1:] > 1 - 1e-10)

    def test_record_states(self):
        traj = iterate(np.diag([0.9, 0.3]), np.eye(2) / 2, 5, record_states=True)
        assert traj.final.rho.shape == (2, 2)
        assert np.trace(traj.final.rho).real == pytest.approx(1.0)
        assert iterate(np.diag([0.9, 0.3]), np.eye(2) / 2, 5).final.rho is None

    def test_default_target_is_leading_eigenvector(self):
        traj = iterate(np.diag([0.3, 0.9]), np.eye(2) / 2, 60)
        assert np.allclose(np.abs(traj.target), [0, 1])
        assert traj.final.fidelity > 1 - 1e-12

    def test_underflow_truncates(self):
        traj = iterate(np.diag([1e-3, 1e-4]), np.eye(2) / 2, 500)
        assert traj.truncated
        assert traj.final.n < 500
        assert traj.final.yield_p >= 1e-300
        with pytest.raises(YieldUnderflow) as info:
            iterate(np.diag([1e-3, 1e-4]), np.eye(2) / 2, 500, raise_on_underflow=True)
        assert info.value.trajectory.truncated

    def test_validation(self):
        with pytest.raises(DimensionMismatch):
            iterate(np.eye(2), np.eye(4) / 4, 3)
        with pytest.raises(ValueError):
            iterate(np.eye(2), np.eye(2) / 2, 0)
        with pytest.raises(DimensionMismatch):
            iterate(np.diag([1, 0.5]), np.eye(2) / 2, 3, target=np.ones(4))

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), dim=st.sampled_from([2, 4]))
    def test_monotone_yield_and_bounds(self, seed, dim):
        rng = np.random.default_rng(seed)
        v = random_projected_unitary(rng, dim)
        traj = iterate(v, DensityMatrix.random(dim, rng), 40, target=np.eye(dim)[0])
        y = traj.yields
        assert np.all(np.diff(y) <= 1e-12)
        assert np.all((y >= 0) & (y <= 1 + 1e-12))
        for s in traj.steps:
            assert -1e-9 <= s.fidelity <= 1 + 1e-9
            assert -1e-9 <= s.purity <= 1 + 1e-9


class TestPrediction:
    def test_diagonal(self):
        pred = predict_asymptotics(eig_biorthogonal(np.diag([0.9, 0.4j])), DensityMatrix.maximally_mixed(2))
        assert np.allclose(np.abs(pred.target), [1, 0])
        assert pred.prefactor == pytest.approx(0.5)
        assert pred.decay_base == pytest.approx(0.81)
        assert pred.gap_ratio == pytest.approx(0.4 / 0.9)
        assert pred.yield_at(3) == pytest.approx(0.5 * 0.81**3)
        assert pred.log_yield_at(3) == pytest.approx(math.log(0.5 * 0.81**3))

    def test_theta_half_pi_degenerate(self):
        p = TwoQubitParams(1.0, 0.5, 0.3, 0.2, 1.7, theta=math.pi / 2, phi=0.3)
        with pytest.raises(DegenerateLeading, match="no purification"):
            predict_asymptotics(models.spectrum(models.ModelConfig(p)), DensityMatrix.maximally_mixed(2))

    def test_nilpotent(self):
        with pytest.raises(NoConvergence):
            predict_asymptotics(eig_biorthogonal(np.zeros((2, 2))), DensityMatrix.maximally_mixed(2))

    def test_equal_magnitude_distinct_phase(self):
        with pytest.raises(DegenerateLeading):
            predict_asymptotics(eig_biorthogonal(np.diag([0.8, -0.8])), DensityMatrix.maximally_mixed(2))

    def test_successive_optimal_point(self):
        from purification.optimizer import solve_optimal_condition

        sol = solve_optimal_condition(models.SuccessiveParams.symmetric(1.0, 1.0, 1.0, 1.0))[0]
        pred = predict_asymptotics(eig_biorthogonal(models.successive_cycle_v(sol.params)), DensityMatrix.maximally_mixed(4))
        assert abs(np.vdot(sol.report.target, pred.target)) ** 2 > 1 - 1e-8
        assert abs(pred.lambda0) == pytest.approx(1.0, abs=1e-9)


class TestCrosscheck:
    def test_diagonal(self):
        lam = np.array([0.95, 0.6, 0.2j])
        rep = crosscheck(np.diag(lam), DensityMatrix.maximally_mixed(3), 40)
        # from a mixed start the subleading weights decay as (|l_i| / |l_0|)^(2n), worst at n = 20
        tail = np.sum(np.abs(lam[1:] / lam[0]) ** 40)
        assert rep.yield_deviation == pytest.approx(tail, rel=1e-9)
        assert rep.fidelity_deviation == pytest.approx(tail / (1 + tail), rel=1e-9)

    def test_diagonal_large_gap(self):
        rep = crosscheck(np.diag([0.95, 0.05, 0.01]), DensityMatrix.maximally_mixed(3), 40)
        assert rep.fidelity_deviation < 1e-10
        assert rep.yield_deviation < 1e-10

    def test_two_qubit_gap_half(self):
        v = models.twoqubit_projected_v(GAP_HALF_TWO_QUBIT)
        rep = crosscheck(v, DensityMatrix.maximally_mixed(2), 60)
        assert rep.gap_ratio == pytest.approx(0.5, abs=1e-9)
        assert rep.fidelity_deviation < 1e-8

    def test_mediator_full_turn_yield(self):
        v = models.mediator_projected_v(MEDIATOR_FULL_TURN)
        pred = predict_asymptotics(eig_biorthogonal(v), DensityMatrix.maximally_mixed(4))
        g = pred.gap_ratio
        assert g < 0.95
        traj = iterate(v, DensityMatrix.maximally_mixed(4), 60, target=pred.target)
        for s in traj.steps[1:]:
            assert abs(s.yield_p - pred.prefactor) < 10 * g ** (2 * s.n) + 1e-12


def test_fidelity_convergence_bound():
    rng = np.random.default_rng(77)
    for k in range(30):
        dim = (2, 4)[k % 2]
        v = random_projected_unitary(rng, dim)
        pred = predict_asymptotics(eig_biorthogonal(v), DensityMatrix.maximally_mixed(dim))
        n_max = 80
        traj = iterate(v, DensityMatrix.maximally_mixed(dim), n_max, target=pred.target)
        assert traj.final.fidelity > 1 - 10 * pred.gap_ratio ** (2 * n_max) - 1e-9


def test_optimal_yield_floor():
    for v in (models.twoqubit_projected_v(OPTIMAL_TWO_QUBIT), models.mediator_projected_v(MEDIATOR_FULL_TURN)):
        dim = v.shape[0]
        pred = predict_asymptotics(eig_biorthogonal(v), DensityMatrix.maximally_mixed(dim))
        assert abs(pred.lambda0) == pytest.approx(1.0, abs=1e-9)
        traj = iterate(v, DensityMatrix.maximally_mixed(dim), 50, target=pred.target)
        for s in traj.steps:
            assert s.yield_p >= pred.prefactor - 10 * pred.gap_ratio**s.n


def test_initial_state_independence(rng):
    v = models.mediator_projected_v(MEDIATOR_FULL_TURN)
    target = bell_basis()["psi_minus"]
    for _ in range(20):
        traj = iterate(v, DensityMatrix.random(4, rng), 50, target=target, record_states=True)
        assert traj.final.fidelity > 1 - 1e-6
        assert concurrence(traj.final.rho) > 1 - 1e-6
