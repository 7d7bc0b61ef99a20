import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from purification import models
from purification.duality import (
    _brute_successive_v,
    _brute_twoqubit_v,
    _set_distance,
    pauli_coefficients,
    random_mediator,
    random_successive,
    random_twoqubit,
)
from purification.errors import InvalidParams
from purification.linalg import eig_biorthogonal
from purification.models import (
    MediatorParams,
    ModelConfig,
    SuccessiveParams,
    TwoQubitParams,
)
from purification.quantum import DOWN, UP, bell_basis, pauli_on


def is_hermitian(m):
    return np.allclose(m, m.conj().T, atol=1e-14)


class TestTwoQubit:
    def test_decoupled_spectrum(self):
        p = TwoQubitParams(1.0, 0.4, 0.0, 0.0, 1.0)
        h = models.twoqubit_hamiltonian(p)
        assert np.allclose(h, np.diag(np.diag(h)))
        assert sorted(np.diag(h).real) == pytest.approx([0, 0.4, 1.0, 1.4])

    def test_hermitian(self):
        assert is_hermitian(models.twoqubit_hamiltonian(TwoQubitParams(1, 2, 0.3, -0.7, 1)))

    def test_invalid(self):
        with pytest.raises(InvalidParams):
            TwoQubitParams(1, 1, 1, 1, -0.1)
        with pytest.raises(InvalidParams):
            TwoQubitParams(1, 1, math.nan, 1, 1)

    def test_coeffs_theta0(self):
        c0, c1, c2, c3 = models.twoqubit_coeffs(TwoQubitParams(1, 0.5, 0.3, 0.2, 1.7))
        assert c1 == 0 and c2 == 0

    def test_coeffs_zero_time(self):
        c = models.twoqubit_coeffs(TwoQubitParams(1, 0.5, 0.3, 0.2, 0.0, theta=0.6, phi=0.9))
        assert c == pytest.approx((1, 0, 0, 0), abs=1e-15)

    def test_coeffs_generic_point(self):
        p = TwoQubitParams(1.0, 0.5, 0.3, 0.2, 1.7, theta=0.6, phi=0.9)
        brute = pauli_coefficients(_brute_twoqubit_v(p))
        assert np.max(np.abs(np.array(models.twoqubit_coeffs(p)) - brute)) < 1e-10

    def test_coeffs_without_global_phase(self):
        p = TwoQubitParams(1.0, 0.5, 0.3, 0.2, 1.7, theta=0.6, phi=0.9)
        a = np.array(models.twoqubit_coeffs(p))
        b = np.array(models.twoqubit_coeffs(p, global_phase=False))
        assert np.allclose(a, b * np.exp(-0.5j * 1.5 * 1.7))

    def test_degenerate_limits(self):
        # omega_pm = 0 together with a vanishing coupling makes theta = 0
        p = TwoQubitParams(0.5, -0.5, 0.3, 0.0, 1.2, theta=0.4, phi=0.1)
        brute = pauli_coefficients(_brute_twoqubit_v(p))
        assert np.max(np.abs(np.array(models.twoqubit_coeffs(p)) - brute)) < 1e-12

    def test_theta0_abs_formulas(self):
        p = TwoQubitParams(1.0, 0.5, 0.3, 0.2, 1.7)
        lp, lm = models.twoqubit_theta0_eigenvalues(p)
        ap, am = models.twoqubit_theta0_abs_sq(p)
        assert abs(lp) ** 2 == pytest.approx(ap, abs=1e-14)
        assert abs(lm) ** 2 == pytest.approx(am, abs=1e-14)
        v = _brute_twoqubit_v(p)
        assert v[0, 0] == pytest.approx(lp, abs=1e-12)
        assert v[1, 1] == pytest.approx(lm, abs=1e-12)

    def test_theta0_h0_unimodular(self):
        for tau in (0.3, 1.1, 2.9):
            s = models.twoqubit_eigen(TwoQubitParams(0.8, 1.3, 0.6, 0.0, tau))
            assert abs(s.eigenvalues[0]) == pytest.approx(1.0, abs=1e-14)
            assert np.allclose(s.u(0), UP)

    def test_theta_half_pi_degenerate(self):
        s = models.twoqubit_eigen(TwoQubitParams(1.0, 0.5, 0.3, 0.2, 1.7, theta=math.pi / 2, phi=0.4))
        assert s.magnitudes[0] == pytest.approx(s.magnitudes[1], abs=1e-12)

    def test_optimal_point_kills_down(self):
        # frozen from the 4x4 exponential: <down|V|down> = cos(pi/2) - i 0 sin(pi/2) = 0
        p = TwoQubitParams(1.0, 1.0, 1.0, 0.0, math.pi / 2)
        assert p.theta_g == 2.0
        v = _brute_twoqubit_v(p)
        assert abs(v[1, 1]) < 1e-15
        _, am = models.twoqubit_theta0_abs_sq(p)
        assert abs(am) < 1e-15

    def test_eigen_matches_brute_force(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            p = random_twoqubit(rng)
            s = models.twoqubit_eigen(p)
            v = _brute_twoqubit_v(p)
            assert _set_distance(s.eigenvalues, np.linalg.eigvals(v)) < 1e-9
            assert s.biorthonormality_error() < 1e-9
            for n in range(2):
                assert np.linalg.norm(v @ s.u(n) - s.eigenvalues[n] * s.u(n)) < 1e-9

    def test_branch_flip_keeps_set(self):
        p = TwoQubitParams(0.3, 0.9, 0.5, 0.4, 2.2, theta=1.0, phi=2.0)
        c0, *_ = models.twoqubit_coeffs(p)
        lam = models.twoqubit_eigen(p).eigenvalues
        assert lam.sum() / 2 == pytest.approx(c0, abs=1e-13)


class TestMediator:
    p = MediatorParams(Omega=1.0, omega=2.0, g=0.4, h=0.15, tau=math.pi)

    def test_hermitian_and_symmetric(self):
        h = models.mediator_hamiltonian(self.p)
        assert is_hermitian(h)
        x = models.exchange_ab()
        assert np.allclose(x @ h, h @ x)
        parity = pauli_on(0, 3, 3) @ pauli_on(1, 3, 3) @ pauli_on(2, 3, 3)
        assert np.allclose(parity @ h, h @ parity)

    def test_singlet_energies(self):
        p = MediatorParams(Omega=0.7, omega=1.9, g=0.4, h=0.15, tau=1.0)
        h = models.mediator_hamiltonian(p)
        psi = bell_basis()["psi_minus"]
        up, down = np.kron(psi, UP), np.kron(psi, DOWN)
        assert np.allclose(h @ up, (p.Omega + p.omega) * up)
        # the singlet with C down carries energy Omega (one excitation in A+B)
        assert np.allclose(h @ down, p.Omega * down)

    def test_sector_matrices_verbatim(self):
        W, w, g, h = 0.7, 1.9, 0.4, 0.15
        p = MediatorParams(W, w, g, h, 1.0)
        printed_plus = np.array([[W + w, W, g + h], [W, W + w, -g + h], [g + h, -g + h, W]])
        printed_minus = np.array([[W, W, g + h], [W, W, g - h], [g + h, g - h, W + w]])
        plus, minus, anti = models.mediator_sector_states()
        ham = models.mediator_hamiltonian(p)
        assert np.allclose(plus.conj().T @ ham @ plus, printed_plus, atol=1e-14)
        assert np.allclose(minus.conj().T @ ham @ minus, printed_minus, atol=1e-14)
        s_plus, s_minus = models.mediator_sector_matrices(p)
        assert np.array_equal(s_plus, printed_plus) and np.array_equal(s_minus, printed_minus)

    def test_singlet_decouples_from_symmetric(self):
        plus, minus, anti = models.mediator_sector_states()
        sym = np.hstack([plus, minus])
        ham = models.mediator_hamiltonian(self.p)
        assert np.max(np.abs(anti.conj().T @ ham @ sym)) < 1e-14

    def test_sector_states_complete(self):
        basis = np.hstack(models.mediator_sector_states())
        assert np.allclose(basis.conj().T @ basis, np.eye(8))

    def test_sector_route_equals_direct(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            p = random_mediator(rng)
            assert np.allclose(models.mediator_projected_v(p), models.mediator_projected_v_direct(p), atol=1e-12)

    def test_generic_point_singlet_eigenvalue(self):
        v = models.mediator_projected_v_direct(self.p)
        psi = bell_basis()["psi_minus"]
        lam = np.exp(-1j * 3 * math.pi)
        assert models.mediator_lambda_psi_minus(self.p) == pytest.approx(lam, abs=1e-14)
        assert np.linalg.norm(v @ psi - lam * psi) < 1e-10

    def test_full_turn_unimodular(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            w = rng.uniform(0.3, 3)
            p = random_mediator(rng, tau=2 * math.pi / w, omega=w)
            assert abs(models.mediator_lambda_psi_minus(p)) == pytest.approx(1.0, abs=1e-12)

    def test_decoupled_is_diagonal_unimodular(self):
        p = MediatorParams(1.0, 2.0, 0.0, 0.0, 0.9, alpha=0.6, beta=0.8j)
        v = models.mediator_projected_v_direct(p)
        assert np.allclose(v, np.diag(np.diag(v)), atol=1e-15)
        # C picks up |alpha|^2 e^{-i w tau} + |beta|^2: not unimodular; A+B alone are
        p0 = MediatorParams(1.0, 2.0, 0.0, 0.0, 0.9)
        assert np.allclose(np.abs(np.diag(models.mediator_projected_v_direct(p0))), 1.0)

    def test_invalid_projector(self):
        with pytest.raises(InvalidParams):
            MediatorParams(1, 1, 1, 1, 1, alpha=1, beta=0.1)


class TestSuccessive:
    generic = SuccessiveParams(1.0, 0.7, 0.7, 1.3, 1.3, 0.8, 0.8)

    def test_zero_coupling_is_free(self):
        h0, ha, hb = models.successive_hamiltonians(SuccessiveParams(1.0, 0.0, 0.5, 1, 1, 1, 1))
        assert np.array_equal(ha, h0)
        assert not np.array_equal(hb, h0)

    def test_parity_conserved(self):
        # on the full register the mediator's sigma_3 joins the parity
        h0, ha, hb = models.successive_hamiltonians(self.generic)
        parity = pauli_on(0, 3, 3) @ pauli_on(1, 3, 3) @ pauli_on(2, 3, 3)
        for h in (h0, ha, hb):
            assert is_hermitian(h)
            assert np.allclose(parity @ h, h @ parity)

    def test_cycle_is_block_diagonal(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            _, _, leak = models.sector_blocks(models.successive_cycle_v(random_successive(rng)))
            assert leak < 1e-15

    def test_generic_point_elements(self):
        m, n, ph_p, ph_m = models.successive_sector_matrices(self.generic)
        plus, minus, _ = models.sector_blocks(_brute_successive_v(self.generic))
        assert np.max(np.abs(plus - ph_p * m.T)) < 1e-10
        assert np.max(np.abs(minus - ph_m * n.T)) < 1e-10

    def test_m22(self):
        p = SuccessiveParams(0.9, 0.3, 1.1, 0.7, 2.1, 0.4, 1.6)
        m, *_ = models.successive_sector_matrices(p)
        assert m[1, 1] == pytest.approx(math.cos(0.3 * 0.7) * math.cos(1.1 * 2.1))

    def test_zero_coupling_no_mixing(self):
        m, n, *_ = models.successive_sector_matrices(SuccessiveParams(1.0, 0, 0, 1, 2, 3, 4))
        assert m[0, 1] == m[1, 0] == n[0, 1] == n[1, 0] == 0

    def test_cycle_route_matches_brute(self):
        assert np.allclose(models.successive_cycle_v(self.generic), _brute_successive_v(self.generic), atol=1e-14)

    def test_symmetric_check_requires_symmetry(self):
        with pytest.raises(InvalidParams):
            models.successive_symmetric_check(SuccessiveParams(1, 1, 2, 1, 1, 1, 1))

    def test_constraint_flags(self):
        g = 1.0
        rep = models.successive_symmetric_check(SuccessiveParams.symmetric(1.0, g, math.pi / 2, 0.3))
        assert not rep.cos_sin_ok and not rep.constraints_ok
        rep = models.successive_symmetric_check(SuccessiveParams.symmetric(1.0, g, 1.0, 2 * math.pi - 1.0))
        assert not rep.chi_ok
        rep = models.successive_symmetric_check(self.generic)
        assert rep.constraints_ok

    def test_exchange_coupling_option(self):
        p = SuccessiveParams(1.0, 0.7, 0.7, 1.3, 1.3, 0.8, 0.8, coupling="exchange")
        h0, ha, _ = models.successive_hamiltonians(p)
        assert is_hermitian(ha) and not np.allclose(ha, h0)
        with pytest.raises(InvalidParams):
            SuccessiveParams(1, 1, 1, 1, 1, 1, 1, coupling="zz")


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_mediator_exchange_symmetry_of_v(seed):
    p = random_mediator(np.random.default_rng(seed))
    v = models.mediator_projected_v_direct(p)
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(swap @ v @ swap, v, atol=1e-12)


class TestDualities:
    """200 random points per model: closed forms against brute-force exponentials."""

    def test_twoqubit(self):
        rng = np.random.default_rng(101)
        for _ in range(200):
            p = random_twoqubit(rng)
            dev = np.abs(np.array(models.twoqubit_coeffs(p)) - pauli_coefficients(_brute_twoqubit_v(p)))
            assert dev.max() < 1e-9

    def test_mediator(self):
        rng = np.random.default_rng(102)
        psi = bell_basis()["psi_minus"]
        for _ in range(200):
            p = random_mediator(rng)
            v = models.mediator_projected_v_direct(p)
            assert np.linalg.norm(v @ psi - models.mediator_lambda_psi_minus(p) * psi) < 1e-9

    def test_successive(self):
        rng = np.random.default_rng(103)
        for _ in range(200):
            p = random_successive(rng)
            m, n, ph_p, ph_m = models.successive_sector_matrices(p)
            plus, minus, leak = models.sector_blocks(_brute_successive_v(p))
            assert max(np.max(np.abs(plus - ph_p * m.T)), np.max(np.abs(minus - ph_m * n.T)), leak) < 1e-9


class TestDispatch:
    def test_config_defaults(self):
        cfg = ModelConfig(TwoQubitParams(1, 1, 1, 0, 1))
        assert cfg.kind == "two_qubit"
        assert np.allclose(cfg.initial_state.mat, np.eye(2) / 2)
        assert models.target_dim(cfg.params) == 2
        assert models.target_dim(SuccessiveParams.symmetric(1, 1, 1, 1)) == 4

    def test_with_params(self):
        cfg = ModelConfig(TwoQubitParams(1, 1, 1, 0, 1)).with_params(tau=2.0)
        assert cfg.params.tau == 2.0

    def test_projected_operator_dispatch(self):
        for params in (TwoQubitParams(1, 1, 1, 0, 1), MediatorParams(1, 2, 0.3, 0.1, 1), SuccessiveParams.symmetric(1, 1, 1, 1)):
            cfg = ModelConfig(params)
            v = models.projected_operator(cfg)
            assert v.shape == (models.target_dim(params),) * 2
            s = models.spectrum(cfg)
            assert s.magnitudes[0] <= 1 + 1e-9

    def test_bad_rho_dim(self):
        from purification.quantum import DensityMatrix
        with pytest.raises(InvalidParams):
            ModelConfig(TwoQubitParams(1, 1, 1, 0, 1), DensityMatrix.maximally_mixed(4))

    def test_build_hamiltonian(self):
        hs = models.build_hamiltonian(ModelConfig(SuccessiveParams.symmetric(1, 1, 1, 1)))
        assert len(hs) == 3
        assert models.build_hamiltonian(ModelConfig(MediatorParams(1, 2, 0.3, 0.1, 1))).shape == (8, 8)
