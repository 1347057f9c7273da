"""Ramps, propagation and counter-diabatic synthesis."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from cqmetro import (
    DegenerateSpectrumError,
    FockSpace,
    HamiltonianTerm,
    LZParams,
    NonHermitianError,
    Operator,
    PropagationConfig,
    PropagationConvergenceError,
    QRMParams,
    RampSchedule,
    TimeDependentHamiltonian,
    bang_off_schedule,
    cd_spectral,
    eigh,
    fidelity,
    lz_cd_term,
    lz_ground_state,
    lz_hamiltonian,
    lz_time_dependent_hamiltonian,
    pauli,
    propagate,
    qrm_cd_term,
    qrm_excitation_energy,
    qrm_ground_state,
    qrm_sw_hamiltonian,
    qrm_time_dependent_hamiltonian,
    spin_down,
    trajectory_to_csv,
)
from cqmetro.model_qrm import _quadratic_ops

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


class TestRamps:
    @pytest.mark.parametrize(
        "ramp",
        [
            RampSchedule.power_law(1.0, 0.05, 7.0, 0.2),
            RampSchedule.sqrt_ramp(0.0, 0.9, 3.0),
            RampSchedule.power_law(0.2, 2.0, 1.0, 1.0),
        ],
    )
    def test_endpoints_and_derivative(self, ramp):
        assert ramp.value(0.0) == pytest.approx(ramp.g0, abs=1e-12)
        assert ramp.value(ramp.T) == pytest.approx(ramp.gf, abs=1e-12)
        t = np.linspace(0.05, 0.95, 19) * ramp.T
        h = 1e-6 * ramp.T
        fd = (ramp.value(t + h) - ramp.value(t - h)) / (2 * h)
        assert np.max(np.abs(ramp.derivative(t) - fd) / np.abs(fd)) < 1e-6

    def test_bang_off_values(self):
        ramp = RampSchedule.bang_off([(2.0, 1.0), (0.0, 3.0)])
        assert ramp.T == 4.0
        assert np.allclose(ramp.value([0.5, 1.5, 3.9]), [2.0, 0.0, 0.0])
        assert np.all(ramp.derivative([0.5, 2.0]) == 0)

    def test_time_grid_linearizes_power_law(self):
        ramp = RampSchedule.power_law(1.0, 0.0, 5.0, 0.2)
        edges = ramp.time_grid(10)
        assert edges[0] == 0 and edges[-1] == pytest.approx(5.0)
        assert np.allclose(np.diff(ramp.value(edges)), -0.1)

    def test_invalid(self):
        with pytest.raises(ValueError):
            RampSchedule.power_law(1, 0, 0.0)
        with pytest.raises(ValueError):
            RampSchedule.bang_off([(1.0, -1.0)])


class TestHamiltonian:
    def test_requires_hermitian_terms(self):
        with pytest.raises(NonHermitianError):
            TimeDependentHamiltonian((HamiltonianTerm(Operator(np.triu(np.ones((2, 2)))), lambda t, g, gd: g),))

    def test_complex_coefficient_rejected(self):
        H = TimeDependentHamiltonian((HamiltonianTerm(pauli("x"), lambda t, g, gd: 1j * g),))
        with pytest.raises(NonHermitianError):
            H.stack([0.0], [1.0], [0.0])

    def test_builder_hermitian_along_ramp(self):
        H = lz_time_dependent_hamiltonian(LZParams(0.05, 0.052), cd=True)
        ramp = RampSchedule.power_law(1.0, 0.05, 3.0)
        t = np.linspace(0.01, 3.0, 50)
        m = H.stack(t, ramp.value(t), ramp.derivative(t))
        assert np.max(np.abs(m - m.conj().transpose(0, 2, 1))) < 1e-12
        assert not H.without_cd().cd_enabled and H.cd_enabled


def lz_oracle(delta, delta_est, ramp, psi0, cd):
    """Integrate the Schroedinger equation in s with t = T s^(1/p)."""
    T, p = ramp.T, ramp.exponent

    def rhs(s, y):
        t = T * s ** (1 / p)
        dtds = T / p * s ** (1 / p - 1)
        g = ramp.g0 - (ramp.g0 - ramp.gf) * s
        dgds = -(ramp.g0 - ramp.gf)
        H = 0.5 * delta * SX * dtds + 0.5 * g * SZ * dtds
        if cd:
            # gdot dt = dg, so the CD term is smooth in s
            H = H - dgds * delta_est / (2 * (delta_est**2 + g**2)) * SY
        return -1j * H @ y

    sol = solve_ivp(rhs, (0, 1), np.asarray(psi0, complex), method="DOP853", rtol=1e-12, atol=1e-12)
    return sol.y[:, -1]


class TestPropagate:
    def test_rabi_half_period(self):
        d = 0.05
        H = TimeDependentHamiltonian((HamiltonianTerm(0.5 * pauli("x"), lambda t, g, gd: np.full(np.shape(t), d)),))
        ramp = RampSchedule.power_law(0.0, 0.0, math.pi / d, 1.0)
        out = propagate(H, ramp, spin_down(), PropagationConfig(steps=8, adaptive=False))
        assert np.allclose(out.state.amplitudes, [-1j, 0], atol=1e-12)

    @pytest.mark.parametrize("cd", [True, False])
    @pytest.mark.parametrize("TD", [0.1, 3.0])
    def test_lz_against_ode_oracle(self, cd, TD):
        d, de = 0.05, 0.051
        ramp = RampSchedule.power_law(20 * de, de, TD / d, 0.2)
        psi0 = lz_ground_state(LZParams(de, g=20 * de))
        res = propagate(lz_time_dependent_hamiltonian(LZParams(d, de), cd), ramp, psi0)
        ref = lz_oracle(d, de, ramp, psi0.amplitudes, cd)
        assert res.converged
        assert np.linalg.norm(res.state.amplitudes - ref) < 1e-5
        assert abs(np.linalg.norm(res.state.amplitudes) - 1) < 1e-9

    def test_lz_cd_reaches_target(self):
        d = 0.05
        ramp = RampSchedule.power_law(20 * d, d, 0.1 / d, 0.2)
        target = lz_ground_state(LZParams(d, g=d))
        cd = propagate(lz_time_dependent_hamiltonian(LZParams(d), True), ramp, spin_down())
        bare = propagate(lz_time_dependent_hamiltonian(LZParams(d), False), ramp, spin_down())
        assert fidelity(cd.state, target) >= 0.999
        # sudden limit: the state barely moves
        assert fidelity(bare.state, target) == pytest.approx(fidelity(spin_down(), target), abs=0.02)
        assert fidelity(spin_down(), target) == pytest.approx(0.854, abs=1e-3)

    def test_convergence_cap(self):
        d = 0.05
        ramp = RampSchedule.power_law(20 * d, d, 100 / d, 0.2)
        cfg = PropagationConfig(steps=16, max_steps=64)
        with pytest.raises(PropagationConvergenceError):
            propagate(lz_time_dependent_hamiltonian(LZParams(d), True), ramp, spin_down(), cfg)

    def test_trajectory_csv(self):
        d = 0.05
        H = lz_time_dependent_hamiltonian(LZParams(d), True)
        ramp = RampSchedule.power_law(20 * d, d, 2.0, 0.2)
        res = propagate(H, ramp, lz_ground_state(LZParams(d, g=20 * d)),
                        PropagationConfig(steps=64, adaptive=False, record_trajectory=True))
        assert np.allclose(res.trajectory.norms, 1, atol=1e-12)
        lines = trajectory_to_csv(res, H, ramp).splitlines()
        assert lines[0] == "t,g,fidelity_to_instantaneous_ground,norm"
        assert len(lines) == 65
        fids = [float(x.split(",")[2]) for x in lines[1:]]
        assert min(fids) > 0.9999

    def test_bang_off_segments_exact(self):
        sp = FockSpace(60)
        p = QRMParams.at_ratio(0.01, 100, 0.9)
        ramp, tau = bang_off_schedule(0.01, 100, p.g)
        res = propagate(qrm_time_dependent_hamiltonian(p, sp, cd=False), ramp, sp.vacuum())
        assert fidelity(res.state, qrm_ground_state(p, sp)) > 1 - 1e-10


class TestBangOffSchedule:
    def test_closed_forms(self):
        p = QRMParams.at_ratio(0.01, 100, 0.9)
        ramp, tau = bang_off_schedule(0.01, 100, p.g)
        (g1, t1), (g2, t2) = ramp.segments
        assert g1 == pytest.approx(math.sqrt(2.0))
        assert t1 == pytest.approx(41.518, abs=1e-3)
        assert t2 == pytest.approx(78.540, abs=1e-3) and g2 == 0
        assert tau == pytest.approx(120.058, abs=1e-3)

    def test_no_squeezing_needed(self):
        ramp, tau = bang_off_schedule(0.01, 100, 0.0)
        assert ramp.segments[0][1] == 0
        assert tau == pytest.approx(math.pi / 0.04)

    def test_supercritical_rejected(self):
        with pytest.raises(ValueError):
            bang_off_schedule(0.01, 100, 1.0)


class TestCDSynthesis:
    def test_lz_point(self):
        de = 0.05
        H = lz_hamiltonian(LZParams(de, g=de))
        cd = cd_spectral(H, Operator(-0.5 * SZ, hermitian=True))
        assert np.max(np.abs(cd.entries - SY / (4 * de))) < 1e-10

    def test_static_is_zero(self):
        H = lz_hamiltonian(LZParams(0.05, g=0.3))
        assert np.allclose(cd_spectral(H, Operator.zeros(2)).entries, 0)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-3, 3), st.floats(-10, 10))
    def test_lz_matches_closed_form(self, g, gd):
        p = LZParams(0.05, g=g)
        cd = cd_spectral(lz_hamiltonian(p), Operator(0.5 * gd * SZ, hermitian=True))
        assert np.max(np.abs(cd.entries - lz_cd_term(p, gd).entries)) < 1e-10

    def test_zero_diagonal_in_eigenbasis(self):
        p = QRMParams.at_ratio(0.01, 100, 0.6)
        sp = FockSpace(40)
        _, x2, _ = _quadratic_ops(sp)
        H = qrm_sw_hamiltonian(p, sp)
        d = eigh(H)
        cd = cd_spectral(H, (-2 * p.g * 0.3 / 400) * x2, d)
        V = d.eigenvectors
        assert np.max(np.abs(np.diag(V.conj().T @ cd.entries @ V))) < 1e-12

    def test_qrm_half_critical(self):
        sp = FockSpace(120)
        p = QRMParams.at_ratio(0.01, 100, 0.5)
        gd = 0.37
        _, x2, _ = _quadratic_ops(sp)
        H = qrm_sw_hamiltonian(p, sp)
        d = eigh(H)
        cd = cd_spectral(H, (-(2 * p.g * gd) / (4 * p.omega)) * x2, d)
        E = d.eigenvalues
        ladder_ok = np.abs(E - (E[0] + qrm_excitation_energy(p) * np.arange(sp.dim))) < 1e-10
        K = int(np.argmin(ladder_ok))  # first level off the analytic ladder
        assert K >= 60
        V = d.eigenvectors[:, :K]
        diff = V.conj().T @ (cd.entries - qrm_cd_term(p, gd, sp).entries) @ V
        assert np.max(np.abs(diff)) < 1e-8

    def test_degenerate_refused(self):
        with pytest.raises(DegenerateSpectrumError):
            cd_spectral(Operator.identity(3), Operator.identity(3))
