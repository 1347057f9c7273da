"""Tests for the dense linear-algebra core."""
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from cqmetro import (
    TOL,
    Basis,
    DimensionMismatchError,
    NonHermitianError,
    NormalizationError,
    Operator,
    StateVector,
    eigh,
    expectation,
    expm_apply,
    expm_operator,
    fidelity,
    infidelity,
    overlap,
    pauli,
    variance,
)
from cqmetro.quantum_ops import FockSpace, ladder

UP = StateVector.basis_state(2, 0, Basis.qubit())
DOWN = StateVector.basis_state(2, 1, Basis.qubit())


def random_hermitian(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return Operator(m + m.conj().T, hermitian=True)


def random_state(rng, d):
    return StateVector.normalized(rng.normal(size=d) + 1j * rng.normal(size=d))


class TestContainers:
    def test_state_requires_unit_norm(self):
        with pytest.raises(NormalizationError):
            StateVector(np.array([1.0, 1.0]))

    def test_state_dim_matches_basis(self):
        with pytest.raises(DimensionMismatchError):
            StateVector(np.array([1.0, 0.0]), Basis.fock(3))
        assert Basis.qubit().dim == 2
        assert Basis.fock(7).dim == 7

    def test_hermitian_flag_is_checked(self):
        with pytest.raises(NonHermitianError):
            Operator(np.array([[0, 1], [0, 0]]), hermitian=True)

    def test_hermitian_tolerance_scales_with_magnitude(self):
        m = np.array([[1e6, 1.0], [1.0 + 1e-9, 0.0]])
        Operator(m, hermitian=True)

    def test_operator_algebra(self):
        x, z = pauli("x"), pauli("z")
        assert (x + z).hermitian
        assert np.allclose((x @ z).entries, -1j * pauli("y").entries)
        assert np.allclose((2 * x - x).entries, x.entries)
        assert not (1j * x).hermitian
        with pytest.raises(DimensionMismatchError):
            x + Operator.identity(3)


class TestEigh:
    def test_pauli_z_spectrum(self):
        d = eigh(pauli("z"))
        assert np.allclose(d.eigenvalues, [-1, 1])

    def test_lz_spectrum(self):
        H = 0.025 * pauli("x") + 0.025 * pauli("z")
        assert np.allclose(eigh(H).eigenvalues, [-0.035355339, 0.035355339], atol=1e-9)

    def test_identity(self):
        d = eigh(Operator.identity(4))
        assert np.allclose(d.eigenvalues, 1)
        assert np.allclose(d.eigenvectors.conj().T @ d.eigenvectors, np.eye(4))

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianError):
            eigh(Operator(np.array([[0, 1], [0, 0]], dtype=complex)))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 12), st.integers(0, 2**31))
    def test_residual_and_phase_convention(self, d, seed):
        rng = np.random.default_rng(seed)
        A = random_hermitian(rng, d)
        dec = eigh(A)
        V = dec.eigenvectors
        assert np.all(np.diff(dec.eigenvalues) >= 0)
        resid = A.entries @ V - V * dec.eigenvalues
        assert np.max(np.abs(resid)) < TOL.eigen_residual * max(1, np.abs(A.entries).max())
        k = np.argmax(np.abs(V), axis=0)
        lead = V[k, np.arange(d)]
        assert np.allclose(lead.imag, 0, atol=1e-12) and np.all(lead.real > 0)
        assert np.allclose(dec.reconstruct(), A.entries, atol=1e-9)


class TestExponential:
    def test_half_period_rotation(self):
        out = expm_apply(pauli("x"), -1j * np.pi / 2, DOWN)
        assert np.allclose(out.amplitudes, [-1j, 0])

    def test_zero_scale(self):
        psi = StateVector.normalized([1, 2j, 3])
        A = Operator(np.arange(9).reshape(3, 3))
        assert np.allclose(expm_apply(A, 0.0, psi).amplitudes, psi.amplitudes)

    def test_number_operator_full_turn(self):
        n = ladder(FockSpace(5))[2]
        two = FockSpace(5).number_state(2)
        assert np.allclose(expm_apply(n, -1j * np.pi, two).amplitudes, two.amplitudes)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 10), st.floats(-5, 5), st.integers(0, 2**31))
    def test_against_scipy(self, d, t, seed):
        rng = np.random.default_rng(seed)
        A = random_hermitian(rng, d)
        psi = random_state(rng, d)
        ref = scipy.linalg.expm(-1j * t * A.entries) @ psi.amplitudes
        out = expm_apply(A, -1j * t, psi)
        assert np.allclose(out.amplitudes, ref, atol=1e-9)
        assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-10

    def test_non_hermitian_falls_back(self):
        A = Operator(np.array([[0, 1], [0, 0]], dtype=complex))
        assert np.allclose(expm_operator(A, 2.0).entries, [[1, 2], [0, 1]])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            expm_apply(pauli("x"), 1.0, FockSpace(3).vacuum())


class TestFidelityAndMoments:
    def test_basic_fidelities(self):
        assert fidelity(DOWN, DOWN) == pytest.approx(1)
        assert fidelity(DOWN, UP) == pytest.approx(0)
        gs = eigh(0.025 * pauli("x") + 0.025 * pauli("z")).state(0)
        assert fidelity(DOWN, gs) == pytest.approx(np.cos(np.pi / 8) ** 2, abs=1e-6)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 8), st.integers(0, 2**31))
    def test_symmetry_and_infidelity(self, d, seed):
        rng = np.random.default_rng(seed)
        a, b = random_state(rng, d), random_state(rng, d)
        assert fidelity(a, b) == pytest.approx(fidelity(b, a), abs=1e-14)
        assert 0 <= fidelity(a, b) <= 1
        assert infidelity(a, b) == pytest.approx(1 - fidelity(a, b), abs=1e-12)
        assert abs(overlap(a, b)) ** 2 == pytest.approx(fidelity(a, b), abs=1e-14)

    def test_infidelity_resolves_tiny_angles(self):
        # 1 - |<a|b>|^2 = sin^2(eps) is far below double-precision cancellation
        eps = 1e-11
        a = StateVector.normalized([1, 0])
        b = StateVector.normalized([np.cos(eps), np.sin(eps)])
        assert infidelity(a, b) == pytest.approx(np.sin(eps) ** 2, rel=1e-6)

    def test_expectation_and_variance(self):
        assert expectation(pauli("z"), DOWN) == pytest.approx(-1)
        assert variance(pauli("x"), DOWN) == pytest.approx(1)
        assert variance(pauli("z"), DOWN) == pytest.approx(0, abs=1e-15)
        with pytest.raises(DimensionMismatchError):
            variance(pauli("x"), FockSpace(3).vacuum())
