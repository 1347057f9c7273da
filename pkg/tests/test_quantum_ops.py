"""Ladder operators, squeezing, coherent states and the Husimi function."""
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammaln

from cqmetro import (
    FockSpace,
    SqueezeParams,
    TruncationLeakageError,
    coherent_state,
    expectation,
    fidelity,
    husimi_grid,
    husimi_q,
    husimi_to_csv,
    ladder,
    pauli,
    quadrature_covariance,
    quadrature_variance,
    squeeze_axis_angle,
    squeeze_operator,
    squeezed_vacuum,
)


def squeezed_vacuum_oracle(N, r, phi):
    """Closed-form Fock amplitudes of S(r e^{i phi})|0>."""
    c = np.zeros(N, dtype=complex)
    for m in range(0, N // 2 + N % 2):
        if 2 * m >= N:
            break
        logmag = 0.5 * gammaln(2 * m + 1) - gammaln(m + 1) - m * math.log(2)
        c[2 * m] = (-np.exp(1j * phi) * np.tanh(r)) ** m * np.exp(logmag) / np.sqrt(np.cosh(r))
    return c


class TestLadder:
    def test_matrix_elements(self):
        sp = FockSpace(6)
        a, adag, n = ladder(sp)
        three = sp.number_state(3).amplitudes
        assert np.allclose(n.entries @ three, 3 * three)
        assert np.allclose(a.entries @ sp.vacuum().amplitudes, 0)
        assert adag.entries[1, 0] == pytest.approx(1)

    def test_commutator_on_lower_levels(self):
        a, adag, _ = ladder(FockSpace(10))
        comm = a.entries @ adag.entries - adag.entries @ a.entries
        assert np.allclose(comm[:9, :9], np.eye(9))

    def test_truncation_minimum(self):
        with pytest.raises(ValueError):
            FockSpace(1)

    def test_pauli(self):
        assert np.allclose(pauli("x").entries @ pauli("x").entries, np.eye(2))
        with pytest.raises(ValueError):
            pauli("w")


class TestSqueezing:
    def test_zero_is_identity(self):
        assert np.allclose(squeeze_operator(FockSpace(8), SqueezeParams(0.0)).entries, np.eye(8))

    @pytest.mark.parametrize("r,phi", [(0.41518, np.pi), (0.2, 0.0), (0.6, 1.1)])
    def test_matches_closed_form(self, r, phi):
        psi = squeezed_vacuum(FockSpace(80), SqueezeParams(r, phi))
        ref = squeezed_vacuum_oracle(80, r, phi)
        assert fidelity(psi, ref / np.linalg.norm(ref)) > 1 - 1e-12

    def test_mean_photon_sinh2(self):
        sp = FockSpace(60)
        r = -np.log(0.19) / 4
        psi = squeezed_vacuum(sp, SqueezeParams(r, np.pi))
        assert expectation(ladder(sp)[2], psi).real == pytest.approx(np.sinh(r) ** 2, abs=1e-8)
        assert np.sinh(r) ** 2 == pytest.approx(0.18252, abs=1e-5)

    @pytest.mark.parametrize("r,block", [(0.2, 60), (0.4, 30)])
    def test_bogoliubov_transform(self, r, block):
        # stronger squeezing spreads the block edge towards the truncation,
        # so the checked block shrinks with r
        sp = FockSpace(120)
        phi = 0.7
        S = squeeze_operator(sp, SqueezeParams(r, phi)).entries
        a, adag, _ = ladder(sp)
        lhs = S.conj().T @ a.entries @ S
        rhs = a.entries * np.cosh(r) - adag.entries * np.exp(1j * phi) * np.sinh(r)
        assert np.max(np.abs(lhs[:block, :block] - rhs[:block, :block])) < 1e-8

    def test_against_scipy_expm(self):
        sp = FockSpace(40)
        xi = 0.3 * np.exp(0.4j)
        a = ladder(sp)[0].entries
        ref = scipy.linalg.expm(0.5 * (np.conj(xi) * a @ a - xi * a.T @ a.T))
        out = squeeze_operator(sp, SqueezeParams(0.3, 0.4)).entries
        assert np.allclose(out, ref, atol=1e-10)

    def test_unitary(self):
        S = squeeze_operator(FockSpace(50), SqueezeParams(0.5, 2.0)).entries
        assert np.allclose(S.conj().T @ S, np.eye(50), atol=1e-10)

    def test_leakage_reported(self):
        with pytest.raises(TruncationLeakageError) as err:
            squeeze_operator(FockSpace(10), SqueezeParams(1.5))
        assert err.value.suggested_truncation == 20

    def test_phase_folding(self):
        assert SqueezeParams(0.1, -np.pi).phi == pytest.approx(np.pi)
        assert SqueezeParams(0.1, 3 * np.pi).phi == pytest.approx(np.pi)
        with pytest.raises(ValueError):
            SqueezeParams(-0.1)


class TestCoherent:
    def test_vacuum(self):
        assert np.allclose(coherent_state(FockSpace(10), 0).amplitudes, FockSpace(10).vacuum().amplitudes)

    def test_poisson_moments(self):
        sp = FockSpace(40)
        psi = coherent_state(sp, 1.0)
        a, _, n = ladder(sp)
        assert expectation(n, psi).real == pytest.approx(1, abs=1e-8)
        assert abs(fidelity(sp.vacuum(), coherent_state(sp, 2.0)) - np.exp(-4)) < 1e-10

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-2.5, 2.5), st.floats(-2.5, 2.5))
    def test_mean_field(self, x, y):
        sp = FockSpace(60)
        alpha = complex(x, y)
        psi = coherent_state(sp, alpha)
        a = ladder(sp)[0]
        assert abs(expectation(a, psi) - alpha) < 1e-8

    def test_leakage(self):
        with pytest.raises(TruncationLeakageError):
            coherent_state(FockSpace(10), 3.0)


class TestHusimi:
    def test_vacuum_values(self):
        vac = FockSpace(30).vacuum()
        q = husimi_q(vac, np.array([0, 2.0]))
        assert q[0] == pytest.approx(1 / np.pi)
        assert q[1] == pytest.approx(np.exp(-4) / np.pi, rel=1e-10)

    def test_bounded_and_normalized(self):
        psi = squeezed_vacuum(FockSpace(60), SqueezeParams(0.41518, np.pi))
        re, im, alpha = husimi_grid(6.0, 241)
        q = husimi_q(psi, alpha)
        assert q.min() >= 0 and q.max() <= 1 / np.pi + 1e-15
        da = (re[0, 1] - re[0, 0]) ** 2
        assert q.sum() * da == pytest.approx(1, abs=1e-6)

    def test_squeezed_orientation(self):
        # phase pi: anti-squeezed along the real axis
        r = 0.4152
        psi = squeezed_vacuum(FockSpace(60), SqueezeParams(r, np.pi))
        xs = np.linspace(0.5, 2.0, 4)
        assert np.all(husimi_q(psi, xs) > husimi_q(psi, 1j * xs))
        cov = quadrature_covariance(psi)
        assert cov[0, 0] / cov[1, 1] == pytest.approx(np.exp(4 * r), rel=1e-8)
        assert squeeze_axis_angle(psi) == pytest.approx(0, abs=1e-10)
        assert quadrature_variance(psi, np.pi / 2) == pytest.approx(0.5 * np.exp(-2 * r), rel=1e-8)

    def test_leaky_state_rejected(self):
        psi = FockSpace(10).number_state(9)
        with pytest.raises(TruncationLeakageError):
            husimi_q(psi, np.array([0.0]))

    def test_csv_layout(self):
        re, im, alpha = husimi_grid(1.0, 3)
        text = husimi_to_csv(re, im, husimi_q(FockSpace(10).vacuum(), alpha))
        lines = text.split("\n")
        assert lines[0] == "re_alpha,im_alpha,q_value"
        assert len(lines) == 11 and lines[-1] == ""
        assert lines[5].startswith("0,0,0.318309886184")
