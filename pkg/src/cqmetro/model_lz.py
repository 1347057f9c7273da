"""Landau-Zener two-level model ``H = (delta/2) sx + (g/2) sz``."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import HamiltonianTerm, RampSchedule, TimeDependentHamiltonian
from .num_core import Basis, Operator, StateVector, eigh
from .quantum_ops import pauli

__all__ = [
    "LZParams",
    "lz_hamiltonian",
    "lz_ground_state",
    "lz_ground_state_printed",
    "lz_qfi_adiabatic",
    "lz_qsl_time",
    "lz_cd_term",
    "lz_h_omega",
    "lz_time_dependent_hamiltonian",
    "lz_default_ramp",
    "spin_down",
    "spin_up",
]

SX, SY, SZ = pauli("x"), pauli("y"), pauli("z")


@dataclass(frozen=True)
class LZParams:
    """Level splitting ``delta`` (the unknown), the controller's estimate
    ``delta_est`` of it, and the control field ``g``.

    ``delta_est`` defaults to ``delta`` at construction; :meth:`with_delta`
    moves only the true value, which is how parameter derivatives are taken.
    """

    delta: float
    delta_est: float | None = None
    g: float = 0.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.delta_est is None:
            object.__setattr__(self, "delta_est", float(self.delta))
        if not self.delta_est > 0:
            raise ValueError("delta_est must be positive")

    def with_delta(self, delta: float) -> "LZParams":
        return replace(self, delta=float(delta))

    def with_g(self, g: float) -> "LZParams":
        return replace(self, g=float(g))


def spin_up() -> StateVector:
    return StateVector.basis_state(2, 0, Basis.qubit())


def spin_down() -> StateVector:
    return StateVector.basis_state(2, 1, Basis.qubit())


def lz_hamiltonian(p: LZParams) -> Operator:
    return 0.5 * p.delta * SX + 0.5 * p.g * SZ


def lz_ground_state(p: LZParams) -> StateVector:
    """Lowest eigenvector from the numerical diagonalization."""
    return eigh(lz_hamiltonian(p)).state(0, Basis.qubit())


def lz_ground_state_printed(p: LZParams, swap_labels: bool = False) -> StateVector:
    """Closed-form ground state with coefficients
    ``((g - E)|down> + delta|up>) / norm``, ``E = sqrt(delta^2 + g^2)``.

    Read literally this tends to ``|up>`` for large positive ``g``, which is
    the excited state there; ``swap_labels=True`` exchanges the two
    coefficients and yields the actual ground state.
    """
    d, g = p.delta, p.g
    e = math.hypot(d, g)
    norm = math.sqrt(2 * g * (g - e) + 2 * d * d)
    c_down, c_up = (g - e) / norm, d / norm
    if swap_labels:
        c_down, c_up = c_up, c_down
    return StateVector.normalized([c_up, c_down], Basis.qubit())


def lz_qfi_adiabatic(p: LZParams) -> float:
    """Ground-state QFI with respect to delta: ``g^2 / (delta^2 + g^2)^2``."""
    return p.g**2 / (p.delta**2 + p.g**2) ** 2


def lz_qsl_time(p: LZParams, target_g: float) -> float:
    """Speed-limit time from ``|down>`` to the ground state at ``target_g``:
    ``(2/delta) arccos|<down|psi_t>|``."""
    target = lz_ground_state(p.with_g(target_g))
    ov = min(1.0, abs(np.vdot(spin_down().amplitudes, target.amplitudes)))
    return 2.0 / p.delta * math.acos(ov)


def lz_cd_term(p: LZParams, gdot: float) -> Operator:
    """``-(gdot * delta_est / (2 (delta_est^2 + g^2))) sy``. Built from the
    estimate, never the true splitting."""
    de = p.delta_est
    return (-(gdot * de) / (2.0 * (de**2 + p.g**2))) * SY


def lz_h_omega() -> Operator:
    """Generator multiplying delta: ``sx / 2``."""
    return 0.5 * SX


def lz_time_dependent_hamiltonian(p: LZParams, cd: bool = True) -> TimeDependentHamiltonian:
    """``(delta/2) sx + (g(t)/2) sz`` plus, optionally, the CD term at ``delta_est``."""
    delta, de = p.delta, p.delta_est
    terms = [
        HamiltonianTerm(0.5 * SX, lambda t, g, gd: np.full(np.shape(t), delta)),
        HamiltonianTerm(0.5 * SZ, lambda t, g, gd: g),
    ]
    if cd:
        terms.append(
            HamiltonianTerm(SY, lambda t, g, gd: -(gd * de) / (2.0 * (de**2 + g**2)), True)
        )
    return TimeDependentHamiltonian(tuple(terms), estimate=de, label="landau-zener")


def lz_default_ramp(delta_est: float, T: float, g0_factor: float = 500.0,
                    gf_factor: float = 1.0, exponent: float = 0.2) -> RampSchedule:
    """``g(t) = g0 - (g0 - gf)(t/T)^exponent`` with ``g0 = g0_factor * delta_est``
    and ``gf = gf_factor * delta_est``."""
    return RampSchedule.power_law(g0_factor * delta_est, gf_factor * delta_est, T, exponent)
