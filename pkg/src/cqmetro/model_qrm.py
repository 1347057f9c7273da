"""Quantum Rabi model in the Schrieffer-Wolff frame, boson sector only.

With the qubit frozen in its ``sigma_z = -1`` state the effective
Hamiltonian is ``delta n - (g^2/4 omega)(a + a^dag)^2``, whose normal-phase
ground state is the squeezed vacuum ``S(xi)|0>`` with
``xi = r e^{i pi}``, ``r = -ln(1 - (g/g_c)^2) / 4`` and ``g_c = sqrt(delta omega)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import HamiltonianTerm, TimeDependentHamiltonian
from .num_core import CQMError, Operator, StateVector
from .quantum_ops import (
    FockSpace,
    SqueezeParams,
    TruncationLeakageError,
    ladder,
    squeezed_vacuum,
    top_population,
)

__all__ = [
    "QRMParams",
    "CriticalCouplingError",
    "qrm_sw_hamiltonian",
    "qrm_squeeze_amplitude",
    "qrm_squeeze_params",
    "qrm_ground_state",
    "qrm_ground_energy",
    "qrm_excitation_energy",
    "qrm_mean_photon",
    "qrm_qfi_critical_approx",
    "qrm_qfi_exact",
    "qrm_cd_term",
    "qrm_hl_curve",
    "qrm_h_omega",
    "qrm_time_dependent_hamiltonian",
    "with_adaptive_truncation",
    "even_sector",
    "restrict_even",
    "embed_even",
    "DEFAULT_TRUNCATION",
]

DEFAULT_TRUNCATION = 120


class CriticalCouplingError(CQMError, ValueError):
    pass


@dataclass(frozen=True)
class QRMParams:
    """Boson frequency ``delta`` (the unknown), qubit splitting ``omega``,
    coupling ``g`` and the controller's estimate ``delta_est``."""

    delta: float
    omega: float
    g: float = 0.0
    delta_est: float | None = None

    def __post_init__(self):
        if not (self.delta > 0 and self.omega > 0):
            raise ValueError("delta and omega must be positive")
        if self.g < 0:
            raise ValueError("coupling g must be non-negative")
        if self.delta_est is None:
            object.__setattr__(self, "delta_est", float(self.delta))
        if not self.delta_est > 0:
            raise ValueError("delta_est must be positive")
        if self.delta / self.omega > 0.01:
            warnings.warn(
                f"delta/omega = {self.delta / self.omega:g} is not small; "
                "the Schrieffer-Wolff reduction is inaccurate",
                stacklevel=2,
            )

    @property
    def gc(self) -> float:
        return math.sqrt(self.delta * self.omega)

    @property
    def gc_est(self) -> float:
        return math.sqrt(self.delta_est * self.omega)

    @property
    def coupling_ratio(self) -> float:
        return self.g / self.gc

    def with_delta(self, delta: float) -> "QRMParams":
        return replace(self, delta=float(delta))

    def with_g(self, g: float) -> "QRMParams":
        return replace(self, g=float(g))

    @classmethod
    def at_ratio(cls, delta, omega, ratio, delta_est=None) -> "QRMParams":
        return cls(delta, omega, ratio * math.sqrt(delta * omega), delta_est)


def _require_normal_phase(p: QRMParams):
    if not p.g < p.gc:
        raise CriticalCouplingError(f"g={p.g} must be below g_c={p.gc} (normal phase)")


def _quadratic_ops(space: FockSpace):
    a, adag, n = ladder(space)
    A = a.entries
    a2 = A @ A
    # (a + a^dag)^2 written out so the top Fock level carries no truncation artifact
    x2 = a2 + a2.T + 2 * n.entries + np.eye(space.dim)
    squeeze = 1j * (a2.T - a2)
    return n, Operator(x2, hermitian=True), Operator(squeeze, hermitian=True)


def qrm_sw_hamiltonian(p: QRMParams, space: FockSpace, allow_supercritical: bool = False) -> Operator:
    """``delta a^dag a - (g^2 / 4 omega)(a^dag + a)^2`` on ``space``.

    ``allow_supercritical`` admits ``g >= g_c`` for pulse Hamiltonians such as
    the bang step at ``g = sqrt(2 delta omega)``.
    """
    if not allow_supercritical:
        _require_normal_phase(p)
    n, x2, _ = _quadratic_ops(space)
    return p.delta * n - (p.g**2 / (4.0 * p.omega)) * x2


def qrm_squeeze_amplitude(p: QRMParams) -> float:
    _require_normal_phase(p)
    return -0.25 * math.log1p(-(p.g / p.gc) ** 2)


def qrm_squeeze_params(p: QRMParams) -> SqueezeParams:
    """Squeezing of the ground state: amplitude ``r`` and phase ``pi``
    (long axis along the real Husimi axis)."""
    return SqueezeParams(qrm_squeeze_amplitude(p), math.pi)


def qrm_ground_state(p: QRMParams, space: FockSpace) -> StateVector:
    """Analytic ground state ``S(r e^{i pi})|0>``."""
    _require_normal_phase(p)
    r = qrm_squeeze_amplitude(p)
    if r == 0:
        return space.vacuum()
    return squeezed_vacuum(space, SqueezeParams(r, math.pi))


def qrm_ground_energy(p: QRMParams) -> float:
    """``(delta/2)(sqrt(1 - (g/g_c)^2) - 1)``."""
    _require_normal_phase(p)
    return 0.5 * p.delta * (math.sqrt(1.0 - (p.g / p.gc) ** 2) - 1.0)


def qrm_mean_photon(p: QRMParams) -> float:
    return math.sinh(qrm_squeeze_amplitude(p)) ** 2


def qrm_qfi_critical_approx(p: QRMParams) -> float:
    """Near-critical QFI ``1 / (32 delta^2 (1 - g/g_c)^2)``."""
    _require_normal_phase(p)
    return 1.0 / (32.0 * p.delta**2 * (1.0 - p.g / p.gc) ** 2)


def qrm_qfi_exact(p: QRMParams) -> float:
    """Ground-state QFI ``u^2 / (8 delta^2 (1 - u)^2)`` with ``u = (g/g_c)^2``.

    Follows from ``2 (d r / d delta)^2`` along the real squeezing path.
    """
    _require_normal_phase(p)
    u = (p.g / p.gc) ** 2
    return u**2 / (8.0 * p.delta**2 * (1.0 - u) ** 2)


def qrm_cd_term(p: QRMParams, gdot: float, space: FockSpace) -> Operator:
    """``i (g gdot / (4 (g_c_est^2 - g^2))) (a^dag^2 - a^2)``.

    The critical coupling comes from the estimate ``delta_est``.
    """
    gce2 = p.gc_est**2
    if (gce2 - p.g**2) / gce2 < 1e-6:
        raise CriticalCouplingError(
            f"g={p.g} too close to the estimated critical coupling {p.gc_est}"
        )
    _, _, squeeze = _quadratic_ops(space)
    return (p.g * gdot / (4.0 * (gce2 - p.g**2))) * squeeze


def qrm_hl_curve(n_mean, T):
    """Heisenberg-limit reference ``8 T^2 (n^2 + n)``."""
    if np.any(np.asarray(n_mean) < 0) or np.any(np.asarray(T) < 0):
        raise ValueError("n_mean and T must be non-negative")
    return 8.0 * np.asarray(T) ** 2 * (np.asarray(n_mean) ** 2 + np.asarray(n_mean))


def qrm_h_omega(space: FockSpace) -> Operator:
    """Generator multiplying delta: the number operator."""
    return ladder(space)[2]


def even_sector(space: FockSpace) -> np.ndarray:
    """Indices of the even Fock levels ``|0>, |2>, ...``."""
    return np.arange(0, space.dim, 2)


def restrict_even(op: Operator, space: FockSpace) -> Operator:
    """Block of a parity-conserving operator on the even Fock levels."""
    idx = even_sector(space)
    return Operator(op.entries[np.ix_(idx, idx)], hermitian=op.hermitian)


def embed_even(vec, space: FockSpace) -> StateVector:
    """Lift an even-sector amplitude vector back to the full Fock space."""
    out = np.zeros(space.dim, dtype=complex)
    out[even_sector(space)] = np.asarray(vec, dtype=complex).reshape(-1)
    return StateVector(out, space.basis)


def qrm_time_dependent_hamiltonian(p: QRMParams, space: FockSpace, cd: bool = True,
                                   even: bool = False) -> TimeDependentHamiltonian:
    """``delta n - (g(t)^2 / 4 omega)(a + a^dag)^2`` plus optionally the CD term
    built from ``delta_est``.

    Every term changes the photon number by 0 or 2, so with ``even=True`` the
    Hamiltonian acts on the even Fock levels only (half the dimension); pair
    it with :func:`embed_even` for states started in the vacuum.
    """
    delta, omega, gce2 = p.delta, p.omega, p.gc_est**2
    n, x2, squeeze = _quadratic_ops(space)
    if even:
        n, x2, squeeze = (restrict_even(o, space) for o in (n, x2, squeeze))
    terms = [
        HamiltonianTerm(n, lambda t, g, gd: np.full(np.shape(t), delta)),
        HamiltonianTerm(x2, lambda t, g, gd: -(np.asarray(g) ** 2) / (4.0 * omega)),
    ]
    if cd:
        terms.append(
            HamiltonianTerm(squeeze, lambda t, g, gd: g * gd / (4.0 * (gce2 - np.asarray(g) ** 2)), True)
        )
    return TimeDependentHamiltonian(tuple(terms), estimate=p.delta_est, label="rabi-sw")


def with_adaptive_truncation(build, space: FockSpace, max_truncation: int = 1024):
    """Call ``build(space)`` and double the truncation until the returned
    state (or every state in a returned tuple) has top-decile population
    below the leakage tolerance.

    Returns ``(result, space)`` with the space actually used.
    """
    from .num_core import TOL

    while True:
        try:
            result = build(space)
        except TruncationLeakageError:
            result = None
        if result is not None:
            states = result if isinstance(result, (tuple, list)) else (result,)
            leak = max(top_population(s) for s in states)
            if leak <= TOL.leakage:
                return result, space
        if 2 * space.dim > max_truncation:
            raise TruncationLeakageError(
                f"leakage persists up to truncation {space.dim}", suggested_truncation=2 * space.dim
            )
        space = space.doubled()


def qrm_excitation_energy(p: QRMParams) -> float:
    """Level spacing ``delta sqrt(1 - (g/g_c)^2)`` of the normal-phase spectrum."""
    _require_normal_phase(p)
    return p.delta * math.sqrt(1.0 - (p.g / p.gc) ** 2)
