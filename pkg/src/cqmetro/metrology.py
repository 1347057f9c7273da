"""Quantum Fisher information estimators, precision bounds and speed limits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .num_core import (
    TOL,
    CQMError,
    EigenDecomposition,
    NonHermitianError,
    Operator,
    _amps,
    _check_dims,
    infidelity,
    variance,
)

__all__ = [
    "QFIEstimate",
    "BoundCurve",
    "UndefinedSpeedLimitError",
    "qfi_pure",
    "qfi_derivative_path",
    "qfi_overlap",
    "qfi_overlap_path",
    "qfi_spectral",
    "qfi_three_term",
    "qfi_upper_bound",
    "trajectory_bound",
    "qsl_general",
    "central_difference",
]

METHODS = ("PureStateDerivative", "OverlapFiniteDifference", "Spectral", "ThreeTermDecomposition")


class UndefinedSpeedLimitError(CQMError, ValueError):
    pass


@dataclass(frozen=True)
class QFIEstimate:
    """A QFI value with provenance.

    ``flags`` may contain ``"precision_floor"`` (value indistinguishable from
    zero at double precision), ``"clipped_negative"`` and ``"unstable"``
    (Richardson and raw estimates disagree by more than 0.1%).
    """

    value: float
    method: str
    delta_step: float | None = None
    components: tuple | None = None
    richardson: float | None = None
    flags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown QFI method {self.method!r}")

    def __float__(self):
        return float(self.value)

    @property
    def reliable(self) -> bool:
        return not ({"precision_floor", "unstable"} & self.flags)


def _finalize(raw: float, method: str, scale: float = 1.0, **kw) -> QFIEstimate:
    flags = set(kw.pop("flags", ()))
    value = float(raw)
    if value < 0:
        if value < -1e-9 * max(1.0, scale):
            raise ValueError(f"negative QFI {value:.3e}: inconsistent inputs")
        value = 0.0
        flags.add("clipped_negative")
    if value < TOL.qfi_floor:
        value = 0.0
        flags.add("precision_floor")
    return QFIEstimate(value, method, flags=frozenset(flags), **kw)


def qfi_pure(psi, dpsi) -> QFIEstimate:
    """``4 (<dpsi|dpsi> - |<dpsi|psi>|^2)`` for a normalized ``psi`` and the
    derivative ``dpsi`` of the state path."""
    v, dv = _amps(psi), _amps(dpsi)
    _check_dims(v.size, dv.size)
    a = np.vdot(dv, dv).real
    b = abs(np.vdot(dv, v)) ** 2
    return _finalize(4.0 * (a - b), "PureStateDerivative", scale=4.0 * a)


def central_difference(state_at: Callable, x: float, h: float) -> np.ndarray:
    """``(psi(x + h/2) - psi(x - h/2)) / h`` for a gauge-continuous state path."""
    return (_amps(state_at(x + 0.5 * h)) - _amps(state_at(x - 0.5 * h))) / h


def qfi_derivative_path(state_at: Callable, x: float, h: float) -> QFIEstimate:
    """:func:`qfi_pure` with the derivative taken by central differences."""
    est = qfi_pure(state_at(x), central_difference(state_at, x, h))
    return QFIEstimate(est.value, est.method, h, flags=est.flags)


def _overlap_raw(psi_minus, psi_plus, delta) -> tuple[float, float]:
    inf = infidelity(psi_minus, psi_plus)
    return 4.0 * inf / delta**2, inf


def qfi_overlap(psi_minus, psi_plus, delta: float, half_pair=None) -> QFIEstimate:
    """``(4/delta^2)(1 - |<psi_-|psi_+>|^2)`` for states at ``x -/+ delta/2``.

    The infidelity is evaluated without cancellation (see
    :func:`cqmetro.num_core.infidelity`). If ``half_pair`` holds the states at
    ``x -/+ delta/4``, the Richardson extrapolation
    ``(4 Q(delta/2) - Q(delta)) / 3`` is attached and the estimate is flagged
    ``"unstable"`` when it differs from the raw value by more than 0.1%.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    raw, inf = _overlap_raw(psi_minus, psi_plus, delta)
    flags = set()
    if inf < TOL.infidelity_floor:
        flags.add("precision_floor")
    rich = None
    if half_pair is not None:
        half, _ = _overlap_raw(half_pair[0], half_pair[1], 0.5 * delta)
        rich = (4.0 * half - raw) / 3.0
        ref = max(abs(rich), TOL.qfi_floor)
        if abs(rich - raw) > TOL.richardson_rel * ref:
            flags.add("unstable")
    return _finalize(raw, "OverlapFiniteDifference", delta_step=delta, richardson=rich, flags=flags)


def qfi_overlap_path(state_at: Callable, x: float, delta: float, richardson: bool = True) -> QFIEstimate:
    """Evaluate ``state_at`` at ``x -/+ delta/2`` (and ``x -/+ delta/4``) and
    return :func:`qfi_overlap`."""
    pm = state_at(x - 0.5 * delta)
    pp = state_at(x + 0.5 * delta)
    half = (state_at(x - 0.25 * delta), state_at(x + 0.25 * delta)) if richardson else None
    return qfi_overlap(pm, pp, delta, half)


def qfi_spectral(decomp: EigenDecomposition, dH: Operator) -> QFIEstimate:
    """``4 sum_{n>0} |<n|dH|0>|^2 / (E_n - E_0)^2`` for a non-degenerate ground state."""
    E = decomp.eigenvalues
    V = decomp.eigenvectors
    _check_dims(V.shape[0], dH.dim)
    if E.size > 1:
        gap = float(E[1] - E[0])
        if gap < TOL.degenerate_gap:
            from .dynamics import DegenerateSpectrumError

            raise DegenerateSpectrumError(f"ground-state gap {gap:.3e} below threshold", gap)
    col = V.conj().T @ (dH.entries @ V[:, 0])
    terms = np.abs(col[1:]) ** 2 / (E[1:] - E[0]) ** 2
    return _finalize(4.0 * float(np.sum(terms)), "Spectral")


def qfi_three_term(evolve_at: Callable, initial_at: Callable, x: float, delta: float) -> QFIEstimate:
    """Split the final-state QFI into dynamics, initial-state and cross parts.

    Parameters
    ----------
    evolve_at : callable
        ``evolve_at(x, psi)`` propagates ``psi`` with the parameter set to
        ``x`` (all controls fixed) and returns the final state. Must be linear
        in ``psi``.
    initial_at : callable
        ``initial_at(x)``: the parameter-dependent, gauge-continuous initial
        state.
    x, delta : float
        Working point and finite-difference step.

    Notes
    -----
    With ``a = (dU) psi0`` and ``b = U (d psi0)`` (both by central
    differences) and ``f = U psi0``::

        I_U     = 4 (<a|a> - |<f|a>|^2)
        I_psi0  = 4 (<b|b> - |<f|b>|^2)
        I_cross = 8 Re(<a|b> - <a|f><f|b>)

    The three add up to the QFI of the derivative ``a + b``. The overlap
    estimate on the fully composed states is attached as ``richardson`` for
    cross-checking (it is not an extrapolation here).
    """
    h = 0.5 * delta
    psi0 = _amps(initial_at(x))
    f = _amps(evolve_at(x, psi0))
    a = (_amps(evolve_at(x + h, psi0)) - _amps(evolve_at(x - h, psi0))) / delta
    dpsi0 = (_amps(initial_at(x + h)) - _amps(initial_at(x - h))) / delta
    b = _amps(evolve_at(x, dpsi0))
    fa, fb = np.vdot(f, a), np.vdot(f, b)
    i_u = 4.0 * (np.vdot(a, a).real - abs(fa) ** 2)
    i_0 = 4.0 * (np.vdot(b, b).real - abs(fb) ** 2)
    i_x = 8.0 * (np.vdot(a, b) - np.conj(fa) * fb).real
    total = i_u + i_0 + i_x
    composed = qfi_overlap(
        evolve_at(x - h, _amps(initial_at(x - h))),
        evolve_at(x + h, _amps(initial_at(x + h))),
        delta,
    )
    return _finalize(
        total,
        "ThreeTermDecomposition",
        scale=abs(i_u) + abs(i_0),
        delta_step=delta,
        components=(float(i_u), float(i_0), float(i_x)),
        richardson=composed.value,
    )


def qfi_upper_bound(psi0, H_omega: Operator, T: float) -> float:
    """``4 T^2 Var[H_omega]`` in ``psi0``."""
    if not H_omega.hermitian:
        raise NonHermitianError("H_omega must be Hermitian")
    return 4.0 * T**2 * max(0.0, variance(H_omega, psi0))


def trajectory_bound(states, H_omega: Operator, T: float) -> float:
    """``4 T^2 max_t Var[H_omega]`` over the rows of ``states``."""
    states = np.asarray(states)
    H = H_omega.entries
    hv = states @ H.T
    mean = np.einsum("ki,ki->k", states.conj(), hv).real
    sq = np.einsum("ki,ki->k", hv.conj(), hv).real
    return 4.0 * T**2 * float(np.max(np.maximum(sq - mean**2, 0.0)))


@dataclass(frozen=True)
class BoundCurve:
    """Reference precision limit ``evaluate(T, resources)``.

    ``SQL``: ``resources * T^2`` (resources = particle number; 1 for a qubit).
    ``HL``: ``8 T^2 (n^2 + n)`` with ``resources = <n>``.
    ``CriticalBound``: ``4 T^2 resources`` with ``resources`` the largest
    generator variance reachable by the protocol.
    """

    kind: str

    def __post_init__(self):
        if self.kind not in ("SQL", "HL", "CriticalBound"):
            raise ValueError(f"unknown bound {self.kind!r}")

    def evaluate(self, T, resources=1.0):
        T = np.asarray(T, dtype=float)
        if self.kind == "SQL":
            return resources * T**2
        if self.kind == "HL":
            return 8.0 * T**2 * (resources**2 + resources)
        return 4.0 * T**2 * resources


def qsl_general(H: Operator, psi0, psit) -> float:
    """Quantum speed limit between two states under ``H`` (hbar = 1).

    ``max(arccos|<psi0|psit>| / dE, (2/pi) arccos(|<psi0|psit>|^2) / <H - E_0>)``
    with ``dE`` the energy standard deviation in ``psi0`` and the mean energy
    measured from the ground energy of ``H``.
    """
    if not H.hermitian:
        raise NonHermitianError("H must be Hermitian")
    v0, vt = _amps(psi0), _amps(psit)
    _check_dims(v0.size, vt.size)
    ov = min(1.0, abs(np.vdot(v0, vt)))
    if ov == 1.0:
        return 0.0
    spread = math.sqrt(max(0.0, variance(H, v0)))
    e0 = float(np.linalg.eigvalsh(H.entries)[0])
    mean = float(np.vdot(v0, H.entries @ v0).real) - e0
    candidates = []
    if spread > TOL.qsl_denominator:
        candidates.append(math.acos(ov) / spread)
    if mean > TOL.qsl_denominator:
        candidates.append(2.0 / math.pi * math.acos(ov**2) / mean)
    if not candidates:
        raise UndefinedSpeedLimitError("energy spread and mean energy both vanish")
    return max(candidates)
