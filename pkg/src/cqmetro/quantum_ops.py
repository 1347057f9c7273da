"""Qubit and single-mode bosonic operators, squeezed and coherent states,
and the Husimi Q function."""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .num_core import (
    TOL,
    Basis,
    CQMError,
    Operator,
    StateVector,
    expm_operator,
)

__all__ = [
    "FockSpace",
    "SqueezeParams",
    "TruncationLeakageError",
    "pauli",
    "ladder",
    "squeeze_operator",
    "squeezed_vacuum",
    "coherent_state",
    "husimi_q",
    "husimi_grid",
    "husimi_to_csv",
    "top_population",
    "quadrature_covariance",
    "quadrature_variance",
    "squeeze_axis_angle",
]


class TruncationLeakageError(CQMError, ValueError):
    """Population reached the top of the truncated Fock space."""

    def __init__(self, message, suggested_truncation=None):
        super().__init__(message)
        self.suggested_truncation = suggested_truncation


@dataclass(frozen=True)
class FockSpace:
    """Truncated single-mode Fock space spanned by ``|0>, ..., |N-1>``."""

    truncation: int

    def __post_init__(self):
        if int(self.truncation) < 2:
            raise ValueError("Fock truncation must be at least 2")
        object.__setattr__(self, "truncation", int(self.truncation))

    @property
    def dim(self) -> int:
        return self.truncation

    @property
    def basis(self) -> Basis:
        return Basis.fock(self.truncation)

    def vacuum(self) -> StateVector:
        return self.number_state(0)

    def number_state(self, n: int) -> StateVector:
        return StateVector.basis_state(self.dim, n, self.basis)

    def doubled(self) -> "FockSpace":
        return FockSpace(2 * self.truncation)


@dataclass(frozen=True)
class SqueezeParams:
    """Complex squeezing parameter ``xi = r exp(i phi)``.

    The squeeze operator follows ``S(xi) = exp((xi^* a^2 - xi a^dag^2) / 2)``,
    so that ``S^dag a S = a cosh r - a^dag e^{i phi} sinh r`` and the
    quadrature at angle ``phi / 2`` is the squeezed one.
    """

    r: float
    phi: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("squeezing amplitude must be non-negative")
        # fold phi into (-pi, pi]
        phi = float(np.angle(np.exp(1j * self.phi)))
        if phi == -np.pi:
            phi = np.pi
        object.__setattr__(self, "phi", phi)

    @property
    def xi(self) -> complex:
        return self.r * np.exp(1j * self.phi)


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "i": np.eye(2, dtype=complex),
}


def pauli(axis: str) -> Operator:
    """Pauli matrix in the basis ``(|up>, |down>)``; ``sigma_z|up> = |up>``."""
    key = axis.lower()
    if key not in _PAULI:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    return Operator(_PAULI[key], hermitian=True)


def ladder(space: FockSpace):
    """Annihilation, creation and number operators on ``space``.

    Returns
    -------
    a, adag, n : Operator
    """
    if not isinstance(space, FockSpace):
        space = FockSpace(space)
    N = space.dim
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1)
    n = np.diag(np.arange(N, dtype=float))
    return Operator(a), Operator(a.T), Operator(n, hermitian=True)


def top_population(psi, fraction: float = 0.1) -> float:
    """Population of the top ``fraction`` of Fock levels (at least two levels)."""
    amps = np.asarray(psi, dtype=complex).reshape(-1)
    N = amps.size
    # at least two levels, so parity-structured states cannot hide
    start = max(0, min(N - 2, int(np.floor((1.0 - fraction) * N))))
    return float(np.sum(np.abs(amps[start:]) ** 2))


def _squeeze_generator(space: FockSpace, xi: complex) -> Operator:
    # i * (xi^* a^2 - xi a^dag^2) / 2 is Hermitian; S = exp(-i * that)
    a, adag, _ = ladder(space)
    a2 = a.entries @ a.entries
    ad2 = adag.entries @ adag.entries
    k = 0.5j * (np.conj(xi) * a2 - xi * ad2)
    return Operator(k, hermitian=True)


def squeeze_operator(space: FockSpace, xi: SqueezeParams, check_leakage: bool = True) -> Operator:
    """Truncated squeeze operator ``S(xi)``.

    Built by exponentiating the truncated generator, so it is exactly
    unitary on the truncated space. With ``check_leakage`` the top-decile
    population of ``S(xi)|0>`` must stay below ``TOL.leakage``.
    """
    if not isinstance(xi, SqueezeParams):
        xi = SqueezeParams(abs(xi), float(np.angle(xi)))
    if xi.r == 0:
        return Operator.identity(space.dim)
    s = expm_operator(_squeeze_generator(space, xi.xi), -1j)
    if check_leakage:
        leak = top_population(s.entries[:, 0])
        if leak > TOL.leakage:
            raise TruncationLeakageError(
                f"S(xi)|0> leaks {leak:.2e} into the top Fock levels at N={space.dim}",
                suggested_truncation=2 * space.dim,
            )
    return s


def squeezed_vacuum(space: FockSpace, xi: SqueezeParams) -> StateVector:
    s = squeeze_operator(space, xi)
    return StateVector.normalized(s.entries[:, 0], space.basis)


def _coherent_coefficients(alpha, N: int) -> np.ndarray:
    """Unnormalized-by-truncation coefficients ``e^{-|a|^2/2} a^n / sqrt(n!)``.

    ``alpha`` may be an array; the Fock index runs along the last axis.
    """
    alpha = np.asarray(alpha, dtype=complex)
    out = np.empty(alpha.shape + (N,), dtype=complex)
    out[..., 0] = np.exp(-0.5 * np.abs(alpha) ** 2)
    for k in range(1, N):
        out[..., k] = out[..., k - 1] * alpha / np.sqrt(k)
    return out


def coherent_state(space: FockSpace, alpha: complex) -> StateVector:
    """Coherent state ``|alpha>`` truncated to ``space``.

    Raises :class:`TruncationLeakageError` when more than ``TOL.leakage`` of
    the Poisson weight falls outside the truncation.
    """
    c = _coherent_coefficients(alpha, space.dim)
    kept = float(np.sum(np.abs(c) ** 2))
    leak = max(0.0, 1.0 - kept)
    if leak > TOL.leakage:
        raise TruncationLeakageError(
            f"coherent state alpha={alpha} loses {leak:.2e} at N={space.dim}",
            suggested_truncation=2 * space.dim,
        )
    return StateVector.normalized(c, space.basis)


def husimi_q(psi: StateVector, grid) -> np.ndarray:
    """Husimi function ``Q(alpha) = |<alpha|psi>|^2 / pi`` on a set of points.

    The overlap uses the exact coherent-state coefficients on the levels the
    state occupies, so no coherent-state truncation error enters. The state
    itself must not populate its top Fock levels.
    """
    amps = np.asarray(psi, dtype=complex).reshape(-1)
    leak = top_population(amps)
    if leak > TOL.leakage:
        raise TruncationLeakageError(
            f"state populates its top Fock levels ({leak:.2e})",
            suggested_truncation=2 * amps.size,
        )
    grid = np.asarray(grid, dtype=complex)
    coeff = _coherent_coefficients(grid, amps.size)
    amp = np.tensordot(coeff.conj(), amps, axes=([-1], [0]))
    return np.abs(amp) ** 2 / np.pi


def husimi_grid(extent: float = 4.0, points: int = 161):
    """Uniform Cartesian grid on ``Re alpha, Im alpha in [-extent, extent]``.

    Returns ``(re, im, alpha)`` with ``alpha = re + 1j * im`` of shape
    ``(points, points)``, indexed ``[im, re]``.
    """
    axis = np.linspace(-extent, extent, points)
    re, im = np.meshgrid(axis, axis)
    return re, im, re + 1j * im


def husimi_to_csv(re, im, q) -> str:
    """Serialize a Husimi grid as CSV with columns re_alpha, im_alpha, q_value."""
    buf = io.StringIO()
    buf.write("re_alpha,im_alpha,q_value\n")
    for x, y, v in zip(np.ravel(re), np.ravel(im), np.ravel(q)):
        buf.write(f"{x:.12g},{y:.12g},{v:.12g}\n")
    return buf.getvalue()


def quadrature_covariance(psi) -> np.ndarray:
    """Symmetrized covariance matrix of ``x = (a + a^dag)/sqrt2`` and
    ``p = i(a^dag - a)/sqrt2``. The vacuum gives ``diag(1/2, 1/2)``."""
    amps = np.asarray(psi, dtype=complex).reshape(-1)
    a, adag, _ = ladder(FockSpace(amps.size))
    A = a.entries
    x = (A + A.T) / np.sqrt(2)
    p = 1j * (A.T - A) / np.sqrt(2)
    xv, pv = x @ amps, p @ amps
    mx = np.vdot(amps, xv).real
    mp = np.vdot(amps, pv).real
    vxx = np.vdot(xv, xv).real - mx**2
    vpp = np.vdot(pv, pv).real - mp**2
    cxp = np.vdot(xv, pv).real - mx * mp
    return np.array([[vxx, cxp], [cxp, vpp]])


def quadrature_variance(psi, theta: float) -> float:
    """Variance of ``x cos(theta) + p sin(theta)``."""
    c = quadrature_covariance(psi)
    u = np.array([np.cos(theta), np.sin(theta)])
    return float(u @ c @ u)


def squeeze_axis_angle(psi) -> float:
    """Orientation of the long axis of the phase-space ellipse, in ``(-pi/2, pi/2]``.

    Measured from the real axis of the Husimi plane. Equivalently, the
    quadrature at this angle plus ``pi/2`` has the minimal variance.
    """
    c = quadrature_covariance(psi)
    ang = 0.5 * np.arctan2(2 * c[0, 1], c[0, 0] - c[1, 1])
    if ang <= -np.pi / 2:
        ang += np.pi
    return float(ang)
