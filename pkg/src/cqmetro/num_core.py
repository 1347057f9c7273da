"""Dense complex linear algebra on small Hilbert spaces.

Everything here works on plain ``numpy`` arrays wrapped in three light
containers: :class:`StateVector`, :class:`Operator` and
:class:`EigenDecomposition`. All containers are immutable; operations are
pure functions.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CQMError",
    "DimensionMismatchError",
    "NonHermitianError",
    "NormalizationError",
    "EigenConvergenceError",
    "Tolerances",
    "TOL",
    "Basis",
    "StateVector",
    "Operator",
    "EigenDecomposition",
    "hermitian_deviation",
    "fix_phases",
    "eigh",
    "expm_operator",
    "expm_apply",
    "overlap",
    "fidelity",
    "infidelity",
    "expectation",
    "variance",
]

class CQMError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(CQMError, ValueError):
    pass


class NonHermitianError(CQMError, ValueError):
    pass


class NormalizationError(CQMError, ValueError):
    pass


class EigenConvergenceError(CQMError, RuntimeError):
    pass


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every module."""

    norm: float = 1e-10
    hermitian: float = 1e-12
    eigen_residual: float = 1e-10
    degenerate_gap: float = 1e-10
    leakage: float = 1e-8
    propagation_norm: float = 1e-9
    convergence: float = 1e-6
    qfi_floor: float = 1e-12
    # infidelity (1 - |<a|b>|^2) below which the residual itself is roundoff
    infidelity_floor: float = 1e-26
    richardson_rel: float = 1e-3
    qsl_denominator: float = 1e-14


TOL = Tolerances()


@dataclass(frozen=True)
class Basis:
    """Label of the basis a state lives in.

    ``kind`` is one of ``"qubit"``, ``"fock"`` or ``"qubit_fock"``; Fock-type
    bases carry the truncation (number of retained levels).
    """

    kind: str
    truncation: int | None = None

    def __post_init__(self):
        if self.kind not in ("qubit", "fock", "qubit_fock"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.kind != "qubit" and (self.truncation is None or self.truncation < 1):
            raise ValueError(f"{self.kind} basis needs a positive truncation")

    @property
    def dim(self) -> int:
        if self.kind == "qubit":
            return 2
        if self.kind == "fock":
            return self.truncation
        return 2 * self.truncation

    @classmethod
    def qubit(cls) -> "Basis":
        return cls("qubit")

    @classmethod
    def fock(cls, n: int) -> "Basis":
        return cls("fock", int(n))

    @classmethod
    def qubit_fock(cls, n: int) -> "Basis":
        return cls("qubit_fock", int(n))


def _default_basis(dim: int) -> Basis:
    return Basis.qubit() if dim == 2 else Basis.fock(dim)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state.

    Parameters
    ----------
    amplitudes : array_like
        Complex amplitudes; must already be normalized to within
        ``TOL.norm``. Use :meth:`normalized` to build from raw data.
    basis : Basis, optional
        Basis label. Defaults to a qubit for ``dim == 2`` and a Fock space
        otherwise.
    """

    amplitudes: np.ndarray
    basis: Basis | None = None

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        basis = self.basis if self.basis is not None else _default_basis(amps.size)
        object.__setattr__(self, "basis", basis)
        if basis.dim != amps.size:
            raise DimensionMismatchError(
                f"basis {basis} has dim {basis.dim}, got {amps.size} amplitudes"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > TOL.norm:
            raise NormalizationError(f"state norm {norm!r} deviates from 1")

    @classmethod
    def normalized(cls, amplitudes, basis: Basis | None = None) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise NormalizationError("cannot normalize the zero vector")
        return cls(amps / norm, basis)

    @classmethod
    def basis_state(cls, dim: int, index: int, basis: Basis | None = None) -> "StateVector":
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps, basis)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __repr__(self):
        return f"StateVector(dim={self.dim}, basis={self.basis.kind})"


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense square matrix with a Hermiticity flag.

    The flag is validated on construction: a matrix flagged Hermitian must
    satisfy ``max|A - A^dagger| <= TOL.hermitian * max(1, max|A|)``.
    """

    entries: np.ndarray
    hermitian: bool = False

    # numpy scalars defer to __rmul__ instead of broadcasting over the object
    __array_ufunc__ = None

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"operator must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if self.hermitian:
            dev = hermitian_deviation(m)
            scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
            if dev > TOL.hermitian * scale:
                raise NonHermitianError(f"operator flagged Hermitian deviates by {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "Operator":
        return cls(np.eye(dim), hermitian=True)

    @classmethod
    def zeros(cls, dim: int) -> "Operator":
        return cls(np.zeros((dim, dim)), hermitian=True)

    def dag(self) -> "Operator":
        return Operator(self.entries.conj().T, self.hermitian)

    def __add__(self, other):
        if isinstance(other, Operator):
            _check_dims(self.dim, other.dim)
            return Operator(self.entries + other.entries, self.hermitian and other.hermitian)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Operator):
            _check_dims(self.dim, other.dim)
            return Operator(self.entries - other.entries, self.hermitian and other.hermitian)
        return NotImplemented

    def __neg__(self):
        return Operator(-self.entries, self.hermitian)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        c = complex(scalar)
        return Operator(c * self.entries, self.hermitian and c.imag == 0)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / complex(scalar))

    def __matmul__(self, other):
        if isinstance(other, Operator):
            _check_dims(self.dim, other.dim)
            return Operator(self.entries @ other.entries)
        if isinstance(other, StateVector):
            _check_dims(self.dim, other.dim)
            return self.entries @ other.amplitudes
        return NotImplemented

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __repr__(self):
        return f"Operator(dim={self.dim}, hermitian={self.hermitian})"


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Ascending eigenvalues and unit-norm eigenvectors stored column-wise."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    extras: dict = field(default_factory=dict)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def state(self, k: int = 0, basis: Basis | None = None) -> StateVector:
        return StateVector(self.eigenvectors[:, k], basis)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _check_dims(a: int, b: int):
    if a != b:
        raise DimensionMismatchError(f"dimension mismatch: {a} vs {b}")


def hermitian_deviation(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and positive.

    Works on a single matrix ``(d, k)`` or a stack ``(..., d, k)``.
    """
    v = np.asarray(vectors)
    idx = np.argmax(np.abs(v), axis=-2)
    pivot = np.take_along_axis(v, idx[..., None, :], axis=-2)
    phase = pivot / np.abs(pivot)
    return v / phase


def eigh(op: Operator) -> EigenDecomposition:
    """Full spectral decomposition of a Hermitian operator.

    Eigenvalues are ascending and each eigenvector's largest-magnitude
    entry is made real and positive, so eigenvectors vary continuously
    with smooth parameters (away from ties in magnitude).
    """
    if not isinstance(op, Operator):
        raise TypeError("eigh expects an Operator")
    if not op.hermitian:
        raise NonHermitianError("eigh requires an operator flagged Hermitian")
    m = op.entries
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(m) if np.all(np.isfinite(m)) else np.inf
        raise EigenConvergenceError(
            f"eigendecomposition failed (dim={op.dim}, condition number {cond:.3e})"
        ) from exc
    v = fix_phases(v)
    return EigenDecomposition(w, v)


def expm_operator(op: Operator, scale: complex) -> Operator:
    """Return ``exp(scale * op)`` as an operator.

    Hermitian generators go through the eigendecomposition; anything else
    falls back to :func:`scipy.linalg.expm`.
    """
    scale = complex(scale)
    if op.hermitian:
        w, v = np.linalg.eigh(op.entries)
        u = (v * np.exp(scale * w)) @ v.conj().T
        return Operator(u, hermitian=(scale.imag == 0))
    from scipy.linalg import expm

    return Operator(expm(scale * op.entries))


def expm_apply(op: Operator, scale: complex, psi: StateVector) -> StateVector:
    """Apply ``exp(scale * op)`` to ``psi``.

    For ``scale = -i dt`` and Hermitian ``op`` the result is unitary up to
    roundoff. Non-unitary exponentials are renormalized.
    """
    _check_dims(op.dim, psi.dim)
    scale = complex(scale)
    if op.hermitian:
        w, v = np.linalg.eigh(op.entries)
        out = v @ (np.exp(scale * w) * (v.conj().T @ psi.amplitudes))
    else:
        out = expm_operator(op, scale).entries @ psi.amplitudes
    if scale.real == 0 and op.hermitian:
        return StateVector(out, psi.basis)
    return StateVector.normalized(out, psi.basis)


def _amps(x) -> np.ndarray:
    if isinstance(x, StateVector):
        return x.amplitudes
    return np.asarray(x, dtype=complex).reshape(-1)


def overlap(a, b) -> complex:
    """Inner product ``<a|b>``."""
    va, vb = _amps(a), _amps(b)
    _check_dims(va.size, vb.size)
    return complex(np.vdot(va, vb))


def fidelity(a, b) -> float:
    """``|<a|b>|^2`` for two pure states; clipped to ``[0, 1]``."""
    return float(min(1.0, abs(overlap(a, b)) ** 2))


def infidelity(a, b) -> float:
    """``1 - |<a|b>|^2`` without cancellation.

    Evaluated as the squared norm of the component of ``b`` orthogonal to
    ``a`` (both renormalized), which stays accurate when the states are
    nearly identical.
    """
    va = _amps(a)
    vb = _amps(b)
    _check_dims(va.size, vb.size)
    va = va / np.linalg.norm(va)
    vb = vb / np.linalg.norm(vb)
    resid = vb - np.vdot(va, vb) * va
    return float(np.vdot(resid, resid).real)


def expectation(op: Operator, psi) -> complex:
    v = _amps(psi)
    _check_dims(op.dim, v.size)
    return complex(np.vdot(v, op.entries @ v))


def variance(op: Operator, psi) -> float:
    """``<A^2> - <A>^2``; computed as ``||A psi||^2 - |<A>|^2`` for Hermitian ``A``."""
    v = _amps(psi)
    _check_dims(op.dim, v.size)
    av = op.entries @ v
    mean = np.vdot(v, av)
    if op.hermitian:
        return float(np.vdot(av, av).real - abs(mean) ** 2)
    return float((np.vdot(v, op.entries @ av) - mean**2).real)
