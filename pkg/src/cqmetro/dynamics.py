"""Time-dependent propagation, control ramps and counter-diabatic terms."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .num_core import (
    TOL,
    CQMError,
    DimensionMismatchError,
    EigenDecomposition,
    NonHermitianError,
    Operator,
    StateVector,
    eigh,
)

__all__ = [
    "RampSchedule",
    "HamiltonianTerm",
    "TimeDependentHamiltonian",
    "PropagationConfig",
    "PropagationResult",
    "Trajectory",
    "PropagationConvergenceError",
    "DegenerateSpectrumError",
    "propagate",
    "evolve",
    "cd_spectral",
    "bang_off_schedule",
    "trajectory_to_csv",
    "instantaneous_ground_state",
]


class PropagationConvergenceError(CQMError, RuntimeError):
    pass


class DegenerateSpectrumError(CQMError, ValueError):
    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


# ---------------------------------------------------------------- ramps


@dataclass(frozen=True)
class RampSchedule:
    """Control trajectory ``g(t)`` on ``[0, T]`` with its analytic derivative.

    Use the constructors :meth:`power_law`, :meth:`sqrt_ramp` and
    :meth:`bang_off`. ``family`` is ``"power"``, ``"sqrt"`` or ``"bang_off"``.
    """

    g0: float
    gf: float
    T: float
    family: str = "power"
    exponent: float = 1.0
    segments: tuple = ()

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("ramp duration must be positive")
        if self.family not in ("power", "sqrt", "bang_off"):
            raise ValueError(f"unknown ramp family {self.family!r}")

    @classmethod
    def power_law(cls, g0, gf, T, exponent=0.2) -> "RampSchedule":
        """``g(t) = g0 - (g0 - gf) (t/T)^exponent``."""
        return cls(float(g0), float(gf), float(T), "power", float(exponent))

    @classmethod
    def sqrt_ramp(cls, g0, gf, T) -> "RampSchedule":
        """``g(t) = g0 + (gf - g0) sqrt(t/T)``."""
        return cls(float(g0), float(gf), float(T), "sqrt", 0.5)

    @classmethod
    def bang_off(cls, segments: Sequence[tuple[float, float]]) -> "RampSchedule":
        """Piecewise-constant control from ``(g, duration)`` pairs."""
        segs = tuple((float(g), float(d)) for g, d in segments)
        if any(d < 0 for _, d in segs):
            raise ValueError("segment durations must be non-negative")
        T = sum(d for _, d in segs)
        return cls(segs[0][0], segs[-1][0], T, "bang_off", 0.0, segs)

    def with_duration(self, T) -> "RampSchedule":
        return replace(self, T=float(T))

    def time_grid(self, steps: int):
        """Step edges ``t_0 = 0 < ... < t_steps = T``.

        For ``g0 + (gf - g0)(t/T)^p`` with ``p < 1`` the edges are
        ``T (k/steps)^(1/p)``, on which ``g`` is linear in the step index, so
        the midpoint rule keeps second order despite the singular ``gdot``
        at ``t = 0``. Other ramps use a uniform grid.
        """
        return self.time_grid_at(np.linspace(0.0, 1.0, steps + 1))

    def time_grid_at(self, s):
        """Map the grid variable ``s in [0, 1]`` to time (see :meth:`time_grid`)."""
        s = np.asarray(s, dtype=float)
        if self.family in ("power", "sqrt") and 0 < self.exponent < 1:
            return self.T * s ** (1.0 / self.exponent)
        return self.T * s

    def value(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "bang_off":
            edges = np.cumsum([d for _, d in self.segments])
            idx = np.searchsorted(edges, t, side="right")
            idx = np.clip(idx, 0, len(self.segments) - 1)
            return np.array([g for g, _ in self.segments])[idx]
        s = np.clip(t / self.T, 0.0, 1.0)
        if self.family == "power":
            return self.g0 - (self.g0 - self.gf) * s**self.exponent
        return self.g0 + (self.gf - self.g0) * np.sqrt(s)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "bang_off":
            return np.zeros_like(t)
        s = np.clip(t / self.T, 0.0, 1.0)
        with np.errstate(divide="ignore"):
            if self.family == "power":
                p = self.exponent
                return -(self.g0 - self.gf) * p * s ** (p - 1.0) / self.T
            return (self.gf - self.g0) / (2.0 * np.sqrt(s) * self.T)


# ---------------------------------------------------------- Hamiltonians


@dataclass(frozen=True)
class HamiltonianTerm:
    """``coefficient(t, g, gdot) * op``; the coefficient must be real and
    accept numpy arrays."""

    op: Operator
    coefficient: Callable
    counterdiabatic: bool = False


@dataclass(frozen=True)
class TimeDependentHamiltonian:
    """Sum of Hermitian operators with real, control-dependent coefficients.

    ``estimate`` records the parameter estimate the counter-diabatic terms
    were built from; it is carried for bookkeeping only.
    """

    terms: tuple
    estimate: float | None = None
    label: str = ""

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("at least one term is required")
        dims = {t.op.dim for t in terms}
        if len(dims) != 1:
            raise DimensionMismatchError(f"terms have differing dimensions {dims}")
        for t in terms:
            if not t.op.hermitian:
                raise NonHermitianError("every term operator must be Hermitian")
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self) -> int:
        return self.terms[0].op.dim

    @property
    def cd_enabled(self) -> bool:
        return any(t.counterdiabatic for t in self.terms)

    def without_cd(self) -> "TimeDependentHamiltonian":
        return replace(self, terms=tuple(t for t in self.terms if not t.counterdiabatic))

    def _coefficients(self, t, g, gd, include_cd=True):
        out = []
        for term in self.terms:
            if term.counterdiabatic and not include_cd:
                continue
            c = np.broadcast_to(np.asarray(term.coefficient(t, g, gd)), np.shape(t))
            if np.iscomplexobj(c) and np.any(np.abs(np.imag(c)) > 0):
                raise NonHermitianError("term coefficients must be real")
            c = np.real(c).astype(float)
            if not np.all(np.isfinite(c)):
                raise ValueError("non-finite Hamiltonian coefficient")
            out.append((c, term.op.entries))
        return out

    def stack(self, t, g, gd, include_cd=True) -> np.ndarray:
        """Matrices at each entry of ``t``; shape ``(len(t), dim, dim)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        g = np.broadcast_to(g, t.shape)
        gd = np.broadcast_to(gd, t.shape)
        out = np.zeros((t.size, self.dim, self.dim), dtype=complex)
        for c, m in self._coefficients(t, g, gd, include_cd):
            out += c[:, None, None] * m[None]
        return out

    def at(self, t: float, ramp: RampSchedule, include_cd=True) -> Operator:
        g = ramp.value(t)
        gd = ramp.derivative(t)
        m = self.stack([t], [g], [gd], include_cd)[0]
        return Operator(0.5 * (m + m.conj().T), hermitian=True)

    def bare_at(self, t: float, ramp: RampSchedule) -> Operator:
        return self.at(t, ramp, include_cd=False)


# ------------------------------------------------------------ propagation


@dataclass(frozen=True)
class PropagationConfig:
    """Step policy of the midpoint-exponential integrator.

    With ``adaptive`` the step count starts at ``steps`` and doubles until
    the final state changes by less than ``tol`` in norm, up to
    ``max_steps``.
    """

    steps: int = 1024
    adaptive: bool = True
    tol: float = TOL.convergence
    max_steps: int = 2**20
    record_trajectory: bool = False
    method: str = "midpoint_exponential"

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.method != "midpoint_exponential":
            raise ValueError(f"unsupported method {self.method!r}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    g: np.ndarray
    states: np.ndarray  # (len(times), dim)

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)


@dataclass(frozen=True, eq=False)
class PropagationResult:
    state: StateVector
    steps: int
    convergence_change: float
    trajectory: Trajectory | None = None

    @property
    def converged(self) -> bool:
        return self.convergence_change < TOL.convergence


def _chunk_size(dim: int) -> int:
    return max(16, 2**21 // (dim * dim))


def _step_unitaries(hs: np.ndarray, dt) -> np.ndarray:
    w, v = np.linalg.eigh(hs)
    dt = np.reshape(dt, (-1, 1)) if np.ndim(dt) else dt
    return (v * np.exp(-1j * dt * w)[:, None, :]) @ v.conj().transpose(0, 2, 1)


def _ordered_product(us: np.ndarray) -> np.ndarray:
    """``us[-1] @ ... @ us[0]`` by pairwise batched multiplication."""
    while us.shape[0] > 1:
        if us.shape[0] % 2:
            us = np.concatenate([us, np.eye(us.shape[1], dtype=complex)[None]])
        us = us[1::2] @ us[0::2]
    return us[0]


def _evolve_smooth(H, ramp, block, steps, record):
    edges = ramp.time_grid(steps)
    s = np.linspace(0.0, 1.0, steps + 1)
    # midpoints in the grid variable, mapped back to time
    s_mid = 0.5 * (s[:-1] + s[1:])
    t_mid = ramp.time_grid_at(s_mid)
    dts = np.diff(edges)
    T_rec, G_rec, S_rec = [], [], []
    psi = block
    chunk = _chunk_size(H.dim)
    for start in range(0, steps, chunk):
        k = np.arange(start, min(steps, start + chunk))
        tm = t_mid[k]
        hs = H.stack(tm, ramp.value(tm), ramp.derivative(tm))
        us = _step_unitaries(hs, dts[k])
        if record:
            out = np.empty((k.size,) + psi.shape, dtype=complex)
            for j in range(k.size):
                psi = us[j] @ psi
                out[j] = psi
            S_rec.append(out)
            T_rec.append(edges[k + 1])
            G_rec.append(ramp.value(edges[k + 1]))
        else:
            psi = _ordered_product(us) @ psi
    traj = None
    if record:
        traj = (np.concatenate(T_rec), np.concatenate(G_rec), np.concatenate(S_rec))
    return psi, traj


def _evolve_piecewise(H, ramp, block, steps, record):
    psi = block
    t0 = 0.0
    T_rec, G_rec, S_rec = [], [], []
    for g, dur in ramp.segments:
        if dur == 0:
            continue
        hm = H.stack([t0 + 0.5 * dur], [g], [0.0])[0]
        w, v = np.linalg.eigh(hm)
        if record:
            n_sub = max(1, int(round(steps * dur / ramp.T)))
            dt = dur / n_sub
            u = (v * np.exp(-1j * dt * w)) @ v.conj().T
            out = np.empty((n_sub,) + psi.shape, dtype=complex)
            for j in range(n_sub):
                psi = u @ psi
                out[j] = psi
            S_rec.append(out)
            T_rec.append(t0 + dt * np.arange(1, n_sub + 1))
            G_rec.append(np.full(n_sub, g))
        else:
            psi = (v * np.exp(-1j * dur * w)) @ (v.conj().T @ psi)
        t0 += dur
    traj = None
    if record:
        traj = (np.concatenate(T_rec), np.concatenate(G_rec), np.concatenate(S_rec))
    return psi, traj


def evolve(H: TimeDependentHamiltonian, ramp: RampSchedule, states, steps: int, record=False):
    """Propagate one or several states with a fixed number of steps.

    ``states`` is a single :class:`StateVector`/array of shape ``(dim,)`` or
    a block ``(dim, m)`` of column vectors. Returns an array of the same
    shape (and the raw trajectory tuple when ``record`` is set).
    """
    block = np.asarray(states, dtype=complex)
    if block.shape[0] != H.dim:
        raise DimensionMismatchError(f"state dim {block.shape[0]} vs Hamiltonian dim {H.dim}")
    if ramp.family == "bang_off":
        out, traj = _evolve_piecewise(H, ramp, block, steps, record)
    else:
        out, traj = _evolve_smooth(H, ramp, block, steps, record)
    return (out, traj) if record else out


def propagate(
    H: TimeDependentHamiltonian,
    ramp: RampSchedule,
    psi0: StateVector,
    cfg: PropagationConfig = PropagationConfig(),
) -> PropagationResult:
    """Time-ordered evolution ``prod_k exp(-i dt H(t_k + dt/2)) psi0``.

    Piecewise-constant (bang-off) schedules are exponentiated exactly per
    segment. The result carries the step count used and the norm change
    observed at the last step doubling (the convergence certificate).
    """
    if H.dim != psi0.dim:
        raise DimensionMismatchError(f"state dim {psi0.dim} vs Hamiltonian dim {H.dim}")
    v0 = psi0.amplitudes
    steps = cfg.steps
    if ramp.family == "bang_off":
        psi, traj = evolve(H, ramp, v0, steps, record=True) if cfg.record_trajectory else (
            evolve(H, ramp, v0, steps), None)
        change = 0.0
    elif not cfg.adaptive:
        psi, traj = evolve(H, ramp, v0, steps, record=True) if cfg.record_trajectory else (
            evolve(H, ramp, v0, steps), None)
        change = float("nan")
    else:
        prev = evolve(H, ramp, v0, steps)
        while True:
            if 2 * steps > cfg.max_steps:
                raise PropagationConvergenceError(
                    f"no convergence below {cfg.tol:g} within {cfg.max_steps} steps"
                )
            steps *= 2
            if cfg.record_trajectory:
                psi, traj = evolve(H, ramp, v0, steps, record=True)
            else:
                psi, traj = evolve(H, ramp, v0, steps), None
            change = float(np.linalg.norm(psi - prev))
            if change < cfg.tol:
                break
            prev = psi
    norm_dev = abs(np.linalg.norm(psi) - 1.0)
    if norm_dev > TOL.propagation_norm:
        raise PropagationConvergenceError(f"norm drifted by {norm_dev:.2e}")
    trajectory = Trajectory(*traj) if traj is not None else None
    return PropagationResult(StateVector(psi, psi0.basis), steps, change, trajectory)


def instantaneous_ground_state(H: TimeDependentHamiltonian, t: float, ramp: RampSchedule) -> StateVector:
    return eigh(H.bare_at(t, ramp)).state(0)


def trajectory_to_csv(result: PropagationResult, H: TimeDependentHamiltonian, ramp: RampSchedule) -> str:
    """CSV dump with columns t, g, fidelity_to_instantaneous_ground, norm."""
    traj = result.trajectory
    if traj is None:
        raise ValueError("propagation was run without record_trajectory")
    buf = io.StringIO()
    buf.write("t,g,fidelity_to_instantaneous_ground,norm\n")
    bare = H.without_cd()
    for t, g, psi in zip(traj.times, traj.g, traj.states):
        m = bare.stack([t], [g], [0.0])[0]
        w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
        f = abs(np.vdot(v[:, 0], psi)) ** 2
        buf.write(f"{t:.12g},{g:.12g},{f:.12g},{np.linalg.norm(psi):.12g}\n")
    return buf.getvalue()


# --------------------------------------------------------- CD synthesis


def cd_spectral(H_bare: Operator, dH_dt: Operator, decomp: EigenDecomposition | None = None) -> Operator:
    """Counter-diabatic term from the instantaneous spectrum.

    ``H_CD = i sum_{m != n} |m><m| dH/dt |n><n| / (E_n - E_m)``; the diagonal
    (Berry-connection) part is removed, so the result has a vanishing
    diagonal in the instantaneous eigenbasis.
    """
    if H_bare.dim != dH_dt.dim:
        raise DimensionMismatchError("H and dH/dt dimensions differ")
    if not dH_dt.hermitian:
        raise NonHermitianError("dH/dt must be Hermitian")
    d = decomp if decomp is not None else eigh(H_bare)
    E = d.eigenvalues
    V = d.eigenvectors
    diff = E[None, :] - E[:, None]  # [m, n] -> E_n - E_m
    off = ~np.eye(E.size, dtype=bool)
    if E.size > 1:
        gap = float(np.min(np.abs(diff[off])))
        if gap < TOL.degenerate_gap:
            raise DegenerateSpectrumError(f"spectrum gap {gap:.3e} below threshold", gap)
    M = V.conj().T @ dH_dt.entries @ V
    C = np.zeros_like(M)
    C[off] = 1j * M[off] / diff[off]
    out = V @ C @ V.conj().T
    return Operator(0.5 * (out + out.conj().T), hermitian=True)


def bang_off_schedule(delta: float, omega: float, g_target: float):
    """Two-segment squeeze-then-rotate control reaching the normal-phase
    ground state at ``g_target``.

    Returns
    -------
    ramp : RampSchedule
        Segments ``(sqrt(2 delta omega), T_bang)`` then ``(0, pi/(4 delta))``
        with ``T_bang = -ln(1 - (g_target/g_c)^2) / (4 delta)``.
    tau_qsl : float
        ``T_bang + T_off``.
    """
    if delta <= 0 or omega <= 0:
        raise ValueError("delta and omega must be positive")
    gc = math.sqrt(delta * omega)
    if not 0 <= g_target < gc:
        raise ValueError(f"g_target={g_target} must lie in [0, g_c={gc})")
    u = (g_target / gc) ** 2
    t_bang = -math.log1p(-u) / (4.0 * delta)
    t_off = math.pi / (4.0 * delta)
    g_bang = math.sqrt(2.0 * delta * omega)
    ramp = RampSchedule.bang_off([(g_bang, t_bang), (0.0, t_off)])
    return ramp, t_bang + t_off
