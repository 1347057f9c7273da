"""Named parameter sweeps (fig1 ... fig6, custom) and their tabular output.

Each ``run_*`` function takes a :class:`RunConfig` and returns a
:class:`SweepResult`; rows are computed independently (optionally in a
process pool) and sorted by the sweep value before serialization. Every
number in a row comes from a public library call, so any row can be
recomputed by hand.
"""
from __future__ import annotations

import dataclasses
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from .dynamics import (
    PropagationConfig,
    RampSchedule,
    bang_off_schedule,
    evolve,
    propagate,
)
from .metrology import BoundCurve, qfi_overlap_path, trajectory_bound
from .model_lz import (
    LZParams,
    lz_default_ramp,
    lz_ground_state,
    lz_h_omega,
    lz_qfi_adiabatic,
    lz_qsl_time,
    lz_time_dependent_hamiltonian,
)
from .model_qrm import (
    QRMParams,
    embed_even,
    qrm_ground_state,
    qrm_h_omega,
    qrm_hl_curve,
    qrm_mean_photon,
    qrm_qfi_critical_approx,
    qrm_qfi_exact,
    qrm_time_dependent_hamiltonian,
    restrict_even,
)
from .num_core import CQMError, StateVector, fidelity
from .quantum_ops import (
    FockSpace,
    TruncationLeakageError,
    husimi_grid,
    husimi_q,
    husimi_to_csv,
    quadrature_covariance,
    squeeze_axis_angle,
    top_population,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "SweepResult",
    "EXPERIMENTS",
    "run_fig1",
    "run_fig2",
    "run_fig3",
    "run_fig4",
    "run_fig6",
    "run_custom",
    "run_experiment",
    "fit_loglog_slope",
]

EXPERIMENTS = ("fig1", "fig2", "fig3", "fig4", "fig6", "custom")


class ConfigError(CQMError, ValueError):
    pass


# ------------------------------------------------------------------ config


@dataclass(frozen=True)
class RunConfig:
    """Flat run configuration.

    Couplings are in reduced units: for the Landau-Zener model ``g0`` and
    ``gf`` are multiples of ``delta_est``, for the Rabi model fractions of
    the estimated critical coupling ``sqrt(delta_est * omega)``. The sweep
    variable depends on the experiment: ``g/delta`` (fig1), ``T*delta``
    (fig2, custom), ``g/g_c`` (fig3) and ``T`` (fig4).
    """

    experiment: str = "custom"
    model: str = "lz"
    delta: float = 0.05
    omega: float = 100.0
    delta_est: float | None = None
    g0: float = 500.0
    gf: float = 1.0
    ramp: str = "power"
    exponent: float = 0.2
    sweep_min: float = 1e-2
    sweep_max: float = 1e2
    points: int = 61
    log: bool = True
    truncation: int = 120
    dyn_truncation: int = 32
    steps: int = 1024
    tol: float = 1e-6
    max_steps: int = 2**20
    qfi_step: float = 1e-6
    husimi_extent: float = 4.0
    husimi_points: int = 161
    out: str = "results"
    plots: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.model not in ("lz", "qrm"):
            raise ConfigError(f"unknown model {self.model!r}")
        if self.ramp not in ("power", "sqrt"):
            raise ConfigError(f"ramp must be 'power' or 'sqrt', got {self.ramp!r}")
        for name in ("delta", "omega", "qfi_step", "tol", "husimi_extent"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.delta_est is not None and not self.delta_est > 0:
            raise ConfigError("delta_est must be positive")
        if self.points < 2:
            raise ConfigError("a sweep needs at least 2 points")
        if not self.sweep_max > self.sweep_min:
            raise ConfigError("sweep_max must exceed sweep_min")
        if self.log and not self.sweep_min > 0:
            raise ConfigError("log sweeps need sweep_min > 0")
        if self.g0 < 0 or self.gf < 0:
            raise ConfigError("couplings must be non-negative")
        if not 0 < self.exponent <= 1:
            raise ConfigError("ramp exponent must lie in (0, 1]")
        if self.truncation < 2 or self.dyn_truncation < 2 or self.husimi_points < 2:
            raise ConfigError("truncations and grid sizes must be at least 2")
        if self.steps < 1 or self.max_steps < self.steps:
            raise ConfigError("need 1 <= steps <= max_steps")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.model == "qrm" and (self.gf >= 1 or self.g0 >= 1):
            raise ConfigError("Rabi couplings must stay below the critical coupling (g/g_c < 1)")

    @property
    def estimate(self) -> float:
        return self.delta if self.delta_est is None else self.delta_est

    def sweep(self) -> np.ndarray:
        if self.log:
            return np.geomspace(self.sweep_min, self.sweep_max, self.points)
        return np.linspace(self.sweep_min, self.sweep_max, self.points)

    def propagation(self, record=False) -> PropagationConfig:
        return PropagationConfig(self.steps, True, self.tol, self.max_steps, record)

    # construction ---------------------------------------------------------

    @classmethod
    def defaults(cls, experiment: str) -> "RunConfig":
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {experiment!r}")
        return cls(experiment=experiment, **_DEFAULTS[experiment])

    def updated(self, values: dict) -> "RunConfig":
        """Copy with string or typed overrides; unknown keys are rejected."""
        kinds = {f.name: f.type for f in dataclasses.fields(self)}
        parsed = {}
        for key, raw in values.items():
            key = key.strip()
            if key not in kinds:
                raise ConfigError(f"unknown config key {key!r}")
            parsed[key] = _coerce(key, kinds[key], raw)
        try:
            return dataclasses.replace(self, **parsed)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, experiment: str, path=None, overrides=()) -> "RunConfig":
        """Defaults for ``experiment``, then the key=value file, then
        ``KEY=VALUE`` overrides."""
        cfg = cls.defaults(experiment)
        if path is not None:
            try:
                text = Path(path).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            values = parse_key_values(text.splitlines(), source=str(path))
            if values.pop("experiment", experiment) != experiment:
                raise ConfigError("config file names a different experiment")
            cfg = cfg.updated(values)
        cfg = cfg.updated(parse_key_values(overrides, source="--set"))
        return cfg

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_DEFAULTS = {
    "fig1": dict(model="lz", delta=0.05, sweep_min=0.1, sweep_max=100.0, points=61, log=True),
    "fig2": dict(model="lz", delta=0.05, g0=500.0, gf=1.0, ramp="power", exponent=0.2,
                 sweep_min=1e-2, sweep_max=1e2, points=61, log=True),
    "fig3": dict(model="qrm", delta=0.01, omega=100.0, g0=0.0, gf=0.9, sweep_min=0.0,
                 sweep_max=0.99, points=100, log=False),
    "fig4": dict(model="qrm", delta=0.01, omega=100.0, g0=0.0, gf=0.9, ramp="sqrt",
                 exponent=0.5, sweep_min=1.0, sweep_max=1e4, points=17, log=True),
    "fig6": dict(model="qrm", delta=0.01, omega=100.0, g0=0.0, gf=0.9, sweep_min=0.0,
                 sweep_max=2.0, points=3, log=False),
    "custom": dict(),
}


def parse_key_values(lines, source="config") -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{num}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{num}: empty key")
        out[key] = value
    return out


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(key, kind, raw):
    if not isinstance(raw, str):
        return raw
    kind = str(kind)
    try:
        if kind.startswith("bool"):
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        if kind.startswith("int"):
            return int(float(raw)) if float(raw).is_integer() else int(raw)
        if kind.startswith("float"):
            if raw.lower() in ("none", "") and "None" in kind:
                return None
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value {raw!r} for {key} ({kind})") from exc
    return raw


# ------------------------------------------------------------------ results


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if not math.isfinite(v) else f"{float(v):.12g}"
    return str(v)


@dataclass
class SweepResult:
    """Rows of one experiment plus metadata and auxiliary CSV files."""

    experiment: str
    sweep_variable: str
    columns: tuple
    rows: list
    metadata: dict = field(default_factory=dict)
    extra_files: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: r[self.sweep_variable])

    def column(self, name) -> np.ndarray:
        return np.array([np.nan if r.get(name) is None else r[name] for r in self.rows], dtype=float)

    @property
    def failed_rows(self) -> list:
        return [r for r in self.rows if r.get("status", "ok") != "ok"]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for r in self.rows:
            buf.write(",".join(_fmt(r.get(c)) for c in self.columns) + "\n")
        return buf.getvalue()

    def write(self, outdir) -> list:
        """Write ``<experiment>.csv``, ``<experiment>.json`` and extra files."""
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        paths = []
        files = {f"{self.experiment}.csv": self.to_csv(), **self.extra_files}
        for name, text in files.items():
            p = outdir / name
            with open(p, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            paths.append(p)
        meta = outdir / f"{self.experiment}.json"
        with open(meta, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(_jsonable(self.metadata), fh, indent=2, sort_keys=True)
            fh.write("\n")
        paths.append(meta)
        return paths


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(f"{float(x):.12g}") if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def _map_rows(fn, cfg: RunConfig, values):
    """Evaluate ``fn(cfg, x)`` for every sweep value, in a pool if jobs > 1."""
    work = partial(_guarded, fn, cfg)
    if cfg.jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(work, values))
    return [work(x) for x in values]


def _guarded(fn, cfg, x):
    try:
        row = fn(cfg, float(x))
        row.setdefault("status", "ok")
    except CQMError as exc:
        row = {"status": f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")}
    row.setdefault(_SWEEP_NAMES[cfg.experiment], float(x))
    return row


_SWEEP_NAMES = {
    "fig1": "g_over_delta",
    "fig2": "T_delta",
    "fig3": "g_over_gc",
    "fig4": "T",
    "fig6": "stage",
    "custom": "T_delta",
}


def fit_loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x`` on finite, positive pairs."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def _qfi_value(est):
    # precision-floor estimates carry no information and are left empty
    return None if "precision_floor" in est.flags else est.value


# ------------------------------------------------------------------- fig 1


def _fig1_row(cfg: RunConfig, ratio: float) -> dict:
    p = LZParams(cfg.delta, g=ratio * cfg.delta)
    qfi = lz_qfi_adiabatic(p)
    tau = lz_qsl_time(LZParams(cfg.delta), p.g)
    return {
        "g_over_delta": ratio,
        "qfi_adiabatic": qfi,
        "tau_qsl": tau,
        "ratio_qfi_tau2": qfi / tau**2,
        "bound_sql": 1.0,
    }


def run_fig1(cfg: RunConfig) -> SweepResult:
    """Adiabatic Landau-Zener QFI normalized by the squared speed-limit time."""
    rows = _map_rows(_fig1_row, cfg, cfg.sweep())
    cols = ("g_over_delta", "qfi_adiabatic", "tau_qsl", "ratio_qfi_tau2", "bound_sql", "status")
    return SweepResult("fig1", "g_over_delta", cols, rows, {"config": cfg.as_dict()})


# ----------------------------------------------------- driven protocols


@dataclass(frozen=True)
class _Protocol:
    """Everything needed to propagate one model at a given true delta."""

    cfg: RunConfig
    T: float

    @property
    def ramp(self) -> RampSchedule:
        c = self.cfg
        if c.model == "lz":
            g0, gf = c.g0 * c.estimate, c.gf * c.estimate
        else:
            gce = math.sqrt(c.estimate * c.omega)
            g0, gf = c.g0 * gce, c.gf * gce
        if c.ramp == "sqrt":
            return RampSchedule.sqrt_ramp(g0, gf, self.T)
        return RampSchedule.power_law(g0, gf, self.T, c.exponent)

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.cfg.dyn_truncation)

    def hamiltonian(self, delta, cd):
        c = self.cfg
        if c.model == "lz":
            return lz_time_dependent_hamiltonian(LZParams(delta, c.estimate), cd)
        p = QRMParams(delta, c.omega, 0.0, c.estimate)
        return qrm_time_dependent_hamiltonian(p, self.space, cd, even=True)

    def initial(self) -> StateVector:
        # prepared with the estimate, hence independent of the true delta
        c = self.cfg
        ramp = self.ramp
        if c.model == "lz":
            return lz_ground_state(LZParams(c.estimate, g=ramp.g0))
        p = QRMParams(c.estimate, c.omega, ramp.g0)
        return StateVector(qrm_ground_state(p, self.space).amplitudes[::2])

    def target(self) -> StateVector:
        c = self.cfg
        gf = self.ramp.gf
        if c.model == "lz":
            return lz_ground_state(LZParams(c.delta, g=gf))
        return StateVector(qrm_ground_state(QRMParams(c.delta, c.omega, gf), self.space).amplitudes[::2])

    def h_omega(self):
        if self.cfg.model == "lz":
            return lz_h_omega()
        return restrict_even(qrm_h_omega(self.space), self.space)

    def full_state(self, vec):
        if self.cfg.model == "lz":
            return vec
        return embed_even(vec, self.space)

    def with_space(self, N):
        return _Protocol(dataclasses.replace(self.cfg, dyn_truncation=N), self.T)


def _drive(proto: _Protocol, cd: bool) -> dict:
    """Propagate, then estimate the QFI from runs at delta -/+ step/2, /4."""
    cfg = proto.cfg
    ramp = proto.ramp
    psi0 = proto.initial()
    res = propagate(proto.hamiltonian(cfg.delta, cd), ramp, psi0, cfg.propagation(record=True))
    if cfg.model == "qrm":
        leak = max(top_population(proto.full_state(s)) for s in res.trajectory.states[:: max(1, res.steps // 64)])
        leak = max(leak, top_population(proto.full_state(res.state.amplitudes)))
        if leak > 1e-8:
            raise TruncationLeakageError(f"leakage {leak:.2e}", suggested_truncation=2 * proto.space.dim)

    def state_at(x):
        return evolve(proto.hamiltonian(x, cd), ramp, psi0.amplitudes, res.steps)

    est = qfi_overlap_path(state_at, cfg.delta, cfg.qfi_step * cfg.delta)
    states = np.vstack([psi0.amplitudes[None], res.trajectory.states])
    return {
        "qfi": _qfi_value(est),
        "richardson": est.richardson,
        "flags": sorted(est.flags),
        "fidelity": fidelity(res.state, proto.target()),
        "bound": trajectory_bound(states, proto.h_omega(), ramp.T),
        "steps": res.steps,
    }


def _drive_adaptive(proto: _Protocol, cd: bool) -> dict:
    """:func:`_drive` with the Fock truncation doubled on leakage."""
    while True:
        try:
            out = _drive(proto, cd)
            out["truncation"] = proto.cfg.dyn_truncation if proto.cfg.model == "qrm" else None
            return out
        except TruncationLeakageError:
            if proto.cfg.model != "qrm" or proto.cfg.dyn_truncation >= 512:
                raise
            proto = proto.with_space(2 * proto.cfg.dyn_truncation)


def _protocol_row(cfg: RunConfig, x: float) -> dict:
    sweep = _SWEEP_NAMES[cfg.experiment]
    T = x if sweep == "T" else x / cfg.delta
    proto = _Protocol(cfg, T)
    cdr = _drive_adaptive(proto, True)
    bare = _drive_adaptive(proto, False)
    row = {
        sweep: x,
        "T": T,
        "qfi_cd": cdr["qfi"],
        "qfi_no_cd": bare["qfi"],
        "qfi_cd_richardson": cdr["richardson"],
        "qfi_no_cd_richardson": bare["richardson"],
        "fidelity_cd": cdr["fidelity"],
        "fidelity_no_cd": bare["fidelity"],
        "trajectory_bound_cd": cdr["bound"],
        "trajectory_bound_no_cd": bare["bound"],
        "steps_cd": cdr["steps"],
        "steps_no_cd": bare["steps"],
        "flags": ";".join([f"cd:{f}" for f in cdr["flags"]] + [f"no_cd:{f}" for f in bare["flags"]]),
    }
    gf = proto.ramp.gf
    if cfg.model == "lz":
        row["qfi_adiabatic"] = lz_qfi_adiabatic(LZParams(cfg.delta, g=gf))
        row["bound_sql"] = BoundCurve("SQL").evaluate(T, 1.0)
        row["bound_hl"] = row["bound_sql"]
    else:
        p = QRMParams(cfg.delta, cfg.omega, gf)
        n = qrm_mean_photon(p)
        row["qfi_adiabatic"] = qrm_qfi_exact(p)
        row["bound_sql"] = None
        row["bound_hl"] = float(qrm_hl_curve(n, T))
        row["truncation"] = max(cdr["truncation"], bare["truncation"])
    return row


_PROTOCOL_COLUMNS = (
    "T",
    "qfi_cd",
    "qfi_no_cd",
    "qfi_cd_richardson",
    "qfi_no_cd_richardson",
    "fidelity_cd",
    "fidelity_no_cd",
    "qfi_adiabatic",
    "bound_sql",
    "bound_hl",
    "trajectory_bound_cd",
    "trajectory_bound_no_cd",
    "steps_cd",
    "steps_no_cd",
)


def _short_time_slopes(result: SweepResult) -> dict:
    T = result.column("T")
    half = T <= np.sqrt(T.min() * T.max())
    return {
        "short_time_slope_cd": fit_loglog_slope(T[half], result.column("qfi_cd")[half]),
        "short_time_slope_no_cd": fit_loglog_slope(T[half], result.column("qfi_no_cd")[half]),
    }


def run_fig2(cfg: RunConfig) -> SweepResult:
    """Landau-Zener sweep with and without counter-diabatic driving versus T*delta."""
    if cfg.model != "lz":
        raise ConfigError("fig2 uses the Landau-Zener model")
    rows = _map_rows(_protocol_row, cfg, cfg.sweep())
    cols = ("T_delta",) + _PROTOCOL_COLUMNS + ("flags", "status")
    res = SweepResult("fig2", "T_delta", cols, rows, {"config": cfg.as_dict()})
    res.metadata.update(_short_time_slopes(res))
    return res


def run_fig4(cfg: RunConfig) -> SweepResult:
    """Rabi-model square-root ramp to ``gf`` with and without CD driving versus T."""
    if cfg.model != "qrm":
        raise ConfigError("fig4 uses the Rabi model")
    rows = _map_rows(_protocol_row, cfg, cfg.sweep())
    cols = ("T",) + _PROTOCOL_COLUMNS[1:] + ("truncation", "short_time_slope_cd", "flags", "status")
    res = SweepResult("fig4", "T", cols, rows, {"config": cfg.as_dict()})
    slopes = _short_time_slopes(res)
    res.metadata.update(slopes)
    for r in res.rows:
        r["short_time_slope_cd"] = slopes["short_time_slope_cd"]
    return res


def run_custom(cfg: RunConfig) -> SweepResult:
    """Generic driven-protocol sweep over ``T*delta`` for either model."""
    rows = _map_rows(_protocol_row, cfg, cfg.sweep())
    cols = ("T_delta",) + _PROTOCOL_COLUMNS + ("flags", "status")
    res = SweepResult("custom", "T_delta", cols, rows, {"config": cfg.as_dict()})
    res.metadata.update(_short_time_slopes(res))
    return res


# ------------------------------------------------------------------- fig 3


def _fig3_row(cfg: RunConfig, ratio: float) -> dict:
    p = QRMParams.at_ratio(cfg.delta, cfg.omega, ratio)
    _, tau = bang_off_schedule(cfg.delta, cfg.omega, p.g)
    n = qrm_mean_photon(p)
    hl = float(qrm_hl_curve(n, tau))
    exact = qrm_qfi_exact(p)
    approx = qrm_qfi_critical_approx(p)
    return {
        "g_over_gc": ratio,
        "qfi_exact": exact,
        "qfi_critical_approx": approx,
        "tau_qsl": tau,
        "mean_photon": n,
        "bound_hl": hl,
        "ratio_exact_hl": exact / hl if hl > 0 else None,
        "ratio_approx_hl": approx / hl if hl > 0 else None,
    }


def run_fig3(cfg: RunConfig) -> SweepResult:
    """Rabi-model ground-state QFI against the Heisenberg limit at the bang-off time."""
    rows = _map_rows(_fig3_row, cfg, cfg.sweep())
    cols = ("g_over_gc", "qfi_exact", "qfi_critical_approx", "tau_qsl", "mean_photon",
            "bound_hl", "ratio_exact_hl", "ratio_approx_hl", "status")
    res = SweepResult("fig3", "g_over_gc", cols, rows, {"config": cfg.as_dict()})
    ratio = res.column("ratio_exact_hl")
    above = np.flatnonzero(np.nan_to_num(ratio) > 1)
    res.metadata["first_ratio_above_one_at"] = float(res.column("g_over_gc")[above[0]]) if above.size else None
    return res


# ------------------------------------------------------------------- fig 6


def bang_off_snapshots(cfg: RunConfig):
    """States after initialization, the bang pulse and the free rotation.

    Returns ``(space, ramp, tau, snapshots)`` where ``snapshots`` is a list
    of ``(time, StateVector)``. The controls use ``delta_est``; the
    evolution uses the true ``delta``.
    """
    space = FockSpace(cfg.truncation)
    gce = math.sqrt(cfg.estimate * cfg.omega)
    ramp, tau = bang_off_schedule(cfg.estimate, cfg.omega, cfg.gf * gce)
    H = qrm_time_dependent_hamiltonian(QRMParams(cfg.delta, cfg.omega, 0.0, cfg.estimate), space, cd=False)
    psi = space.vacuum()
    snaps = [(0.0, psi)]
    t = 0.0
    for g, dur in ramp.segments:
        seg = RampSchedule.bang_off([(g, dur)])
        psi = StateVector(evolve(H, seg, psi.amplitudes, 1), space.basis)
        t += dur
        snaps.append((t, psi))
    return space, ramp, tau, snaps


def _fig6_row(cfg: RunConfig, stage: float) -> dict:
    stage = int(stage)
    space, ramp, tau, snaps = bang_off_snapshots(cfg)
    t, psi = snaps[stage]
    p = QRMParams(cfg.delta, cfg.omega, cfg.gf * math.sqrt(cfg.delta * cfg.omega))
    cov = quadrature_covariance(psi)
    w = np.linalg.eigvalsh(cov)
    row = {
        "stage": stage,
        "panel": "abc"[stage],
        "t": t,
        "tau_qsl": tau,
        "fidelity_target": fidelity(psi, qrm_ground_state(p, space)),
        "long_axis_deg": math.degrees(squeeze_axis_angle(psi)),
        "var_min": float(w[0]),
        "var_max": float(w[1]),
        "q_origin": float(husimi_q(psi, np.array([0.0]))[0]),
        "top_population": top_population(psi),
    }
    if stage == len(snaps) - 1:
        H = qrm_time_dependent_hamiltonian(QRMParams(cfg.delta, cfg.omega, 0.0, cfg.estimate), space, cd=False)

        def state_at(x):
            Hx = qrm_time_dependent_hamiltonian(QRMParams(x, cfg.omega, 0.0, cfg.estimate), space, cd=False)
            return evolve(Hx, ramp, space.vacuum().amplitudes, 1)

        est = qfi_overlap_path(state_at, cfg.delta, cfg.qfi_step * cfg.delta)
        _, traj = evolve(H, ramp, space.vacuum().amplitudes, 2048, record=True)
        states = np.vstack([space.vacuum().amplitudes[None], traj[2]])
        row["qfi"] = _qfi_value(est)
        row["trajectory_bound"] = trajectory_bound(states, qrm_h_omega(space), ramp.T)
        row["flags"] = ";".join(sorted(est.flags))
    return row


def run_fig6(cfg: RunConfig) -> SweepResult:
    """Bang-off preparation of the Rabi ground state with Husimi snapshots."""
    rows = _map_rows(_fig6_row, cfg, [0.0, 1.0, 2.0])
    _, _, _, snaps = bang_off_snapshots(cfg)
    re, im, alpha = husimi_grid(cfg.husimi_extent, cfg.husimi_points)
    extra = {}
    for (_, psi), tag in zip(snaps, "abc"):
        extra[f"fig6_husimi_{tag}.csv"] = husimi_to_csv(re, im, husimi_q(psi, alpha))
    cols = ("stage", "panel", "t", "tau_qsl", "fidelity_target", "long_axis_deg", "var_min",
            "var_max", "q_origin", "top_population", "qfi", "trajectory_bound", "flags", "status")
    return SweepResult("fig6", "stage", cols, rows, {"config": cfg.as_dict()}, extra)


RUNNERS = {
    "fig1": run_fig1,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "fig6": run_fig6,
    "custom": run_custom,
}


def run_experiment(cfg: RunConfig) -> SweepResult:
    return RUNNERS[cfg.experiment](cfg)
