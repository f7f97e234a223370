"""Time evolution of the Coulomb-gauge system on the torus.

Two right-hand sides are provided. ``direct`` evaluates the wave equations for
``A_j`` and ``phi`` term by term; ``nullform`` routes the quadratic terms
through null forms, ``D^-1`` and Riesz transforms. The temporal potential is an
ODE unknown with ``d a0/dt = B0``.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, NamedTuple

import numpy as np

from .elliptic import a0_residual, compute_b0, solve_a0
from .fields import State, charge, energy, gauge_divergence, null_form, sobolev_norm, spatial_current
from .spectral import (
    Grid2D,
    ScalarField,
    VectorField,
    frac_op,
    gradient,
    l2_norm,
    laplacian,
    leray,
    partial,
    riesz,
    truncate,
)

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "BlowupDetected",
    "DataSpec",
    "SimConfig",
    "MonitorRow",
    "Tendency",
    "make_initial_data",
    "quadratic_current",
    "null_quadratic_current",
    "transport",
    "null_transport",
    "rhs_direct",
    "rhs_nullform",
    "step_rk4",
    "simulate",
    "monitor",
    "write_monitor_csv",
    "convergence_study",
    "ConvergenceStudy",
]

FORMULATIONS = ("direct", "nullform")
MONITOR_HEADER = ["t", "charge", "energy", "gauge_div", "a0_residual", "hs_phi", "hsp_a"]


class ConfigError(ValueError):
    pass


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


class BlowupDetected(RuntimeError):
    def __init__(self, stage: int, time: float, monitors: list | None = None):
        super().__init__(f"non-finite values in RK4 stage {stage} of the step starting at t={time:.6g}")
        self.stage = stage
        self.time = time
        self.monitors = monitors or []


@dataclass(frozen=True)
class DataSpec:
    """Regularity labels and size of the random initial data."""

    s: float = 2.0
    sp: float = 2.0
    amplitude: float = 0.5
    band: int = 4


@dataclass(frozen=True)
class SimConfig:
    n: int = 64
    length: float = 2 * math.pi
    dt: float | None = None
    t_end: float = 1.0
    formulation: str = "nullform"
    seed: int = 0
    data_spec: DataSpec = field(default_factory=DataSpec)
    monitor_stride: int = 1
    snapshots: bool = False

    def __post_init__(self):
        if self.dt is None:
            object.__setattr__(self, "dt", 0.5 * self.length / self.n)
        try:
            Grid2D(self.n, self.length)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ConfigError(f"t_end must be nonnegative, got {self.t_end}")
        if self.formulation not in FORMULATIONS:
            raise ConfigError(f"formulation must be one of {FORMULATIONS}, got {self.formulation!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.monitor_stride < 1:
            raise ConfigError(f"monitor_stride must be >= 1, got {self.monitor_stride}")
        if not 0 <= self.data_spec.band <= self.n / 3:
            raise ConfigError(f"band must lie in [0, n/3], got {self.data_spec.band}")

    @classmethod
    def from_dict(cls, d: dict) -> SimConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        d = dict(d)
        spec = d.pop("data_spec", {})
        if isinstance(spec, dict):
            sknown = {f.name for f in fields(DataSpec)}
            bad = sorted(set(spec) - sknown)
            if bad:
                raise ConfigError(f"unknown data_spec key(s): {', '.join(bad)}")
            for key, val in spec.items():
                ok = _is_int(val) if key == "band" else _is_real(val)
                if not ok:
                    raise ConfigError(f"field 'data_spec.{key}' has invalid value {val!r}")
            spec = DataSpec(**spec)
        elif not isinstance(spec, DataSpec):
            raise ConfigError(f"field 'data_spec' must be an object, got {spec!r}")
        for key in ("n", "seed", "monitor_stride"):
            if key in d and not _is_int(d[key]):
                raise ConfigError(f"field '{key}' must be an integer, got {d[key]!r}")
        for key in ("length", "dt", "t_end"):
            if key in d and not (_is_real(d[key]) or (key == "dt" and d[key] is None)):
                raise ConfigError(f"field '{key}' must be a number, got {d[key]!r}")
        if "formulation" in d and not isinstance(d["formulation"], str):
            raise ConfigError(f"field 'formulation' must be a string, got {d['formulation']!r}")
        if "snapshots" in d and not isinstance(d["snapshots"], bool):
            raise ConfigError(f"field 'snapshots' must be true or false, got {d['snapshots']!r}")
        return cls(data_spec=spec, **d)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def grid(self) -> Grid2D:
        return Grid2D(self.n, self.length)

    def steps(self) -> tuple[int, float]:
        """Number of steps and the step actually used to land on ``t_end``."""
        if self.t_end == 0:
            return 0, self.dt
        n = max(1, math.ceil(self.t_end / self.dt - 1e-9))
        return n, self.t_end / n


@dataclass(frozen=True)
class MonitorRow:
    t: float
    charge: float
    energy: float
    gauge_div: float
    a0_residual: float
    h_s_norm_phi: float
    h_sprime_norm_a: float

    def as_list(self) -> list[float]:
        return [self.t, self.charge, self.energy, self.gauge_div, self.a0_residual,
                self.h_s_norm_phi, self.h_sprime_norm_a]


class Tendency(NamedTuple):
    """Time derivative of a :class:`State`, component by component."""

    phi: ScalarField
    phi_t: ScalarField
    a: VectorField
    a_t: VectorField
    a0: ScalarField


# -- initial data ------------------------------------------------------------


def _random_field(grid: Grid2D, rng: np.random.Generator, sigma: float, spec: DataSpec,
                  real: bool) -> ScalarField:
    n = grid.n
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    m1, m2 = grid.modes
    band = np.maximum(np.abs(m1), np.abs(m2)) <= spec.band
    weight = spec.amplitude * (1 + grid.kabs**2) ** (-(sigma + 1) / 2)
    f = ScalarField(grid, np.where(band, weight * g, 0), spectral=True)
    if real:
        # Hermitian symmetrization: keep the real part in physical space.
        return ScalarField(grid, f.values.real, real=True)
    return f.to_physical()


def make_initial_data(cfg: SimConfig) -> State:
    """Seeded band-limited data; ``a`` and ``a_t`` are Leray projected, ``a0`` solved for."""
    grid = cfg.grid
    spec = cfg.data_spec
    streams = [np.random.default_rng(c) for c in np.random.SeedSequence(cfg.seed).spawn(6)]
    phi = _random_field(grid, streams[0], spec.s, spec, real=False)
    phi_t = _random_field(grid, streams[1], spec.s - 1, spec, real=False)
    a = leray(VectorField(_random_field(grid, streams[2], spec.sp, spec, real=True),
                          _random_field(grid, streams[3], spec.sp, spec, real=True)))
    a_t = leray(VectorField(_random_field(grid, streams[4], spec.sp - 1, spec, real=True),
                            _random_field(grid, streams[5], spec.sp - 1, spec, real=True)))
    a0 = solve_a0(phi, phi_t)
    return State(phi, phi_t, a, a_t, a0, 0.0)


# -- quadratic terms in both formulations ------------------------------------


def quadratic_current(phi: ScalarField) -> VectorField:
    """``X_j = -Im(phi conj(d_j phi))``, de-aliased."""
    p = phi.values
    comps = []
    for j in (1, 2):
        dj = partial(phi, j).values
        comps.append(truncate(ScalarField(phi.grid, -np.imag(p * np.conj(dj)), real=True)))
    return VectorField(*comps)


def null_quadratic_current(phi: ScalarField) -> VectorField:
    """``2 R^k D^-1 Q_jk(Re phi, Im phi)`` summed over ``k``."""
    u, v = phi.re, phi.im
    comps = []
    for j in (1, 2):
        acc = None
        for k in (1, 2):
            if k == j:
                continue
            term = 2 * riesz(frac_op(null_form(u, v, j, k), -1, "homogeneous"), k)
            acc = term if acc is None else acc + term
        comps.append(acc)
    return VectorField(*comps)


def transport(phi: ScalarField, a: VectorField) -> ScalarField:
    """``A^j d_j phi``, de-aliased."""
    g = phi.grid
    vals = a.x1.values * partial(phi, 1).values + a.x2.values * partial(phi, 2).values
    return truncate(ScalarField(g, vals))


def null_transport(phi: ScalarField, a: VectorField) -> ScalarField:
    """``sum_{j,k} Q_jk(phi, D^-1 [R^j A^k - R^k A^j])`` over all ordered pairs.

    Equals ``2 A^j d_j phi`` when ``a`` is divergence free with zero mean.
    """
    acc = None
    for j in (1, 2):
        for k in (1, 2):
            if j == k:
                continue
            pot = frac_op(riesz(a[k], j) - riesz(a[j], k), -1, "homogeneous")
            term = null_form(phi, pot, j, k)
            acc = term if acc is None else acc + term
    return acc


def _cubic(weight: np.ndarray, f: ScalarField) -> ScalarField:
    return truncate(ScalarField(f.grid, weight * f.values, real=f.real))


def _phi_tt(state: State, b0: ScalarField, box_transport: ScalarField) -> ScalarField:
    """``d_t^2 phi = Delta phi - (Box phi)`` given the transport part of ``Box phi``."""
    phi, phi_t, a0 = state.phi, state.phi_t, state.a0
    g = phi.grid
    a2 = state.a.x1.values ** 2 + state.a.x2.values ** 2 - a0.values ** 2
    box = (box_transport
           + 2j * truncate(ScalarField(g, a0.values * phi_t.values))
           + 1j * truncate(ScalarField(g, b0.values * phi.values))
           + _cubic(a2, phi))
    return laplacian(phi) - box


def rhs_direct(state: State) -> Tendency:
    """Raw Coulomb-gauge equations; the ``A`` forcing is Leray projected."""
    phi, a = state.phi, state.a
    b0 = compute_b0(phi, a)
    jvec = spatial_current(phi, a)
    forcing = VectorField(*(laplacian(a[j]) - jvec[j] + partial(b0, j) for j in (1, 2)))
    a_tt = leray(forcing)
    phi_tt = _phi_tt(state, b0, -2j * transport(phi, a))
    return Tendency(state.phi_t, phi_tt, state.a_t, a_tt, b0)


def rhs_nullform(state: State) -> Tendency:
    """Null-form equations for ``A_j`` and ``phi``."""
    phi, a = state.phi, state.a
    b0 = compute_b0(phi, a)
    w = np.abs(phi.values) ** 2
    cubic = leray(VectorField(_cubic(w, a.x1), _cubic(w, a.x2)))
    quad = null_quadratic_current(phi)
    a_tt = VectorField(*(laplacian(a[j]) - quad[j] - cubic[j] for j in (1, 2)))
    phi_tt = _phi_tt(state, b0, -1j * null_transport(phi, a))
    return Tendency(state.phi_t, phi_tt, state.a_t, a_tt, b0)


RHS = {"direct": rhs_direct, "nullform": rhs_nullform}


# -- time stepping -----------------------------------------------------------


def _arrays(obj) -> list[np.ndarray]:
    return [obj.phi.values, obj.phi_t.values, obj.a.x1.values, obj.a.x2.values,
            obj.a_t.x1.values, obj.a_t.x2.values, obj.a0.values]


def _state(grid: Grid2D, arrs: Iterable[np.ndarray], time: float) -> State:
    phi, phi_t, a1, a2, b1, b2, a0 = arrs
    r = lambda v: ScalarField(grid, v, real=True)  # noqa: E731
    return State(ScalarField(grid, phi), ScalarField(grid, phi_t), VectorField(r(a1), r(a2)),
                 VectorField(r(b1), r(b2)), r(a0), time)


def step_rk4(state: State, dt: float, formulation: str = "nullform") -> State:
    """One classical Runge-Kutta step of size ``dt``."""
    with np.errstate(over="ignore", invalid="ignore"):
        return _step_rk4(state, dt, RHS[formulation])


def _step_rk4(state: State, dt: float, rhs) -> State:
    g = state.grid
    y = _arrays(state)
    t = state.time
    ks = []
    stage_in = state
    for stage, (frac, prev) in enumerate(((0.0, None), (0.5, 0), (0.5, 1), (1.0, 2)), start=1):
        if prev is not None:
            stage_in = _state(g, [yi + frac * dt * ki for yi, ki in zip(y, ks[prev])], t + frac * dt)
        k = _arrays(rhs(stage_in))
        if not all(np.all(np.isfinite(ki)) for ki in k):
            raise BlowupDetected(stage, t)
        ks.append(k)
    out = [yi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4) for yi, k1, k2, k3, k4 in zip(y, *ks)]
    if not all(np.all(np.isfinite(v)) for v in out):
        raise BlowupDetected(4, t)
    return _state(g, out, t + dt)


def monitor(state: State, spec: DataSpec) -> MonitorRow:
    a_norm = math.hypot(sobolev_norm(state.a.x1, spec.sp), sobolev_norm(state.a.x2, spec.sp))
    return MonitorRow(
        t=state.time,
        charge=charge(state),
        energy=energy(state),
        gauge_div=gauge_divergence(state),
        a0_residual=a0_residual(state),
        h_s_norm_phi=sobolev_norm(state.phi, spec.s),
        h_sprime_norm_a=a_norm,
    )


def simulate(cfg: SimConfig, state: State | None = None) -> tuple[State, list[MonitorRow]]:
    """Evolve from the seeded initial data (or ``state``) to ``cfg.t_end``.

    Monitors are recorded at step 0, every ``monitor_stride`` steps, and at the
    final step.
    """
    state = make_initial_data(cfg) if state is None else state
    nsteps, dt = cfg.steps()
    rows = [monitor(state, cfg.data_spec)]
    for i in range(1, nsteps + 1):
        try:
            state = step_rk4(state, dt, cfg.formulation)
        except BlowupDetected as exc:
            exc.monitors = rows
            raise
        if i % cfg.monitor_stride == 0 or i == nsteps:
            rows.append(monitor(state, cfg.data_spec))
    return state, rows


def write_monitor_csv(rows: list[MonitorRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MONITOR_HEADER)
        for row in rows:
            w.writerow([repr(float(v)) for v in row.as_list()])


# -- convergence -------------------------------------------------------------

FIELD_GROUPS = {
    "phi": (0,),
    "phi_t": (1,),
    "a": (2, 3),
    "a_t": (4, 5),
    "a0": (6,),
}


@dataclass
class ConvergenceStudy:
    dts: list[float]
    orders: dict[str, list[float]]
    charge_drift: list[float]
    energy_drift: list[float]
    gauge_div: list[float]
    a0_residual: list[float]
    states: list[State] = field(repr=False, default_factory=list)
    initial: State | None = field(repr=False, default=None)

    @staticmethod
    def ratios(values: list[float]) -> list[float]:
        return [a / b if b else math.inf for a, b in zip(values, values[1:])]

    def rows(self) -> list[list]:
        out = []
        for i, dt in enumerate(self.dts):
            row = [dt, self.charge_drift[i], self.energy_drift[i], self.gauge_div[i], self.a0_residual[i]]
            for name in FIELD_GROUPS:
                vals = self.orders[name]
                row.append(vals[i - 2] if i >= 2 else "")
            out.append(row)
        return out

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["dt", "charge_drift", "energy_drift", "gauge_div", "a0_residual",
                        *(f"order_{k}" for k in FIELD_GROUPS)])
            for row in self.rows():
                w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _group_norm(s1: State, s2: State, idx: tuple[int, ...]) -> float:
    a1, a2 = _arrays(s1), _arrays(s2)
    area = s1.grid.cell_area
    return math.sqrt(sum(float(np.sum(np.abs(a1[i] - a2[i]) ** 2)) * area for i in idx))


def convergence_study(cfg: SimConfig, refinements: int = 3) -> ConvergenceStudy:
    """Run with ``dt, dt/2, ...`` (``refinements`` levels) and estimate the order."""
    if refinements < 3:
        raise ValueError("need at least 3 refinement levels")
    init = make_initial_data(cfg)
    states, dts = [], []
    cdrift, edrift, gdiv, ares = [], [], [], []
    for level in range(refinements):
        c = SimConfig(**{**asdict(cfg), "data_spec": cfg.data_spec, "dt": cfg.dt / 2**level})
        final, rows = simulate(c, init)
        first, last = rows[0], rows[-1]
        states.append(final)
        dts.append(c.steps()[1])
        cdrift.append(abs(last.charge - first.charge) / (1 + abs(first.charge)))
        edrift.append(abs(last.energy - first.energy) / abs(first.energy) if first.energy else 0.0)
        gdiv.append(last.gauge_div)
        ares.append(last.a0_residual)
        log.info("level %d dt=%.4g done", level, dts[-1])
    orders = {}
    for name, idx in FIELD_GROUPS.items():
        vals = []
        for i in range(refinements - 2):
            d1 = _group_norm(states[i], states[i + 1], idx)
            d2 = _group_norm(states[i + 1], states[i + 2], idx)
            vals.append(math.log2(d1 / d2) if d1 > 0 and d2 > 0 else math.nan)
        orders[name] = vals
    return ConvergenceStudy(dts, orders, cdrift, edrift, gdiv, ares, states, init)
