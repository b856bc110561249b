"""Run configuration and the time-stepping driver shared by the CLI and tests."""

from __future__ import annotations

import csv
import math
import os
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .analysis import cfl_timestep
from .diagnostics import DiagnosticsRecord, collect, total_hamiltonian
from .grid import GridSpec
from .initdata import InitialDataError, PlaneWaveParams, paper_initial_state
from .model import FIELD_NAMES, LambdaField, Params, ProcaState
from .scheme import LinearStepSystem, SchemeKind, SolverConfig, SolverError, step

WORKERS_ENV = "PROCA_SPS_WORKERS"
PRECISIONS = {"float64": np.float64, "extended": np.longdouble}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Everything needed to reproduce one run.

    The defaults are the plane-wave experiment: c = p1 = p2 = 1,
    lambda = 0.01, CFL 1/4, 0 <= t <= 80 on a 100 x 100 x 1 grid.
    """

    scheme: str = "sps"
    n1: int = 100
    n2: int = 100
    n3: int = 1
    cfl: float = 0.25
    t_end: float = 80.0
    c: float = 1.0
    p1: float = 1.0
    p2: float = 1.0
    lambda_: float = 0.01
    amplitude: float = 1.0
    solver: str = "spectral"
    tol: float = 1e-12
    max_iter: int = 10000
    report_every: int = 10
    snapshot_times: list = field(default_factory=list)
    out_dir: str = "runs/default"
    divergence_threshold: float = 1e6
    precision: str = "float64"
    initial_file: str | None = None

    # file/flag keys that differ from attribute names
    ALIASES = {"lambda": "lambda_"}

    def __post_init__(self):
        self.scheme = str(self.scheme).lower()
        self.snapshot_times = [float(t) for t in self.snapshot_times]

    @classmethod
    def from_mapping(cls, mapping: dict) -> RunConfig:
        names = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in mapping.items():
            key = key.replace("-", "_")
            key = cls.ALIASES.get(key, key)
            if key not in names:
                raise ConfigError(f"unknown configuration key {key!r}")
            kwargs[key] = value
        return cls(**kwargs)

    def to_mapping(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lambda_")
        return out

    def validate(self) -> RunConfig:
        try:
            SchemeKind.parse(self.scheme)
        except ValueError:
            raise ConfigError(f"scheme must be 'sps' or 'ss', got {self.scheme!r}") from None
        for name in ("n1", "n2", "n3"):
            n = getattr(self, name)
            if int(n) != n or n < 1:
                raise ConfigError(f"{name} must be a positive integer")
        checks = [
            (self.cfl > 0, "cfl must be positive"),
            (self.t_end >= 0, "t_end must be non-negative"),
            (self.c > 0, "c must be positive"),
            (self.p1 != 0, "p1 must be nonzero"),
            (self.lambda_ != 0, "lambda must be nonzero"),
            (self.tol > 0, "tol must be positive"),
            (self.max_iter >= 1, "max_iter must be at least 1"),
            (self.report_every >= 1, "report_every must be at least 1"),
            (self.divergence_threshold > 0, "divergence_threshold must be positive"),
            (self.solver in ("spectral", "iterative"), "solver must be 'spectral' or 'iterative'"),
            (self.precision in PRECISIONS, f"precision must be one of {sorted(PRECISIONS)}"),
            (all(0 <= t <= self.t_end for t in self.snapshot_times),
             "snapshot times must lie in [0, t_end]"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        try:
            PlaneWaveParams(self.amplitude, self.p1, self.p2, self.c)
        except InitialDataError as exc:
            raise ConfigError(str(exc)) from None
        return self

    # derived objects

    @property
    def grid(self) -> GridSpec:
        return GridSpec.unit_box(int(self.n1), int(self.n2), int(self.n3))

    @property
    def dt(self) -> float:
        return cfl_timestep(self.grid, self.cfl, self.c)

    @property
    def params(self) -> Params:
        return Params(c=self.c, p1=self.p1, p2=self.p2, lambda0=self.lambda_, dt=self.dt,
                      a=self.amplitude)

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_end / self.dt + 1e-9))

    def step_of(self, t: float) -> int:
        return int(round(t / self.dt))

    def solver_config(self) -> SolverConfig:
        workers = os.environ.get(WORKERS_ENV)
        return SolverConfig(kind=self.solver, tol=self.tol, max_iter=self.max_iter,
                            workers=int(workers) if workers else None)


@dataclass
class RunResult:
    config: RunConfig
    records: list[DiagnosticsRecord]
    final_state: ProcaState
    termination: str  # completed | diverged | solver_failure
    final_valid_time: float
    steps_taken: int
    hc0: float
    snapshots: dict = field(default_factory=dict)  # requested t -> state
    timings: dict = field(default_factory=dict)
    message: str = ""


def load_tabulated_state(path, grid: GridSpec, dtype=np.float64) -> ProcaState:
    """Read initial fields from a CSV table.

    The table has a header row containing ``k1,k2,k3`` and the eight field
    names (any order, extra columns ignored) and one row per interior cell.
    """
    state = ProcaState.zeros(grid, dtype=dtype)
    seen = np.zeros(grid.interior_shape, dtype=bool)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        missing = {"k1", "k2", "k3", *FIELD_NAMES} - set(rows.fieldnames or ())
        if missing:
            raise ConfigError(f"{path}: missing columns {sorted(missing)}")
        for row in rows:
            k1, k2, k3 = int(row["k1"]), int(row["k2"]), int(row["k3"])
            if not (0 <= k1 < grid.n1 and 0 <= k2 < grid.n2 and 0 <= k3 < grid.n3):
                raise ConfigError(f"{path}: index ({k1}, {k2}, {k3}) outside the grid")
            for i, name in enumerate(FIELD_NAMES):
                state.interior[i, k3, k2, k1] = dtype(row[name])
            seen[k3, k2, k1] = True
    if not seen.all():
        raise ConfigError(f"{path}: {int((~seen).sum())} interior cells have no row")
    return state.fill_ghosts()


def initial_state(config: RunConfig, params: Params) -> ProcaState:
    dtype = PRECISIONS[config.precision]
    if config.initial_file:
        return load_tabulated_state(config.initial_file, config.grid, dtype)
    return paper_initial_state(config.grid, params, dtype)


def simulate(config: RunConfig, checkpoint_times=(), on_record=None) -> RunResult:
    """Evolve the plane-wave data and collect diagnostics.

    Records are taken every ``report_every`` steps, at the last step, at
    snapshot and checkpoint times, and at the step that trips the divergence
    cutoff. The run stops at the first step whose largest field magnitude
    exceeds ``divergence_threshold`` (or is not finite), or when the solver
    fails; that step's time is the final valid time.
    """
    config.validate()
    t_start = time.perf_counter()
    grid, params = config.grid, config.params
    kind = SchemeKind.parse(config.scheme)
    lam = LambdaField.constant(config.lambda_)
    system = LinearStepSystem(kind, params, lam, grid)
    solver = config.solver_config()
    timings = {"setup": 0.0, "solve": 0.0, "checks": 0.0, "diagnostics": 0.0}

    u = initial_state(config, params)
    hc0 = total_hamiltonian(u, params, lam, kind)
    snap_steps = {config.step_of(t): t for t in config.snapshot_times}
    record_steps = set(snap_steps) | {config.step_of(t) for t in checkpoint_times}
    snapshots = {}

    def emit(rec):
        records.append(rec)
        if on_record is not None:
            on_record(rec)

    records: list[DiagnosticsRecord] = []
    emit(collect(None, u, params, lam, kind, hc0))
    if 0 in snap_steps:
        snapshots[snap_steps[0]] = u.copy()
    if solver.kind == "spectral":
        system.spectral_factors(system.lam_bar(0.0))
    timings["setup"] = time.perf_counter() - t_start

    termination, message = "completed", ""
    final_valid_time = config.n_steps * config.dt
    n_total = config.n_steps
    taken = 0
    for n in range(1, n_total + 1):
        t0 = time.perf_counter()
        try:
            u_next = step(u, system, solver)
        except SolverError as exc:
            termination, message = "solver_failure", str(exc)
            final_valid_time = u.t + params.dt
            break
        u_next.t = n * params.dt  # avoid accumulating round-off in t
        t1 = time.perf_counter()
        mx = u_next.max_abs()
        diverged = not math.isfinite(mx) or mx > config.divergence_threshold
        t2 = time.perf_counter()
        timings["solve"] += t1 - t0
        timings["checks"] += t2 - t1
        taken = n
        if n % config.report_every == 0 or n == n_total or diverged or n in record_steps:
            iters = system.last_info.iterations if system.last_info else None
            with np.errstate(all="ignore"):
                emit(collect(u, u_next, params, lam, kind, hc0, iters))
        if n in snap_steps:
            snapshots[snap_steps[n]] = u_next.copy()
        timings["diagnostics"] += time.perf_counter() - t2
        u = u_next
        if diverged:
            termination = "diverged"
            message = f"max |field| = {mx:.3e} exceeds {config.divergence_threshold:g}"
            final_valid_time = u.t
            break

    timings["total"] = time.perf_counter() - t_start
    return RunResult(config, records, u, termination, final_valid_time, taken, hc0,
                     snapshots, timings, message)
