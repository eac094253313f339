"""Macroscopic Hamilton-Jacobi solver and its variational oracle.

Solves phi_t + H(phi_x) = 0 on a uniform 1-D grid with a monotone
Lax-Friedrichs scheme, periodic by default.  Linear initial data switches
to a non-periodic domain with exact boundary values (a plane wave is an
exact solution, so the boundary is known).  The independent check is the
Hopf-Lax formula, evaluated by exhaustive minimization against a sampled
Legendre dual: slow, simple, and hard to get wrong in the same way as a
finite-difference scheme.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .hamiltonian import Hamiltonian, LegendreTable, NumericalError

MIN_GRID = 8


@dataclass(frozen=True)
class MacroField:
    """Phase values on a uniform grid, left endpoint included, right excluded."""

    x: np.ndarray
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", vals)
        if x.ndim != 1 or vals.shape != x.shape:
            raise ValueError("x and values must be matching 1-D arrays")
        if len(x) < MIN_GRID:
            raise ValueError(f"grid too small: {len(x)} points, need >= {MIN_GRID}")
        steps = np.diff(x)
        if not np.all(np.isfinite(x)) or np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
            raise ValueError("x must be a finite uniform grid")
        if steps[0] <= 0:
            raise ValueError("x must be increasing")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        if self.time < 0:
            raise ValueError("time must be >= 0")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def length(self) -> float:
        """Period of the domain (the grid omits its right endpoint)."""
        return float(len(self.x)) * self.dx

    @classmethod
    def from_function(cls, fn, x_min: float, x_max: float, n_x: int,
                      time: float = 0.0) -> "MacroField":
        if not (x_max > x_min):
            raise ValueError("x_max must exceed x_min")
        dx = (x_max - x_min) / n_x
        x = x_min + dx * np.arange(n_x)
        return cls(x=x, values=np.asarray(fn(x), dtype=float) + np.zeros(n_x), time=time)


_INIT_RE = re.compile(r"^(parabola|cosine|linear):(.*)$")


def parse_initial_spec(text: str) -> tuple[str, dict]:
    """Initial profiles: parabola:a=..[,center=..], cosine:amp=.., linear:p=..."""
    m = _INIT_RE.match(text.strip())
    if not m:
        raise ValueError(f"unknown initial condition {text!r}")
    kind, body = m.group(1), m.group(2)
    params = {}
    for item in body.split(","):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"malformed initial parameter {item!r} in {text!r}")
        params[key.strip()] = float(val)
    allowed = {"parabola": {"a", "center"}, "cosine": {"amp"}, "linear": {"p"}}[kind]
    required = {"parabola": {"a"}, "cosine": {"amp"}, "linear": {"p"}}[kind]
    if not required <= set(params) or not set(params) <= allowed:
        raise ValueError(f"initial condition {kind} takes parameters {sorted(allowed)}, "
                         f"requires {sorted(required)}; got {sorted(params)}")
    return kind, params


def initial_profile(kind: str, params: dict, x, x_min: float, x_max: float):
    """Evaluate a named initial profile; the cosine bump spans one period."""
    x = np.asarray(x, dtype=float)
    if kind == "parabola":
        c = params.get("center", 0.0)
        return params["a"] * (x - c) ** 2
    if kind == "cosine":
        mid = 0.5 * (x_min + x_max)
        span = x_max - x_min
        return 0.5 * params["amp"] * (1.0 + np.cos(2.0 * math.pi * (x - mid) / span))
    if kind == "linear":
        return params["p"] * x
    raise ValueError(f"unknown initial kind {kind!r}")


def lf_step(field: MacroField, hamiltonian: Hamiltonian, alpha, dt: float,
            ghost: tuple[float, float] | None = None) -> MacroField:
    """One Lax-Friedrichs update; periodic unless ghost values are supplied.

    alpha may be a scalar or a per-point array; monotonicity needs
    dt * alpha <= dx and alpha >= |H'| on the slopes present, which the
    caller's CFL choice guarantees.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    dx = field.dx
    a = np.asarray(alpha, dtype=float)
    if float(np.max(a)) * dt > dx * (1.0 + 1e-12):
        raise ValueError(f"CFL violation: dt*alpha = {float(np.max(a)) * dt!r} exceeds dx = {dx!r}")
    phi = field.values
    if ghost is None:
        left = np.roll(phi, 1)
        right = np.roll(phi, -1)
    else:
        left = np.concatenate(([ghost[0]], phi[:-1]))
        right = np.concatenate((phi[1:], [ghost[1]]))
    dminus = (phi - left) / dx
    dplus = (right - phi) / dx
    h_mid = hamiltonian.value(0.5 * (dminus + dplus))
    new = phi - dt * (h_mid - 0.5 * a * (dplus - dminus))
    return MacroField(x=field.x, values=new, time=field.time + dt)


def _local_alpha(hamiltonian: Hamiltonian, field: MacroField,
                 ghost: tuple[float, float] | None):
    phi = field.values
    dx = field.dx
    if ghost is None:
        left = np.roll(phi, 1)
        right = np.roll(phi, -1)
    else:
        left = np.concatenate(([ghost[0]], phi[:-1]))
        right = np.concatenate((phi[1:], [ghost[1]]))
    dminus = (phi - left) / dx
    dplus = (right - phi) / dx
    return np.maximum(np.abs(hamiltonian.grad(dminus)), np.abs(hamiltonian.grad(dplus)))


def _alpha_cap(hamiltonian: Hamiltonian, initial: MacroField, boundary) -> float:
    """Largest viscosity speed the run can meet, for the CFL budget."""
    if hamiltonian.speed_cap is not None:
        return float(hamiltonian.speed_cap)
    # unbounded |H'|: bound it through the initial Lipschitz constant, which a
    # monotone translation-invariant scheme never increases
    ghost = boundary(initial.time) if boundary is not None else None
    cap = float(np.max(_local_alpha(hamiltonian, initial, ghost)))
    return max(cap, 1e-12)


def evolve(initial: MacroField, hamiltonian: Hamiltonian, snapshot_times,
           cfl: float = 0.5, alpha: float | None = None,
           boundary=None) -> list[MacroField]:
    """March lf_step through the sorted snapshot times, landing exactly.

    boundary, when given, maps a time to (left, right) ghost values and
    switches the run to non-periodic.  alpha None (the default) uses local
    per-point viscosity speeds, refreshed every step, with the time step
    budgeted from the Hamiltonian's speed cap (or the initial slopes when
    it has none); an explicit alpha freezes one global speed instead.
    """
    if not (0 < cfl <= 1):
        raise ValueError("cfl must lie in (0, 1]")
    times = [float(t) for t in snapshot_times]
    if times != sorted(times) or times[0] < initial.time - 1e-12:
        raise ValueError("snapshot times must be sorted and start at or after the field time")
    use_local = alpha is None
    if use_local:
        alpha = _alpha_cap(hamiltonian, initial, boundary)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    dt_max = cfl * initial.dx / alpha

    out = []
    field = initial
    for target in times:
        span = target - field.time
        if span <= 1e-14:
            out.append(MacroField(x=field.x, values=field.values.copy(), time=target))
            continue
        n_steps = max(1, int(math.ceil(span / dt_max - 1e-12)))
        dt = span / n_steps
        for _ in range(n_steps):
            ghost = boundary(field.time) if boundary is not None else None
            a = _local_alpha(hamiltonian, field, ghost) if use_local else alpha
            field = lf_step(field, hamiltonian, a, dt, ghost=ghost)
        # land exactly on the snapshot clock, not on the summed-dt float
        field = MacroField(x=field.x, values=field.values, time=target)
        out.append(field)
    return out


@dataclass(frozen=True)
class HJRunConfig:
    """One macroscopic run: model, named initial profile, grid, horizon."""

    hamiltonian: Hamiltonian
    init_kind: str
    init_params: dict
    x_min: float = -4.0
    x_max: float = 4.0
    n_x: int = 400
    t_final: float = 1.0
    snapshot_count: int = 5
    cfl: float = 0.5
    alpha: float | None = None

    def __post_init__(self):
        if not (self.x_max > self.x_min):
            raise ValueError("x_max must exceed x_min")
        if self.n_x < MIN_GRID:
            raise ValueError(f"grid too small: n_x = {self.n_x}, need >= {MIN_GRID}")
        if not (self.t_final > 0):
            raise ValueError("t_final must be positive")
        if not (0 < self.cfl <= 1):
            raise ValueError("cfl must lie in (0, 1]")
        if self.snapshot_count < 2:
            raise ValueError("need at least 2 snapshots (initial and final)")
        if self.init_kind not in ("parabola", "cosine", "linear"):
            raise ValueError(f"unknown initial kind {self.init_kind!r}")


def solve_hj(config: HJRunConfig) -> list[MacroField]:
    """Snapshots at linspace(0, t_final, snapshot_count) for the configured run.

    The cosine profile is genuinely periodic and runs as is.  The linear
    profile is an exact traveling solution, so it runs on a non-periodic
    domain with formula boundary values.  The parabola is not periodic:
    wrapping it creates a ridge at the domain edge whose rarefaction fan
    would pollute the window, so with a capped-speed Hamiltonian the run
    happens on a domain enlarged beyond the numerical reach of that ridge
    and is cut back to the requested grid.  With an unbounded-speed source
    no finite enlargement escapes the ridge (its influence grows with the
    domain), so the run stays periodic; away from the edges the solution
    is unaffected.
    """
    x_min, x_max, n_x = config.x_min, config.x_max, config.n_x
    dx = (x_max - x_min) / n_x
    pad_cells = 0
    if config.init_kind == "parabola" and config.hamiltonian.speed_cap is not None:
        speed = config.alpha if config.alpha is not None else config.hamiltonian.speed_cap
        # one cell of influence per step: the ridge travels t*speed/cfl at most
        pad_cells = int(math.ceil(speed * config.t_final / (config.cfl * dx))) + 8
        n_x += 2 * pad_cells

    def profile(x):
        return initial_profile(config.init_kind, config.init_params,
                               x, config.x_min, config.x_max)

    # anchor at the requested origin so the interior window is bitwise the
    # grid an unpadded run would use
    x_grid = x_min + dx * (np.arange(n_x) - pad_cells)
    initial = MacroField(x=x_grid, values=profile(x_grid))
    x_min, x_max = float(x_grid[0]), float(x_grid[0]) + dx * n_x
    boundary = None
    if config.init_kind == "linear":
        p = config.init_params["p"]
        h_p = config.hamiltonian.value(p)
        x_left = x_min - dx
        x_right = x_min + n_x * dx

        def boundary(t, _p=p, _h=h_p, _xl=x_left, _xr=x_right):
            return _p * _xl - t * _h, _p * _xr - t * _h

    times = np.linspace(0.0, config.t_final, config.snapshot_count)
    fields = evolve(initial, config.hamiltonian, times, cfl=config.cfl,
                    alpha=config.alpha, boundary=boundary)
    if pad_cells:
        window = slice(pad_cells, pad_cells + config.n_x)
        fields = [MacroField(x=f.x[window], values=f.values[window], time=f.time)
                  for f in fields]
    return fields


def hopf_lax(initial: MacroField, table: LegendreTable, t: float) -> MacroField:
    """Variational solution min_y [phi0(y) + t L((x-y)/t)] on the periodic grid.

    Exhaustive minimization over all grid points and their periodic images
    within the reachable range; the dual is +inf beyond its table, which
    encodes the finite propagation speed.
    """
    if not (t > 0):
        raise ValueError("t must be positive")
    x = initial.x
    phi0 = initial.values
    period = initial.length
    reach = table.q_max * t
    n_images = int(math.ceil(reach / period)) + 1
    best = np.full(len(x), np.inf)
    for k in range(-n_images, n_images + 1):
        y = x + k * period
        for start in range(0, len(x), 256):  # row blocks keep memory flat
            xs = x[start:start + 256]
            q = (xs[:, None] - y[None, :]) / t
            cost = phi0[None, :] + t * table(q)
            np.minimum(best[start:start + 256], cost.min(axis=1),
                       out=best[start:start + 256])
    if not np.all(np.isfinite(best)):
        raise NumericalError("Hopf-Lax minimization found no reachable point; "
                             "the dual table is too narrow for this horizon")
    return MacroField(x=x, values=best, time=initial.time + t)
