"""Explicit Euler time integration with Dirichlet boundary overwrite."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .chebyshev import SpectralGrid
from .operator import RhsWorkspace, StepFailure, rhs_spectral
from .soil import SoilParams

log = logging.getLogger(__name__)

CLAMP_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Ramp:
    """Value moving linearly from ``start`` at ``t = 0`` to ``end`` at ``t = duration``."""

    start: float
    end: float
    duration: float

    def __post_init__(self):
        for v in (self.start, self.end):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"boundary moisture content must lie in [0, 1], got {v!r}")
        if not self.duration >= 0:
            raise ValueError(f"ramp duration must be non-negative, got {self.duration!r}")

    @classmethod
    def constant(cls, value, duration=0.0):
        return cls(value, value, duration)

    def __call__(self, t: float) -> float:
        if self.start == self.end or self.duration == 0:
            return self.start
        s = t / self.duration
        return self.start * (1.0 - s) + self.end * s


@dataclass(frozen=True)
class BoundaryConditions:
    """Dirichlet data at the surface (``top``, depth 0) and the base (``bottom``, depth Z)."""

    top: Ramp
    bottom: Ramp


@dataclass(frozen=True)
class Diagnostics:
    theta_min: float
    theta_max: float
    clamp_count: int = 0
    rhs_norm: float = 0.0


@dataclass(frozen=True)
class SimState:
    t: float
    theta: np.ndarray = field(repr=False)
    step_index: int = 0
    diagnostics: Diagnostics | None = None

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        if self.diagnostics is None:
            object.__setattr__(self, "diagnostics", Diagnostics(float(theta.min()), float(theta.max())))


def init_state(ic: Callable, grid: SpectralGrid, bc: BoundaryConditions) -> SimState:
    """Sample ``ic`` (a function of physical depth) at the nodes, then impose ``bc(0)``."""
    theta = np.array(ic(grid.physical_nodes), dtype=float)
    if theta.shape != (grid.size,):
        theta = np.broadcast_to(theta, (grid.size,)).copy()
    if not np.all(np.isfinite(theta)) or theta.min() < 0.0 or theta.max() > 1.0:
        bad = int(np.flatnonzero(~((theta >= 0) & (theta <= 1)))[0])
        raise ValueError(
            f"initial condition outside [0, 1]: theta={theta[bad]!r} at depth {grid.physical_nodes[bad]:g}"
        )
    theta[grid.index_lo] = bc.top(0.0)
    theta[grid.index_hi] = bc.bottom(0.0)
    return SimState(0.0, theta)


def step(
    state: SimState,
    dt: float,
    ws: RhsWorkspace,
    soil: SoilParams,
    bc: BoundaryConditions,
    clamp_tolerance: float = CLAMP_TOLERANCE,
    t_next: float | None = None,
) -> SimState:
    """One explicit Euler step.

    The interior update is followed by the boundary overwrite with
    ``bc(t + dt)`` and a clamp of interior nodes to
    ``[theta_r - tol, theta_s + tol]``; clamped nodes are counted.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    t_new = state.t + dt if t_next is None else t_next
    try:
        rhs = rhs_spectral(state.theta, ws, soil)
    except StepFailure as exc:
        exc.t = t_new
        raise
    rhs_norm = float(np.abs(rhs).max())
    with np.errstate(over="ignore", invalid="ignore"):
        theta = state.theta + dt * rhs
    bad = np.flatnonzero(~np.isfinite(theta))
    if bad.size:
        raise StepFailure("non-finite moisture content after update", node=int(bad[0]), t=t_new, rhs_norm=rhs_norm)

    lo_i, hi_i = ws.grid.index_lo, ws.grid.index_hi
    theta[lo_i] = bc.top(t_new)
    theta[hi_i] = bc.bottom(t_new)

    interior = np.ones(theta.size, dtype=bool)
    interior[[lo_i, hi_i]] = False
    lo, hi = soil.theta_r - clamp_tolerance, soil.theta_s + clamp_tolerance
    out = interior & ((theta < lo) | (theta > hi))
    n_clamped = int(np.count_nonzero(out))
    if n_clamped:
        theta[out] = np.clip(theta[out], lo, hi)

    prev = state.diagnostics.clamp_count if state.diagnostics else 0
    diag = Diagnostics(float(theta.min()), float(theta.max()), prev + n_clamped, rhs_norm)
    return SimState(t_new, theta, state.step_index + 1, diag)


@dataclass
class Trajectory:
    """Snapshots of one run plus the physical node coordinates."""

    z: np.ndarray
    snapshots: list = field(default_factory=list)
    steps_taken: int = 0
    completed: bool = False
    failure: str | None = None

    @property
    def final(self) -> SimState:
        return self.snapshots[-1]

    @property
    def clamp_count(self) -> int:
        return self.final.diagnostics.clamp_count if self.snapshots else 0

    @property
    def theta_min(self) -> float:
        return min(s.diagnostics.theta_min for s in self.snapshots)

    @property
    def theta_max(self) -> float:
        return max(s.diagnostics.theta_max for s in self.snapshots)


def snapshot_steps(n_steps: int, n_snapshots: int) -> np.ndarray:
    """Step indices at which snapshots are taken, always including 0 and ``n_steps``."""
    if n_steps == 0 or n_snapshots <= 1:
        return np.array(sorted({0, n_steps}))
    return np.unique(np.round(np.linspace(0, n_steps, n_snapshots)).astype(int))


def integrate(
    state: SimState,
    n_steps: int,
    dt: float,
    ws: RhsWorkspace,
    soil: SoilParams,
    bc: BoundaryConditions,
    n_snapshots: int = 11,
    clamp_tolerance: float = CLAMP_TOLERANCE,
    max_clamps: int | None = None,
    on_step: Callable | None = None,
) -> Trajectory:
    """Advance ``state`` by ``n_steps`` steps, keeping snapshots at a fixed cadence.

    Times are ``t = k * dt`` so that the final time is reproduced without
    accumulated rounding. ``on_step(state)`` is called after every step.
    Raises :class:`StepFailure` (with ``partial`` set to the trajectory so
    far) on non-finite values or when the clamp count exceeds ``max_clamps``.
    """
    traj = Trajectory(z=ws.grid.physical_nodes)
    marks = set(snapshot_steps(n_steps, n_snapshots).tolist())
    traj.snapshots.append(state)
    for k in range(1, n_steps + 1):
        try:
            state = step(state, dt, ws, soil, bc, clamp_tolerance, t_next=k * dt)
            if max_clamps is not None and state.diagnostics.clamp_count > max_clamps:
                raise StepFailure(
                    f"clamp budget exceeded ({state.diagnostics.clamp_count} > {max_clamps})",
                    t=state.t,
                    rhs_norm=state.diagnostics.rhs_norm,
                )
        except StepFailure as exc:
            traj.steps_taken = k - 1
            traj.failure = str(exc)
            if traj.snapshots[-1] is not state:
                traj.snapshots.append(state)
            exc.partial = traj
            log.warning("run stopped at step %d: %s", k, exc)
            raise
        if on_step is not None:
            on_step(state)
        if k in marks:
            traj.snapshots.append(state)
    traj.steps_taken = n_steps
    traj.completed = True
    return traj


def run(config, on_step: Callable | None = None) -> Trajectory:
    """Run a :class:`~peririchards.config.SimConfig` to its final time.

    ``on_step`` is passed to :func:`integrate`.
    """
    grid = config.make_grid()
    ws = config.make_workspace(grid)
    state = init_state(config.initial_profile(grid), grid, config.boundary)
    return integrate(
        state,
        config.n_steps,
        config.time.dt,
        ws,
        config.soil,
        config.boundary,
        n_snapshots=config.time.snapshots,
        clamp_tolerance=config.stability.clamp_tolerance,
        max_clamps=config.stability.max_clamps,
        on_step=on_step,
    )

