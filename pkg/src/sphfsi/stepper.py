"""Dual-criteria time stepping.

One *advection* step rebuilds the neighbor topology and the fluid correction
matrices, then runs as many inner *acoustic* steps (pressure-wave CFL) as fit
into it, truncating the last one.  Each acoustic step freezes the interface
forces, advances the fluid with a drift-kick-drift scheme (density integrated
alongside velocity), and nests the solid substeps with their own stable step.
Solid kinematics are averaged over the substeps of each acoustic step and
consumed by the interface during the *next* acoustic step, which keeps the
coupling explicit.

Step-size rules (CFL constants are configuration):

    dt_adv = 0.25 min( h_F / |v|_max , h_F^2 / nu )      (viscous bound only
                                                          when nu > 0)
    dt_ac  = 0.6 h_F / (c0 + |v|_max)
    dt_s   = 0.6 h_S / (c_S + |v_S|_max)

A configured fixed step replaces dt_ac, and the advection step then snaps to
an integer multiple of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from sphfsi.correction import (
    CorrectionField,
    RegularizationParams,
    compute_correction_matrices,
    identity_correction,
    position_regularization,
)
from sphfsi.coupling import CouplingForces, InterfaceState, pressure_coupling
from sphfsi.fluid import (
    EosParams,
    boundary_continuity_rate,
    continuity_rate,
    momentum_rate,
    reinitialize_density,
)
from sphfsi.kernels import KernelSpec, kernel_w0, lattice_kernel_sum
from sphfsi.motion import MotionScript
from sphfsi.neighbors import CellGrid, CrossPairs, build_cross_pairs, build_neighbor_lists
from sphfsi.particles import BodyKind, ParticleSystem
from sphfsi.solid import (
    ElementInversionError,
    MaterialElastic,
    SolidReference,
    _advance_solid_jit,
    build_reference,
    stress_pipeline,
    surface_normals,
)


@dataclass
class CflConfig:
    advection: float = 0.25
    acoustic: float = 0.6
    solid: float = 0.6
    # quiet states would otherwise stretch the advection step indefinitely,
    # starving the summation reinitialization and letting the one-sided
    # surface flux accumulate into periodic pressure hammers
    max_acoustic_per_advection: int = 20


@dataclass
class StepSizes:
    dt_adv: float
    dt_ac: float
    dt_s: dict[str, float]
    fixed_dt: float | None = None


@dataclass
class SimClock:
    t: float = 0.0
    advection_steps: int = 0
    acoustic_steps: int = 0


@dataclass
class SolidBody:
    """One solid or wall body with its reference configuration and state."""

    name: str
    system: ParticleSystem
    spec: KernelSpec
    reference: SolidReference
    material: MaterialElastic | None = None
    clamped: np.ndarray | None = None
    script: MotionScript | None = None
    zeta: float = 0.0
    # evolving state
    disp: np.ndarray = field(default=None, repr=False)
    f_grad: np.ndarray = field(default=None, repr=False)
    pk1: np.ndarray = field(default=None, repr=False)
    vtilde: np.ndarray = field(default=None, repr=False)
    atilde: np.ndarray = field(default=None, repr=False)
    normals: np.ndarray = field(default=None, repr=False)
    dt_s: float = 0.0
    normal_degenerate: int = 0

    def __post_init__(self):
        n = self.system.n
        if self.clamped is None:
            self.clamped = np.zeros(n, dtype=bool)
        if self.disp is None:
            self.disp = np.zeros((n, 2))
        if self.f_grad is None:
            self.f_grad = np.tile(np.eye(2), (n, 1, 1))
        if self.pk1 is None:
            self.pk1 = np.zeros((n, 2, 2))
        if self.vtilde is None:
            self.vtilde = self.system.vel.copy()
        if self.atilde is None:
            self.atilde = np.zeros((n, 2))
        if self.normals is None:
            self.normals = self.reference.n0.copy()

    @property
    def is_wall(self) -> bool:
        return self.material is None

    def interface_state(self) -> InterfaceState:
        return InterfaceState(vtilde=self.vtilde, atilde=self.atilde, normals=self.normals)

    def stress_state(self):
        if self.material is None:
            raise ValueError(f"wall body {self.name!r} carries no stress state")
        return stress_pipeline(self.f_grad, self.material)


def make_wall_body(
    name: str,
    system: ParticleSystem,
    spec: KernelSpec,
    script: MotionScript | None = None,
) -> SolidBody:
    """Rigid wall: every particle clamped, zero averaged kinematics by default."""
    ref = build_reference(system, spec)
    body = SolidBody(
        name=name,
        system=system,
        spec=spec,
        reference=ref,
        material=None,
        clamped=np.ones(system.n, dtype=bool),
        script=script,
    )
    return body


def make_elastic_body(
    name: str,
    system: ParticleSystem,
    spec: KernelSpec,
    material: MaterialElastic,
    clamped: np.ndarray,
    script: MotionScript | None = None,
    zeta: float = 0.0,
) -> SolidBody:
    ref = build_reference(system, spec)
    return SolidBody(
        name=name,
        system=system,
        spec=spec,
        reference=ref,
        material=material,
        clamped=clamped.astype(bool),
        script=script,
        zeta=zeta,
    )


@dataclass
class Simulation:
    """Mutable state bundle for one run."""

    fluid: ParticleSystem
    fluid_spec: KernelSpec
    eos: EosParams
    nu: float = 0.0
    gravity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    solids: list[SolidBody] = field(default_factory=list)
    correction_enabled: bool = True
    density_reinit: bool = True
    wkgc_alpha: float = 0.5
    transport: RegularizationParams | None = None
    cfl: CflConfig = field(default_factory=CflConfig)
    fixed_dt: float | None = None
    periodic_grid: CellGrid | None = None  # verification suites only
    clock: SimClock = field(default_factory=SimClock)
    velocity_override: object = None  # fn(sim, t) applied after the kick
    post_acoustic: list = field(default_factory=list)  # fns(sim) after each acoustic step
    counters: dict = field(default_factory=lambda: {
        "viscous_skipped_pairs": 0,
        "correction_degenerate": 0,
        "normal_degenerate": 0,
        "interface_fallback": 0,
    })
    # caches, rebuilt every advection step
    _lattice_norm: float | None = None
    fluid_nl: object = None
    cross: list = field(default_factory=list)
    corr: CorrectionField | None = None
    last_coupling_balance: float = 0.0

    def wrap_periodic(self) -> None:
        g = self.periodic_grid
        if g is None:
            return
        pos = self.fluid.pos
        if g.periodic_x:
            pos[:, 0] = g.x0 + np.mod(pos[:, 0] - g.x0, g.lx)
        if g.periodic_y:
            pos[:, 1] = g.y0 + np.mod(pos[:, 1] - g.y0, g.ly)


def compute_time_steps(sim: Simulation) -> StepSizes:
    """Dual-criteria step sizes from the current velocities and sound speeds."""
    vmax = 0.0
    if sim.fluid.n:
        vmax = float(np.hypot(sim.fluid.vel[:, 0], sim.fluid.vel[:, 1]).max())
    h = sim.fluid_spec.h
    if sim.fixed_dt is not None:
        dt_ac = sim.fixed_dt
    else:
        dt_ac = sim.cfl.acoustic * h / (sim.eos.c0 + vmax)
    candidates = []
    if vmax > 0.0:
        candidates.append(h / vmax)
    if sim.nu > 0.0:
        candidates.append(h * h / sim.nu)
    cap = sim.cfl.max_acoustic_per_advection * dt_ac
    dt_adv = sim.cfl.advection * min(candidates) if candidates else cap
    dt_adv = min(max(dt_adv, dt_ac), cap)
    if sim.fixed_dt is not None:
        k = max(1, int(math.floor(dt_adv / dt_ac + 1e-12)))
        dt_adv = k * dt_ac
    dt_s: dict[str, float] = {}
    for body in sim.solids:
        if body.is_wall:
            continue
        vs = float(np.hypot(body.system.vel[:, 0], body.system.vel[:, 1]).max())
        dt = sim.cfl.solid * body.spec.h / (body.material.cS + vs)
        if dt <= 0.0 or not np.isfinite(dt):
            raise RuntimeError(f"non-positive solid step for body {body.name!r}")
        body.dt_s = dt
        dt_s[body.name] = dt
    if dt_ac <= 0.0 or dt_adv <= 0.0:
        raise RuntimeError("non-positive time step computed")
    return StepSizes(dt_adv=dt_adv, dt_ac=dt_ac, dt_s=dt_s, fixed_dt=sim.fixed_dt)


def rebuild_topology(sim: Simulation) -> None:
    """Refresh pair lists, reinitialize the density, and rebuild the
    correction field."""
    stamp = sim.clock.advection_steps
    sim.fluid_nl = build_neighbor_lists(
        sim.fluid, sim.fluid_spec, grid=sim.periodic_grid, stamp=stamp
    )
    sim.cross = [
        build_cross_pairs(sim.fluid, body.system, sim.fluid_spec, body.spec, stamp=stamp)
        for body in sim.solids
    ]
    if sim.density_reinit:
        if sim._lattice_norm is None:
            sim._lattice_norm = lattice_kernel_sum(sim.fluid.dp, sim.fluid_spec)
        reinitialize_density(
            sim.fluid, sim.fluid_nl, kernel_w0(sim.fluid_spec), sim.eos.rho0,
            boundary_lists=[
                (cp.forward, body.system.vol)
                for body, cp in zip(sim.solids, sim.cross)
            ],
            lattice_norm=sim._lattice_norm,
        )
        sim.fluid.p = sim.eos.pressure(sim.fluid.rho)
    if sim.correction_enabled:
        lists = [(sim.fluid_nl, sim.fluid.vol)]
        for body, cp in zip(sim.solids, sim.cross):
            lists.append((cp.forward, body.system.vol))
        sim.corr = compute_correction_matrices(
            sim.fluid, lists, alpha=sim.wkgc_alpha, stamp=stamp
        )
        sim.counters["correction_degenerate"] += sim.corr.degenerate_count
    else:
        sim.corr = identity_correction(sim.fluid.n, alpha=sim.wkgc_alpha, stamp=stamp)


def _update_wall_kinematics(body: SolidBody, t: float, dt: float) -> None:
    """Scripted rigid motion; averaged kinematics span [t, t + dt]."""
    r0 = body.reference.r0
    if body.script is None:
        return
    disp_now = body.script.displacement(r0, t)
    vel_now = body.script.point_velocity(r0, t)
    body.disp = disp_now
    body.system.pos = r0 + disp_now
    body.system.vel = vel_now
    disp_end = body.script.displacement(r0, t + dt)
    vel_end = body.script.point_velocity(r0, t + dt)
    body.vtilde = (disp_end - disp_now) / dt
    body.atilde = (vel_end - vel_now) / dt
    theta = body.script.angle(t)
    c, s = np.cos(theta), np.sin(theta)
    n0 = body.reference.n0
    body.normals = np.column_stack(
        [c * n0[:, 0] - s * n0[:, 1], s * n0[:, 0] + c * n0[:, 1]]
    )


def _advance_solid_body(sim: Simulation, body: SolidBody, dt_ac: float, a_fs: np.ndarray, t0: float) -> None:
    n_sub = max(1, int(math.ceil(dt_ac / body.dt_s - 1e-12)))
    ref = body.reference
    nl = ref.neighbors
    mat = body.material
    kind = body.script.kind if body.script is not None else 0
    sp = body.script.params() if body.script is not None else np.zeros(8)
    vbar = np.empty_like(body.vtilde)
    abar = np.empty_like(body.atilde)
    bad = _advance_solid_jit(
        nl.offsets, nl.j, nl.ex, nl.ey, nl.dwdr, ref.b0, ref.v0,
        body.system.mass, ref.r0, mat.lam, mat.mu,
        sim.gravity[0], sim.gravity[1], a_fs, body.zeta, body.clamped,
        kind, sp, t0, dt_ac, n_sub,
        body.disp, body.system.vel, body.f_grad, body.pk1, vbar, abar,
    )
    if bad >= 0:
        raise ElementInversionError(
            int(bad), f"body {body.name!r} at t = {sim.clock.t:.6e} s"
        )
    body.vtilde = vbar
    body.atilde = abar
    body.system.pos = ref.r0 + body.disp
    det = (body.f_grad[:, 0, 0] * body.f_grad[:, 1, 1]
           - body.f_grad[:, 0, 1] * body.f_grad[:, 1, 0])
    body.system.rho = mat.rho0 / det
    body.system.update_volume()
    body.normals, bad_n = surface_normals(body.f_grad, ref, previous=body.normals)
    body.normal_degenerate += bad_n
    sim.counters["normal_degenerate"] += bad_n


def acoustic_step(sim: Simulation, dt: float) -> None:
    """One pressure-relaxation step with frozen interface forces."""
    t = sim.clock.t
    fluid = sim.fluid

    for body in sim.solids:
        if body.is_wall:
            _update_wall_kinematics(body, t, dt)

    coupling_accel = None
    if sim.solids:
        coupling_accel = np.zeros((fluid.n, 2))
        solid_accels = []
        for body, cp in zip(sim.solids, sim.cross):
            forces = pressure_coupling(
                fluid, body.system, cp, sim.corr, sim.eos, sim.nu,
                body.interface_state(), sim.gravity,
            )
            coupling_accel += forces.accel_fluid
            solid_accels.append(forces.accel_solid)
            sim.last_coupling_balance = max(sim.last_coupling_balance, forces.balance_error())

    def total_continuity() -> np.ndarray:
        drho = continuity_rate(fluid, sim.fluid_nl, sim.eos)
        for body, cp in zip(sim.solids, sim.cross):
            boundary_continuity_rate(
                fluid, cp.forward, body.vtilde, body.atilde, body.system.vol,
                sim.eos, sim.gravity, drho,
            )
        return drho

    # fluid drift-kick-drift, density integrated alongside
    fluid.rho += 0.5 * dt * total_continuity()
    fluid.p = sim.eos.pressure(fluid.rho)
    fluid.update_volume()
    fluid.pos += 0.5 * dt * fluid.vel

    rates = momentum_rate(
        fluid, sim.fluid_nl, sim.corr, sim.eos, nu=sim.nu,
        gravity=sim.gravity, coupling_accel=coupling_accel,
    )
    sim.counters["viscous_skipped_pairs"] += rates.skipped_pairs
    fluid.vel += dt * rates.dv_dt
    if sim.velocity_override is not None:
        sim.velocity_override(sim, t + dt)

    fluid.rho += 0.5 * dt * total_continuity()
    fluid.p = sim.eos.pressure(fluid.rho)
    fluid.update_volume()
    fluid.pos += 0.5 * dt * fluid.vel
    sim.wrap_periodic()

    for idx, body in enumerate(sim.solids):
        if body.is_wall:
            _update_wall_kinematics(body, t + dt, dt)
        else:
            _advance_solid_body(sim, body, dt, solid_accels[idx], t)

    sim.clock.t = t + dt
    sim.clock.acoustic_steps += 1
    for hook in sim.post_acoustic:
        hook(sim)


def advance_advection_step(sim: Simulation, t_limit: float | None = None) -> StepSizes:
    """Neighbor rebuild, correction matrices, nested acoustic loop, and the
    optional one-step position regularization."""
    sizes = compute_time_steps(sim)
    dt_adv = sizes.dt_adv
    if t_limit is not None:
        dt_adv = min(dt_adv, t_limit - sim.clock.t)
        if dt_adv <= 0.0:
            return sizes
    rebuild_topology(sim)
    remaining = dt_adv
    eps = 1e-12 * dt_adv
    while remaining > eps:
        dt = min(sizes.dt_ac, remaining)
        acoustic_step(sim, dt)
        remaining -= dt
    if sim.transport is not None and sim.transport.enabled:
        lists = [(sim.fluid_nl, sim.fluid.vol, sim.corr.b_tilde)]
        for body, cp in zip(sim.solids, sim.cross):
            lists.append((cp.forward, body.system.vol, None))
        disp = position_regularization(sim.fluid, lists, sim.corr, sim.transport)
        sim.fluid.pos += disp
        sim.wrap_periodic()
    sim.clock.advection_steps += 1
    return sizes


def run(sim: Simulation, end_time: float) -> None:
    while sim.clock.t < end_time - 1e-12:
        advance_advection_step(sim, t_limit=end_time)
