"""Benchmark case definitions, scene construction, and the run loop.

Five built-in cases:

hydrostatic-plate
    Water column (1.0 m x 2.0 m) resting on a clamped aluminum plate
    (thickness 0.05 m) spanning the tank bottom; cold start, fixed fluid
    step, solid damping enabled, run to steady deflection.
fsi2
    Flow-induced vibration of a flexible beam behind a rigid cylinder in a
    channel (the classic low-stiffness configuration), dimensionless units
    with cylinder diameter 1: domain 11 x 4.1, inflow ramp, outflow
    recycling, transport-velocity regularization on.
antoci-gate
    Dam break through a rubber gate clamped at its upper end; inviscid
    water, free surface, gate opens under the hydrostatic load.
liao-plate
    Dam-break flow impacting a thin elastic plate after a scripted rigid
    gate releases the water column.
sloshing-baffle
    Rolling tank (amplitude 4 deg, period 1.211 s) with sunflower oil and an
    elastic baffle clamped at the bottom center.

A case is described by a :class:`CaseConfig`; the geometry and material
constants live in per-case builder functions and are echoed into the
resolved configuration for reproducibility.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from sphfsi.correction import RegularizationParams
from sphfsi.fluid import EosParams
from sphfsi.geometry import Disk, Rect
from sphfsi.kernels import KernelSpec, fluid_kernel, solid_kernel
from sphfsi.motion import KIND_ROTATION, KIND_TRANSLATION, MotionScript
from sphfsi.particles import BodyKind, make_system
from sphfsi.probes import (
    EnergyProbe,
    PointDisplacementProbe,
    Probe,
)
from sphfsi.solid import material_constants
from sphfsi.stepper import (
    Simulation,
    SolidBody,
    advance_advection_step,
    make_elastic_body,
    make_wall_body,
)

GRAVITY = 9.81

BUILTIN_CASES = (
    "hydrostatic-plate",
    "fsi2",
    "antoci-gate",
    "liao-plate",
    "sloshing-baffle",
)


class CaseConfigError(ValueError):
    pass


@dataclass
class CaseConfig:
    """Declarative description of one benchmark run."""

    case: str
    resolution: int  # structural thickness over solid spacing
    end_time: float
    correction: str = "rkgc"  # rkgc | none
    wkgc_alpha: float = 0.5
    transport_velocity: str = "auto"  # on | off | auto
    resolution_ratio: float = 2.0  # dp_fluid / dp_solid
    fixed_dt: float | None = None
    damping_zeta: float = 0.0
    probe_interval: float = 2e-3
    snapshot_interval: float = 0.0
    params: dict = field(default_factory=dict)

    def validate(self) -> "CaseConfig":
        if self.case not in BUILTIN_CASES:
            raise CaseConfigError(
                f"unknown case {self.case!r}; known cases: {', '.join(BUILTIN_CASES)}"
            )
        if not (isinstance(self.resolution, int) and self.resolution >= 1):
            raise CaseConfigError(f"resolution must be a positive integer, got {self.resolution!r}")
        if self.correction not in ("rkgc", "none"):
            raise CaseConfigError(f"correction must be 'rkgc' or 'none', got {self.correction!r}")
        if self.transport_velocity not in ("on", "off", "auto"):
            raise CaseConfigError(
                f"transport_velocity must be 'on', 'off' or 'auto', got {self.transport_velocity!r}"
            )
        if self.resolution_ratio < 1.0:
            raise CaseConfigError(
                f"resolution_ratio (dp_fluid / dp_solid) must be >= 1, got {self.resolution_ratio}"
            )
        if self.end_time <= 0.0:
            raise CaseConfigError(f"end_time must be positive, got {self.end_time}")
        if self.fixed_dt is not None and self.fixed_dt <= 0.0:
            raise CaseConfigError(f"fixed_dt must be positive, got {self.fixed_dt}")
        if self.wkgc_alpha < 0.0:
            raise CaseConfigError(f"wkgc_alpha must be non-negative, got {self.wkgc_alpha}")
        if self.probe_interval <= 0.0:
            raise CaseConfigError(f"probe_interval must be positive, got {self.probe_interval}")
        if self.snapshot_interval < 0.0:
            raise CaseConfigError(f"snapshot_interval must be >= 0, got {self.snapshot_interval}")
        if self.damping_zeta < 0.0:
            raise CaseConfigError(f"damping_zeta must be >= 0, got {self.damping_zeta}")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def echo(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_CONFIG_KEYS = {
    "case", "resolution", "end_time", "correction", "wkgc_alpha",
    "transport_velocity", "resolution_ratio", "fixed_dt", "damping_zeta",
    "probe_interval", "snapshot_interval", "params",
}


def default_config(case: str) -> CaseConfig:
    base = {
        "hydrostatic-plate": dict(
            resolution=8, end_time=2.0, fixed_dt=2e-5, damping_zeta=2000.0,
            probe_interval=2e-3,
        ),
        "fsi2": dict(
            resolution=4, end_time=100.0, probe_interval=0.05,
        ),
        "antoci-gate": dict(
            resolution=4, end_time=0.4, probe_interval=1e-3,
        ),
        "liao-plate": dict(
            resolution=4, end_time=0.7, probe_interval=1e-3,
        ),
        "sloshing-baffle": dict(
            resolution=4, end_time=9.2, probe_interval=2e-3,
        ),
    }
    if case not in base:
        raise CaseConfigError(
            f"unknown case {case!r}; known cases: {', '.join(BUILTIN_CASES)}"
        )
    return CaseConfig(case=case, **base[case]).validate()


def load_case_config(name_or_path: str) -> CaseConfig:
    """Resolve a built-in case name or a JSON config file into a CaseConfig."""
    if name_or_path in BUILTIN_CASES:
        return default_config(name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise CaseConfigError(
            f"{name_or_path!r} is neither a built-in case nor a readable file; "
            f"built-ins: {', '.join(BUILTIN_CASES)}"
        )
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CaseConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict) or "case" not in raw:
        raise CaseConfigError(f"{path}: config must be a JSON object with a 'case' key")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise CaseConfigError(f"{path}: unknown config key {sorted(unknown)[0]!r}")
    cfg = default_config(raw["case"])
    for key, value in raw.items():
        if key == "case":
            continue
        if key == "params":
            if not isinstance(value, dict):
                raise CaseConfigError(f"{path}: 'params' must be an object")
            cfg.params.update(value)
            continue
        setattr(cfg, key, value)
    if isinstance(cfg.resolution, float) and cfg.resolution.is_integer():
        cfg.resolution = int(cfg.resolution)
    return cfg.validate()


@dataclass
class CaseScene:
    sim: Simulation
    probes: list[Probe]
    config: CaseConfig
    notes: dict = field(default_factory=dict)


def _wall_thickness(dp_f: float) -> float:
    # walls fill the fluid kernel support; rigid walls use the fluid spacing
    # so the interface quadrature matches the fluid lattice
    need = 2.0 * 1.3 * dp_f
    return math.ceil(need / dp_f + 1e-9) * dp_f


def _check_no_overlap(scene: CaseScene) -> None:
    from scipy.spatial import cKDTree

    bodies = [("fluid", scene.sim.fluid)] + [(b.name, b.system) for b in scene.sim.solids]
    for i in range(len(bodies)):
        for j in range(i + 1, len(bodies)):
            (name_a, a), (name_b, b) = bodies[i], bodies[j]
            limit = 0.45 * min(a.dp, b.dp)
            tree = cKDTree(a.pos)
            d, _ = tree.query(b.pos, k=1, distance_upper_bound=limit)
            if np.any(np.isfinite(d)):
                raise CaseConfigError(
                    f"bodies {name_a!r} and {name_b!r} overlap (separation < {limit:.3e} m)"
                )


def _transport_params(cfg: CaseConfig, dp_f: float, internal_flow: bool) -> RegularizationParams:
    if cfg.transport_velocity == "on":
        enabled = True
    elif cfg.transport_velocity == "off":
        enabled = False
    else:
        enabled = internal_flow
    return RegularizationParams(eta=0.2, dx=dp_f, enabled=enabled)


# ---------------------------------------------------------------------------
# case builders
# ---------------------------------------------------------------------------


def _build_hydrostatic_plate(cfg: CaseConfig) -> CaseScene:
    p = {
        "tank_width": 1.0, "water_height": 2.0, "plate_thickness": 0.05,
        "plate_rho": 2700.0, "plate_E": 67.5e9, "plate_nu": 0.34,
        "fluid_rho": 1000.0, "nu": 2e-3,
    }
    p.update(cfg.params)
    cfg.params = p
    bh = p["plate_thickness"]
    dp_s = bh / cfg.resolution
    dp_f = cfg.resolution_ratio * dp_s
    width, height = p["tank_width"], p["water_height"]
    tw = _wall_thickness(dp_f)

    fluid = make_system(Rect(0.0, 0.0, width, height), dp_f, p["fluid_rho"],
                        BodyKind.FLUID, name="fluid")
    c0 = 10.0 * math.sqrt(GRAVITY * height)
    eos = EosParams(rho0=p["fluid_rho"], c0=c0)

    plate_sys = make_system(Rect(-tw, -bh, width + tw, 0.0), dp_s, p["plate_rho"],
                            BodyKind.SOLID, name="plate")
    clamped = (plate_sys.pos[:, 0] < 0.0) | (plate_sys.pos[:, 0] > width)
    mat = material_constants(p["plate_rho"], p["plate_E"], p["plate_nu"])
    plate = make_elastic_body("plate", plate_sys, solid_kernel(dp_s), mat,
                              clamped, zeta=cfg.damping_zeta)

    wall_top = height + 4.0 * dp_f
    left = make_wall_body(
        "wall_left",
        make_system(Rect(-tw, 0.0, 0.0, wall_top), dp_f, p["fluid_rho"],
                    BodyKind.WALL, name="wall_left"),
        solid_kernel(dp_f),
    )
    right = make_wall_body(
        "wall_right",
        make_system(Rect(width, 0.0, width + tw, wall_top), dp_f, p["fluid_rho"],
                    BodyKind.WALL, name="wall_right"),
        solid_kernel(dp_f),
    )

    sim = Simulation(
        fluid=fluid,
        fluid_spec=fluid_kernel(dp_f),
        eos=eos,
        nu=p["nu"],
        gravity=np.array([0.0, -GRAVITY]),
        solids=[plate, left, right],
        correction_enabled=cfg.correction == "rkgc",
        wkgc_alpha=cfg.wkgc_alpha,
        transport=_transport_params(cfg, dp_f, internal_flow=False),
        fixed_dt=cfg.fixed_dt,
    )
    probes = [
        PointDisplacementProbe("midspan", "plate", (width / 2.0, -bh / 2.0)),
        EnergyProbe("energy"),
    ]
    notes = {
        "analytic_midspan_uy": -6.85e-5,
        "span": width,
        "c0": c0,
    }
    return CaseScene(sim=sim, probes=probes, config=cfg, notes=notes)


def _build_fsi2(cfg: CaseConfig) -> CaseScene:
    p = {
        "D": 1.0, "domain_length": 11.0, "domain_height": 4.1,
        "cyl_center_x": 2.0, "cyl_center_y": 2.0,
        "beam_length": 3.5, "beam_thickness": 0.2,
        "fluid_rho": 1.0, "U0": 1.0, "ramp_time": 2.0, "Re": 100.0,
        "solid_rho_ratio": 10.0, "E_star": 1.4e3, "beam_nu": 0.4,
        "c0_factor": 20.0,
    }
    p.update(cfg.params)
    cfg.params = p
    D = p["D"]
    dp_s = p["beam_thickness"] * D / cfg.resolution
    dp_f = cfg.resolution_ratio * dp_s
    L, H = p["domain_length"] * D, p["domain_height"] * D
    cx, cy, r = p["cyl_center_x"] * D, p["cyl_center_y"] * D, 0.5 * D
    tw = _wall_thickness(dp_f)
    buf = math.ceil(2.0 * 1.3 * dp_f / dp_f + 2) * dp_f  # inflow strip width

    half_b = 0.5 * p["beam_thickness"] * D
    # beam measured from the cylinder's rightmost point; root buried in the
    # cylinder and clamped there
    beam_tail = cx + r + p["beam_length"] * D
    beam_rect = Rect(cx + 0.4 * D, cy - half_b, beam_tail, cy + half_b)
    cylinder_region = Disk(cx, cy, r) - beam_rect

    fluid_region = (Rect(-buf, 0.0, L, H) - Disk(cx, cy, r)) - beam_rect
    fluid = make_system(fluid_region, dp_f, p["fluid_rho"], BodyKind.FLUID, name="fluid")
    U0 = p["U0"]
    eos = EosParams(rho0=p["fluid_rho"], c0=p["c0_factor"] * U0)
    nu = U0 * D / p["Re"]

    rho_s = p["solid_rho_ratio"] * p["fluid_rho"]
    E = p["E_star"] * p["fluid_rho"] * U0 * U0
    mat = material_constants(rho_s, E, p["beam_nu"])
    beam_sys = make_system(beam_rect, dp_s, rho_s, BodyKind.SOLID, name="beam")
    inside_cyl = (beam_sys.pos[:, 0] - cx) ** 2 + (beam_sys.pos[:, 1] - cy) ** 2 < r * r
    beam = make_elastic_body("beam", beam_sys, solid_kernel(dp_s), mat,
                             inside_cyl, zeta=cfg.damping_zeta)

    cyl = make_wall_body(
        "cylinder",
        make_system(cylinder_region, dp_f, rho_s, BodyKind.WALL, name="cylinder"),
        solid_kernel(dp_f),
    )
    bottom = make_wall_body(
        "wall_bottom",
        make_system(Rect(-buf - tw, -tw, L + tw, 0.0), dp_f, p["fluid_rho"],
                    BodyKind.WALL, name="wall_bottom"),
        solid_kernel(dp_f),
    )
    top = make_wall_body(
        "wall_top",
        make_system(Rect(-buf - tw, H, L + tw, H + tw), dp_f, p["fluid_rho"],
                    BodyKind.WALL, name="wall_top"),
        solid_kernel(dp_f),
    )

    ramp_time = p["ramp_time"]

    def inflow_profile(y: np.ndarray, t: float) -> np.ndarray:
        ubar = 0.5 * U0 * (1.0 - math.cos(0.5 * math.pi * t)) if t < ramp_time else U0
        # centerline-normalized parabola peaking at 1.5 ubar
        return 1.5 * ubar * 4.0 * y * (H - y) / (H * H)

    def velocity_override(sim: Simulation, t: float) -> None:
        pos = sim.fluid.pos
        strip = pos[:, 0] < 0.0
        if np.any(strip):
            sim.fluid.vel[strip, 0] = inflow_profile(pos[strip, 1], t)
            sim.fluid.vel[strip, 1] = 0.0

    def recycle(sim: Simulation) -> None:
        pos = sim.fluid.pos
        out = pos[:, 0] >= L
        if np.any(out):
            sim.fluid.pos[out, 0] -= L + buf
            sim.fluid.vel[out, 0] = inflow_profile(pos[out, 1], sim.clock.t)
            sim.fluid.vel[out, 1] = 0.0
            sim.fluid.rho[out] = p["fluid_rho"]
            sim.fluid.p[out] = 0.0
            sim.fluid.update_volume()

    sim = Simulation(
        fluid=fluid,
        fluid_spec=fluid_kernel(dp_f),
        eos=eos,
        nu=nu,
        gravity=np.zeros(2),
        solids=[beam, cyl, bottom, top],
        correction_enabled=cfg.correction == "rkgc",
        wkgc_alpha=cfg.wkgc_alpha,
        transport=_transport_params(cfg, dp_f, internal_flow=True),
        fixed_dt=cfg.fixed_dt,
        velocity_override=velocity_override,
    )
    sim.post_acoustic.append(recycle)
    # start the inflow strip with the initial profile so the ramp is smooth
    velocity_override(sim, 0.0)

    probes = [
        PointDisplacementProbe("M", "beam", (beam_tail - dp_s / 2.0, cy)),
        EnergyProbe("energy"),
    ]
    notes = {"U0": U0, "D": D, "beam_tail": beam_tail}
    return CaseScene(sim=sim, probes=probes, config=cfg, notes=notes)


def _build_antoci_gate(cfg: CaseConfig) -> CaseScene:
    p = {
        "water_width": 0.1, "water_height": 0.14,
        "gate_length": 0.079, "gate_thickness": 0.005,
        "gate_rho": 1100.0, "gate_E": 7.8e6, "gate_nu": 0.4,
        "fluid_rho": 1000.0, "nu": 0.0, "spill_length": 0.45,
    }
    p.update(cfg.params)
    cfg.params = p
    b = p["gate_thickness"]
    dp_s = b / cfg.resolution
    dp_f = cfg.resolution_ratio * dp_s
    A, Hw = p["water_width"], p["water_height"]
    Lg = p["gate_length"]
    tw = _wall_thickness(dp_f)
    clamp_h = 4.0 * dp_s
    top = max(Hw + 10.0 * dp_f, Lg + clamp_h + 10.0 * dp_s)

    fluid = make_system(Rect(0.0, 0.0, A, Hw), dp_f, p["fluid_rho"],
                        BodyKind.FLUID, name="fluid")
    c0 = 10.0 * math.sqrt(2.0 * GRAVITY * Hw)
    eos = EosParams(rho0=p["fluid_rho"], c0=c0)

    gate_rect = Rect(A, 0.0, A + b, Lg + clamp_h)
    gate_sys = make_system(gate_rect, dp_s, p["gate_rho"], BodyKind.SOLID, name="gate")
    clamped = gate_sys.pos[:, 1] > Lg
    mat = material_constants(p["gate_rho"], p["gate_E"], p["gate_nu"])
    gate = make_elastic_body("gate", gate_sys, solid_kernel(dp_s), mat,
                             clamped, zeta=cfg.damping_zeta)

    right_wall_region = Rect(A, Lg, A + tw, top) - gate_rect
    right = make_wall_body(
        "wall_right",
        make_system(right_wall_region, dp_f, p["fluid_rho"], BodyKind.WALL,
                    name="wall_right"),
        solid_kernel(dp_f),
    )
    left = make_wall_body(
        "wall_left",
        make_system(Rect(-tw, 0.0, 0.0, top), dp_f, p["fluid_rho"],
                    BodyKind.WALL, name="wall_left"),
        solid_kernel(dp_f),
    )
    bottom = make_wall_body(
        "wall_bottom",
        make_system(Rect(-tw, -tw, A + b + p["spill_length"], 0.0), dp_f,
                    p["fluid_rho"], BodyKind.WALL, name="wall_bottom"),
        solid_kernel(dp_f),
    )

    sim = Simulation(
        fluid=fluid,
        fluid_spec=fluid_kernel(dp_f),
        eos=eos,
        nu=p["nu"],
        gravity=np.array([0.0, -GRAVITY]),
        solids=[gate, right, left, bottom],
        correction_enabled=cfg.correction == "rkgc",
        wkgc_alpha=cfg.wkgc_alpha,
        transport=_transport_params(cfg, dp_f, internal_flow=False),
        fixed_dt=cfg.fixed_dt,
    )
    probes = [
        PointDisplacementProbe("gate_tip", "gate", (A + b / 2.0, dp_s / 2.0)),
        EnergyProbe("energy"),
    ]
    notes = {"H": Hw, "max_speed_scale": math.sqrt(2.0 * GRAVITY * Hw), "c0": c0}
    return CaseScene(sim=sim, probes=probes, config=cfg, notes=notes)


def _build_liao_plate(cfg: CaseConfig) -> CaseScene:
    p = {
        "tank_length": 0.8, "tank_height": 0.6,
        "water_width": 0.2, "water_height": 0.4,
        "plate_x": 0.5, "plate_height": 0.09, "plate_thickness": 0.004,
        "plate_rho": 1161.54, "plate_E": 3.5e6, "plate_nu": 0.49,
        "fluid_rho": 998.0, "nu": 0.0, "gate_speed": 1.5,
    }
    p.update(cfg.params)
    cfg.params = p
    b = p["plate_thickness"]
    dp_s = b / cfg.resolution
    dp_f = cfg.resolution_ratio * dp_s
    Lt, Ht = p["tank_length"], p["tank_height"]
    Ww, Hw = p["water_width"], p["water_height"]
    tw = _wall_thickness(dp_f)
    clamp_h = 4.0 * dp_s

    fluid = make_system(Rect(0.0, 0.0, Ww, Hw), dp_f, p["fluid_rho"],
                        BodyKind.FLUID, name="fluid")
    c0 = 10.0 * math.sqrt(2.0 * GRAVITY * Hw)
    eos = EosParams(rho0=p["fluid_rho"], c0=c0)

    plate_rect = Rect(p["plate_x"], -clamp_h, p["plate_x"] + b, p["plate_height"])
    plate_sys = make_system(plate_rect, dp_s, p["plate_rho"], BodyKind.SOLID, name="plate")
    clamped = plate_sys.pos[:, 1] < 0.0
    mat = material_constants(p["plate_rho"], p["plate_E"], p["plate_nu"])
    plate = make_elastic_body("plate", plate_sys, solid_kernel(dp_s), mat,
                              clamped, zeta=cfg.damping_zeta)

    # scripted rigid gate holding the column; rises at constant speed
    gate_w = _wall_thickness(dp_f)
    gate_h = Hw + 4.0 * dp_f
    gate_script = MotionScript(
        kind=KIND_TRANSLATION, velocity=(0.0, p["gate_speed"]),
        t_stop=(gate_h + 6.0 * dp_f) / p["gate_speed"],
    )
    gate = make_wall_body(
        "gate",
        make_system(Rect(Ww, 0.0, Ww + gate_w, gate_h), dp_f, p["fluid_rho"],
                    BodyKind.WALL, name="gate"),
        solid_kernel(dp_f),
        script=gate_script,
    )

    bottom_region = Rect(-tw, -tw, Lt + tw, 0.0) - plate_rect
    bottom = make_wall_body(
        "wall_bottom",
        make_system(bottom_region, dp_f, p["fluid_rho"], BodyKind.WALL,
                    name="wall_bottom"),
        solid_kernel(dp_f),
    )
    left = make_wall_body(
        "wall_left",
        make_system(Rect(-tw, 0.0, 0.0, Ht), dp_f, p["fluid_rho"],
                    BodyKind.WALL, name="wall_left"),
        solid_kernel(dp_f),
    )
    right = make_wall_body(
        "wall_right",
        make_system(Rect(Lt, 0.0, Lt + tw, Ht), dp_f, p["fluid_rho"],
                    BodyKind.WALL, name="wall_right"),
        solid_kernel(dp_f),
    )

    sim = Simulation(
        fluid=fluid,
        fluid_spec=fluid_kernel(dp_f),
        eos=eos,
        nu=p["nu"],
        gravity=np.array([0.0, -GRAVITY]),
        solids=[plate, gate, bottom, left, right],
        correction_enabled=cfg.correction == "rkgc",
        wkgc_alpha=cfg.wkgc_alpha,
        transport=_transport_params(cfg, dp_f, internal_flow=False),
        fixed_dt=cfg.fixed_dt,
    )
    probes = [
        PointDisplacementProbe(
            "plate_tip", "plate",
            (p["plate_x"] + b / 2.0, p["plate_height"] - dp_s / 2.0),
        ),
        EnergyProbe("energy"),
    ]
    notes = {"H": Hw, "c0": c0}
    return CaseScene(sim=sim, probes=probes, config=cfg, notes=notes)


def _build_sloshing_baffle(cfg: CaseConfig) -> CaseScene:
    p = {
        "tank_width": 0.609, "tank_height": 0.3445,
        "liquid_depth": 0.1148,
        "fluid_rho": 917.0, "nu": 5.0e-5,
        "baffle_thickness": 0.004, "baffle_rho": 1100.0,
        "baffle_E": 6.0e6, "baffle_nu": 0.49,
        "roll_amplitude_deg": 4.0, "roll_period": 1.211,
    }
    p.update(cfg.params)
    cfg.params = p
    b = p["baffle_thickness"]
    dp_s = b / cfg.resolution
    dp_f = cfg.resolution_ratio * dp_s
    W, Ht = p["tank_width"], p["tank_height"]
    depth = p["liquid_depth"]
    half = W / 2.0
    tw = _wall_thickness(dp_f)
    clamp_h = 4.0 * dp_s

    roll = MotionScript(
        kind=KIND_ROTATION,
        pivot=(0.0, 0.0),
        amplitude=math.radians(p["roll_amplitude_deg"]),
        omega=2.0 * math.pi / p["roll_period"],
    )

    baffle_rect = Rect(-b / 2.0, 0.0, b / 2.0, depth)
    fluid_region = Rect(-half, 0.0, half, depth) - baffle_rect
    fluid = make_system(fluid_region, dp_f, p["fluid_rho"], BodyKind.FLUID, name="fluid")
    c0 = 10.0 * math.sqrt(GRAVITY * depth)
    eos = EosParams(rho0=p["fluid_rho"], c0=c0)

    baffle_sys = make_system(baffle_rect, dp_s, p["baffle_rho"], BodyKind.SOLID,
                             name="baffle")
    clamped = baffle_sys.pos[:, 1] < clamp_h
    mat = material_constants(p["baffle_rho"], p["baffle_E"], p["baffle_nu"])
    baffle = make_elastic_body("baffle", baffle_sys, solid_kernel(dp_s), mat,
                               clamped, script=roll, zeta=cfg.damping_zeta)

    tank_region = (
        Rect(-half - tw, -tw, half + tw, Ht)
        - Rect(-half, 0.0, half, Ht)
    )
    tank = make_wall_body(
        "tank",
        make_system(tank_region, dp_f, p["fluid_rho"], BodyKind.WALL, name="tank"),
        solid_kernel(dp_f),
        script=roll,
    )

    sim = Simulation(
        fluid=fluid,
        fluid_spec=fluid_kernel(dp_f),
        eos=eos,
        nu=p["nu"],
        gravity=np.array([0.0, -GRAVITY]),
        solids=[baffle, tank],
        correction_enabled=cfg.correction == "rkgc",
        wkgc_alpha=cfg.wkgc_alpha,
        transport=_transport_params(cfg, dp_f, internal_flow=False),
        fixed_dt=cfg.fixed_dt,
    )
    probes = [
        PointDisplacementProbe("baffle_tip", "baffle", (0.0, depth - dp_s / 2.0)),
        EnergyProbe("energy"),
    ]
    notes = {
        "forcing_frequency": 1.0 / p["roll_period"],
        "c0": c0,
    }
    return CaseScene(sim=sim, probes=probes, config=cfg, notes=notes)


_BUILDERS = {
    "hydrostatic-plate": _build_hydrostatic_plate,
    "fsi2": _build_fsi2,
    "antoci-gate": _build_antoci_gate,
    "liao-plate": _build_liao_plate,
    "sloshing-baffle": _build_sloshing_baffle,
}


def build_benchmark_case(cfg: CaseConfig) -> CaseScene:
    """Instantiate particle systems, references and boundary machinery."""
    cfg.validate()
    scene = _BUILDERS[cfg.case](cfg)
    _check_no_overlap(scene)
    for probe in scene.probes:
        probe.bind(scene.sim)
    return scene


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------


def run_case(
    cfg: CaseConfig,
    output_dir: str | Path | None = None,
    log_every: float = 0.0,
    scene: CaseScene | None = None,
) -> dict:
    """Execute a case, recording probes and scheduled snapshots.

    Returns a summary dict with probe series, counters and wall-clock time;
    when ``output_dir`` is given, probe CSVs, snapshots and ``manifest.txt``
    are written there.
    """
    import logging
    import time as _time

    from sphfsi import output as out
    from sphfsi.stepper import run as run_sim

    log = logging.getLogger("sphfsi.run")
    if scene is None:
        scene = build_benchmark_case(cfg)
    sim = scene.sim
    series = {p.probe_id: p.make_series() for p in scene.probes}

    state = {
        "next_probe": 0.0,
        "next_snap": cfg.snapshot_interval if cfg.snapshot_interval > 0.0 else None,
        "next_log": 0.0,
        "snapshots": [],
    }
    outdir = None
    if output_dir is not None:
        outdir = out.ensure_directory(output_dir)

    def sample_probes(sim_):
        t = sim_.clock.t
        eps = 1e-9 * max(cfg.probe_interval, 1e-12)
        if t + eps >= state["next_probe"]:
            for p in scene.probes:
                series[p.probe_id].append(t, p.sample(sim_))
            while state["next_probe"] <= t + eps:
                state["next_probe"] += cfg.probe_interval
        if state["next_snap"] is not None and outdir is not None:
            if t + eps >= state["next_snap"]:
                path = out.write_snapshot(sim_, sim_.clock.acoustic_steps, outdir)
                state["snapshots"].append(path.name)
                while state["next_snap"] <= t + eps:
                    state["next_snap"] += cfg.snapshot_interval
        if log_every > 0.0 and t >= state["next_log"]:
            log.info(
                "t=%.6f adv=%d ac=%d", t, sim_.clock.advection_steps,
                sim_.clock.acoustic_steps,
            )
            state["next_log"] += log_every

    # initial probe sample at t = 0, then follow the schedule
    for p in scene.probes:
        series[p.probe_id].append(0.0, p.sample(sim))
    state["next_probe"] = cfg.probe_interval
    sim.post_acoustic.append(sample_probes)

    t0 = _time.time()
    run_sim(sim, cfg.end_time)
    wall = _time.time() - t0

    summary = {
        "case": cfg.case,
        "series": series,
        "counters": dict(sim.counters),
        "acoustic_steps": sim.clock.acoustic_steps,
        "advection_steps": sim.clock.advection_steps,
        "wall_time_s": wall,
        "coupling_balance_max": sim.last_coupling_balance,
        "notes": scene.notes,
    }

    if outdir is not None:
        partial = False
        try:
            for s in series.values():
                out.write_probe_csv(s, outdir)
        except OSError:
            partial = True
            raise
        finally:
            manifest = {
                "case": cfg.case,
                "resolution": cfg.resolution,
                "resolution_ratio": cfg.resolution_ratio,
                "correction": cfg.correction,
                "wkgc_alpha": cfg.wkgc_alpha,
                "transport_velocity": cfg.transport_velocity,
                "eta": sim.transport.eta if sim.transport else 0.0,
                "zeta": cfg.damping_zeta,
                "dt_policy": f"fixed {cfg.fixed_dt}" if cfg.fixed_dt else "cfl",
                "end_time": cfg.end_time,
                "advection_steps": sim.clock.advection_steps,
                "acoustic_steps": sim.clock.acoustic_steps,
                "n_fluid": sim.fluid.n,
                "n_solid": sum(b.system.n for b in sim.solids),
                "mass_total": repr(float(
                    sim.fluid.mass.sum() + sum(b.system.mass.sum() for b in sim.solids)
                )),
                "viscous_skipped_pairs": sim.counters["viscous_skipped_pairs"],
                "correction_degenerate": sim.counters["correction_degenerate"],
                "normal_degenerate": sim.counters["normal_degenerate"],
                "coupling_balance_max": f"{sim.last_coupling_balance:.3e}",
                "snapshots": len(state["snapshots"]),
                "wall_time_s": f"{wall:.1f}",
            }
            out.write_manifest(outdir, manifest, partial=partial)
    return summary
