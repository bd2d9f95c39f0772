"""Property verification suites: consistency, conservation, riemann, solid-patch.

Each suite returns ``(passed, lines, blob)`` where ``lines`` are printable
pass/fail messages and ``blob`` is a flat float64 array of every computed
number, used to check bit-identical results across worker counts.
"""

from __future__ import annotations

import time

import numpy as np

from sphfsi.correction import compute_correction_matrices, identity_correction, rkgc_gradient
from sphfsi.fluid import EosParams, riemann_interface
from sphfsi.geometry import Rect
from sphfsi.kernels import KernelSpec, fluid_kernel, solid_kernel
from sphfsi.neighbors import CellGrid, build_neighbor_lists
from sphfsi.particles import BodyKind, make_system
from sphfsi.solid import (
    build_reference,
    deformation_gradient,
    material_constants,
    solid_momentum_rate,
    stress_pipeline,
)
from sphfsi.stepper import Simulation, acoustic_step, compute_time_steps, make_wall_body, rebuild_topology


def _line(ok: bool, text: str) -> str:
    return f"[{'PASS' if ok else 'FAIL'}] {text}"


def _pair_field_values(system, nl, fn):
    """Evaluate a position field at each neighbor's minimum-image location."""
    xi = np.repeat(system.pos[:, 0], np.diff(nl.offsets))
    yi = np.repeat(system.pos[:, 1], np.diff(nl.offsets))
    return fn(xi - nl.dx, yi - nl.dy)


def suite_consistency() -> tuple[bool, list[str], np.ndarray]:
    """Corrected gradient exactness on a periodic lattice vs the uncorrected
    operator on a jittered one."""
    t0 = time.time()
    dp = 1.0
    n = 50
    spec = KernelSpec(h=1.3 * dp)
    box = (0.0, 0.0, n * dp, n * dp)
    grid = CellGrid.for_points(None, spec.cutoff, box=box, periodic=(True, True))

    def field(x, y):
        return 2.0 * x + 3.0 * y

    sysm = make_system(Rect(*box), dp, 1000.0, BodyKind.FLUID)
    nl = build_neighbor_lists(sysm, spec, grid=grid)
    corr = compute_correction_matrices(sysm, [(nl, sysm.vol)], alpha=0.5)
    psi = field(sysm.pos[:, 0], sysm.pos[:, 1])
    grad = rkgc_gradient(psi, nl, corr, sysm.vol,
                         pair_values=_pair_field_values(sysm, nl, field))
    err_corrected = float(np.abs(grad - np.array([2.0, 3.0])).max())

    rng = np.random.default_rng(20240811)
    jittered = make_system(Rect(*box), dp, 1000.0, BodyKind.FLUID)
    jittered.pos += rng.uniform(-0.05, 0.05, jittered.pos.shape) * dp
    nl_j = build_neighbor_lists(jittered, spec, grid=grid)
    ident = identity_correction(jittered.n)
    psi_j = field(jittered.pos[:, 0], jittered.pos[:, 1])
    grad_u = rkgc_gradient(psi_j, nl_j, ident, jittered.vol,
                           pair_values=_pair_field_values(jittered, nl_j, field))
    err_uncorrected = float(np.abs(grad_u - np.array([2.0, 3.0])).max())
    elapsed = time.time() - t0

    ok1 = err_corrected <= 1e-9
    ok2 = err_uncorrected > 1e-3
    ok3 = elapsed < 10.0
    lines = [
        _line(ok1, f"corrected linear-field gradient max error {err_corrected:.3e} <= 1e-9"),
        _line(ok2, f"uncorrected gradient error on jittered lattice {err_uncorrected:.3e} > 1e-3"),
        _line(ok3, f"runtime {elapsed:.2f} s < 10 s"),
    ]
    blob = np.concatenate([grad.ravel(), grad_u.ravel(),
                           [err_corrected, err_uncorrected]])
    return ok1 and ok2 and ok3, lines, blob


def suite_conservation() -> tuple[bool, list[str], np.ndarray]:
    """Momentum drift on a periodic box and interface ledger balance on a
    fluid-over-wall configuration."""
    t0 = time.time()
    dp = 0.02
    n = 30
    box = (0.0, 0.0, n * dp, n * dp)
    sysm = make_system(Rect(*box), dp, 1000.0, BodyKind.FLUID)
    rng = np.random.default_rng(7)
    eos = EosParams(rho0=1000.0, c0=20.0)
    sysm.p = rng.uniform(-50.0, 50.0, sysm.n)
    sysm.rho = np.asarray(eos.rho_from_pressure(sysm.p))
    sysm.vel = rng.uniform(-0.1, 0.1, (sysm.n, 2))
    sysm.update_volume()
    grid = CellGrid.for_points(None, fluid_kernel(dp).cutoff, box=box, periodic=(True, True))
    sim = Simulation(
        fluid=sysm, fluid_spec=fluid_kernel(dp), eos=eos, nu=1e-5,
        gravity=np.zeros(2), periodic_grid=grid,
    )
    momentum0 = (sysm.mass[:, None] * sysm.vel).sum(axis=0)
    impulse_scale = 0.0

    from sphfsi.stepper import advance_advection_step

    t_end = 0.05
    vel_prev = sysm.vel.copy()

    def impulse_hook(sim_):
        nonlocal impulse_scale, vel_prev
        impulse_scale += float(
            np.abs(sim_.fluid.mass[:, None] * (sim_.fluid.vel - vel_prev)).sum()
        )
        vel_prev = sim_.fluid.vel.copy()

    sim.post_acoustic.append(impulse_hook)
    while sim.clock.t < t_end - 1e-12:
        advance_advection_step(sim, t_limit=t_end)
    n_steps = max(sim.clock.acoustic_steps, 1)
    momentum1 = (sysm.mass[:, None] * sysm.vel).sum(axis=0)
    impulse_scale = max(impulse_scale / n_steps, 1e-300)
    drift = float(np.abs(momentum1 - momentum0).max()) / n_steps
    rel_drift = drift / impulse_scale

    # fluid column over a fixed wall: pair-ledger balance
    dp_f, dp_s = 0.02, 0.01
    fluid = make_system(Rect(0.0, 0.0, 0.4, 0.2), dp_f, 1000.0, BodyKind.FLUID)
    wall = make_wall_body(
        "wall",
        make_system(Rect(-0.08, -0.06, 0.48, 0.0), dp_s, 1000.0, BodyKind.WALL),
        solid_kernel(dp_s),
    )
    eos2 = EosParams(rho0=1000.0, c0=14.0)
    sim2 = Simulation(
        fluid=fluid, fluid_spec=fluid_kernel(dp_f), eos=eos2, nu=0.0,
        gravity=np.array([0.0, -9.81]), solids=[wall],
    )
    for _ in range(5):
        from sphfsi.stepper import advance_advection_step

        advance_advection_step(sim2, t_limit=1.0)
    balance = sim2.last_coupling_balance
    elapsed = time.time() - t0

    ok1 = rel_drift <= 1e-9
    ok2 = balance <= 1e-9
    ok3 = elapsed < 30.0
    lines = [
        _line(ok1, f"periodic-box momentum drift per acoustic step {rel_drift:.3e} <= 1e-9 relative"),
        _line(ok2, f"interface pair-ledger imbalance {balance:.3e} <= 1e-9"),
        _line(ok3, f"runtime {elapsed:.2f} s < 30 s"),
    ]
    blob = np.concatenate([momentum0, momentum1, [rel_drift, balance]])
    return ok1 and ok2 and ok3, lines, blob


def suite_riemann() -> tuple[bool, list[str], np.ndarray]:
    """The three pair-interaction reference solutions, exact to 1e-12."""
    t0 = time.time()
    eos = EosParams(rho0=1000.0, c0=10.0)
    e = np.array([1.0, 0.0])
    lines = []
    vals = []

    s1 = riemann_interface((1000.0, np.array([0.5, 0.0]), 2000.0),
                           (1000.0, np.array([0.5, 0.0]), 2000.0), e, eos)
    ok1 = (abs(s1.p_star_scalar) <= 1e-12 and abs(s1.beta) <= 1e-12
           and np.abs(s1.v_star - np.array([0.5, 0.0])).max() <= 1e-12
           and abs(s1.u_star + 0.5) <= 1e-12)
    lines.append(_line(ok1, "identical states: v* is the shared velocity, zero dissipation"))
    vals += [s1.u_star, s1.p_star_scalar, s1.beta, *s1.v_star]

    s2 = riemann_interface((1000.0, np.array([-1.0, 0.0]), 0.0),
                           (1000.0, np.array([1.0, 0.0]), 0.0), e, eos)
    ok2 = abs(s2.beta - 0.6) <= 1e-12 and abs(s2.p_star_scalar - 6000.0) <= 1e-12 \
        and abs(s2.u_star) <= 1e-12
    lines.append(_line(ok2, f"approaching pair: beta {s2.beta:.12f} = 0.6, "
                            f"dissipative pressure {s2.p_star_scalar:.6f} = 6000 Pa"))
    vals += [s2.u_star, s2.p_star_scalar, s2.beta]

    s3 = riemann_interface((1000.0, np.zeros(2), 2000.0),
                           (1000.0, np.zeros(2), 1000.0), e, eos)
    ok3 = abs(s3.u_star - 0.05) <= 1e-12
    lines.append(_line(ok3, f"pressure jump: U* {s3.u_star:.12f} = 0.05 m/s"))
    vals += [s3.u_star, s3.p_star_scalar, s3.beta]

    # relabeling invariance and limiter range on a deterministic state sweep
    rng = np.random.default_rng(99)
    worst_sym = 0.0
    beta_ok = True
    for _ in range(200):
        vi = rng.uniform(-3, 3, 2)
        vj = rng.uniform(-3, 3, 2)
        pi, pj = rng.uniform(-5000, 5000, 2)
        ang = rng.uniform(0, 2 * np.pi)
        ee = np.array([np.cos(ang), np.sin(ang)])
        a = riemann_interface((1000.0, vi, pi), (1000.0, vj, pj), ee, eos)
        b = riemann_interface((1000.0, vj, pj), (1000.0, vi, pi), -ee, eos)
        worst_sym = max(worst_sym,
                        float(np.abs(a.v_star - b.v_star).max()),
                        abs(a.p_star_scalar - b.p_star_scalar))
        if not (-1e-15 <= a.beta <= 1.0):
            beta_ok = False
        vals += [a.u_star, a.p_star_scalar, a.beta]
    ok4 = worst_sym <= 1e-12 and beta_ok
    lines.append(_line(ok4, f"relabeling invariance {worst_sym:.3e} <= 1e-12; beta in [0, 1]"))
    elapsed = time.time() - t0
    ok5 = elapsed < 1.0
    lines.append(_line(ok5, f"runtime {elapsed:.3f} s < 1 s"))
    ok = ok1 and ok2 and ok3 and ok4 and ok5
    return ok, lines, np.asarray(vals)


def suite_solid_patch() -> tuple[bool, list[str], np.ndarray]:
    """Affine deformation exactness, constitutive closed form, density
    identity and free-body balance."""
    t0 = time.time()
    dp = 0.005
    plate = make_system(Rect(0.0, 0.0, 0.2, 0.04), dp, 1200.0, BodyKind.SOLID)
    ref = build_reference(plate, solid_kernel(dp))
    mat = material_constants(1200.0, 5.0e6, 0.3)

    g_mat = np.array([[0.003, 0.001], [-0.002, 0.004]])
    disp = plate.pos @ g_mat.T
    f = deformation_gradient(disp, ref)
    err_f = float(np.abs(f - (g_mat + np.eye(2))).max())
    ok1 = err_f <= 1e-12

    eps = 1e-3
    f_uni = np.tile(np.eye(2), (plate.n, 1, 1))
    f_uni[:, 0, 0] = 1.0 + eps
    st = stress_pipeline(f_uni, mat)
    exx = eps + 0.5 * eps * eps
    s_expect = np.array([[mat.lam * exx + 2.0 * mat.mu * exx, 0.0],
                         [0.0, mat.lam * exx]])
    err_s = float(np.abs(st.pk2 - s_expect).max() / np.abs(s_expect).max())
    ok2 = err_s <= 1e-12

    det = f[:, 0, 0] * f[:, 1, 1] - f[:, 0, 1] * f[:, 1, 0]
    st2 = stress_pipeline(f, mat)
    err_rho = float(np.abs(st2.rho * det - mat.rho0).max() / mat.rho0)
    ok3 = err_rho <= 1e-14

    rng = np.random.default_rng(11)
    wobble = 0.002 * np.column_stack([
        np.sin(17.0 * plate.pos[:, 0]) * plate.pos[:, 1],
        np.cos(13.0 * plate.pos[:, 0] + 1.0),
    ])
    f_w = deformation_gradient(wobble, ref)
    st_w = stress_pipeline(f_w, mat)
    accel = solid_momentum_rate(st_w.pk1, ref, plate.mass)
    total = np.abs((plate.mass[:, None] * accel).sum(axis=0)).max()
    scale = np.abs(plate.mass[:, None] * accel).sum()
    rel_balance = float(total / scale) if scale > 0 else 0.0
    ok4 = rel_balance <= 1e-9
    elapsed = time.time() - t0
    ok5 = elapsed < 10.0

    lines = [
        _line(ok1, f"affine displacement -> F exact to {err_f:.3e} (<= 1e-12)"),
        _line(ok2, f"uniaxial constitutive closed form to {err_s:.3e} relative (<= 1e-12)"),
        _line(ok3, f"density * det(F) = rho0 to {err_rho:.3e} relative"),
        _line(ok4, f"free-body internal force sum {rel_balance:.3e} <= 1e-9 relative"),
        _line(ok5, f"runtime {elapsed:.2f} s < 10 s"),
    ]
    blob = np.concatenate([f.ravel(), st.pk2.ravel(), accel.ravel(),
                           [err_f, err_s, err_rho, rel_balance]])
    return ok1 and ok2 and ok3 and ok4 and ok5, lines, blob


SUITES = {
    "consistency": suite_consistency,
    "conservation": suite_conservation,
    "riemann": suite_riemann,
    "solid-patch": suite_solid_patch,
}


def run_suite(name: str) -> tuple[bool, list[str], np.ndarray]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name]()
