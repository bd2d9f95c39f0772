"""Two-way fluid-structure interface forces.

Structure particles act as a moving boundary for the fluid.  For every
cross-resolution pair (fluid i, solid a) an imaginary solid-side state is
built from the no-slip condition and the time-averaged solid kinematics:

    p^d_a = max(0, p_i + rho_i (g - a~_a) . (r_a - r_i))
    v^d_a = 2 v_i - v~_a

The head term extrapolates the fluid pressure toward the solid particle
along the effective body acceleration ``g - a~``: a resting floor below
the fluid carries the hydrostatic surplus ``rho g dy``, a wall particle
above sits at the correspondingly lower pressure, and a structure
accelerating away from the fluid unloads.  Flooring the extrapolated value
at vacuum keeps the interface from generating suction while preserving the
hydrostatic continuation in every direction -- a one-sided clamp on the
head alone leaves side walls over-pressured and steadily stirs the column.
Note the orientation: written with the fluid-to-solid separation this is a
restoring feedback; the opposite sign turns the interface into a
positive-feedback loop on the structure acceleration and destabilizes
light-structure coupling.  A one-sided
Riemann problem along the outward solid normal, with left state
``(rho_i, -v_i . n_a, p_i)`` and right state ``(rho_a, -v^d_a . n_a, p^d_a)``,
supplies the dissipative interface pressure; the mean part is the
reverse-corrected pair matrix built from the fluid particle's blended
correction matrix and the identity on the solid side:

    M = (p_i I + p^d_a B~_i)/2 + (beta rho0 c0 dU / 2) I,
    dU = U_R - U_L = (v~_a - v_i) . n_a .

The fluid acceleration from a structure is then

    a_i = -(2/m_i) sum_a M gradW_ia V_i V_a
          + 2 sum_a nu ((v_i - v~_a)/r_ia) dW/dr V_a ,

and each pairwise force is mirrored sign-exactly onto the solid particle,
so the interface conserves momentum by construction.  (The viscous
difference uses the time-averaged solid velocity directly; expressed through
the imaginary velocity it is ``v^d_a - v_i``, the orientation that opposes
relative slip.)

The clip direction for a resting column means the imaginary pressure equals
the fluid pressure for fluid sitting on top of a static floor, while a
structure bearing down on fluid below raises it by the hydrostatic head.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from sphfsi.correction import CorrectionField
from sphfsi.fluid import EosParams
from sphfsi.neighbors import CrossPairs
from sphfsi.particles import ParticleSystem


@dataclass
class InterfaceState:
    """Per-solid-particle kinematics consumed by the interface."""

    vtilde: np.ndarray  # (Ns, 2) time-averaged velocity
    atilde: np.ndarray  # (Ns, 2) time-averaged acceleration
    normals: np.ndarray  # (Ns, 2) unit outward normals


@dataclass
class CouplingForces:
    accel_fluid: np.ndarray  # (Nf, 2) acceleration on fluid from this body
    accel_solid: np.ndarray  # (Ns, 2) reaction acceleration on the body
    fluid_impulse_rate: np.ndarray  # (2,) sum of m_i a_i
    solid_impulse_rate: np.ndarray  # (2,) sum of m_a a_a

    def balance_error(self) -> float:
        """Relative Newton's-third-law violation of the pair ledger."""
        total = self.fluid_impulse_rate + self.solid_impulse_rate
        scale = np.abs(self.fluid_impulse_rate) + np.abs(self.solid_impulse_rate)
        m = float(scale.max())
        if m == 0.0:
            return 0.0
        return float(np.abs(total).max() / m)


def imaginary_interface_state(
    p_i: float,
    rho_i: float,
    v_i: np.ndarray,
    r_ia: np.ndarray,
    gravity: np.ndarray,
    vtilde_a: np.ndarray,
    atilde_a: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Reference implementation of the imaginary solid-side state for one pair.

    ``r_ia`` is the separation ``r_i - r_a``; the hydrostatic head is taken
    along the fluid-to-solid direction ``-r_ia``.
    """
    g = np.asarray(gravity, dtype=float)
    head = float((g - np.asarray(atilde_a)) @ (-np.asarray(r_ia)))
    p_d = max(0.0, p_i + rho_i * head)
    v_d = 2.0 * np.asarray(v_i, dtype=float) - np.asarray(vtilde_a)
    return p_d, v_d


@njit(cache=True, parallel=True)
def _coupling_fluid_kernel(
    offsets, jidx, dx, dy, rr, ex, ey, dwdr,
    rho_f, p_f, vel_f, vol_f, mass_f, bt,
    vt, at, nrm, vol_s,
    rho0, c0, mu, gx, gy, out_accel,
):
    nf = offsets.shape[0] - 1
    for i in prange(nf):
        ax = 0.0
        ay = 0.0
        pi = p_f[i]
        rhoi = rho_f[i]
        vix = vel_f[i, 0]
        viy = vel_f[i, 1]
        voli = vol_f[i]
        mi = mass_f[i]
        for k in range(offsets[i], offsets[i + 1]):
            a = jidx[k]
            rx = dx[k]  # r_i - r_a
            ry = dy[k]
            head = (gx - at[a, 0]) * (-rx) + (gy - at[a, 1]) * (-ry)
            pd = pi + rhoi * head
            if pd < 0.0:
                pd = 0.0
            vdx = 2.0 * vix - vt[a, 0]
            vdy = 2.0 * viy - vt[a, 1]
            nx = nrm[a, 0]
            ny = nrm[a, 1]
            ul = -(vix * nx + viy * ny)
            ur = -(vdx * nx + vdy * ny)
            du = ur - ul
            beta = 3.0 * du / c0
            if beta < 0.0:
                beta = 0.0
            elif beta > 1.0:
                beta = 1.0
            pdiss = 0.5 * beta * rho0 * c0 * du
            mxx = 0.5 * (pi + pd * bt[i, 0, 0]) + pdiss
            mxy = 0.5 * (pd * bt[i, 0, 1])
            myx = 0.5 * (pd * bt[i, 1, 0])
            myy = 0.5 * (pi + pd * bt[i, 1, 1]) + pdiss
            gwx = dwdr[k] * ex[k]
            gwy = dwdr[k] * ey[k]
            fpx = 2.0 * voli * vol_s[a] * (mxx * gwx + mxy * gwy)
            fpy = 2.0 * voli * vol_s[a] * (myx * gwx + myy * gwy)
            ax -= fpx / mi
            ay -= fpy / mi
            if mu > 0.0 and rr[k] > 0.0:
                vis = 2.0 * mu * voli * vol_s[a] * dwdr[k] / rr[k]
                ax += vis * (vix - vt[a, 0]) / mi
                ay += vis * (viy - vt[a, 1]) / mi
        out_accel[i, 0] = ax
        out_accel[i, 1] = ay


@njit(cache=True, parallel=True)
def _coupling_solid_kernel(
    offsets, jidx, dx, dy, rr, ex, ey, dwdr,
    rho_f, p_f, vel_f, vol_f, mass_f, bt,
    vt, at, nrm, vol_s, mass_s,
    rho0, c0, mu, gx, gy, out_accel,
):
    # Mirror pass: identical pairwise arithmetic, opposite sign, scattered to
    # the solid by gathering over the reversed pair view.
    ns = offsets.shape[0] - 1
    for a in prange(ns):
        fx = 0.0
        fy = 0.0
        nx = nrm[a, 0]
        ny = nrm[a, 1]
        vta_x = vt[a, 0]
        vta_y = vt[a, 1]
        for k in range(offsets[a], offsets[a + 1]):
            i = jidx[k]
            rx = -dx[k]  # fluid minus solid, exact negation of the stored view
            ry = -dy[k]
            pi = p_f[i]
            rhoi = rho_f[i]
            vix = vel_f[i, 0]
            viy = vel_f[i, 1]
            voli = vol_f[i]
            head = (gx - at[a, 0]) * (-rx) + (gy - at[a, 1]) * (-ry)
            pd = pi + rhoi * head
            if pd < 0.0:
                pd = 0.0
            vdx = 2.0 * vix - vta_x
            vdy = 2.0 * viy - vta_y
            ul = -(vix * nx + viy * ny)
            ur = -(vdx * nx + vdy * ny)
            du = ur - ul
            beta = 3.0 * du / c0
            if beta < 0.0:
                beta = 0.0
            elif beta > 1.0:
                beta = 1.0
            pdiss = 0.5 * beta * rho0 * c0 * du
            mxx = 0.5 * (pi + pd * bt[i, 0, 0]) + pdiss
            mxy = 0.5 * (pd * bt[i, 0, 1])
            myx = 0.5 * (pd * bt[i, 1, 0])
            myy = 0.5 * (pi + pd * bt[i, 1, 1]) + pdiss
            gwx = dwdr[k] * (-ex[k])
            gwy = dwdr[k] * (-ey[k])
            fpx = 2.0 * voli * vol_s[a] * (mxx * gwx + mxy * gwy)
            fpy = 2.0 * voli * vol_s[a] * (myx * gwx + myy * gwy)
            fx += fpx  # reaction: minus the force on the fluid
            fy += fpy
            if mu > 0.0 and rr[k] > 0.0:
                vis = 2.0 * mu * voli * vol_s[a] * dwdr[k] / rr[k]
                fx -= vis * (vix - vta_x)
                fy -= vis * (viy - vta_y)
        out_accel[a, 0] = fx / mass_s[a]
        out_accel[a, 1] = fy / mass_s[a]


def pressure_coupling(
    fluid: ParticleSystem,
    solid: ParticleSystem,
    cross: CrossPairs,
    correction: CorrectionField,
    eos: EosParams,
    nu: float,
    iface: InterfaceState,
    gravity: np.ndarray,
) -> CouplingForces:
    """Interface accelerations for one fluid/solid body pair."""
    if iface.normals.shape != (solid.n, 2):
        raise ValueError("interface normals missing for paired solid body")
    g = np.asarray(gravity, dtype=float)
    a_fluid = np.zeros((fluid.n, 2))
    fwd = cross.forward
    _coupling_fluid_kernel(
        fwd.offsets, fwd.j, fwd.dx, fwd.dy, fwd.r, fwd.ex, fwd.ey, fwd.dwdr,
        fluid.rho, fluid.p, fluid.vel, fluid.vol, fluid.mass, correction.b_tilde,
        iface.vtilde, iface.atilde, iface.normals, solid.vol,
        eos.rho0, eos.c0, eos.rho0 * nu, g[0], g[1], a_fluid,
    )
    a_solid = np.zeros((solid.n, 2))
    rev = cross.reverse
    _coupling_solid_kernel(
        rev.offsets, rev.j, rev.dx, rev.dy, rev.r, rev.ex, rev.ey, rev.dwdr,
        fluid.rho, fluid.p, fluid.vel, fluid.vol, fluid.mass, correction.b_tilde,
        iface.vtilde, iface.atilde, iface.normals, solid.vol, solid.mass,
        eos.rho0, eos.c0, eos.rho0 * nu, g[0], g[1], a_solid,
    )
    return CouplingForces(
        accel_fluid=a_fluid,
        accel_solid=a_solid,
        fluid_impulse_rate=(fluid.mass[:, None] * a_fluid).sum(axis=0),
        solid_impulse_rate=(solid.mass[:, None] * a_solid).sum(axis=0),
    )


def time_average_solid_kinematics(
    history: list[tuple[float, np.ndarray, np.ndarray]],
    fallback_vel: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Duration-weighted means of per-substep velocity and acceleration.

    An empty history falls back to the instantaneous velocity with zero
    acceleration; returns ``(vtilde, atilde, fallback_count)``.
    """
    if not history:
        return fallback_vel.copy(), np.zeros_like(fallback_vel), 1
    total = sum(dt for dt, _, _ in history)
    vt = np.zeros_like(history[0][1])
    at = np.zeros_like(history[0][2])
    for dt, v, a in history:
        vt += (dt / total) * v
        at += (dt / total) * a
    return vt, at, 0
