"""Total-Lagrangian elastic solid with reference-configuration correction.

All gradients and the neighbor topology are frozen in the initial reference
configuration.  The reference correction matrix

    B0_a = ( -sum_b r0_ab (x) grad0 W_ab V0_b )^(-1)

makes the discrete deformation gradient

    F_a = ( sum_b (u_b - u_a) (x) grad0 W_ab V0_b ) B0_a + I

exact for affine displacement fields, including at boundary particles.  The
constitutive pipeline for the linear-elastic Kirchhoff material is

    E = (F^T F - I)/2,   S = lambda tr(E) I + 2 mu E,   P = F S,

with density following ``rho = rho0 / det(F)``.  The momentum rate

    (dv/dt)_a = (1/m_a) sum_b (P_a B0_a + P_b B0_b) grad0 W_ab V0_a V0_b
                + g + a_a^coupling

is pairwise antisymmetric, so internal forces sum to zero on a free body.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from sphfsi.correction import DET_EPS, _accumulate_a
from sphfsi.kernels import KernelSpec
from sphfsi.neighbors import NeighborList, build_neighbor_lists
from sphfsi.particles import ParticleSystem

# Dimensionless number-density gradient threshold that separates surface
# particles (one-sided support) from interior ones on the reference lattice.
SURFACE_GRAD_THRESHOLD = 0.25


class SolidReferenceError(RuntimeError):
    pass


class ElementInversionError(RuntimeError):
    def __init__(self, particle: int, context: str = ""):
        self.particle = particle
        msg = f"deformation gradient lost positivity at particle {particle}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


@dataclass(frozen=True)
class MaterialElastic:
    """Linear-elastic Kirchhoff constants (plane form of the isotropic law)."""

    rho0: float
    E: float
    nu: float
    lam: float
    mu: float
    K: float
    cS: float


def material_constants(rho0: float, E: float, nu: float) -> MaterialElastic:
    """Derive Lame/bulk constants and the solid sound speed from (rho0, E, nu).

    Uses the standard isotropic relations mu = E/(2(1+nu)) and
    K = E/(3(1-2nu)); the sound speed is sqrt(K/rho0).
    """
    if rho0 <= 0.0 or E <= 0.0:
        raise ValueError("rho0 and E must be positive")
    if not (0.0 < nu < 0.5):
        raise ValueError(f"Poisson ratio must lie in (0, 0.5), got {nu}")
    mu = E / (2.0 * (1.0 + nu))
    K = E / (3.0 * (1.0 - 2.0 * nu))
    lam = K - 2.0 * mu / 3.0
    return MaterialElastic(rho0=rho0, E=E, nu=nu, lam=lam, mu=mu, K=K, cS=math.sqrt(K / rho0))


def plane_modulus(mat: MaterialElastic) -> float:
    """Effective uniaxial modulus of the 2D constitutive law, 4 mu (lam + mu) / (lam + 2 mu)."""
    return 4.0 * mat.mu * (mat.lam + mat.mu) / (mat.lam + 2.0 * mat.mu)


@dataclass
class SolidReference:
    """Frozen initial configuration; immutable after construction."""

    r0: np.ndarray  # (N, 2)
    v0: np.ndarray  # (N,)
    b0: np.ndarray  # (N, 2, 2)
    neighbors: NeighborList
    n0: np.ndarray  # (N, 2) unit outward normals
    surface: np.ndarray  # (N,) bool
    spec: KernelSpec


@njit(cache=True, parallel=True)
def _number_density_gradient(offsets, jidx, ex, ey, dwdr, vol, out):
    n = offsets.shape[0] - 1
    for i in prange(n):
        gx = 0.0
        gy = 0.0
        for k in range(offsets[i], offsets[i + 1]):
            gv = dwdr[k] * vol[jidx[k]]
            gx += gv * ex[k]
            gy += gv * ey[k]
        out[i, 0] = gx
        out[i, 1] = gy


def build_reference(system: ParticleSystem, spec: KernelSpec) -> SolidReference:
    """Reference neighbor list, volumes, correction matrices and normals.

    Raises :class:`SolidReferenceError` for any particle whose reference A
    matrix is singular (e.g. an isolated particle or a collinear
    neighborhood); the reference build never silently blends.
    """
    n = system.n
    nl = build_neighbor_lists(system, spec)
    axx = np.zeros(n)
    axy = np.zeros(n)
    ayx = np.zeros(n)
    ayy = np.zeros(n)
    _accumulate_a(nl.offsets, nl.j, nl.dx, nl.dy, nl.ex, nl.ey, nl.dwdr,
                  system.vol, axx, axy, ayx, ayy)
    det = axx * ayy - axy * ayx
    bad = np.where(det <= DET_EPS)[0]
    if bad.size:
        raise SolidReferenceError(
            f"reference correction matrix is singular at particle {int(bad[0])} "
            f"(det = {det[bad[0]]:.3e}); the body is degenerate there"
        )
    b0 = np.empty((n, 2, 2))
    b0[:, 0, 0] = ayy / det
    b0[:, 0, 1] = -axy / det
    b0[:, 1, 0] = -ayx / det
    b0[:, 1, 1] = axx / det

    # Outward normals: corrected gradient of the unit indicator field, which
    # vanishes in the interior and points inward at the surface.
    grad = np.empty((n, 2))
    _number_density_gradient(nl.offsets, nl.j, nl.ex, nl.ey, nl.dwdr, system.vol, grad)
    mag = np.hypot(grad[:, 0], grad[:, 1]) * spec.h
    surface = mag > SURFACE_GRAD_THRESHOLD
    if not np.any(surface):
        raise SolidReferenceError("no surface particles detected on the reference lattice")
    corrected = -np.einsum("nij,nj->ni", b0, grad)
    norms = np.hypot(corrected[:, 0], corrected[:, 1])
    n0 = np.zeros((n, 2))
    n0[surface] = corrected[surface] / norms[surface, None]
    # Interior particles inherit the normal of the nearest surface particle
    # (ties broken by particle index for determinism).
    interior = np.where(~surface)[0]
    if interior.size:
        from scipy.spatial import cKDTree

        surf_idx = np.where(surface)[0]
        tree = cKDTree(system.pos[surf_idx])
        _, nearest = tree.query(system.pos[interior], k=1)
        n0[interior] = n0[surf_idx[nearest]]
    return SolidReference(
        r0=system.pos.copy(),
        v0=system.vol.copy(),
        b0=b0,
        neighbors=nl,
        n0=n0,
        surface=surface,
        spec=spec,
    )


@njit(cache=True, parallel=True)
def _def_grad_kernel(offsets, jidx, ex, ey, dwdr, v0, u, b0, f_out):
    n = offsets.shape[0] - 1
    for a in prange(n):
        gxx = 0.0
        gxy = 0.0
        gyx = 0.0
        gyy = 0.0
        uax = u[a, 0]
        uay = u[a, 1]
        for k in range(offsets[a], offsets[a + 1]):
            b = jidx[k]
            gv = dwdr[k] * v0[b]
            gwx = gv * ex[k]
            gwy = gv * ey[k]
            dux = u[b, 0] - uax
            duy = u[b, 1] - uay
            gxx += dux * gwx
            gxy += dux * gwy
            gyx += duy * gwx
            gyy += duy * gwy
        # F = G B0 + I
        f_out[a, 0, 0] = gxx * b0[a, 0, 0] + gxy * b0[a, 1, 0] + 1.0
        f_out[a, 0, 1] = gxx * b0[a, 0, 1] + gxy * b0[a, 1, 1]
        f_out[a, 1, 0] = gyx * b0[a, 0, 0] + gyy * b0[a, 1, 0]
        f_out[a, 1, 1] = gyx * b0[a, 0, 1] + gyy * b0[a, 1, 1] + 1.0


def deformation_gradient(disp: np.ndarray, ref: SolidReference) -> np.ndarray:
    """Per-particle deformation gradient from displacements; aborts on inversion."""
    n = ref.r0.shape[0]
    f = np.empty((n, 2, 2))
    nl = ref.neighbors
    _def_grad_kernel(nl.offsets, nl.j, nl.ex, nl.ey, nl.dwdr, ref.v0,
                     np.ascontiguousarray(disp), ref.b0, f)
    det = f[:, 0, 0] * f[:, 1, 1] - f[:, 0, 1] * f[:, 1, 0]
    bad = np.where(det <= 0.0)[0]
    if bad.size:
        raise ElementInversionError(int(bad[0]))
    return f


@dataclass
class StressState:
    strain: np.ndarray  # (N, 2, 2) Green-Lagrange
    pk2: np.ndarray  # (N, 2, 2)
    pk1: np.ndarray  # (N, 2, 2)
    rho: np.ndarray  # (N,)
    von_mises: np.ndarray  # (N,)


def stress_pipeline(f: np.ndarray, mat: MaterialElastic) -> StressState:
    """Strain, stresses, density and the von Mises scalar from F.

    The von Mises value is computed from the Cauchy stress
    ``sigma = F S F^T / det(F)`` via ``sqrt(sxx^2 - sxx syy + syy^2 + 3 sxy^2)``.
    """
    det = f[:, 0, 0] * f[:, 1, 1] - f[:, 0, 1] * f[:, 1, 0]
    if np.any(det <= 0.0):
        raise ElementInversionError(int(np.where(det <= 0.0)[0][0]))
    ft_f = np.einsum("nji,njk->nik", f, f)
    strain = 0.5 * (ft_f - np.eye(2))
    tr = strain[:, 0, 0] + strain[:, 1, 1]
    pk2 = 2.0 * mat.mu * strain
    pk2[:, 0, 0] += mat.lam * tr
    pk2[:, 1, 1] += mat.lam * tr
    pk1 = np.einsum("nij,njk->nik", f, pk2)
    rho = mat.rho0 / det
    cauchy = np.einsum("nij,njk->nik", pk1, np.transpose(f, (0, 2, 1))) / det[:, None, None]
    sxx = cauchy[:, 0, 0]
    syy = cauchy[:, 1, 1]
    sxy = cauchy[:, 0, 1]
    vm = np.sqrt(np.maximum(sxx**2 - sxx * syy + syy**2 + 3.0 * sxy**2, 0.0))
    return StressState(strain=strain, pk2=pk2, pk1=pk1, rho=rho, von_mises=vm)


@njit(cache=True, parallel=True)
def _solid_force_kernel(offsets, jidx, ex, ey, dwdr, v0, mass, pb, out):
    n = offsets.shape[0] - 1
    for a in prange(n):
        fx = 0.0
        fy = 0.0
        va = v0[a]
        pbaxx = pb[a, 0, 0]
        pbaxy = pb[a, 0, 1]
        pbayx = pb[a, 1, 0]
        pbayy = pb[a, 1, 1]
        for k in range(offsets[a], offsets[a + 1]):
            b = jidx[k]
            gv = dwdr[k] * va * v0[b]
            gwx = gv * ex[k]
            gwy = gv * ey[k]
            mxx = pbaxx + pb[b, 0, 0]
            mxy = pbaxy + pb[b, 0, 1]
            myx = pbayx + pb[b, 1, 0]
            myy = pbayy + pb[b, 1, 1]
            fx += mxx * gwx + mxy * gwy
            fy += myx * gwx + myy * gwy
        out[a, 0] = fx / mass[a]
        out[a, 1] = fy / mass[a]


def solid_momentum_rate(
    pk1: np.ndarray,
    ref: SolidReference,
    mass: np.ndarray,
    gravity: np.ndarray | None = None,
    coupling_accel: np.ndarray | None = None,
    clamped: np.ndarray | None = None,
) -> np.ndarray:
    """Acceleration from internal stresses plus body and coupling terms.

    Clamped particles receive zero rate; the constraint is applied after the
    (conservative) pairwise assembly.
    """
    n = ref.r0.shape[0]
    pb = np.einsum("nij,njk->nik", pk1, ref.b0)
    accel = np.empty((n, 2))
    nl = ref.neighbors
    _solid_force_kernel(nl.offsets, nl.j, nl.ex, nl.ey, nl.dwdr, ref.v0, mass, pb, accel)
    if gravity is not None:
        accel += np.asarray(gravity, dtype=float)
    if coupling_accel is not None:
        accel += coupling_accel
    if clamped is not None:
        accel[clamped] = 0.0
    return accel


def apply_constraints_and_damping(
    vel: np.ndarray,
    disp: np.ndarray,
    clamped: np.ndarray,
    zeta: float,
    dt: float,
    clamp_disp: np.ndarray | None = None,
    clamp_vel: np.ndarray | None = None,
) -> None:
    """In-place velocity damping ``v <- v (1 - zeta dt)`` and clamp enforcement.

    Without an explicit clamp motion the clamped set is held at zero
    displacement and velocity.
    """
    if zeta > 0.0:
        vel *= max(0.0, 1.0 - zeta * dt)
    if np.any(clamped):
        vel[clamped] = 0.0 if clamp_vel is None else clamp_vel[clamped]
        disp[clamped] = 0.0 if clamp_disp is None else clamp_disp[clamped]


@njit(cache=True)
def _script_point(kind, sp, x0, y0, t):
    """Displacement and velocity of a scripted reference point at time t."""
    if kind == 1:
        theta = sp[2] * np.sin(sp[3] * t)
        theta_dot = sp[2] * sp[3] * np.cos(sp[3] * t)
        c = np.cos(theta)
        s = np.sin(theta)
        dx = x0 - sp[0]
        dy = y0 - sp[1]
        rx = c * dx - s * dy
        ry = s * dx + c * dy
        return rx - dx, ry - dy, -theta_dot * ry, theta_dot * rx
    if kind == 2:
        if t < sp[6]:
            return sp[4] * t, sp[5] * t, sp[4], sp[5]
        return sp[4] * sp[6], sp[5] * sp[6], 0.0, 0.0
    return 0.0, 0.0, 0.0, 0.0


@njit(cache=True, parallel=True)
def _advance_solid_jit(
    offsets, jidx, ex, ey, dwdr, b0, v0, mass, r0,
    lam, mu, gx, gy, afs, zeta, clamped, script_kind, sp,
    t0, dt_total, n_sub, u, v, f_out, pk1_out, vbar, abar,
):
    """Drift-kick-drift substeps with stresses evaluated at half positions.

    Returns -1 on success or the first particle index where det(F) <= 0.
    All phases are per-particle gathers over the frozen reference topology,
    so the result is independent of the worker count.
    """
    n = u.shape[0]
    sub = dt_total / n_sub
    wsub = 1.0 / n_sub
    damp = 1.0 - zeta * sub
    if damp < 0.0:
        damp = 0.0
    pb = np.empty((n, 2, 2))
    accel = np.empty((n, 2))
    for i in range(n):
        vbar[i, 0] = 0.0
        vbar[i, 1] = 0.0
        abar[i, 0] = 0.0
        abar[i, 1] = 0.0
    for step in range(n_sub):
        t_half = t0 + step * sub + 0.5 * sub
        t_end = t0 + (step + 1) * sub
        # half drift
        for i in prange(n):
            if clamped[i]:
                ux, uy, _, _ = _script_point(script_kind, sp, r0[i, 0], r0[i, 1], t_half)
                u[i, 0] = ux
                u[i, 1] = uy
            else:
                u[i, 0] += 0.5 * sub * v[i, 0]
                u[i, 1] += 0.5 * sub * v[i, 1]
        # deformation gradient, stress, P B0 at half position
        for i in prange(n):
            gxx = 0.0
            gxy = 0.0
            gyx = 0.0
            gyy = 0.0
            uax = u[i, 0]
            uay = u[i, 1]
            for k in range(offsets[i], offsets[i + 1]):
                b = jidx[k]
                gv = dwdr[k] * v0[b]
                gwx = gv * ex[k]
                gwy = gv * ey[k]
                dux = u[b, 0] - uax
                duy = u[b, 1] - uay
                gxx += dux * gwx
                gxy += dux * gwy
                gyx += duy * gwx
                gyy += duy * gwy
            fxx = gxx * b0[i, 0, 0] + gxy * b0[i, 1, 0] + 1.0
            fxy = gxx * b0[i, 0, 1] + gxy * b0[i, 1, 1]
            fyx = gyx * b0[i, 0, 0] + gyy * b0[i, 1, 0]
            fyy = gyx * b0[i, 0, 1] + gyy * b0[i, 1, 1] + 1.0
            f_out[i, 0, 0] = fxx
            f_out[i, 0, 1] = fxy
            f_out[i, 1, 0] = fyx
            f_out[i, 1, 1] = fyy
            # E = (F^T F - I)/2 ; S = lam tr(E) I + 2 mu E ; P = F S
            exx = 0.5 * (fxx * fxx + fyx * fyx - 1.0)
            eyy = 0.5 * (fxy * fxy + fyy * fyy - 1.0)
            exy = 0.5 * (fxx * fxy + fyx * fyy)
            tr = exx + eyy
            sxx = lam * tr + 2.0 * mu * exx
            syy = lam * tr + 2.0 * mu * eyy
            sxy = 2.0 * mu * exy
            pxx = fxx * sxx + fxy * sxy
            pxy = fxx * sxy + fxy * syy
            pyx = fyx * sxx + fyy * sxy
            pyy = fyx * sxy + fyy * syy
            pk1_out[i, 0, 0] = pxx
            pk1_out[i, 0, 1] = pxy
            pk1_out[i, 1, 0] = pyx
            pk1_out[i, 1, 1] = pyy
            pb[i, 0, 0] = pxx * b0[i, 0, 0] + pxy * b0[i, 1, 0]
            pb[i, 0, 1] = pxx * b0[i, 0, 1] + pxy * b0[i, 1, 1]
            pb[i, 1, 0] = pyx * b0[i, 0, 0] + pyy * b0[i, 1, 0]
            pb[i, 1, 1] = pyx * b0[i, 0, 1] + pyy * b0[i, 1, 1]
        bad = -1
        for i in range(n):
            det = f_out[i, 0, 0] * f_out[i, 1, 1] - f_out[i, 0, 1] * f_out[i, 1, 0]
            if det <= 0.0:
                bad = i
                break
        if bad >= 0:
            return bad
        # internal + external forces
        for i in prange(n):
            fx = 0.0
            fy = 0.0
            va = v0[i]
            for k in range(offsets[i], offsets[i + 1]):
                b = jidx[k]
                gv = dwdr[k] * va * v0[b]
                gwx = gv * ex[k]
                gwy = gv * ey[k]
                fx += (pb[i, 0, 0] + pb[b, 0, 0]) * gwx + (pb[i, 0, 1] + pb[b, 0, 1]) * gwy
                fy += (pb[i, 1, 0] + pb[b, 1, 0]) * gwx + (pb[i, 1, 1] + pb[b, 1, 1]) * gwy
            accel[i, 0] = fx / mass[i] + gx + afs[i, 0]
            accel[i, 1] = fy / mass[i] + gy + afs[i, 1]
        # kick + damping + constraints + second half drift
        for i in prange(n):
            v_old_x = v[i, 0]
            v_old_y = v[i, 1]
            if clamped[i]:
                ux, uy, vx, vy = _script_point(script_kind, sp, r0[i, 0], r0[i, 1], t_end)
                v[i, 0] = vx
                v[i, 1] = vy
                u[i, 0] = ux
                u[i, 1] = uy
            else:
                v[i, 0] = (v_old_x + sub * accel[i, 0]) * damp
                v[i, 1] = (v_old_y + sub * accel[i, 1]) * damp
                u[i, 0] += 0.5 * sub * v[i, 0]
                u[i, 1] += 0.5 * sub * v[i, 1]
            vbar[i, 0] += wsub * v[i, 0]
            vbar[i, 1] += wsub * v[i, 1]
            abar[i, 0] += wsub * (v[i, 0] - v_old_x) / sub
            abar[i, 1] += wsub * (v[i, 1] - v_old_y) / sub
    return -1


def surface_normals(
    f: np.ndarray, ref: SolidReference, previous: np.ndarray | None = None
) -> tuple[np.ndarray, int]:
    """Push reference normals forward: ``n = F^-T n0 / |F^-T n0|``.

    Degenerate images (norm < 1e-12) keep the previous normal and are
    counted; returns ``(normals, degenerate_count)``.
    """
    det = f[:, 0, 0] * f[:, 1, 1] - f[:, 0, 1] * f[:, 1, 0]
    # F^-T rows from the adjugate transpose
    nx = f[:, 1, 1] * ref.n0[:, 0] - f[:, 1, 0] * ref.n0[:, 1]
    ny = -f[:, 0, 1] * ref.n0[:, 0] + f[:, 0, 0] * ref.n0[:, 1]
    nx /= det
    ny /= det
    mag = np.hypot(nx, ny)
    ok = mag > 1e-12
    out = np.empty_like(ref.n0)
    out[ok, 0] = nx[ok] / mag[ok]
    out[ok, 1] = ny[ok] / mag[ok]
    bad = ~ok
    if np.any(bad):
        out[bad] = ref.n0[bad] if previous is None else previous[bad]
    return out, int(np.count_nonzero(bad))
