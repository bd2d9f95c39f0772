import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphfsi.correction import compute_correction_matrices, identity_correction
from sphfsi.fluid import (
    EosParams,
    continuity_rate,
    momentum_rate,
    riemann_interface,
)
from sphfsi.geometry import Rect
from sphfsi.kernels import KernelSpec
from sphfsi.neighbors import CellGrid, build_neighbor_lists
from sphfsi.particles import BodyKind, make_system


class TestEos:
    def test_reference_density_gives_zero(self):
        eos = EosParams(1000.0, 10.0)
        assert eos.pressure(1000.0) == 0.0

    def test_direct_values(self):
        eos = EosParams(1000.0, 10.0)
        assert eos.pressure(1010.0) == pytest.approx(1000.0)
        # negative pressure is allowed, no clipping
        assert eos.pressure(990.0) == pytest.approx(-1000.0)

    def test_invalid(self):
        with pytest.raises(ValueError):
            EosParams(0.0, 10.0)
        with pytest.raises(ValueError):
            EosParams(1000.0, 10.0).pressure(-1.0)

    @given(st.floats(500.0, 2000.0))
    def test_round_trip(self, rho):
        eos = EosParams(1000.0, 37.5)
        assert eos.rho_from_pressure(eos.pressure(rho)) == pytest.approx(rho, rel=1e-14)


class TestRiemannInterface:
    def setup_method(self):
        self.eos = EosParams(1000.0, 10.0)
        self.e = np.array([1.0, 0.0])

    def test_identical_states(self):
        state = (1000.0, np.array([0.5, 0.0]), 2000.0)
        sol = riemann_interface(state, state, self.e, self.eos)
        np.testing.assert_allclose(sol.v_star, [0.5, 0.0], atol=1e-15)
        assert sol.p_star_scalar == 0.0
        assert sol.beta == 0.0
        # intermediate normal velocity equals the shared state value (the
        # internal axis runs against e, hence the sign)
        assert sol.u_star == pytest.approx(-0.5, abs=1e-15)

    def test_approaching_pair_dissipation(self):
        sol = riemann_interface(
            (1000.0, np.array([-1.0, 0.0]), 0.0),
            (1000.0, np.array([1.0, 0.0]), 0.0),
            self.e, self.eos,
        )
        assert sol.beta == pytest.approx(0.6, abs=1e-12)
        assert sol.p_star_scalar == pytest.approx(6000.0, abs=1e-9)
        assert sol.u_star == pytest.approx(0.0, abs=1e-12)

    def test_pressure_jump_velocity(self):
        sol = riemann_interface(
            (1000.0, np.zeros(2), 2000.0),
            (1000.0, np.zeros(2), 1000.0),
            self.e, self.eos,
        )
        assert sol.u_star == pytest.approx(0.05, abs=1e-15)

    def test_separating_pair_has_no_dissipation(self):
        sol = riemann_interface(
            (1000.0, np.array([1.0, 0.0]), 0.0),
            (1000.0, np.array([-1.0, 0.0]), 0.0),
            self.e, self.eos,
        )
        assert sol.beta == 0.0
        assert sol.p_star_scalar == 0.0

    def test_interface_drifts_away_from_high_pressure(self):
        # e points from j toward i; i carries the higher pressure, so the
        # interface velocity acquires a component from i toward j
        sol = riemann_interface(
            (1000.0, np.zeros(2), 2000.0),
            (1000.0, np.zeros(2), 0.0),
            self.e, self.eos,
        )
        assert sol.v_star[0] < 0.0

    def test_non_unit_vector_rejected(self):
        with pytest.raises(ValueError):
            riemann_interface(
                (1000.0, np.zeros(2), 0.0), (1000.0, np.zeros(2), 0.0),
                np.array([1.0, 1.0]), self.eos,
            )

    @settings(max_examples=200)
    @given(
        st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3),
        st.floats(-5000, 5000), st.floats(-5000, 5000), st.floats(0, 2 * np.pi),
    )
    def test_relabeling_invariance_and_limiter_range(self, vix, viy, vjx, vjy, pi, pj, ang):
        e = np.array([np.cos(ang), np.sin(ang)])
        a = riemann_interface((1000.0, np.array([vix, viy]), pi),
                              (1000.0, np.array([vjx, vjy]), pj), e, self.eos)
        b = riemann_interface((1000.0, np.array([vjx, vjy]), pj),
                              (1000.0, np.array([vix, viy]), pi), -e, self.eos)
        assert 0.0 <= a.beta <= 1.0
        np.testing.assert_allclose(a.v_star, b.v_star, atol=1e-12)
        assert a.p_star_scalar == pytest.approx(b.p_star_scalar, abs=1e-9)


@pytest.fixture
def periodic_lattice():
    dp = 0.01
    n = 40
    box = (0.0, 0.0, n * dp, n * dp)
    system = make_system(Rect(*box), dp, 1000.0, BodyKind.FLUID)
    spec = KernelSpec(h=1.3 * dp)
    grid = CellGrid.for_points(system.pos, spec.cutoff, box=box, periodic=(True, True))
    nl = build_neighbor_lists(system, spec, grid=grid)
    return system, spec, nl, box


class TestContinuity:
    def test_rest_state_is_stationary(self, periodic_lattice):
        system, spec, nl, box = periodic_lattice
        system.p[:] = 777.0
        system.rho[:] = 1000.0
        eos = EosParams(1000.0, 44.3)
        drho = continuity_rate(system, nl, eos)
        assert np.abs(drho).max() < 1e-10

    def test_uniform_translation_is_stationary(self, periodic_lattice):
        system, spec, nl, box = periodic_lattice
        system.vel[:] = [0.3, -0.2]
        drho = continuity_rate(system, nl, EosParams(1000.0, 44.3))
        assert np.abs(drho).max() < 1e-9

    def test_galilean_invariance(self, periodic_lattice, rng):
        system, spec, nl, box = periodic_lattice
        eos = EosParams(1000.0, 44.3)
        system.vel = rng.uniform(-0.1, 0.1, (system.n, 2))
        base = continuity_rate(system, nl, eos)
        system.vel += np.array([5.0, -3.0])
        shifted = continuity_rate(system, nl, eos)
        np.testing.assert_allclose(shifted, base, atol=1e-9 * 1000)

    def test_radial_expansion_matches_divergence(self, periodic_lattice):
        # continuous oracle: div(k r) = 2 k in two dimensions
        system, spec, nl, box = periodic_lattice
        k = 0.7
        center = np.array([box[2] / 2, box[3] / 2])
        system.vel = k * (system.pos - center)
        drho = continuity_rate(system, nl, EosParams(1000.0, 44.3))
        interior = np.all(np.abs(system.pos - center) < (box[2] / 2 - 3 * spec.cutoff), axis=1)
        expected = -2.0 * 1000.0 * k
        assert np.abs(drho[interior] / expected - 1.0).max() < 0.05


class TestMomentum:
    def test_uniform_pressure_zero_acceleration(self, periodic_lattice):
        system, spec, nl, box = periodic_lattice
        system.p[:] = 777.0
        corr = compute_correction_matrices(system, [(nl, system.vol)], alpha=0.5)
        rates = momentum_rate(system, nl, corr, EosParams(1000.0, 44.3))
        assert np.abs(rates.dv_dt).max() < 1e-10

    def test_hydrostatic_gradient_cancels_gravity(self, periodic_lattice):
        system, spec, nl, box = periodic_lattice
        g = 9.81
        system.p = 1000.0 * g * (box[3] - system.pos[:, 1])
        corr = compute_correction_matrices(system, [(nl, system.vol)], alpha=0.5)
        rates = momentum_rate(system, nl, corr, EosParams(1000.0, 44.3))
        center = np.array([box[2] / 2, box[3] / 2])
        interior = np.all(np.abs(system.pos - center) < (box[2] / 2 - 3 * spec.cutoff), axis=1)
        # pressure acceleration approximately +g in y, within 2 percent
        assert np.abs(rates.accel_pressure[interior, 1] / g - 1.0).max() < 0.02

    def test_two_particle_forces_exactly_opposite(self):
        pos = np.array([[0.0, 0.0], [0.9, 0.4]])
        from sphfsi.particles import ParticleSystem

        system = ParticleSystem(
            kind=BodyKind.FLUID, dp=1.0, pos=pos, vel=np.zeros((2, 2)),
            rho=np.full(2, 1000.0), p=np.array([500.0, -200.0]), vol=np.ones(2),
            mass=np.full(2, 1000.0), rho0=1000.0,
        )
        nl = build_neighbor_lists(system, KernelSpec(h=1.3))
        rates = momentum_rate(system, nl, identity_correction(2), EosParams(1000.0, 10.0))
        f0 = system.mass[0] * rates.dv_dt[0]
        f1 = system.mass[1] * rates.dv_dt[1]
        np.testing.assert_array_equal(f0, -f1)

    def test_total_momentum_conserved_with_viscosity(self, periodic_lattice, rng):
        system, spec, nl, box = periodic_lattice
        eos = EosParams(1000.0, 44.3)
        system.p = rng.uniform(-500, 500, system.n)
        system.rho = np.asarray(eos.rho_from_pressure(system.p))
        system.vel = rng.uniform(-1, 1, (system.n, 2))
        system.update_volume()
        corr = compute_correction_matrices(system, [(nl, system.vol)], alpha=0.5)
        rates = momentum_rate(system, nl, corr, eos, nu=1e-4)
        total = (system.mass[:, None] * rates.dv_dt).sum(axis=0)
        scale = np.abs(system.mass[:, None] * rates.dv_dt).sum()
        assert np.abs(total).max() / scale < 1e-12

    def test_overlapping_pair_skips_viscous_term(self):
        pos = np.array([[0.0, 0.0], [0.0, 0.0], [0.9, 0.0]])
        from sphfsi.particles import ParticleSystem

        system = ParticleSystem(
            kind=BodyKind.FLUID, dp=1.0, pos=pos, vel=np.zeros((3, 2)),
            rho=np.full(3, 1000.0), p=np.zeros(3), vol=np.ones(3),
            mass=np.full(3, 1000.0), rho0=1000.0,
        )
        nl = build_neighbor_lists(system, KernelSpec(h=1.3))
        rates = momentum_rate(system, nl, identity_correction(3),
                              EosParams(1000.0, 10.0), nu=1e-3)
        assert rates.skipped_pairs == 2
        assert np.all(np.isfinite(rates.dv_dt))

    def test_viscous_term_matches_laplacian(self):
        # quadratic shear profile on a periodic lattice: nu d2v/dy2 = 2 a nu
        dp = 0.01
        n = 40
        box = (0.0, 0.0, n * dp, n * dp)
        system = make_system(Rect(*box), dp, 1000.0, BodyKind.FLUID)
        spec = KernelSpec(h=1.3 * dp)
        grid = CellGrid.for_points(system.pos, spec.cutoff, box=box, periodic=(True, False))
        nl = build_neighbor_lists(system, spec, grid=grid)
        a = 30.0
        yc = system.pos[:, 1] - box[3] / 2
        system.vel[:, 0] = a * yc**2
        nu = 1e-3
        rates = momentum_rate(system, nl, identity_correction(system.n),
                              EosParams(1000.0, 44.3), nu=nu)
        interior = np.abs(yc) < (box[3] / 2 - 3 * spec.cutoff)
        expected = 2.0 * a * nu
        assert np.abs(rates.accel_viscous[interior, 0] / expected - 1.0).max() < 0.05
