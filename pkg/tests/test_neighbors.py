import numpy as np
import pytest

from sphfsi.geometry import Rect
from sphfsi.kernels import KernelSpec, kernel_eval
from sphfsi.neighbors import (
    CellGrid,
    NeighborBuildError,
    build_cross_pairs,
    build_neighbor_lists,
)
from sphfsi.particles import BodyKind, ParticleSystem, make_system


def brute_force_pairs(pos, cutoff, box=None, periodic=(False, False)):
    """O(N^2) reference: set of (i, j) pairs with r < cutoff, i != j."""
    n = pos.shape[0]
    d = pos[:, None, :] - pos[None, :, :]
    if box is not None:
        lx = box[2] - box[0]
        ly = box[3] - box[1]
        if periodic[0]:
            d[:, :, 0] -= lx * np.rint(d[:, :, 0] / lx)
        if periodic[1]:
            d[:, :, 1] -= ly * np.rint(d[:, :, 1] / ly)
    r = np.hypot(d[:, :, 0], d[:, :, 1])
    np.fill_diagonal(r, np.inf)
    ii, jj = np.where(r < cutoff)
    return set(zip(ii.tolist(), jj.tolist()))


def as_pair_set(nl):
    out = set()
    for i in range(nl.n_targets):
        for k in range(nl.offsets[i], nl.offsets[i + 1]):
            out.add((i, int(nl.j[k])))
    return out


def make_random_system(rng, n, extent):
    pos = rng.uniform(0.0, extent, (n, 2))
    return ParticleSystem(
        kind=BodyKind.FLUID, dp=1.0, pos=pos, vel=np.zeros((n, 2)),
        rho=np.full(n, 1000.0), p=np.zeros(n), vol=np.ones(n),
        mass=np.full(n, 1000.0), rho0=1000.0,
    )


def test_center_particle_of_3x3_lattice_has_8_neighbors():
    system = make_system(Rect(0, 0, 3, 3), 1.0, 1000.0, BodyKind.FLUID)
    nl = build_neighbor_lists(system, KernelSpec(h=1.3))
    counts = nl.counts()
    center = np.argmin(np.abs(system.pos - 1.5).sum(axis=1))
    assert counts[center] == 8


def test_single_particle_has_empty_list():
    system = make_system(Rect(0, 0, 1, 1), 1.0, 1000.0, BodyKind.FLUID)
    nl = build_neighbor_lists(system, KernelSpec(h=1.3))
    assert nl.n_pairs == 0


def test_pair_at_exactly_cutoff_excluded():
    pos = np.array([[0.0, 0.0], [2.6, 0.0]])
    system = ParticleSystem(
        kind=BodyKind.FLUID, dp=1.0, pos=pos, vel=np.zeros((2, 2)),
        rho=np.full(2, 1000.0), p=np.zeros(2), vol=np.ones(2),
        mass=np.full(2, 1000.0), rho0=1000.0,
    )
    nl = build_neighbor_lists(system, KernelSpec(h=1.3))
    assert nl.n_pairs == 0


def test_matches_brute_force_on_random_configurations(rng):
    spec = KernelSpec(h=0.9)
    for trial in range(100):
        n = int(rng.integers(2, 120))
        system = make_random_system(rng, n, extent=6.0)
        nl = build_neighbor_lists(system, spec)
        assert as_pair_set(nl) == brute_force_pairs(system.pos, spec.cutoff)


def test_matches_brute_force_periodic(rng):
    spec = KernelSpec(h=0.9)
    box = (0.0, 0.0, 6.0, 6.0)
    for trial in range(30):
        n = int(rng.integers(2, 100))
        system = make_random_system(rng, n, extent=6.0)
        grid = CellGrid.for_points(system.pos, spec.cutoff, box=box, periodic=(True, True))
        nl = build_neighbor_lists(system, spec, grid=grid)
        expected = brute_force_pairs(system.pos, spec.cutoff, box=box, periodic=(True, True))
        assert as_pair_set(nl) == expected


def test_symmetry_and_antisymmetric_separations(unit_lattice):
    system, spec = unit_lattice
    nl = build_neighbor_lists(system, spec)
    pairs = {}
    for i in range(nl.n_targets):
        for k in range(nl.offsets[i], nl.offsets[i + 1]):
            pairs[(i, int(nl.j[k]))] = (nl.dx[k], nl.dy[k], nl.r[k])
    for (i, j), (dx, dy, r) in pairs.items():
        assert (j, i) in pairs
        rdx, rdy, rr = pairs[(j, i)]
        assert rdx == -dx and rdy == -dy and rr == r


def test_neighbor_order_is_ascending(unit_lattice):
    system, spec = unit_lattice
    nl = build_neighbor_lists(system, spec)
    for i in range(nl.n_targets):
        row = nl.j[nl.offsets[i]:nl.offsets[i + 1]]
        assert np.all(np.diff(row) > 0)


def test_cached_kernel_values_match_direct_evaluation(unit_lattice):
    system, spec = unit_lattice
    nl = build_neighbor_lists(system, spec)
    w, dw = kernel_eval(nl.r, spec)
    np.testing.assert_allclose(nl.w, w, rtol=1e-14)
    np.testing.assert_allclose(nl.dwdr, dw, rtol=1e-14)


def test_gradient_sum_vanishes_on_interior_of_lattice(unit_lattice):
    # lattice antisymmetry: sum_j gradW V_j = 0 for full-support particles
    system, spec = unit_lattice
    nl = build_neighbor_lists(system, spec)
    gx = np.zeros(system.n)
    gy = np.zeros(system.n)
    for i in range(system.n):
        for k in range(nl.offsets[i], nl.offsets[i + 1]):
            j = nl.j[k]
            gx[i] += nl.dwdr[k] * nl.ex[k] * system.vol[j]
            gy[i] += nl.dwdr[k] * nl.ey[k] * system.vol[j]
    interior = np.all(np.abs(system.pos - 15.0) < (15.0 - spec.cutoff), axis=1)
    assert np.abs(gx[interior]).max() < 1e-12
    assert np.abs(gy[interior]).max() < 1e-12


def test_particle_outside_explicit_grid_raises():
    system = make_system(Rect(0, 0, 4, 4), 1.0, 1000.0, BodyKind.FLUID)
    grid = CellGrid.for_points(system.pos, 2.6, box=(0.0, 0.0, 3.0, 3.0))
    with pytest.raises(NeighborBuildError, match="particle"):
        build_neighbor_lists(system, KernelSpec(h=1.3), grid=grid)


class TestCrossPairs:
    def test_requires_fluid_support_at_least_solid(self):
        fluid = make_system(Rect(0, 0, 4, 2), 1.0, 1000.0, BodyKind.FLUID)
        solid = make_system(Rect(0, -1, 4, 0), 0.5, 1000.0, BodyKind.SOLID)
        with pytest.raises(ValueError, match="smoothing length"):
            build_cross_pairs(fluid, solid, KernelSpec(h=0.4), KernelSpec(h=0.575))

    def test_pair_present_within_cutoff(self):
        fluid = make_system(Rect(0, 0, 1, 1), 1.0, 1000.0, BodyKind.FLUID)
        h_f = 1.3
        solid = fluid_at = make_system(Rect(0, 0, 1, 1), 1.0, 1000.0, BodyKind.SOLID)
        solid.pos[0] = fluid.pos[0] + np.array([1.9 * h_f, 0.0])
        cp = build_cross_pairs(fluid, solid, KernelSpec(h=h_f))
        assert cp.forward.n_pairs == 1
        assert cp.reverse.n_pairs == 1

    def test_distant_bodies_have_no_pairs(self):
        fluid = make_system(Rect(0, 0, 2, 2), 0.5, 1000.0, BodyKind.FLUID)
        solid = make_system(Rect(10, 10, 12, 12), 0.25, 1000.0, BodyKind.SOLID)
        cp = build_cross_pairs(fluid, solid, KernelSpec(h=0.65), KernelSpec(h=0.2875))
        assert cp.forward.n_pairs == 0
        assert cp.reverse.n_pairs == 0

    def test_counts_match_brute_force_census_on_interface_strip(self, rng):
        # two-to-one spacing ratio across a flat interface
        dp_f, dp_s = 0.2, 0.1
        fluid = make_system(Rect(0, 0, 4, 1), dp_f, 1000.0, BodyKind.FLUID)
        solid = make_system(Rect(0, -0.5, 4, 0), dp_s, 1000.0, BodyKind.SOLID)
        spec = KernelSpec(h=1.3 * dp_f)
        cp = build_cross_pairs(fluid, solid, spec, KernelSpec(h=1.15 * dp_s))
        d = fluid.pos[:, None, :] - solid.pos[None, :, :]
        r = np.hypot(d[:, :, 0], d[:, :, 1])
        expected_counts = (r < spec.cutoff).sum(axis=1)
        np.testing.assert_array_equal(cp.forward.counts(), expected_counts)

    def test_reverse_view_is_exact_mirror(self):
        dp_f, dp_s = 0.2, 0.1
        fluid = make_system(Rect(0, 0, 2, 0.6), dp_f, 1000.0, BodyKind.FLUID)
        solid = make_system(Rect(0, -0.4, 2, 0), dp_s, 1000.0, BodyKind.SOLID)
        cp = build_cross_pairs(fluid, solid, KernelSpec(h=1.3 * dp_f))
        fwd = set()
        for i in range(cp.forward.n_targets):
            for k in range(cp.forward.offsets[i], cp.forward.offsets[i + 1]):
                fwd.add((i, int(cp.forward.j[k]), cp.forward.dx[k], cp.forward.r[k]))
        rev = set()
        for a in range(cp.reverse.n_targets):
            for k in range(cp.reverse.offsets[a], cp.reverse.offsets[a + 1]):
                rev.add((int(cp.reverse.j[k]), a, -cp.reverse.dx[k], cp.reverse.r[k]))
        assert fwd == rev
