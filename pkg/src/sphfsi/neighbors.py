"""Cell-grid neighbor search and cached pair lists.

Pair data is stored in CSR layout: for particle ``i`` the records live in
``slice(offsets[i], offsets[i+1])`` with neighbor indices ascending.  Each
record caches the separation vector ``r_i - r_j`` (minimum image when
periodic), its magnitude, the unit vector ``e_ij``, the kernel value and the
radial kernel derivative, so rate assemblies never re-evaluate the kernel.

Only pairs with ``r < cutoff`` (strict) are stored and a particle is never
its own neighbor.  Intra-body lists are symmetric: the record (i, j) exists
iff (j, i) does, with exactly opposite separation vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np
from numba import njit, prange

from sphfsi.kernels import SIGMA_2D, KernelSpec
from sphfsi.particles import ParticleSystem


@dataclass(frozen=True)
class CellGrid:
    """Axis-aligned bucket grid with cell size >= the search cutoff."""

    x0: float
    y0: float
    x1: float
    y1: float
    ncx: int
    ncy: int
    periodic_x: bool = False
    periodic_y: bool = False

    @property
    def lx(self) -> float:
        return self.x1 - self.x0

    @property
    def ly(self) -> float:
        return self.y1 - self.y0

    @staticmethod
    def for_points(
        pos: np.ndarray,
        cutoff: float,
        box: tuple[float, float, float, float] | None = None,
        periodic: tuple[bool, bool] = (False, False),
    ) -> "CellGrid":
        """Grid covering ``box`` (or the point bounds plus one cutoff margin)."""
        if box is not None:
            x0, y0, x1, y1 = box
        else:
            x0 = float(pos[:, 0].min()) - 0.5 * cutoff
            x1 = float(pos[:, 0].max()) + 0.5 * cutoff
            y0 = float(pos[:, 1].min()) - 0.5 * cutoff
            y1 = float(pos[:, 1].max()) + 0.5 * cutoff
        ncx = max(1, int(np.floor((x1 - x0) / cutoff)))
        ncy = max(1, int(np.floor((y1 - y0) / cutoff)))
        return CellGrid(x0, y0, x1, y1, ncx, ncy, periodic[0], periodic[1])


@dataclass
class NeighborList:
    """CSR pair cache for one (target, source) body pair."""

    offsets: np.ndarray  # int64 (n_target + 1,)
    j: np.ndarray  # int64 (n_pairs,) source indices, ascending per row
    dx: np.ndarray  # r_target - r_source, minimum image
    dy: np.ndarray
    r: np.ndarray
    ex: np.ndarray  # unit vector components of (dx, dy) / r
    ey: np.ndarray
    w: np.ndarray
    dwdr: np.ndarray
    cutoff: float
    stamp: int = 0

    @property
    def n_pairs(self) -> int:
        return self.j.shape[0]

    @property
    def n_targets(self) -> int:
        return self.offsets.shape[0] - 1

    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)


class NeighborBuildError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# compiled kernels
# ---------------------------------------------------------------------------


@njit(cache=True)
def _cell_of(x, y, x0, y0, csx, csy, ncx, ncy):
    cx = int(np.floor((x - x0) / csx))
    cy = int(np.floor((y - y0) / csy))
    if cx < 0:
        cx = 0
    elif cx >= ncx:
        cx = ncx - 1
    if cy < 0:
        cy = 0
    elif cy >= ncy:
        cy = ncy - 1
    return cx, cy


@njit(cache=True)
def _bucket_sort(pos, x0, y0, csx, csy, ncx, ncy):
    n = pos.shape[0]
    ncell = ncx * ncy
    counts = np.zeros(ncell + 1, dtype=np.int64)
    cell_id = np.empty(n, dtype=np.int64)
    for k in range(n):
        cx, cy = _cell_of(pos[k, 0], pos[k, 1], x0, y0, csx, csy, ncx, ncy)
        c = cy * ncx + cx
        cell_id[k] = c
        counts[c + 1] += 1
    starts = np.cumsum(counts)
    fill = starts[:-1].copy()
    order = np.empty(n, dtype=np.int64)
    for k in range(n):  # in index order: buckets stay ascending
        c = cell_id[k]
        order[fill[c]] = k
        fill[c] += 1
    return starts, order


@njit(cache=True)
def _axis_cells(c, nc, periodic, out):
    """Distinct candidate cells along one axis (periodic grids may have < 3)."""
    n = 0
    for o in range(-1, 2):
        g = c + o
        if periodic:
            g = g % nc
        elif g < 0 or g >= nc:
            continue
        dup = False
        for t in range(n):
            if out[t] == g:
                dup = True
                break
        if not dup:
            out[n] = g
            n += 1
    return n


@njit(cache=True, parallel=True)
def _count_pairs(
    tpos, spos, starts, order, x0, y0, csx, csy, ncx, ncy,
    lx, ly, per_x, per_y, cutoff2, same_body,
):
    nt = tpos.shape[0]
    out = np.zeros(nt, dtype=np.int64)
    for i in prange(nt):
        xi = tpos[i, 0]
        yi = tpos[i, 1]
        cx, cy = _cell_of(xi, yi, x0, y0, csx, csy, ncx, ncy)
        gxs = np.empty(3, dtype=np.int64)
        gys = np.empty(3, dtype=np.int64)
        n_gx = _axis_cells(cx, ncx, per_x, gxs)
        n_gy = _axis_cells(cy, ncy, per_y, gys)
        cnt = 0
        for a in range(n_gy):
            for b in range(n_gx):
                c = gys[a] * ncx + gxs[b]
                for s in range(starts[c], starts[c + 1]):
                    jj = order[s]
                    if same_body and jj == i:
                        continue
                    dx = xi - spos[jj, 0]
                    dy = yi - spos[jj, 1]
                    if per_x:
                        dx -= lx * np.rint(dx / lx)
                    if per_y:
                        dy -= ly * np.rint(dy / ly)
                    if dx * dx + dy * dy < cutoff2:
                        cnt += 1
        out[i] = cnt
    return out


@njit(cache=True, parallel=True)
def _fill_pairs(
    tpos, spos, starts, order, x0, y0, csx, csy, ncx, ncy,
    lx, ly, per_x, per_y, cutoff2, same_body, offsets, jout,
):
    nt = tpos.shape[0]
    for i in prange(nt):
        xi = tpos[i, 0]
        yi = tpos[i, 1]
        cx, cy = _cell_of(xi, yi, x0, y0, csx, csy, ncx, ncy)
        gxs = np.empty(3, dtype=np.int64)
        gys = np.empty(3, dtype=np.int64)
        n_gx = _axis_cells(cx, ncx, per_x, gxs)
        n_gy = _axis_cells(cy, ncy, per_y, gys)
        k = offsets[i]
        for a in range(n_gy):
            for b in range(n_gx):
                c = gys[a] * ncx + gxs[b]
                for s in range(starts[c], starts[c + 1]):
                    jj = order[s]
                    if same_body and jj == i:
                        continue
                    dx = xi - spos[jj, 0]
                    dy = yi - spos[jj, 1]
                    if per_x:
                        dx -= lx * np.rint(dx / lx)
                    if per_y:
                        dy -= ly * np.rint(dy / ly)
                    if dx * dx + dy * dy < cutoff2:
                        jout[k] = jj
                        k += 1
        # insertion sort the row so neighbor order is index-ascending
        lo = offsets[i]
        for a in range(lo + 1, k):
            v = jout[a]
            b = a - 1
            while b >= lo and jout[b] > v:
                jout[b + 1] = jout[b]
                b -= 1
            jout[b + 1] = v


@njit(cache=True, parallel=True)
def _pair_geometry(
    tpos, spos, offsets, jidx, h, lx, ly, per_x, per_y,
    dx, dy, rr, ex, ey, w, dwdr,
):
    sigma = SIGMA_2D
    nt = offsets.shape[0] - 1
    for i in prange(nt):
        for k in range(offsets[i], offsets[i + 1]):
            jj = jidx[k]
            ddx = tpos[i, 0] - spos[jj, 0]
            ddy = tpos[i, 1] - spos[jj, 1]
            if per_x:
                ddx -= lx * np.rint(ddx / lx)
            if per_y:
                ddy -= ly * np.rint(ddy / ly)
            r = np.sqrt(ddx * ddx + ddy * ddy)
            dx[k] = ddx
            dy[k] = ddy
            rr[k] = r
            if r > 0.0:
                ex[k] = ddx / r
                ey[k] = ddy / r
            else:
                ex[k] = 0.0
                ey[k] = 0.0
            q = r / h
            om = 1.0 - 0.5 * q
            w[k] = sigma / (h * h) * om**4 * (2.0 * q + 1.0)
            dwdr[k] = -5.0 * sigma / (h * h * h) * q * om**3


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _search(
    tpos: np.ndarray,
    spos: np.ndarray,
    spec: KernelSpec,
    grid: CellGrid,
    same_body: bool,
    stamp: int,
) -> NeighborList:
    cutoff = spec.cutoff
    csx = grid.lx / grid.ncx
    csy = grid.ly / grid.ncy
    starts, order = _bucket_sort(spos, grid.x0, grid.y0, csx, csy, grid.ncx, grid.ncy)
    args = (
        tpos, spos, starts, order, grid.x0, grid.y0, csx, csy,
        grid.ncx, grid.ncy, grid.lx, grid.ly,
        grid.periodic_x, grid.periodic_y, cutoff * cutoff, same_body,
    )
    counts = _count_pairs(*args)
    offsets = np.zeros(tpos.shape[0] + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    total = int(offsets[-1])
    jidx = np.empty(total, dtype=np.int64)
    _fill_pairs(*args, offsets, jidx)
    dx = np.empty(total)
    dy = np.empty(total)
    rr = np.empty(total)
    ex = np.empty(total)
    ey = np.empty(total)
    w = np.empty(total)
    dwdr = np.empty(total)
    _pair_geometry(
        tpos, spos, offsets, jidx, spec.h, grid.lx, grid.ly,
        grid.periodic_x, grid.periodic_y, dx, dy, rr, ex, ey, w, dwdr,
    )
    return NeighborList(offsets, jidx, dx, dy, rr, ex, ey, w, dwdr, cutoff, stamp)


def _check_inside(pos: np.ndarray, grid: CellGrid, label: str) -> None:
    bad_x = (pos[:, 0] < grid.x0) | (pos[:, 0] > grid.x1)
    bad_y = (pos[:, 1] < grid.y0) | (pos[:, 1] > grid.y1)
    bad = np.where((bad_x & ~grid.periodic_x) | (bad_y & ~grid.periodic_y))[0]
    if bad.size:
        raise NeighborBuildError(
            f"{label} particle {int(bad[0])} at {pos[bad[0]]} lies outside the "
            f"non-periodic grid [{grid.x0}, {grid.x1}] x [{grid.y0}, {grid.y1}]"
        )


def build_neighbor_lists(
    system: ParticleSystem,
    spec: KernelSpec,
    grid: CellGrid | None = None,
    stamp: int = 0,
) -> NeighborList:
    """Intra-body pair list at this body's smoothing length.

    When ``grid`` is omitted one is derived from the particle bounds.  An
    explicit non-periodic grid that does not cover every particle raises
    :class:`NeighborBuildError` naming the first offender.
    """
    pos = np.ascontiguousarray(system.pos)
    if not np.all(np.isfinite(pos)):
        raise NeighborBuildError("non-finite particle position")
    if grid is None:
        grid = CellGrid.for_points(pos, spec.cutoff)
    else:
        _check_inside(pos, grid, system.name or "body")
    return _search(pos, pos, spec, grid, same_body=True, stamp=stamp)


@dataclass
class CrossPairs:
    """Fluid-to-solid pair list plus the reversed (solid-to-fluid) view.

    Both views hold the same pair set; the reverse view is re-searched rather
    than permuted, so its separation vectors are exact negations of the
    forward ones.
    """

    forward: NeighborList  # targets: fluid, sources: solid
    reverse: NeighborList  # targets: solid, sources: fluid


def build_cross_pairs(
    fluid: ParticleSystem,
    solid: ParticleSystem,
    spec_hf: KernelSpec,
    spec_hs: KernelSpec | None = None,
    stamp: int = 0,
) -> CrossPairs:
    """Cross-resolution pairs between a fluid body and one solid/wall body.

    The pairs are found and the kernel evaluated at the fluid smoothing
    length, which must be at least the solid one so every interface solid
    particle is seen by nearby fluid.
    """
    if spec_hs is not None and spec_hf.h < spec_hs.h:
        raise ValueError(
            f"fluid smoothing length {spec_hf.h} must be >= solid {spec_hs.h}"
        )
    fpos = np.ascontiguousarray(fluid.pos)
    spos = np.ascontiguousarray(solid.pos)
    sgrid = CellGrid.for_points(spos, spec_hf.cutoff)
    fgrid = CellGrid.for_points(fpos, spec_hf.cutoff)
    forward = _search(fpos, spos, spec_hf, sgrid, same_body=False, stamp=stamp)
    reverse = _search(spos, fpos, spec_hf, fgrid, same_body=False, stamp=stamp)
    return CrossPairs(forward=forward, reverse=reverse)
