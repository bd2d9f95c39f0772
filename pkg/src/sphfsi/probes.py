"""Time-series probes and oscillation post-processing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from sphfsi.particles import BodyKind


@dataclass
class ProbeSeries:
    probe_id: str
    kind: str  # displacement | trajectory | energy | pressure
    columns: list[str]
    times: list[float] = field(default_factory=list)
    values: list[tuple] = field(default_factory=list)

    def append(self, t: float, row: tuple) -> None:
        if self.times and t <= self.times[-1]:
            raise ValueError(f"probe {self.probe_id!r}: non-increasing sample time")
        self.times.append(t)
        self.values.append(row)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.times), np.asarray(self.values)

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.values)[:, self.columns.index(name)]


class Probe:
    probe_id: str
    kind: str
    columns: list[str]

    def bind(self, sim) -> None:  # noqa: ARG002
        return

    def sample(self, sim) -> tuple:
        raise NotImplementedError

    def make_series(self) -> ProbeSeries:
        return ProbeSeries(self.probe_id, self.kind, list(self.columns))


class PointDisplacementProbe(Probe):
    """Displacement of the solid particle nearest a reference point."""

    kind = "displacement"
    columns = ["ux", "uy"]

    def __init__(self, probe_id: str, body_name: str, point: tuple[float, float]):
        self.probe_id = probe_id
        self.body_name = body_name
        self.point = np.asarray(point, dtype=float)
        self.particle = -1

    def bind(self, sim) -> None:
        body = next(b for b in sim.solids if b.name == self.body_name)
        d = body.reference.r0 - self.point
        self.particle = int(np.argmin(d[:, 0] ** 2 + d[:, 1] ** 2))

    def sample(self, sim) -> tuple:
        body = next(b for b in sim.solids if b.name == self.body_name)
        if self.particle < 0 or self.particle >= body.system.n:
            raise RuntimeError(f"probe {self.probe_id!r} lost its particle")
        u = body.disp[self.particle]
        return (float(u[0]), float(u[1]))


class EnergyProbe(Probe):
    """Kinetic + potential-change + elastic strain energy of the whole scene.

    Reported total is the exact sum of the component columns.  ``e_norm`` is
    the drift relative to the first recorded sample, scaled by the magnitude
    of the potential energy at that sample (heights measured from the lowest
    initial fluid particle).
    """

    kind = "energy"
    columns = ["e_kin", "de_pot", "e_strain", "e_total", "e_norm"]

    def __init__(self, probe_id: str = "energy"):
        self.probe_id = probe_id
        self.y0_fluid = None
        self.y0_bodies = {}
        self.datum = 0.0
        self.ref_total = None
        self.ref_pot_abs = None

    def bind(self, sim) -> None:
        self.y0_fluid = sim.fluid.pos[:, 1].copy()
        self.datum = float(sim.fluid.pos[:, 1].min()) if sim.fluid.n else 0.0
        for b in sim.solids:
            if not b.is_wall:
                self.y0_bodies[b.name] = b.reference.r0[:, 1].copy()

    def _energies(self, sim) -> tuple[float, float, float]:
        g_mag = float(np.hypot(sim.gravity[0], sim.gravity[1]))
        f = sim.fluid
        e_kin = 0.5 * float((f.mass * (f.vel[:, 0] ** 2 + f.vel[:, 1] ** 2)).sum())
        de_pot = g_mag * float((f.mass * (f.pos[:, 1] - self.y0_fluid)).sum())
        e_strain = 0.0
        for b in sim.solids:
            if b.is_wall:
                continue
            e_kin += 0.5 * float(
                (b.system.mass * (b.system.vel[:, 0] ** 2 + b.system.vel[:, 1] ** 2)).sum()
            )
            de_pot += g_mag * float(
                (b.system.mass * (b.system.pos[:, 1] - self.y0_bodies[b.name])).sum()
            )
            st = b.stress_state()
            dens = 0.5 * np.einsum("nij,nij->n", st.pk2, st.strain)
            e_strain += float((b.reference.v0 * dens).sum())
        return e_kin, de_pot, e_strain

    def sample(self, sim) -> tuple:
        e_kin, de_pot, e_strain = self._energies(sim)
        total = e_kin + de_pot + e_strain
        if self.ref_total is None:
            self.ref_total = total
            g_mag = float(np.hypot(sim.gravity[0], sim.gravity[1]))
            pot_abs = g_mag * float(
                (sim.fluid.mass * (sim.fluid.pos[:, 1] - self.datum)).sum()
            )
            self.ref_pot_abs = abs(pot_abs) if pot_abs != 0.0 else 1.0
        e_norm = (total - self.ref_total) / self.ref_pot_abs
        return (e_kin, de_pot, e_strain, total, e_norm)


class PressureSensorProbe(Probe):
    """Kernel-interpolated (Shepard) fluid pressure at a fixed point."""

    kind = "pressure"
    columns = ["p"]

    def __init__(self, probe_id: str, point: tuple[float, float]):
        self.probe_id = probe_id
        self.point = np.asarray(point, dtype=float)

    def sample(self, sim) -> tuple:
        f = sim.fluid
        d = f.pos - self.point
        r = np.hypot(d[:, 0], d[:, 1])
        cutoff = sim.fluid_spec.cutoff
        near = r < cutoff
        if not np.any(near):
            return (0.0,)
        from sphfsi.kernels import kernel_eval

        w, _ = kernel_eval(r[near], sim.fluid_spec)
        wv = w * f.vol[near]
        denom = wv.sum()
        if denom <= 0.0:
            return (0.0,)
        return (float((f.p[near] * wv).sum() / denom),)


@dataclass
class OscillationMetrics:
    amplitude: dict[str, float]
    frequency: dict[str, float]
    window: tuple[float, float]


class InsufficientPeriodicityError(ValueError):
    pass


def _axis_metrics(t: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    mean = y.mean()
    s = y - mean
    up = np.where((s[:-1] < 0.0) & (s[1:] >= 0.0))[0]
    down = np.where((s[:-1] >= 0.0) & (s[1:] < 0.0))[0]
    if len(up) < 2:
        raise InsufficientPeriodicityError("insufficient periodicity: fewer than 2 mean upcrossings")
    # linear interpolation of crossing times
    tc = t[up] + (t[up + 1] - t[up]) * (-s[up]) / (s[up + 1] - s[up])
    # one extremum per half-period segment between consecutive crossings
    crossings = np.sort(np.concatenate([up, down]))
    maxima = []
    minima = []
    for a, b in zip(crossings[:-1], crossings[1:]):
        seg = s[a + 1 : b + 1]
        if len(seg) == 0:
            continue
        if seg.max() > 0:
            maxima.append(seg.max())
        else:
            minima.append(seg.min())
    if len(maxima) < 5 or len(minima) < 5:
        raise InsufficientPeriodicityError(
            f"insufficient periodicity: {len(maxima)} maxima / {len(minima)} minima, need >= 5"
        )
    amplitude = (mean + np.mean(maxima) - (mean + np.mean(minima))) / 2.0
    frequency = (len(tc) - 1) / (tc[-1] - tc[0])
    return float(amplitude), float(frequency)


def extract_oscillation_metrics(
    series: ProbeSeries, window: tuple[float, float]
) -> OscillationMetrics:
    """Amplitude and dominant frequency per value column over ``window``.

    Amplitude is half the spread between the mean of the peak maxima and the
    mean of the peak minima; frequency counts positive-going mean crossings.
    Raises :class:`InsufficientPeriodicityError` when fewer than five peaks
    fall inside the window.
    """
    t, v = series.as_arrays()
    lo, hi = window
    mask = (t >= lo) & (t <= hi)
    if mask.sum() < 4:
        raise InsufficientPeriodicityError("window contains too few samples")
    amp: dict[str, float] = {}
    freq: dict[str, float] = {}
    for c, name in enumerate(series.columns):
        a, f = _axis_metrics(t[mask], v[mask, c])
        amp[name] = a
        freq[name] = f
    return OscillationMetrics(amplitude=amp, frequency=freq, window=(lo, hi))
