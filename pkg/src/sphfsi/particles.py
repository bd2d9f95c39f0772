"""Structure-of-arrays particle containers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from sphfsi.geometry import Region, lattice_fill


class BodyKind(enum.Enum):
    FLUID = "fluid"
    SOLID = "solid"
    WALL = "wall"


@dataclass
class ParticleSystem:
    """State of one body (fluid, elastic solid, or rigid wall).

    All per-particle arrays are float64 and share one index space.  ``mass``
    is fixed at construction (initial density times initial volume) and never
    changes; ``vol`` tracks ``mass / rho`` as the density evolves.
    """

    kind: BodyKind
    dp: float
    pos: np.ndarray  # (N, 2) m
    vel: np.ndarray  # (N, 2) m/s
    rho: np.ndarray  # (N,) kg/m^3
    p: np.ndarray  # (N,) Pa
    vol: np.ndarray  # (N,) m^2 per unit depth
    mass: np.ndarray  # (N,) kg
    rho0: float
    name: str = ""

    def __post_init__(self):
        n = self.pos.shape[0]
        for label, arr, shape in (
            ("pos", self.pos, (n, 2)),
            ("vel", self.vel, (n, 2)),
            ("rho", self.rho, (n,)),
            ("p", self.p, (n,)),
            ("vol", self.vol, (n,)),
            ("mass", self.mass, (n,)),
        ):
            if arr.shape != shape:
                raise ValueError(f"{label} has shape {arr.shape}, expected {shape}")
        if np.any(self.rho <= 0.0) or np.any(self.vol <= 0.0):
            raise ValueError("density and volume must be positive")

    @property
    def n(self) -> int:
        return self.pos.shape[0]

    def update_volume(self) -> None:
        """Refresh ``vol = mass / rho`` after a density update."""
        np.divide(self.mass, self.rho, out=self.vol)


def make_system(
    region: Region,
    dp: float,
    rho0: float,
    kind: BodyKind,
    name: str = "",
) -> ParticleSystem:
    """Fill ``region`` with a lattice and wrap it in a quiescent ParticleSystem."""
    pos = lattice_fill(region, dp)
    n = pos.shape[0]
    vol = np.full(n, dp * dp)
    return ParticleSystem(
        kind=kind,
        dp=dp,
        pos=pos,
        vel=np.zeros((n, 2)),
        rho=np.full(n, rho0),
        p=np.zeros(n),
        vol=vol,
        mass=rho0 * vol.copy(),
        rho0=rho0,
        name=name or kind.value,
    )
