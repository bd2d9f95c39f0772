"""Wendland C2 kernel in two dimensions.

The kernel has compact support ``2h`` and is written in the form

    W(r) = sigma / h^2 * (1 - q/2)^4 * (2q + 1),   q = r/h in [0, 2],

with the 2D normalization constant ``sigma = 7 / (4 pi)`` so that the integral
of W over its support disk is exactly one.  The radial derivative is

    dW/dr = -5 sigma / h^3 * q * (1 - q/2)^3,

which is zero at r = 0 and at the support boundary, and non-positive in
between.  Smoothing lengths follow the resolution conventions
``h_fluid = 1.3 dp_fluid`` and ``h_solid = 1.15 dp_solid``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SIGMA_2D = 7.0 / (4.0 * math.pi)

H_FACTOR_FLUID = 1.3
H_FACTOR_SOLID = 1.15


@dataclass(frozen=True)
class KernelSpec:
    """Wendland C2 kernel parameters for one body.

    Attributes
    ----------
    h : float
        Smoothing length (m).
    """

    h: float
    kind: str = "WendlandC2"
    dimension: int = 2

    def __post_init__(self):
        if self.h <= 0.0:
            raise ValueError(f"smoothing length must be positive, got {self.h}")
        if self.kind != "WendlandC2":
            raise ValueError(f"unsupported kernel kind: {self.kind!r}")
        if self.dimension != 2:
            raise ValueError("only 2D kernels are supported")

    @property
    def cutoff(self) -> float:
        """Support radius; the kernel vanishes at and beyond ``2 h``."""
        return 2.0 * self.h


def fluid_kernel(dp: float) -> KernelSpec:
    return KernelSpec(h=H_FACTOR_FLUID * dp)


def solid_kernel(dp: float) -> KernelSpec:
    return KernelSpec(h=H_FACTOR_SOLID * dp)


def kernel_eval(r, spec: KernelSpec):
    """Evaluate the kernel and its radial derivative at distance(s) ``r``.

    Parameters
    ----------
    r : float or ndarray
        Non-negative distance(s) in meters.
    spec : KernelSpec

    Returns
    -------
    (W, dW_dr)
        Kernel value (1/m^2) and radial derivative (1/m^3); both are zero at
        and beyond the cutoff, and ``dW_dr <= 0`` everywhere.
    """
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(r_arr < 0.0):
        raise ValueError("kernel distance must be non-negative")
    q = r_arr / spec.h
    inside = q < 2.0
    one_minus = np.where(inside, 1.0 - 0.5 * q, 0.0)
    w = SIGMA_2D / spec.h**2 * one_minus**4 * (2.0 * q + 1.0)
    dw = -5.0 * SIGMA_2D / spec.h**3 * q * one_minus**3
    w = np.where(inside, w, 0.0)
    dw = np.where(inside, dw, 0.0)
    if np.isscalar(r) or r_arr.ndim == 0:
        return float(w), float(dw)
    return w, dw


def kernel_w0(spec: KernelSpec) -> float:
    """Kernel value at zero separation, ``sigma / h^2``."""
    return SIGMA_2D / spec.h**2


def lattice_kernel_sum(dp: float, spec: KernelSpec) -> float:
    """Discrete kernel mass sum of an ideal square lattice (self included).

    Slightly above one for typical smoothing ratios; used to normalize
    summation-density estimates so a pristine lattice reproduces the
    reference density exactly.
    """
    reach = int(math.ceil(spec.cutoff / dp)) + 1
    total = kernel_w0(spec) * dp * dp
    for i in range(-reach, reach + 1):
        for j in range(-reach, reach + 1):
            if i == 0 and j == 0:
                continue
            w, _ = kernel_eval(math.hypot(i * dp, j * dp), spec)
            total += w * dp * dp
    return total
