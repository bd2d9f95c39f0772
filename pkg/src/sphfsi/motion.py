"""Prescribed rigid-body motion scripts for walls and clamped regions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KIND_STATIC = 0
KIND_ROTATION = 1
KIND_TRANSLATION = 2


@dataclass(frozen=True)
class MotionScript:
    """Kinematic script applied to wall bodies and clamped solid particles.

    kinds
    -----
    static
        No motion (default for plain walls and clamps).
    rotation
        Harmonic roll ``theta(t) = amplitude * sin(omega t)`` about ``pivot``.
    translation
        Constant velocity ``(vx, vy)`` until ``t_stop``, then hold.
    """

    kind: int = KIND_STATIC
    pivot: tuple[float, float] = (0.0, 0.0)
    amplitude: float = 0.0  # radians
    omega: float = 0.0  # rad/s
    velocity: tuple[float, float] = (0.0, 0.0)
    t_stop: float = np.inf

    def params(self) -> np.ndarray:
        return np.array(
            [self.pivot[0], self.pivot[1], self.amplitude, self.omega,
             self.velocity[0], self.velocity[1], self.t_stop, 0.0]
        )

    def displacement(self, r0: np.ndarray, t: float) -> np.ndarray:
        """Displacement of reference points ``r0`` (N, 2) at time ``t``."""
        r0 = np.atleast_2d(r0)
        if self.kind == KIND_STATIC:
            return np.zeros_like(r0)
        if self.kind == KIND_ROTATION:
            theta = self.amplitude * np.sin(self.omega * t)
            c, s = np.cos(theta), np.sin(theta)
            px, py = self.pivot
            dx = r0[:, 0] - px
            dy = r0[:, 1] - py
            return np.column_stack([c * dx - s * dy - dx, s * dx + c * dy - dy])
        tau = min(t, self.t_stop)
        return np.broadcast_to(np.array(self.velocity) * tau, r0.shape).copy()

    def point_velocity(self, r0: np.ndarray, t: float) -> np.ndarray:
        r0 = np.atleast_2d(r0)
        if self.kind == KIND_STATIC:
            return np.zeros_like(r0)
        if self.kind == KIND_ROTATION:
            theta = self.amplitude * np.sin(self.omega * t)
            theta_dot = self.amplitude * self.omega * np.cos(self.omega * t)
            c, s = np.cos(theta), np.sin(theta)
            px, py = self.pivot
            dx = r0[:, 0] - px
            dy = r0[:, 1] - py
            rx = c * dx - s * dy
            ry = s * dx + c * dy
            return theta_dot * np.column_stack([-ry, rx])
        if t < self.t_stop:
            return np.broadcast_to(np.array(self.velocity), r0.shape).copy()
        return np.zeros_like(r0)

    def angle(self, t: float) -> float:
        if self.kind == KIND_ROTATION:
            return self.amplitude * np.sin(self.omega * t)
        return 0.0
