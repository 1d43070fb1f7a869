"""IMU model: true motion plus white noise plus a frame-vibration tone at
the motor rotation frequency."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..controller import SensorReading
from .scenario import SensorNoise

# How strongly frame vibration couples into the rate gyro.
GYRO_VIB_COUPLE = 0.05  # rad/s per m/s^2

_AXIS_PHASES = (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)


class SensorModel:
    """Stateful IMU: deterministic for a given seed and input sequence."""

    def __init__(self, noise: SensorNoise, seed: int, gravity: float = 9.81):
        self.noise = noise
        self.gravity = gravity
        self._rng = np.random.default_rng(seed)
        self._phase = 0.0

    def sample(
        self,
        rates: tuple[float, float, float],
        attitude: tuple[float, float, float],
        world_accel: tuple[float, float, float],
        rpm_proxy: float,
        dt: float,
    ) -> SensorReading:
        """One IMU sample.

        rates/attitude are the craft's true body rates and Euler angles in
        the pilot frame; world_accel is its true acceleration.  rpm_proxy
        sets the vibration tone frequency.
        """
        self._phase += 2.0 * math.pi * (rpm_proxy / 60.0) * dt
        noise = self._rng.normal(size=6)

        roll, pitch, yaw = attitude
        sr, cr = math.sin(roll), math.cos(roll)
        sp, cp = math.sin(pitch), math.cos(pitch)
        sy, cy = math.sin(yaw), math.cos(yaw)
        # Specific force in body axes: transpose of Rz(yaw)Ry(pitch)Rx(roll)
        # applied to (world accel + g up).
        fx_w, fy_w, fz_w = world_accel[0], world_accel[1], world_accel[2] + self.gravity
        bx = cp * cy * fx_w + cp * sy * fy_w - sp * fz_w
        by = (
            (sr * sp * cy - cr * sy) * fx_w
            + (sr * sp * sy + cr * cy) * fy_w
            + sr * cp * fz_w
        )
        bz = (
            (cr * sp * cy + sr * sy) * fx_w
            + (cr * sp * sy - sr * cy) * fy_w
            + cr * cp * fz_w
        )

        vib = self.noise.vibration_ms2
        tones = [math.sin(self._phase + off) for off in _AXIS_PHASES]
        g_rms = self.noise.gyro_rads
        a_rms = self.noise.accel_ms2
        # plain floats keep the rest of the loop off numpy scalar types
        return SensorReading(
            gyro_roll=float(rates[0] + g_rms * noise[0] + vib * GYRO_VIB_COUPLE * tones[0]),
            gyro_pitch=float(rates[1] + g_rms * noise[1] + vib * GYRO_VIB_COUPLE * tones[1]),
            gyro_yaw=float(rates[2] + g_rms * noise[2] + vib * GYRO_VIB_COUPLE * tones[2]),
            accel_x=float(bx + a_rms * noise[3] + vib * tones[0]),
            accel_y=float(by + a_rms * noise[4] + vib * tones[1]),
            accel_z=float(bz + a_rms * noise[5] + vib * tones[2]),
        )
